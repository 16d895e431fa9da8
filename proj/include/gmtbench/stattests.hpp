#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <json.hpp>

#include "gmtbench/errors.hpp"
#include "gmtbench/linalg.hpp"

namespace gmtbench::stattests {

/// Unit-root / stationarity test outcome. ADF rejects (stationary) when the
/// statistic falls below the critical value; KPSS rejects (non-stationary)
/// when the statistic exceeds it.
struct TestResult {
    double statistic = 0.0;
    int lags = 0;
    double crit_1pct = 0.0, crit_5pct = 0.0, crit_10pct = 0.0;
    bool reject_at_5pct = false;
};

/// Augmented Dickey-Fuller test, constant-only specification:
///   dx_t = alpha + gamma x_{t-1} + sum_{i=1..p} phi_i dx_{t-i} + e_t
/// with the lag order fixed by Schwert's rule p = floor(12 (n/100)^{1/4}).
/// The statistic is the t-ratio of gamma; critical values are the standard
/// asymptotic constant-case table.
inline TestResult adf_test(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 20) throw TooShort("adf_test requires at least 20 observations");

    const int p = static_cast<int>(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25));
    const std::size_t rows = n - 1 - static_cast<std::size_t>(p);
    const std::size_t k = 2 + static_cast<std::size_t>(p);
    if (rows <= k) throw TooShort("adf_test: too few observations for the fixed lag order");

    linalg::Matrix design(rows, std::vector<double>(k));
    std::vector<double> dy(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + 1 + static_cast<std::size_t>(p);
        dy[r] = x[t] - x[t - 1];
        design[r][0] = 1.0;
        design[r][1] = x[t - 1];
        for (int i = 1; i <= p; ++i)
            design[r][1 + static_cast<std::size_t>(i)] =
                x[t - static_cast<std::size_t>(i)] - x[t - static_cast<std::size_t>(i) - 1];
    }

    const auto fit = linalg::ols(design, dy);
    const double sigma2 = fit.rss / static_cast<double>(rows - k);
    const double gamma_var = linalg::gram_inverse_column(design, 1)[1];
    if (!(gamma_var > 0.0)) throw SingularRegression("adf_test: non-positive coefficient variance");

    TestResult r;
    r.lags = p;
    r.statistic = fit.coef[1] / std::sqrt(sigma2 * gamma_var);
    r.crit_1pct = -3.43;
    r.crit_5pct = -2.86;
    r.crit_10pct = -2.57;
    r.reject_at_5pct = r.statistic < r.crit_5pct;
    return r;
}

/// KPSS level-stationarity test with Newey-West long-run variance (Bartlett
/// kernel, bandwidth floor(4 (n/100)^{1/4})).
inline TestResult kpss_test(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 20) throw TooShort("kpss_test requires at least 20 observations");
    const auto nd = static_cast<double>(n);

    const double mu = linalg::mean(x);
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = x[i] - mu;

    double cum = 0.0, num = 0.0;
    for (double v : e) {
        cum += v;
        num += cum * cum;
    }
    num /= nd * nd;

    const int l = static_cast<int>(4.0 * std::pow(nd / 100.0, 0.25));
    double lrv = 0.0;
    for (double v : e) lrv += v * v;
    lrv /= nd;
    for (int j = 1; j <= l; ++j) {
        double gamma_j = 0.0;
        for (std::size_t t = static_cast<std::size_t>(j); t < n; ++t)
            gamma_j += e[t] * e[t - static_cast<std::size_t>(j)];
        gamma_j /= nd;
        lrv += 2.0 * (1.0 - static_cast<double>(j) / (l + 1.0)) * gamma_j;
    }
    if (!(lrv > 0.0)) throw DegenerateData("kpss_test: non-positive long-run variance");

    TestResult r;
    r.lags = l;
    r.statistic = num / lrv;
    r.crit_1pct = 0.739;
    r.crit_5pct = 0.463;
    r.crit_10pct = 0.347;
    r.reject_at_5pct = r.statistic > r.crit_5pct;
    return r;
}

inline void to_json(nlohmann::json& j, const TestResult& r) {
    j = nlohmann::json{{"statistic", r.statistic},
                       {"lags", r.lags},
                       {"crit_values", {{"1%", r.crit_1pct}, {"5%", r.crit_5pct}, {"10%", r.crit_10pct}}},
                       {"reject_at_5pct", r.reject_at_5pct}};
}

}  // namespace gmtbench::stattests
