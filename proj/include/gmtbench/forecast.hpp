#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "gmtbench/errors.hpp"
#include "gmtbench/linalg.hpp"

namespace gmtbench::forecast {

/// An h-step-ahead point forecast; origin is the index of the last training
/// observation.
struct Forecast {
    std::vector<double> values;
    long origin = 0;

    std::size_t horizon() const { return values.size(); }
};

/// Drift-naive baseline: extrapolate from the last observation along the
/// average historical change per step,
///   yhat_{t+k} = y_t + k (y_t - y_1) / (t - 1).
inline Forecast fit_predict_naive_drift(std::span<const double> train, int h) {
    const std::size_t t = train.size();
    if (t < 2) throw TooShort("naive drift requires at least 2 observations");
    if (h < 1) throw TooShort("horizon must be >= 1");
    const double drift = (train.back() - train.front()) / static_cast<double>(t - 1);
    Forecast f;
    f.origin = static_cast<long>(t) - 1;
    f.values.resize(static_cast<std::size_t>(h));
    for (int k = 1; k <= h; ++k)
        f.values[static_cast<std::size_t>(k - 1)] = train.back() + k * drift;
    return f;
}

/// Least-squares polynomial in the time index, extrapolated past the end of
/// the training window. The index is centered and scaled for conditioning.
inline Forecast fit_predict_polytrend(std::span<const double> train, int degree, int h) {
    const std::size_t t = train.size();
    if (degree < 1 || degree > 3) throw TooShort("polytrend degree must be in {1,2,3}");
    // degree + 1 points determine the polynomial exactly; more are preferred
    if (t < static_cast<std::size_t>(degree) + 1)
        throw TooShort("polytrend requires at least degree + 1 observations");
    if (h < 1) throw TooShort("horizon must be >= 1");

    const double center = (static_cast<double>(t) - 1.0) / 2.0;
    const double scale = std::max(1.0, (static_cast<double>(t) - 1.0) / 2.0);
    const auto code = [&](double i) { return (i - center) / scale; };

    linalg::Matrix design(t, std::vector<double>(static_cast<std::size_t>(degree) + 1));
    for (std::size_t i = 0; i < t; ++i) {
        double u = 1.0;
        const double ui = code(static_cast<double>(i));
        for (int d = 0; d <= degree; ++d) {
            design[i][static_cast<std::size_t>(d)] = u;
            u *= ui;
        }
    }
    const auto fit = linalg::ols(design, train);

    Forecast f;
    f.origin = static_cast<long>(t) - 1;
    f.values.resize(static_cast<std::size_t>(h));
    for (int k = 1; k <= h; ++k) {
        const double ui = code(static_cast<double>(t) - 1.0 + k);
        double u = 1.0, yhat = 0.0;
        for (int d = 0; d <= degree; ++d) {
            yhat += fit.coef[static_cast<std::size_t>(d)] * u;
            u *= ui;
        }
        f.values[static_cast<std::size_t>(k - 1)] = yhat;
    }
    return f;
}

/// Simple exponential smoothing (flat forecast at the final level) or Holt's
/// linear trend. Recursions start from level = y_1, trend = y_2 - y_1.
inline Forecast fit_predict_expsmoothing(std::span<const double> train, double alpha, double beta,
                                         bool use_trend, int h) {
    const std::size_t t = train.size();
    if (t < 3) throw TooShort("exponential smoothing requires at least 3 observations");
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0))
        throw TooShort("alpha and beta must lie in (0,1)");
    if (h < 1) throw TooShort("horizon must be >= 1");

    double level = train[0];
    double trend = train[1] - train[0];
    for (std::size_t i = 1; i < t; ++i) {
        if (use_trend) {
            const double prev_level = level;
            level = alpha * train[i] + (1.0 - alpha) * (level + trend);
            trend = beta * (level - prev_level) + (1.0 - beta) * trend;
        } else {
            level = alpha * train[i] + (1.0 - alpha) * level;
        }
    }

    Forecast f;
    f.origin = static_cast<long>(t) - 1;
    f.values.resize(static_cast<std::size_t>(h));
    for (int k = 1; k <= h; ++k)
        f.values[static_cast<std::size_t>(k - 1)] = use_trend ? level + k * trend : level;
    return f;
}

/// AR(p) with intercept, fitted by least squares on lagged rows; multi-step
/// forecasts feed predictions back in as lags.
inline Forecast fit_predict_ar(std::span<const double> train, int p, int h) {
    const std::size_t t = train.size();
    if (p < 1) throw TooShort("AR order must be >= 1");
    if (t < static_cast<std::size_t>(p) + 5)
        throw TooShort("AR(p) requires at least p + 5 observations");
    if (h < 1) throw TooShort("horizon must be >= 1");

    // a constant series makes the lag columns collinear with the intercept;
    // the forecast is the constant itself
    const auto [mn, mx] = std::minmax_element(train.begin(), train.end());
    if (*mn == *mx) {
        Forecast flat;
        flat.origin = static_cast<long>(t) - 1;
        flat.values.assign(static_cast<std::size_t>(h), *mn);
        return flat;
    }

    const auto ps = static_cast<std::size_t>(p);
    const std::size_t rows = t - ps;
    linalg::Matrix design(rows, std::vector<double>(ps + 1));
    std::vector<double> target(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        target[r] = train[r + ps];
        design[r][0] = 1.0;
        for (std::size_t i = 1; i <= ps; ++i) design[r][i] = train[r + ps - i];
    }
    const auto fit = linalg::ols(design, target);

    std::vector<double> buf(train.begin(), train.end());
    Forecast f;
    f.origin = static_cast<long>(t) - 1;
    f.values.reserve(static_cast<std::size_t>(h));
    for (int k = 0; k < h; ++k) {
        double yhat = fit.coef[0];
        for (std::size_t i = 1; i <= ps; ++i) yhat += fit.coef[i] * buf[buf.size() - i];
        buf.push_back(yhat);
        f.values.push_back(yhat);
    }
    return f;
}

}  // namespace gmtbench::forecast
