#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmtbench/errors.hpp"
#include "gmtbench/linalg.hpp"

namespace gmtbench::transform {

enum class Power { None, BoxCox, YeoJohnson };

inline std::string power_code(Power p) {
    switch (p) {
        case Power::BoxCox: return "BC";
        case Power::YeoJohnson: return "YJ";
        default: return "NO";
    }
}

inline Power power_from_code(const std::string& code) {
    if (code == "NO") return Power::None;
    if (code == "BC") return Power::BoxCox;
    if (code == "YJ") return Power::YeoJohnson;
    throw ConfigError("unknown power transform code \"" + code + "\"");
}

/// Declarative data-preparation choice: differencing order in {0,1}, power
/// transform family, and standardization (always on in the benchmark grid).
struct PrepSpec {
    int diff_order = 0;
    Power power = Power::None;
    bool scale = true;

    std::string code() const { return "D" + std::to_string(diff_order) + "-" + power_code(power); }
};

inline PrepSpec prep_from_code(const std::string& code) {
    if (code.size() != 5 || code[0] != 'D' || code[2] != '-' || (code[1] != '0' && code[1] != '1'))
        throw ConfigError("bad preparation code \"" + code + "\" (expected e.g. \"D1-YJ\")");
    PrepSpec s;
    s.diff_order = code[1] - '0';
    s.power = power_from_code(code.substr(3));
    return s;
}

inline constexpr double kOffsetEpsilon = 1e-6;

// ---------------------------------------------------------------------------
// elementary transforms

inline std::vector<double> difference(std::span<const double> x) {
    if (x.size() < 2) throw TooShort("difference requires at least 2 values");
    std::vector<double> d(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) d[i] = x[i + 1] - x[i];
    return d;
}

/// Exact inverse of difference: cumulative sums from the anchor.
inline std::vector<double> undifference(std::span<const double> d, double anchor) {
    std::vector<double> out(d.size());
    double acc = anchor;
    for (std::size_t i = 0; i < d.size(); ++i) {
        acc += d[i];
        out[i] = acc;
    }
    return out;
}

// The expm1/log1p formulations below are algebraically identical to the
// textbook power laws but stay accurate as lambda approaches the log branch.

// The expm1/log1p forms are algebraically the textbook power laws but stay
// accurate as lambda approaches the log branch; lambda == 1 is kept exact.

inline double boxcox_scalar(double y, double lambda) {
    if (y <= 0.0) throw NonPositiveInput("Box-Cox requires strictly positive input");
    if (lambda == 0.0) return std::log(y);
    if (lambda == 1.0) return y - 1.0;
    return std::expm1(lambda * std::log(y)) / lambda;  // (y^lambda - 1) / lambda
}

inline double boxcox_inverse_scalar(double z, double lambda) {
    if (lambda == 0.0) return std::exp(z);
    if (lambda == 1.0) return z + 1.0;
    const double base = lambda * z;
    if (base <= -1.0) throw InverseDomain("Box-Cox inverse requires lambda*z + 1 > 0");
    return std::exp(std::log1p(base) / lambda);
}

inline double yeojohnson_scalar(double y, double lambda) {
    if (lambda == 1.0) return y;
    if (y >= 0.0) {
        if (lambda == 0.0) return std::log1p(y);
        return std::expm1(lambda * std::log1p(y)) / lambda;  // ((y+1)^l - 1) / l
    }
    if (lambda == 2.0) return -std::log1p(-y);
    return -std::expm1((2.0 - lambda) * std::log1p(-y)) / (2.0 - lambda);
}

inline double yeojohnson_inverse_scalar(double z, double lambda) {
    if (lambda == 1.0) return z;
    if (z >= 0.0) {
        if (lambda == 0.0) return std::expm1(z);
        const double base = lambda * z;
        if (base <= -1.0) throw InverseDomain("Yeo-Johnson inverse out of domain");
        return std::expm1(std::log1p(base) / lambda);
    }
    if (lambda == 2.0) return -std::expm1(-z);
    const double base = -(2.0 - lambda) * z;
    if (base <= -1.0) throw InverseDomain("Yeo-Johnson inverse out of domain");
    return -std::expm1(std::log1p(base) / (2.0 - lambda));
}

inline std::vector<double> boxcox_forward(std::span<const double> y, double lambda) {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = boxcox_scalar(y[i], lambda);
    return out;
}

inline std::vector<double> yeojohnson_forward(std::span<const double> y, double lambda) {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = yeojohnson_scalar(y[i], lambda);
    return out;
}

// ---------------------------------------------------------------------------
// lambda estimation

namespace detail {

/// Profile Gaussian log-likelihood of the transformed data, including the
/// Jacobian term: (lambda-1) sum log y for Box-Cox,
/// sum sign(y)(lambda-1) log(|y|+1) for Yeo-Johnson.
inline double profile_loglik(std::span<const double> y, Power family, double lambda) {
    const auto n = static_cast<double>(y.size());
    double mean = 0.0;
    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        z[i] = family == Power::BoxCox ? boxcox_scalar(y[i], lambda)
                                       : yeojohnson_scalar(y[i], lambda);
        if (!std::isfinite(z[i])) return -std::numeric_limits<double>::infinity();
        mean += z[i];
    }
    mean /= n;
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= n;
    if (!(var > 0.0) || !std::isfinite(var)) return -std::numeric_limits<double>::infinity();

    double jacobian = 0.0;
    if (family == Power::BoxCox) {
        for (double v : y) jacobian += std::log(v);
    } else {
        for (double v : y) jacobian += (v >= 0 ? 1.0 : -1.0) * std::log1p(std::abs(v));
    }
    return -0.5 * n * std::log(var) + (lambda - 1.0) * jacobian;
}

}  // namespace detail

/// Maximum-likelihood lambda on [-5, 5]: coarse scan to bracket the optimum,
/// then golden-section refinement to a 1e-6 bracket.
inline double fit_lambda(std::span<const double> y, Power family) {
    if (family == Power::None) return 1.0;
    if (y.size() < 4) throw TooShort("fit_lambda requires at least 4 values");
    if (family == Power::BoxCox)
        for (double v : y)
            if (v <= 0.0) throw NonPositiveInput("Box-Cox lambda fit requires positive data");

    const double lo = -5.0, hi = 5.0;
    double best_lambda = lo;
    double best_ll = -std::numeric_limits<double>::infinity();
    const int coarse = 101;
    for (int i = 0; i < coarse; ++i) {
        const double lam = lo + (hi - lo) * i / (coarse - 1);
        const double ll = detail::profile_loglik(y, family, lam);
        if (ll > best_ll) {
            best_ll = ll;
            best_lambda = lam;
        }
    }
    if (!std::isfinite(best_ll))
        throw DegenerateData("transformed data has zero variance for every lambda");

    double a = std::max(lo, best_lambda - 0.1);
    double b = std::min(hi, best_lambda + 0.1);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = detail::profile_loglik(y, family, x1);
    double f2 = detail::profile_loglik(y, family, x2);
    while (b - a > 1e-6) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = detail::profile_loglik(y, family, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = detail::profile_loglik(y, family, x1);
        }
    }
    return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// fitted pipeline

/// A fitted, exactly invertible realization of a PrepSpec: difference first
/// (if D1), then offset + power transform, then standardization. All
/// parameters come from the training window only.
struct FittedPipeline {
    PrepSpec spec;
    double lambda = 1.0;
    double offset = 0.0;  // positive only for Box-Cox on non-positive data
    double mean = 0.0;
    double std = 1.0;
    double anchor = 0.0;  // last raw training value, seeds inverse differencing
    long train_len = 0;
    std::vector<double> transformed_train;  // image of the training window
};

namespace detail {

inline std::vector<double> power_forward(std::span<const double> x, Power power, double lambda) {
    switch (power) {
        case Power::BoxCox: return boxcox_forward(x, lambda);
        case Power::YeoJohnson: return yeojohnson_forward(x, lambda);
        default: return std::vector<double>(x.begin(), x.end());
    }
}

}  // namespace detail

inline FittedPipeline fit_pipeline(std::span<const double> train, const PrepSpec& spec) {
    // enough data for two transformed points; a power transform additionally
    // needs four points for the lambda fit, enforced by fit_lambda
    if (train.size() < static_cast<std::size_t>(spec.diff_order) + 2)
        throw TooShort("fit_pipeline: training window too short");

    FittedPipeline p;
    p.spec = spec;
    p.anchor = train.back();
    p.train_len = static_cast<long>(train.size());

    std::vector<double> work(train.begin(), train.end());
    if (spec.diff_order == 1) work = difference(work);

    if (spec.power == Power::BoxCox) {
        const double mn = *std::min_element(work.begin(), work.end());
        if (mn <= 0.0) p.offset = std::abs(mn) + kOffsetEpsilon;
        for (double& v : work) v += p.offset;
    }
    if (spec.power != Power::None) p.lambda = fit_lambda(work, spec.power);
    work = detail::power_forward(work, spec.power, p.lambda);

    if (spec.scale) {
        p.mean = linalg::mean(work);
        const double var = linalg::variance(work);
        if (!(var > 0.0)) throw DegenerateData("zero variance after transform");
        p.std = std::sqrt(var);
        for (double& v : work) v = (v - p.mean) / p.std;
    }
    p.transformed_train = std::move(work);
    return p;
}

/// Transform a continuation of the training series with frozen parameters.
/// For D1 pipelines the first difference is taken against the anchor, so that
/// invert_forecast(apply(x)) == x.
inline std::vector<double> apply(const FittedPipeline& p, std::span<const double> x) {
    std::vector<double> work;
    if (p.spec.diff_order == 1) {
        work.resize(x.size());
        double prev = p.anchor;
        for (std::size_t i = 0; i < x.size(); ++i) {
            work[i] = x[i] - prev;
            prev = x[i];
        }
    } else {
        work.assign(x.begin(), x.end());
    }
    if (p.spec.power == Power::BoxCox) {
        for (double& v : work) {
            v += p.offset;
            if (v <= 0.0) throw NonPositiveInput("value not positive after Box-Cox offset");
        }
    }
    work = detail::power_forward(work, p.spec.power, p.lambda);
    if (p.spec.scale)
        for (double& v : work) v = (v - p.mean) / p.std;
    return work;
}

/// Invert a transformed-space forecast back to the original scale: unscale,
/// inverse power transform (minus offset for Box-Cox), then cumulative sums
/// from the anchor for D1.
inline std::vector<double> invert_forecast(const FittedPipeline& p, std::span<const double> z) {
    std::vector<double> work(z.begin(), z.end());
    if (p.spec.scale)
        for (double& v : work) v = v * p.std + p.mean;
    switch (p.spec.power) {
        case Power::BoxCox:
            for (double& v : work) v = boxcox_inverse_scalar(v, p.lambda) - p.offset;
            break;
        case Power::YeoJohnson:
            for (double& v : work) v = yeojohnson_inverse_scalar(v, p.lambda);
            break;
        default: break;
    }
    if (p.spec.diff_order == 1) work = undifference(work, p.anchor);
    return work;
}

inline void to_json(nlohmann::json& j, const FittedPipeline& p) {
    j = nlohmann::json{{"spec",
                        {{"diff_order", p.spec.diff_order},
                         {"power", power_code(p.spec.power)},
                         {"scale", p.spec.scale}}},
                       {"lambda", p.lambda},
                       {"offset", p.offset},
                       {"mean", p.mean},
                       {"std", p.std},
                       {"anchor", p.anchor},
                       {"train_len", p.train_len}};
}

}  // namespace gmtbench::transform
