#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmtbench/errors.hpp"
#include "gmtbench/forecast.hpp"
#include "gmtbench/lagreg.hpp"
#include "gmtbench/rng.hpp"
#include "gmtbench/transform.hpp"

namespace gmtbench::evalx {

// ---------------------------------------------------------------------------
// expanding-window splits

/// Expanding-window plan: the validation windows are the last F consecutive,
/// non-overlapping length-m blocks of the training region, and each fold
/// trains on everything before its validation window.
struct SplitPlan {
    struct Window {
        int train_end = 0;  // == val_start
        int val_start = 0;
        int val_end = 0;
    };
    int folds = 0;
    int horizon = 0;
    std::vector<Window> fold_windows;
};

inline SplitPlan make_splits(int n_train, int m, int folds) {
    if (m < 1 || folds < 1) throw InsufficientData("test size and folds must be >= 1");
    if (n_train < (folds + 1) * m)
        throw InsufficientData("need n_train >= (folds+1)*m; got n_train=" +
                               std::to_string(n_train) + ", m=" + std::to_string(m) +
                               ", folds=" + std::to_string(folds));
    SplitPlan plan;
    plan.folds = folds;
    plan.horizon = m;
    for (int i = 1; i <= folds; ++i) {
        SplitPlan::Window w;
        w.val_start = n_train - (folds - i + 1) * m;
        w.val_end = w.val_start + m;
        w.train_end = w.val_start;
        plan.fold_windows.push_back(w);
    }
    return plan;
}

// ---------------------------------------------------------------------------
// metrics

inline double rmse(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size() || y.empty())
        throw LengthMismatch("rmse requires equal non-empty lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - yhat[i];
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(y.size()));
}

/// |mean(y) - mean(yhat)|: the RMSE of the two window means.
inline double rmse_of_mean(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size() || y.empty())
        throw LengthMismatch("rmse_of_mean requires equal non-empty lengths");
    return std::abs(linalg::mean(y) - linalg::mean(yhat));
}

/// RMSE over consecutive non-overlapping block means (block == 1 reduces to
/// rmse, block == length to rmse_of_mean).
inline double block_mean_rmse(std::span<const double> y, std::span<const double> yhat, int block) {
    if (y.size() != yhat.size() || y.empty())
        throw LengthMismatch("block_mean_rmse requires equal non-empty lengths");
    if (block < 1 || y.size() % static_cast<std::size_t>(block) != 0)
        throw NotDivisible("window length must be divisible by the block size");
    const std::size_t nblocks = y.size() / static_cast<std::size_t>(block);
    std::vector<double> by(nblocks), byhat(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
        double sy = 0.0, sp = 0.0;
        for (int j = 0; j < block; ++j) {
            sy += y[b * static_cast<std::size_t>(block) + static_cast<std::size_t>(j)];
            sp += yhat[b * static_cast<std::size_t>(block) + static_cast<std::size_t>(j)];
        }
        by[b] = sy / block;
        byhat[b] = sp / block;
    }
    return rmse(by, byhat);
}

inline double mae(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size() || y.empty())
        throw LengthMismatch("mae requires equal non-empty lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - yhat[i]);
    return s / static_cast<double>(y.size());
}

/// Percentage error; observations indistinguishable from zero are skipped.
inline double mape(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size() || y.empty())
        throw LengthMismatch("mape requires equal non-empty lengths");
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (std::abs(y[i]) < 1e-12) continue;
        s += std::abs((y[i] - yhat[i]) / y[i]);
        ++n;
    }
    return n == 0 ? 0.0 : 100.0 * s / static_cast<double>(n);
}

struct MetricSet {
    double rmse = 0.0;
    double rmse_of_mean = 0.0;
    double block_mean_rmse = std::numeric_limits<double>::quiet_NaN();  // 5-year blocks
    double mae = 0.0;
    double mape = 0.0;
};

inline MetricSet compute_metrics(std::span<const double> y, std::span<const double> yhat,
                                 int block = 5) {
    MetricSet m;
    m.rmse = rmse(y, yhat);
    m.rmse_of_mean = rmse_of_mean(y, yhat);
    if (block >= 1 && y.size() % static_cast<std::size_t>(block) == 0)
        m.block_mean_rmse = block_mean_rmse(y, yhat, block);
    m.mae = mae(y, yhat);
    m.mape = mape(y, yhat);
    return m;
}

inline void to_json(nlohmann::json& j, const MetricSet& m) {
    j = nlohmann::json{{"rmse", m.rmse},
                       {"rmse_of_mean", m.rmse_of_mean},
                       {"mae", m.mae},
                       {"mape", m.mape}};
    if (std::isfinite(m.block_mean_rmse))
        j["block_mean_rmse"] = m.block_mean_rmse;
    else
        j["block_mean_rmse"] = nullptr;
}

// ---------------------------------------------------------------------------
// model roster

/// Forecaster or lag-regressor identity plus hyperparameters. Codes: NAV
/// (drift naive), POT (polynomial trend), EXS (exponential smoothing), ARI
/// (autoregression), LIN (linear lag regression), RID (ridge), KNN
/// (k-nearest neighbours), DTR (regression tree).
struct ModelSpec {
    std::string code;
    std::map<std::string, double> hyperparams;  // sorted keys keep JSON stable

    double hp(const std::string& key) const {
        const auto it = hyperparams.find(key);
        if (it == hyperparams.end()) throw ConfigError("missing hyperparameter \"" + key + "\"");
        return it->second;
    }
};

inline bool is_lag_regressor(const std::string& code) {
    return code == "LIN" || code == "RID" || code == "KNN" || code == "DTR";
}

inline bool is_known_model(const std::string& code) {
    return code == "NAV" || code == "POT" || code == "EXS" || code == "ARI" ||
           is_lag_regressor(code);
}

inline void to_json(nlohmann::json& j, const ModelSpec& s) {
    j = nlohmann::json{{"kind", s.code}, {"hyperparams", s.hyperparams}};
}

inline void from_json(const nlohmann::json& j, ModelSpec& s) {
    s.code = j.at("kind").get<std::string>();
    s.hyperparams = j.at("hyperparams").get<std::map<std::string, double>>();
    if (!is_known_model(s.code)) throw ConfigError("unknown model code \"" + s.code + "\"");
}

/// Fit the model on a (transformed) training series and forecast h steps in
/// the same space.
inline std::vector<double> forecast_in_space(const ModelSpec& spec, std::span<const double> train,
                                             int h) {
    using lagreg::LagMatrix;
    if (spec.code == "NAV") return forecast::fit_predict_naive_drift(train, h).values;
    if (spec.code == "POT")
        return forecast::fit_predict_polytrend(train, static_cast<int>(spec.hp("degree")), h)
            .values;
    if (spec.code == "EXS")
        return forecast::fit_predict_expsmoothing(train, spec.hp("alpha"), spec.hp("beta"),
                                                  spec.hp("use_trend") > 0.5, h)
            .values;
    if (spec.code == "ARI")
        return forecast::fit_predict_ar(train, static_cast<int>(spec.hp("p")), h).values;

    const int w = static_cast<int>(spec.hp("W"));
    const LagMatrix m = lagreg::embed(train, w);
    std::function<double(std::span<const double>)> one_step;
    if (spec.code == "LIN") {
        if (m.rows() < static_cast<std::size_t>(w) + 1)
            throw SingularRegression("LIN: fewer rows than coefficients");
        auto coef = lagreg::fit_ols(m);
        one_step = [coef = std::move(coef)](std::span<const double> q) {
            return lagreg::predict_linear(coef, q);
        };
    } else if (spec.code == "RID") {
        auto coef = lagreg::fit_ridge(m, spec.hp("alpha"));
        one_step = [coef = std::move(coef)](std::span<const double> q) {
            return lagreg::predict_linear(coef, q);
        };
    } else if (spec.code == "KNN") {
        const int k = static_cast<int>(spec.hp("k"));
        const auto weighting = spec.hp("inverse_distance") > 0.5
                                   ? lagreg::KnnWeighting::InverseDistance
                                   : lagreg::KnnWeighting::Uniform;
        one_step = [m, k, weighting](std::span<const double> q) {
            return lagreg::predict_knn(m, q, k, weighting);
        };
    } else if (spec.code == "DTR") {
        auto tree = lagreg::fit_cart(m, static_cast<int>(spec.hp("max_depth")),
                                     static_cast<int>(spec.hp("min_leaf")));
        one_step = [tree = std::move(tree)](std::span<const double> q) {
            return lagreg::predict_cart(tree, q);
        };
    } else {
        throw ConfigError("unknown model code \"" + spec.code + "\"");
    }
    return lagreg::recursive_forecast(one_step, train, w, h).values;
}

/// Rough effective-parameter count, used only to break exact CV-score ties
/// in favour of the simpler candidate.
inline double model_complexity(const ModelSpec& s) {
    if (s.code == "NAV") return 0.0;
    if (s.code == "POT") return 1.0 + s.hp("degree");
    if (s.code == "EXS") return 1.0 + (s.hp("use_trend") > 0.5 ? 1.0 : 0.0);
    if (s.code == "ARI") return 1.0 + s.hp("p");
    if (s.code == "LIN" || s.code == "RID") return 1.0 + s.hp("W");
    if (s.code == "KNN") return s.hp("W") + 1.0 / s.hp("k");
    if (s.code == "DTR") return s.hp("W") + s.hp("max_depth");
    throw ConfigError("unknown model code \"" + s.code + "\"");
}

// ---------------------------------------------------------------------------
// search spaces

/// Candidate source for a hyperparameter search. When the space is finite and
/// no larger than the iteration budget, candidates are enumerated in
/// canonical order (sampling without replacement would exhaust it anyway);
/// otherwise they are drawn from the seeded generator.
template <typename Cand>
struct CandidateSource {
    std::uint64_t finite_size = 0;  // 0 marks a non-enumerable space
    std::function<Cand(std::uint64_t)> at;
    std::function<Cand(std::mt19937_64&)> sample;
};

/// The declared search space per model family. W brackets every window the
/// benchmark needs; alpha/beta and the ridge penalty are continuous.
inline CandidateSource<ModelSpec> search_space(const std::string& code) {
    CandidateSource<ModelSpec> src;
    if (code == "NAV") {
        src.finite_size = 1;
        src.at = [](std::uint64_t) { return ModelSpec{"NAV", {}}; };
    } else if (code == "POT") {
        src.finite_size = 3;
        src.at = [](std::uint64_t i) {
            return ModelSpec{"POT", {{"degree", static_cast<double>(i + 1)}}};
        };
    } else if (code == "EXS") {
        src.sample = [](std::mt19937_64& gen) {
            const double alpha = rng::uniform_real(gen, 0.01, 0.99);
            const double beta = rng::uniform_real(gen, 0.01, 0.99);
            const double trend = static_cast<double>(rng::uniform_int(gen, 0, 1));
            return ModelSpec{"EXS", {{"alpha", alpha}, {"beta", beta}, {"use_trend", trend}}};
        };
    } else if (code == "ARI") {
        src.finite_size = 10;
        src.at = [](std::uint64_t i) {
            return ModelSpec{"ARI", {{"p", static_cast<double>(i + 1)}}};
        };
    } else if (code == "LIN") {
        src.finite_size = 50;
        src.at = [](std::uint64_t i) {
            return ModelSpec{"LIN", {{"W", static_cast<double>(i + 1)}}};
        };
    } else if (code == "RID") {
        src.sample = [](std::mt19937_64& gen) {
            const double w = static_cast<double>(rng::uniform_int(gen, 1, 50));
            const double alpha = rng::log_uniform(gen, 1e-4, 1e2);
            return ModelSpec{"RID", {{"W", w}, {"alpha", alpha}}};
        };
    } else if (code == "KNN") {
        src.sample = [](std::mt19937_64& gen) {
            const double w = static_cast<double>(rng::uniform_int(gen, 1, 50));
            const double k = static_cast<double>(rng::uniform_int(gen, 1, 25));
            const double inv = static_cast<double>(rng::uniform_int(gen, 0, 1));
            return ModelSpec{"KNN", {{"W", w}, {"k", k}, {"inverse_distance", inv}}};
        };
    } else if (code == "DTR") {
        src.sample = [](std::mt19937_64& gen) {
            const double w = static_cast<double>(rng::uniform_int(gen, 1, 50));
            const double depth = static_cast<double>(rng::uniform_int(gen, 1, 12));
            const double leaf = static_cast<double>(rng::uniform_int(gen, 1, 10));
            return ModelSpec{"DTR", {{"W", w}, {"max_depth", depth}, {"min_leaf", leaf}}};
        };
    } else {
        throw ConfigError("unknown model code \"" + code + "\"");
    }
    return src;
}

// ---------------------------------------------------------------------------
// random search

struct SearchPolicy {
    int iterations = 50;
    std::uint64_t seed = 0;
};

template <typename Cand>
struct CandidateTrace {
    Cand candidate;
    std::optional<double> score;  // empty when the candidate failed
    std::vector<double> fold_scores;
    std::string error;
};

template <typename Cand>
struct SearchResult {
    Cand best;
    double best_score = 0.0;
    std::size_t best_index = 0;
    std::vector<CandidateTrace<Cand>> traces;
};

/// Evaluate `iterations` candidates drawn from the source with a seeded
/// generator and return the argmin of the score. Exact score ties break
/// toward lower complexity, then toward the earlier draw. Candidates that
/// throw are recorded and skipped; if every candidate fails the search fails.
template <typename Cand>
SearchResult<Cand> random_search(
    const CandidateSource<Cand>& source, const SearchPolicy& policy,
    const std::function<std::optional<double>(const Cand&, std::vector<double>&, std::string&)>&
        evaluate,
    const std::function<double(const Cand&)>& complexity) {
    if (policy.iterations < 1) throw InsufficientData("search requires at least one iteration");

    std::vector<Cand> candidates;
    if (source.finite_size > 0 &&
        source.finite_size <= static_cast<std::uint64_t>(policy.iterations)) {
        for (std::uint64_t i = 0; i < source.finite_size; ++i) candidates.push_back(source.at(i));
    } else {
        std::mt19937_64 gen(policy.seed);
        for (int i = 0; i < policy.iterations; ++i) candidates.push_back(source.sample(gen));
    }

    SearchResult<Cand> result;
    bool have_best = false;
    double best_complexity = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        CandidateTrace<Cand> trace;
        trace.candidate = candidates[i];
        trace.score = evaluate(candidates[i], trace.fold_scores, trace.error);
        if (trace.score) {
            const double c = complexity(candidates[i]);
            const bool better =
                !have_best || *trace.score < result.best_score ||
                (*trace.score == result.best_score && c < best_complexity);
            if (better) {
                have_best = true;
                result.best = candidates[i];
                result.best_score = *trace.score;
                result.best_index = i;
                best_complexity = c;
            }
        }
        result.traces.push_back(std::move(trace));
    }
    if (!have_best) throw AllCandidatesFailed("every candidate in the search raised an error");
    return result;
}

// ---------------------------------------------------------------------------
// cross-validated tuning through the preparation pipeline

/// Tune one model family on the training window: candidates are scored by
/// mean validation RMSE across the expanding folds, with the preparation
/// pipeline refitted on each fold's train region and forecasts inverted back
/// to the original scale before scoring.
inline SearchResult<ModelSpec> tune_model(const std::string& code,
                                          std::span<const double> train_raw,
                                          const transform::PrepSpec& prep, const SplitPlan& splits,
                                          const SearchPolicy& policy) {
    struct FoldContext {
        transform::FittedPipeline pipeline;
        std::span<const double> val;
    };
    std::vector<FoldContext> folds;
    for (const auto& w : splits.fold_windows) {
        FoldContext ctx;
        ctx.pipeline = transform::fit_pipeline(
            train_raw.subspan(0, static_cast<std::size_t>(w.train_end)), prep);
        ctx.val = train_raw.subspan(static_cast<std::size_t>(w.val_start),
                                    static_cast<std::size_t>(w.val_end - w.val_start));
        folds.push_back(std::move(ctx));
    }

    const auto evaluate = [&](const ModelSpec& cand, std::vector<double>& fold_scores,
                              std::string& error) -> std::optional<double> {
        double total = 0.0;
        fold_scores.clear();
        for (const auto& fold : folds) {
            try {
                const auto zf = forecast_in_space(cand, fold.pipeline.transformed_train,
                                                  splits.horizon);
                const auto yhat = transform::invert_forecast(fold.pipeline, zf);
                const double r = rmse(fold.val, yhat);
                if (!std::isfinite(r)) throw DegenerateData("non-finite fold RMSE");
                fold_scores.push_back(r);
                total += r;
            } catch (const std::exception& e) {
                error = e.what();
                return std::nullopt;
            }
        }
        return total / static_cast<double>(folds.size());
    };

    return random_search<ModelSpec>(search_space(code), policy, evaluate, model_complexity);
}

}  // namespace gmtbench::evalx
