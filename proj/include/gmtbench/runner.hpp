#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "gmtbench/errors.hpp"
#include "gmtbench/evalx.hpp"
#include "gmtbench/ingest.hpp"
#include "gmtbench/rng.hpp"
#include "gmtbench/svg.hpp"
#include "gmtbench/transform.hpp"

namespace gmtbench::runner {

// ---------------------------------------------------------------------------
// configuration

inline constexpr int kConfigSchemaVersion = 1;

/// One benchmark campaign: the preparation grid, test sizes, tuning policy
/// and model roster, applied to a single data file.
struct ExperimentConfig {
    std::string data_path;
    std::string column = "J-D";
    std::vector<transform::PrepSpec> preps;
    std::vector<int> test_sizes;
    int folds = 3;
    int iterations = 50;
    std::uint64_t base_seed = 0;
    std::vector<std::string> roster;
};

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        if (!j.contains("schema") || !j.at("schema").is_number_integer() ||
            j.at("schema").get<int>() != kConfigSchemaVersion)
            throw ConfigError("config must declare \"schema\": " +
                              std::to_string(kConfigSchemaVersion));
        cfg.data_path = j.at("data").get<std::string>();
        if (j.contains("column")) cfg.column = j.at("column").get<std::string>();
        for (const auto& code : j.at("preps"))
            cfg.preps.push_back(transform::prep_from_code(code.get<std::string>()));
        for (const auto& t : j.at("test_sizes")) {
            const int m = t.get<int>();
            if (m < 1) throw ConfigError("test sizes must be >= 1");
            cfg.test_sizes.push_back(m);
        }
        if (j.contains("folds")) cfg.folds = j.at("folds").get<int>();
        if (j.contains("iterations")) cfg.iterations = j.at("iterations").get<int>();
        if (j.contains("seed")) cfg.base_seed = j.at("seed").get<std::uint64_t>();
        for (const auto& m : j.at("models")) {
            const auto code = m.get<std::string>();
            if (!evalx::is_known_model(code)) throw ConfigError("unknown model code \"" + code + "\"");
            cfg.roster.push_back(code);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (cfg.preps.empty() || cfg.test_sizes.empty() || cfg.roster.empty())
        throw ConfigError("config needs non-empty preps, test_sizes and models");
    if (cfg.folds < 1 || cfg.iterations < 1)
        throw ConfigError("folds and iterations must be >= 1");
    return cfg;
}

/// Bounds that depend on the data length: every test size must leave enough
/// training data for the expanding folds.
inline void validate_against_data(const ExperimentConfig& cfg, std::size_t n) {
    for (int t : cfg.test_sizes) {
        const long n_train = static_cast<long>(n) - t;
        const long needed = static_cast<long>(cfg.folds + 1) * t;
        if (n_train < needed)
            throw ConfigError("test size " + std::to_string(t) + " violates n - T >= (folds+1)*T (n=" +
                              std::to_string(n) + ", folds=" + std::to_string(cfg.folds) + ")");
    }
}

// ---------------------------------------------------------------------------
// run results

struct RunResult {
    std::string run_key;  // e.g. "D1-YJ-T10", lag regressions "W29-D1-YJ-T10"
    std::string model;
    int window = 0;  // 0 when not a lag regression
    std::string prep_code;
    int test_size = 0;
    std::uint64_t seed = 0;
    evalx::MetricSet metrics;
    evalx::ModelSpec chosen;
    double cv_score = 0.0;
    std::vector<std::tuple<int, double, double>> per_year;  // (year, observed, predicted)
    std::string error;  // non-empty marks a failed run

    bool ok() const { return error.empty(); }
};

inline void to_json(nlohmann::json& j, const RunResult& r) {
    j = nlohmann::json{{"run_key", r.run_key}, {"model", r.model},
                       {"window", r.window},   {"prep", r.prep_code},
                       {"test_size", r.test_size}, {"seed", r.seed},
                       {"cv_score", r.cv_score},   {"error", r.error}};
    j["metrics"] = r.metrics;
    j["chosen_hyperparams"] = r.chosen.hyperparams;
    auto rows = nlohmann::json::array();
    for (const auto& [year, obs, pred] : r.per_year)
        rows.push_back({{"year", year}, {"observed", obs}, {"predicted", pred}});
    j["per_year"] = rows;
}

inline void from_json(const nlohmann::json& j, RunResult& r) {
    r.run_key = j.at("run_key").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.window = j.at("window").get<int>();
    r.prep_code = j.at("prep").get<std::string>();
    r.test_size = j.at("test_size").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.cv_score = j.at("cv_score").get<double>();
    r.error = j.at("error").get<std::string>();
    const auto& m = j.at("metrics");
    r.metrics.rmse = m.at("rmse").get<double>();
    r.metrics.rmse_of_mean = m.at("rmse_of_mean").get<double>();
    r.metrics.block_mean_rmse = m.at("block_mean_rmse").is_null()
                                    ? std::numeric_limits<double>::quiet_NaN()
                                    : m.at("block_mean_rmse").get<double>();
    r.metrics.mae = m.at("mae").get<double>();
    r.metrics.mape = m.at("mape").get<double>();
    r.chosen.code = r.model;
    r.chosen.hyperparams = j.at("chosen_hyperparams").get<std::map<std::string, double>>();
    for (const auto& row : j.at("per_year"))
        r.per_year.emplace_back(row.at("year").get<int>(), row.at("observed").get<double>(),
                                row.at("predicted").get<double>());
}

inline bool same_result(const RunResult& a, const RunResult& b) {
    const auto eq = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    return a.run_key == b.run_key && a.model == b.model && a.window == b.window &&
           a.prep_code == b.prep_code && a.test_size == b.test_size && a.seed == b.seed &&
           eq(a.cv_score, b.cv_score) && a.error == b.error && eq(a.metrics.rmse, b.metrics.rmse) &&
           eq(a.metrics.rmse_of_mean, b.metrics.rmse_of_mean) &&
           eq(a.metrics.block_mean_rmse, b.metrics.block_mean_rmse) &&
           eq(a.metrics.mae, b.metrics.mae) && eq(a.metrics.mape, b.metrics.mape) &&
           a.chosen.hyperparams == b.chosen.hyperparams && a.per_year == b.per_year;
}

// ---------------------------------------------------------------------------
// grid execution

struct RunHandle {
    RunResult result;
    nlohmann::json audit;
};

/// Execute one grid cell: hold out the final T observations, tune on the
/// training region through expanding folds, refit the winner on the full
/// training window, forecast T steps, invert the pipeline and score.
inline RunHandle execute_run(const ingest::AnnualSeries& series, const transform::PrepSpec& prep,
                             int test_size, const std::string& model_code, int folds,
                             int iterations, std::uint64_t base_seed) {
    RunHandle h;
    RunResult& r = h.result;
    r.model = model_code;
    r.prep_code = prep.code();
    r.test_size = test_size;
    const std::string cell_key = prep.code() + "-T" + std::to_string(test_size);
    r.run_key = cell_key;
    r.seed = rng::derive_seed(base_seed, cell_key + "/" + model_code);

    try {
        const long n = static_cast<long>(series.size());
        const long n_train = n - test_size;
        if (n_train < 2) throw InsufficientData("test window leaves no training data");
        const std::span<const double> train_raw(series.values.data(),
                                                static_cast<std::size_t>(n_train));
        const std::span<const double> test(series.values.data() + n_train,
                                           static_cast<std::size_t>(test_size));

        const auto splits = evalx::make_splits(static_cast<int>(n_train), test_size, folds);
        const evalx::SearchPolicy policy{iterations, r.seed};
        const auto search = evalx::tune_model(model_code, train_raw, prep, splits, policy);
        r.chosen = search.best;
        r.cv_score = search.best_score;

        const auto pipeline = transform::fit_pipeline(train_raw, prep);
        const auto zf = evalx::forecast_in_space(search.best, pipeline.transformed_train,
                                                 test_size);
        const auto pred = transform::invert_forecast(pipeline, zf);

        r.metrics = evalx::compute_metrics(test, pred, 5);
        if (evalx::is_lag_regressor(model_code)) {
            r.window = static_cast<int>(search.best.hp("W"));
            r.run_key = "W" + std::to_string(r.window) + "-" + cell_key;
        }
        for (int i = 0; i < test_size; ++i)
            r.per_year.emplace_back(series.years[static_cast<std::size_t>(n_train + i)],
                                    test[static_cast<std::size_t>(i)],
                                    pred[static_cast<std::size_t>(i)]);

        auto candidates = nlohmann::json::array();
        for (std::size_t i = 0; i < search.traces.size(); ++i) {
            const auto& t = search.traces[i];
            nlohmann::json c{{"index", i}, {"hyperparams", t.candidate.hyperparams}};
            if (t.score) {
                c["cv_rmse"] = *t.score;
                c["fold_rmse"] = t.fold_scores;
            } else {
                c["error"] = t.error;
            }
            candidates.push_back(std::move(c));
        }
        h.audit = nlohmann::json{{"run_key", r.run_key},
                                 {"model", model_code},
                                 {"seed", r.seed},
                                 {"winner_index", search.best_index},
                                 {"candidates", std::move(candidates)}};
    } catch (const std::exception& e) {
        r.error = e.what();
        h.audit = nlohmann::json{{"run_key", r.run_key}, {"model", model_code},
                                 {"seed", r.seed},       {"error", r.error}};
    }
    return h;
}

/// Run the whole grid. Cells are independent (per-run seeds are derived by a
/// stable hash, never drawn sequentially), so worker parallelism cannot
/// change any result; a failed cell is recorded and never aborts the grid.
inline std::vector<RunHandle> run_grid(const ExperimentConfig& cfg,
                                       const ingest::AnnualSeries& series, int workers = 1) {
    struct Cell {
        transform::PrepSpec prep;
        int test_size;
        std::string model;
    };
    std::vector<Cell> cells;
    for (const auto& prep : cfg.preps)
        for (int t : cfg.test_sizes)
            for (const auto& model : cfg.roster) cells.push_back({prep, t, model});
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        return std::tuple(a.prep.diff_order, transform::power_code(a.prep.power), a.test_size,
                          a.model) < std::tuple(b.prep.diff_order,
                                                transform::power_code(b.prep.power), b.test_size,
                                                b.model);
    });

    std::vector<RunHandle> results(cells.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            results[i] = execute_run(series, cells[i].prep, cells[i].test_size, cells[i].model,
                                     cfg.folds, cfg.iterations, cfg.base_seed);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return results;
}

// ---------------------------------------------------------------------------
// reports

namespace detail {

inline std::string fmt_metric(double v) {
    if (!std::isfinite(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') out += '"';
    }
    out += "\"";
    return out;
}

}  // namespace detail

/// Stable column order, rows already sorted by (prep, T, model) by run_grid;
/// byte-identical output for identical results.
inline std::string report_csv(const std::vector<RunHandle>& results) {
    if (results.empty()) throw InsufficientData("no results to report");
    std::string out =
        "run_key,model,W,rmse,rmse_of_mean,block_mean_rmse,mae,mape,seed,hyperparams\n";
    for (const auto& h : results) {
        const RunResult& r = h.result;
        out += r.run_key + "," + r.model + ",";
        out += r.window > 0 ? std::to_string(r.window) : "";
        if (r.ok()) {
            out += "," + detail::fmt_metric(r.metrics.rmse);
            out += "," + detail::fmt_metric(r.metrics.rmse_of_mean);
            out += "," + detail::fmt_metric(r.metrics.block_mean_rmse);
            out += "," + detail::fmt_metric(r.metrics.mae);
            out += "," + detail::fmt_metric(r.metrics.mape);
        } else {
            out += ",,,,,";
        }
        out += "," + std::to_string(r.seed);
        out += "," + detail::csv_quote(nlohmann::json(r.chosen.hyperparams).dump());
        out += "\n";
    }
    return out;
}

inline nlohmann::json report_json(const std::vector<RunHandle>& results) {
    if (results.empty()) throw InsufficientData("no results to report");
    auto arr = nlohmann::json::array();
    for (const auto& h : results) arr.push_back(h.result);
    return arr;
}

// ---------------------------------------------------------------------------
// plots

/// One observed-vs-predicted chart per successful run plus a grid-summary bar
/// chart of RMSE by run key. Returns the file names written.
inline std::vector<std::string> render_plots(const std::vector<RunHandle>& results,
                                             const std::filesystem::path& out_dir) {
    if (results.empty()) throw InsufficientData("no results to plot");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoFailure("cannot create plot directory " + out_dir.string());

    std::vector<std::string> written;
    std::vector<svg::Bar> bars;
    for (const auto& h : results) {
        const RunResult& r = h.result;
        if (!r.ok()) continue;
        svg::Line obs{"observed", "black", {}, {}};
        svg::Line pred{"predicted", "crimson", {}, {}};
        for (const auto& [year, o, p] : r.per_year) {
            obs.x.push_back(year);
            obs.y.push_back(o);
            pred.x.push_back(year);
            pred.y.push_back(p);
        }
        const std::string name = r.run_key + "-" + r.model + ".svg";
        const std::string doc =
            svg::line_chart(r.run_key + " " + r.model, {obs, pred}, "anomaly (degC)");
        std::ofstream f(out_dir / name, std::ios::binary);
        if (!f) throw IoFailure("cannot write " + (out_dir / name).string());
        f << doc;
        written.push_back(name);
        bars.push_back({r.run_key + " " + r.model, r.metrics.rmse});
    }
    if (!bars.empty()) {
        std::ofstream f(out_dir / "summary_rmse.svg", std::ios::binary);
        if (!f) throw IoFailure("cannot write summary plot");
        f << svg::bar_chart("Test RMSE by run", bars, "RMSE (degC)");
        written.push_back("summary_rmse.svg");
    }
    return written;
}

// ---------------------------------------------------------------------------
// file helpers

inline ingest::AnnualSeries load_series(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open data file " + path);
    return ingest::parse_gistemp(in, column);
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoFailure("cannot write " + path.string());
    f << content;
}

}  // namespace gmtbench::runner
