// gmtbench command line: exploratory diagnostics, grid execution, config
// validation. Exit codes: 0 success, 1 config error, 2 data error, 3 partial
// grid failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmtbench/ingest.hpp"
#include "gmtbench/runner.hpp"
#include "gmtbench/stattests.hpp"
#include "gmtbench/transform.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitDataError = 2;
constexpr int kExitPartialFailure = 3;

nlohmann::json verdict_json(const gmtbench::stattests::TestResult& r, bool reject_means_nonstat) {
    nlohmann::json j = r;
    const bool nonstationary = reject_means_nonstat ? r.reject_at_5pct : !r.reject_at_5pct;
    j["verdict"] = nonstationary ? "non-stationary" : "stationary";
    return j;
}

int run_eda(const std::string& data_path, const std::string& column) {
    using namespace gmtbench;
    const auto series = runner::load_series(data_path, column);
    const auto diffed_values = transform::difference(series.values);

    nlohmann::json out;
    out["data"] = data_path;
    out["column"] = column;
    out["descriptive_stats"] = ingest::describe(series);
    // ADF's null is a unit root: rejection means stationary. KPSS's null is
    // stationarity: rejection means non-stationary.
    out["adf"] = {{"raw", verdict_json(stattests::adf_test(series.values), false)},
                  {"differenced", verdict_json(stattests::adf_test(diffed_values), false)}};
    out["kpss"] = {{"raw", verdict_json(stattests::kpss_test(series.values), true)},
                   {"differenced", verdict_json(stattests::kpss_test(diffed_values), true)}};
    out["outliers"] = {{"iqr", ingest::detect_outliers_iqr(series)},
                       {"isolation_forest", ingest::detect_outliers_iforest(series, 200, 7)}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

gmtbench::runner::ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw gmtbench::ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw gmtbench::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return gmtbench::runner::parse_config(j);
}

int run_grid_command(const std::string& config_path, const std::string& out_dir, int workers,
                     std::uint64_t seed_override, bool has_seed_override,
                     const std::string& column_override) {
    using namespace gmtbench;
    auto cfg = load_config(config_path);
    if (has_seed_override) cfg.base_seed = seed_override;
    if (!column_override.empty()) cfg.column = column_override;

    const auto series = runner::load_series(cfg.data_path, cfg.column);
    runner::validate_against_data(cfg, series.size());

    const auto results = runner::run_grid(cfg, series, workers);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "audit", ec);
    if (ec) throw IoFailure("cannot create output directory " + out_dir);

    runner::write_file(fs::path(out_dir) / "results.csv", runner::report_csv(results));
    runner::write_file(fs::path(out_dir) / "results.json", runner::report_json(results).dump(2) + "\n");
    for (const auto& h : results)
        runner::write_file(fs::path(out_dir) / "audit" /
                               (h.result.run_key + "-" + h.result.model + ".json"),
                           h.audit.dump(2) + "\n");
    runner::render_plots(results, fs::path(out_dir) / "plots");

    int failed = 0;
    for (const auto& h : results)
        if (!h.result.ok()) {
            ++failed;
            std::cerr << "run " << h.result.run_key << " " << h.result.model
                      << " failed: " << h.result.error << "\n";
        }
    std::cerr << "completed " << results.size() - failed << "/" << results.size()
              << " runs; outputs in " << out_dir << "\n";
    return failed > 0 ? kExitPartialFailure : kExitOk;
}

int run_validate(const std::string& config_path) {
    const auto cfg = load_config(config_path);
    const auto series = gmtbench::runner::load_series(cfg.data_path, cfg.column);
    gmtbench::runner::validate_against_data(cfg, series.size());
    std::cout << "config ok: " << cfg.preps.size() << " preps x " << cfg.test_sizes.size()
              << " test sizes x " << cfg.roster.size() << " models\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Global mean temperature forecasting benchmark"};
    app.require_subcommand(1);

    std::string eda_data;
    std::string eda_column = "J-D";
    auto* eda = app.add_subcommand("eda", "Descriptive statistics, stationarity tests and outliers");
    eda->add_option("data", eda_data, "GISTEMP CSV file")->required();
    eda->add_option("--column", eda_column, "data column name");

    std::string run_config, run_out = "out";
    std::string run_column;
    int workers = 1;
    std::uint64_t seed_override = 0;
    auto* run = app.add_subcommand("run", "Execute the experiment grid");
    run->add_option("--config", run_config, "config JSON")->required();
    run->add_option("--out", run_out, "output directory");
    run->add_option("--workers", workers, "parallel grid workers");
    auto* seed_opt = run->add_option("--seed", seed_override, "override the config seed");
    run->add_option("--column", run_column, "override the data column");

    std::string validate_config;
    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("--config", validate_config, "config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (eda->parsed()) return run_eda(eda_data, eda_column);
        if (run->parsed())
            return run_grid_command(run_config, run_out, workers, seed_override,
                                    seed_opt->count() > 0, run_column);
        if (validate->parsed()) return run_validate(validate_config);
    } catch (const gmtbench::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const gmtbench::InsufficientData& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const gmtbench::Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitConfigError;
}
