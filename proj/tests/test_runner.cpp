#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "gmtbench/runner.hpp"
#include "test_support.hpp"

using namespace gmtbench;
using namespace gmtbench::runner;
using testsup::pinned_series;

namespace {

ExperimentConfig nav_only_config() {
    ExperimentConfig cfg;
    cfg.data_path = GMTBENCH_DATA_FILE;
    for (const char* code : {"D0-BC", "D0-NO", "D0-YJ", "D1-BC", "D1-NO", "D1-YJ"})
        cfg.preps.push_back(transform::prep_from_code(code));
    cfg.test_sizes = {5, 10, 15};
    cfg.folds = 3;
    cfg.iterations = 50;
    cfg.base_seed = 20;
    cfg.roster = {"NAV"};
    return cfg;
}

const RunResult* find_run(const std::vector<RunHandle>& results, const std::string& prep, int t,
                          const std::string& model) {
    for (const auto& h : results)
        if (h.result.prep_code == prep && h.result.test_size == t && h.result.model == model)
            return &h.result;
    return nullptr;
}

}  // namespace

TEST_CASE("drift-naive grid reproduces the reference RMSE rows") {
    const auto results = run_grid(nav_only_config(), pinned_series());
    REQUIRE(results.size() == 18);
    for (const auto& h : results) REQUIRE(h.result.ok());

    const std::map<int, double> d0_expect{{5, 0.073}, {10, 0.154}, {15, 0.137}};
    for (const auto& [t, expect] : d0_expect) {
        const auto* r = find_run(results, "D0-NO", t, "NAV");
        REQUIRE(r != nullptr);
        CHECK(std::abs(r->metrics.rmse - expect) <= 0.02);
    }
    const std::map<int, double> d1_expect{{5, 0.446}, {10, 0.227}, {15, 1.131}};
    for (const char* prep : {"D1-BC", "D1-NO", "D1-YJ"}) {
        for (const auto& [t, expect] : d1_expect) {
            const auto* r = find_run(results, prep, t, "NAV");
            REQUIRE(r != nullptr);
            CHECK(std::abs(r->metrics.rmse - expect) <= 0.05);
        }
    }
}

TEST_CASE("a single run regenerates its metrics from the per-year rows") {
    ExperimentConfig cfg = nav_only_config();
    cfg.preps = {transform::prep_from_code("D0-NO")};
    cfg.test_sizes = {10};
    const auto results = run_grid(cfg, pinned_series());
    REQUIRE(results.size() == 1);
    const auto& r = results[0].result;
    REQUIRE(r.ok());
    REQUIRE(r.per_year.size() == 10);

    std::vector<double> obs, pred;
    for (const auto& [year, o, p] : r.per_year) {
        obs.push_back(o);
        pred.push_back(p);
    }
    const auto again = evalx::compute_metrics(obs, pred, 5);
    CHECK(again.rmse == r.metrics.rmse);
    CHECK(again.rmse_of_mean == r.metrics.rmse_of_mean);
    CHECK(again.block_mean_rmse == r.metrics.block_mean_rmse);
}

TEST_CASE("run keys follow the documented grammar") {
    ExperimentConfig cfg = nav_only_config();
    cfg.preps = {transform::prep_from_code("D1-YJ")};
    cfg.test_sizes = {10};
    cfg.roster = {"NAV", "KNN"};
    cfg.iterations = 10;
    const auto results = run_grid(cfg, pinned_series());
    REQUIRE(results.size() == 2);
    const auto* nav = find_run(results, "D1-YJ", 10, "NAV");
    const auto* knn = find_run(results, "D1-YJ", 10, "KNN");
    REQUIRE(nav != nullptr);
    REQUIRE(knn != nullptr);
    CHECK(nav->run_key == "D1-YJ-T10");
    CHECK(nav->window == 0);
    CHECK(knn->window >= 1);
    CHECK(knn->run_key == "W" + std::to_string(knn->window) + "-D1-YJ-T10");
}

TEST_CASE("per-run seeds isolate roster members from each other") {
    ExperimentConfig both = nav_only_config();
    both.preps = {transform::prep_from_code("D1-NO")};
    both.test_sizes = {5};
    both.roster = {"ARI", "KNN"};
    both.iterations = 8;
    const auto two = run_grid(both, pinned_series());

    ExperimentConfig solo = both;
    solo.roster = {"KNN"};
    const auto one = run_grid(solo, pinned_series());

    const auto* knn_with_sibling = find_run(two, "D1-NO", 5, "KNN");
    const auto* knn_alone = find_run(one, "D1-NO", 5, "KNN");
    REQUIRE(knn_with_sibling != nullptr);
    REQUIRE(knn_alone != nullptr);
    CHECK(knn_with_sibling->seed == knn_alone->seed);
    CHECK(knn_with_sibling->chosen.hyperparams == knn_alone->chosen.hyperparams);
    CHECK(knn_with_sibling->metrics.rmse == knn_alone->metrics.rmse);
    CHECK(knn_with_sibling->per_year == knn_alone->per_year);
}

TEST_CASE("the held-out window never influences fitting or tuning") {
    ExperimentConfig cfg = nav_only_config();
    cfg.preps = {transform::prep_from_code("D1-NO")};
    cfg.test_sizes = {5};
    cfg.roster = {"KNN"};
    cfg.iterations = 10;

    const auto base = run_grid(cfg, pinned_series());

    auto tampered = pinned_series();
    for (std::size_t i = tampered.size() - 5; i < tampered.size(); ++i)
        tampered.values[i] += 5.0;  // rewrite the test window only
    const auto moved = run_grid(cfg, tampered);

    const auto& a = base[0].result;
    const auto& b = moved[0].result;
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(a.chosen.hyperparams == b.chosen.hyperparams);
    CHECK(a.cv_score == b.cv_score);
    REQUIRE(a.per_year.size() == b.per_year.size());
    for (std::size_t i = 0; i < a.per_year.size(); ++i)
        CHECK(std::get<2>(a.per_year[i]) == std::get<2>(b.per_year[i]));  // predictions bitwise
}

TEST_CASE("grid-cell concurrency does not change results") {
    ExperimentConfig cfg = nav_only_config();
    cfg.roster = {"NAV", "POT"};
    cfg.test_sizes = {5, 10};
    cfg.preps = {transform::prep_from_code("D0-NO"), transform::prep_from_code("D1-YJ")};
    const auto serial = run_grid(cfg, pinned_series(), 1);
    const auto parallel = run_grid(cfg, pinned_series(), 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i)
        CHECK(same_result(serial[i].result, parallel[i].result));
}

TEST_CASE("reports are deterministic and round-trip") {
    ExperimentConfig cfg = nav_only_config();
    cfg.preps = {transform::prep_from_code("D0-NO")};
    cfg.test_sizes = {5, 10};
    const auto results = run_grid(cfg, pinned_series());
    REQUIRE(results.size() == 2);

    const std::string csv_a = report_csv(results);
    const std::string csv_b = report_csv(results);
    CHECK(csv_a == csv_b);
    CHECK(testsup::count_occurrences(csv_a, "\n") == 3);  // header + 2 rows
    CHECK(csv_a.rfind("run_key,model,W,rmse,rmse_of_mean,block_mean_rmse,mae,mape,seed,"
                      "hyperparams\n",
                      0) == 0);

    const auto j = report_json(results);
    const auto parsed = j.get<std::vector<RunResult>>();
    REQUIRE(parsed.size() == 2);
    for (std::size_t i = 0; i < parsed.size(); ++i)
        CHECK(same_result(parsed[i], results[i].result));
}

TEST_CASE("grid failures are recorded without aborting the grid") {
    ExperimentConfig cfg = nav_only_config();
    cfg.preps = {transform::prep_from_code("D0-NO")};
    cfg.test_sizes = {5, 60};  // 60 leaves too little room for three folds
    const auto results = run_grid(cfg, pinned_series());
    REQUIRE(results.size() == 2);
    const auto* good = find_run(results, "D0-NO", 5, "NAV");
    const auto* bad = find_run(results, "D0-NO", 60, "NAV");
    REQUIRE(good != nullptr);
    REQUIRE(bad != nullptr);
    CHECK(good->ok());
    CHECK_FALSE(bad->ok());
    CHECK(bad->error.find("n_train") != std::string::npos);
}

TEST_CASE("plots contain the documented structure") {
    ExperimentConfig cfg = nav_only_config();
    cfg.preps = {transform::prep_from_code("D0-NO")};
    cfg.test_sizes = {5};
    const auto results = run_grid(cfg, pinned_series());

    const auto dir = std::filesystem::temp_directory_path() / "gmtbench_plot_test";
    std::filesystem::remove_all(dir);
    const auto files = render_plots(results, dir);
    REQUIRE(files.size() == 2);  // run chart + summary

    const auto svg = testsup::read_file((dir / files[0]).string());
    CHECK(testsup::count_occurrences(svg, "<polyline") == 2);
    CHECK(testsup::count_occurrences(svg, "class=\"xtick\"") == 5);
    std::filesystem::remove_all(dir);
}

TEST_CASE("config parsing and validation") {
    nlohmann::json j{{"schema", 1},
                     {"data", GMTBENCH_DATA_FILE},
                     {"preps", {"D0-NO", "D1-YJ"}},
                     {"test_sizes", {5, 10}},
                     {"folds", 3},
                     {"iterations", 20},
                     {"seed", 11},
                     {"models", {"NAV", "KNN"}}};
    const auto cfg = parse_config(j);
    CHECK(cfg.preps.size() == 2);
    CHECK(cfg.base_seed == 11);

    validate_against_data(cfg, 141);
    auto big = cfg;
    big.test_sizes = {200};
    CHECK_THROWS_AS(validate_against_data(big, 141), ConfigError);

    auto missing_schema = j;
    missing_schema.erase("schema");
    CHECK_THROWS_AS(parse_config(missing_schema), ConfigError);
    auto bad_model = j;
    bad_model["models"] = {"XGB"};
    CHECK_THROWS_AS(parse_config(bad_model), ConfigError);
    auto bad_prep = j;
    bad_prep["preps"] = {"D3-NO"};
    CHECK_THROWS_AS(parse_config(bad_prep), ConfigError);
}

TEST_CASE("NAV-only grid CSV matches the frozen golden file") {
    const auto results = run_grid(nav_only_config(), pinned_series());
    const std::string csv = report_csv(results);
    const std::string golden =
        testsup::read_file(std::string(GMTBENCH_SOURCE_DIR) + "/tests/golden/nav_grid_results.csv");
    CHECK(csv == golden);
}

TEST_CASE("NAV D0-NO T5 plot matches the frozen golden SVG") {
    ExperimentConfig cfg = nav_only_config();
    cfg.preps = {transform::prep_from_code("D0-NO")};
    cfg.test_sizes = {5};
    const auto results = run_grid(cfg, pinned_series());
    const auto dir = std::filesystem::temp_directory_path() / "gmtbench_golden_svg";
    std::filesystem::remove_all(dir);
    const auto files = render_plots(results, dir);
    const auto svg = testsup::read_file((dir / "D0-NO-T5-NAV.svg").string());
    const auto golden =
        testsup::read_file(std::string(GMTBENCH_SOURCE_DIR) + "/tests/golden/nav_d0_no_t5.svg");
    CHECK(svg == golden);
    std::filesystem::remove_all(dir);
}
