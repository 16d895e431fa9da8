#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gmtbench/transform.hpp"
#include "test_support.hpp"

using namespace gmtbench;
using namespace gmtbench::transform;
using testsup::pinned_series;

namespace {

// Independent dense-grid oracle for the profile-likelihood lambda: evaluates
// the log-likelihood from its textbook definition at every grid point and
// returns the argmax.
double grid_lambda_oracle(const std::vector<double>& y, Power family, double step = 1e-3) {
    const auto n = static_cast<double>(y.size());
    double best_lam = -5.0, best_ll = -1e300;
    for (double lam = -5.0; lam <= 5.0 + 1e-12; lam += step) {
        std::vector<double> z(y.size());
        bool ok = true;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double v = y[i];
            if (family == Power::BoxCox) {
                z[i] = std::abs(lam) < 1e-12 ? std::log(v) : (std::pow(v, lam) - 1.0) / lam;
            } else if (v >= 0.0) {
                z[i] = std::abs(lam) < 1e-12 ? std::log1p(v)
                                             : (std::pow(v + 1.0, lam) - 1.0) / lam;
            } else {
                z[i] = std::abs(lam - 2.0) < 1e-12
                           ? -std::log1p(-v)
                           : -(std::pow(1.0 - v, 2.0 - lam) - 1.0) / (2.0 - lam);
            }
            if (!std::isfinite(z[i])) ok = false;
        }
        if (!ok) continue;
        double mean = 0.0;
        for (double v : z) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : z) var += (v - mean) * (v - mean);
        var /= n;
        if (!(var > 0.0)) continue;
        double jac = 0.0;
        for (double v : y)
            jac += family == Power::BoxCox ? std::log(v)
                                           : (v >= 0 ? 1.0 : -1.0) * std::log1p(std::abs(v));
        const double ll = -0.5 * n * std::log(var) + (lam - 1.0) * jac;
        if (ll > best_ll) {
            best_ll = ll;
            best_lam = lam;
        }
    }
    return best_lam;
}

}  // namespace

TEST_CASE("difference and undifference") {
    CHECK(difference(std::vector<double>{1, 3, 6}) == std::vector<double>{2, 3});
    CHECK(difference(std::vector<double>{5, 5, 5}) == std::vector<double>{0, 0});
    CHECK_THROWS_AS(difference(std::vector<double>{1}), TooShort);

    CHECK(undifference(std::vector<double>{2, 3}, 1) == std::vector<double>{3, 6});
    CHECK(undifference(std::vector<double>{0, 0, 0}, 7) == std::vector<double>{7, 7, 7});
}

TEST_CASE("undifference inverts difference on random arrays") {
    std::mt19937_64 gen(2024);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const auto n = static_cast<std::size_t>(rng::uniform_int(gen, 2, 60));
        const auto x = testsup::normal_vector(gen, n, 0.0, 3.0);
        const auto back = undifference(difference(x), x[0]);
        REQUIRE(back.size() == n - 1);
        for (std::size_t i = 0; i < back.size(); ++i)
            worst = std::max(worst, std::abs(back[i] - x[i + 1]));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("Box-Cox forward branch values") {
    CHECK(boxcox_forward(std::vector<double>{5.0}, 1.0)[0] == 4.0);  // exact at lambda = 1
    CHECK(boxcox_forward(std::vector<double>{std::exp(1.0)}, 0.0)[0] ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(boxcox_forward(std::vector<double>{3.0}, 2.0)[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(boxcox_forward(std::vector<double>{-1.0}, 0.5), NonPositiveInput);
}

TEST_CASE("Yeo-Johnson forward branch values") {
    const auto id = yeojohnson_forward(std::vector<double>{-3.0, 0.0, 2.0}, 1.0);
    CHECK(id == std::vector<double>{-3.0, 0.0, 2.0});  // identity, exact
    CHECK(yeojohnson_forward(std::vector<double>{std::exp(1.0) - 1.0}, 0.0)[0] ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(yeojohnson_forward(std::vector<double>{-(std::exp(1.0) - 1.0)}, 2.0)[0] ==
          doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("Yeo-Johnson is monotone increasing for every lambda") {
    std::mt19937_64 gen(555);
    for (int rep = 0; rep < 10000; ++rep) {
        const double lam = rng::uniform_real(gen, -5.0, 5.0);
        double a = rng::uniform_real(gen, -20.0, 20.0);
        double b = rng::uniform_real(gen, -20.0, 20.0);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        CHECK(yeojohnson_scalar(a, lam) < yeojohnson_scalar(b, lam));
    }
}

TEST_CASE("fit_lambda agrees with the dense-grid oracle") {
    std::mt19937_64 gen(31337);

    SUBCASE("lognormal data wants the log branch") {
        std::vector<double> y(2000);
        for (auto& v : y) v = std::exp(testsup::normal01(gen));
        const double lam = fit_lambda(y, Power::BoxCox);
        CHECK(lam >= -0.1);
        CHECK(lam <= 0.1);
        CHECK(std::abs(lam - grid_lambda_oracle(y, Power::BoxCox)) <= 1e-2);
    }
    SUBCASE("already-normal data keeps lambda near 1") {
        std::vector<double> y(2000);
        for (auto& v : y) v = 10.0 + testsup::normal01(gen);
        const double lam = fit_lambda(y, Power::BoxCox);
        CHECK(lam >= 0.5);
        CHECK(lam <= 1.5);
        CHECK(std::abs(lam - grid_lambda_oracle(y, Power::BoxCox)) <= 1e-2);
    }
    SUBCASE("tiny fixed dataset, tight agreement") {
        const std::vector<double> y{1, 2, 3, 4};
        CHECK(std::abs(fit_lambda(y, Power::BoxCox) - grid_lambda_oracle(y, Power::BoxCox)) <=
              1e-3);
    }
    SUBCASE("Yeo-Johnson on signed data") {
        std::vector<double> y(500);
        for (auto& v : y) v = testsup::normal01(gen) - 0.4;
        CHECK(std::abs(fit_lambda(y, Power::YeoJohnson) -
                       grid_lambda_oracle(y, Power::YeoJohnson)) <= 1e-2);
    }
}

TEST_CASE("fit_lambda error paths") {
    CHECK_THROWS_AS(fit_lambda(std::vector<double>{1.0, -2.0, 3.0, 4.0}, Power::BoxCox),
                    NonPositiveInput);
    CHECK_THROWS_AS(fit_lambda(std::vector<double>{2.0, 2.0, 2.0, 2.0}, Power::BoxCox),
                    DegenerateData);
}

TEST_CASE("fit_pipeline standardizes an arithmetic sequence") {
    const auto p = fit_pipeline(std::vector<double>{1, 2, 3}, PrepSpec{0, Power::None, true});
    REQUIRE(p.transformed_train.size() == 3);
    CHECK(p.transformed_train[0] == doctest::Approx(-1.224744871391589).epsilon(1e-9));
    CHECK(p.transformed_train[1] == doctest::Approx(0.0).scale(1).epsilon(1e-12));
    CHECK(p.transformed_train[2] == doctest::Approx(1.224744871391589).epsilon(1e-9));
}

TEST_CASE("fit_pipeline with differencing records the anchor") {
    const auto p = fit_pipeline(std::vector<double>{1, 3, 6}, PrepSpec{1, Power::None, true});
    REQUIRE(p.transformed_train.size() == 2);
    CHECK(p.transformed_train[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(p.transformed_train[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.anchor == 6.0);
    CHECK(p.train_len == 3);
}

TEST_CASE("Box-Cox offset activates on differenced temperature data") {
    const auto& s = pinned_series();
    const auto p = fit_pipeline(s.values, PrepSpec{1, Power::BoxCox, true});
    CHECK(p.offset > 0.0);  // differenced series has negative steps
    CHECK(p.std > 0.0);
}

TEST_CASE("pipeline round trip on concrete cases") {
    SUBCASE("D1-NO") {
        const auto p = fit_pipeline(std::vector<double>{1, 3, 6}, PrepSpec{1, Power::None, true});
        const std::vector<double> future{10.0};
        const auto back = invert_forecast(p, transform::apply(p, future));
        CHECK(std::abs(back[0] - 10.0) < 1e-9);
    }
    SUBCASE("D0-BC") {
        const auto p = fit_pipeline(std::vector<double>{1.0, 1.5, 2.2, 3.0, 4.1},
                                    PrepSpec{0, Power::BoxCox, true});
        const std::vector<double> future{2.5};
        const auto back = invert_forecast(p, transform::apply(p, future));
        CHECK(std::abs(back[0] - 2.5) < 1e-9);
    }
}

TEST_CASE("pipeline round trip over randomized cases") {
    std::mt19937_64 gen(777);
    const Power powers[] = {Power::None, Power::BoxCox, Power::YeoJohnson};
    double worst = 0.0;
    int done = 0, attempts = 0;
    while (done < 1000 && attempts < 20000) {
        ++attempts;
        const auto n = static_cast<std::size_t>(rng::uniform_int(gen, 8, 40));
        auto train = testsup::normal_vector(gen, n, rng::uniform_real(gen, -1.0, 1.0), 0.8);
        PrepSpec spec;
        spec.diff_order = static_cast<int>(rng::uniform_int(gen, 0, 1));
        spec.power = powers[rng::uniform_int(gen, 0, 2)];
        const auto h = static_cast<std::size_t>(rng::uniform_int(gen, 1, 10));
        // keep the continuation inside the training envelope so the frozen
        // Box-Cox offset keeps it positive
        double lo = train[0], hi = train[0];
        for (double v : train) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        std::vector<double> future(h);
        for (auto& v : future) v = rng::uniform_real(gen, lo, hi);
        try {
            const auto p = fit_pipeline(train, spec);
            const auto back = invert_forecast(p, transform::apply(p, future));
            REQUIRE(back.size() == h);
            for (std::size_t i = 0; i < h; ++i)
                worst = std::max(worst, std::abs(back[i] - future[i]));
            ++done;
        } catch (const NonPositiveInput&) {
            continue;  // continuation fell outside the Box-Cox domain; redraw
        } catch (const InverseDomain&) {
            continue;
        }
    }
    REQUIRE(done == 1000);
    CHECK(worst < 1e-8);
}

TEST_CASE("standardized training image has zero mean and unit variance") {
    std::mt19937_64 gen(4242);
    const Power powers[] = {Power::None, Power::BoxCox, Power::YeoJohnson};
    for (int rep = 0; rep < 60; ++rep) {
        const auto n = static_cast<std::size_t>(rng::uniform_int(gen, 10, 50));
        const auto train = testsup::normal_vector(gen, n, 0.3, 1.1);
        PrepSpec spec;
        spec.diff_order = static_cast<int>(rng::uniform_int(gen, 0, 1));
        spec.power = powers[rng::uniform_int(gen, 0, 2)];
        const auto p = fit_pipeline(train, spec);
        CHECK(std::abs(linalg::mean(p.transformed_train)) < 1e-12);
        CHECK(std::abs(linalg::variance(p.transformed_train) - 1.0) < 1e-12);
    }
}

TEST_CASE("inverse respects the Box-Cox domain") {
    FittedPipeline p;
    p.spec = PrepSpec{0, Power::BoxCox, false};
    p.lambda = 0.5;
    CHECK_THROWS_AS(invert_forecast(p, std::vector<double>{-3.0}), InverseDomain);
}

TEST_CASE("prep codes round-trip") {
    CHECK(PrepSpec{1, Power::YeoJohnson, true}.code() == "D1-YJ");
    CHECK(prep_from_code("D0-BC").power == Power::BoxCox);
    CHECK(prep_from_code("D1-NO").diff_order == 1);
    CHECK_THROWS_AS(prep_from_code("D2-NO"), ConfigError);
    CHECK_THROWS_AS(prep_from_code("D1-XX"), ConfigError);
}

TEST_CASE("pipeline serializes its fitted parameters") {
    const auto& s = pinned_series();
    const auto p = fit_pipeline(s.values, PrepSpec{1, Power::YeoJohnson, true});
    const nlohmann::json j = p;
    CHECK(j.at("spec").at("power").get<std::string>() == "YJ");
    CHECK(j.at("anchor").get<double>() == p.anchor);
    CHECK(j.at("train_len").get<long>() == 141);
}
