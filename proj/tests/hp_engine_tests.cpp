#include <doctest.h>

#include <cmath>

#include "hpfts/errors.hpp"
#include "hpfts/hp_engine.hpp"
#include "hpfts/synth.hpp"

using namespace hpfts;

namespace {

std::pair<PopulationPanel, PopulationPanel> steady_pair(double r, double rho, int max_age,
                                                        int n_years, double sigma = 0.0,
                                                        std::uint64_t seed = 0) {
    SynthSpec spec;
    spec.growth = r;
    spec.base = steady_base_curve(max_age, r, rho);
    spec.n_years = n_years;
    spec.sigma = sigma;
    spec.seed = seed;
    return synth_population_pair(spec, 1.057);
}

}  // namespace

TEST_CASE("geometric panels project geometrically") {
    const double r = 1.02, rho = 1.04;
    auto [f, m] = steady_pair(r, rho, 60, 25);
    ProjectionConfig cfg;
    cfg.horizon = 5;
    cfg.B = 0;
    cfg.K = 4;
    auto res = project(f, m, cfg);
    REQUIRE(res.years.size() == 5);
    CHECK(res.years.front() == f.years.back() + 1);
    std::size_t last = f.n_years() - 1;
    for (std::size_t h = 0; h < 5; ++h) {
        double factor = std::pow(rho, static_cast<double>(h + 1));
        for (std::size_t x = h + 2; x < f.n_ages(); ++x) {
            CHECK(res.female_point.values[h][x] ==
                  doctest::Approx(factor * f.values[last][x]).epsilon(1e-9));
            CHECK(res.male_point.values[h][x] ==
                  doctest::Approx(factor * m.values[last][x]).epsilon(1e-9));
        }
    }
}

TEST_CASE("one step equals the first year of the full projection") {
    auto [f, m] = steady_pair(1.01, 1.03, 40, 18, 0.03, 5);
    ProjectionConfig cfg;
    cfg.horizon = 3;
    cfg.B = 0;
    cfg.K = 3;
    auto [f1, m1] = project_one_step(f, m, cfg);
    auto res = project(f, m, cfg);
    CHECK(f1 == res.female_point.values[0]);
    CHECK(m1 == res.male_point.values[0]);
}

TEST_CASE("fixed-coefficient mode agrees at the first step") {
    auto [f, m] = steady_pair(0.99, 1.01, 30, 16, 0.02, 9);
    ProjectionConfig iter;
    iter.horizon = 4;
    iter.B = 0;
    iter.K = 3;
    ProjectionConfig fixed = iter;
    fixed.refit_each_step = false;
    auto a = project(f, m, iter);
    auto b = project(f, m, fixed);
    for (std::size_t x = 0; x < f.n_ages(); ++x)
        CHECK(a.female_point.values[0][x] ==
              doctest::Approx(b.female_point.values[0][x]).epsilon(1e-9));
    // later steps may diverge but must stay positive and finite
    for (std::size_t h = 0; h < 4; ++h)
        for (double v : b.female_point.values[h]) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
}

TEST_CASE("noiseless paths collapse onto the point forecast") {
    auto [f, m] = steady_pair(1.0, 1.02, 30, 20);
    ProjectionConfig cfg;
    cfg.horizon = 3;
    cfg.B = 120;
    cfg.K = 3;
    cfg.seed = 4;
    auto res = simulate_paths(f, m, cfg);
    REQUIRE(res.paths.size() == 120);
    for (std::size_t h = 0; h < 3; ++h)
        for (std::size_t x = 0; x < f.n_ages(); ++x) {
            CHECK(res.lower[0][h][x] ==
                  doctest::Approx(res.female_point.values[h][x]).epsilon(1e-9));
            CHECK(res.upper[0][h][x] ==
                  doctest::Approx(res.female_point.values[h][x]).epsilon(1e-9));
        }
}

TEST_CASE("simulation is deterministic and thread-count independent") {
    auto [f, m] = steady_pair(1.005, 1.02, 25, 15, 0.04, 21);
    ProjectionConfig cfg;
    cfg.horizon = 3;
    cfg.B = 60;
    cfg.K = 3;
    cfg.seed = 77;
    cfg.threads = 1;
    auto a = simulate_paths(f, m, cfg);
    cfg.threads = 4;
    auto b = simulate_paths(f, m, cfg);
    CHECK(a.paths == b.paths);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    cfg.seed = 78;
    auto c = simulate_paths(f, m, cfg);
    CHECK(a.paths != c.paths);
}

TEST_CASE("multivariate mode produces positive finite forecasts") {
    auto [f, m] = steady_pair(1.01, 1.03, 30, 18, 0.03, 2);
    ProjectionConfig cfg;
    cfg.horizon = 3;
    cfg.B = 0;
    cfg.K = 3;
    cfg.mode = ProjectionConfig::Mode::multivariate;
    auto res = project(f, m, cfg);
    for (std::size_t h = 0; h < 3; ++h)
        for (std::size_t x = 0; x < f.n_ages(); ++x) {
            CHECK(std::isfinite(res.female_point.values[h][x]));
            CHECK(res.female_point.values[h][x] > 0.0);
            CHECK(std::isfinite(res.male_point.values[h][x]));
        }
    auto again = project(f, m, cfg);
    CHECK(res.female_point.values == again.female_point.values);
}

TEST_CASE("pyramid export addresses forecast years only") {
    auto [f, m] = steady_pair(1.0, 1.01, 20, 14);
    ProjectionConfig cfg;
    cfg.horizon = 2;
    cfg.B = 0;
    cfg.K = 2;
    auto res = project(f, m, cfg);
    auto rows = pyramid_export(res, res.years.back());
    REQUIRE(rows.size() == f.n_ages());
    CHECK(rows[0].age == 0);
    CHECK(rows.back().age == 20);
    CHECK(rows[3].female == res.female_point.values[1][3]);
    CHECK_THROWS_AS(pyramid_export(res, f.years.back()), YearOutOfRange);
}

TEST_CASE("component count is clamped to the available rank") {
    auto [f, m] = steady_pair(1.0, 1.02, 25, 8, 0.02, 6);
    ProjectionConfig cfg;
    cfg.horizon = 2;
    cfg.B = 0;
    cfg.K = 50;  // far above n - 1; the engine clamps rather than throws
    CHECK_NOTHROW(project(f, m, cfg));
}

TEST_CASE("log transform rejects empty cohorts, linear scale allows them") {
    auto [f, m] = steady_pair(1.0, 1.02, 20, 12);
    f.values[3][10] = 0.0;  // a zero feeder makes a zero ratio downstream
    ProjectionConfig cfg;
    cfg.horizon = 2;
    cfg.B = 0;
    cfg.K = 2;
    cfg.log_transform = true;
    CHECK_THROWS_AS(project(f, m, cfg), Error);
}

TEST_CASE("history must be long enough to fit anything") {
    auto [f, m] = steady_pair(1.0, 1.02, 10, 3);
    ProjectionConfig cfg;
    cfg.horizon = 2;
    cfg.B = 0;
    CHECK_THROWS_AS(project(f, m, cfg), Error);
}
