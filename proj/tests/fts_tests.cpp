#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hpfts/errors.hpp"
#include "hpfts/fts.hpp"

using namespace hpfts;

namespace {

// mean + rank-k random curves on p points
FunctionalSeries random_low_rank(std::mt19937_64& rng, std::size_t n, std::size_t p, int rank,
                                 double noise_sd = 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    FunctionalSeries s;
    s.grid.resize(p);
    for (std::size_t j = 0; j < p; ++j) s.grid[j] = static_cast<double>(j);

    std::vector<std::vector<double>> basis(rank, std::vector<double>(p));
    for (auto& f : basis)
        for (auto& v : f) v = normal(rng);

    std::vector<double> mean(p);
    for (auto& v : mean) v = 5.0 + normal(rng);

    s.curves.assign(n, std::vector<double>(p));
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<double> beta(rank);
        for (auto& b : beta) b = normal(rng);
        for (std::size_t j = 0; j < p; ++j) {
            double v = mean[j];
            for (int k = 0; k < rank; ++k) v += beta[k] * basis[k][j];
            if (noise_sd > 0.0) v += noise_sd * normal(rng);
            s.curves[t][j] = v;
        }
    }
    return s;
}

double weighted_dot(const std::vector<double>& a, const std::vector<double>& b,
                    const std::vector<double>& w) {
    double out = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) out += a[j] * b[j] * (w.empty() ? 1.0 : w[j]);
    return out;
}

double max_abs(double a, double b) { return std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("rank-3 curves reconstruct exactly at K = 3") {
    std::mt19937_64 rng(2024);
    auto series = random_low_rank(rng, 20, 31, 3);
    auto model = decompose(series, 3);
    double scale = 0.0;
    for (const auto& row : series.curves)
        for (double v : row) scale = std::max(scale, std::abs(v));
    for (std::size_t t = 0; t < series.n(); ++t) {
        auto recon = model.reconstruct(t);
        for (std::size_t j = 0; j < series.p(); ++j)
            CHECK(std::abs(recon[j] - series.curves[t][j]) < 1e-8 * scale);
    }
    // eigenvalues beyond the rank collapse
    for (std::size_t k = 3; k < model.eigenvalues.size(); ++k)
        CHECK(model.eigenvalues[k] <= model.eigenvalues[2] * 1e-10 + 1e-300);
}

TEST_CASE("eigenfunctions are orthonormal under the weights") {
    std::mt19937_64 rng(7);
    auto series = random_low_rank(rng, 25, 40, 5, 0.3);
    series.weights.assign(40, 1.0);
    for (std::size_t j = 0; j < 40; ++j) series.weights[j] = 0.5 + 0.05 * (j % 3);
    auto model = decompose(series, 8);
    for (std::size_t a = 0; a < model.eigenfunctions.size(); ++a)
        for (std::size_t b = a; b < model.eigenfunctions.size(); ++b) {
            double dot = weighted_dot(model.eigenfunctions[a], model.eigenfunctions[b],
                                      series.weights);
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-10);
        }
}

TEST_CASE("sign convention and determinism") {
    std::mt19937_64 rng(55);
    auto series = random_low_rank(rng, 15, 21, 4, 0.1);
    auto a = decompose(series, 4);
    auto b = decompose(series, 4);
    CHECK(a.eigenfunctions == b.eigenfunctions);
    CHECK(a.scores == b.scores);
    for (const auto& phi : a.eigenfunctions) {
        double sum = 0.0;
        for (double v : phi) sum += v;
        CHECK(sum >= -1e-12);
    }
}

TEST_CASE("scores are weighted projections of centered curves") {
    std::mt19937_64 rng(3);
    auto series = random_low_rank(rng, 12, 17, 2, 0.05);
    auto model = decompose(series, 2);
    for (std::size_t t = 0; t < series.n(); ++t)
        for (int k = 0; k < 2; ++k) {
            std::vector<double> centered(series.p());
            for (std::size_t j = 0; j < series.p(); ++j)
                centered[j] = series.curves[t][j] - model.mean[j];
            double proj = weighted_dot(centered, model.eigenfunctions[k], series.weights);
            CHECK(std::abs(proj - model.scores[t][k]) <
                  1e-10 * max_abs(proj, 1.0));
        }
}

TEST_CASE("residuals complete the reconstruction") {
    std::mt19937_64 rng(8);
    auto series = random_low_rank(rng, 10, 13, 5, 0.4);
    auto model = decompose(series, 2);  // deliberately truncated
    for (std::size_t t = 0; t < series.n(); ++t) {
        auto recon = model.reconstruct(t);
        for (std::size_t j = 0; j < series.p(); ++j)
            CHECK(recon[j] + model.residuals[t][j] ==
                  doctest::Approx(series.curves[t][j]).epsilon(1e-12));
    }
}

TEST_CASE("K is capped at min(n - 1, p)") {
    std::mt19937_64 rng(1);
    auto series = random_low_rank(rng, 6, 9, 2);
    CHECK_THROWS_AS(decompose(series, 6), KTooLarge);  // n - 1 = 5
    CHECK_NOTHROW(decompose(series, 5));
    CHECK_THROWS_AS(decompose(series, 0), ValidationError);
}

TEST_CASE("identical curves decompose into mean plus silence") {
    FunctionalSeries s;
    s.grid = {0, 1, 2, 3, 4};
    s.curves.assign(7, {3.0, 1.0, 4.0, 1.0, 5.0});
    auto model = decompose(s, 3);
    CHECK(model.mean == s.curves[0]);
    for (double lambda : model.eigenvalues) CHECK(lambda >= 0.0);
    CHECK(model.eigenvalues[0] < 1e-12);
    for (const auto& row : model.scores)
        for (double b : row) CHECK(std::abs(b) < 1e-6);
    // placeholder eigenfunctions still orthonormal
    for (std::size_t a = 0; a < model.eigenfunctions.size(); ++a)
        for (std::size_t b2 = a; b2 < model.eigenfunctions.size(); ++b2) {
            double dot = weighted_dot(model.eigenfunctions[a], model.eigenfunctions[b2], {});
            CHECK(std::abs(dot - (a == b2 ? 1.0 : 0.0)) < 1e-10);
        }
}

TEST_CASE("wide matrices (p > n) use the Gram route to the same answer") {
    std::mt19937_64 rng(91);
    auto series = random_low_rank(rng, 8, 24, 2);
    auto model = decompose(series, 7);
    double scale = 0.0;
    for (const auto& row : series.curves)
        for (double v : row) scale = std::max(scale, std::abs(v));
    for (std::size_t t = 0; t < series.n(); ++t) {
        auto recon = model.reconstruct(t);
        for (std::size_t j = 0; j < series.p(); ++j)
            CHECK(std::abs(recon[j] - series.curves[t][j]) < 1e-8 * scale);
    }
    for (std::size_t a = 0; a < model.eigenfunctions.size(); ++a)
        for (std::size_t b = a; b < model.eigenfunctions.size(); ++b) {
            double dot = weighted_dot(model.eigenfunctions[a], model.eigenfunctions[b], {});
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-10);
        }
}

TEST_CASE("series validation catches ragged input") {
    FunctionalSeries s;
    s.grid = {0, 1, 2};
    s.curves = {{1, 2, 3}, {4, 5}};
    CHECK_THROWS_AS(s.validate(), ShapeMismatch);
    s.curves[1] = {4, 5, 6};
    s.weights = {1.0, 1.0};
    CHECK_THROWS_AS(s.validate(), ShapeMismatch);
    s.weights = {1.0, -1.0, 1.0};
    CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("forecast_curve validates and is deterministic") {
    std::mt19937_64 rng(17);
    auto series = random_low_rank(rng, 40, 11, 2, 0.2);
    auto model = decompose(series, 2);
    std::vector<ScoreModel> sms;
    for (int k = 0; k < 2; ++k) {
        std::vector<double> scores;
        for (const auto& row : model.scores) scores.push_back(row[k]);
        sms.push_back(fit_score_model(scores));
    }
    CHECK_THROWS_AS(forecast_curve(model, sms, 1, 99, 0.05, 1), ValidationError);
    CHECK_THROWS_AS(forecast_curve(model, sms, 1, 200, 0.0, 1), ValidationError);
    CHECK_THROWS_AS(forecast_curve(model, sms, 0, 200, 0.05, 1), ValidationError);
    std::vector<ScoreModel> short_sms(sms.begin(), sms.begin() + 1);
    CHECK_THROWS_AS(forecast_curve(model, short_sms, 1, 200, 0.05, 1), ShapeMismatch);

    auto a = forecast_curve(model, sms, 2, 150, 0.05, 42);
    auto b = forecast_curve(model, sms, 2, 150, 0.05, 42);
    CHECK(a.point == b.point);
    CHECK(a.curves == b.curves);
    CHECK(a.lower == b.lower);
    auto c = forecast_curve(model, sms, 2, 150, 0.05, 43);
    CHECK(a.curves != c.curves);
    REQUIRE(a.lower.size() == series.p());
    for (std::size_t j = 0; j < series.p(); ++j) {
        CHECK(a.lower[j] <= a.upper[j]);
        CHECK(a.lower[j] <= a.point[j] + 1e-12);
        CHECK(a.upper[j] >= a.point[j] - 1e-12);
    }
}

TEST_CASE("noiseless series produce a zero-width band") {
    FunctionalSeries s;
    s.grid = {0, 1, 2, 3};
    for (int t = 0; t < 20; ++t) s.curves.push_back({1.0, 2.0, 3.0, 4.0});
    auto model = decompose(s, 2);
    std::vector<ScoreModel> sms;
    for (int k = 0; k < 2; ++k) {
        std::vector<double> scores;
        for (const auto& row : model.scores) scores.push_back(row[k]);
        sms.push_back(fit_score_model(scores));
    }
    auto f = forecast_curve(model, sms, 1, 100, 0.05, 9);
    for (std::size_t j = 0; j < s.p(); ++j) {
        CHECK(f.point[j] == doctest::Approx(s.curves[0][j]).epsilon(1e-9));
        CHECK(f.lower[j] == doctest::Approx(f.upper[j]).epsilon(1e-9));
    }
}

TEST_CASE("stacked series concatenate and split cleanly") {
    FunctionalSeries f, m;
    f.grid = {0, 1};
    m.grid = {0, 1};
    f.curves = {{1, 2}, {3, 4}};
    m.curves = {{5, 6}, {7, 8}};
    auto joint = stack_mfts(f, m);
    CHECK(joint.p() == 4);
    CHECK(joint.n() == 2);
    CHECK(joint.curves[0] == std::vector<double>{1, 2, 5, 6});
    auto [fh, mh] = unstack_curve(joint.curves[1]);
    CHECK(fh == std::vector<double>{3, 4});
    CHECK(mh == std::vector<double>{7, 8});

    FunctionalSeries bad = m;
    bad.curves.pop_back();
    CHECK_THROWS_AS(stack_mfts(f, bad), ShapeMismatch);
}
