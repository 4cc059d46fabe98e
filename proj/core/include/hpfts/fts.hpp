#pragma once

#include "hpfts/arima.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace hpfts {

// A time-indexed family of curves sampled on a common grid.
struct FunctionalSeries {
    std::vector<double> grid;                 // abscissae u_1..u_p
    std::vector<std::vector<double>> curves;  // n x p
    std::vector<double> weights;              // quadrature weights, default 1

    std::size_t n() const { return curves.size(); }
    std::size_t p() const { return grid.size(); }
    void validate() const; // ShapeMismatch / ValidationError
};

// Truncated principal-component decomposition of the curve family:
// X_t = mean + sum_k scores[t][k] * eigenfunctions[k] + residuals[t].
struct FpcaModel {
    std::vector<double> mean;
    std::vector<std::vector<double>> eigenfunctions; // K x p
    std::vector<double> eigenvalues;                 // non-increasing, >= 0
    std::vector<std::vector<double>> scores;         // n x K
    std::vector<std::vector<double>> residuals;      // n x p
    std::vector<double> weights;                     // copied from the series
    int K = 0;

    std::size_t n() const { return scores.size(); }
    std::size_t p() const { return mean.size(); }
    std::vector<double> reconstruct(std::size_t t) const; // mean + scores . phi
};

// Eigenpairs of the weighted empirical covariance; K <= min(n-1, p).
// Eigenfunctions are orthonormal under the weights and sign-fixed so their
// component sum is nonnegative.
FpcaModel decompose(const FunctionalSeries &series, int K);

struct CurveForecast {
    int horizon = 1;
    std::vector<double> point;               // p
    std::vector<std::vector<double>> curves; // B x p bootstrap sample
    std::vector<double> lower, upper;        // pointwise quantile bounds
};

// Point forecast plus B bootstrap curves: resampled h-step score errors are
// added to the score forecasts and a whole residual curve is added on top;
// bounds are the pointwise alpha/2 and 1-alpha/2 empirical quantiles.
CurveForecast forecast_curve(const FpcaModel &model,
                             const std::vector<ScoreModel> &score_models, int h, int B,
                             double alpha, std::uint64_t seed);

// Concatenates two aligned series (female block first). The joint
// decomposition centers each block by its own mean since blocks occupy
// disjoint columns.
FunctionalSeries stack_mfts(const FunctionalSeries &female, const FunctionalSeries &male);

// Splits a stacked curve back into (female, male) halves.
std::pair<std::vector<double>, std::vector<double>>
unstack_curve(const std::vector<double> &stacked);

} // namespace hpfts
