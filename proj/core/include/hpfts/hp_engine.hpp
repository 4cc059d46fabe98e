#pragma once

#include "hpfts/fts.hpp"
#include "hpfts/panel.hpp"
#include "hpfts/ratios.hpp"

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace hpfts {

struct ProjectionConfig {
    int horizon = 30;
    int K = 6;          // retained principal components
    int B = 1000;       // stochastic paths
    double alpha = 0.05;
    std::uint64_t seed = 0;
    bool log_transform = true;  // model ratios on the log scale
    bool refit_each_step = true; // false: fit once, use multi-step forecasts
    enum class Mode { univariate, multivariate } mode = Mode::univariate;
    BirthSexRatio bsr{};
    int threads = 1;
};

struct ProjectionResult {
    std::vector<int> years;                  // T+1..T+H
    PopulationPanel female_point, male_point;
    // paths[b][sex][h][age] with sex 0 = female, 1 = male; empty unless simulated.
    std::vector<std::vector<std::vector<std::vector<double>>>> paths;
    // Pointwise path quantile bounds, [sex][h][age]; empty unless simulated.
    std::array<std::vector<std::vector<double>>, 2> lower, upper;
};

// One forecast year: CCR curves and the CWR are forecast one step via the
// functional machinery, the cohorts advance, and the infant bins come from
// the forecast-year women aged 15-49.
std::pair<std::vector<double>, std::vector<double>>
project_one_step(const PopulationPanel &female, const PopulationPanel &male,
                 const ProjectionConfig &config);

// Iterates one-step projection H times, appending each forecast year to the
// panels before the next step. Model orders are selected on the original
// history; later steps re-estimate coefficients only.
ProjectionResult project(const PopulationPanel &female, const PopulationPanel &male,
                         const ProjectionConfig &config);

// B stochastic paths: each step of each path draws ratio curves via score
// error and residual resampling (deterministic per-path substreams) and the
// path evolves on its own augmented history. Includes the point projection.
ProjectionResult simulate_paths(const PopulationPanel &female, const PopulationPanel &male,
                                const ProjectionConfig &config);

struct PyramidRow {
    int age;
    double female, male;
};
std::vector<PyramidRow> pyramid_export(const ProjectionResult &result, int year);

} // namespace hpfts
