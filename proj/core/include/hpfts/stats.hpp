#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace hpfts {

/// Empirical quantile with linear interpolation between order statistics
/// (the common "type 7" estimator). `q` in [0, 1]. Copies and sorts.
double quantile(std::vector<double> values, double q);

/// Same, but `values` must already be sorted ascending.
double quantile_sorted(std::span<const double> sorted, double q);

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic RNG substream for replicate `index` of stream `seed`.
/// Independent of evaluation order, so parallel replicates are
/// schedule-independent.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index);

/// Static-chunk parallel loop over [0, n). Results must be written to
/// disjoint slots so the outcome is identical for any thread count.
void parallel_for(int n, int threads, const std::function<void(int)> &body);

} // namespace hpfts
