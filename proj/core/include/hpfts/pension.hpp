#pragma once

#include "hpfts/hp_engine.hpp"

#include <utility>
#include <vector>

namespace hpfts {

struct PensionAge {
    int months = 804; // 67 years

    double years() const { return months / 12.0; }
};

inline constexpr int kMinPensionAgeMonths = 180;  // age 15
inline constexpr int kMaxPensionAgeMonths = 1200; // age 100

enum class SchemeVariant { point, lower_bound, upper_bound };

// Per-year pension ages at month resolution; non-decreasing by construction.
struct PensionAgeScheme {
    std::vector<int> years;
    std::vector<PensionAge> ages;
    std::vector<double> oadr_at_age; // estimate at the chosen age, percent
    SchemeVariant variant = SchemeVariant::point;
};

// Old-age dependency ratio, percent: persons above the pension age over
// persons aged 15 up to it. The single-year bin containing a fractional
// pension age is prorated uniformly: fraction (months mod 12)/12 of the bin
// falls below the threshold.
double oadr(const std::vector<double> &population_by_age, PensionAge pension_age);

// Minimal non-decreasing scheme with the OADR estimate at or below
// o_star_percent each year, starting from `start` and moving in
// `increment_months` steps. The estimate is the mean over paths when the
// projection carries paths, else the point projection's value.
PensionAgeScheme solve_scheme(const ProjectionResult &projection, double o_star_percent,
                              PensionAge start, int increment_months = 1);

// Plausible bounds: the solver rerun against the per-year 2.5% and 97.5%
// OADR quantiles across paths.
std::pair<PensionAgeScheme, PensionAgeScheme>
scheme_bounds(const ProjectionResult &projection, double o_star_percent, PensionAge start,
              int increment_months = 1);

void write_scheme_csv(std::ostream &out, const std::vector<PensionAgeScheme> &schemes);

} // namespace hpfts
