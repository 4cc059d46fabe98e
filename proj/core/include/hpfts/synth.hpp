#pragma once

#include "hpfts/panel.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace hpfts {

// Test-fixture generator. Each cohort advances by a fixed ratio per year with
// optional multiplicative lognormal noise; infants track a child/woman ratio
// frozen from the base curve. With sigma=0 every cohort change ratio equals
// `growth` exactly, whatever the base; pair with steady_base_curve for a
// panel that is exactly geometric in time (rho=1: constant).
struct SynthSpec {
    double growth = 1.0;          // cohort-year ratio r, must be > 0
    std::vector<double> base;     // counts by age in the first year
    int n_years = 10;             // must be >= 3
    double sigma = 0.0;           // lognormal noise scale on each transition
    std::uint64_t seed = 0;
    int first_year = 2000;
    std::string region = "SYN";
    Sex sex = Sex::Female;
};

PopulationPanel synth_population(const SynthSpec &spec);

// Two-sex variant: `spec.base` is the total population curve, split into
// female and male shares from the birth ratio (male per female). Infants of
// both sexes derive from the female panel's women aged 15 to 49 and share a
// single noise draw, so their split matches the birth ratio exactly.
std::pair<PopulationPanel, PopulationPanel>
synth_population_pair(const SynthSpec &spec, double male_per_female = 1.0);

// Smooth hump-shaped default base curve over ages 0..max_age.
std::vector<double> default_base_curve(int max_age = 100, double scale = 1000.0);

// Base curve that is an exact steady state of the cohort recursion: with
// growth r and this base, the whole panel grows by factor rho per year and
// every cohort change ratio (open bin included) equals r exactly. Requires
// rho > r so the open bin has a finite positive fixed point.
std::vector<double> steady_base_curve(int max_age, double r, double rho,
                                      double scale = 1000.0);

} // namespace hpfts
