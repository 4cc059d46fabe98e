#pragma once

#include "hpfts/panel.hpp"

#include <utility>
#include <vector>

namespace hpfts {

// Cohort change ratios. ratio[t][x] is the ratio into target age x observed
// between years[t]-1 and years[t]; the entry at x=0 is unused (infants come
// from the child/woman ratio) and stored as 0.
struct CcrCurves {
    std::string region;
    Sex sex = Sex::Female;
    std::vector<int> years;                 // from the second panel year onward
    std::vector<std::vector<double>> ratio; // |years| x |ages|
    AgeGrid age_grid;
};

// Infants per woman of childbearing age, by year.
struct CwrSeries {
    std::vector<int> years;
    std::vector<double> values;
    int childbearing_lo = 15;
    int childbearing_hi = 49;
};

struct BirthSexRatio {
    double male_per_female = 1.057;

    double male_share() const { return male_per_female / (1.0 + male_per_female); }
    double female_share() const { return 1.0 / (1.0 + male_per_female); }
};

// ratio[t][x+1] = count[t][x+1] / count[t-1][x] for closed target ages;
// the open bin pools its two feeder groups:
// ratio[t][open] = count[t][open] / (count[t-1][open-1] + count[t-1][open]).
CcrCurves compute_ccr(const PopulationPanel &panel);

// CWR(t) = (female[t][0] + male[t][0]) / sum of female[t][15..49].
CwrSeries compute_cwr(const PopulationPanel &female, const PopulationPanel &male);

// Splits women_15_49 * cwr births into (female, male) by the birth sex
// ratio; the two parts sum to the total exactly.
std::pair<double, double> infant_forecast(double women_15_49, double cwr, BirthSexRatio bsr);

// Diagnostic dump, header `region,sex,year,age,ccr`; age 0 rows are skipped.
void write_ccr_csv(std::ostream &out, const std::vector<CcrCurves> &curves);

} // namespace hpfts
