#include "hpfts/ratios.hpp"

#include "hpfts/csv.hpp"
#include "hpfts/errors.hpp"

#include <algorithm>
#include <ostream>

namespace hpfts {

CcrCurves compute_ccr(const PopulationPanel &panel) {
    if (panel.n_years() < 2)
        throw SeriesTooShort(panel.n_years(), 2);
    const std::size_t p = panel.n_ages();
    CcrCurves out;
    out.region = panel.region;
    out.sex = panel.sex;
    out.age_grid = panel.age_grid;
    for (std::size_t t = 1; t < panel.n_years(); ++t) {
        const auto &cur = panel.values[t];
        const auto &prev = panel.values[t - 1];
        std::vector<double> row(p, 0.0);
        for (std::size_t x = 1; x + 1 < p; ++x) {
            if (prev[x - 1] <= 0.0)
                throw ZeroDenominator(panel.years[t - 1], static_cast<int>(x - 1),
                                      "cohort change ratio for " + panel.region);
            row[x] = cur[x] / prev[x - 1];
        }
        const double pooled = prev[p - 2] + prev[p - 1];
        if (pooled <= 0.0)
            throw ZeroDenominator(panel.years[t - 1], panel.age_grid.max_age - 1,
                                  "open-bin cohort change ratio for " + panel.region);
        row[p - 1] = cur[p - 1] / pooled;
        out.ratio.push_back(std::move(row));
        out.years.push_back(panel.years[t]);
    }
    return out;
}

CwrSeries compute_cwr(const PopulationPanel &female, const PopulationPanel &male) {
    if (female.years != male.years || !(female.age_grid == male.age_grid))
        throw ShapeMismatch("child/woman ratio needs aligned female and male panels");
    CwrSeries out;
    out.years = female.years;
    // the window never reaches into the open bin; report the effective bound
    const int hi = std::min(out.childbearing_hi, female.age_grid.max_age - 1);
    out.childbearing_hi = hi;
    for (std::size_t t = 0; t < female.n_years(); ++t) {
        double women = 0.0;
        for (int x = out.childbearing_lo; x <= hi; ++x)
            women += female.values[t][static_cast<std::size_t>(x)];
        if (women <= 0.0)
            throw ZeroDenominator(female.years[t], -1,
                                  "no women aged 15-49 in " + female.region);
        out.values.push_back((female.values[t][0] + male.values[t][0]) / women);
    }
    return out;
}

std::pair<double, double> infant_forecast(double women_15_49, double cwr, BirthSexRatio bsr) {
    const double total = women_15_49 * cwr;
    const double male = total * bsr.male_share();
    return {total - male, male};
}

void write_ccr_csv(std::ostream &out, const std::vector<CcrCurves> &curves) {
    out << "region,sex,year,age,ccr\n";
    for (const CcrCurves &c : curves)
        for (std::size_t t = 0; t < c.ratio.size(); ++t)
            for (std::size_t x = 1; x < c.ratio[t].size(); ++x)
                write_csv_row(out, {c.region, sex_label(c.sex), std::to_string(c.years[t]),
                                    c.age_grid.label(static_cast<int>(x)),
                                    format_double(c.ratio[t][x])});
}

} // namespace hpfts
