#include "hpfts/pension.hpp"

#include "hpfts/csv.hpp"
#include "hpfts/errors.hpp"
#include "hpfts/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace hpfts {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_age(PensionAge a) {
    if (a.months < kMinPensionAgeMonths || a.months > kMaxPensionAgeMonths)
        throw ValidationError("pension age " + std::to_string(a.months) +
                              " months is outside [" + std::to_string(kMinPensionAgeMonths) +
                              ", " + std::to_string(kMaxPensionAgeMonths) + "]");
}

// cum[x] = population below age x; cum.size() = ages + 1.
std::vector<double> cumulative(const std::vector<double> &pop) {
    std::vector<double> cum(pop.size() + 1, 0.0);
    for (std::size_t x = 0; x < pop.size(); ++x)
        cum[x + 1] = cum[x] + pop[x];
    return cum;
}

// Percent, +inf when the denominator is empty but the numerator is not, and
// NaN when nobody is 15 or older (callers turn that into ZeroDenominator).
double oadr_from_cum(const std::vector<double> &pop, const std::vector<double> &cum,
                     int months) {
    const std::size_t ages = pop.size();
    const double total_15_plus = cum[ages] - cum[std::min<std::size_t>(15, ages)];
    if (total_15_plus <= 0.0)
        return std::numeric_limits<double>::quiet_NaN();
    const std::size_t a = static_cast<std::size_t>(months / 12);
    const double f = static_cast<double>(months % 12) / 12.0;
    double below;
    if (a >= ages)
        below = total_15_plus;
    else
        below = cum[a] - cum[15] + f * pop[a];
    const double above = total_15_plus - below;
    if (below <= 0.0)
        return above > 0.0 ? kInf : 0.0;
    return above / below * 100.0;
}

// One year's candidate populations (per path, or the single point vector).
struct YearCandidates {
    std::vector<std::vector<double>> pops;
    std::vector<std::vector<double>> cums;
};

YearCandidates year_candidates(const ProjectionResult &projection, std::size_t h) {
    YearCandidates out;
    if (!projection.paths.empty()) {
        out.pops.reserve(projection.paths.size());
        for (const auto &path : projection.paths) {
            std::vector<double> combined = path[0][h];
            for (std::size_t x = 0; x < combined.size(); ++x)
                combined[x] += path[1][h][x];
            out.pops.push_back(std::move(combined));
        }
    } else {
        std::vector<double> combined = projection.female_point.values[h];
        for (std::size_t x = 0; x < combined.size(); ++x)
            combined[x] += projection.male_point.values[h][x];
        out.pops.push_back(std::move(combined));
    }
    out.cums.reserve(out.pops.size());
    for (const auto &pop : out.pops)
        out.cums.push_back(cumulative(pop));
    return out;
}

enum class Estimator { mean, q_low, q_high };

double estimate_oadr(const YearCandidates &cands, int months, Estimator kind, int year) {
    std::vector<double> values(cands.pops.size());
    for (std::size_t i = 0; i < cands.pops.size(); ++i) {
        values[i] = oadr_from_cum(cands.pops[i], cands.cums[i], months);
        if (std::isnan(values[i]))
            throw ZeroDenominator(year, -1, "no population aged 15 and over");
    }
    switch (kind) {
    case Estimator::mean: {
        double s = 0.0;
        for (double v : values)
            s += v;
        return s / static_cast<double>(values.size());
    }
    case Estimator::q_low:
        return quantile(std::move(values), 0.025);
    case Estimator::q_high:
        return quantile(std::move(values), 0.975);
    }
    return kInf;
}

PensionAgeScheme solve_with(const ProjectionResult &projection, double o_star,
                            PensionAge start, int increment, Estimator kind,
                            SchemeVariant variant) {
    check_age(start);
    if (increment < 1)
        throw ValidationError("pension age increment must be at least 1 month");
    if (projection.years.empty())
        throw ValidationError("projection carries no forecast years");

    PensionAgeScheme scheme;
    scheme.variant = variant;
    int a = start.months;
    for (std::size_t h = 0; h < projection.years.size(); ++h) {
        const int year = projection.years[h];
        const YearCandidates cands = year_candidates(projection, h);
        double est = estimate_oadr(cands, a, kind, year);
        while (est > o_star) {
            if (a >= kMaxPensionAgeMonths)
                throw UnsatisfiableThreshold(year, o_star);
            a = std::min(a + increment, kMaxPensionAgeMonths);
            est = estimate_oadr(cands, a, kind, year);
        }
        scheme.years.push_back(year);
        scheme.ages.push_back(PensionAge{a});
        scheme.oadr_at_age.push_back(est);
    }
    return scheme;
}

} // namespace

double oadr(const std::vector<double> &population_by_age, PensionAge pension_age) {
    check_age(pension_age);
    if (population_by_age.empty())
        throw ValidationError("population vector is empty");
    const auto cum = cumulative(population_by_age);
    const double v = oadr_from_cum(population_by_age, cum, pension_age.months);
    if (std::isnan(v))
        throw ZeroDenominator(0, -1, "no population aged 15 and over");
    if (std::isinf(v))
        throw ZeroDenominator(0, pension_age.months / 12,
                              "nobody between age 15 and the pension age");
    return v;
}

PensionAgeScheme solve_scheme(const ProjectionResult &projection, double o_star_percent,
                              PensionAge start, int increment_months) {
    return solve_with(projection, o_star_percent, start, increment_months, Estimator::mean,
                      SchemeVariant::point);
}

std::pair<PensionAgeScheme, PensionAgeScheme>
scheme_bounds(const ProjectionResult &projection, double o_star_percent, PensionAge start,
              int increment_months) {
    if (projection.paths.size() < 100)
        throw ValidationError("plausible bounds need at least 100 simulated paths");
    return {solve_with(projection, o_star_percent, start, increment_months, Estimator::q_low,
                       SchemeVariant::lower_bound),
            solve_with(projection, o_star_percent, start, increment_months, Estimator::q_high,
                       SchemeVariant::upper_bound)};
}

void write_scheme_csv(std::ostream &out, const std::vector<PensionAgeScheme> &schemes) {
    out << "year,pension_age_months,pension_age_years,oadr_at_age,variant\n";
    for (const auto &scheme : schemes) {
        const char *label = scheme.variant == SchemeVariant::point        ? "point"
                            : scheme.variant == SchemeVariant::lower_bound ? "lower_bound"
                                                                           : "upper_bound";
        for (std::size_t i = 0; i < scheme.years.size(); ++i)
            write_csv_row(out, {std::to_string(scheme.years[i]),
                                std::to_string(scheme.ages[i].months),
                                format_double(scheme.ages[i].years()),
                                format_double(scheme.oadr_at_age[i]), label});
    }
}

} // namespace hpfts
