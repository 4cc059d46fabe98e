#include "hpfts/welfare.hpp"

#include "hpfts/csv.hpp"
#include "hpfts/errors.hpp"
#include "hpfts/fts.hpp"
#include "hpfts/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace hpfts {

double LifeTable::expectancy_at(double age_years) const {
    if (e.empty())
        throw ValidationError("empty life table");
    if (age_years <= 0.0)
        return e.front();
    const double max_age = static_cast<double>(e.size() - 1);
    if (age_years >= max_age)
        return e.back();
    const auto i = static_cast<std::size_t>(age_years);
    const double frac = age_years - static_cast<double>(i);
    return e[i] + frac * (e[i + 1] - e[i]);
}

LifeTable life_table(const std::vector<double> &rates) {
    if (rates.size() < 2)
        throw InvalidRate("life table needs at least two age groups");
    for (double v : rates)
        if (v < 0.0 || std::isnan(v))
            throw InvalidRate("mortality rates must be nonnegative");
    const std::size_t last = rates.size() - 1;
    if (!(rates[last] > 0.0))
        throw InvalidRate("open-ended mortality rate must be positive");

    LifeTable t;
    t.m = rates;
    t.q.assign(rates.size(), 0.0);
    t.l.assign(rates.size(), 0.0);
    t.L.assign(rates.size(), 0.0);
    t.e.assign(rates.size(), 0.0);

    t.l[0] = 100000.0;
    for (std::size_t x = 0; x < last; ++x) {
        t.q[x] = 1.0 - std::exp(-rates[x]);
        t.L[x] = t.l[x] * (1.0 - 0.5 * t.q[x]);
        t.l[x + 1] = t.l[x] * (1.0 - t.q[x]);
    }
    t.q[last] = 1.0;
    t.L[last] = t.l[last] > 0.0 ? t.l[last] / rates[last] : 0.0;

    double tail = 0.0;
    for (std::size_t x = rates.size(); x-- > 0;) {
        tail += t.L[x];
        t.e[x] = t.l[x] > 0.0 ? tail / t.l[x] : 0.0;
    }
    return t;
}

MortalityPanel mortality_forecast(const MortalityPanel &panel, int h, int K) {
    panel.validate();
    if (panel.n_years() < 10)
        throw SeriesTooShort(panel.n_years(), 10);
    if (h < 1)
        throw ValidationError("mortality forecast horizon must be at least 1");

    FunctionalSeries series;
    series.grid.reserve(panel.n_ages());
    for (std::size_t x = 0; x < panel.n_ages(); ++x)
        series.grid.push_back(static_cast<double>(x));
    for (std::size_t t = 0; t < panel.n_years(); ++t) {
        double floor = std::numeric_limits<double>::infinity();
        for (double v : panel.values[t])
            if (v > 0.0)
                floor = std::min(floor, v);
        if (!std::isfinite(floor))
            throw InvalidRate("year " + std::to_string(panel.years[t]) +
                              " has no positive mortality rate");
        floor *= 0.5;
        std::vector<double> row(panel.n_ages());
        for (std::size_t x = 0; x < panel.n_ages(); ++x)
            row[x] = std::log(panel.values[t][x] > 0.0 ? panel.values[t][x] : floor);
        series.curves.push_back(std::move(row));
    }

    const int k_eff = std::min(K, std::min(static_cast<int>(series.n()) - 1,
                                           static_cast<int>(series.p())));
    const FpcaModel model = decompose(series, k_eff);

    std::vector<std::vector<double>> betas(static_cast<std::size_t>(k_eff));
    for (int k = 0; k < k_eff; ++k) {
        std::vector<double> scores(model.n());
        for (std::size_t t = 0; t < model.n(); ++t)
            scores[t] = model.scores[t][static_cast<std::size_t>(k)];
        const ScoreModel sm = fit_score_model(scores);
        betas[static_cast<std::size_t>(k)] = sm.point_forecast(h);
    }

    MortalityPanel out;
    out.region = panel.region;
    out.sex = panel.sex;
    out.age_grid = panel.age_grid;
    for (int step = 1; step <= h; ++step) {
        std::vector<double> curve = model.mean;
        for (int k = 0; k < k_eff; ++k)
            for (std::size_t j = 0; j < curve.size(); ++j)
                curve[j] += betas[static_cast<std::size_t>(k)][static_cast<std::size_t>(step - 1)] *
                            model.eigenfunctions[static_cast<std::size_t>(k)][j];
        for (double &v : curve)
            v = std::exp(v);
        out.values.push_back(std::move(curve));
        out.years.push_back(panel.years.back() + step);
    }
    return out;
}

RateForecast forecast_pension_rates(const AnnualSeries &series, int h, int B, double alpha,
                                    std::uint64_t seed) {
    if (series.values.size() < 10)
        throw SeriesTooShort(series.values.size(), 10);
    if (B < 100)
        throw ValidationError("bootstrap needs at least 100 replicates");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("interval level must satisfy 0 < alpha < 1");
    const ScoreModel fit = fit_score_model(series.values);
    const ScoreForecast fc = forecast_scores(fit, h);

    RateForecast out;
    out.point = fc.point;
    out.lower.assign(static_cast<std::size_t>(h), 0.0);
    out.upper.assign(static_cast<std::size_t>(h), 0.0);
    for (int step = 1; step <= h; ++step)
        out.years.push_back(series.years.back() + step);

    std::vector<std::vector<double>> samples(
        static_cast<std::size_t>(h), std::vector<double>(static_cast<std::size_t>(B)));
    for (int b = 0; b < B; ++b) {
        auto gen = substream(seed, static_cast<std::uint64_t>(b));
        for (int i = 0; i < h; ++i) {
            const auto &pool = fc.pools[static_cast<std::size_t>(i)];
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            samples[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)] =
                fc.point[static_cast<std::size_t>(i)] + pool[pick(gen)];
        }
    }
    for (int i = 0; i < h; ++i) {
        auto &column = samples[static_cast<std::size_t>(i)];
        std::sort(column.begin(), column.end());
        out.lower[static_cast<std::size_t>(i)] =
            std::max(0.0, quantile_sorted(column, alpha / 2.0));
        out.upper[static_cast<std::size_t>(i)] =
            std::max(0.0, quantile_sorted(column, 1.0 - alpha / 2.0));
        out.point[static_cast<std::size_t>(i)] =
            std::max(0.0, out.point[static_cast<std::size_t>(i)]);
    }
    return out;
}

double lifetime_pension_pv(const PvInputs &inputs, double e_at_entry,
                           const AnnualSeries &rates) {
    if (e_at_entry < 0.0)
        throw ValidationError("life expectancy at entry must be nonnegative");
    const int n_years = static_cast<int>(std::ceil(e_at_entry));
    double pv = 0.0;
    for (int j = 0; j < n_years; ++j) {
        const int year = inputs.entry_year + j;
        double rate;
        try {
            rate = rates.at(year);
        } catch (const YearOutOfRange &) {
            throw RatesMissing(year, rates.label);
        }
        const double share = std::min(1.0, e_at_entry - static_cast<double>(j));
        const double periods = static_cast<double>(year + 1 - inputs.base_year);
        pv += share * rate * std::pow(1.0 + inputs.real_rate, -periods);
    }
    return pv;
}

double lifetime_pension_pv_annuity(const PvInputs &inputs,
                                   const std::vector<double> &survival,
                                   const AnnualSeries &rates) {
    double pv = 0.0;
    for (std::size_t j = 0; j < survival.size(); ++j) {
        const int year = inputs.entry_year + static_cast<int>(j);
        double rate;
        try {
            rate = rates.at(year);
        } catch (const YearOutOfRange &) {
            throw RatesMissing(year, rates.label);
        }
        const double periods = static_cast<double>(year + 1 - inputs.base_year);
        pv += survival[j] * rate * std::pow(1.0 + inputs.real_rate, -periods);
    }
    return pv;
}

namespace {

// Survivors at a fractional exact age, linear within the year of age.
double survivors_at(const LifeTable &t, double age_years) {
    if (age_years <= 0.0)
        return t.l.front();
    const double max_age = static_cast<double>(t.l.size() - 1);
    if (age_years >= max_age)
        return t.l.back();
    const auto i = static_cast<std::size_t>(age_years);
    const double frac = age_years - static_cast<double>(i);
    return t.l[i] + frac * (t.l[i + 1] - t.l[i]);
}

AnnualSeries extend_rates(const AnnualSeries &observed, int through_year) {
    AnnualSeries out = observed;
    if (observed.years.empty())
        throw ValidationError("empty pension rate series '" + observed.label + "'");
    const int h = through_year - observed.years.back();
    if (h <= 0)
        return out;
    const ScoreModel fit = fit_score_model(observed.values);
    const std::vector<double> fc = fit.point_forecast(h);
    for (int j = 0; j < h; ++j) {
        out.years.push_back(observed.years.back() + 1 + j);
        out.values.push_back(std::max(0.0, fc[static_cast<std::size_t>(j)]));
    }
    return out;
}

} // namespace

std::vector<PvRow> welfare_table(const WelfareInputs &inputs) {
    if (inputs.mortality.empty())
        throw ValidationError("welfare table needs at least one region");
    if (inputs.entry_years.empty())
        throw ValidationError("welfare table needs at least one entry year");

    struct Cell {
        double e = 0.0;
        std::vector<double> survival; // annuity mode only
    };
    std::map<std::string, std::array<std::map<int, Cell>, 2>> cells;
    int max_rate_year = 0;
    for (const auto &[region, panels] : inputs.mortality) {
        for (int s = 0; s < 2; ++s) {
            const MortalityPanel &panel = panels[static_cast<std::size_t>(s)];
            panel.validate();
            const int last_observed = panel.years.back();
            int max_h = 0;
            for (int entry : inputs.entry_years)
                max_h = std::max(max_h, entry - last_observed);
            const MortalityPanel forecast =
                max_h > 0 ? mortality_forecast(panel, max_h, inputs.K) : MortalityPanel{};
            for (int entry : inputs.entry_years) {
                const std::vector<double> &curve =
                    entry <= last_observed
                        ? panel.values[static_cast<std::size_t>(panel.year_index(entry))]
                        : forecast.values[static_cast<std::size_t>(entry - last_observed - 1)];
                const LifeTable lt = life_table(curve);
                const auto it = inputs.pension_age_months.find(entry);
                const int months = it != inputs.pension_age_months.end()
                                       ? it->second
                                       : inputs.default_pension_age_months;
                const double age = months / 12.0;
                Cell cell;
                cell.e = lt.expectancy_at(age);
                if (inputs.annuity) {
                    const double l_entry = survivors_at(lt, age);
                    if (l_entry > 0.0) {
                        const double top = static_cast<double>(lt.l.size() - 1);
                        for (int j = 0; age + j + 1 <= top; ++j)
                            cell.survival.push_back(survivors_at(lt, age + j + 1) / l_entry);
                    }
                }
                max_rate_year = std::max(
                    max_rate_year,
                    entry + std::max(static_cast<int>(std::ceil(cell.e)),
                                     static_cast<int>(cell.survival.size())));
                cells[region][static_cast<std::size_t>(s)][entry] = std::move(cell);
            }
        }
    }

    const AnnualSeries single = extend_rates(inputs.single_rate, max_rate_year);
    const AnnualSeries couple = extend_rates(inputs.couple_each_rate, max_rate_year);

    std::vector<PvRow> rows;
    for (const auto &[region, by_sex] : cells)
        for (Household hh : {Household::single, Household::couple_each})
            for (int s = 0; s < 2; ++s)
                for (int entry : inputs.entry_years) {
                    const Cell &cell = by_sex[static_cast<std::size_t>(s)].at(entry);
                    PvInputs pv_in;
                    pv_in.entry_year = entry;
                    pv_in.base_year = inputs.base_year;
                    pv_in.real_rate = inputs.real_rate;
                    pv_in.annuity = inputs.annuity;
                    const AnnualSeries &series =
                        hh == Household::single ? single : couple;
                    PvRow row;
                    row.region = region;
                    row.household = hh;
                    row.sex = s == 0 ? Sex::Female : Sex::Male;
                    row.entry_year = entry;
                    row.pv = inputs.annuity
                                 ? lifetime_pension_pv_annuity(pv_in, cell.survival, series)
                                 : lifetime_pension_pv(pv_in, cell.e, series);
                    rows.push_back(std::move(row));
                }
    return rows;
}

void write_pv_csv(std::ostream &out, const std::vector<PvRow> &rows) {
    out << "region,household,sex,entry_year,pv_aud\n";
    for (const PvRow &row : rows)
        write_csv_row(out, {row.region,
                            row.household == Household::single ? "single" : "couple_each",
                            sex_label(row.sex), std::to_string(row.entry_year),
                            format_double(row.pv)});
}

} // namespace hpfts
