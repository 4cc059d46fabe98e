#pragma once

#include "hpfts/arima.hpp"
#include "hpfts/panel.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hpfts {

// Period life table, radix 100,000. The open bin closes the table with
// person-years l/m.
struct LifeTable {
    std::vector<double> m; // input rates
    std::vector<double> q; // death probability, q = 1 - exp(-m); 1 in the open bin
    std::vector<double> l; // survivors at exact age x
    std::vector<double> L; // person-years lived in [x, x+1)
    std::vector<double> e; // remaining life expectancy at x

    // Expectancy at a fractional age in years, linear between table rows.
    double expectancy_at(double age_years) const;
};

LifeTable life_table(const std::vector<double> &rates);

// FPCA + score forecasting on log rates; zero observed rates are floored at
// half the smallest positive rate of their year first. Forecasts are
// strictly positive.
MortalityPanel mortality_forecast(const MortalityPanel &panel, int h, int K = 6);

struct RateForecast {
    std::vector<int> years;
    std::vector<double> point, lower, upper; // floored at 0
};

// Automatic ARIMA forecast of an annual payout-rate series with bootstrap
// prediction intervals.
RateForecast forecast_pension_rates(const AnnualSeries &series, int h, int B = 1000,
                                    double alpha = 0.05, std::uint64_t seed = 0);

enum class Household { single, couple_each };

struct PvInputs {
    int entry_year = 2023;
    int base_year = 2023;
    double real_rate = 0.0; // fraction per year
    bool annuity = false;   // survival-weighted payments instead of e-truncation
};

// Present value at the base year of pension payments over a retirement of
// length e years (payments at the end of each retirement year). In annuity
// mode `survival` must hold the conditional survival probability for each
// payment year.
double lifetime_pension_pv(const PvInputs &inputs, double e_at_entry,
                           const AnnualSeries &rates);
double lifetime_pension_pv_annuity(const PvInputs &inputs,
                                   const std::vector<double> &survival,
                                   const AnnualSeries &rates);

struct WelfareInputs {
    // Observed mortality panels, [region][sex index 0=female, 1=male].
    std::map<std::string, std::array<MortalityPanel, 2>> mortality;
    AnnualSeries single_rate;      // observed $AUD/year history
    AnnualSeries couple_each_rate;
    double real_rate = 0.0;
    int base_year = 2023;
    std::vector<int> entry_years = {2022, 2027, 2032, 2037, 2042, 2047, 2051};
    std::map<int, int> pension_age_months; // per entry year; fallback below
    int default_pension_age_months = 804;  // statutory 67
    int K = 6;
    bool annuity = false;
};

struct PvRow {
    std::string region;
    Household household = Household::single;
    Sex sex = Sex::Female;
    int entry_year = 0;
    double pv = 0.0;
};

// One row per (region, household, sex, entry year): forecast mortality to
// the entry year, read e at the prevailing pension age, forecast the payout
// rates, discount.
std::vector<PvRow> welfare_table(const WelfareInputs &inputs);

void write_pv_csv(std::ostream &out, const std::vector<PvRow> &rows);

} // namespace hpfts
