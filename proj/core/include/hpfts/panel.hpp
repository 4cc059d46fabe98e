#pragma once

#include "hpfts/age_grid.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace hpfts {

// Annual counts (or rates) by single year of age for one region and sex.
// values[t][x] indexes year years[t], age x. Immutable by convention once
// built; all mutating helpers return new panels.
struct Panel {
    std::string region;
    Sex sex = Sex::Female;
    std::vector<int> years;       // contiguous, ascending
    std::vector<std::vector<double>> values;
    AgeGrid age_grid;

    std::size_t n_years() const { return years.size(); }
    std::size_t n_ages() const { return age_grid.size(); }

    int year_index(int year) const; // YearOutOfRange if absent

    // Throws ValidationError subtypes when invariants fail.
    void validate(bool nonnegative = true) const;
};

using PopulationPanel = Panel;
using MortalityPanel = Panel;

// A labelled scalar series over contiguous years (pension rates, interest
// rates, total counts, ...).
struct AnnualSeries {
    std::string label;
    std::vector<int> years;
    std::vector<double> values;

    double at(int year) const; // YearOutOfRange if absent
};

// Parses a two-column `year value` file (comma or whitespace separated,
// `#` comments, optional header line). Years must be contiguous ascending.
AnnualSeries parse_annual_series(std::istream &in, const std::string &label);

// Parses the `Year Age Female Male Total` layout. Ages at or above `cutoff`
// are summed into the open bin; the Total column is ignored and recomputed
// (mismatch > 0.5 persons appends a note to `warnings` when given).
std::pair<PopulationPanel, PopulationPanel>
parse_population_file(std::istream &in, const std::string &region, int cutoff = 100,
                      std::vector<std::string> *warnings = nullptr);

// Elementwise sum over panels sharing sex/years/grid. Panels are summed in
// ascending region-code order so the result is identical for any input order.
PopulationPanel aggregate_regions(std::vector<PopulationPanel> panels,
                                  const std::string &national_code = "TOTAL");

// Restricts every panel to the years common to all of them.
std::vector<PopulationPanel> intersect_years(std::vector<PopulationPanel> panels);

// Re-groups a panel onto a coarser open bin (new_max <= current max age).
Panel group_open_age(const Panel &panel, int new_max);

// CSV persistence: header `region,sex,year,age,count`, open bin written as
// e.g. `100+`. Doubles render in shortest round-trip form so a write/read
// cycle is bit-identical.
void write_panel_csv(std::ostream &out, const std::vector<Panel> &panels,
                     const std::string &value_column = "count");
std::vector<Panel> read_panel_csv(std::istream &in);

} // namespace hpfts
