#include "hpfts/panel.hpp"

#include "hpfts/csv.hpp"
#include "hpfts/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace hpfts {

int Panel::year_index(int year) const {
    if (years.empty() || year < years.front() || year > years.back())
        throw YearOutOfRange(year, years.empty() ? 0 : years.front(),
                             years.empty() ? 0 : years.back());
    return year - years.front();
}

void Panel::validate(bool nonnegative) const {
    for (std::size_t t = 1; t < years.size(); ++t)
        if (years[t] != years[t - 1] + 1)
            throw GapInYears(years[t - 1] + 1, "panel " + region);
    if (values.size() != years.size())
        throw ShapeMismatch("panel has " + std::to_string(values.size()) + " rows for " +
                            std::to_string(years.size()) + " years");
    for (std::size_t t = 0; t < values.size(); ++t) {
        if (values[t].size() != n_ages())
            throw ShapeMismatch("year " + std::to_string(years[t]) + " has " +
                                std::to_string(values[t].size()) + " ages, expected " +
                                std::to_string(n_ages()));
        if (nonnegative)
            for (double v : values[t])
                if (v < 0.0)
                    throw NegativeCount("negative value in year " + std::to_string(years[t]));
    }
}

double AnnualSeries::at(int year) const {
    if (years.empty() || year < years.front() || year > years.back())
        throw YearOutOfRange(year, years.empty() ? 0 : years.front(),
                             years.empty() ? 0 : years.back());
    return values[static_cast<std::size_t>(year - years.front())];
}

AnnualSeries parse_annual_series(std::istream &in, const std::string &label) {
    AnnualSeries series;
    series.label = label;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_fields(line);
        if (fields.empty() || fields[0].empty() || fields[0][0] == '#') continue;
        if (series.years.empty() && !std::isdigit(static_cast<unsigned char>(fields[0][0])))
            continue; // header
        if (fields.size() < 2)
            throw MalformedRow(label + " line " + std::to_string(line_no) +
                               ": expected `year value`");
        int year = static_cast<int>(parse_double(fields[0], "year on line " + std::to_string(line_no)));
        double value = parse_double(fields[1], label + " value on line " + std::to_string(line_no));
        if (!series.years.empty()) {
            if (year != series.years.back() + 1)
                throw GapInYears(series.years.back() + 1, label);
        }
        series.years.push_back(year);
        series.values.push_back(value);
    }
    if (series.years.empty())
        throw ValidationError(label + ": no data rows");
    return series;
}

namespace {

// Age token is "<n>" or "<n>+"; returns {age, open_flag}.
std::pair<int, bool> parse_age_token(std::string_view tok, int line_no) {
    bool open = false;
    if (!tok.empty() && tok.back() == '+') {
        open = true;
        tok.remove_suffix(1);
    }
    if (tok.empty())
        throw MalformedRow("empty age token on line " + std::to_string(line_no));
    int age = 0;
    for (char c : tok) {
        if (c < '0' || c > '9')
            throw MalformedRow("bad age token on line " + std::to_string(line_no));
        age = age * 10 + (c - '0');
    }
    return {age, open};
}

bool is_number_start(char c) {
    return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
}

} // namespace

std::pair<PopulationPanel, PopulationPanel>
parse_population_file(std::istream &in, const std::string &region, int cutoff,
                      std::vector<std::string> *warnings) {
    struct Row {
        int age;
        bool open;
        double female, male, total;
        bool has_total;
    };
    std::map<int, std::vector<Row>> by_year;
    int file_open_age = -1;

    std::string line;
    int line_no = 0;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv(line);
        auto hash = sv.find('#');
        if (hash != std::string_view::npos)
            sv = sv.substr(0, hash);
        const auto fields = split_fields(sv);
        if (fields.empty())
            continue;
        if (!header_skipped && !is_number_start(fields[0].front())) {
            header_skipped = true;
            continue;
        }
        header_skipped = true;
        if (fields.size() < 4)
            throw MalformedRow("expected Year Age Female Male [Total] on line " +
                               std::to_string(line_no));
        const int year = static_cast<int>(
            parse_double(fields[0], "Year column, line " + std::to_string(line_no)));
        const auto [age, open] = parse_age_token(fields[1], line_no);
        Row row;
        row.age = age;
        row.open = open;
        row.female = parse_double(fields[2], "Female column, line " + std::to_string(line_no));
        row.male = parse_double(fields[3], "Male column, line " + std::to_string(line_no));
        row.has_total = fields.size() >= 5;
        row.total = row.has_total
                        ? parse_double(fields[4], "Total column, line " + std::to_string(line_no))
                        : 0.0;
        if (row.female < 0.0 || row.male < 0.0)
            throw NegativeCount("negative count at year " + std::to_string(year) + " age " +
                                std::string(fields[1]));
        if (row.has_total && std::fabs(row.total - (row.female + row.male)) > 0.5 && warnings)
            warnings->push_back("year " + std::to_string(year) + " age " + std::string(fields[1]) +
                                ": Total differs from Female+Male by " +
                                format_double(row.total - (row.female + row.male)));
        if (open)
            file_open_age = std::max(file_open_age, age);
        by_year[year].push_back(row);
    }
    if (by_year.empty())
        throw MalformedRow("no data rows in population file");
    if (file_open_age < 0)
        throw MissingAge("file has no open-ended age group");

    const int effective_cutoff = std::min(cutoff, file_open_age);
    AgeGrid grid{effective_cutoff, true};

    std::vector<int> years;
    for (const auto &[year, rows] : by_year) {
        if (!years.empty() && year != years.back() + 1)
            throw GapInYears(years.back() + 1, "population file for " + region);
        years.push_back(year);
        std::vector<bool> seen(static_cast<std::size_t>(file_open_age) + 1, false);
        for (const Row &r : rows) {
            if (r.age > file_open_age)
                throw MalformedRow("age " + std::to_string(r.age) + " above open group in year " +
                                   std::to_string(year));
            if (seen[static_cast<std::size_t>(r.age)])
                throw MalformedRow("duplicate age " + std::to_string(r.age) + " in year " +
                                   std::to_string(year));
            seen[static_cast<std::size_t>(r.age)] = true;
        }
        for (int a = 0; a <= file_open_age; ++a)
            if (!seen[static_cast<std::size_t>(a)])
                throw MissingAge("year " + std::to_string(year) + " is missing age " +
                                 std::to_string(a));
    }

    PopulationPanel female{region, Sex::Female, years, {}, grid};
    PopulationPanel male{region, Sex::Male, years, {}, grid};
    for (const auto &[year, rows] : by_year) {
        std::vector<double> frow(grid.size(), 0.0);
        std::vector<double> mrow(grid.size(), 0.0);
        for (const Row &r : rows) {
            const int slot = std::min(r.age, effective_cutoff);
            frow[static_cast<std::size_t>(slot)] += r.female;
            mrow[static_cast<std::size_t>(slot)] += r.male;
        }
        female.values.push_back(std::move(frow));
        male.values.push_back(std::move(mrow));
    }
    female.validate();
    male.validate();
    return {std::move(female), std::move(male)};
}

PopulationPanel aggregate_regions(std::vector<PopulationPanel> panels,
                                  const std::string &national_code) {
    if (panels.empty())
        throw ShapeMismatch("aggregate_regions: empty panel list");
    std::sort(panels.begin(), panels.end(),
              [](const Panel &a, const Panel &b) { return a.region < b.region; });
    PopulationPanel out = panels.front();
    out.region = national_code;
    for (std::size_t i = 1; i < panels.size(); ++i) {
        const Panel &p = panels[i];
        if (p.sex != out.sex || p.years != out.years || !(p.age_grid == out.age_grid))
            throw ShapeMismatch("aggregate_regions: panel " + p.region +
                                " does not align with " + panels.front().region);
        for (std::size_t t = 0; t < out.values.size(); ++t)
            for (std::size_t x = 0; x < out.values[t].size(); ++x)
                out.values[t][x] += p.values[t][x];
    }
    return out;
}

std::vector<PopulationPanel> intersect_years(std::vector<PopulationPanel> panels) {
    if (panels.empty())
        return panels;
    int lo = panels.front().years.front();
    int hi = panels.front().years.back();
    for (const Panel &p : panels) {
        if (p.years.empty())
            throw ShapeMismatch("intersect_years: panel " + p.region + " has no years");
        lo = std::max(lo, p.years.front());
        hi = std::min(hi, p.years.back());
    }
    if (lo > hi)
        throw ShapeMismatch("intersect_years: no common years");
    for (Panel &p : panels) {
        const int drop_front = lo - p.years.front();
        const int keep = hi - lo + 1;
        p.values = {p.values.begin() + drop_front, p.values.begin() + drop_front + keep};
        p.years.assign(static_cast<std::size_t>(keep), 0);
        for (int i = 0; i < keep; ++i)
            p.years[static_cast<std::size_t>(i)] = lo + i;
    }
    return panels;
}

Panel group_open_age(const Panel &panel, int new_max) {
    if (new_max > panel.age_grid.max_age)
        throw ShapeMismatch("group_open_age: new open age exceeds grid");
    Panel out = panel;
    out.age_grid = AgeGrid{new_max, true};
    for (std::size_t t = 0; t < panel.values.size(); ++t) {
        std::vector<double> row(out.age_grid.size(), 0.0);
        for (std::size_t x = 0; x < panel.values[t].size(); ++x)
            row[std::min(x, out.age_grid.size() - 1)] += panel.values[t][x];
        out.values[t] = std::move(row);
    }
    return out;
}

void write_panel_csv(std::ostream &out, const std::vector<Panel> &panels,
                     const std::string &value_column) {
    out << "region,sex,year,age," << value_column << '\n';
    for (const Panel &p : panels)
        for (std::size_t t = 0; t < p.values.size(); ++t)
            for (std::size_t x = 0; x < p.values[t].size(); ++x)
                write_csv_row(out, {p.region, sex_label(p.sex), std::to_string(p.years[t]),
                                    p.age_grid.label(static_cast<int>(x)),
                                    format_double(p.values[t][x])});
}

std::vector<Panel> read_panel_csv(std::istream &in) {
    struct Cell {
        int year, age;
        bool open;
        double value;
    };
    std::map<std::pair<std::string, std::string>, std::vector<Cell>> groups;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 5)
            throw MalformedRow("expected 5 columns on line " + std::to_string(line_no));
        const auto [age, open] = parse_age_token(fields[3], line_no);
        Cell c{static_cast<int>(
                   parse_double(fields[2], "year column, line " + std::to_string(line_no))),
               age, open,
               parse_double(fields[4], "value column, line " + std::to_string(line_no))};
        groups[{std::string(fields[0]), std::string(fields[1])}].push_back(c);
    }
    std::vector<Panel> out;
    for (auto &[key, cells] : groups) {
        int open_age = -1;
        std::set<int> year_set;
        for (const Cell &c : cells) {
            year_set.insert(c.year);
            if (c.open)
                open_age = std::max(open_age, c.age);
        }
        if (open_age < 0)
            throw MissingAge("panel " + key.first + "/" + key.second + " has no open age bin");
        Panel p;
        p.region = key.first;
        p.sex = key.second == "M" ? Sex::Male : Sex::Female;
        p.age_grid = AgeGrid{open_age, true};
        p.years.assign(year_set.begin(), year_set.end());
        p.values.assign(p.years.size(), std::vector<double>(p.age_grid.size(), 0.0));
        for (const Cell &c : cells) {
            if (c.age > open_age)
                throw MalformedRow("age above open bin in panel " + key.first);
            p.values[static_cast<std::size_t>(c.year - p.years.front())]
                    [static_cast<std::size_t>(c.age)] = c.value;
        }
        p.validate(false);
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace hpfts
