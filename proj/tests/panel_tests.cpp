#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <string>

#include "hpfts/errors.hpp"
#include "hpfts/panel.hpp"

using namespace hpfts;

namespace {

Panel make_panel(const std::string& region, Sex sex, int first_year,
                 std::vector<std::vector<double>> values, int max_age) {
    Panel p;
    p.region = region;
    p.sex = sex;
    p.age_grid.max_age = max_age;
    for (std::size_t t = 0; t < values.size(); ++t)
        p.years.push_back(first_year + static_cast<int>(t));
    p.values = std::move(values);
    return p;
}

const char* kSmallFile =
    "Year Age Female Male Total\n"
    "# comment line\n"
    "2000 0 10 11 21\n"
    "2000 1 20 21 41\n"
    "2000 2 30 31 61\n"
    "2000 3+ 40 41 81\n"
    "2001 0 12 13 25\n"
    "2001 1 9 10 19\n"
    "2001 2 19 20 39\n"
    "2001 3+ 67 68 135\n";

}  // namespace

TEST_CASE("parse_population_file splits sexes and reads the open bin") {
    std::istringstream in(kSmallFile);
    auto [f, m] = parse_population_file(in, "TS", 100);
    CHECK(f.region == "TS");
    CHECK(f.sex == Sex::Female);
    CHECK(m.sex == Sex::Male);
    REQUIRE(f.years == std::vector<int>{2000, 2001});
    // cutoff above the file's open age keeps the file's grid
    CHECK(f.age_grid.max_age == 3);
    CHECK(f.values[0] == std::vector<double>{10, 20, 30, 40});
    CHECK(m.values[1] == std::vector<double>{13, 10, 20, 68});
}

TEST_CASE("parse_population_file groups ages at the cutoff") {
    std::ostringstream file;
    file << "Year Age Female Male Total\n";
    for (int year : {2010, 2011})
        for (int age = 0; age <= 5; ++age)
            file << year << ' ' << age << (age == 5 ? "+" : "") << ' ' << (age + 1) << ' '
                 << (age + 2) << ' ' << (2 * age + 3) << '\n';
    std::istringstream in(file.str());
    auto [f, m] = parse_population_file(in, "G", 3);
    CHECK(f.age_grid.max_age == 3);
    // ages 3, 4, 5+ pool into 3+
    CHECK(f.values[0] == std::vector<double>{1, 2, 3, 4 + 5 + 6});
    CHECK(m.values[0] == std::vector<double>{2, 3, 4, 5 + 6 + 7});
}

TEST_CASE("total mismatch is reported as a warning, not an error") {
    std::string text =
        "Year Age Female Male Total\n"
        "2000 0 10 11 99\n"
        "2000 1+ 20 21 41\n";
    std::istringstream in(text);
    std::vector<std::string> warnings;
    auto [f, m] = parse_population_file(in, "W", 100, &warnings);
    CHECK(f.values[0][0] == 10);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("2000") != std::string::npos);
}

TEST_CASE("gap in years names the missing year") {
    std::string text =
        "Year Age Female Male Total\n"
        "2000 0 1 1 2\n"
        "2000 1+ 1 1 2\n"
        "2002 0 1 1 2\n"
        "2002 1+ 1 1 2\n";
    std::istringstream in(text);
    try {
        parse_population_file(in, "GAP", 100);
        FAIL("expected GapInYears");
    } catch (const GapInYears& e) {
        CHECK(std::string(e.what()).find("2001") != std::string::npos);
    }
}

TEST_CASE("malformed rows are rejected") {
    SUBCASE("duplicate age") {
        std::istringstream in(
            "Year Age Female Male Total\n"
            "2000 0 1 1 2\n"
            "2000 0 1 1 2\n"
            "2000 1+ 1 1 2\n");
        CHECK_THROWS_AS(parse_population_file(in, "D", 100), Error);
    }
    SUBCASE("missing age") {
        std::istringstream in(
            "Year Age Female Male Total\n"
            "2000 0 1 1 2\n"
            "2000 2+ 1 1 2\n");
        CHECK_THROWS_AS(parse_population_file(in, "M", 100), Error);
    }
    SUBCASE("negative count") {
        std::istringstream in(
            "Year Age Female Male Total\n"
            "2000 0 -1 1 0\n"
            "2000 1+ 1 1 2\n");
        CHECK_THROWS_AS(parse_population_file(in, "N", 100), NegativeCount);
    }
    SUBCASE("too few columns") {
        std::istringstream in(
            "Year Age Female Male Total\n"
            "2000 0 1\n");
        CHECK_THROWS_AS(parse_population_file(in, "C", 100), MalformedRow);
    }
}

TEST_CASE("year_index and validate") {
    Panel p = make_panel("V", Sex::Female, 2000, {{1, 2}, {3, 4}}, 1);
    CHECK(p.year_index(2001) == 1);
    CHECK_THROWS_AS(p.year_index(1999), YearOutOfRange);
    CHECK_NOTHROW(p.validate());

    Panel ragged = p;
    ragged.values[1].push_back(9);
    CHECK_THROWS_AS(ragged.validate(), ShapeMismatch);

    Panel neg = p;
    neg.values[0][0] = -2;
    CHECK_THROWS_AS(neg.validate(), NegativeCount);
    CHECK_NOTHROW(neg.validate(false));
}

TEST_CASE("aggregate_regions sums and is order-invariant") {
    Panel a = make_panel("A", Sex::Female, 2000, {{1, 2}, {3, 4}}, 1);
    Panel b = make_panel("B", Sex::Female, 2000, {{10, 20}, {30, 40}}, 1);
    Panel c = make_panel("C", Sex::Female, 2000, {{0.125, 0.25}, {0.5, 0.75}}, 1);

    Panel fwd = aggregate_regions({a, b, c}, "NAT");
    Panel rev = aggregate_regions({c, b, a}, "NAT");
    CHECK(fwd.region == "NAT");
    CHECK(fwd.values[0][0] == 11.125);
    CHECK(fwd.values == rev.values);  // summed in canonical region order

    Panel other_years = make_panel("D", Sex::Female, 2001, {{1, 1}, {1, 1}}, 1);
    CHECK_THROWS_AS(aggregate_regions({a, other_years}, "NAT"), Error);
}

TEST_CASE("intersect_years trims panels to the common span") {
    Panel a = make_panel("A", Sex::Female, 2000, {{1}, {2}, {3}, {4}}, 0);
    Panel b = make_panel("B", Sex::Female, 2001, {{5}, {6}, {7}}, 0);
    auto out = intersect_years({a, b});
    CHECK(out[0].years == std::vector<int>{2001, 2002, 2003});
    CHECK(out[0].values == std::vector<std::vector<double>>{{2}, {3}, {4}});
    CHECK(out[1].years == out[0].years);
}

TEST_CASE("group_open_age conserves totals") {
    Panel p = make_panel("G", Sex::Male, 2000, {{1, 2, 3, 4, 5}}, 4);
    Panel g = group_open_age(p, 2);
    CHECK(g.age_grid.max_age == 2);
    CHECK(g.values[0] == std::vector<double>{1, 2, 3 + 4 + 5});
}

TEST_CASE("panel CSV write/read round trip is exact") {
    Panel f = make_panel("RT", Sex::Female, 2000, {{0.1, 1.0 / 3.0, 40}, {5, 6, 7}}, 2);
    Panel m = make_panel("RT", Sex::Male, 2000, {{9, 8, 7}, {6, 5, 4}}, 2);
    std::ostringstream out;
    write_panel_csv(out, {f, m});
    CHECK(out.str().find("2+") != std::string::npos);

    std::istringstream in(out.str());
    auto round = read_panel_csv(in);
    REQUIRE(round.size() == 2);
    const Panel& rf = round[0].sex == Sex::Female ? round[0] : round[1];
    CHECK(rf.values == f.values);
    CHECK(rf.years == f.years);
    CHECK(rf.age_grid.max_age == 2);
}

TEST_CASE("parse_annual_series reads year,value files") {
    std::istringstream in(
        "year,rate\n"
        "# note\n"
        "2000,100.5\n"
        "2001,101\n"
        "2002,102.25\n");
    auto s = parse_annual_series(in, "rate");
    CHECK(s.years == std::vector<int>{2000, 2001, 2002});
    CHECK(s.values[2] == 102.25);
    CHECK(s.at(2001) == 101.0);
    CHECK_THROWS_AS(s.at(2003), YearOutOfRange);

    std::istringstream gap("2000 5\n2002 6\n");
    CHECK_THROWS_AS(parse_annual_series(gap, "g"), GapInYears);
    std::istringstream empty("# only a comment\n");
    CHECK_THROWS_AS(parse_annual_series(empty, "e"), ValidationError);
}
