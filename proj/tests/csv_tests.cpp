#include <doctest.h>

#include <random>
#include <sstream>

#include "hpfts/csv.hpp"
#include "hpfts/errors.hpp"

using namespace hpfts;

TEST_CASE("format_double round-trips exactly") {
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.5) == "-2.5");
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1e9, 1e9);
    for (int i = 0; i < 200; ++i) {
        double x = u(rng) * std::pow(10.0, (i % 21) - 10);
        CHECK(parse_double(format_double(x), "rt") == x);
    }
}

TEST_CASE("parse_double rejects trailing garbage") {
    CHECK(parse_double("-3.5e-2", "ok") == doctest::Approx(-0.035));
    CHECK_THROWS_AS(parse_double("1.2.3", "ctx"), MalformedRow);
    CHECK_THROWS_AS(parse_double("abc", "ctx"), MalformedRow);
    CHECK_THROWS_AS(parse_double("", "ctx"), MalformedRow);
    CHECK_THROWS_AS(parse_double("4x", "ctx"), MalformedRow);
}

TEST_CASE("split_fields treats commas and whitespace alike") {
    auto f = split_fields("a,b\tc  d\r");
    REQUIRE(f.size() == 4);
    CHECK(f[0] == "a");
    CHECK(f[3] == "d");
    CHECK(split_fields("a,,b").size() == 2);
    CHECK(split_fields("").empty());
}

TEST_CASE("write_csv_row joins cells with commas") {
    std::ostringstream out;
    write_csv_row(out, {"x", "", "3"});
    CHECK(out.str() == "x,,3\n");
}
