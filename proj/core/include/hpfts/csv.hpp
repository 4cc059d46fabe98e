#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace hpfts {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// Parse a double, throwing MalformedRow on trailing garbage.
double parse_double(std::string_view token, const std::string &context);

/// Split a line on commas and/or whitespace, skipping empty tokens.
std::vector<std::string_view> split_fields(std::string_view line);

void write_csv_row(std::ostream &out, const std::vector<std::string> &cells);

} // namespace hpfts
