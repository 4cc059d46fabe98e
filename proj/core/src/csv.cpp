#include "hpfts/csv.hpp"

#include "hpfts/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <system_error>

namespace hpfts {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::string &context) {
    double value = 0.0;
    const char *first = token.data();
    const char *last = token.data() + token.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
        throw MalformedRow("non-numeric value '" + std::string(token) + "' in " + context);
    return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ',' || line[i] == ' ' || line[i] == '\t' ||
                                   line[i] == '\r'))
            ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ',' && line[j] != ' ' && line[j] != '\t' &&
               line[j] != '\r')
            ++j;
        if (j > i)
            out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

void write_csv_row(std::ostream &out, const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            out << ',';
        out << cells[i];
    }
    out << '\n';
}

} // namespace hpfts
