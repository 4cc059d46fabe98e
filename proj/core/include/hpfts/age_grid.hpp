#pragma once

#include <cstddef>
#include <string>

namespace hpfts {

// Single-year ages 0..max_age where the last bin collects everyone aged
// max_age and above.
struct AgeGrid {
    int max_age = 100;
    bool open_ended = true;

    std::size_t size() const { return static_cast<std::size_t>(max_age) + 1; }

    // Label for the age at index x, e.g. "37" or "100+".
    std::string label(int x) const {
        std::string s = std::to_string(x);
        if (open_ended && x == max_age)
            s += '+';
        return s;
    }

    bool operator==(const AgeGrid &) const = default;
};

enum class Sex { Female, Male };

inline const char *sex_label(Sex s) { return s == Sex::Female ? "F" : "M"; }

} // namespace hpfts
