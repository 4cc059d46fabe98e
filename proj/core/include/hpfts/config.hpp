#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace hpfts {

// Flat key=value run configuration. Key names carry their units
// (months, percent, fraction, years) so a file is readable without
// consulting documentation. Unknown keys are rejected.
struct RunConfig {
    int horizon_years = 30;
    int num_components = 6;
    int num_paths = 1000;
    double alpha_level = 0.05;
    double oadr_target_percent = 23.0;
    int start_pension_age_months = 804;
    int increment_months = 1;
    double birth_sex_ratio_male_per_female = 1.057;
    double real_rate_fraction = 0.02;
    int base_year = 2023;
    std::uint64_t seed = 0;
    std::string mode = "univariate";
    bool log_transform = true;
    bool refit_each_step = true;
    std::string out_dir = "out";
    int threads = 1;
    std::string national_code = "TOTAL";
    int age_cutoff_years = 100;
    std::vector<int> entry_years = {2022, 2027, 2032, 2037, 2042, 2047, 2051};

    // region code -> file path
    std::map<std::string, std::string> population_files;
    std::map<std::string, std::string> mortality_files;

    // consolidated panel CSV (as written by `ingest` or `synth`);
    // takes precedence over population_files when set
    std::string panel_csv;

    std::string pension_rate_file_single;
    std::string pension_rate_file_couple_each;

    // throws ValidationError when any field is outside the bounds the
    // consuming modules enforce
    void validate() const;
};

// Parses one file. Lines are `key = value`, blank lines and `#` comments
// are ignored. Throws ValidationError on unknown keys, bad values, and
// duplicate scalar keys.
RunConfig parse_config(std::istream& in, const std::string& origin = "config");
RunConfig load_config(const std::string& path);

// Applies a single assignment; shared by the file parser and by CLI
// overrides. `origin` only decorates error messages.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value, const std::string& origin);

std::string config_to_string(const RunConfig& cfg);

}  // namespace hpfts
