#include "hpfts/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hpfts/csv.hpp"
#include "hpfts/errors.hpp"
#include "hpfts/pension.hpp"

namespace hpfts {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(const std::string& origin, const std::string& what) {
    throw ValidationError(origin + ": " + what);
}

long long parse_int(const std::string& origin, const std::string& key, const std::string& v) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        bad(origin, "key '" + key + "' expects an integer, got '" + v + "'");
    return out;
}

double parse_real(const std::string& origin, const std::string& key, const std::string& v) {
    try {
        return parse_double(v, "config value for " + key);
    } catch (const Error& e) {
        bad(origin, e.what());
    }
}

bool parse_bool(const std::string& origin, const std::string& key, const std::string& v) {
    std::string lo = v;
    std::transform(lo.begin(), lo.end(), lo.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lo == "true" || lo == "on" || lo == "1" || lo == "yes") return true;
    if (lo == "false" || lo == "off" || lo == "0" || lo == "no") return false;
    bad(origin, "key '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& origin, const std::string& key,
                                const std::string& v) {
    std::vector<int> out;
    std::string token;
    std::stringstream ss(v);
    while (std::getline(ss, token, ',')) {
        token = trim(token);
        if (token.empty()) continue;
        out.push_back(static_cast<int>(parse_int(origin, key, token)));
    }
    if (out.empty()) bad(origin, "key '" + key + "' expects a comma-separated integer list");
    return out;
}

bool valid_region_code(const std::string& code) {
    if (code.empty()) return false;
    for (char c : code)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& raw_key,
                        const std::string& raw_value, const std::string& origin) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    if (key.empty()) bad(origin, "empty key");
    if (value.empty()) bad(origin, "key '" + key + "' has an empty value");

    if (key == "horizon_years") cfg.horizon_years = static_cast<int>(parse_int(origin, key, value));
    else if (key == "num_components") cfg.num_components = static_cast<int>(parse_int(origin, key, value));
    else if (key == "num_paths") cfg.num_paths = static_cast<int>(parse_int(origin, key, value));
    else if (key == "alpha_level") cfg.alpha_level = parse_real(origin, key, value);
    else if (key == "oadr_target_percent") cfg.oadr_target_percent = parse_real(origin, key, value);
    else if (key == "start_pension_age_months") cfg.start_pension_age_months = static_cast<int>(parse_int(origin, key, value));
    else if (key == "increment_months") cfg.increment_months = static_cast<int>(parse_int(origin, key, value));
    else if (key == "birth_sex_ratio_male_per_female") cfg.birth_sex_ratio_male_per_female = parse_real(origin, key, value);
    else if (key == "real_rate_fraction") cfg.real_rate_fraction = parse_real(origin, key, value);
    else if (key == "base_year") cfg.base_year = static_cast<int>(parse_int(origin, key, value));
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(origin, key, value));
    else if (key == "mode") cfg.mode = value;
    else if (key == "log_transform") cfg.log_transform = parse_bool(origin, key, value);
    else if (key == "refit_each_step") cfg.refit_each_step = parse_bool(origin, key, value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "threads") cfg.threads = static_cast<int>(parse_int(origin, key, value));
    else if (key == "national_code") cfg.national_code = value;
    else if (key == "age_cutoff_years") cfg.age_cutoff_years = static_cast<int>(parse_int(origin, key, value));
    else if (key == "entry_years") cfg.entry_years = parse_int_list(origin, key, value);
    else if (key == "panel_csv") cfg.panel_csv = value;
    else if (key == "pension_rate_file_single") cfg.pension_rate_file_single = value;
    else if (key == "pension_rate_file_couple_each") cfg.pension_rate_file_couple_each = value;
    else if (key.rfind("population_file.", 0) == 0) {
        std::string region = key.substr(16);
        if (!valid_region_code(region)) bad(origin, "bad region code in key '" + key + "'");
        cfg.population_files[region] = value;
    } else if (key.rfind("mortality_file.", 0) == 0) {
        std::string region = key.substr(15);
        if (!valid_region_code(region)) bad(origin, "bad region code in key '" + key + "'");
        cfg.mortality_files[region] = value;
    } else {
        bad(origin, "unknown key '" + key + "'");
    }
}

RunConfig parse_config(std::istream& in, const std::string& origin) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        const std::string where = origin + ":" + std::to_string(lineno);
        if (eq == std::string::npos) bad(where, "expected key = value, got '" + s + "'");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        // map keys may repeat across regions, scalar keys may not
        bool is_map_key = key.rfind("population_file.", 0) == 0 || key.rfind("mortality_file.", 0) == 0;
        if (!is_map_key && !seen.insert(key).second)
            bad(where, "duplicate key '" + key + "'");
        apply_config_entry(cfg, key, value, where);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    RunConfig cfg = parse_config(in, path);

    // data paths resolve against the config file's own directory, so a
    // generated dataset + config moves as a unit
    std::filesystem::path dir = std::filesystem::path(path).parent_path();
    auto resolve = [&dir](std::string& p) {
        if (p.empty() || dir.empty()) return;
        std::filesystem::path fp(p);
        if (fp.is_relative()) p = (dir / fp).string();
    };
    for (auto& [region, p] : cfg.population_files) resolve(p);
    for (auto& [region, p] : cfg.mortality_files) resolve(p);
    resolve(cfg.panel_csv);
    resolve(cfg.pension_rate_file_single);
    resolve(cfg.pension_rate_file_couple_each);
    return cfg;
}

void RunConfig::validate() const {
    if (horizon_years < 1) throw ValidationError("horizon_years must be >= 1");
    if (num_components < 1) throw ValidationError("num_components must be >= 1");
    if (num_paths < 0) throw ValidationError("num_paths must be >= 0");
    if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw ValidationError("alpha_level must lie in (0, 1)");
    if (!(oadr_target_percent > 0.0)) throw ValidationError("oadr_target_percent must be positive");
    if (start_pension_age_months < kMinPensionAgeMonths || start_pension_age_months > kMaxPensionAgeMonths)
        throw ValidationError("start_pension_age_months outside [180, 1200]");
    if (increment_months < 1) throw ValidationError("increment_months must be >= 1");
    if (!(birth_sex_ratio_male_per_female > 0.0)) throw ValidationError("birth_sex_ratio_male_per_female must be positive");
    if (mode != "univariate" && mode != "multivariate")
        throw ValidationError("mode must be 'univariate' or 'multivariate'");
    if (threads < 1) throw ValidationError("threads must be >= 1");
    if (age_cutoff_years < 2) throw ValidationError("age_cutoff_years must be >= 2");
    if (entry_years.empty()) throw ValidationError("entry_years must not be empty");
}

std::string config_to_string(const RunConfig& cfg) {
    std::ostringstream out;
    out << "horizon_years = " << cfg.horizon_years << "\n"
        << "num_components = " << cfg.num_components << "\n"
        << "num_paths = " << cfg.num_paths << "\n"
        << "alpha_level = " << format_double(cfg.alpha_level) << "\n"
        << "oadr_target_percent = " << format_double(cfg.oadr_target_percent) << "\n"
        << "start_pension_age_months = " << cfg.start_pension_age_months << "\n"
        << "increment_months = " << cfg.increment_months << "\n"
        << "birth_sex_ratio_male_per_female = " << format_double(cfg.birth_sex_ratio_male_per_female) << "\n"
        << "real_rate_fraction = " << format_double(cfg.real_rate_fraction) << "\n"
        << "base_year = " << cfg.base_year << "\n"
        << "seed = " << cfg.seed << "\n"
        << "mode = " << cfg.mode << "\n"
        << "log_transform = " << (cfg.log_transform ? "true" : "false") << "\n"
        << "refit_each_step = " << (cfg.refit_each_step ? "true" : "false") << "\n"
        << "out_dir = " << cfg.out_dir << "\n"
        << "threads = " << cfg.threads << "\n"
        << "national_code = " << cfg.national_code << "\n"
        << "age_cutoff_years = " << cfg.age_cutoff_years << "\n";
    out << "entry_years = ";
    for (std::size_t i = 0; i < cfg.entry_years.size(); ++i)
        out << (i ? "," : "") << cfg.entry_years[i];
    out << "\n";
    if (!cfg.panel_csv.empty()) out << "panel_csv = " << cfg.panel_csv << "\n";
    for (const auto& [region, path] : cfg.population_files)
        out << "population_file." << region << " = " << path << "\n";
    for (const auto& [region, path] : cfg.mortality_files)
        out << "mortality_file." << region << " = " << path << "\n";
    if (!cfg.pension_rate_file_single.empty())
        out << "pension_rate_file_single = " << cfg.pension_rate_file_single << "\n";
    if (!cfg.pension_rate_file_couple_each.empty())
        out << "pension_rate_file_couple_each = " << cfg.pension_rate_file_couple_each << "\n";
    return out.str();
}

}  // namespace hpfts
