// hpfts: Hamilton-Perry population forecasting with functional time series.
//
// Subcommands: ingest, synth, project, pension-age, welfare. All outputs are
// CSV (data) and SVG (diagnostic charts); every chart has a CSV twin with
// exactly the plotted numbers. Runs are deterministic for a fixed config and
// seed, independent of --threads.

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hpfts/config.hpp"
#include "hpfts/csv.hpp"
#include "hpfts/errors.hpp"
#include "hpfts/hp_engine.hpp"
#include "hpfts/panel.hpp"
#include "hpfts/pension.hpp"
#include "hpfts/ratios.hpp"
#include "hpfts/stats.hpp"
#include "hpfts/svg.hpp"
#include "hpfts/synth.hpp"
#include "hpfts/welfare.hpp"

namespace fs = std::filesystem;
using namespace hpfts;

namespace {

struct SharedFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> mode;
    std::optional<int> horizon;
    std::optional<int> paths;
    std::optional<double> alpha;
    std::optional<double> oadr_target;
    std::optional<int> threads;
};

void add_shared_flags(CLI::App* cmd, SharedFlags& s) {
    cmd->add_option("--config", s.config_path, "run configuration file (key = value lines)");
    cmd->add_option("--seed", s.seed, "RNG seed (overrides config)");
    cmd->add_option("--out", s.out, "output directory (overrides config)");
    cmd->add_option("--mode", s.mode, "univariate or multivariate ratio modelling")
        ->check(CLI::IsMember({"univariate", "multivariate"}));
    cmd->add_option("--horizon", s.horizon, "forecast horizon in years");
    cmd->add_option("--paths", s.paths, "bootstrap path count (0 = point forecast only)");
    cmd->add_option("--alpha", s.alpha, "prediction interval tail mass, e.g. 0.05 for 95%");
    cmd->add_option("--oadr-target", s.oadr_target, "old-age dependency ratio ceiling, percent");
    cmd->add_option("--threads", s.threads, "worker threads (output is identical for any value)");
}

RunConfig build_config(const SharedFlags& s) {
    RunConfig cfg = s.config_path.empty() ? RunConfig{} : load_config(s.config_path);
    if (s.seed) cfg.seed = *s.seed;
    if (s.out) cfg.out_dir = *s.out;
    if (s.mode) cfg.mode = *s.mode;
    if (s.horizon) cfg.horizon_years = *s.horizon;
    if (s.paths) cfg.num_paths = *s.paths;
    if (s.alpha) cfg.alpha_level = *s.alpha;
    if (s.oadr_target) cfg.oadr_target_percent = *s.oadr_target;
    if (s.threads) cfg.threads = *s.threads;
    cfg.validate();
    return cfg;
}

ProjectionConfig projection_config(const RunConfig& cfg) {
    ProjectionConfig p;
    p.horizon = cfg.horizon_years;
    p.K = cfg.num_components;
    p.B = cfg.num_paths;
    p.alpha = cfg.alpha_level;
    p.seed = cfg.seed;
    p.log_transform = cfg.log_transform;
    p.refit_each_step = cfg.refit_each_step;
    p.mode = cfg.mode == "multivariate" ? ProjectionConfig::Mode::multivariate
                                        : ProjectionConfig::Mode::univariate;
    p.bsr.male_per_female = cfg.birth_sex_ratio_male_per_female;
    p.threads = cfg.threads;
    return p;
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    fs::path full = dir / name;
    std::ofstream out(full, std::ios::binary);
    if (!out) throw ValidationError("cannot open output file '" + full.string() + "'");
    return out;
}

std::ifstream open_input(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + what + " '" + path + "'");
    return in;
}

// region -> (female, male), keyed ascending so iteration order is canonical
using Dataset = std::map<std::string, std::pair<PopulationPanel, PopulationPanel>>;

Dataset load_population(const RunConfig& cfg) {
    Dataset ds;
    if (!cfg.panel_csv.empty()) {
        auto in = open_input(cfg.panel_csv, "panel CSV");
        std::map<std::string, std::array<std::optional<Panel>, 2>> grouped;
        for (auto& p : read_panel_csv(in))
            grouped[p.region][p.sex == Sex::Male ? 1 : 0] = std::move(p);
        for (auto& [region, pair] : grouped) {
            if (!pair[0] || !pair[1])
                throw ValidationError("region " + region + " in '" + cfg.panel_csv +
                                      "' is missing one sex");
            ds.emplace(region, std::make_pair(std::move(*pair[0]), std::move(*pair[1])));
        }
    } else {
        if (cfg.population_files.empty())
            throw ValidationError(
                "no population data configured: set panel_csv or population_file.<REGION>");
        for (const auto& [region, path] : cfg.population_files) {
            auto in = open_input(path, "population file");
            std::vector<std::string> warnings;
            auto [f, m] = parse_population_file(in, region, cfg.age_cutoff_years, &warnings);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
            ds.emplace(region, std::make_pair(std::move(f), std::move(m)));
        }
    }
    return ds;
}

double year_total(const Panel& p, std::size_t t) {
    double sum = 0.0;
    for (double v : p.values[t]) sum += v;
    return sum;
}

// --------------------------------------------------------------------------
// ingest

int cmd_ingest(const SharedFlags& shared, const std::vector<std::string>& inputs) {
    RunConfig cfg = build_config(shared);

    // positional inputs are REGION=path or bare paths (region = upper stem)
    for (const auto& arg : inputs) {
        std::size_t eq = arg.find('=');
        std::string region, path;
        if (eq != std::string::npos) {
            region = arg.substr(0, eq);
            path = arg.substr(eq + 1);
        } else {
            path = arg;
            for (char c : fs::path(arg).stem().string())
                if (std::isalnum(static_cast<unsigned char>(c)))
                    region += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
        if (region.empty() || path.empty())
            throw ValidationError("bad input '" + arg + "', expected REGION=path");
        cfg.population_files[region] = path;
    }
    if (cfg.population_files.empty())
        throw ValidationError("ingest needs input files (positional or population_file.<REGION>)");

    Dataset ds;
    for (const auto& [region, path] : cfg.population_files) {
        auto in = open_input(path, "population file");
        std::vector<std::string> warnings;
        auto [f, m] = parse_population_file(in, region, cfg.age_cutoff_years, &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << region << ": " << w << "\n";
        ds.emplace(region, std::make_pair(std::move(f), std::move(m)));
    }

    std::vector<Panel> bundle;
    std::vector<PopulationPanel> females, males;
    for (const auto& [region, pair] : ds) {
        const auto& [f, m] = pair;
        std::size_t last = f.n_years() - 1;
        std::cout << "region " << region << ": years " << f.years.front() << "-"
                  << f.years.back() << " (" << f.n_years() << "), ages 0-"
                  << f.age_grid.label(f.n_ages() - 1) << ", latest total "
                  << format_double(year_total(f, last) + year_total(m, last)) << "\n";
        bundle.push_back(f);
        bundle.push_back(m);
        females.push_back(f);
        males.push_back(m);
    }

    if (ds.size() > 1) {
        PopulationPanel nf = aggregate_regions(intersect_years(std::move(females)), cfg.national_code);
        PopulationPanel nm = aggregate_regions(intersect_years(std::move(males)), cfg.national_code);
        std::size_t last = nf.n_years() - 1;
        std::cout << "national " << cfg.national_code << ": years " << nf.years.front() << "-"
                  << nf.years.back() << ", latest total "
                  << format_double(year_total(nf, last) + year_total(nm, last)) << "\n";
        bundle.push_back(std::move(nf));
        bundle.push_back(std::move(nm));
    }

    auto out = open_output(cfg.out_dir, "panels.csv");
    write_panel_csv(out, bundle);
    std::cout << "wrote " << (fs::path(cfg.out_dir) / "panels.csv").string() << " ("
              << bundle.size() << " panels)\n";
    return 0;
}

// --------------------------------------------------------------------------
// synth

void write_raw_panel_pair(std::ostream& out, const Panel& f, const Panel& m) {
    out << "Year Age Female Male Total\n";
    for (std::size_t t = 0; t < f.n_years(); ++t)
        for (std::size_t x = 0; x < f.n_ages(); ++x) {
            double fv = f.values[t][x], mv = m.values[t][x];
            out << f.years[t] << ' ' << f.age_grid.label(x) << ' ' << format_double(fv) << ' '
                << format_double(mv) << ' ' << format_double(fv + mv) << '\n';
        }
}

int cmd_synth(const SharedFlags& shared, int regions, int years, double growth, double sigma,
              int max_age) {
    RunConfig cfg = build_config(shared);
    if (regions < 1 || regions > 99) throw ValidationError("--regions must lie in [1, 99]");
    if (years < 3) throw ValidationError("--years must be >= 3");
    if (max_age < 2) throw ValidationError("--max-age must be >= 2");

    const fs::path dir(cfg.out_dir);
    const int first_year = 2000;
    std::ostringstream gen;  // config body for the generated dataset

    for (int i = 0; i < regions; ++i) {
        char code[8];
        std::snprintf(code, sizeof(code), "R%02d", i + 1);
        SynthSpec spec;
        spec.growth = growth + 0.003 * i;
        spec.base = default_base_curve(max_age);
        spec.n_years = years;
        spec.sigma = sigma;
        spec.seed = splitmix64(cfg.seed ^ static_cast<std::uint64_t>(i + 1));
        spec.first_year = first_year;
        spec.region = code;
        auto [f, m] = synth_population_pair(spec, cfg.birth_sex_ratio_male_per_female);

        auto pop_out = open_output(dir, std::string("pop_") + code + ".txt");
        write_raw_panel_pair(pop_out, f, m);
        gen << "population_file." << code << " = pop_" << code << ".txt\n";

        // Gompertz-like rates improving over time, males shifted up
        MortalityPanel mf = f, mm = m;
        auto rng = substream(cfg.seed, 1000 + static_cast<std::uint64_t>(i));
        std::normal_distribution<double> normal(0.0, 1.0);
        const double slope = std::log(2500.0) / max_age;
        for (std::size_t t = 0; t < mf.n_years(); ++t) {
            double improve = std::exp(-0.008 * static_cast<double>(t));
            for (std::size_t x = 0; x < mf.n_ages(); ++x) {
                double base = 2e-4 * std::exp(slope * static_cast<double>(x)) * improve;
                mf.values[t][x] = base * std::exp(0.03 * normal(rng));
                mm.values[t][x] = 1.35 * base * std::exp(0.03 * normal(rng));
            }
        }
        auto mx_out = open_output(dir, std::string("mx_") + code + ".txt");
        write_raw_panel_pair(mx_out, mf, mm);
        gen << "mortality_file." << code << " = mx_" << code << ".txt\n";

        std::cout << "region " << code << ": " << years << " years from " << first_year
                  << ", growth " << format_double(spec.growth) << "\n";
    }

    // payout-rate histories over the same years
    {
        auto rng = substream(cfg.seed, 2000);
        std::normal_distribution<double> normal(0.0, 1.0);
        auto single = open_output(dir, "rates_single.csv");
        auto couple = open_output(dir, "rates_couple_each.csv");
        single << "year,rate\n";
        couple << "year,rate\n";
        for (int t = 0; t < years; ++t) {
            double s = 20000.0 * std::pow(1.025, t) * std::exp(0.004 * normal(rng));
            double c = 15000.0 * std::pow(1.024, t) * std::exp(0.004 * normal(rng));
            single << (first_year + t) << ',' << format_double(s) << '\n';
            couple << (first_year + t) << ',' << format_double(c) << '\n';
        }
    }
    gen << "pension_rate_file_single = rates_single.csv\n";
    gen << "pension_rate_file_couple_each = rates_couple_each.csv\n";

    const int last_year = first_year + years - 1;
    {
        auto cfg_out = open_output(dir, "synth.cfg");
        cfg_out << "# synthetic dataset, ready to project\n" << gen.str();
        cfg_out << "horizon_years = " << cfg.horizon_years << "\n"
                << "num_components = " << cfg.num_components << "\n"
                << "num_paths = " << cfg.num_paths << "\n"
                << "alpha_level = " << format_double(cfg.alpha_level) << "\n"
                << "oadr_target_percent = " << format_double(cfg.oadr_target_percent) << "\n"
                << "start_pension_age_months = " << cfg.start_pension_age_months << "\n"
                << "birth_sex_ratio_male_per_female = "
                << format_double(cfg.birth_sex_ratio_male_per_female) << "\n"
                << "real_rate_fraction = " << format_double(cfg.real_rate_fraction) << "\n"
                << "base_year = " << last_year << "\n"
                << "seed = " << cfg.seed << "\n"
                << "mode = " << cfg.mode << "\n"
                << "log_transform = " << (cfg.log_transform ? "true" : "false") << "\n"
                << "threads = " << cfg.threads << "\n";
        cfg_out << "entry_years = ";
        const int offsets[7] = {1, 6, 11, 16, 21, 26, 30};
        for (int k = 0; k < 7; ++k) cfg_out << (k ? "," : "") << (last_year + offsets[k]);
        cfg_out << "\n";
    }
    std::cout << "wrote " << (dir / "synth.cfg").string() << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// project

struct TotalsBounds {
    std::vector<double> lower, upper;  // per horizon step, both sexes summed
};

TotalsBounds totals_bounds(const ProjectionResult& res, double alpha) {
    TotalsBounds tb;
    if (res.paths.empty()) return tb;
    std::size_t H = res.years.size();
    tb.lower.resize(H);
    tb.upper.resize(H);
    for (std::size_t h = 0; h < H; ++h) {
        std::vector<double> totals(res.paths.size());
        for (std::size_t b = 0; b < res.paths.size(); ++b) {
            // summed per sex then added, matching the point total's order so
            // noiseless paths reproduce it bitwise
            double sum_f = 0.0, sum_m = 0.0;
            for (double v : res.paths[b][0][h]) sum_f += v;
            for (double v : res.paths[b][1][h]) sum_m += v;
            totals[b] = sum_f + sum_m;
        }
        std::sort(totals.begin(), totals.end());
        tb.lower[h] = quantile_sorted(totals, alpha / 2);
        tb.upper[h] = quantile_sorted(totals, 1 - alpha / 2);
    }
    return tb;
}

void write_totals_outputs(const fs::path& dir, const std::string& region,
                          const PopulationPanel& hf, const PopulationPanel& hm,
                          const ProjectionResult& res, double alpha) {
    TotalsBounds tb = totals_bounds(res, alpha);

    auto csv = open_output(dir, "totals_" + region + ".csv");
    csv << "year,segment,total,lower,upper\n";
    Chart chart;
    chart.title = "Total population, " + region;
    chart.x_label = "year";
    chart.y_label = "persons";

    ChartSeries hist{"history", {}, {}, 0, 1.8};
    for (std::size_t t = 0; t < hf.n_years(); ++t) {
        double total = year_total(hf, t) + year_total(hm, t);
        csv << hf.years[t] << ",history," << format_double(total) << ",,\n";
        hist.x.push_back(hf.years[t]);
        hist.y.push_back(total);
    }

    ChartSeries fc{"forecast", {}, {}, 7, 1.8};
    ChartBand band{{}, {}, {}, 7};
    for (std::size_t h = 0; h < res.years.size(); ++h) {
        double total = year_total(res.female_point, h) + year_total(res.male_point, h);
        csv << res.years[h] << ",forecast," << format_double(total) << ',';
        if (!tb.lower.empty()) {
            csv << format_double(tb.lower[h]) << ',' << format_double(tb.upper[h]);
            band.x.push_back(res.years[h]);
            band.lo.push_back(tb.lower[h]);
            band.hi.push_back(tb.upper[h]);
        } else {
            csv << ',';
        }
        csv << '\n';
        fc.x.push_back(res.years[h]);
        fc.y.push_back(total);
    }

    if (!band.x.empty()) chart.bands.push_back(std::move(band));
    chart.series.push_back(std::move(hist));
    chart.series.push_back(std::move(fc));
    save_svg_chart((dir / ("totals_" + region + ".svg")).string(), chart);
}

void write_quantiles_csv(const fs::path& dir, const std::string& region,
                         const ProjectionResult& res) {
    if (res.paths.empty()) return;
    auto csv = open_output(dir, "quantiles_" + region + ".csv");
    csv << "year,age,sex,q2.5,q50,q97.5\n";
    const AgeGrid& grid = res.female_point.age_grid;
    std::vector<double> draws(res.paths.size());
    for (int s = 0; s < 2; ++s)
        for (std::size_t h = 0; h < res.years.size(); ++h)
            for (std::size_t x = 0; x < grid.size(); ++x) {
                for (std::size_t b = 0; b < res.paths.size(); ++b)
                    draws[b] = res.paths[b][s][h][x];
                std::sort(draws.begin(), draws.end());
                csv << res.years[h] << ',' << grid.label(static_cast<int>(x)) << ','
                    << (s == 0 ? 'F' : 'M') << ',' << format_double(quantile_sorted(draws, 0.025))
                    << ',' << format_double(quantile_sorted(draws, 0.5)) << ','
                    << format_double(quantile_sorted(draws, 0.975)) << '\n';
            }
}

void write_pyramid_outputs(const fs::path& dir, const std::string& region,
                           const PopulationPanel& hf, const PopulationPanel& hm,
                           const ProjectionResult& res) {
    const int jump_year = hf.years.back();
    const int final_year = res.years.back();
    auto rows_final = pyramid_export(res, final_year);

    auto csv = open_output(dir, "pyramid_" + region + ".csv");
    csv << "year,age,female,male\n";
    const AgeGrid& grid = hf.age_grid;
    std::size_t last = hf.n_years() - 1;

    Chart chart;
    chart.title = "Age pyramid, " + region;
    chart.x_label = "age";
    chart.y_label = "persons";
    ChartSeries fj{"F " + std::to_string(jump_year), {}, {}, 0, 1.6};
    ChartSeries mj{"M " + std::to_string(jump_year), {}, {}, 3, 1.6};
    ChartSeries ff{"F " + std::to_string(final_year), {}, {}, 8, 1.6};
    ChartSeries mf{"M " + std::to_string(final_year), {}, {}, 11, 1.6};

    for (std::size_t x = 0; x < grid.size(); ++x) {
        csv << jump_year << ',' << grid.label(static_cast<int>(x)) << ',' << format_double(hf.values[last][x])
            << ',' << format_double(hm.values[last][x]) << '\n';
        fj.x.push_back(static_cast<double>(x));
        fj.y.push_back(hf.values[last][x]);
        mj.x.push_back(static_cast<double>(x));
        mj.y.push_back(hm.values[last][x]);
    }
    for (const auto& row : rows_final) {
        csv << final_year << ',' << grid.label(row.age) << ','
            << format_double(row.female) << ',' << format_double(row.male) << '\n';
        ff.x.push_back(static_cast<double>(row.age));
        ff.y.push_back(row.female);
        mf.x.push_back(static_cast<double>(row.age));
        mf.y.push_back(row.male);
    }

    chart.series = {std::move(fj), std::move(mj), std::move(ff), std::move(mf)};
    save_svg_chart((dir / ("pyramid_" + region + ".svg")).string(), chart);
}

void write_ccr_outputs(const fs::path& dir, const std::string& region,
                       const PopulationPanel& hf, const PopulationPanel& hm) {
    CcrCurves cf = compute_ccr(hf), cm = compute_ccr(hm);
    {
        auto csv = open_output(dir, "ccr_" + region + ".csv");
        write_ccr_csv(csv, {cf, cm});
    }
    for (const auto* curves : {&cf, &cm}) {
        Chart chart;
        const char sex = curves->sex == Sex::Female ? 'F' : 'M';
        chart.title = std::string("Cohort change ratios, ") + region + " " + sex;
        chart.x_label = "target age";
        chart.y_label = "ratio";
        int n = static_cast<int>(curves->years.size());
        for (int t = 0; t < n; ++t) {
            ChartSeries s;
            if (t == 0 || t == n - 1) s.label = std::to_string(curves->years[t]);
            s.color_index = ramp_index(t, n);
            s.stroke_width = 1.0;
            for (std::size_t x = 1; x < curves->age_grid.size(); ++x) {
                s.x.push_back(static_cast<double>(x));
                s.y.push_back(curves->ratio[t][x]);
            }
            chart.series.push_back(std::move(s));
        }
        save_svg_chart((dir / ("ccr_" + region + "_" + sex + ".svg")).string(), chart);
    }
}

int cmd_project(const SharedFlags& shared) {
    RunConfig cfg = build_config(shared);
    Dataset ds = load_population(cfg);
    ProjectionConfig pcfg = projection_config(cfg);
    const fs::path dir(cfg.out_dir);

    std::map<std::string, ProjectionResult> results;
    std::vector<Panel> projected;
    for (const auto& [region, pair] : ds) {
        const auto& [f, m] = pair;
        ProjectionResult res =
            cfg.num_paths > 0 ? simulate_paths(f, m, pcfg) : project(f, m, pcfg);
        write_totals_outputs(dir, region, f, m, res, cfg.alpha_level);
        write_quantiles_csv(dir, region, res);
        write_pyramid_outputs(dir, region, f, m, res);
        write_ccr_outputs(dir, region, f, m);
        projected.push_back(res.female_point);
        projected.push_back(res.male_point);
        std::cout << "region " << region << ": projected " << res.years.size()
                  << " years to " << res.years.back() << ", total "
                  << format_double(year_total(res.female_point, res.years.size() - 1) +
                                   year_total(res.male_point, res.years.size() - 1))
                  << " in " << res.years.back() << "\n";
        results.emplace(region, std::move(res));
    }
    {
        auto out = open_output(dir, "projected_panels.csv");
        write_panel_csv(out, projected);
    }

    // aggregate-of-regions vs direct projection of the aggregate
    std::vector<std::string> member_regions;
    for (const auto& [region, pair] : ds)
        if (region != cfg.national_code) member_regions.push_back(region);
    if (member_regions.size() > 1) {
        std::vector<PopulationPanel> females, males;
        for (const auto& r : member_regions) {
            females.push_back(ds.at(r).first);
            males.push_back(ds.at(r).second);
        }
        PopulationPanel nf = aggregate_regions(intersect_years(std::move(females)), cfg.national_code);
        PopulationPanel nm = aggregate_regions(intersect_years(std::move(males)), cfg.national_code);
        ProjectionConfig point_cfg = pcfg;
        point_cfg.B = 0;
        ProjectionResult direct = results.count(cfg.national_code)
                                      ? std::move(results.at(cfg.national_code))
                                      : project(nf, nm, point_cfg);

        auto csv = open_output(dir, "comparison_national.csv");
        csv << "year,sum_of_regions,national_direct\n";
        Chart chart;
        chart.title = "Aggregated regions vs national projection";
        chart.x_label = "year";
        chart.y_label = "persons";
        ChartSeries sum_s{"sum of regions", {}, {}, 2, 1.8};
        ChartSeries nat_s{"national direct", {}, {}, 9, 1.8};
        for (std::size_t h = 0; h < direct.years.size(); ++h) {
            double sum = 0.0;
            bool complete = true;
            for (const auto& r : member_regions) {
                const auto& res = results.at(r);
                auto it = std::find(res.years.begin(), res.years.end(), direct.years[h]);
                if (it == res.years.end()) { complete = false; break; }
                std::size_t k = static_cast<std::size_t>(it - res.years.begin());
                sum += year_total(res.female_point, k) + year_total(res.male_point, k);
            }
            if (!complete) continue;
            double nat = year_total(direct.female_point, h) + year_total(direct.male_point, h);
            csv << direct.years[h] << ',' << format_double(sum) << ',' << format_double(nat)
                << '\n';
            sum_s.x.push_back(direct.years[h]);
            sum_s.y.push_back(sum);
            nat_s.x.push_back(direct.years[h]);
            nat_s.y.push_back(nat);
        }
        chart.series = {std::move(sum_s), std::move(nat_s)};
        save_svg_chart((dir / "comparison_national.svg").string(), chart);
    }
    return 0;
}

// --------------------------------------------------------------------------
// pension-age

std::pair<PopulationPanel, PopulationPanel> national_panels(const RunConfig& cfg, Dataset ds) {
    if (auto it = ds.find(cfg.national_code); it != ds.end()) return std::move(it->second);
    if (ds.size() == 1) return std::move(ds.begin()->second);
    std::vector<PopulationPanel> females, males;
    for (auto& [region, pair] : ds) {
        females.push_back(std::move(pair.first));
        males.push_back(std::move(pair.second));
    }
    return {aggregate_regions(intersect_years(std::move(females)), cfg.national_code),
            aggregate_regions(intersect_years(std::move(males)), cfg.national_code)};
}

int cmd_pension(const SharedFlags& shared) {
    RunConfig cfg = build_config(shared);
    auto [f, m] = national_panels(cfg, load_population(cfg));
    ProjectionConfig pcfg = projection_config(cfg);
    ProjectionResult res = cfg.num_paths > 0 ? simulate_paths(f, m, pcfg) : project(f, m, pcfg);

    PensionAge start{cfg.start_pension_age_months};
    PensionAgeScheme scheme =
        solve_scheme(res, cfg.oadr_target_percent, start, cfg.increment_months);
    std::vector<PensionAgeScheme> schemes{scheme};
    if (static_cast<int>(res.paths.size()) >= 100) {
        auto [lo, hi] = scheme_bounds(res, cfg.oadr_target_percent, start, cfg.increment_months);
        schemes.push_back(std::move(lo));
        schemes.push_back(std::move(hi));
    }

    const fs::path dir(cfg.out_dir);
    {
        auto csv = open_output(dir, "pension_scheme.csv");
        write_scheme_csv(csv, schemes);
    }
    Chart chart;
    chart.title = "Sustainable pension age, OADR <= " +
                  format_double(cfg.oadr_target_percent) + "%";
    chart.x_label = "year";
    chart.y_label = "pension age (years)";
    const char* labels[3] = {"point", "lower", "upper"};
    const int colors[3] = {6, 1, 10};
    for (std::size_t i = 0; i < schemes.size(); ++i) {
        ChartSeries s{labels[i], {}, {}, colors[i], i == 0 ? 2.2 : 1.4};
        for (std::size_t t = 0; t < schemes[i].years.size(); ++t) {
            s.x.push_back(schemes[i].years[t]);
            s.y.push_back(schemes[i].ages[t].years());
        }
        chart.series.push_back(std::move(s));
    }
    save_svg_chart((dir / "pension_scheme.svg").string(), chart);

    std::cout << "pension age " << format_double(scheme.ages.front().years()) << " -> "
              << format_double(scheme.ages.back().years()) << " years by "
              << scheme.years.back() << " (target " << format_double(cfg.oadr_target_percent)
              << "%)\n";
    return 0;
}

// --------------------------------------------------------------------------
// welfare

std::map<int, int> load_scheme_months(const std::string& path) {
    std::map<int, int> months;
    auto in = open_input(path, "pension scheme CSV");
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (first) { first = false; continue; }
        if (fields.size() < 5)
            throw MalformedRow("scheme row needs 5 fields: " + line);
        if (std::string(fields[4]) != "point") continue;
        int year = static_cast<int>(parse_double(fields[0], "scheme year"));
        months[year] = static_cast<int>(parse_double(fields[1], "scheme months"));
    }
    return months;
}

int cmd_welfare(const SharedFlags& shared, const std::string& scheme_path, bool annuity) {
    RunConfig cfg = build_config(shared);
    if (cfg.mortality_files.empty())
        throw ValidationError("welfare needs mortality_file.<REGION> entries in the config");
    if (cfg.pension_rate_file_single.empty() || cfg.pension_rate_file_couple_each.empty())
        throw ValidationError("welfare needs pension_rate_file_single and _couple_each");

    WelfareInputs inputs;
    inputs.real_rate = cfg.real_rate_fraction;
    inputs.base_year = cfg.base_year;
    inputs.entry_years = cfg.entry_years;
    inputs.default_pension_age_months = cfg.start_pension_age_months;
    inputs.K = cfg.num_components;
    inputs.annuity = annuity;

    for (const auto& [region, path] : cfg.mortality_files) {
        auto in = open_input(path, "mortality file");
        auto [f, m] = parse_population_file(in, region, cfg.age_cutoff_years, nullptr);
        inputs.mortality.emplace(region, std::array<MortalityPanel, 2>{std::move(f), std::move(m)});
    }
    {
        auto in = open_input(cfg.pension_rate_file_single, "pension rate file");
        inputs.single_rate = parse_annual_series(in, "single rate");
    }
    {
        auto in = open_input(cfg.pension_rate_file_couple_each, "pension rate file");
        inputs.couple_each_rate = parse_annual_series(in, "couple each rate");
    }

    const fs::path dir(cfg.out_dir);
    std::string scheme_file = scheme_path;
    if (scheme_file.empty() && fs::exists(dir / "pension_scheme.csv"))
        scheme_file = (dir / "pension_scheme.csv").string();
    if (!scheme_file.empty()) inputs.pension_age_months = load_scheme_months(scheme_file);

    auto rows = welfare_table(inputs);
    {
        auto csv = open_output(dir, "welfare_table.csv");
        write_pv_csv(csv, rows);
    }

    // payout-rate fan chart
    const int n = static_cast<int>(inputs.single_rate.years.size());
    const int h = std::min(10, std::max(1, n - 6));
    RateForecast rf = forecast_pension_rates(inputs.single_rate, h,
                                             std::max(cfg.num_paths, 100), cfg.alpha_level,
                                             cfg.seed);
    {
        auto csv = open_output(dir, "rate_forecast_single.csv");
        csv << "year,segment,rate,lower,upper\n";
        Chart chart;
        chart.title = "Single pension payout rate forecast";
        chart.x_label = "year";
        chart.y_label = "AUD per year";
        ChartSeries hist{"history", {}, {}, 0, 1.8};
        for (std::size_t t = 0; t < inputs.single_rate.years.size(); ++t) {
            csv << inputs.single_rate.years[t] << ",history,"
                << format_double(inputs.single_rate.values[t]) << ",,\n";
            hist.x.push_back(inputs.single_rate.years[t]);
            hist.y.push_back(inputs.single_rate.values[t]);
        }
        ChartSeries fc{"forecast", {}, {}, 7, 1.8};
        ChartBand band{{}, {}, {}, 7};
        for (std::size_t k = 0; k < rf.years.size(); ++k) {
            csv << rf.years[k] << ",forecast," << format_double(rf.point[k]) << ','
                << format_double(rf.lower[k]) << ',' << format_double(rf.upper[k]) << '\n';
            fc.x.push_back(rf.years[k]);
            fc.y.push_back(rf.point[k]);
            band.x.push_back(rf.years[k]);
            band.lo.push_back(rf.lower[k]);
            band.hi.push_back(rf.upper[k]);
        }
        chart.bands.push_back(std::move(band));
        chart.series = {std::move(hist), std::move(fc)};
        save_svg_chart((dir / "rate_forecast_single.svg").string(), chart);
    }

    std::cout << "wrote " << rows.size() << " present-value rows for "
              << inputs.mortality.size() << " regions\n";
    return 0;
}

template <typename F>
int run_guarded(F&& body) {
    try {
        return body();
    } catch (const UnsatisfiableThreshold& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hamilton-Perry population forecasting with functional time series"};
    app.require_subcommand(1);

    SharedFlags ingest_flags, synth_flags, project_flags, pension_flags, welfare_flags;

    auto* ingest = app.add_subcommand("ingest", "validate raw files and write a panel bundle");
    std::vector<std::string> ingest_inputs;
    ingest->add_option("files", ingest_inputs, "input files, REGION=path or bare paths");
    add_shared_flags(ingest, ingest_flags);

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    int synth_regions = 2, synth_years = 51, synth_max_age = 100;
    double synth_growth = 0.99, synth_sigma = 0.02;
    synth->add_option("--regions", synth_regions, "number of regions");
    synth->add_option("--years", synth_years, "history length in years");
    synth->add_option("--growth", synth_growth, "cohort change ratio of the first region");
    synth->add_option("--sigma", synth_sigma, "lognormal noise scale");
    synth->add_option("--max-age", synth_max_age, "open age bin");
    add_shared_flags(synth, synth_flags);

    auto* project = app.add_subcommand("project", "forecast populations per region");
    add_shared_flags(project, project_flags);

    auto* pension = app.add_subcommand("pension-age", "solve the sustainable pension age schedule");
    add_shared_flags(pension, pension_flags);

    auto* welfare = app.add_subcommand("welfare", "lifetime pension present-value table");
    std::string welfare_scheme;
    bool welfare_annuity = false;
    welfare->add_option("--scheme", welfare_scheme,
                        "pension scheme CSV (default: <out>/pension_scheme.csv if present)");
    welfare->add_flag("--annuity", welfare_annuity, "survival-weighted annuity payments");
    add_shared_flags(welfare, welfare_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (ingest->parsed()) return run_guarded([&] { return cmd_ingest(ingest_flags, ingest_inputs); });
    if (synth->parsed())
        return run_guarded([&] {
            return cmd_synth(synth_flags, synth_regions, synth_years, synth_growth, synth_sigma,
                             synth_max_age);
        });
    if (project->parsed()) return run_guarded([&] { return cmd_project(project_flags); });
    if (pension->parsed()) return run_guarded([&] { return cmd_pension(pension_flags); });
    if (welfare->parsed())
        return run_guarded([&] { return cmd_welfare(welfare_flags, welfare_scheme, welfare_annuity); });
    return 2;
}
