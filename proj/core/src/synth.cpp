#include "hpfts/synth.hpp"

#include "hpfts/errors.hpp"
#include "hpfts/stats.hpp"

#include <cmath>
#include <random>

namespace hpfts {

namespace {

constexpr int kChildbearingLo = 15;
constexpr int kChildbearingHi = 49;

double women_15_49(const std::vector<double> &row, int max_age) {
    double w = 0.0;
    const int hi = std::min(kChildbearingHi, max_age - 1);
    for (int x = kChildbearingLo; x <= hi; ++x)
        w += row[static_cast<std::size_t>(x)];
    return w;
}

void check_spec(const SynthSpec &spec) {
    if (spec.growth <= 0.0)
        throw ValidationError("synthetic growth ratio must be positive");
    if (spec.n_years < 3)
        throw ValidationError("synthetic panel needs at least 3 years");
    if (spec.sigma < 0.0)
        throw ValidationError("synthetic noise scale must be nonnegative");
    if (spec.base.size() < 2)
        throw ValidationError("synthetic base curve needs at least 2 ages");
}

// Advances one row by the cohort recursion; infants are filled by the caller.
std::vector<double> advance(const std::vector<double> &prev, double r, double sigma,
                            std::normal_distribution<double> &z, std::mt19937_64 &gen) {
    const std::size_t p = prev.size();
    std::vector<double> next(p, 0.0);
    for (std::size_t x = 1; x + 1 < p; ++x)
        next[x] = r * prev[x - 1] * (sigma > 0.0 ? std::exp(sigma * z(gen)) : 1.0);
    next[p - 1] = r * (prev[p - 2] + prev[p - 1]) *
                  (sigma > 0.0 ? std::exp(sigma * z(gen)) : 1.0);
    return next;
}

} // namespace

PopulationPanel synth_population(const SynthSpec &spec) {
    check_spec(spec);
    const int max_age = static_cast<int>(spec.base.size()) - 1;
    const double w0 = women_15_49(spec.base, max_age);
    const double cwr = w0 > 0.0 ? spec.base[0] / w0 : 0.0;

    auto gen = substream(spec.seed, spec.sex == Sex::Female ? 0 : 1);
    std::normal_distribution<double> z(0.0, 1.0);

    PopulationPanel panel;
    panel.region = spec.region;
    panel.sex = spec.sex;
    panel.age_grid = AgeGrid{max_age, true};
    panel.values.push_back(spec.base);
    panel.years.push_back(spec.first_year);
    for (int t = 1; t < spec.n_years; ++t) {
        auto next = advance(panel.values.back(), spec.growth, spec.sigma, z, gen);
        next[0] = cwr * women_15_49(next, max_age) *
                  (spec.sigma > 0.0 ? std::exp(spec.sigma * z(gen)) : 1.0);
        panel.values.push_back(std::move(next));
        panel.years.push_back(spec.first_year + t);
    }
    panel.validate();
    return panel;
}

std::pair<PopulationPanel, PopulationPanel> synth_population_pair(const SynthSpec &spec,
                                                                  double male_per_female) {
    check_spec(spec);
    if (male_per_female <= 0.0)
        throw ValidationError("birth ratio must be positive");
    const int max_age = static_cast<int>(spec.base.size()) - 1;
    const double share_m = male_per_female / (1.0 + male_per_female);
    const double share_f = 1.0 - share_m;

    std::vector<double> base_f(spec.base), base_m(spec.base);
    for (std::size_t x = 0; x < spec.base.size(); ++x) {
        base_f[x] *= share_f;
        base_m[x] *= share_m;
    }
    const double wf0 = women_15_49(base_f, max_age);
    const double cwr_total = wf0 > 0.0 ? spec.base[0] / wf0 : 0.0;

    auto gen_f = substream(spec.seed, 0);
    auto gen_m = substream(spec.seed, 1);
    std::normal_distribution<double> z_f(0.0, 1.0), z_m(0.0, 1.0);

    PopulationPanel female, male;
    female.region = male.region = spec.region;
    female.sex = Sex::Female;
    male.sex = Sex::Male;
    female.age_grid = male.age_grid = AgeGrid{max_age, true};
    female.values.push_back(base_f);
    male.values.push_back(base_m);
    female.years.push_back(spec.first_year);
    male.years.push_back(spec.first_year);
    for (int t = 1; t < spec.n_years; ++t) {
        auto next_f = advance(female.values.back(), spec.growth, spec.sigma, z_f, gen_f);
        const double wf = women_15_49(next_f, max_age);
        // one noise draw for the total, so the sex split stays exact
        const double infants = cwr_total * wf *
                               (spec.sigma > 0.0 ? std::exp(spec.sigma * z_f(gen_f)) : 1.0);
        auto next_m = advance(male.values.back(), spec.growth, spec.sigma, z_m, gen_m);
        next_f[0] = infants * share_f;
        next_m[0] = infants * share_m;
        female.values.push_back(std::move(next_f));
        male.values.push_back(std::move(next_m));
        female.years.push_back(spec.first_year + t);
        male.years.push_back(spec.first_year + t);
    }
    female.validate();
    male.validate();
    return {std::move(female), std::move(male)};
}

std::vector<double> default_base_curve(int max_age, double scale) {
    std::vector<double> base(static_cast<std::size_t>(max_age) + 1);
    for (int x = 0; x <= max_age; ++x) {
        const double u = static_cast<double>(x) / static_cast<double>(max_age);
        base[static_cast<std::size_t>(x)] =
            scale * (0.2 + std::exp(-3.0 * (u - 0.3) * (u - 0.3)) * (1.0 - 0.8 * u));
    }
    return base;
}

std::vector<double> steady_base_curve(int max_age, double r, double rho, double scale) {
    if (rho <= r)
        throw ValidationError("steady base curve needs rho > r");
    std::vector<double> base(static_cast<std::size_t>(max_age) + 1);
    double v = scale;
    for (int x = 0; x < max_age; ++x) {
        base[static_cast<std::size_t>(x)] = v;
        v *= r / rho;
    }
    // Open-bin fixed point: rho * B = r * (B_last_closed + B).
    base[static_cast<std::size_t>(max_age)] =
        r * base[static_cast<std::size_t>(max_age) - 1] / (rho - r);
    return base;
}

} // namespace hpfts
