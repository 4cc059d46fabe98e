#include "hpfts/hp_engine.hpp"

#include "hpfts/errors.hpp"
#include "hpfts/stats.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

namespace hpfts {

namespace {

constexpr int kChildbearingLo = 15;
constexpr int kChildbearingHi = 49;

// ARIMA settings inside the engine: score series start at n-1 observations
// for n panel years, so the public 10-point minimum is relaxed here.
FitBounds engine_bounds() {
    FitBounds b;
    b.min_n = 5;
    return b;
}

double inverse_transform(double v, bool log_scale) {
    return log_scale ? std::exp(v) : std::max(0.0, v);
}

// CCR curves as a functional series over target ages 1..max.
FunctionalSeries ccr_series(const CcrCurves &ccr, bool log_scale) {
    FunctionalSeries s;
    const std::size_t p = ccr.age_grid.size();
    s.grid.reserve(p - 1);
    for (std::size_t x = 1; x < p; ++x)
        s.grid.push_back(static_cast<double>(x));
    s.curves.reserve(ccr.ratio.size());
    for (std::size_t t = 0; t < ccr.ratio.size(); ++t) {
        std::vector<double> row;
        row.reserve(p - 1);
        for (std::size_t x = 1; x < p; ++x) {
            const double r = ccr.ratio[t][x];
            if (log_scale) {
                if (r <= 0.0)
                    throw InvalidRate("nonpositive cohort change ratio in year " +
                                      std::to_string(ccr.years[t]) +
                                      "; the log-scale model needs positive ratios");
                row.push_back(std::log(r));
            } else {
                row.push_back(r);
            }
        }
        s.curves.push_back(std::move(row));
    }
    return s;
}

struct StepModels {
    bool multivariate = false;
    bool log_scale = true;
    bool cwr_log = true;
    FpcaModel fpca_f, fpca_m, fpca_s; // univariate pair or stacked
    std::vector<ScoreModel> sm_f, sm_m, sm_s;
    ScoreModel cwr_model;
};

std::vector<ScoreModel> fit_components(const FpcaModel &fpca,
                                       const std::vector<ScoreModel> *prev) {
    std::vector<ScoreModel> out;
    out.reserve(static_cast<std::size_t>(fpca.K));
    for (int k = 0; k < fpca.K; ++k) {
        std::vector<double> scores(fpca.n());
        for (std::size_t t = 0; t < fpca.n(); ++t)
            scores[t] = fpca.scores[t][static_cast<std::size_t>(k)];
        if (prev && k < static_cast<int>(prev->size()))
            out.push_back(refit_score_model(scores, (*prev)[static_cast<std::size_t>(k)]));
        else
            out.push_back(fit_score_model(scores, engine_bounds()));
    }
    return out;
}

StepModels fit_step(const PopulationPanel &female, const PopulationPanel &male,
                    const ProjectionConfig &config, const StepModels *prev) {
    StepModels m;
    m.multivariate = config.mode == ProjectionConfig::Mode::multivariate;
    m.log_scale = config.log_transform;

    const CcrCurves ccr_f = compute_ccr(female);
    const CcrCurves ccr_m = compute_ccr(male);
    const FunctionalSeries sf = ccr_series(ccr_f, m.log_scale);
    const FunctionalSeries sm = ccr_series(ccr_m, m.log_scale);
    const int n = static_cast<int>(sf.n());
    if (m.multivariate) {
        const FunctionalSeries stacked = stack_mfts(sf, sm);
        const int k_eff =
            std::min(config.K, std::min(n - 1, static_cast<int>(stacked.p())));
        m.fpca_s = decompose(stacked, k_eff);
        m.sm_s = fit_components(m.fpca_s, prev ? &prev->sm_s : nullptr);
    } else {
        const int k_eff = std::min(config.K, std::min(n - 1, static_cast<int>(sf.p())));
        m.fpca_f = decompose(sf, k_eff);
        m.fpca_m = decompose(sm, k_eff);
        m.sm_f = fit_components(m.fpca_f, prev ? &prev->sm_f : nullptr);
        m.sm_m = fit_components(m.fpca_m, prev ? &prev->sm_m : nullptr);
    }

    const CwrSeries cwr = compute_cwr(female, male);
    m.cwr_log = m.log_scale &&
                std::all_of(cwr.values.begin(), cwr.values.end(),
                            [](double v) { return v > 0.0; });
    std::vector<double> cv = cwr.values;
    if (m.cwr_log)
        for (double &v : cv)
            v = std::log(v);
    if (prev)
        m.cwr_model = refit_score_model(cv, prev->cwr_model);
    else
        m.cwr_model = fit_score_model(cv, engine_bounds());
    return m;
}

// Reconstructed curve at the forecast scores; still on the modeling scale.
std::vector<double> curve_at(const FpcaModel &fpca, const std::vector<double> &beta) {
    std::vector<double> out = fpca.mean;
    for (int k = 0; k < fpca.K; ++k)
        for (std::size_t j = 0; j < out.size(); ++j)
            out[j] += beta[static_cast<std::size_t>(k)] *
                      fpca.eigenfunctions[static_cast<std::size_t>(k)][j];
    return out;
}

std::vector<double> point_betas(const std::vector<ScoreModel> &models, int h) {
    std::vector<double> beta(models.size());
    for (std::size_t k = 0; k < models.size(); ++k)
        beta[k] = models[k].point_forecast(h)[static_cast<std::size_t>(h - 1)];
    return beta;
}

// Advances one year given ratio curves indexed by target age 1..max.
std::vector<double> roll_forward(const std::vector<double> &cur,
                                 const std::vector<double> &ratio_by_target) {
    const std::size_t p = cur.size();
    std::vector<double> next(p, 0.0);
    for (std::size_t x = 1; x + 1 < p; ++x)
        next[x] = ratio_by_target[x - 1] * cur[x - 1];
    next[p - 1] = ratio_by_target[p - 2] * (cur[p - 2] + cur[p - 1]);
    return next;
}

double women_15_49(const std::vector<double> &row) {
    const int hi = std::min<int>(kChildbearingHi, static_cast<int>(row.size()) - 2);
    double w = 0.0;
    for (int x = kChildbearingLo; x <= hi; ++x)
        w += row[static_cast<std::size_t>(x)];
    return w;
}

struct StepDraw { // bootstrap perturbations; empty for the point path
    std::vector<double> beta_noise_f, beta_noise_m, beta_noise_s;
    const std::vector<double> *resid_f = nullptr, *resid_m = nullptr, *resid_s = nullptr;
    double cwr_noise = 0.0;
};

std::pair<std::vector<double>, std::vector<double>>
step_with(const StepModels &m, const PopulationPanel &female, const PopulationPanel &male,
          const ProjectionConfig &config, int h, const StepDraw *draw) {
    std::vector<double> ratio_f, ratio_m;
    if (m.multivariate) {
        std::vector<double> beta = point_betas(m.sm_s, h);
        if (draw)
            for (std::size_t k = 0; k < beta.size(); ++k)
                beta[k] += draw->beta_noise_s[k];
        std::vector<double> stacked = curve_at(m.fpca_s, beta);
        if (draw && draw->resid_s)
            for (std::size_t j = 0; j < stacked.size(); ++j)
                stacked[j] += (*draw->resid_s)[j];
        auto [f_half, m_half] = unstack_curve(stacked);
        ratio_f = std::move(f_half);
        ratio_m = std::move(m_half);
    } else {
        std::vector<double> beta_f = point_betas(m.sm_f, h);
        std::vector<double> beta_m = point_betas(m.sm_m, h);
        if (draw) {
            for (std::size_t k = 0; k < beta_f.size(); ++k)
                beta_f[k] += draw->beta_noise_f[k];
            for (std::size_t k = 0; k < beta_m.size(); ++k)
                beta_m[k] += draw->beta_noise_m[k];
        }
        ratio_f = curve_at(m.fpca_f, beta_f);
        ratio_m = curve_at(m.fpca_m, beta_m);
        if (draw && draw->resid_f)
            for (std::size_t j = 0; j < ratio_f.size(); ++j)
                ratio_f[j] += (*draw->resid_f)[j];
        if (draw && draw->resid_m)
            for (std::size_t j = 0; j < ratio_m.size(); ++j)
                ratio_m[j] += (*draw->resid_m)[j];
    }
    for (double &v : ratio_f)
        v = inverse_transform(v, m.log_scale);
    for (double &v : ratio_m)
        v = inverse_transform(v, m.log_scale);

    double cwr_hat =
        m.cwr_model.point_forecast(h)[static_cast<std::size_t>(h - 1)];
    if (draw)
        cwr_hat += draw->cwr_noise;
    cwr_hat = inverse_transform(cwr_hat, m.cwr_log);

    std::vector<double> next_f = roll_forward(female.values.back(), ratio_f);
    std::vector<double> next_m = roll_forward(male.values.back(), ratio_m);
    const auto infants = infant_forecast(women_15_49(next_f), cwr_hat, config.bsr);
    next_f[0] = infants.first;
    next_m[0] = infants.second;
    if (!m.log_scale || draw)
        for (auto *vec : {&next_f, &next_m})
            for (double &v : *vec)
                v = std::max(0.0, v);
    return {std::move(next_f), std::move(next_m)};
}

void append_year(PopulationPanel &panel, std::vector<double> row) {
    panel.years.push_back(panel.years.back() + 1);
    panel.values.push_back(std::move(row));
}

void check_inputs(const PopulationPanel &female, const PopulationPanel &male,
                  const ProjectionConfig &config) {
    female.validate();
    male.validate();
    if (female.years != male.years || !(female.age_grid == male.age_grid))
        throw ShapeMismatch("female and male panels must be aligned");
    if (config.horizon < 1)
        throw ValidationError("projection horizon must be at least 1");
    if (!(config.alpha > 0.0 && config.alpha < 1.0))
        throw ValidationError("interval level must satisfy 0 < alpha < 1");
}

ProjectionResult project_impl(const PopulationPanel &female, const PopulationPanel &male,
                              const ProjectionConfig &config, StepModels *first_step_out) {
    check_inputs(female, male, config);
    PopulationPanel f = female, m = male;
    ProjectionResult res;
    res.female_point.region = f.region;
    res.female_point.sex = Sex::Female;
    res.female_point.age_grid = f.age_grid;
    res.male_point.region = m.region;
    res.male_point.sex = Sex::Male;
    res.male_point.age_grid = m.age_grid;

    std::optional<StepModels> models;
    for (int h = 1; h <= config.horizon; ++h) {
        if (!models)
            models = fit_step(f, m, config, nullptr);
        else if (config.refit_each_step)
            models = fit_step(f, m, config, &*models);
        if (h == 1 && first_step_out)
            *first_step_out = *models;
        const int step_h = config.refit_each_step ? 1 : h;
        auto [next_f, next_m] = step_with(*models, f, m, config, step_h, nullptr);
        append_year(f, next_f);
        append_year(m, next_m);
        res.years.push_back(f.years.back());
        res.female_point.years.push_back(f.years.back());
        res.male_point.years.push_back(m.years.back());
        res.female_point.values.push_back(std::move(next_f));
        res.male_point.values.push_back(std::move(next_m));
    }
    return res;
}

} // namespace

std::pair<std::vector<double>, std::vector<double>>
project_one_step(const PopulationPanel &female, const PopulationPanel &male,
                 const ProjectionConfig &config) {
    check_inputs(female, male, config);
    StepModels models = fit_step(female, male, config, nullptr);
    return step_with(models, female, male, config, 1, nullptr);
}

ProjectionResult project(const PopulationPanel &female, const PopulationPanel &male,
                         const ProjectionConfig &config) {
    return project_impl(female, male, config, nullptr);
}

ProjectionResult simulate_paths(const PopulationPanel &female, const PopulationPanel &male,
                                const ProjectionConfig &config) {
    if (config.B < 1)
        throw ValidationError("path simulation needs B >= 1");
    StepModels first_step;
    ProjectionResult res = project_impl(female, male, config, &first_step);

    const std::size_t p = female.n_ages();
    const int H = config.horizon;
    res.paths.assign(static_cast<std::size_t>(config.B),
                     std::vector<std::vector<std::vector<double>>>(
                         2, std::vector<std::vector<double>>(
                                static_cast<std::size_t>(H),
                                std::vector<double>(p, 0.0))));

    parallel_for(config.B, config.threads, [&](int b) {
        auto gen = substream(config.seed, static_cast<std::uint64_t>(b));
        PopulationPanel f = female, m = male;
        std::optional<StepModels> models;
        for (int h = 1; h <= H; ++h) {
            if (!models)
                models = first_step; // identical history, identical fit
            else if (config.refit_each_step)
                models = fit_step(f, m, config, &*models);
            const StepModels &sm = *models;
            const int step_h = config.refit_each_step ? 1 : h;

            StepDraw draw;
            auto draw_noise = [&](const std::vector<ScoreModel> &comps,
                                  std::vector<double> &out) {
                out.resize(comps.size());
                for (std::size_t k = 0; k < comps.size(); ++k) {
                    const auto pool = comps[k].error_pool(step_h);
                    if (pool.empty()) {
                        out[k] = 0.0;
                        continue;
                    }
                    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
                    out[k] = pool[pick(gen)];
                }
            };
            auto draw_resid = [&](const FpcaModel &fpca) -> const std::vector<double> * {
                std::uniform_int_distribution<std::size_t> pick(0, fpca.n() - 1);
                return &fpca.residuals[pick(gen)];
            };
            if (sm.multivariate) {
                draw_noise(sm.sm_s, draw.beta_noise_s);
                draw.resid_s = draw_resid(sm.fpca_s);
            } else {
                draw_noise(sm.sm_f, draw.beta_noise_f);
                draw.resid_f = draw_resid(sm.fpca_f);
                draw_noise(sm.sm_m, draw.beta_noise_m);
                draw.resid_m = draw_resid(sm.fpca_m);
            }
            {
                const auto pool = sm.cwr_model.error_pool(step_h);
                if (!pool.empty()) {
                    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
                    draw.cwr_noise = pool[pick(gen)];
                }
            }

            auto [next_f, next_m] = step_with(sm, f, m, config, step_h, &draw);
            res.paths[static_cast<std::size_t>(b)][0][static_cast<std::size_t>(h - 1)] =
                next_f;
            res.paths[static_cast<std::size_t>(b)][1][static_cast<std::size_t>(h - 1)] =
                next_m;
            append_year(f, std::move(next_f));
            append_year(m, std::move(next_m));
        }
    });

    for (int sex = 0; sex < 2; ++sex) {
        res.lower[static_cast<std::size_t>(sex)].assign(static_cast<std::size_t>(H),
                                                        std::vector<double>(p, 0.0));
        res.upper[static_cast<std::size_t>(sex)].assign(static_cast<std::size_t>(H),
                                                        std::vector<double>(p, 0.0));
        std::vector<double> column(static_cast<std::size_t>(config.B));
        for (int h = 0; h < H; ++h)
            for (std::size_t x = 0; x < p; ++x) {
                for (int b = 0; b < config.B; ++b)
                    column[static_cast<std::size_t>(b)] =
                        res.paths[static_cast<std::size_t>(b)][static_cast<std::size_t>(sex)]
                                 [static_cast<std::size_t>(h)][x];
                std::sort(column.begin(), column.end());
                res.lower[static_cast<std::size_t>(sex)][static_cast<std::size_t>(h)][x] =
                    quantile_sorted(column, config.alpha / 2.0);
                res.upper[static_cast<std::size_t>(sex)][static_cast<std::size_t>(h)][x] =
                    quantile_sorted(column, 1.0 - config.alpha / 2.0);
            }
    }
    return res;
}

std::vector<PyramidRow> pyramid_export(const ProjectionResult &result, int year) {
    if (result.years.empty() || year < result.years.front() || year > result.years.back())
        throw YearOutOfRange(year, result.years.empty() ? 0 : result.years.front(),
                             result.years.empty() ? 0 : result.years.back());
    const std::size_t t = static_cast<std::size_t>(year - result.years.front());
    std::vector<PyramidRow> rows;
    const auto &f = result.female_point.values[t];
    const auto &m = result.male_point.values[t];
    rows.reserve(f.size());
    for (std::size_t x = 0; x < f.size(); ++x)
        rows.push_back(PyramidRow{static_cast<int>(x), f[x], m[x]});
    return rows;
}

} // namespace hpfts
