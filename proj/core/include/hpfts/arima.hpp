#pragma once

#include <cstddef>
#include <vector>

namespace hpfts {

struct ArimaOrder {
    int p = 0, d = 0, q = 0;
    bool drift = false; // intercept of the differenced equation, only for d <= 1

    int param_count() const { return p + q + (drift ? 1 : 0); }
};

// Univariate ARIMA fitted by conditional least squares on the d-differenced
// series (residuals start at t = p; earlier MA lags are zero). Selection
// minimizes small-sample corrected AIC; ties prefer fewer parameters, then
// lower (p, d, q), then no drift.
struct ScoreModel {
    ArimaOrder order;
    std::vector<double> ar;
    std::vector<double> ma;
    double constant = 0.0;
    double sigma2 = 0.0;
    double aicc = 0.0;
    std::vector<double> series; // training data, original scale

    std::size_t n() const { return series.size(); }

    // Point forecasts for horizons 1..h on the original scale.
    std::vector<double> point_forecast(int h) const;

    // In-sample h-step forecast errors (actual minus forecast) from a
    // rolling origin with fixed coefficients; exactly n - h entries.
    std::vector<double> error_pool(int h) const;
};

struct FitBounds {
    int max_p = 3, max_d = 2, max_q = 3;
    bool allow_drift = true;
    std::size_t min_n = 10; // SeriesTooShort below this
};

ScoreModel fit_score_model(const std::vector<double> &y, const FitBounds &bounds = {});

// Re-estimates coefficients on new data keeping the previous order; falls
// back to the previous coefficients when the re-estimate is inadmissible.
ScoreModel refit_score_model(const std::vector<double> &y, const ScoreModel &prev);

struct ScoreForecast {
    std::vector<double> point;              // horizons 1..h
    std::vector<std::vector<double>> pools; // pools[i]: (i+1)-step error pool
};

// Point forecasts plus error pools for horizons 1..h.
// HorizonTooLong when n - h < 5 (pool too small to resample).
ScoreForecast forecast_scores(const ScoreModel &model, int h);

} // namespace hpfts
