#include "hpfts/arima.hpp"

#include "hpfts/errors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>

namespace hpfts {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRootBound = 1.0 - 1e-4; // inverse roots must stay inside this

std::vector<double> difference(const std::vector<double> &y, int d) {
    std::vector<double> z = y;
    for (int k = 0; k < d; ++k) {
        std::vector<double> next(z.size() - 1);
        for (std::size_t t = 1; t < z.size(); ++t)
            next[t - 1] = z[t] - z[t - 1];
        z = std::move(next);
    }
    return z;
}

// Inverse roots of 1 - sum coef_i B^i as companion-matrix eigenvalues.
bool poly_stable(const std::vector<double> &coef) {
    std::size_t m = coef.size();
    while (m > 0 && coef[m - 1] == 0.0)
        --m;
    if (m == 0)
        return true;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<int>(m), static_cast<int>(m));
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(coef[i]))
            return false;
        c(0, static_cast<int>(i)) = coef[i];
    }
    for (std::size_t i = 1; i < m; ++i)
        c(static_cast<int>(i), static_cast<int>(i) - 1) = 1.0;
    const auto roots = c.eigenvalues();
    for (int i = 0; i < roots.size(); ++i)
        if (std::abs(roots[i]) > kRootBound)
            return false;
    return true;
}

// params layout: [c (if drift)] [phi x p] [theta x q].
double cls_sse(const std::vector<double> &z, int p, int q, bool drift, const double *params,
               std::vector<double> *resid_out = nullptr) {
    const int nz = static_cast<int>(z.size());
    const double c = drift ? params[0] : 0.0;
    const double *phi = params + (drift ? 1 : 0);
    const double *theta = phi + p;
    std::vector<double> eps(z.size(), 0.0);
    double sse = 0.0;
    for (int t = p; t < nz; ++t) {
        double pred = c;
        for (int i = 0; i < p; ++i)
            pred += phi[i] * z[static_cast<std::size_t>(t - 1 - i)];
        for (int j = 0; j < q; ++j) {
            const int u = t - 1 - j;
            if (u >= 0)
                pred += theta[j] * eps[static_cast<std::size_t>(u)];
        }
        const double e = z[static_cast<std::size_t>(t)] - pred;
        eps[static_cast<std::size_t>(t)] = e;
        sse += e * e;
    }
    if (resid_out)
        *resid_out = std::move(eps);
    return sse;
}

// Ordinary least squares of target on design columns; empty on failure.
std::optional<Eigen::VectorXd> ols(const Eigen::MatrixXd &a, const Eigen::VectorXd &b) {
    if (a.rows() < 1 || a.cols() < 1 || a.rows() < a.cols())
        return std::nullopt;
    Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
    for (int i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]))
            return std::nullopt;
    return x;
}

// Compact BFGS with numerical central-difference gradients and a
// backtracking Armijo line search. Small dimension only.
void bfgs_minimize(const std::function<double(const std::vector<double> &)> &f,
                   std::vector<double> &x, int max_iter = 200) {
    const int dim = static_cast<int>(x.size());
    if (dim == 0)
        return;
    auto safe_f = [&](const std::vector<double> &v) {
        const double val = f(v);
        return std::isfinite(val) ? val : 1e300;
    };
    auto grad = [&](const std::vector<double> &v, std::vector<double> &g) {
        std::vector<double> w = v;
        for (int i = 0; i < dim; ++i) {
            const double h = 1e-6 * (1.0 + std::fabs(v[static_cast<std::size_t>(i)]));
            w[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] + h;
            const double fp = safe_f(w);
            w[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] - h;
            const double fm = safe_f(w);
            w[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
            g[static_cast<std::size_t>(i)] = (fp - fm) / (2.0 * h);
        }
    };

    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(dim, dim);
    std::vector<double> g(static_cast<std::size_t>(dim));
    double fx = safe_f(x);
    grad(x, g);
    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::Map<Eigen::VectorXd> gv(g.data(), dim);
        if (gv.lpNorm<Eigen::Infinity>() < 1e-8)
            break;
        Eigen::VectorXd dir = -hinv * gv;
        double slope = dir.dot(gv);
        if (slope >= 0.0) { // reset curvature if the direction degrades
            hinv.setIdentity();
            dir = -gv;
            slope = dir.dot(gv);
        }
        double step = 1.0;
        std::vector<double> xn(static_cast<std::size_t>(dim));
        double fn = fx;
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (int i = 0; i < dim; ++i)
                xn[static_cast<std::size_t>(i)] =
                    x[static_cast<std::size_t>(i)] + step * dir[i];
            fn = safe_f(xn);
            if (fn <= fx + 1e-4 * step * slope) {
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved)
            break;
        std::vector<double> gn(static_cast<std::size_t>(dim));
        grad(xn, gn);
        Eigen::VectorXd s(dim), dy(dim);
        for (int i = 0; i < dim; ++i) {
            s[i] = xn[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)];
            dy[i] = gn[static_cast<std::size_t>(i)] - g[static_cast<std::size_t>(i)];
        }
        const double sy = s.dot(dy);
        if (sy > 1e-12) {
            const double rho = 1.0 / sy;
            Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
            hinv = (eye - rho * s * dy.transpose()) * hinv * (eye - rho * dy * s.transpose()) +
                   rho * s * s.transpose();
        }
        const bool tiny = std::fabs(fx - fn) < 1e-12 * (1.0 + std::fabs(fx));
        x = xn;
        g = std::move(gn);
        fx = fn;
        if (tiny)
            break;
    }
}

struct Estimate {
    std::vector<double> params; // [c?] [phi] [theta]
    double sse = kInf;
    double sigma2 = 0.0;
    double aicc = kInf;
};

// Shrinks coefficients toward zero until the polynomial is stable; keeps the
// optimizer start point admissible.
void stabilize(std::vector<double> &coef, bool negate) {
    std::vector<double> test(coef);
    if (negate)
        for (double &v : test)
            v = -v;
    for (int tries = 0; tries < 20 && !poly_stable(test); ++tries)
        for (std::size_t i = 0; i < coef.size(); ++i) {
            coef[i] *= 0.5;
            test[i] *= 0.5;
        }
}

std::optional<Estimate> estimate_candidate(const std::vector<double> &z, int p, int q,
                                           bool drift) {
    const int nz = static_cast<int>(z.size());
    const int n_eff = nz - p;
    const int k = p + q + (drift ? 1 : 0) + 1; // innovation variance included
    if (n_eff - k - 1 <= 0)
        return std::nullopt;

    const int dim = p + q + (drift ? 1 : 0);
    std::vector<double> params(static_cast<std::size_t>(dim), 0.0);

    if (p == 0 && q == 0) {
        if (drift) {
            double mean = 0.0;
            for (double v : z)
                mean += v;
            params[0] = mean / nz;
        }
    } else if (q == 0) {
        Eigen::MatrixXd a(n_eff, dim);
        Eigen::VectorXd b(n_eff);
        for (int t = p; t < nz; ++t) {
            int col = 0;
            if (drift)
                a(t - p, col++) = 1.0;
            for (int i = 0; i < p; ++i)
                a(t - p, col++) = z[static_cast<std::size_t>(t - 1 - i)];
            b(t - p) = z[static_cast<std::size_t>(t)];
        }
        const auto sol = ols(a, b);
        if (!sol)
            return std::nullopt;
        for (int i = 0; i < dim; ++i)
            params[static_cast<std::size_t>(i)] = (*sol)[i];
    } else {
        // Hannan-Rissanen start: residuals of a long AR feed an OLS with MA
        // lags, then conditional least squares is polished numerically.
        int m = std::min(std::max(p + q, 8), std::max(1, nz / 2));
        while (m > 1 && nz - m < m + 1)
            --m;
        std::vector<double> eps(z.size(), 0.0);
        if (nz - m >= m + 1) {
            Eigen::MatrixXd a(nz - m, m + 1);
            Eigen::VectorXd b(nz - m);
            for (int t = m; t < nz; ++t) {
                a(t - m, 0) = 1.0;
                for (int i = 0; i < m; ++i)
                    a(t - m, i + 1) = z[static_cast<std::size_t>(t - 1 - i)];
                b(t - m) = z[static_cast<std::size_t>(t)];
            }
            if (const auto sol = ols(a, b)) {
                for (int t = m; t < nz; ++t) {
                    double pred = (*sol)[0];
                    for (int i = 0; i < m; ++i)
                        pred += (*sol)[i + 1] * z[static_cast<std::size_t>(t - 1 - i)];
                    eps[static_cast<std::size_t>(t)] = z[static_cast<std::size_t>(t)] - pred;
                }
            }
        }
        const int start = std::max(p, m + q);
        const int rows = nz - start;
        if (rows >= dim && rows > 0) {
            Eigen::MatrixXd a(rows, dim);
            Eigen::VectorXd b(rows);
            for (int t = start; t < nz; ++t) {
                int col = 0;
                if (drift)
                    a(t - start, col++) = 1.0;
                for (int i = 0; i < p; ++i)
                    a(t - start, col++) = z[static_cast<std::size_t>(t - 1 - i)];
                for (int j = 0; j < q; ++j)
                    a(t - start, col++) = eps[static_cast<std::size_t>(t - 1 - j)];
                b(t - start) = z[static_cast<std::size_t>(t)];
            }
            if (const auto sol = ols(a, b))
                for (int i = 0; i < dim; ++i)
                    params[static_cast<std::size_t>(i)] = (*sol)[i];
        }
        std::vector<double> phi(params.begin() + (drift ? 1 : 0),
                                params.begin() + (drift ? 1 : 0) + p);
        std::vector<double> theta(params.end() - q, params.end());
        stabilize(phi, false);
        stabilize(theta, true);
        std::copy(phi.begin(), phi.end(), params.begin() + (drift ? 1 : 0));
        std::copy(theta.begin(), theta.end(), params.end() - q);

        bfgs_minimize(
            [&](const std::vector<double> &v) { return cls_sse(z, p, q, drift, v.data()); },
            params);
    }

    for (double v : params)
        if (!std::isfinite(v))
            return std::nullopt;
    const std::vector<double> phi(params.begin() + (drift ? 1 : 0),
                                  params.begin() + (drift ? 1 : 0) + p);
    std::vector<double> theta_neg(params.end() - q, params.end());
    for (double &v : theta_neg)
        v = -v;
    if (!poly_stable(phi) || !poly_stable(theta_neg))
        return std::nullopt;

    Estimate est;
    est.params = params;
    est.sse = cls_sse(z, p, q, drift, params.data());
    if (!std::isfinite(est.sse))
        return std::nullopt;
    est.sigma2 = est.sse / n_eff;
    if (est.sse <= 0.0) {
        est.aicc = -kInf; // exact fit dominates; ties fall to the rank rule
    } else {
        const double log_lik_2 =
            n_eff * (std::log(2.0 * std::numbers::pi * est.sigma2) + 1.0); // -2 log L
        est.aicc = log_lik_2 + 2.0 * k + 2.0 * k * (k + 1.0) / (n_eff - k - 1.0);
    }
    return est;
}

long rank_of(int k, int p, int d, int q, bool drift) {
    return ((static_cast<long>(k) * 8 + p) * 8 + d) * 8 + q * 2 + (drift ? 1 : 0);
}

// Forecast recursion with fixed coefficients over an arbitrary data prefix;
// falls back to the last observed value when the prefix cannot support the
// recursion.
std::vector<double> forecast_from(const std::vector<double> &y, const ScoreModel &m, int h) {
    std::vector<double> out(static_cast<std::size_t>(h), y.empty() ? 0.0 : y.back());
    const int p = m.order.p, d = m.order.d, q = m.order.q;
    if (static_cast<int>(y.size()) < d + 1)
        return out;
    const std::vector<double> z = difference(y, d);
    const int nz = static_cast<int>(z.size());
    if (nz < std::max(p, q) + 1)
        return out;

    std::vector<double> params;
    if (m.order.drift)
        params.push_back(m.constant);
    params.insert(params.end(), m.ar.begin(), m.ar.end());
    params.insert(params.end(), m.ma.begin(), m.ma.end());
    std::vector<double> eps;
    cls_sse(z, p, q, m.order.drift, params.data(), &eps);

    std::vector<double> zf(static_cast<std::size_t>(h), 0.0);
    for (int s = 0; s < h; ++s) {
        double pred = m.order.drift ? m.constant : 0.0;
        for (int i = 0; i < p; ++i) {
            const int idx = nz + s - 1 - i;
            pred += m.ar[static_cast<std::size_t>(i)] *
                    (idx < nz ? z[static_cast<std::size_t>(idx)]
                              : zf[static_cast<std::size_t>(idx - nz)]);
        }
        for (int j = 0; j < q; ++j) {
            const int idx = nz + s - 1 - j;
            if (idx < nz && idx >= 0)
                pred += m.ma[static_cast<std::size_t>(j)] * eps[static_cast<std::size_t>(idx)];
        }
        zf[static_cast<std::size_t>(s)] = pred;
    }

    // Undifference: anchor each level at its last observed value.
    std::vector<double> cur = std::move(zf);
    for (int lev = d; lev >= 1; --lev) {
        const std::vector<double> lower = difference(y, lev - 1);
        double running = lower.back();
        for (double &v : cur) {
            running += v;
            v = running;
        }
    }
    return cur;
}

} // namespace

std::vector<double> ScoreModel::point_forecast(int h) const {
    return forecast_from(series, *this, h);
}

std::vector<double> ScoreModel::error_pool(int h) const {
    const int total = static_cast<int>(series.size());
    std::vector<double> pool;
    pool.reserve(static_cast<std::size_t>(std::max(0, total - h)));
    for (int origin = 1; origin + h <= total; ++origin) {
        const std::vector<double> prefix(series.begin(), series.begin() + origin);
        const double fc = forecast_from(prefix, *this, h)[static_cast<std::size_t>(h - 1)];
        pool.push_back(series[static_cast<std::size_t>(origin + h - 1)] - fc);
    }
    return pool;
}

ScoreModel fit_score_model(const std::vector<double> &y, const FitBounds &bounds) {
    if (y.size() < bounds.min_n)
        throw SeriesTooShort(y.size(), bounds.min_n);
    for (double v : y)
        if (!std::isfinite(v))
            throw DegenerateSeries("series contains a non-finite value");

    ScoreModel best;
    bool found = false;
    long best_rank = 0;
    for (int d = 0; d <= bounds.max_d; ++d) {
        if (static_cast<int>(y.size()) - d < 3)
            break;
        const std::vector<double> z = difference(y, d);
        for (int p = 0; p <= bounds.max_p; ++p)
            for (int q = 0; q <= bounds.max_q; ++q)
                for (int use_drift = 0; use_drift <= 1; ++use_drift) {
                    const bool drift = use_drift == 1;
                    if (drift && (d > 1 || !bounds.allow_drift))
                        continue;
                    const auto est = estimate_candidate(z, p, q, drift);
                    if (!est)
                        continue;
                    const int k = p + q + (drift ? 1 : 0) + 1;
                    const long rank = rank_of(k, p, d, q, drift);
                    const bool both_exact =
                        found && est->aicc == -kInf && best.aicc == -kInf;
                    const bool tie =
                        found && (both_exact || std::fabs(est->aicc - best.aicc) <= 1e-9);
                    const bool better =
                        !found || (!tie && est->aicc < best.aicc) || (tie && rank < best_rank);
                    if (!better)
                        continue;
                    best.order = ArimaOrder{p, d, q, drift};
                    const std::size_t off = drift ? 1 : 0;
                    best.constant = drift ? est->params[0] : 0.0;
                    best.ar.assign(est->params.begin() + off, est->params.begin() + off + p);
                    best.ma.assign(est->params.end() - q, est->params.end());
                    best.sigma2 = est->sigma2;
                    best.aicc = est->aicc;
                    best_rank = rank;
                    found = true;
                }
    }
    if (!found)
        throw DegenerateSeries("no admissible model for a series of length " +
                               std::to_string(y.size()));
    best.series = y;
    return best;
}

ScoreModel refit_score_model(const std::vector<double> &y, const ScoreModel &prev) {
    const auto &o = prev.order;
    if (static_cast<int>(y.size()) - o.d >= 3) {
        const std::vector<double> z = difference(y, o.d);
        if (const auto est = estimate_candidate(z, o.p, o.q, o.drift)) {
            ScoreModel out;
            out.order = o;
            const std::size_t off = o.drift ? 1 : 0;
            out.constant = o.drift ? est->params[0] : 0.0;
            out.ar.assign(est->params.begin() + off, est->params.begin() + off + o.p);
            out.ma.assign(est->params.end() - o.q, est->params.end());
            out.sigma2 = est->sigma2;
            out.aicc = est->aicc;
            out.series = y;
            return out;
        }
    }
    ScoreModel out = prev; // stale coefficients, fresh data
    out.series = y;
    return out;
}

ScoreForecast forecast_scores(const ScoreModel &model, int h) {
    if (h < 1)
        throw ValidationError("forecast horizon must be at least 1");
    if (static_cast<int>(model.n()) - h < 5)
        throw HorizonTooLong(h, model.n());
    ScoreForecast out;
    out.point = model.point_forecast(h);
    out.pools.reserve(static_cast<std::size_t>(h));
    for (int i = 1; i <= h; ++i)
        out.pools.push_back(model.error_pool(i));
    return out;
}

} // namespace hpfts
