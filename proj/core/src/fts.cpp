#include "hpfts/fts.hpp"

#include "hpfts/errors.hpp"
#include "hpfts/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace hpfts {

void FunctionalSeries::validate() const {
    if (grid.empty())
        throw ValidationError("functional series needs a nonempty grid");
    if (!weights.empty() && weights.size() != grid.size())
        throw ShapeMismatch("quadrature weights do not match the grid");
    for (double w : weights)
        if (w <= 0.0)
            throw ValidationError("quadrature weights must be strictly positive");
    for (const auto &c : curves) {
        if (c.size() != grid.size())
            throw ShapeMismatch("curve length does not match the grid");
        for (double v : c)
            if (!std::isfinite(v))
                throw ValidationError("curve contains a non-finite value");
    }
}

std::vector<double> FpcaModel::reconstruct(std::size_t t) const {
    std::vector<double> out = mean;
    for (int k = 0; k < K; ++k)
        for (std::size_t j = 0; j < out.size(); ++j)
            out[j] += scores[t][static_cast<std::size_t>(k)]
                      * eigenfunctions[static_cast<std::size_t>(k)][j];
    return out;
}

namespace {

// Weighted Gram-Schmidt of canonical basis vectors against `existing`;
// fills eigenfunction slots whose eigenvalue is zero.
std::vector<double> placeholder_direction(std::vector<std::vector<double>> &existing,
                                          const std::vector<double> &w) {
    const std::size_t p = w.size();
    for (std::size_t cand = 0; cand < p; ++cand) {
        std::vector<double> v(p, 0.0);
        v[cand] = 1.0;
        for (const auto &u : existing) {
            double proj = 0.0;
            for (std::size_t j = 0; j < p; ++j)
                proj += w[j] * v[j] * u[j];
            for (std::size_t j = 0; j < p; ++j)
                v[j] -= proj * u[j];
        }
        double norm2 = 0.0;
        for (std::size_t j = 0; j < p; ++j)
            norm2 += w[j] * v[j] * v[j];
        if (norm2 > 1e-12) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (double &x : v)
                x *= inv;
            return v;
        }
    }
    throw DegenerateSeries("cannot extend the eigenfunction basis");
}

void apply_sign_convention(std::vector<double> &phi) {
    double s = std::accumulate(phi.begin(), phi.end(), 0.0);
    if (s == 0.0)
        for (double v : phi)
            if (v != 0.0) {
                s = v;
                break;
            }
    if (s < 0.0)
        for (double &v : phi)
            v = -v;
}

} // namespace

FpcaModel decompose(const FunctionalSeries &series, int K) {
    series.validate();
    const int n = static_cast<int>(series.n());
    const int p = static_cast<int>(series.p());
    if (n < 2)
        throw DegenerateSeries("decomposition needs at least 2 curves");
    const int max_k = std::min(n - 1, p);
    if (K < 1)
        throw ValidationError("need at least one component");
    if (K > max_k)
        throw KTooLarge(K, max_k);

    std::vector<double> w = series.weights;
    if (w.empty())
        w.assign(static_cast<std::size_t>(p), 1.0);

    FpcaModel model;
    model.K = K;
    model.weights = w;
    model.mean.assign(static_cast<std::size_t>(p), 0.0);
    for (const auto &c : series.curves)
        for (int j = 0; j < p; ++j)
            model.mean[static_cast<std::size_t>(j)] += c[static_cast<std::size_t>(j)];
    for (double &v : model.mean)
        v /= n;

    Eigen::MatrixXd xc(n, p);
    for (int t = 0; t < n; ++t)
        for (int j = 0; j < p; ++j)
            xc(t, j) = series.curves[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] -
                       model.mean[static_cast<std::size_t>(j)];
    Eigen::VectorXd wv(p);
    for (int j = 0; j < p; ++j)
        wv(j) = w[static_cast<std::size_t>(j)];

    const double scale = xc.cwiseAbs().maxCoeff();
    const double lambda_floor = std::max(1e-300, 1e-12 * scale * scale);

    std::vector<std::pair<double, Eigen::VectorXd>> pairs; // (eigenvalue, phi)
    if (p <= n) {
        // Direct route: eigenpairs of W^1/2 C W^1/2 with C the p x p covariance.
        const Eigen::VectorXd sqw = wv.array().sqrt().matrix();
        Eigen::MatrixXd m = (xc.transpose() * xc) / static_cast<double>(n);
        m = sqw.asDiagonal() * m * sqw.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        for (int i = p - 1; i >= 0 && static_cast<int>(pairs.size()) < K; --i) {
            const double lambda = std::max(0.0, es.eigenvalues()(i));
            Eigen::VectorXd phi = es.eigenvectors().col(i).cwiseQuotient(sqw);
            pairs.emplace_back(lambda, std::move(phi));
        }
    } else {
        // Gram route: the n x n matrix Xc W Xc' / n shares the spectrum.
        Eigen::MatrixXd g = xc * wv.asDiagonal() * xc.transpose() / static_cast<double>(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
        std::vector<std::vector<double>> have;
        for (int i = n - 1; i >= 0 && static_cast<int>(pairs.size()) < K; --i) {
            const double lambda = std::max(0.0, es.eigenvalues()(i));
            if (lambda > lambda_floor) {
                Eigen::VectorXd phi =
                    xc.transpose() * es.eigenvectors().col(i) / std::sqrt(lambda * n);
                pairs.emplace_back(lambda, std::move(phi));
            } else {
                // Zero-variance direction: any W-orthonormal completion works.
                if (have.empty())
                    for (const auto &pr : pairs)
                        have.emplace_back(pr.second.data(), pr.second.data() + p);
                auto dir = placeholder_direction(have, w);
                have.push_back(dir);
                Eigen::VectorXd phi(p);
                for (int j = 0; j < p; ++j)
                    phi(j) = dir[static_cast<std::size_t>(j)];
                pairs.emplace_back(0.0, std::move(phi));
            }
        }
    }

    for (auto &[lambda, phi] : pairs) {
        std::vector<double> f(phi.data(), phi.data() + p);
        apply_sign_convention(f);
        model.eigenfunctions.push_back(std::move(f));
        model.eigenvalues.push_back(lambda < lambda_floor ? std::max(0.0, lambda) : lambda);
    }

    model.scores.assign(static_cast<std::size_t>(n), std::vector<double>(K, 0.0));
    for (int t = 0; t < n; ++t)
        for (int k = 0; k < K; ++k) {
            double s = 0.0;
            for (int j = 0; j < p; ++j)
                s += w[static_cast<std::size_t>(j)] * xc(t, j) *
                     model.eigenfunctions[static_cast<std::size_t>(k)]
                                         [static_cast<std::size_t>(j)];
            model.scores[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] = s;
        }

    model.residuals.assign(static_cast<std::size_t>(n),
                           std::vector<double>(static_cast<std::size_t>(p), 0.0));
    for (int t = 0; t < n; ++t)
        for (int j = 0; j < p; ++j) {
            double fit = 0.0;
            for (int k = 0; k < K; ++k)
                fit += model.scores[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] *
                       model.eigenfunctions[static_cast<std::size_t>(k)]
                                           [static_cast<std::size_t>(j)];
            model.residuals[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] =
                xc(t, j) - fit;
        }
    return model;
}

CurveForecast forecast_curve(const FpcaModel &model,
                             const std::vector<ScoreModel> &score_models, int h, int B,
                             double alpha, std::uint64_t seed) {
    if (static_cast<int>(score_models.size()) != model.K)
        throw ShapeMismatch("one score model per retained component is required");
    if (B < 100)
        throw ValidationError("bootstrap needs at least 100 replicates");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("interval level must satisfy 0 < alpha < 1");
    if (h < 1)
        throw ValidationError("forecast horizon must be at least 1");

    const std::size_t p = model.p();
    const std::size_t n = model.n();

    std::vector<double> beta_hat(static_cast<std::size_t>(model.K));
    std::vector<std::vector<double>> pools(static_cast<std::size_t>(model.K));
    for (int k = 0; k < model.K; ++k) {
        const auto fc = forecast_scores(score_models[static_cast<std::size_t>(k)], h);
        beta_hat[static_cast<std::size_t>(k)] = fc.point[static_cast<std::size_t>(h - 1)];
        pools[static_cast<std::size_t>(k)] = fc.pools[static_cast<std::size_t>(h - 1)];
    }

    CurveForecast out;
    out.horizon = h;
    out.point = model.mean;
    for (int k = 0; k < model.K; ++k)
        for (std::size_t j = 0; j < p; ++j)
            out.point[j] += beta_hat[static_cast<std::size_t>(k)] *
                            model.eigenfunctions[static_cast<std::size_t>(k)][j];

    out.curves.assign(static_cast<std::size_t>(B), std::vector<double>(p, 0.0));
    for (int b = 0; b < B; ++b) {
        auto gen = substream(seed, static_cast<std::uint64_t>(b));
        auto &curve = out.curves[static_cast<std::size_t>(b)];
        curve = model.mean;
        for (int k = 0; k < model.K; ++k) {
            const auto &pool = pools[static_cast<std::size_t>(k)];
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            const double beta = beta_hat[static_cast<std::size_t>(k)] + pool[pick(gen)];
            for (std::size_t j = 0; j < p; ++j)
                curve[j] += beta * model.eigenfunctions[static_cast<std::size_t>(k)][j];
        }
        std::uniform_int_distribution<std::size_t> pick_row(0, n - 1);
        const auto &resid = model.residuals[pick_row(gen)];
        for (std::size_t j = 0; j < p; ++j)
            curve[j] += resid[j];
    }

    out.lower.assign(p, 0.0);
    out.upper.assign(p, 0.0);
    std::vector<double> column(static_cast<std::size_t>(B));
    for (std::size_t j = 0; j < p; ++j) {
        for (int b = 0; b < B; ++b)
            column[static_cast<std::size_t>(b)] = out.curves[static_cast<std::size_t>(b)][j];
        std::sort(column.begin(), column.end());
        out.lower[j] = quantile_sorted(column, alpha / 2.0);
        out.upper[j] = quantile_sorted(column, 1.0 - alpha / 2.0);
    }
    return out;
}

FunctionalSeries stack_mfts(const FunctionalSeries &female, const FunctionalSeries &male) {
    female.validate();
    male.validate();
    if (female.n() != male.n() || female.grid != male.grid || female.weights != male.weights)
        throw ShapeMismatch("stacked blocks need equal lengths, grids, and weights");
    FunctionalSeries out;
    out.grid = female.grid;
    out.grid.insert(out.grid.end(), male.grid.begin(), male.grid.end());
    if (!female.weights.empty()) {
        out.weights = female.weights;
        out.weights.insert(out.weights.end(), male.weights.begin(), male.weights.end());
    }
    out.curves.reserve(female.n());
    for (std::size_t t = 0; t < female.n(); ++t) {
        std::vector<double> row = female.curves[t];
        row.insert(row.end(), male.curves[t].begin(), male.curves[t].end());
        out.curves.push_back(std::move(row));
    }
    return out;
}

std::pair<std::vector<double>, std::vector<double>>
unstack_curve(const std::vector<double> &stacked) {
    if (stacked.size() % 2 != 0)
        throw ShapeMismatch("stacked curve has odd length");
    const std::size_t p = stacked.size() / 2;
    return {std::vector<double>(stacked.begin(), stacked.begin() + static_cast<long>(p)),
            std::vector<double>(stacked.begin() + static_cast<long>(p), stacked.end())};
}

} // namespace hpfts
