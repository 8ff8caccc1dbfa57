#include "gradest/combination.hpp"

#include <cmath>

namespace gradest {

CovEstimate empirical_cov(std::span<const double> observations, std::int64_t trials, int k, bool centered) {
    if (trials < 2) throw std::invalid_argument("empirical_cov: need at least 2 observations");
    if (k < 1 || observations.size() != static_cast<std::size_t>(trials) * static_cast<std::size_t>(k))
        throw std::invalid_argument("empirical_cov: observation matrix shape mismatch");

    CovEstimate cov;
    cov.dim = k;
    cov.n_obs = trials;
    cov.centered = centered;
    cov.m.assign(static_cast<std::size_t>(k) * static_cast<std::size_t>(k), 0.0);

    std::vector<double> mean(static_cast<std::size_t>(k), 0.0);
    if (centered) {
        for (std::int64_t t = 0; t < trials; ++t)
            for (int i = 0; i < k; ++i) mean[static_cast<std::size_t>(i)] += observations[static_cast<std::size_t>(t * k + i)];
        for (int i = 0; i < k; ++i) mean[static_cast<std::size_t>(i)] /= static_cast<double>(trials);
    }
    for (std::int64_t t = 0; t < trials; ++t) {
        for (int i = 0; i < k; ++i) {
            const double oi = observations[static_cast<std::size_t>(t * k + i)] - mean[static_cast<std::size_t>(i)];
            for (int j = i; j < k; ++j) {
                const double oj = observations[static_cast<std::size_t>(t * k + j)] - mean[static_cast<std::size_t>(j)];
                cov.at(i, j) += oi * oj;
            }
        }
    }
    const double norm = centered ? static_cast<double>(trials - 1) : static_cast<double>(trials);
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) {
            cov.at(i, j) /= norm;
            cov.at(j, i) = cov.at(i, j);
        }
    return cov;
}

namespace {

// Cholesky solve of Sigma y = b; covariance matrices are SPD when invertible,
// so a non-positive pivot is the singularity signal.
std::vector<double> spd_solve_ones(const CovEstimate& cov) {
    const int k = cov.dim;
    std::vector<double> L(static_cast<std::size_t>(k) * static_cast<std::size_t>(k), 0.0);
    double max_diag = 0.0;
    for (int i = 0; i < k; ++i) max_diag = std::max(max_diag, std::fabs(cov.at(i, i)));
    const double tol = 1e-12 * std::max(max_diag, 1e-300);

    for (int i = 0; i < k; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = cov.at(i, j);
            for (int p = 0; p < j; ++p)
                s -= L[static_cast<std::size_t>(i * k + p)] * L[static_cast<std::size_t>(j * k + p)];
            if (i == j) {
                if (!(s > tol)) throw SingularCovariance("minvar_weights: covariance matrix is singular");
                L[static_cast<std::size_t>(i * k + j)] = std::sqrt(s);
            } else {
                L[static_cast<std::size_t>(i * k + j)] = s / L[static_cast<std::size_t>(j * k + j)];
            }
        }
    }
    // forward then backward substitution with b = 1
    std::vector<double> y(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        double s = 1.0;
        for (int p = 0; p < i; ++p) s -= L[static_cast<std::size_t>(i * k + p)] * y[static_cast<std::size_t>(p)];
        y[static_cast<std::size_t>(i)] = s / L[static_cast<std::size_t>(i * k + i)];
    }
    std::vector<double> x(static_cast<std::size_t>(k));
    for (int i = k - 1; i >= 0; --i) {
        double s = y[static_cast<std::size_t>(i)];
        for (int p = i + 1; p < k; ++p) s -= L[static_cast<std::size_t>(p * k + i)] * x[static_cast<std::size_t>(p)];
        x[static_cast<std::size_t>(i)] = s / L[static_cast<std::size_t>(i * k + i)];
    }
    return x;
}

} // namespace

MixWeights minvar_weights(const CovEstimate& cov) {
    if (cov.dim < 1) throw std::invalid_argument("minvar_weights: empty covariance");
    const std::vector<double> y = spd_solve_ones(cov); // Sigma^-1 1
    double denom = 0.0;
    for (double v : y) denom += v;
    if (denom == 0.0) throw SingularCovariance("minvar_weights: 1^T Sigma^-1 1 vanished");
    MixWeights w;
    w.c.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) w.c[i] = y[i] / denom;
    return w;
}

MixWeights minvar_weights_uncentered(const CovEstimate& sighat) {
    if (sighat.dim != 2) throw std::invalid_argument("minvar_weights_uncentered: expects a 2x2 moment matrix");
    const double s11 = sighat.at(0, 0);
    const double s22 = sighat.at(1, 1);
    const double s12 = sighat.at(0, 1);
    const double c1 = s22 - s12;
    const double c2 = s11 - s12;
    const double norm = c1 + c2;
    if (norm == 0.0) throw SingularCovariance("minvar_weights_uncentered: zero normaliser");
    return MixWeights{{c1 / norm, c2 / norm}};
}

GradEstimate combine(std::span<const GradEstimate> estimates, const MixWeights& c) {
    if (estimates.empty() || estimates.size() != c.c.size())
        throw std::invalid_argument("combine: need one weight per estimate");
    const std::size_t dim = estimates[0].value.size();
    for (const GradEstimate& e : estimates)
        if (e.value.size() != dim) throw std::invalid_argument("combine: theta dimension mismatch");

    GradEstimate out;
    out.value.assign(dim, 0.0);
    out.estimator = estimates[0].estimator;
    out.n_used = estimates[0].n_used;
    for (std::size_t i = 0; i < estimates.size(); ++i)
        for (std::size_t d = 0; d < dim; ++d) out.value[d] += c.c[i] * estimates[i].value[d];
    return out;
}

DiversificationResult diversification_test(std::span<const double> x1, std::span<const double> x2,
                                           double se_multiplier) {
    if (x1.size() != x2.size() || x1.size() < 2)
        throw std::invalid_argument("diversification_test: paired observations required");
    const std::int64_t T = static_cast<std::int64_t>(x1.size());

    // per-trial moment gap d_t = X1 X2 - X1^2; its mean is S12 - S11
    double gap_mean = 0.0;
    for (std::int64_t t = 0; t < T; ++t) {
        const double v1 = x1[static_cast<std::size_t>(t)];
        gap_mean += v1 * x2[static_cast<std::size_t>(t)] - v1 * v1;
    }
    gap_mean /= static_cast<double>(T);
    double gap_var = 0.0;
    for (std::int64_t t = 0; t < T; ++t) {
        const double v1 = x1[static_cast<std::size_t>(t)];
        const double dt = v1 * x2[static_cast<std::size_t>(t)] - v1 * v1 - gap_mean;
        gap_var += dt * dt;
    }
    gap_var /= static_cast<double>(T - 1);
    if (gap_var == 0.0 && gap_mean == 0.0) {
        // X2 == X1 pointwise; degenerate but well-defined: no diversification
        DiversificationResult r;
        std::vector<double> obs(static_cast<std::size_t>(2 * T));
        for (std::int64_t t = 0; t < T; ++t) {
            obs[static_cast<std::size_t>(2 * t)] = x1[static_cast<std::size_t>(t)];
            obs[static_cast<std::size_t>(2 * t + 1)] = x2[static_cast<std::size_t>(t)];
        }
        r.sighat = empirical_cov(obs, T, 2, false);
        if (r.sighat.at(0, 0) == 0.0)
            throw std::invalid_argument("diversification_test: degenerate zero-variance columns");
        r.c = MixWeights{{1.0, 0.0}};
        return r;
    }

    std::vector<double> obs(static_cast<std::size_t>(2 * T));
    for (std::int64_t t = 0; t < T; ++t) {
        obs[static_cast<std::size_t>(2 * t)] = x1[static_cast<std::size_t>(t)];
        obs[static_cast<std::size_t>(2 * t + 1)] = x2[static_cast<std::size_t>(t)];
    }
    DiversificationResult r;
    r.sighat = empirical_cov(obs, T, 2, false);
    r.moment_gap = gap_mean;
    r.gap_se = std::sqrt(gap_var / static_cast<double>(T));
    r.diversifies = std::fabs(gap_mean) > se_multiplier * r.gap_se;
    r.c = minvar_weights_uncentered(r.sighat);
    return r;
}

GridSearchResult grid_oracle_c(const std::function<double(double)>& variance_at, double lo, double hi, int steps) {
    if (steps < 1) throw std::invalid_argument("grid_oracle_c: empty grid");
    GridSearchResult best{lo, variance_at(lo)};
    for (int i = 1; i <= steps; ++i) {
        const double c = lo + (hi - lo) * static_cast<double>(i) / steps;
        const double v = variance_at(c);
        if (v < best.v_best) best = {c, v};
    }
    return best;
}

} // namespace gradest
