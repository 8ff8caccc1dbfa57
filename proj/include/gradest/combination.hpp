#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gradest/estimators.hpp"

namespace gradest {

struct SingularCovariance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// k x k symmetric moment matrix across estimators; centered -> covariances,
// uncentered -> raw second moments.
struct CovEstimate {
    int dim = 0;
    std::vector<double> m; // row-major k x k
    std::int64_t n_obs = 0;
    bool centered = true;

    double at(int i, int j) const { return m[static_cast<std::size_t>(i * dim + j)]; }
    double& at(int i, int j) { return m[static_cast<std::size_t>(i * dim + j)]; }
};

// Mixing coefficients; they sum to 1 but individual entries may leave [0,1].
struct MixWeights {
    std::vector<double> c;
};

// observations: row-major T x k matrix of per-trial estimates.
// centered: (1/(T-1)) sum (o - mean)(o - mean)^T; uncentered: (1/T) sum o o^T.
CovEstimate empirical_cov(std::span<const double> observations, std::int64_t trials, int k, bool centered);

// Minimum-variance affine weights c* = Sigma^-1 1 / (1^T Sigma^-1 1).
// A singular (e.g. perfectly correlated) matrix is an error; there is no
// pseudo-inverse fallback because a silent ridge would fake diversification.
MixWeights minvar_weights(const CovEstimate& cov);

// The 2x2 uncentered-moment form: c* proportional to
// (S22 - S12, S11 - S12), normalised to sum 1. Valid when both estimators are
// unbiased for the same quantity.
MixWeights minvar_weights_uncentered(const CovEstimate& sighat);

// Componentwise sum of c_i * estimates_i; all estimates must come from the
// same batch and share the theta dimension.
GradEstimate combine(std::span<const GradEstimate> estimates, const MixWeights& c);

struct DiversificationResult {
    bool diversifies = false;
    CovEstimate sighat;   // 2x2 uncentered
    MixWeights c;         // fitted uncentered min-var weights
    double moment_gap = 0.0; // mean of X1*X2 - X1*X1
    double gap_se = 0.0;
};

// Finite-sample proxy for the moment condition: X2 diversifies X1 when
// |S12 - S11| exceeds se_multiplier standard errors of that difference.
DiversificationResult diversification_test(std::span<const double> x1, std::span<const double> x2,
                                           double se_multiplier = 3.0);

struct GridSearchResult {
    double c_best = 0.0;
    double v_best = 0.0;
};

// Brute-force oracle: argmin of variance_at(c) over an even grid on [lo, hi].
// Cross-checks minvar_weights on every experiment in the harness.
GridSearchResult grid_oracle_c(const std::function<double(double)>& variance_at, double lo, double hi, int steps);

} // namespace gradest
