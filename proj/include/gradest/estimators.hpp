#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradest/densities.hpp"
#include "gradest/multivariate.hpp"
#include "gradest/sobolev.hpp"
#include "gradest/test_functions.hpp"

namespace gradest {

enum class EstimatorKind { ld, ld_baseline, reparam, ft_single, ft_sym, rt_real, rt_interval, rt_nd, hsl };

const char* estimator_name(EstimatorKind k);

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::ld;
    double a = 0.2;        // RT / HSL length scale
    double baseline_b = 0; // ld_baseline
    int order_cap = 1;     // rt_nd truncation
    int hsl_inner_m = 1;   // inner Laplace draws per outer point
};

// n draws from p(.|theta), all strictly inside the support.
struct SampleBatch {
    std::vector<double> points;
    double theta = 0.0;
    std::uint64_t seed_tag = 0;

    int n() const { return static_cast<int>(points.size()); }
};

// n draws of dimension dim, stored row-major.
struct SampleBatchNd {
    std::vector<double> points;
    int dim = 1;
    std::vector<double> theta;
    std::uint64_t seed_tag = 0;

    int n() const { return static_cast<int>(points.size()) / dim; }
    std::span<const double> point(int i) const {
        return std::span<const double>(points).subspan(static_cast<std::size_t>(i) * static_cast<std::size_t>(dim),
                                                       static_cast<std::size_t>(dim));
    }
};

// One Monte Carlo realisation of the gradient estimate.
struct GradEstimate {
    std::vector<double> value; // one entry per theta component
    EstimatorKind estimator = EstimatorKind::ld;
    int n_used = 0;

    double scalar() const {
        if (value.size() != 1) throw std::logic_error("GradEstimate::scalar: estimate is not univariate");
        return value[0];
    }
};

namespace detail {

inline void require_min_n(int n, int min_n, const char* who) {
    if (n < min_n)
        throw std::invalid_argument(std::string(who) + ": needs at least " + std::to_string(min_n) + " samples");
}

inline GradEstimate make1(double v, EstimatorKind k, int n) {
    if (!std::isfinite(v))
        throw std::runtime_error(std::string(estimator_name(k)) + ": non-finite estimate");
    GradEstimate e;
    e.value = {v};
    e.estimator = k;
    e.n_used = n;
    return e;
}

// Affine change of variables mapping an interval support [lo,hi] onto [-1,1];
// carries the test function and density along with the Jacobian (hi-lo)/2.
struct IntervalMap {
    double lo, hi;

    double to_unit(double x) const { return (2.0 * x - lo - hi) / (hi - lo); }
    double from_unit(double t) const { return 0.5 * (t * (hi - lo) + lo + hi); }
    double jacobian() const { return 0.5 * (hi - lo); } // dx/dt
};

} // namespace detail

// Log-derivative (score-function) estimator with optional baseline b:
//   (1/n) sum_i (f(x_i) - b) d/dtheta log p(x_i|theta).
template <class Density>
GradEstimate estimate_ld(const SampleBatch& batch, const TestFunction1D& f, const Density& d, double baseline = 0.0) {
    detail::require_min_n(batch.n(), 1, "estimate_ld");
    double acc = 0.0;
    for (double x : batch.points) acc += (f.value(x) - baseline) * d.score(x);
    return detail::make1(acc / batch.n(), baseline == 0.0 ? EstimatorKind::ld : EstimatorKind::ld_baseline,
                         batch.n());
}

// Reparameterisation (pathwise) estimator; batch.points hold the base draws
// eps ~ N(0,1). Only the location-scale Gaussian family carries an explicit
// t_theta here.
inline GradEstimate estimate_reparam(const SampleBatch& eps_batch, const TestFunction1D& f,
                                     const LocationScaleGaussian& family) {
    detail::require_min_n(eps_batch.n(), 1, "estimate_reparam");
    double acc = 0.0;
    for (double eps : eps_batch.points) acc += f.deriv(family.reparam(eps)) * family.reparam_dtheta(eps);
    return detail::make1(acc / eps_batch.n(), EstimatorKind::reparam, eps_batch.n());
}

// Fundamental trick estimator.
//
// symmetrised = true: the full pairwise form over one batch of n >= 2 points,
//   (1/(n(n-1))) sum_{i != j} f'(x_j) (1/2) sign(x_i - x_j) / p(x_j) score(x_i).
//
// symmetrised = false: the single-sum form over independent pairs; the batch
// holds consecutive (x_i, z_i) pairs and each contributes
//   f'(z_i) (1/2) sign(x_i - z_i) / p(z_i) score(x_i).
// Averaging the single-sum kernel over both orderings of a pair recovers the
// symmetrised form.
template <class Density>
GradEstimate estimate_ft(const SampleBatch& batch, const TestFunction1D& f, const Density& d, bool symmetrised) {
    if (symmetrised) {
        const int n = batch.n();
        detail::require_min_n(n, 2, "estimate_ft (symmetrised)");
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double si = d.score(batch.points[static_cast<std::size_t>(i)]);
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const double xj = batch.points[static_cast<std::size_t>(j)];
                acc += f.deriv(xj) * 0.5 * sign0(batch.points[static_cast<std::size_t>(i)] - xj) / d.density(xj) * si;
            }
        }
        return detail::make1(acc / (static_cast<double>(n) * (n - 1)), EstimatorKind::ft_sym, n);
    }

    const int total = batch.n();
    if (total < 2 || total % 2 != 0)
        throw std::invalid_argument("estimate_ft (single-sum): batch must hold consecutive (x, z) pairs");
    const int pairs = total / 2;
    double acc = 0.0;
    for (int i = 0; i < pairs; ++i) {
        const double x = batch.points[static_cast<std::size_t>(2 * i)];
        const double z = batch.points[static_cast<std::size_t>(2 * i + 1)];
        acc += f.deriv(z) * 0.5 * sign0(x - z) / d.density(z) * d.score(x);
    }
    return detail::make1(acc / pairs, EstimatorKind::ft_single, total);
}

// Representer trick estimator on the whole real line (no boundary term):
//   (1/(n(n-1))) sum_{i != j} w_R(a, f, x_i, x_j) / p(x_j) score(x_i).
template <class Density>
GradEstimate estimate_rt_real(const SampleBatch& batch, const TestFunction1D& f, const Density& d, double a) {
    if (d.support().kind != SupportKind::real_line)
        throw std::invalid_argument(
            "estimate_rt_real: density support must be all of R (compact supports take estimate_rt_interval)");
    const int n = batch.n();
    detail::require_min_n(n, 2, "estimate_rt_real");
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double si = d.score(batch.points[static_cast<std::size_t>(i)]);
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double xj = batch.points[static_cast<std::size_t>(j)];
            acc += weight_real(a, f, batch.points[static_cast<std::size_t>(i)], xj) / d.density(xj) * si;
        }
    }
    return detail::make1(acc / (static_cast<double>(n) * (n - 1)), EstimatorKind::rt_real, n);
}

// Representer trick estimator on an interval support. The support [lo,hi] is
// mapped onto [-1,1] by one affine change of variables (function, derivative
// and density pick up the Jacobian), and the boundary correction enters as
//   (1/n) sum_i B(a, f, x_i) score(x_i);
// the 1/n keeps the combined estimator unbiased.
template <class Density>
GradEstimate estimate_rt_interval(const SampleBatch& batch, const TestFunction1D& f, const Density& d, double a) {
    const Support sup = d.support();
    if (sup.kind != SupportKind::interval)
        throw std::invalid_argument("estimate_rt_interval: density support must be a bounded interval");
    const int n = batch.n();
    detail::require_min_n(n, 2, "estimate_rt_interval");

    const detail::IntervalMap map{sup.lo, sup.hi};
    const double jac = map.jacobian();
    const TestFunction1D ft{f.label,
                            [&f, map](double t) { return f.value(map.from_unit(t)); },
                            [&f, map, jac](double t) { return f.deriv(map.from_unit(t)) * jac; }};

    std::vector<double> t(static_cast<std::size_t>(n));
    std::vector<double> sc(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        t[static_cast<std::size_t>(i)] = map.to_unit(batch.points[static_cast<std::size_t>(i)]);
        sc[static_cast<std::size_t>(i)] = d.score(batch.points[static_cast<std::size_t>(i)]);
    }

    double pair_acc = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double ptj = d.density(batch.points[static_cast<std::size_t>(j)]) * jac;
            pair_acc += weight_interval(a, ft, t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(j)]) / ptj *
                        sc[static_cast<std::size_t>(i)];
        }
    }
    double boundary_acc = 0.0;
    for (int i = 0; i < n; ++i)
        boundary_acc += boundary_term(a, ft, t[static_cast<std::size_t>(i)]) * sc[static_cast<std::size_t>(i)];

    return detail::make1(pair_acc / (static_cast<double>(n) * (n - 1)) + boundary_acc / n,
                         EstimatorKind::rt_interval, n);
}

// d-dimensional representer trick estimator. Interval supports are mapped
// per axis onto [-1,1]^d and the compact boundary sum is subtracted with the
// same 1/n normalisation as the univariate boundary correction (the compact
// representation reads f = integral of w - boundary_sum).
template <class DensityNd>
GradEstimate estimate_rt_nd(const SampleBatchNd& batch, const TestFunctionND& f, const DensityNd& d,
                            const MultiWeightConfig& cfg) {
    const int dim = f.dim;
    if (batch.dim != dim) throw std::invalid_argument("estimate_rt_nd: batch/f dimension mismatch");
    if (d.dim() != dim) throw std::invalid_argument("estimate_rt_nd: density/f dimension mismatch");
    const int n = batch.n();
    detail::require_min_n(n, 2, "estimate_rt_nd");
    if (dim > 16 && cfg.order_cap >= dim)
        throw std::invalid_argument("estimate_rt_nd: exact subset sum needs d <= 16; lower order_cap");

    const bool compact = d.support_kind() == SupportKind::interval;

    // Per-axis affine maps (identity for the real-line case).
    std::vector<detail::IntervalMap> maps;
    double jac_total = 1.0;
    if (compact) {
        maps.reserve(static_cast<std::size_t>(dim));
        for (int k = 0; k < dim; ++k) {
            const Support s = d.axis_support(k);
            maps.push_back({s.lo, s.hi});
            jac_total *= maps.back().jacobian();
        }
    }

    TestFunctionND fmapped = f;
    if (compact) {
        auto to_x = [maps, dim](std::span<const double> t, std::vector<double>& x) {
            x.resize(static_cast<std::size_t>(dim));
            for (int k = 0; k < dim; ++k) x[static_cast<std::size_t>(k)] = maps[static_cast<std::size_t>(k)].from_unit(t[static_cast<std::size_t>(k)]);
        };
        fmapped.value = [f, to_x](std::span<const double> t) {
            std::vector<double> x;
            to_x(t, x);
            return f.value(x);
        };
        fmapped.partial = [f, to_x, maps](std::span<const int> J, std::span<const double> t) {
            std::vector<double> x;
            to_x(t, x);
            double jac = 1.0;
            for (int k : J) jac *= maps[static_cast<std::size_t>(k)].jacobian();
            return f.partial(J, x) * jac;
        };
    }

    std::vector<double> tpoints;
    if (compact) {
        tpoints.resize(batch.points.size());
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < dim; ++k)
                tpoints[static_cast<std::size_t>(i * dim + k)] =
                    maps[static_cast<std::size_t>(k)].to_unit(batch.point(i)[static_cast<std::size_t>(k)]);
    }
    const auto tpoint = [&](int i) {
        return compact ? std::span<const double>(tpoints).subspan(static_cast<std::size_t>(i) * static_cast<std::size_t>(dim),
                                                                  static_cast<std::size_t>(dim))
                       : batch.point(i);
    };

    std::vector<double> scores(static_cast<std::size_t>(n) * static_cast<std::size_t>(dim));
    for (int i = 0; i < n; ++i)
        d.score(batch.point(i), std::span<double>(scores).subspan(static_cast<std::size_t>(i) * static_cast<std::size_t>(dim),
                                                                  static_cast<std::size_t>(dim)));

    GradEstimate out;
    out.value.assign(static_cast<std::size_t>(dim), 0.0);
    out.estimator = EstimatorKind::rt_nd;
    out.n_used = n;

    const double pair_norm = 1.0 / (static_cast<double>(n) * (n - 1));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double pj = d.density(batch.point(j)) * (compact ? jac_total : 1.0);
            const double w = compact ? weight_interval_nd(cfg, fmapped, tpoint(i), tpoint(j))
                                     : weight_rd(cfg, fmapped, tpoint(i), tpoint(j));
            const double common = w / pj * pair_norm;
            for (int c = 0; c < dim; ++c)
                out.value[static_cast<std::size_t>(c)] += common * scores[static_cast<std::size_t>(i * dim + c)];
        }
    }
    if (compact) {
        for (int i = 0; i < n; ++i) {
            const double bs = boundary_sum_nd(cfg.a, fmapped, tpoint(i)) / n;
            for (int c = 0; c < dim; ++c)
                out.value[static_cast<std::size_t>(c)] -= bs * scores[static_cast<std::size_t>(i * dim + c)];
        }
    }
    for (double v : out.value)
        if (!std::isfinite(v)) throw std::runtime_error("rt_nd: non-finite estimate");
    return out;
}

// Hilbert-Sobolev-Laplace estimator: for each outer point x_i, m inner draws
// x_{i,j} ~ Laplace(x_i, a) built from the supplied uniforms (n*m of them),
//   (1/(mn)) sum_{i,j} [ f(x_{i,j}) + a sign(x_i - x_{i,j}) f'(x_{i,j}) ] score(x_i).
template <class Density>
GradEstimate estimate_hsl(const SampleBatch& batch, const TestFunction1D& f, const Density& d, double a, int m,
                          std::span<const double> inner_uniforms) {
    const int n = batch.n();
    detail::require_min_n(n, 1, "estimate_hsl");
    if (m < 1) throw std::invalid_argument("estimate_hsl: m must be >= 1");
    if (static_cast<int>(inner_uniforms.size()) != n * m)
        throw std::invalid_argument("estimate_hsl: expected n*m inner uniforms");

    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double xi = batch.points[static_cast<std::size_t>(i)];
        const double si = d.score(xi);
        for (int j = 0; j < m; ++j) {
            const double z = laplace_sample(xi, a, inner_uniforms[static_cast<std::size_t>(i * m + j)]);
            acc += (f.value(z) + a * sign0(xi - z) * f.deriv(z)) * si;
        }
    }
    return detail::make1(acc / (static_cast<double>(m) * n), EstimatorKind::hsl, n);
}

} // namespace gradest
