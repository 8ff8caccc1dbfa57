#include "gradest/verify.hpp"

#include <cmath>
#include <functional>

#include "gradest/combination.hpp"
#include "gradest/densities.hpp"
#include "gradest/estimators.hpp"
#include "gradest/harness.hpp"
#include "gradest/multivariate.hpp"
#include "gradest/quadrature.hpp"
#include "gradest/rng.hpp"
#include "gradest/sobolev.hpp"
#include "gradest/trial_map.hpp"

namespace gradest {

namespace {

struct Collector {
    std::vector<CheckResult>& out;
    std::string suite;

    void leq(const std::string& name, double observed, double bound, const std::string& note = "") {
        out.push_back({suite, name, observed <= bound, observed, bound, note});
    }
    void is_true(const std::string& name, bool ok, double observed, double bound, const std::string& note = "") {
        out.push_back({suite, name, ok, observed, bound, note});
    }
};

// ---------------------------------------------------------------- identities

void identity_checks(std::vector<CheckResult>& results, const VerifyConfig& cfg) {
    Collector c{results, "identities"};
    QuadratureSpec q1;
    q1.abs_tol = 1e-10;

    const std::vector<TestFunction1D> fs_real = {tf_sin(), tf_square(), tf_identity(), tf_constant(2.5)};
    const std::vector<double> scales = {0.3, 0.5, 1.0};
    const std::vector<double> probes = {-0.7, 0.3, 0.9};

    // real-line reproducing identity: integral of w_R recovers f(x)
    double worst = 0.0;
    for (const TestFunction1D& f : fs_real)
        for (double a : scales)
            for (double x : probes) {
                QuadratureSpec q = q1;
                q.breakpoints = {x};
                const double halfwidth = 60.0 * a + 1.0;
                const double got = integrate(
                    q, [&](double z) { return weight_real(a, f, x, z); }, x - halfwidth, x + halfwidth);
                worst = std::max(worst, std::fabs(got - f.value(x)));
            }
    c.leq("reproducing-real", worst, 1e-7);

    // interval reproducing identity with the boundary term
    worst = 0.0;
    for (const TestFunction1D& f : fs_real)
        for (double a : scales)
            for (double x : probes) {
                QuadratureSpec q = q1;
                q.breakpoints = {x};
                const double got = integrate(
                                       q, [&](double z) { return weight_interval(a, f, x, z); }, -1.0, 1.0) +
                                   boundary_term(a, f, x);
                worst = std::max(worst, std::fabs(got - f.value(x)));
            }
    c.leq("reproducing-interval", worst, 1e-7);

    // null direction of P: f + a f' = 0 makes the interval weight vanish
    worst = 0.0;
    {
        const double a = 0.4;
        const TestFunction1D f = tf_exp_decay(a);
        for (double z = -0.95; z < 1.0; z += 0.25)
            worst = std::max(worst, std::fabs(weight_interval(a, f, 0.3, z)));
    }
    c.leq("null-direction-weight", worst, 1e-12);

    // Laplace evaluation identity (the fault hook flips the f' sign, which is
    // exactly the corrupted sign convention the negative control wants)
    worst = 0.0;
    const double flip = cfg.fault == FaultInjection::flip_laplace_sign ? -1.0 : 1.0;
    const std::vector<TestFunction1D> fs_lap = {tf_identity(), tf_constant(0.7), tf_sin2x()};
    for (const TestFunction1D& f0 : fs_lap)
        for (double a : {0.3, 1.0})
            for (double x : {0.7, -0.2}) {
                TestFunction1D f = f0;
                if (flip < 0.0) {
                    auto d = f0.deriv;
                    f.deriv = [d](double z) { return -d(z); };
                }
                worst = std::max(worst, std::fabs(laplace_identity_residual_quad(a, f, x, q1)));
            }
    c.leq("laplace-identity", worst, 1e-8);

    // kappa one-sided jump at z = x equals 1/a
    worst = 0.0;
    for (double a : {0.2, 1.0, 3.0})
        for (double x : {-0.5, 0.0, 0.73}) {
            const double below = kappa_interval(a, std::nextafter(x, -2.0), x);
            const double above = kappa_interval(a, std::nextafter(x, 2.0), x);
            worst = std::max(worst, std::fabs(below - above - 1.0 / a));
        }
    c.leq("kappa-jump", worst, 1e-12);

    // kappa at the edges equals B_a(x)/a
    worst = 0.0;
    for (double a : {0.2, 1.0, 3.0})
        for (double x : {-0.5, 0.0, 0.73}) {
            worst = std::max(worst, std::fabs(kappa_interval(a, 1.0, x) - edge_coefficient(a, x) / a));
            worst = std::max(worst, std::fabs(kappa_interval(a, -1.0, x) - edge_coefficient(a, -x) / a));
        }
    c.leq("kappa-edge-values", worst, 1e-12);

    // kernel symmetry, both domains
    worst = 0.0;
    for (double a : {0.05, 0.3, 1.0, 3.0})
        for (double z : {-0.7, 0.2})
            for (double x : {-0.1, 0.9}) {
                worst = std::max(worst, std::fabs(kernel_interval(a, z, x) - kernel_interval(a, x, z)));
                worst = std::max(worst, std::fabs(kernel_real(a, z, x) - kernel_real(a, x, z)));
            }
    c.leq("kernel-symmetry", worst, 1e-12);

    // univariate case of the compact d-dimensional machinery matches the
    // 1-D weight and boundary term exactly
    worst = 0.0;
    {
        const MultiWeightConfig cfg1{0.5, 1};
        const TestFunction1D f1 = tf_square();
        const TestFunctionND fnd = tfnd_separable({f1});
        for (double x : probes)
            for (double z : {-0.6, 0.1, 0.8}) {
                if (z == x) continue;
                const double w1 = weight_interval(0.5, f1, x, z);
                const double wn = weight_interval_nd(cfg1, fnd, std::vector<double>{x}, std::vector<double>{z});
                worst = std::max(worst, std::fabs(w1 - wn));
                const double b1 = boundary_term(0.5, f1, x);
                const double bn = -boundary_sum_nd(0.5, fnd, std::vector<double>{x});
                worst = std::max(worst, std::fabs(b1 - bn));
            }
    }
    c.leq("compact-univariate-crosscheck", worst, 1e-12);

    // compact representation in d = 1, 2: integral of w - boundary sum = f(x)
    worst = 0.0;
    {
        QuadratureSpec qn;
        qn.kind = QuadratureSpec::Kind::tensor_grid_nd;
        qn.points_per_axis = 64;
        qn.abs_tol = 1e-7;

        const std::vector<double> x2{0.2, -0.3};
        const std::vector<TestFunctionND> fs2 = {tfnd_constant(2, 1.0), tfnd_separable({tf_identity(), tf_constant(1.0)}),
                                                 tfnd_coordinate_product(2), tfnd_sin_cos_2d()};
        for (const TestFunctionND& f : fs2)
            for (double a : {0.3, 1.0}) {
                const MultiWeightConfig mw{a, 2};
                const std::vector<double> lo{-1.0, -1.0}, hi{1.0, 1.0};
                const std::vector<std::vector<double>> breaks{{x2[0]}, {x2[1]}};
                const double integral = integrate_nd(
                    qn, [&](std::span<const double> z) { return weight_interval_nd(mw, f, x2, z); }, lo, hi, breaks);
                const double got = integral - boundary_sum_nd(a, f, x2);
                worst = std::max(worst, std::fabs(got - f.value(x2)));
            }

        const std::vector<double> x1{0.2};
        for (double a : {0.3, 1.0}) {
            const MultiWeightConfig mw{a, 1};
            const TestFunctionND f = tfnd_separable({tf_square()});
            const std::vector<double> lo{-1.0}, hi{1.0};
            const std::vector<std::vector<double>> breaks{{x1[0]}};
            const double integral = integrate_nd(
                qn, [&](std::span<const double> z) { return weight_interval_nd(mw, f, x1, z); }, lo, hi, breaks);
            const double got = integral - boundary_sum_nd(a, f, x1);
            worst = std::max(worst, std::fabs(got - f.value(x1)));
        }
    }
    c.leq("representation-compact-nd", worst, 1e-5);

    // real-line representation in d = 2 holds up to an x-independent constant
    worst = 0.0;
    {
        QuadratureSpec qn;
        qn.kind = QuadratureSpec::Kind::tensor_grid_nd;
        qn.points_per_axis = 64;
        qn.abs_tol = 1e-7;
        const double a = 0.7;
        const MultiWeightConfig mw{a, 2};

        const auto residual_at = [&](const TestFunctionND& f, const std::vector<double>& x) {
            const double half = 42.0 * a;
            std::vector<double> lo(2), hi(2);
            std::vector<std::vector<double>> breaks(2);
            for (int k = 0; k < 2; ++k) {
                lo[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] - half;
                hi[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] + half;
                // graded panels: the integrand decays on the a scale
                for (double s : {-20.0, -8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0, 20.0})
                    breaks[static_cast<std::size_t>(k)].push_back(x[static_cast<std::size_t>(k)] + s * a);
            }
            const double integral = integrate_nd(
                qn, [&](std::span<const double> z) { return weight_rd(mw, f, x, z); }, lo, hi, breaks);
            return integral - f.value(x);
        };

        for (const TestFunctionND& f : {tfnd_coordinate_product(2), tfnd_coordinate_sum(2)}) {
            const double r1 = residual_at(f, {0.1, 0.2});
            const double r2 = residual_at(f, {-0.4, 0.5});
            worst = std::max(worst, std::fabs(r1 - r2));
        }
        // d = 1 real-line residual difference
        const TestFunctionND f1 = tfnd_separable({tf_square()});
        QuadratureSpec q = q1;
        const auto res1 = [&](double x) {
            q.breakpoints = {x};
            const MultiWeightConfig mw1{a, 1};
            const double halfwidth = 45.0 * a;
            const double integral = integrate(
                q,
                [&](double z) {
                    return weight_rd(mw1, f1, std::vector<double>{x}, std::vector<double>{z});
                },
                x - halfwidth, x + halfwidth);
            return integral - f1.value(std::vector<double>{x});
        };
        worst = std::max(worst, std::fabs(res1(0.1) - res1(-0.4)));
    }
    c.leq("representation-real-nd-constancy", worst, 1e-5);

    // truncation must change the value when cross partials are present
    {
        const TestFunctionND f = tfnd_coordinate_product(2);
        const std::vector<double> x{0.2, -0.3}, z{-0.5, 0.4};
        const double full = weight_interval_nd(MultiWeightConfig{0.5, 2}, f, x, z);
        const double truncated = weight_interval_nd(MultiWeightConfig{0.5, 1}, f, x, z);
        c.is_true("truncation-visible", std::fabs(full - truncated) > 1e-6, std::fabs(full - truncated), 1e-6);
    }
}

// ---------------------------------------------------------------- estimators

struct TrialTable {
    std::vector<std::vector<double>> values; // [estimator][trial]
};

TrialTable bump_trials(const VerifyConfig& cfg, const TestFunction1D& f, double gamma, int n,
                       const std::vector<EstimatorConfig>& configs, std::uint64_t stream_offset) {
    const RationalBump density(0.0, gamma);
    TrialTable table;
    table.values.assign(configs.size(), std::vector<double>(static_cast<std::size_t>(cfg.trials)));
    map_trials_checked(cfg.trials, cfg.threads, [&](std::int64_t t) {
        const TrialStream stream{cfg.seed, stream_offset + static_cast<std::uint64_t>(t)};
        SampleBatch batch;
        batch.points.resize(static_cast<std::size_t>(n));
        batch.theta = 0.0;
        batch.seed_tag = stream.trial;
        for (int i = 0; i < n; ++i)
            batch.points[static_cast<std::size_t>(i)] = density.sample(stream.u(static_cast<std::uint64_t>(i)));
        std::uint64_t inner_base = static_cast<std::uint64_t>(n);
        for (std::size_t ci = 0; ci < configs.size(); ++ci) {
            const EstimatorConfig& c = configs[ci];
            double v = 0.0;
            switch (c.kind) {
            case EstimatorKind::ld: v = estimate_ld(batch, f, density, 0.0).scalar(); break;
            case EstimatorKind::ft_sym: v = estimate_ft(batch, f, density, true).scalar(); break;
            case EstimatorKind::ft_single: v = estimate_ft(batch, f, density, false).scalar(); break;
            case EstimatorKind::rt_interval: v = estimate_rt_interval(batch, f, density, c.a).scalar(); break;
            case EstimatorKind::hsl: {
                std::vector<double> inner(static_cast<std::size_t>(n) * static_cast<std::size_t>(c.hsl_inner_m));
                for (std::size_t j = 0; j < inner.size(); ++j)
                    inner[j] = stream.u(inner_base + static_cast<std::uint64_t>(j));
                inner_base += inner.size();
                v = estimate_hsl(batch, f, density, c.a, c.hsl_inner_m, inner).scalar();
                break;
            }
            default: break;
            }
            table.values[ci][static_cast<std::size_t>(t)] = v;
        }
    });
    return table;
}

struct MeanVar {
    double mean;
    double var;
    double se;
};

MeanVar mean_var(std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size() - 1);
    return {mean, var, std::sqrt(var / static_cast<double>(v.size()))};
}

void estimator_checks(std::vector<CheckResult>& results, const VerifyConfig& cfg) {
    Collector c{results, "estimators"};
    const TestFunction1D f = tf_identity();

    // cross-estimator consistency: every unbiased estimator of the bump
    // problem agrees with mu = (pi-2)/pi and with every other one
    {
        const std::vector<EstimatorConfig> configs = {
            {EstimatorKind::ld}, {EstimatorKind::ft_sym}, {EstimatorKind::ft_single},
            {EstimatorKind::rt_interval, 0.2}, {EstimatorKind::hsl, 0.3, 0.0, 1, 1}};
        const TrialTable table = bump_trials(cfg, f, 1.0, 2, configs, 0);
        const double mu = closed_form::mu_fx();
        double worst_z = 0.0;
        std::vector<MeanVar> stats;
        stats.reserve(configs.size());
        for (const auto& v : table.values) stats.push_back(mean_var(v));
        for (std::size_t i = 0; i < stats.size(); ++i) {
            worst_z = std::max(worst_z, std::fabs(stats[i].mean - mu) / stats[i].se);
            for (std::size_t j = i + 1; j < stats.size(); ++j) {
                const double se = std::sqrt(stats[i].se * stats[i].se + stats[j].se * stats[j].se);
                worst_z = std::max(worst_z, std::fabs(stats[i].mean - stats[j].mean) / se);
            }
        }
        c.leq("cross-estimator-consistency", worst_z, 3.0, "worst |Delta mean| in combined-SE units");
    }

    // exchangeability: permuting a fixed batch leaves the pairwise sums put
    {
        const RationalBump density(0.0, 1.0);
        const TrialStream s{cfg.seed, 9001};
        SampleBatch batch;
        for (int i = 0; i < 6; ++i) batch.points.push_back(density.sample(s.u(static_cast<std::uint64_t>(i))));
        SampleBatch permuted = batch;
        std::rotate(permuted.points.begin(), permuted.points.begin() + 2, permuted.points.end());
        std::swap(permuted.points[0], permuted.points[3]);

        const double ft1 = estimate_ft(batch, f, density, true).scalar();
        const double ft2 = estimate_ft(permuted, f, density, true).scalar();
        const double rt1 = estimate_rt_interval(batch, f, density, 0.2).scalar();
        const double rt2 = estimate_rt_interval(permuted, f, density, 0.2).scalar();
        const double worst =
            std::max(std::fabs(ft1 - ft2) / std::fabs(ft1), std::fabs(rt1 - rt2) / std::fabs(rt1));
        c.leq("pairwise-exchangeability", worst, 1e-12);
    }

    // determinism: same batch, same estimate, bit for bit
    {
        const RationalBump density(0.0, 1.0);
        const TrialStream s{cfg.seed, 4242};
        SampleBatch batch;
        for (int i = 0; i < 4; ++i) batch.points.push_back(density.sample(s.u(static_cast<std::uint64_t>(i))));
        const double v1 = estimate_rt_interval(batch, f, density, 0.2).scalar();
        const double v2 = estimate_rt_interval(batch, f, density, 0.2).scalar();
        c.is_true("estimate-determinism", v1 == v2, std::fabs(v1 - v2), 0.0);
    }

    // variance crossover: the pairwise estimator wins from n = 8 on
    {
        const std::vector<EstimatorConfig> configs = {{EstimatorKind::ld}, {EstimatorKind::ft_sym}};
        const TrialTable table = bump_trials(cfg, f, 1.0, 8, configs, 1u << 20);
        const double vl = mean_var(table.values[0]).var;
        const double vf = mean_var(table.values[1]).var;
        c.is_true("variance-crossover-n8", vf < vl, vf / vl, 1.0, "Var[F8]/Var[L8]");
    }

    // denominator study: Var[F2] grows as the density floor shrinks
    {
        double previous = -1.0;
        bool monotone = true;
        std::uint64_t offset = 1u << 21;
        for (double gamma : {1.0, 0.3, 0.1, 0.03}) {
            const std::vector<EstimatorConfig> configs = {{EstimatorKind::ft_sym}};
            const TrialTable table = bump_trials(cfg, f, gamma, 2, configs, offset);
            offset += static_cast<std::uint64_t>(cfg.trials);
            const double vf = mean_var(table.values[0]).var;
            if (previous >= 0.0 && vf < previous) monotone = false;
            previous = vf;
        }
        c.is_true("denominator-degradation-monotone", monotone, previous, 0.0,
                  "Var[F2] nondecreasing as gamma drops through {1,0.3,0.1,0.03}");
    }
}

// --------------------------------------------------------------- combination

void combination_checks(std::vector<CheckResult>& results, const VerifyConfig& cfg) {
    Collector c{results, "combination"};
    const TestFunction1D f = tf_identity();

    const std::vector<EstimatorConfig> configs = {
        {EstimatorKind::ld}, {EstimatorKind::ft_sym}, {EstimatorKind::rt_interval, 0.2},
        {EstimatorKind::hsl, 0.3, 0.0, 1, 1}};
    const TrialTable table = bump_trials(cfg, f, 1.0, 2, configs, 1u << 22);
    const std::int64_t T = cfg.trials;

    // min-var weights against the brute-force grid oracle on LD+FT
    {
        std::vector<double> obs(static_cast<std::size_t>(2 * T));
        for (std::int64_t t = 0; t < T; ++t) {
            obs[static_cast<std::size_t>(2 * t)] = table.values[0][static_cast<std::size_t>(t)];
            obs[static_cast<std::size_t>(2 * t + 1)] = table.values[1][static_cast<std::size_t>(t)];
        }
        const CovEstimate cov = empirical_cov(obs, T, 2, true);
        const MixWeights w = minvar_weights(cov);
        const auto var_at = [&](double cc) {
            return cc * cc * cov.at(0, 0) + (1 - cc) * (1 - cc) * cov.at(1, 1) + 2 * cc * (1 - cc) * cov.at(0, 1);
        };
        const GridSearchResult grid = grid_oracle_c(var_at, -0.5, 1.5, 400);
        c.leq("minvar-vs-grid-oracle", std::fabs(grid.c_best - w.c[0]), 2.0 / 400.0 + 1e-12,
              "grid step 0.005 on [-0.5, 1.5]");

        const double combined = var_at(w.c[0]);
        c.leq("combined-not-worse-than-pure", combined, std::min(cov.at(0, 0), cov.at(1, 1)) + 1e-12);
    }

    // scale invariance of the argmin
    {
        CovEstimate cov;
        cov.dim = 3;
        cov.n_obs = 100;
        cov.m = {2.0, 0.3, -0.1, 0.3, 1.5, 0.2, -0.1, 0.2, 0.9};
        const MixWeights w1 = minvar_weights(cov);
        CovEstimate scaled = cov;
        for (double& v : scaled.m) v *= 737.5;
        const MixWeights w2 = minvar_weights(scaled);
        double worst = 0.0;
        for (std::size_t i = 0; i < w1.c.size(); ++i) worst = std::max(worst, std::fabs(w1.c[i] - w2.c[i]));
        c.leq("minvar-scale-invariance", worst, 1e-12);
    }

    // FT diversifies LD; HSL does not
    {
        const DiversificationResult ft = diversification_test(table.values[0], table.values[1]);
        c.is_true("diversification-ft-vs-ld", ft.diversifies, std::fabs(ft.moment_gap) / ft.gap_se, 3.0,
                  "|S12-S11| in SE units");
        const DiversificationResult hsl = diversification_test(table.values[0], table.values[3]);
        c.is_true("non-diversification-hsl-vs-ld", !hsl.diversifies, std::fabs(hsl.moment_gap) / hsl.gap_se, 3.0,
                  "|S12-S11| in SE units");
        const double dev = std::max(std::fabs(hsl.c.c[0] - 1.0), std::fabs(hsl.c.c[1]));
        c.leq("hsl-weights-near-pure-ld", dev, 0.05);
    }

    // three-way weights sum to one and beat pure LD
    {
        std::vector<double> obs(static_cast<std::size_t>(3 * T));
        for (std::int64_t t = 0; t < T; ++t)
            for (int i = 0; i < 3; ++i)
                obs[static_cast<std::size_t>(3 * t + i)] = table.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
        const CovEstimate cov = empirical_cov(obs, T, 3, true);
        const MixWeights w = minvar_weights(cov);
        double sum = 0.0;
        for (double v : w.c) sum += v;
        c.leq("three-way-weights-sum-to-one", std::fabs(sum - 1.0), 1e-12);
        double combined = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) combined += w.c[static_cast<std::size_t>(i)] * w.c[static_cast<std::size_t>(j)] * cov.at(i, j);
        c.is_true("three-way-beats-pure-ld", combined < cov.at(0, 0), combined / cov.at(0, 0), 1.0);
    }
}

} // namespace

std::vector<CheckResult> run_verify(VerifySuite suite, const VerifyConfig& cfg) {
    std::vector<CheckResult> results;
    if (suite == VerifySuite::identities || suite == VerifySuite::all) identity_checks(results, cfg);
    if (suite == VerifySuite::estimators || suite == VerifySuite::all) estimator_checks(results, cfg);
    if (suite == VerifySuite::combination || suite == VerifySuite::all) combination_checks(results, cfg);
    return results;
}

bool all_passed(std::span<const CheckResult> results) {
    for (const CheckResult& r : results)
        if (!r.passed) return false;
    return true;
}

VerifySuite parse_suite(const std::string& name) {
    if (name == "identities") return VerifySuite::identities;
    if (name == "estimators") return VerifySuite::estimators;
    if (name == "combination") return VerifySuite::combination;
    if (name == "all") return VerifySuite::all;
    throw std::invalid_argument("unknown verify suite: " + name);
}

std::string format_check(const CheckResult& r) {
    std::string line = r.passed ? "ok   " : "FAIL ";
    line += r.suite + "/" + r.name + " observed=" + format_double(r.observed) + " bound=" + format_double(r.bound);
    if (!r.note.empty()) line += " (" + r.note + ")";
    return line;
}

} // namespace gradest
