#include <doctest.h>

#include <cmath>
#include <vector>

#include <functional>

#include "gradest/densities.hpp"
#include "gradest/estimators.hpp"
#include "gradest/harness.hpp"
#include "gradest/quadrature.hpp"
#include "gradest/rng.hpp"
#include "gradest/test_functions.hpp"
#include "gradest/trial_map.hpp"

using namespace gradest;

namespace {

SampleBatch bump_batch(const RationalBump& d, int n, std::uint64_t seed, std::uint64_t trial) {
    SampleBatch b;
    b.theta = d.theta;
    b.seed_tag = trial;
    const TrialStream s{seed, trial};
    for (int i = 0; i < n; ++i) b.points.push_back(d.sample(s.u(static_cast<std::uint64_t>(i))));
    return b;
}

struct MeanSe {
    double mean;
    double se;
    double var;
};

template <class Gen>
MeanSe mc_stats(std::int64_t trials, Gen&& gen) {
    std::vector<double> v(static_cast<std::size_t>(trials));
    map_trials_checked(trials, 0, [&](std::int64_t t) { v[static_cast<std::size_t>(t)] = gen(t); });
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(trials);
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(trials - 1);
    return {mean, std::sqrt(var / static_cast<double>(trials)), var};
}

} // namespace

TEST_SUITE_BEGIN("estimators");

TEST_CASE("log-derivative estimator basics") {
    const RationalBump d(0.0, 1.0);
    const SampleBatch b = bump_batch(d, 4, 3, 0);

    // f identically equal to the baseline gives exactly zero
    const TestFunction1D fconst = tf_constant(0.7);
    CHECK(estimate_ld(b, fconst, d, 0.7).scalar() == 0.0);
    CHECK(estimate_ld(b, fconst, d, 0.7).estimator == EstimatorKind::ld_baseline);
    CHECK(estimate_ld(b, fconst, d, 0.0).estimator == EstimatorKind::ld);
    CHECK(estimate_ld(b, fconst, d).n_used == 4);
    CHECK_THROWS_AS(estimate_ld(SampleBatch{}, fconst, d), std::invalid_argument);
}

TEST_CASE("log-derivative mean hits the closed form") {
    const RationalBump d(0.0, 1.0);
    const TestFunction1D f = tf_identity();
    const MeanSe s = mc_stats(200000, [&](std::int64_t t) {
        return estimate_ld(bump_batch(d, 1, 11, static_cast<std::uint64_t>(t)), f, d).scalar();
    });
    CHECK(std::fabs(s.mean - closed_form::mu_fx()) < 4.0 * s.se);
}

TEST_CASE("reparameterisation estimator") {
    const LocationScaleGaussian g(0.5, 1.0);

    SampleBatch eps;
    eps.points = {0.3, -1.2, 0.8};
    CHECK(estimate_reparam(eps, tf_identity(), g).scalar() == 1.0); // every term is exactly 1
    CHECK(estimate_reparam(eps, tf_constant(4.0), g).scalar() == 0.0);

    // d/dmu E[x^2] = 2 mu = 1 at mu = 0.5
    const MeanSe s = mc_stats(10000, [&](std::int64_t t) {
        SampleBatch e;
        e.points = {normal_quantile(uniform01(17, static_cast<std::uint64_t>(t), 0))};
        return estimate_reparam(e, tf_square(), g).scalar();
    });
    CHECK(std::fabs(s.mean - 1.0) < 3.0 * s.se);
}

TEST_CASE("fundamental trick: coincident points and the symmetrisation identity") {
    const RationalBump d(0.0, 1.0);
    const TestFunction1D f = tf_identity();

    SampleBatch tie;
    tie.points = {0.3, 0.3};
    CHECK(estimate_ft(tie, f, d, true).scalar() == 0.0); // sign(0) = 0

    // F2 on {x,z} equals the average of the single-pair kernel over both orderings
    const SampleBatch b = bump_batch(d, 2, 5, 1);
    SampleBatch fwd, rev;
    fwd.points = {b.points[0], b.points[1]};
    rev.points = {b.points[1], b.points[0]};
    const double f2 = estimate_ft(b, f, d, true).scalar();
    const double avg = 0.5 * (estimate_ft(fwd, f, d, false).scalar() + estimate_ft(rev, f, d, false).scalar());
    CHECK(f2 == doctest::Approx(avg).epsilon(1e-15));

    SampleBatch one;
    one.points = {0.1};
    CHECK_THROWS_AS(estimate_ft(one, f, d, true), std::invalid_argument);
    SampleBatch odd;
    odd.points = {0.1, 0.2, 0.3};
    CHECK_THROWS_AS(estimate_ft(odd, f, d, false), std::invalid_argument);
}

TEST_CASE("single-sum fundamental trick: unbiased, variance against a quadrature oracle") {
    const RationalBump d(0.0, 1.0);
    const TestFunction1D f = tf_identity();

    // E[g^2] = 1/4 E[1/p(z)^2] E[score(x)^2], both factors by quadrature
    QuadratureSpec q;
    q.abs_tol = 1e-11;
    const double inv_p = integrate(q, [&](double z) { return 1.0 / d.density(z); }, -1.0, 1.0);
    const double score2 = integrate(
        q, [&](double x) { return d.score(x) * d.score(x) * d.density(x); }, std::nextafter(-1.0, 0.0),
        std::nextafter(1.0, 0.0));
    const double second_moment = 0.25 * inv_p * score2;
    const double mu = closed_form::mu_fx();

    const MeanSe s = mc_stats(200000, [&](std::int64_t t) {
        return estimate_ft(bump_batch(d, 2, 7, static_cast<std::uint64_t>(t)), f, d, false).scalar();
    });
    CHECK(std::fabs(s.mean - mu) < 4.0 * s.se);
    CHECK(s.var == doctest::Approx(second_moment - mu * mu).epsilon(0.03));
}

TEST_CASE("closed-form variances of the n = 2 estimators") {
    const RationalBump d(0.0, 1.0);
    const TestFunction1D f = tf_identity();
    std::vector<double> ld_vals(100000), ft_vals(100000);
    map_trials_checked(100000, 0, [&](std::int64_t t) {
        const SampleBatch b = bump_batch(d, 2, 42, static_cast<std::uint64_t>(t));
        ld_vals[static_cast<std::size_t>(t)] = estimate_ld(b, f, d).scalar();
        ft_vals[static_cast<std::size_t>(t)] = estimate_ft(b, f, d, true).scalar();
    });
    const auto var_of = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return s / static_cast<double>(v.size() - 1);
    };
    CHECK(var_of(ld_vals) == doctest::Approx(closed_form::vld_fx()).epsilon(0.02));
    CHECK(var_of(ft_vals) == doctest::Approx(closed_form::vft_fx()).epsilon(0.02));
}

TEST_CASE("representer trick on the real line") {
    // Fixed seeds: the Gaussian 1/p(x_j) factor gives these estimators heavy
    // tails, so the SE bands below hold for these streams, not for any seed.
    const LocationScaleGaussian g(0.0, 1.0);
    const RationalBump bump(0.0, 1.0);
    const TestFunction1D f = tf_identity();

    CHECK_THROWS_AS(estimate_rt_real(bump_batch(bump, 4, 1, 0), f, bump, 1.0), std::invalid_argument);

    const auto gauss_batch = [&](const LocationScaleGaussian& fam, int n, std::uint64_t trial) {
        SampleBatch b;
        b.theta = fam.mu;
        for (int i = 0; i < n; ++i)
            b.points.push_back(fam.sample(uniform01(23, trial, static_cast<std::uint64_t>(i))));
        return b;
    };

    // gradient of a constant is zero
    const MeanSe sc = mc_stats(10000, [&](std::int64_t t) {
        return estimate_rt_real(gauss_batch(g, 4, static_cast<std::uint64_t>(t)), tf_constant(2.0), g, 1.0).scalar();
    });
    CHECK(std::fabs(sc.mean) < 4.0 * sc.se);

    // d/dmu E[x] = 1
    const MeanSe s1 = mc_stats(10000, [&](std::int64_t t) {
        return estimate_rt_real(gauss_batch(g, 4, static_cast<std::uint64_t>(t)), f, g, 1.0).scalar();
    });
    CHECK(std::fabs(s1.mean - 1.0) < 3.0 * s1.se);

    // d/dmu E[x^2] = 2 mu = 1 at mu = 0.5
    const LocationScaleGaussian g2(0.5, 1.0);
    const MeanSe s2 = mc_stats(20000, [&](std::int64_t t) {
        return estimate_rt_real(gauss_batch(g2, 4, static_cast<std::uint64_t>(t)), tf_square(), g2, 1.0).scalar();
    });
    CHECK(std::fabs(s2.mean - 1.0) < 3.0 * s2.se);
}

TEST_CASE("representer trick on the interval: null direction leaves only the boundary part") {
    const RationalBump d(0.0, 1.0);
    const double a = 0.4;
    const TestFunction1D null_f = tf_exp_decay(a);
    const SampleBatch b = bump_batch(d, 3, 9, 2);

    double boundary_only = 0.0;
    for (double x : b.points) boundary_only += boundary_term(a, null_f, x) * d.score(x);
    boundary_only /= b.n();
    CHECK(estimate_rt_interval(b, null_f, d, a).scalar() == doctest::Approx(boundary_only).epsilon(1e-13));

    const LocationScaleGaussian g(0.0, 1.0);
    SampleBatch gb;
    gb.points = {0.1, -0.2};
    CHECK_THROWS_AS(estimate_rt_interval(gb, null_f, g, a), std::invalid_argument);
}

TEST_CASE("representer trick on the interval: unbiased at theta = 0 and through the affine map") {
    const TestFunction1D f = tf_identity();
    const double mu = closed_form::mu_fx();

    const RationalBump centred(0.0, 1.0);
    const MeanSe s0 = mc_stats(200000, [&](std::int64_t t) {
        return estimate_rt_interval(bump_batch(centred, 2, 13, static_cast<std::uint64_t>(t)), f, centred, 0.2)
            .scalar();
    });
    CHECK(std::fabs(s0.mean - mu) < 4.0 * s0.se);

    // shifted support exercises the affine map and the 1/n boundary normalisation
    const RationalBump shifted(0.4, 1.0);
    const MeanSe s1 = mc_stats(200000, [&](std::int64_t t) {
        return estimate_rt_interval(bump_batch(shifted, 2, 29, static_cast<std::uint64_t>(t)), f, shifted, 0.2)
            .scalar();
    });
    CHECK(std::fabs(s1.mean - mu) < 4.0 * s1.se);
}

TEST_CASE("representer variance at a = 0.2 is near the demo value") {
    const RationalBump d(0.0, 1.0);
    const TestFunction1D f = tf_identity();
    const MeanSe s = mc_stats(100000, [&](std::int64_t t) {
        return estimate_rt_interval(bump_batch(d, 2, 42, static_cast<std::uint64_t>(t)), f, d, 0.2).scalar();
    });
    CHECK(s.var == doctest::Approx(1.2638).epsilon(0.10));
}

TEST_CASE("pairwise estimators: determinism and exchangeability") {
    const RationalBump d(0.0, 1.0);
    const TestFunction1D f = tf_identity();
    const SampleBatch b = bump_batch(d, 6, 31, 4);

    CHECK(estimate_ft(b, f, d, true).scalar() == estimate_ft(b, f, d, true).scalar());
    CHECK(estimate_rt_interval(b, f, d, 0.3).scalar() == estimate_rt_interval(b, f, d, 0.3).scalar());

    SampleBatch perm = b;
    std::swap(perm.points[0], perm.points[4]);
    std::swap(perm.points[2], perm.points[5]);
    CHECK(estimate_ft(perm, f, d, true).scalar() ==
          doctest::Approx(estimate_ft(b, f, d, true).scalar()).epsilon(1e-12));
    CHECK(estimate_rt_interval(perm, f, d, 0.3).scalar() ==
          doctest::Approx(estimate_rt_interval(b, f, d, 0.3).scalar()).epsilon(1e-12));
}

TEST_CASE("multivariate representer: d = 1 reductions") {
    const TestFunction1D f1 = tf_identity();
    const TestFunctionND fnd = tfnd_separable({f1});

    const ProductBump pb({0.0}, 1.0);
    const RationalBump b1(0.0, 1.0);
    SampleBatchNd nd;
    nd.dim = 1;
    nd.theta = {0.0};
    SampleBatch uni;
    const TrialStream s{3, 8};
    for (int i = 0; i < 3; ++i) {
        const double x = b1.sample(s.u(static_cast<std::uint64_t>(i)));
        nd.points.push_back(x);
        uni.points.push_back(x);
    }
    const MultiWeightConfig cfg{0.3, 1};
    const double got_nd = estimate_rt_nd(nd, fnd, pb, cfg).value[0];
    const double got_uni = estimate_rt_interval(uni, f1, b1, 0.3).scalar();
    CHECK(got_nd == doctest::Approx(got_uni).epsilon(1e-12));

    const ProductGaussian pg({0.0}, 1.0);
    const LocationScaleGaussian g1(0.0, 1.0);
    SampleBatchNd gnd;
    gnd.dim = 1;
    gnd.theta = {0.0};
    SampleBatch guni;
    for (int i = 0; i < 3; ++i) {
        const double x = g1.sample(uniform01(3, 9, static_cast<std::uint64_t>(i)));
        gnd.points.push_back(x);
        guni.points.push_back(x);
    }
    CHECK(estimate_rt_nd(gnd, fnd, pg, cfg).value[0] ==
          doctest::Approx(estimate_rt_real(guni, f1, g1, 0.3).scalar()).epsilon(1e-12));
}

TEST_CASE("multivariate representer: d = 2 unbiasedness and exact first-order truncation") {
    const TestFunctionND f = tfnd_coordinate_sum(2);
    const ProductBump pb({0.0, 0.0}, 1.0);
    const double mu = closed_form::mu_fx();
    const MultiWeightConfig full{0.5, 2};
    const MultiWeightConfig first{0.5, 1};

    const std::int64_t T = 100000;
    std::vector<double> c0(static_cast<std::size_t>(T)), c1(static_cast<std::size_t>(T));
    std::vector<double> gaps(static_cast<std::size_t>(T));
    map_trials_checked(T, 0, [&](std::int64_t t) {
        SampleBatchNd batch;
        batch.dim = 2;
        batch.theta = {0.0, 0.0};
        const TrialStream s{37, static_cast<std::uint64_t>(t)};
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k)
                batch.points.push_back(pb.sample_component(k, s.u(static_cast<std::uint64_t>(2 * i + k))));
        const GradEstimate e_full = estimate_rt_nd(batch, f, pb, full);
        const GradEstimate e_first = estimate_rt_nd(batch, f, pb, first);
        c0[static_cast<std::size_t>(t)] = e_full.value[0];
        c1[static_cast<std::size_t>(t)] = e_full.value[1];
        // additively separable f: the cross partial vanishes, truncation exact
        gaps[static_cast<std::size_t>(t)] = std::max(std::fabs(e_full.value[0] - e_first.value[0]),
                                                     std::fabs(e_full.value[1] - e_first.value[1]));
    });
    double max_gap = 0.0;
    for (double g : gaps) max_gap = std::max(max_gap, g);
    CHECK(max_gap < 1e-12);

    for (const std::vector<double>* comp : {&c0, &c1}) {
        double mean = 0.0;
        for (double x : *comp) mean += x;
        mean /= static_cast<double>(T);
        double var = 0.0;
        for (double x : *comp) var += (x - mean) * (x - mean);
        var /= static_cast<double>(T - 1);
        CHECK(std::fabs(mean - mu) < 3.0 * std::sqrt(var / static_cast<double>(T)));
    }
}

TEST_CASE("multivariate representer on R^2: assembly matches a direct evaluation") {
    // The real-line variant has no boundary part; on a fixed batch the
    // estimate must equal the hand-rolled pairwise sum
    //   (1/(n(n-1))) sum_{i!=j} w_rd(x_i, x_j) / p(x_j) * score_c(x_i).
    // (Mean tests live on the compact problem: the Gaussian 1/p factor makes
    // the real-line estimator's variance infinite, so empirical SEs there
    // understate the error.)
    const TestFunctionND f = tfnd_coordinate_sum(2);
    const ProductGaussian pg({0.0, 0.5}, 1.0);
    const MultiWeightConfig cfg{1.0, 2};

    SampleBatchNd batch;
    batch.dim = 2;
    batch.theta = {0.0, 0.5};
    const TrialStream s{41, 0};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 2; ++k)
            batch.points.push_back(pg.sample_component(k, s.u(static_cast<std::uint64_t>(2 * i + k))));

    const GradEstimate e = estimate_rt_nd(batch, f, pg, cfg);

    const int n = 3;
    std::vector<double> expected(2, 0.0);
    for (int i = 0; i < n; ++i) {
        std::vector<double> sc(2);
        pg.score(batch.point(i), sc);
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double common = weight_rd(cfg, f, batch.point(i), batch.point(j)) / pg.density(batch.point(j)) /
                                  (static_cast<double>(n) * (n - 1));
            expected[0] += common * sc[0];
            expected[1] += common * sc[1];
        }
    }
    CHECK(e.value[0] == doctest::Approx(expected[0]).epsilon(1e-14));
    CHECK(e.value[1] == doctest::Approx(expected[1]).epsilon(1e-14));
}

TEST_CASE("multivariate representer: validation") {
    const TestFunctionND f = tfnd_coordinate_sum(2);
    const ProductBump pb({0.0, 0.0}, 1.0);
    SampleBatchNd batch;
    batch.dim = 1;
    batch.theta = {0.0};
    batch.points = {0.1, 0.2};
    CHECK_THROWS_AS(estimate_rt_nd(batch, f, pb, MultiWeightConfig{0.5, 2}), std::invalid_argument);

    // the exact 2^d sum is refused beyond d = 16; truncation is the path there
    const int d = 17;
    const ProductBump wide(std::vector<double>(static_cast<std::size_t>(d), 0.0), 1.0);
    const TestFunctionND fwide = tfnd_coordinate_sum(d);
    SampleBatchNd big;
    big.dim = d;
    big.theta.assign(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < 2 * d; ++i) big.points.push_back(0.01 * (i + 1) - 0.2);
    CHECK_THROWS_AS(estimate_rt_nd(big, fwide, wide, MultiWeightConfig{0.5, d}), std::invalid_argument);
}

TEST_CASE("optimal log-derivative baseline: quadrature oracle vs empirical fit") {
    // b* = E[f score^2] / E[score^2]; for f(x) = x at theta = 0 the integrand
    // is odd, so the optimal baseline is exactly zero; for f(x) = x^2 it is not.
    const RationalBump d(0.0, 1.0);
    QuadratureSpec q;
    q.abs_tol = 1e-11;
    const double lo = std::nextafter(-1.0, 0.0), hi = std::nextafter(1.0, 0.0);
    const auto moment = [&](const std::function<double(double)>& g) {
        return integrate(q, [&](double x) { return g(x) * d.density(x); }, lo, hi);
    };
    const double score2 = moment([&](double x) { return d.score(x) * d.score(x); });

    const auto empirical_bhat = [&](const TestFunction1D& f) {
        // per-trial split LD_b = A - b B with A = mean f s, B = mean s;
        // the variance-minimising b is Cov(A,B)/Var(B)
        const std::int64_t T = 200000;
        std::vector<double> A(static_cast<std::size_t>(T)), B(static_cast<std::size_t>(T));
        map_trials_checked(T, 0, [&](std::int64_t t) {
            const SampleBatch b = bump_batch(d, 2, 97, static_cast<std::uint64_t>(t));
            double fa = 0.0, sb = 0.0;
            for (double x : b.points) {
                fa += f.value(x) * d.score(x);
                sb += d.score(x);
            }
            A[static_cast<std::size_t>(t)] = fa / 2.0;
            B[static_cast<std::size_t>(t)] = sb / 2.0;
        });
        double ma = 0.0, mb = 0.0;
        for (std::int64_t t = 0; t < T; ++t) {
            ma += A[static_cast<std::size_t>(t)];
            mb += B[static_cast<std::size_t>(t)];
        }
        ma /= static_cast<double>(T);
        mb /= static_cast<double>(T);
        double cab = 0.0, vb = 0.0;
        for (std::int64_t t = 0; t < T; ++t) {
            const double da = A[static_cast<std::size_t>(t)] - ma;
            const double db = B[static_cast<std::size_t>(t)] - mb;
            cab += da * db;
            vb += db * db;
        }
        return cab / vb;
    };

    SUBCASE("f(x) = x: optimal baseline is zero") {
        const TestFunction1D f = tf_identity();
        const double b_star = moment([&](double x) { return f.value(x) * d.score(x) * d.score(x); }) / score2;
        CHECK(std::fabs(b_star) < 1e-10);
        CHECK(std::fabs(empirical_bhat(f)) < 0.02);
    }
    SUBCASE("f(x) = x^2: nonzero baseline found by the empirical oracle") {
        const TestFunction1D f = tf_square();
        const double b_star = moment([&](double x) { return f.value(x) * d.score(x) * d.score(x); }) / score2;
        CHECK(b_star > 0.1); // genuinely away from zero
        CHECK(empirical_bhat(f) == doctest::Approx(b_star).epsilon(0.05));

        // plugging the fitted baseline into the estimator lowers the variance
        const std::int64_t T = 50000;
        const double bhat = empirical_bhat(f);
        std::vector<double> plain(static_cast<std::size_t>(T)), based(static_cast<std::size_t>(T));
        map_trials_checked(T, 0, [&](std::int64_t t) {
            const SampleBatch b = bump_batch(d, 2, 99, static_cast<std::uint64_t>(t));
            plain[static_cast<std::size_t>(t)] = estimate_ld(b, f, d, 0.0).scalar();
            based[static_cast<std::size_t>(t)] = estimate_ld(b, f, d, bhat).scalar();
        });
        const auto var_of = [](const std::vector<double>& v) {
            double m = 0.0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            double s = 0.0;
            for (double x : v) s += (x - m) * (x - m);
            return s / static_cast<double>(v.size() - 1);
        };
        CHECK(var_of(based) < var_of(plain));
    }
}

TEST_CASE("Hilbert-Sobolev-Laplace estimator") {
    const RationalBump d(0.0, 1.0);
    const TestFunction1D f = tf_identity();

    // conditional mean per outer point approaches f(x) score(x) as m grows
    SampleBatch one;
    one.points = {0.37};
    const int m = 40000;
    std::vector<double> us(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) us[static_cast<std::size_t>(j)] = uniform01(51, 0, static_cast<std::uint64_t>(j));
    const double got = estimate_hsl(one, f, d, 0.3, m, us).scalar();
    const double want = f.value(0.37) * d.score(0.37);
    CHECK(got == doctest::Approx(want).epsilon(0.02));

    // unbiased for mu
    const MeanSe s = mc_stats(200000, [&](std::int64_t t) {
        const SampleBatch b = bump_batch(d, 1, 53, static_cast<std::uint64_t>(t));
        const double u = uniform01(53, static_cast<std::uint64_t>(t), 1);
        return estimate_hsl(b, f, d, 0.3, 1, std::vector<double>{u}).scalar();
    });
    CHECK(std::fabs(s.mean - closed_form::mu_fx()) < 4.0 * s.se);

    CHECK_THROWS_AS(estimate_hsl(one, f, d, 0.3, 2, us), std::invalid_argument); // wrong uniform count
    CHECK_THROWS_AS(estimate_hsl(one, f, d, 0.3, 0, std::vector<double>{}), std::invalid_argument);
}

TEST_SUITE_END();
