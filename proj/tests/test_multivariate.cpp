#include <doctest.h>

#include <cmath>
#include <vector>

#include "gradest/multivariate.hpp"
#include "gradest/quadrature.hpp"
#include "gradest/sobolev.hpp"
#include "gradest/test_functions.hpp"

using namespace gradest;

TEST_SUITE_BEGIN("multivariate");

TEST_CASE("subset enumeration: order, counts, limits") {
    const auto s22 = enumerate_subsets(2, 2);
    REQUIRE(s22.size() == 4);
    CHECK(s22[0].members.empty());
    CHECK(s22[1].members == std::vector<int>{0});
    CHECK(s22[2].members == std::vector<int>{1});
    CHECK(s22[3].members == (std::vector<int>{0, 1}));

    CHECK(enumerate_subsets(3, 1).size() == 4);
    CHECK(enumerate_subsets(3, 3).size() == 8);
    CHECK(enumerate_subsets(10, 10).size() == 1024);
    CHECK_THROWS_WITH_AS(enumerate_subsets(17, 17), doctest::Contains("2^d"), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_subsets(3, 4), std::invalid_argument);
}

TEST_CASE("weight_rd reduces to the univariate real-line weight at d = 1") {
    const TestFunction1D f1 = tf_square();
    const TestFunctionND fnd = tfnd_separable({f1});
    const MultiWeightConfig cfg{0.6, 1};
    for (double x : {-0.4, 0.1, 0.9})
        for (double z : {-0.8, 0.0, 0.5}) {
            const double w1 = weight_real(0.6, f1, x, z);
            const double wn = weight_rd(cfg, fnd, std::vector<double>{x}, std::vector<double>{z});
            CHECK(wn == doctest::Approx(w1).epsilon(1e-12));
        }
}

TEST_CASE("weight_rd full sum matches a hand-rolled subset expansion (d = 2)") {
    const TestFunctionND f = tfnd_coordinate_product(2);
    const MultiWeightConfig cfg{0.7, 2};
    const std::vector<double> x{0.1, 0.2}, z{-0.3, 0.6};
    // oracle: explicit four-term sum for f(z) = z1 z2
    const double a = 0.7;
    const double s1 = sign0(x[0] - z[0]), s2 = sign0(x[1] - z[1]);
    const double sum = z[0] * z[1] + a * z[1] * s1 + a * z[0] * s2 + a * a * s1 * s2;
    const double envelope =
        std::exp(-(std::fabs(x[0] - z[0]) + std::fabs(x[1] - z[1])) / a) / ((2.0 * a) * (2.0 * a));
    CHECK(weight_rd(cfg, f, x, z) == doctest::Approx(sum * envelope).epsilon(1e-13));

    // truncation changes the value when cross partials are present
    const double truncated = weight_rd(MultiWeightConfig{0.7, 1}, f, x, z);
    CHECK(std::fabs(weight_rd(cfg, f, x, z) - truncated) > 1e-6);
}

TEST_CASE("kappa equals pk and carries the 1/a jump") {
    for (double a : {0.2, 1.0})
        for (double z : {-0.6, 0.4})
            for (double x : {-0.1, 0.8}) {
                if (z == x) continue;
                CHECK(kappa_interval(a, z, x) == pk_interval(a, z, x));
            }
    const double below = kappa_interval(0.5, std::nextafter(0.2, -1.0), 0.2);
    const double above = kappa_interval(0.5, std::nextafter(0.2, 1.0), 0.2);
    CHECK(std::fabs(below - above - 2.0) < 1e-12);
}

TEST_CASE("weight_interval_nd: d = 1 reduction, f == 1, collisions") {
    const TestFunction1D f1 = tf_square();
    const TestFunctionND fnd = tfnd_separable({f1});
    const MultiWeightConfig cfg{0.5, 1};
    for (double x : {-0.4, 0.3})
        for (double z : {-0.7, 0.6}) {
            CHECK(weight_interval_nd(cfg, fnd, std::vector<double>{x}, std::vector<double>{z}) ==
                  doctest::Approx(weight_interval(0.5, f1, x, z)).epsilon(1e-12));
        }

    const TestFunctionND one = tfnd_constant(2, 1.0);
    const std::vector<double> x{0.2, -0.3}, z{-0.5, 0.4};
    CHECK(weight_interval_nd(MultiWeightConfig{0.5, 2}, one, x, z) ==
          doctest::Approx(kappa_interval(0.5, z[0], x[0]) * kappa_interval(0.5, z[1], x[1])).epsilon(1e-13));

    CHECK_THROWS_AS(weight_interval_nd(cfg, one, x, std::vector<double>{0.2, 0.9}), std::invalid_argument);
    CHECK_THROWS_AS(weight_interval_nd(cfg, one, x, std::vector<double>{0.4}), std::invalid_argument);
}

TEST_CASE("boundary_sum_nd: univariate reduction and vanishing-boundary f") {
    const TestFunction1D f1 = tf_square();
    const TestFunctionND fnd = tfnd_separable({f1});
    for (double x : {-0.7, 0.0, 0.4})
        CHECK(-boundary_sum_nd(0.5, fnd, std::vector<double>{x}) ==
              doctest::Approx(boundary_term(0.5, f1, x)).epsilon(1e-13));

    // f = (z1^2 - 1)(z2^2 - 1) vanishes on the whole boundary of [-1,1]^2
    const TestFunction1D edge0{"z2m1", [](double z) { return z * z - 1.0; }, [](double z) { return 2.0 * z; }};
    const TestFunctionND f2 = tfnd_separable({edge0, edge0});
    CHECK(boundary_sum_nd(0.5, f2, std::vector<double>{0.3, -0.2}) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("boundary_sum_nd matches an independent epsilon enumeration (d = 2)") {
    const TestFunctionND f = tfnd_sin_cos_2d();
    const double a = 0.7;
    const std::vector<double> x{0.2, -0.5};

    // oracle: loop the 8 nonzero epsilon vectors explicitly
    double expected = 0.0;
    int terms = 0;
    for (int e1 = -1; e1 <= 1; ++e1)
        for (int e2 = -1; e2 <= 1; ++e2) {
            if (e1 == 0 && e2 == 0) continue;
            ++terms;
            const double b1 = e1 == 0 ? 1.0 : e1 * edge_coefficient(a, e1 * x[0]);
            const double b2 = e2 == 0 ? 1.0 : e2 * edge_coefficient(a, e2 * x[1]);
            const std::vector<double> corner{e1 == 0 ? x[0] : static_cast<double>(e1),
                                             e2 == 0 ? x[1] : static_cast<double>(e2)};
            expected += b1 * b2 * f.value(corner);
        }
    CHECK(terms == 8);
    CHECK(boundary_sum_nd(a, f, x) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("compact representation in two dimensions") {
    QuadratureSpec q;
    q.kind = QuadratureSpec::Kind::tensor_grid_nd;
    q.points_per_axis = 64;
    q.abs_tol = 1e-7;

    const TestFunctionND f = tfnd_coordinate_sum(2);
    const double a = 0.5;
    const std::vector<double> x{0.2, -0.3};
    const MultiWeightConfig cfg{a, 2};
    const std::vector<double> lo{-1.0, -1.0}, hi{1.0, 1.0};
    const std::vector<std::vector<double>> breaks{{x[0]}, {x[1]}};
    const double integral = integrate_nd(
        q, [&](std::span<const double> z) { return weight_interval_nd(cfg, f, x, z); }, lo, hi, breaks);
    CHECK(std::fabs(integral - boundary_sum_nd(a, f, x) - f.value(x)) < 1e-5);
}

TEST_CASE("order_cap is exact for additively separable f") {
    const TestFunctionND f = tfnd_coordinate_sum(2);
    const std::vector<double> x{0.2, -0.3}, z{-0.5, 0.4};
    const double full = weight_interval_nd(MultiWeightConfig{0.5, 2}, f, x, z);
    const double truncated = weight_interval_nd(MultiWeightConfig{0.5, 1}, f, x, z);
    CHECK(full == doctest::Approx(truncated).epsilon(1e-15));
}

TEST_SUITE_END();
