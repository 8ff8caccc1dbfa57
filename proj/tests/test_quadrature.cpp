#include <doctest.h>

#include <cmath>

#include "gradest/densities.hpp"
#include "gradest/quadrature.hpp"

using namespace gradest;

TEST_SUITE_BEGIN("quadrature");

TEST_CASE("exact polynomials and the unit integrand") {
    QuadratureSpec q;
    q.abs_tol = 1e-12;
    CHECK(integrate(q, [](double) { return 1.0; }, -1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(integrate(q, [](double x) { return x * x; }, 0.0, 3.0) == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("bump density normalises to one") {
    QuadratureSpec q;
    q.abs_tol = 1e-12;
    const RationalBump b1(0.0, 1.0);
    CHECK(std::fabs(integrate(q, [&](double x) { return b1.density(x); }, -1.0, 1.0) - 1.0) < 1e-10);
    const RationalBump b2(0.0, 0.3);
    CHECK(std::fabs(integrate(q, [&](double x) { return b2.density(x); }, -1.0, 1.0) - 1.0) < 1e-10);
}

TEST_CASE("kinked integrand needs its breakpoint") {
    QuadratureSpec q;
    q.abs_tol = 1e-13;
    q.breakpoints = {0.0};
    const double got = integrate(q, [](double x) { return std::fabs(x); }, -1.0, 1.0);
    CHECK(std::fabs(got - 1.0) < 1e-12);
}

TEST_CASE("jump integrand: one-sided endpoint evaluation at the breakpoint") {
    QuadratureSpec q;
    q.abs_tol = 1e-12;
    q.breakpoints = {0.25};
    // integral of a step function is exact once the panel is split
    const double got = integrate(q, [](double x) { return x < 0.25 ? 1.0 : 3.0; }, 0.0, 1.0);
    CHECK(std::fabs(got - (0.25 + 3.0 * 0.75)) < 1e-12);
}

TEST_CASE("budget exhaustion is an explicit failure") {
    QuadratureSpec q;
    q.abs_tol = 1e-15;
    q.max_depth = 3;
    CHECK_THROWS_AS(integrate(q, [](double x) { return std::sqrt(std::fabs(x - 0.371)); }, -1.0, 1.0),
                    QuadratureError);
}

TEST_CASE("domain and breakpoint validation") {
    QuadratureSpec q;
    CHECK_THROWS_AS(integrate(q, [](double) { return 1.0; }, 1.0, -1.0), std::invalid_argument);
    q.breakpoints = {5.0};
    CHECK_THROWS_AS(integrate(q, [](double) { return 1.0; }, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("gauss_legendre integrates high-degree polynomials exactly") {
    std::vector<double> x, w;
    gauss_legendre(8, x, w);
    double wsum = 0.0;
    for (double wi : w) wsum += wi;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    double m14 = 0.0; // integral of x^14 over [-1,1] = 2/15
    for (std::size_t i = 0; i < x.size(); ++i) m14 += w[i] * std::pow(x[i], 14);
    CHECK(m14 == doctest::Approx(2.0 / 15.0).epsilon(1e-13));
}

TEST_CASE("tensor grid with per-axis breakpoints") {
    QuadratureSpec q;
    q.kind = QuadratureSpec::Kind::tensor_grid_nd;
    q.points_per_axis = 32;
    q.abs_tol = 1e-9;
    const std::vector<double> lo{-1.0, -1.0}, hi{1.0, 1.0};
    const std::vector<std::vector<double>> breaks{{0.2}, {}};
    const double got = integrate_nd(
        q, [](std::span<const double> z) { return std::fabs(z[0] - 0.2) * z[1] * z[1]; }, lo, hi, breaks);
    // integral of |x-0.2| over [-1,1] = (1.2^2 + 0.8^2)/2 = 1.04; of y^2 = 2/3
    CHECK(std::fabs(got - 1.04 * (2.0 / 3.0)) < 1e-9);
}

TEST_CASE("tensor grid certification failure throws") {
    QuadratureSpec q;
    q.kind = QuadratureSpec::Kind::tensor_grid_nd;
    q.points_per_axis = 4;
    q.abs_tol = 1e-12;
    const std::vector<double> lo{0.0}, hi{30.0};
    CHECK_THROWS_AS(integrate_nd(
                        q, [](std::span<const double> z) { return std::sin(25.0 * z[0]); }, lo, hi, {}),
                    QuadratureError);
}

TEST_SUITE_END();
