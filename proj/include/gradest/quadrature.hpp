#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace gradest {

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Oracle configuration. Integrands with kinks or jumps must list the interior
// abscissae in `breakpoints`; panels are always split there. When a panel
// endpoint coincides with a breakpoint the integrand is evaluated one ulp
// inside the panel, so jump integrands see the correct one-sided value.
struct QuadratureSpec {
    enum class Kind { adaptive_1d, tensor_grid_nd };

    Kind kind = Kind::adaptive_1d;
    double abs_tol = 1e-10;
    int max_depth = 48;       // adaptive_1d recursion limit per panel
    int points_per_axis = 64; // tensor_grid_nd Gauss-Legendre points per panel
    std::vector<double> breakpoints;
};

// Adaptive Simpson over the finite domain [lo, hi]. Throws QuadratureError if
// the requested tolerance cannot be certified within the depth budget; never
// returns a silent best-effort value.
double integrate(const QuadratureSpec& spec, const std::function<double(double)>& g, double lo, double hi);

// Tensor-product Gauss-Legendre over the finite box [lo, hi]. Each axis is
// split at its breakpoints. The error estimate is the difference against a
// half-order rule; exceeding abs_tol throws.
double integrate_nd(const QuadratureSpec& spec,
                    const std::function<double(std::span<const double>)>& g,
                    std::span<const double> lo, std::span<const double> hi,
                    std::span<const std::vector<double>> breakpoints_per_axis);

// Gauss-Legendre nodes/weights on [-1,1] (Newton on the Legendre recurrence).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace gradest
