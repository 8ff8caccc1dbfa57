#pragma once

#include <span>
#include <vector>

#include "gradest/test_functions.hpp"

namespace gradest {

// Sorted subset of coordinate indices {0, ..., dim-1}.
struct IndexSubset {
    int dim = 0;
    std::vector<int> members;
};

// All subsets with |J| <= cap, ordered by size then lexicographically.
// The fixed order makes the floating-point subset sums reproducible.
// d is capped at 16: the exact sums cost 2^d terms.
std::vector<IndexSubset> enumerate_subsets(int d, int cap);

struct MultiWeightConfig {
    double a = 1.0;
    int order_cap = 1; // max |J| retained; set to d for the exact sum
};

// w_{R^d}(a,f,x,z): the subset-derivative weight of the non-compact
// d-dimensional representation,
//   [ sum_J a^|J| d_J f(z) prod_{k in J} sign(x_k - z_k) ] exp(-|x-z|_1/a) / (2a)^d,
// truncated to |J| <= order_cap.
double weight_rd(const MultiWeightConfig& cfg, const TestFunctionND& f,
                 std::span<const double> x, std::span<const double> z);

// kappa_a(z,x) = r_a(z,x) k_a(z,x); numerically identical to pk_interval.
double kappa_interval(double a, double z, double x);

// w_{[-1,1]^d}(a,f,x,z) = [ sum_J a^|J| d_J f(z) ] prod_i kappa_a(z_i, x_i),
// truncated to |J| <= order_cap. Requires z_i != x_i for every coordinate.
double weight_interval_nd(const MultiWeightConfig& cfg, const TestFunctionND& f,
                          std::span<const double> x, std::span<const double> z);

// Boundary sum of the compact representation:
//   sum_{eps in {-1,0,1}^d \ {0}} B_a^eps(x) f(x^eps),
// with per-coordinate factor 1 (eps=0), B_a(x_i) (eps=+1), -B_a(-x_i) (eps=-1)
// and x_i^eps = x_i, +1, -1 respectively. The representation reads
//   f(x) = integral of w_{[-1,1]^d} dz - boundary_sum_nd(a,f,x).
double boundary_sum_nd(double a, const TestFunctionND& f, std::span<const double> x);

} // namespace gradest
