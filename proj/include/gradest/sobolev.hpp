#pragma once

#include <span>

#include "gradest/quadrature.hpp"
#include "gradest/test_functions.hpp"

namespace gradest {

// sign with sign(0) = 0, the symmetrised convention used throughout.
inline double sign0(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

// --- first-order Sobolev RKHS on the whole real line ---------------------

// k(z,x) = exp(-|x-z|/a) / (2a); a Laplace density in z for fixed x.
double kernel_real(double a, double z, double x);

// w_R(a,f,x,z) = (f(z) + a sign(x-z) f'(z)) k(z,x).
// Satisfies the reproducing identity: integrating over z recovers f(x).
double weight_real(double a, const TestFunction1D& f, double x, double z);

// --- first-order Sobolev RKHS on [-1,1] -----------------------------------

// k_a(z,x) = cosh((1+x_l)/a) cosh((1-x_r)/a) / (a sinh(2/a)) with
// x_l = min(z,x), x_r = max(z,x). Evaluated in log space so small length
// scales do not overflow cosh.
double kernel_interval(double a, double z, double x);

// (P k_a)(z,x) with P = 1 + a d/dz acting on the first argument:
// (1 + sign(x-z) tanh((1 + sign(x-z) z)/a)) k_a(z,x).
// Undefined at z = x, where the one-sided limits differ by exactly 1/a;
// callers take sides explicitly.
double pk_interval(double a, double z, double x);

// w_[-1,1](a,f,x,z) = (f(z) + a f'(z)) Pk_a(z,x).
double weight_interval(double a, const TestFunction1D& f, double x, double z);

// B(H_a,f,x) = a f(-1) k_a(x,-1) - a f(1) k_a(x,1): the boundary correction
// that makes  integral of w_[-1,1] dz + B  equal f(x) exactly.
double boundary_term(double a, const TestFunction1D& f, double x);

// B_a(t) = cosh((1+t)/a) / sinh(2/a), the per-edge coefficient of the
// multivariate boundary sums.
double edge_coefficient(double a, double t);

// --- Laplace evaluation identity -------------------------------------------

// Draw z ~ Laplace(x, a) by inverse CDF; u in (0,1).
double laplace_sample(double x, double a, double u);

// E_{z~Laplace(x,a)}[f(z) + a f'(z) sign(x-z)] - f(x), which is 0 for any f
// with bounded growth. Quadrature mode truncates the expectation to
// |z-x| <= halfwidth_scales * a and splits the panel at z = x.
double laplace_identity_residual_quad(double a, const TestFunction1D& f, double x,
                                      const QuadratureSpec& spec, double halfwidth_scales = 60.0);

// Monte Carlo mode: one draw per supplied uniform.
double laplace_identity_residual_mc(double a, const TestFunction1D& f, double x,
                                    std::span<const double> uniforms);

} // namespace gradest
