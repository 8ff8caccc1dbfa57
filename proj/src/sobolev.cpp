#include "gradest/sobolev.hpp"

#include <cmath>
#include <stdexcept>

namespace gradest {

namespace {

constexpr double LN2 = 0.6931471805599453094;

void require_scale(double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("length scale a must be finite and > 0");
}

void require_in_interval(double t, const char* what) {
    if (!(t >= -1.0 && t <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [-1,1]");
}

// log cosh(t) and log sinh(t), stable for large arguments.
double log_cosh(double t) {
    const double u = std::fabs(t);
    return u + std::log1p(std::exp(-2.0 * u)) - LN2;
}

double log_sinh(double t) { // t > 0
    return t + std::log1p(-std::exp(-2.0 * t)) - LN2;
}

} // namespace

double kernel_real(double a, double z, double x) {
    require_scale(a);
    return std::exp(-std::fabs(x - z) / a) / (2.0 * a);
}

double weight_real(double a, const TestFunction1D& f, double x, double z) {
    require_scale(a);
    return (f.value(z) + a * sign0(x - z) * f.deriv(z)) * kernel_real(a, z, x);
}

double kernel_interval(double a, double z, double x) {
    require_scale(a);
    require_in_interval(z, "z");
    require_in_interval(x, "x");
    const double xl = std::min(z, x);
    const double xr = std::max(z, x);
    return std::exp(log_cosh((1.0 + xl) / a) + log_cosh((1.0 - xr) / a) - std::log(a) - log_sinh(2.0 / a));
}

double pk_interval(double a, double z, double x) {
    if (z == x)
        throw std::invalid_argument("pk_interval: undefined at z = x (one-sided limits differ); evaluate a side");
    const double s = sign0(x - z);
    return (1.0 + s * std::tanh((1.0 + s * z) / a)) * kernel_interval(a, z, x);
}

double weight_interval(double a, const TestFunction1D& f, double x, double z) {
    return (f.value(z) + a * f.deriv(z)) * pk_interval(a, z, x);
}

double boundary_term(double a, const TestFunction1D& f, double x) {
    require_scale(a);
    require_in_interval(x, "x");
    return a * f.value(-1.0) * kernel_interval(a, x, -1.0) - a * f.value(1.0) * kernel_interval(a, x, 1.0);
}

double edge_coefficient(double a, double t) {
    require_scale(a);
    return std::exp(log_cosh((1.0 + t) / a) - log_sinh(2.0 / a));
}

double laplace_sample(double x, double a, double u) {
    require_scale(a);
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("laplace_sample: u must lie in (0,1)");
    return u < 0.5 ? x + a * std::log(2.0 * u) : x - a * std::log(2.0 * (1.0 - u));
}

double laplace_identity_residual_quad(double a, const TestFunction1D& f, double x,
                                      const QuadratureSpec& spec, double halfwidth_scales) {
    require_scale(a);
    const double w = halfwidth_scales * a;
    QuadratureSpec s = spec;
    s.breakpoints = {x};
    const auto integrand = [&](double z) {
        return kernel_real(a, z, x) * (f.value(z) + a * f.deriv(z) * sign0(x - z));
    };
    return integrate(s, integrand, x - w, x + w) - f.value(x);
}

double laplace_identity_residual_mc(double a, const TestFunction1D& f, double x,
                                    std::span<const double> uniforms) {
    require_scale(a);
    if (uniforms.empty()) throw std::invalid_argument("laplace_identity_residual_mc: need at least one draw");
    double acc = 0.0;
    for (double u : uniforms) {
        const double z = laplace_sample(x, a, u);
        acc += f.value(z) + a * f.deriv(z) * sign0(x - z);
    }
    return acc / static_cast<double>(uniforms.size()) - f.value(x);
}

} // namespace gradest
