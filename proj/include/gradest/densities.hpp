#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradest {

enum class SupportKind { real_line, interval };

struct Support {
    SupportKind kind = SupportKind::real_line;
    double lo = 0.0; // valid only for interval support
    double hi = 0.0;
};

// Inverse of the standard normal CDF (Wichura's AS 241, double precision).
double normal_quantile(double u);

// Truncated rational density p(x|theta) = 1 / (Z(gamma) (gamma + (x-theta)^2))
// on [theta-1, theta+1], zero outside, with Z(gamma) = 2 atan(1/sqrt(gamma)) / sqrt(gamma).
//
// `floor` is the gamma parameter: it bounds the density away from zero on the
// support and controls how harsh the 1/p factor of the pairwise estimators gets.
struct RationalBump {
    double theta = 0.0;
    double floor = 1.0;

    RationalBump(double theta_, double floor_) : theta(theta_), floor(floor_) {
        if (!(floor > 0.0) || !std::isfinite(floor) || !std::isfinite(theta))
            throw std::invalid_argument("RationalBump: floor must be finite and > 0");
    }

    double normalizer() const { // Z(gamma)
        const double s = std::sqrt(floor);
        return 2.0 / s * std::atan(1.0 / s);
    }

    double density(double x) const {
        if (!std::isfinite(x)) throw std::invalid_argument("RationalBump::density: non-finite x");
        const double d = x - theta;
        if (std::fabs(d) > 1.0) return 0.0;
        return 1.0 / (normalizer() * (floor + d * d));
    }

    // d/dtheta log p. Defined only strictly inside the support: the density
    // jumps at the edges, so a boundary point is a bug upstream, not a value.
    double score(double x) const {
        const double d = x - theta;
        if (!(std::fabs(d) < 1.0))
            throw std::domain_error("RationalBump::score: x on or outside the support boundary");
        return 2.0 * d / (floor + d * d);
    }

    double cdf(double x) const {
        const double d = x - theta;
        if (d <= -1.0) return 0.0;
        if (d >= 1.0) return 1.0;
        const double s = std::sqrt(floor);
        return 0.5 + 0.5 * std::atan(d / s) / std::atan(1.0 / s);
    }

    // Inverse-CDF sampler; u in the open interval (0,1).
    double sample(double u) const {
        if (!(u > 0.0 && u < 1.0))
            throw std::invalid_argument("RationalBump::sample: u must lie in (0,1)");
        const double s = std::sqrt(floor);
        double x = theta + s * std::tan((2.0 * u - 1.0) * std::atan(1.0 / s));
        // Rounding may park x exactly on the boundary; the contract is the open interval.
        if (x - theta >= 1.0) x = std::nextafter(theta + 1.0, theta);
        if (x - theta <= -1.0) x = std::nextafter(theta - 1.0, theta);
        return x;
    }

    Support support() const { return {SupportKind::interval, theta - 1.0, theta + 1.0}; }
};

// N(mu, sigma^2) with the location parameter playing the role of theta.
struct LocationScaleGaussian {
    double mu = 0.0;
    double sigma = 1.0;

    LocationScaleGaussian(double mu_, double sigma_) : mu(mu_), sigma(sigma_) {
        if (!(sigma > 0.0)) throw std::invalid_argument("LocationScaleGaussian: sigma must be > 0");
    }

    double density(double x) const {
        const double z = (x - mu) / sigma;
        return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
    }

    double score(double x) const { return (x - mu) / (sigma * sigma); } // d/dmu log p

    double sample(double u) const { return mu + sigma * normal_quantile(u); }

    double reparam(double eps) const { return mu + sigma * eps; } // t_theta(eps)
    double reparam_dtheta(double /*eps*/) const { return 1.0; }   // d t_theta / d mu

    Support support() const { return {SupportKind::real_line, 0.0, 0.0}; }
};

// Product of independent rational bumps, one per coordinate. theta is the
// vector of per-coordinate locations; score is the per-component score vector.
struct ProductBump {
    std::vector<double> thetas;
    double floor = 1.0;

    ProductBump(std::vector<double> thetas_, double floor_) : thetas(std::move(thetas_)), floor(floor_) {
        if (!(floor > 0.0)) throw std::invalid_argument("ProductBump: floor must be > 0");
        if (thetas.empty()) throw std::invalid_argument("ProductBump: empty theta");
    }

    int dim() const { return static_cast<int>(thetas.size()); }

    RationalBump component(int i) const { return RationalBump(thetas[static_cast<std::size_t>(i)], floor); }

    double density(std::span<const double> x) const {
        check_dim(x);
        double p = 1.0;
        for (int i = 0; i < dim(); ++i) p *= component(i).density(x[static_cast<std::size_t>(i)]);
        return p;
    }

    void score(std::span<const double> x, std::span<double> out) const {
        check_dim(x);
        for (int i = 0; i < dim(); ++i) out[static_cast<std::size_t>(i)] = component(i).score(x[static_cast<std::size_t>(i)]);
    }

    double sample_component(int i, double u) const { return component(i).sample(u); }

    Support axis_support(int i) const { return component(i).support(); }
    SupportKind support_kind() const { return SupportKind::interval; }

private:
    void check_dim(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != dim())
            throw std::invalid_argument("ProductBump: dimension mismatch");
    }
};

// Product of independent N(mu_i, sigma^2); support is all of R^d.
struct ProductGaussian {
    std::vector<double> mus;
    double sigma = 1.0;

    ProductGaussian(std::vector<double> mus_, double sigma_) : mus(std::move(mus_)), sigma(sigma_) {
        if (!(sigma > 0.0)) throw std::invalid_argument("ProductGaussian: sigma must be > 0");
        if (mus.empty()) throw std::invalid_argument("ProductGaussian: empty mu");
    }

    int dim() const { return static_cast<int>(mus.size()); }

    double density(std::span<const double> x) const {
        double p = 1.0;
        for (int i = 0; i < dim(); ++i)
            p *= LocationScaleGaussian(mus[static_cast<std::size_t>(i)], sigma).density(x[static_cast<std::size_t>(i)]);
        return p;
    }

    void score(std::span<const double> x, std::span<double> out) const {
        for (int i = 0; i < dim(); ++i)
            out[static_cast<std::size_t>(i)] = (x[static_cast<std::size_t>(i)] - mus[static_cast<std::size_t>(i)]) / (sigma * sigma);
    }

    double sample_component(int i, double u) const {
        return mus[static_cast<std::size_t>(i)] + sigma * normal_quantile(u);
    }

    Support axis_support(int) const { return {SupportKind::real_line, 0.0, 0.0}; }
    SupportKind support_kind() const { return SupportKind::real_line; }
};

} // namespace gradest
