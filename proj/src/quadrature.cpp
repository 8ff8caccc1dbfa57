#include "gradest/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace gradest {

namespace {

struct Simpson {
    const std::function<double(double)>& g;
    int max_depth;

    double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) const {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = g(lm);
        const double frm = g(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
        if (depth >= max_depth)
            throw QuadratureError("integrate: tolerance not reached within depth budget");
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
               recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    }

    double panel(double a, double b, double fa, double fb, double tol) const {
        const double m = 0.5 * (a + b);
        const double fm = g(m);
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        return recurse(a, b, fa, fm, fb, whole, tol, 0);
    }
};

} // namespace

double integrate(const QuadratureSpec& spec, const std::function<double(double)>& g, double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("integrate: domain must be finite with lo < hi");

    std::vector<double> cuts{lo};
    for (double b : spec.breakpoints) {
        if (!(b > lo && b < hi))
            throw std::invalid_argument("integrate: breakpoints must lie strictly inside the domain");
        cuts.push_back(b);
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());

    const Simpson simpson{g, spec.max_depth};
    const double total_len = hi - lo;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        if (!(b > a)) continue; // duplicate breakpoint
        // one-sided endpoint values at breakpoints
        const bool a_is_cut = i > 0;
        const bool b_is_cut = i + 2 < cuts.size();
        const double fa = g(a_is_cut ? std::nextafter(a, b) : a);
        const double fb = g(b_is_cut ? std::nextafter(b, a) : b);
        const double tol = spec.abs_tol * (b - a) / total_len;
        sum += simpson.panel(a, b, fa, fb, std::max(tol, 1e-300));
    }
    return sum;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-like initial guess, then Newton on P_n.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
}

namespace {

// Per-axis panel decomposition with Gauss-Legendre nodes mapped into each panel.
struct AxisGrid {
    std::vector<double> nodes;   // all panels concatenated
    std::vector<double> weights;
};

AxisGrid build_axis(double lo, double hi, std::span<const double> breaks, const std::vector<double>& gl_x,
                    const std::vector<double>& gl_w) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("integrate_nd: domain must be finite with lo < hi");
    std::vector<double> cuts{lo};
    for (double b : breaks) {
        if (!(b > lo && b < hi))
            throw std::invalid_argument("integrate_nd: breakpoints must lie strictly inside the domain");
        cuts.push_back(b);
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());

    AxisGrid grid;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double a = cuts[p];
        const double b = cuts[p + 1];
        if (!(b > a)) continue;
        const double mid = 0.5 * (a + b);
        const double hw = 0.5 * (b - a);
        for (std::size_t i = 0; i < gl_x.size(); ++i) {
            grid.nodes.push_back(mid + hw * gl_x[i]);
            grid.weights.push_back(hw * gl_w[i]);
        }
    }
    return grid;
}

double tensor_pass(const std::function<double(std::span<const double>)>& g, const std::vector<AxisGrid>& axes) {
    const int d = static_cast<int>(axes.size());
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> z(static_cast<std::size_t>(d));
    double sum = 0.0;
    while (true) {
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            z[static_cast<std::size_t>(k)] = axes[static_cast<std::size_t>(k)].nodes[idx[static_cast<std::size_t>(k)]];
            w *= axes[static_cast<std::size_t>(k)].weights[idx[static_cast<std::size_t>(k)]];
        }
        sum += w * g(z);
        int k = d - 1;
        while (k >= 0) {
            if (++idx[static_cast<std::size_t>(k)] < axes[static_cast<std::size_t>(k)].nodes.size()) break;
            idx[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return sum;
}

} // namespace

double integrate_nd(const QuadratureSpec& spec,
                    const std::function<double(std::span<const double>)>& g,
                    std::span<const double> lo, std::span<const double> hi,
                    std::span<const std::vector<double>> breakpoints_per_axis) {
    const int d = static_cast<int>(lo.size());
    if (d < 1 || hi.size() != lo.size())
        throw std::invalid_argument("integrate_nd: lo/hi dimension mismatch");
    if (!breakpoints_per_axis.empty() && static_cast<int>(breakpoints_per_axis.size()) != d)
        throw std::invalid_argument("integrate_nd: breakpoints dimension mismatch");

    const auto run = [&](int points) {
        std::vector<double> gx, gw;
        gauss_legendre(points, gx, gw);
        std::vector<AxisGrid> axes;
        axes.reserve(static_cast<std::size_t>(d));
        static const std::vector<double> no_breaks;
        for (int k = 0; k < d; ++k) {
            const auto& br = breakpoints_per_axis.empty() ? no_breaks : breakpoints_per_axis[static_cast<std::size_t>(k)];
            axes.push_back(build_axis(lo[static_cast<std::size_t>(k)], hi[static_cast<std::size_t>(k)], br, gx, gw));
        }
        return tensor_pass(g, axes);
    };

    const double full = run(spec.points_per_axis);
    const double coarse = run(std::max(2, spec.points_per_axis / 2));
    if (std::fabs(full - coarse) > spec.abs_tol)
        throw QuadratureError("integrate_nd: tolerance not certified by the half-order comparison");
    return full;
}

} // namespace gradest
