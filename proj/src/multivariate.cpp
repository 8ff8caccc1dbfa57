#include "gradest/multivariate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gradest/sobolev.hpp"

namespace gradest {

std::vector<IndexSubset> enumerate_subsets(int d, int cap) {
    if (d < 0 || d > 16)
        throw std::invalid_argument("enumerate_subsets: d = " + std::to_string(d) +
                                    " out of range; the exact sum costs 2^d terms, d <= 16 supported");
    if (cap < 0 || cap > d) throw std::invalid_argument("enumerate_subsets: cap must satisfy 0 <= cap <= d");

    std::vector<IndexSubset> out;
    out.push_back({d, {}});
    for (int size = 1; size <= cap; ++size) {
        std::vector<int> comb(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) comb[static_cast<std::size_t>(i)] = i;
        while (true) {
            out.push_back({d, comb});
            int i = size - 1;
            while (i >= 0 && comb[static_cast<std::size_t>(i)] == d - size + i) --i;
            if (i < 0) break;
            ++comb[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < size; ++j)
                comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return out;
}

namespace {

void check_dims(const TestFunctionND& f, std::span<const double> x, std::span<const double> z) {
    if (static_cast<int>(x.size()) != f.dim || static_cast<int>(z.size()) != f.dim)
        throw std::invalid_argument("multivariate weight: point dimension does not match f.dim");
}

} // namespace

double weight_rd(const MultiWeightConfig& cfg, const TestFunctionND& f,
                 std::span<const double> x, std::span<const double> z) {
    check_dims(f, x, z);
    const int d = f.dim;
    if (cfg.order_cap < 0 || cfg.order_cap > d)
        throw std::invalid_argument("weight_rd: order_cap must satisfy 0 <= order_cap <= d");

    double l1 = 0.0;
    for (int k = 0; k < d; ++k) l1 += std::fabs(x[static_cast<std::size_t>(k)] - z[static_cast<std::size_t>(k)]);

    double sum = 0.0;
    for (const IndexSubset& J : enumerate_subsets(d, cfg.order_cap)) {
        double term = f.partial(J.members, z) * std::pow(cfg.a, static_cast<double>(J.members.size()));
        for (int k : J.members)
            term *= sign0(x[static_cast<std::size_t>(k)] - z[static_cast<std::size_t>(k)]);
        sum += term;
    }
    return sum * std::exp(-l1 / cfg.a) / std::pow(2.0 * cfg.a, static_cast<double>(d));
}

double kappa_interval(double a, double z, double x) { return pk_interval(a, z, x); }

double weight_interval_nd(const MultiWeightConfig& cfg, const TestFunctionND& f,
                          std::span<const double> x, std::span<const double> z) {
    check_dims(f, x, z);
    const int d = f.dim;
    if (cfg.order_cap < 0 || cfg.order_cap > d)
        throw std::invalid_argument("weight_interval_nd: order_cap must satisfy 0 <= order_cap <= d");

    double kprod = 1.0;
    for (int i = 0; i < d; ++i) {
        if (z[static_cast<std::size_t>(i)] == x[static_cast<std::size_t>(i)])
            throw std::invalid_argument("weight_interval_nd: coordinate collision z_i = x_i");
        kprod *= kappa_interval(cfg.a, z[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)]);
    }

    double sum = 0.0;
    for (const IndexSubset& J : enumerate_subsets(d, cfg.order_cap))
        sum += f.partial(J.members, z) * std::pow(cfg.a, static_cast<double>(J.members.size()));
    return sum * kprod;
}

double boundary_sum_nd(double a, const TestFunctionND& f, std::span<const double> x) {
    if (static_cast<int>(x.size()) != f.dim)
        throw std::invalid_argument("boundary_sum_nd: point dimension does not match f.dim");
    const int d = f.dim;
    if (d > 16) throw std::invalid_argument("boundary_sum_nd: d <= 16 supported (3^d boundary terms)");

    std::vector<int> eps(static_cast<std::size_t>(d), -1); // counts through {-1,0,1}^d
    std::vector<double> corner(static_cast<std::size_t>(d));
    double sum = 0.0;
    while (true) {
        bool all_zero = true;
        double coeff = 1.0;
        for (int i = 0; i < d; ++i) {
            const int e = eps[static_cast<std::size_t>(i)];
            const double xi = x[static_cast<std::size_t>(i)];
            if (e == 0) {
                corner[static_cast<std::size_t>(i)] = xi;
            } else {
                all_zero = false;
                corner[static_cast<std::size_t>(i)] = static_cast<double>(e);
                coeff *= static_cast<double>(e) * edge_coefficient(a, e * xi);
            }
        }
        if (!all_zero) sum += coeff * f.value(corner);

        int i = d - 1;
        while (i >= 0) {
            if (++eps[static_cast<std::size_t>(i)] <= 1) break;
            eps[static_cast<std::size_t>(i)] = -1;
            --i;
        }
        if (i < 0) break;
    }
    return sum;
}

} // namespace gradest
