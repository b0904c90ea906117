#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "liouville4/error.hpp"

namespace liouville4 {

/// Gauss-Legendre nodes and weights on [-1, 1].
template <std::size_t N>
struct GaussLegendre {
    std::array<double, N> nodes{};
    std::array<double, N> weights{};
};

namespace detail {

// Newton iteration on P_N started from the Chebyshev-like guess.
template <std::size_t N>
GaussLegendre<N> build_gauss_legendre() {
    static_assert(N >= 1);
    GaussLegendre<N> rule;
    const std::size_t half = (N + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(N) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t n = 2; n <= N; ++n) {
                const double nn = static_cast<double>(n);
                const double p2 = ((2.0 * nn - 1.0) * x * p1 - (nn - 1.0) * p0) / nn;
                p0 = p1;
                p1 = p2;
            }
            // P_N = p1, P_{N-1} = p0
            dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[N - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[N - 1 - i] = w;
    }
    return rule;
}

}  // namespace detail

template <std::size_t N>
const GaussLegendre<N>& gauss_legendre() {
    static const GaussLegendre<N> rule = detail::build_gauss_legendre<N>();
    return rule;
}

/// N-point Gauss-Legendre approximation of the integral of f over [a, b].
template <std::size_t N = 4, class F>
double gauss_integrate(F&& f, double a, double b) {
    const auto& rule = gauss_legendre<N>();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

/// Composite Gauss-Legendre rule over consecutive intervals of `breaks`.
template <std::size_t N = 4, class F>
double composite_integrate(F&& f, std::span<const double> breaks) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) sum += gauss_integrate<N>(f, breaks[i], breaks[i + 1]);
    return sum;
}

/// Break points for integrals over [a, b] whose integrand varies on the
/// scale of the radius itself: uniform cells near the origin, geometric
/// cells (ratio 1 + 1/cells_per_scale) once r exceeds `scale`.
inline std::vector<double> radial_breaks(double a, double b, double scale, int cells_per_scale = 16) {
    detail::require(b >= a && a >= 0.0, "radial_breaks: need 0 <= a <= b");
    detail::require(scale > 0.0, "radial_breaks: scale must be positive");
    std::vector<double> out{a};
    if (b == a) return out;
    const double h0 = scale / cells_per_scale;
    const double ratio = 1.0 + 1.0 / cells_per_scale;
    double r = a;
    while (r < b) {
        const double step = std::max(h0, r * (ratio - 1.0));
        r = std::min(b, r + step);
        if (b - r < 1e-3 * step) r = b;
        out.push_back(r);
    }
    return out;
}

/// Integral over [a, b] with radius-adapted cells; see radial_breaks.
template <std::size_t N = 8, class F>
double radial_integrate(F&& f, double a, double b, double scale, int cells_per_scale = 16) {
    const auto br = radial_breaks(a, b, scale, cells_per_scale);
    return composite_integrate<N>(f, br);
}

}  // namespace liouville4
