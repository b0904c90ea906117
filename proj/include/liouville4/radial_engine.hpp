#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "liouville4/error.hpp"
#include "liouville4/ode.hpp"
#include "liouville4/profile.hpp"
#include "liouville4/quadrature.hpp"

namespace liouville4 {

/// Delta u = -(u'' + 3u'/r) by centered differences on a nonuniform grid.
/// At r = 0 the even extension gives Delta u(0) = -4u''(0). The last node
/// uses a one-sided second-order stencil.
inline std::vector<double> radial_laplacian(const RadialGrid& grid, std::span<const double> u) {
    const auto n = grid.size();
    detail::require(n >= 3, "radial_laplacian: grid needs at least 3 nodes");
    detail::require(u.size() == n, "radial_laplacian: value count does not match grid");
    std::vector<double> out(n);

    // First and second derivative of the quadratic through three points at x.
    auto quad_derivs = [](double x, double x0, double x1, double x2, double f0, double f1, double f2) {
        const double d0 = (x0 - x1) * (x0 - x2);
        const double d1 = (x1 - x0) * (x1 - x2);
        const double d2 = (x2 - x0) * (x2 - x1);
        const double first = f0 * ((x - x1) + (x - x2)) / d0 + f1 * ((x - x0) + (x - x2)) / d1 +
                             f2 * ((x - x0) + (x - x1)) / d2;
        const double second = 2.0 * (f0 / d0 + f1 / d1 + f2 / d2);
        return std::pair{first, second};
    };

    for (std::size_t i = 0; i < n; ++i) {
        const double r = grid[i];
        if (r == 0.0) {
            const double h = grid[1];
            out[i] = -4.0 * (2.0 * (u[1] - u[0]) / (h * h));
            continue;
        }
        std::size_t j = i == 0 ? 1 : (i == n - 1 ? n - 2 : i);
        const auto [d1, d2] = quad_derivs(r, grid[j - 1], grid[j], grid[j + 1], u[j - 1], u[j], u[j + 1]);
        out[i] = -(d2 + 3.0 * d1 / r);
    }
    return out;
}

/// Delta of a radial callable at r by centered differences with spacing h,
/// Richardson-extrapolated once (fourth order).
template <class F>
double radial_laplacian_at(const F& f, double r, double h) {
    auto lap = [&](double hh) {
        if (r == 0.0) return -4.0 * (2.0 * (f(hh) - f(0.0)) / (hh * hh));
        const double fp = f(r + hh), fm = f(r - hh), f0 = f(r);
        const double d2 = (fp - 2.0 * f0 + fm) / (hh * hh);
        const double d1 = (fp - fm) / (2.0 * hh);
        return -(d2 + 3.0 * d1 / r);
    };
    return (4.0 * lap(0.5 * h) - lap(h)) / 3.0;
}

using Weight = std::function<double(double)>;

inline double unit_weight(double) { return 1.0; }

/// Integral of V e^{4u} over the ball B_R, computed radially as
/// 2 pi^2 int_0^R V e^{4u} r^3 dr with a 4-point Gauss rule on each grid
/// interval and u reconstructed from the profile's Hermite interpolant.
template <class W = decltype(&unit_weight)>
double energy(const RadialProfile& profile, double R, const W& weight = &unit_weight) {
    detail::require(R >= profile.grid.front(), "energy: R below the first grid node");
    detail::require(R <= profile.r_max() * (1.0 + 1e-14), "energy: R beyond the profile (no extrapolation)");
    R = std::min(R, profile.r_max());
    const ProfileInterpolant interp(profile);
    auto integrand = [&](double s) { return s * s * s * weight(s) * std::exp(4.0 * interp.value(s)); };
    double sum = 0.0;
    const auto& nodes = profile.grid.nodes();
    for (std::size_t i = 0; i + 1 < nodes.size() && nodes[i] < R; ++i)
        sum += gauss_integrate<4>(integrand, nodes[i], std::min(nodes[i + 1], R));
    return sphere_area * sum;
}

enum class PoissonNormalization { ZeroAtOrigin, ZeroAtRadius };

/// Radial solution of Delta psi = f (minus-sign convention) on [0, r_max]:
/// psi'(r) = -r^{-3} int_0^r s^3 f ds, and
/// psi(r) - psi(0) = -1/2 int_0^r s f(s) (1 - s^2/r^2) ds.
/// Moments are accumulated cell by cell with an 8-point Gauss rule, and
/// evaluation between nodes integrates the partial cell, so values at
/// arbitrary radii carry full quadrature accuracy.
class RadialPoissonSolver {
public:
    RadialPoissonSolver(std::function<double(double)> f, double r_max, PoissonNormalization mode,
                        double anchor = 0.0, double scale = 1.0, int cells_per_scale = 32)
        : f_(std::move(f)), breaks_(radial_breaks(0.0, r_max, scale, cells_per_scale)) {
        detail::require(r_max > 0.0, "solve_radial_poisson: r_max must be positive");
        check_origin_singularity();
        m1_.assign(breaks_.size(), 0.0);
        m3_.assign(breaks_.size(), 0.0);
        for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
            const auto [a1, a3] = cell_moments(breaks_[i], breaks_[i + 1]);
            m1_[i + 1] = m1_[i] + a1;
            m3_[i + 1] = m3_[i] + a3;
        }
        if (mode == PoissonNormalization::ZeroAtRadius) {
            detail::require(anchor > 0.0 && anchor <= r_max, "solve_radial_poisson: anchor radius out of range");
            offset_ = -raw_value(anchor);
        }
    }

    [[nodiscard]] double r_max() const { return breaks_.back(); }

    [[nodiscard]] double value(double r) const { return raw_value(r) + offset_; }

    [[nodiscard]] double derivative(double r) const {
        if (r == 0.0) return 0.0;
        return -moments(r).second / (r * r * r);
    }

    /// int_0^r s^3 f(s) ds.
    [[nodiscard]] double cubic_moment(double r) const { return moments(r).second; }

    [[nodiscard]] double source(double r) const { return f_(r); }

    [[nodiscard]] const std::vector<double>& breaks() const { return breaks_; }

    [[nodiscard]] RadialProfile profile() const {
        RadialProfile p;
        p.grid = RadialGrid(breaks_);
        for (std::size_t i = 0; i < breaks_.size(); ++i) {
            const double r = breaks_[i];
            if (r == 0.0) {
                const double f0 = f_(0.0);
                p.u.push_back(offset_);
                p.du.push_back(0.0);
                p.w.push_back(std::isfinite(f0) ? f0 : f_(1e-6 * breaks_[1]));
                p.dw.push_back(0.0);
                continue;
            }
            p.u.push_back(offset_ - 0.5 * (m1_[i] - m3_[i] / (r * r)));
            p.du.push_back(-m3_[i] / (r * r * r));
            p.w.push_back(f_(r));
            p.dw.push_back(source_derivative(r));
        }
        return p;
    }

private:
    std::function<double(double)> f_;
    std::vector<double> breaks_;
    std::vector<double> m1_;  // int_0^{r_i} s f
    std::vector<double> m3_;  // int_0^{r_i} s^3 f
    double offset_ = 0.0;

    [[nodiscard]] std::pair<double, double> cell_moments(double a, double b) const {
        const auto& rule = gauss_legendre<8>();
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s1 = 0.0, s3 = 0.0;
        for (std::size_t k = 0; k < 8; ++k) {
            const double s = mid + half * rule.nodes[k];
            const double fs = f_(s) * rule.weights[k];
            s1 += s * fs;
            s3 += s * s * s * fs;
        }
        return {half * s1, half * s3};
    }

    [[nodiscard]] std::pair<double, double> moments(double r) const {
        detail::require(r >= 0.0 && r <= breaks_.back() * (1.0 + 1e-14), "RadialPoissonSolver: radius out of range");
        r = std::min(r, breaks_.back());
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), r);
        const std::size_t i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
        if (breaks_[i] == r) return {m1_[i], m3_[i]};
        const auto [a1, a3] = cell_moments(breaks_[i], r);
        return {m1_[i] + a1, m3_[i] + a3};
    }

    [[nodiscard]] double raw_value(double r) const {
        if (r == 0.0) return 0.0;
        const auto [a1, a3] = moments(r);
        return -0.5 * (a1 - a3 / (r * r));
    }

    [[nodiscard]] double source_derivative(double r) const {
        const double h = 1e-4 * std::max(r, 1e-2);
        const double lo = std::max(r - h, 0.5 * r);
        return (f_(r + h) - f_(lo)) / (r + h - lo);
    }

    void check_origin_singularity() const {
        // s^2 |f(s)| must stay bounded as s -> 0.
        double prev = std::abs(f_(1e-3)) * 1e-6;
        int growth = 0;
        for (double s : {1e-4, 1e-5, 1e-6}) {
            const double cur = std::abs(f_(s)) * s * s;
            if (!std::isfinite(cur)) throw DomainError("solve_radial_poisson: source not finite near the origin");
            if (cur > 5.0 * prev && cur > 1e-300) ++growth;
            prev = cur;
        }
        if (growth == 3) throw DomainError("solve_radial_poisson: source singular worse than r^-2 at the origin");
    }
};

/// Delta psi = f with psi(0) = 0 or psi(anchor) = 0, sampled on a
/// radius-adapted grid of [0, r_max].
inline RadialProfile solve_radial_poisson(std::function<double(double)> f, double r_max, PoissonNormalization mode,
                                          double anchor = 0.0) {
    return RadialPoissonSolver(std::move(f), r_max, mode, anchor).profile();
}

}  // namespace liouville4
