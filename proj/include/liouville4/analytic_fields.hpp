#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "liouville4/error.hpp"

namespace liouville4 {

/// Q(r) e^{-c r^2} for a polynomial Q; closed under d/dr, so every radial
/// derivative is available exactly.
class GaussPoly {
public:
    GaussPoly() = default;
    GaussPoly(std::vector<double> coeffs, double c) : q_(std::move(coeffs)), c_(c) {}

    [[nodiscard]] double operator()(double r) const {
        double acc = 0.0;
        for (std::size_t i = q_.size(); i-- > 0;) acc = acc * r + q_[i];
        return acc * std::exp(-c_ * r * r);
    }

    [[nodiscard]] GaussPoly derivative() const {
        std::vector<double> d(q_.size() + 1, 0.0);
        for (std::size_t i = 1; i < q_.size(); ++i) d[i - 1] += static_cast<double>(i) * q_[i];
        for (std::size_t i = 0; i < q_.size(); ++i) d[i + 1] -= 2.0 * c_ * q_[i];
        return {std::move(d), c_};
    }

    /// Division by r; the constant coefficient must vanish (odd functions).
    [[nodiscard]] GaussPoly divided_by_r() const {
        detail::require(q_.empty() || q_[0] == 0.0, "GaussPoly: division by r needs a zero constant term");
        if (q_.empty()) return *this;
        return {std::vector<double>(q_.begin() + 1, q_.end()), c_};
    }

    [[nodiscard]] GaussPoly operator+(const GaussPoly& o) const {
        detail::require(c_ == o.c_, "GaussPoly: mismatched Gaussian rates");
        std::vector<double> s(std::max(q_.size(), o.q_.size()), 0.0);
        for (std::size_t i = 0; i < q_.size(); ++i) s[i] += q_[i];
        for (std::size_t i = 0; i < o.q_.size(); ++i) s[i] += o.q_[i];
        return {std::move(s), c_};
    }

    [[nodiscard]] GaussPoly operator*(double a) const {
        auto s = q_;
        for (auto& x : s) x *= a;
        return {std::move(s), c_};
    }

    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return q_; }
    [[nodiscard]] double rate() const noexcept { return c_; }

private:
    std::vector<double> q_;
    double c_ = 0.0;
};

/// -(f'' + 3 f'/r) for an even GaussPoly f.
inline GaussPoly radial_laplacian(const GaussPoly& f) {
    const auto d1 = f.derivative();
    return (d1.derivative() + d1.divided_by_r() * 3.0) * -1.0;
}

/// Smooth radial field u = Q(r^2) e^{-c r^2} with exact u', Delta u,
/// (Delta u)' and Delta^2 u. Models RadialField.
class PolyGaussField {
public:
    PolyGaussField(std::vector<double> even_coeffs, double c, double max_radius)
        : R_(max_radius) {
        detail::require(c >= 0.0, "PolyGaussField: Gaussian rate must be nonnegative");
        std::vector<double> q(2 * even_coeffs.size(), 0.0);
        for (std::size_t j = 0; j < even_coeffs.size(); ++j) q[2 * j] = even_coeffs[j];
        u_ = GaussPoly(std::move(q), c);
        du_ = u_.derivative();
        w_ = liouville4::radial_laplacian(u_);
        dw_ = w_.derivative();
        bilap_ = liouville4::radial_laplacian(w_);
    }

    [[nodiscard]] double value(double r) const { return u_(r); }
    [[nodiscard]] double derivative(double r) const { return du_(r); }
    [[nodiscard]] double laplacian(double r) const { return w_(r); }
    [[nodiscard]] double laplacian_derivative(double r) const { return dw_(r); }
    [[nodiscard]] double bilaplacian(double r) const { return bilap_(r); }
    [[nodiscard]] double max_radius() const { return R_; }

private:
    GaussPoly u_, du_, w_, dw_, bilap_;
    double R_;
};

/// Uniform double in [lo, hi) from a 64-bit engine, independent of the
/// standard library's distribution implementation.
inline double uniform_from(std::mt19937_64& rng, double lo, double hi) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
}

/// Seeded random smooth radial field: degree-3 polynomial in r^2 with
/// coefficients in [-1, 1] times e^{-c r^2}, c in [0.25, 2].
inline PolyGaussField random_poly_gauss(std::mt19937_64& rng, double max_radius) {
    std::vector<double> coeffs(4);
    for (auto& x : coeffs) x = uniform_from(rng, -1.0, 1.0);
    const double c = uniform_from(rng, 0.25, 2.0);
    return {std::move(coeffs), c, max_radius};
}

}  // namespace liouville4
