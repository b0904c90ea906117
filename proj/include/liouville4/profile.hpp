#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "liouville4/error.hpp"

namespace liouville4 {

/// A radial function on R^4 that can report its value, radial derivative,
/// Laplacian (minus-sign convention) and the radial derivative of the
/// Laplacian at any radius inside its domain.
template <class F>
concept RadialField = requires(const F& f, double r) {
    { f.value(r) } -> std::convertible_to<double>;
    { f.derivative(r) } -> std::convertible_to<double>;
    { f.laplacian(r) } -> std::convertible_to<double>;
    { f.laplacian_derivative(r) } -> std::convertible_to<double>;
    { f.max_radius() } -> std::convertible_to<double>;
};

/// Strictly increasing radii. When origin_included is set the first node is
/// r = 0 and values stored there are even-extension limits.
class RadialGrid {
public:
    RadialGrid() = default;

    explicit RadialGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
        detail::require(!nodes_.empty(), "RadialGrid: empty");
        detail::require(nodes_.front() >= 0.0, "RadialGrid: negative radius");
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            detail::require(nodes_[i] > nodes_[i - 1], "RadialGrid: nodes must be strictly increasing");
        origin_included_ = nodes_.front() == 0.0;
    }

    [[nodiscard]] const std::vector<double>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return nodes_[i]; }
    [[nodiscard]] double front() const { return nodes_.front(); }
    [[nodiscard]] double back() const { return nodes_.back(); }
    [[nodiscard]] bool origin_included() const noexcept { return origin_included_; }

    /// Index i with nodes[i] <= r <= nodes[i+1]; r must lie in [front, back].
    [[nodiscard]] std::size_t locate(double r) const {
        detail::require(r >= nodes_.front() && r <= nodes_.back(), "RadialGrid::locate: radius outside grid");
        if (nodes_.size() < 2) return 0;
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
        std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
        if (i == 0) return 0;
        return std::min(i - 1, nodes_.size() - 2);
    }

private:
    std::vector<double> nodes_;
    bool origin_included_ = false;
};

/// Sampled radial solution: u, u', w = Delta u and w' on a common grid.
struct RadialProfile {
    RadialGrid grid;
    std::vector<double> u;
    std::vector<double> du;
    std::vector<double> w;
    std::vector<double> dw;

    [[nodiscard]] std::size_t size() const noexcept { return grid.size(); }
    [[nodiscard]] double r_max() const { return grid.back(); }

    void validate() const {
        const auto n = grid.size();
        detail::require(u.size() == n && du.size() == n && w.size() == n && dw.size() == n,
                        "RadialProfile: column length mismatch");
        if (grid.origin_included() && n > 0)
            detail::require(du[0] == 0.0 && dw[0] == 0.0, "RadialProfile: odd derivatives must vanish at r = 0");
    }

    /// u'' recovered from the stored Laplacian; at r = 0, w(0) = -4 u''(0).
    [[nodiscard]] double second_derivative(std::size_t i) const {
        const double r = grid[i];
        return r == 0.0 ? -0.25 * w[i] : -w[i] - 3.0 * du[i] / r;
    }
};

/// Builds a profile by sampling an analytic field on the given radii.
template <RadialField F>
RadialProfile sample_profile(const F& field, std::vector<double> radii) {
    RadialProfile p;
    p.grid = RadialGrid(std::move(radii));
    const auto n = p.grid.size();
    p.u.resize(n);
    p.du.resize(n);
    p.w.resize(n);
    p.dw.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = p.grid[i];
        p.u[i] = field.value(r);
        p.du[i] = r == 0.0 ? 0.0 : field.derivative(r);
        p.w[i] = field.laplacian(r);
        p.dw[i] = r == 0.0 ? 0.0 : field.laplacian_derivative(r);
    }
    return p;
}

/// Piecewise Hermite reconstruction of a profile: quintic in u (using u''
/// from the stored Laplacian) and cubic in w, or quintic in w for profiles
/// built with on_solution.
class ProfileInterpolant {
public:
    explicit ProfileInterpolant(const RadialProfile& profile) : p_(&profile) {
        detail::require(profile.size() >= 2, "ProfileInterpolant: need at least two nodes");
    }

    /// Interpolant of a profile that solves Delta^2 u = V e^{4u}. The
    /// equation supplies w'' at the nodes, so w is quintic as well. An empty
    /// weight means V = 1.
    static ProfileInterpolant on_solution(const RadialProfile& profile, std::function<double(double)> weight = {}) {
        ProfileInterpolant out(profile);
        out.weight_ = std::move(weight);
        out.solution_ = true;
        return out;
    }

    [[nodiscard]] const RadialProfile& profile() const noexcept { return *p_; }
    [[nodiscard]] double max_radius() const { return p_->r_max(); }
    [[nodiscard]] double min_radius() const { return p_->grid.front(); }

    [[nodiscard]] double value(double r) const { return eval_u(r).first; }
    [[nodiscard]] double derivative(double r) const { return eval_u(r).second; }
    [[nodiscard]] double laplacian(double r) const { return eval_w(r).first; }
    [[nodiscard]] double laplacian_derivative(double r) const { return eval_w(r).second; }

    /// (u, u') at r.
    [[nodiscard]] std::pair<double, double> eval_u(double r) const {
        const auto i = p_->grid.locate(r);
        const double r0 = p_->grid[i];
        const double h = p_->grid[i + 1] - r0;
        return quintic((r - r0) / h, h, p_->u[i], p_->du[i], p_->second_derivative(i), p_->u[i + 1], p_->du[i + 1],
                       p_->second_derivative(i + 1));
    }

    /// (w, w') at r.
    [[nodiscard]] std::pair<double, double> eval_w(double r) const {
        const auto i = p_->grid.locate(r);
        const double r0 = p_->grid[i];
        const double h = p_->grid[i + 1] - r0;
        const double t = (r - r0) / h;
        if (solution_) return quintic(t, h, p_->w[i], p_->dw[i], w_second(i), p_->w[i + 1], p_->dw[i + 1], w_second(i + 1));
        const double c0 = p_->w[i];
        const double c1 = h * p_->dw[i];
        const double a = p_->w[i + 1] - c0 - c1;
        const double b = h * p_->dw[i + 1] - c1;
        const double c2 = 3.0 * a - b;
        const double c3 = b - 2.0 * a;
        const double val = c0 + t * (c1 + t * (c2 + t * c3));
        const double der = c1 + t * (2.0 * c2 + t * 3.0 * c3);
        return {val, der / h};
    }

private:
    // Quintic Hermite on one cell from value, slope and curvature at both ends.
    static std::pair<double, double> quintic(double t, double h, double f0, double d0, double s0, double f1, double d1,
                                             double s1) {
        const double c1 = h * d0;
        const double c2 = 0.5 * h * h * s0;
        const double a = f1 - (f0 + c1 + c2);
        const double b = h * d1 - (c1 + 2.0 * c2);
        const double c = h * h * s1 - 2.0 * c2;
        const double c3 = 10.0 * a - 4.0 * b + 0.5 * c;
        const double c4 = -15.0 * a + 7.0 * b - c;
        const double c5 = 6.0 * a - 3.0 * b + 0.5 * c;
        const double val = f0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
        const double der = c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)));
        return {val, der / h};
    }

    // w'' = -V e^{4u} - 3 w'/r, with the limit -V e^{4u}/4 at the origin.
    [[nodiscard]] double w_second(std::size_t i) const {
        const double r = p_->grid[i];
        const double src = (weight_ ? weight_(r) : 1.0) * std::exp(4.0 * p_->u[i]);
        return r == 0.0 ? -0.25 * src : -src - 3.0 * p_->dw[i] / r;
    }

    const RadialProfile* p_;
    std::function<double(double)> weight_;
    bool solution_ = false;
};

// ---------------------------------------------------------------------------
// Number formatting shared by every CSV/JSON writer: shortest decimal that
// round-trips, '.' decimal point regardless of locale.

inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    double x = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw DomainError("parse_double: not a number: '" + std::string(s) + "'");
    return x;
}

inline constexpr const char* profile_csv_header = "r,u,du,w,dw";

inline void write_profile_csv(std::ostream& os, const RadialProfile& p) {
    os << profile_csv_header << '\n';
    for (std::size_t i = 0; i < p.size(); ++i) {
        os << format_double(p.grid[i]) << ',' << format_double(p.u[i]) << ',' << format_double(p.du[i]) << ','
           << format_double(p.w[i]) << ',' << format_double(p.dw[i]) << '\n';
    }
}

inline RadialProfile read_profile_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw DomainError("read_profile_csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != profile_csv_header) throw DomainError("read_profile_csv: unexpected header '" + line + "'");
    std::vector<double> r;
    RadialProfile p;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        double vals[5];
        std::size_t start = 0;
        for (int c = 0; c < 5; ++c) {
            const auto comma = line.find(',', start);
            if ((c < 4) != (comma != std::string::npos)) throw DomainError("read_profile_csv: expected 5 columns");
            vals[c] = parse_double(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                                   : comma - start));
            start = comma + 1;
        }
        r.push_back(vals[0]);
        p.u.push_back(vals[1]);
        p.du.push_back(vals[2]);
        p.w.push_back(vals[3]);
        p.dw.push_back(vals[4]);
    }
    p.grid = RadialGrid(std::move(r));
    p.validate();
    return p;
}

}  // namespace liouville4
