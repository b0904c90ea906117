#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "liouville4/error.hpp"
#include "liouville4/profile.hpp"
#include "liouville4/quadrature.hpp"
#include "liouville4/radial_engine.hpp"

namespace liouville4 {

/// Spherical mean of the Dirichlet Green function of Delta on B_delta:
/// (1/4pi^2)(max(r,s)^{-2} - delta^{-2}).
inline double g_delta_radial(double r, double s, double delta) {
    detail::require(delta > 0.0, "g_delta_radial: delta must be positive");
    const double tol = delta * (1.0 + 1e-12);
    detail::require(r >= 0.0 && s >= 0.0 && r <= tol && s <= tol, "g_delta_radial: radii must lie in [0, delta]");
    if (r == 0.0 && s == 0.0) throw DomainError("g_delta_radial: kernel singular at r = s = 0");
    const double m = std::max(r, s);
    return (1.0 / (m * m) - 1.0 / (delta * delta)) / (4.0 * pi * pi);
}

/// Navier Green function of Delta^2 on B_delta with pole at the origin:
/// (1/8pi^2) ln(delta/r) + (r^2 - delta^2)/(32 pi^2 delta^2).
inline double h_delta_at_zero(double r, double delta) {
    detail::require(delta > 0.0, "h_delta_at_zero: delta must be positive");
    if (r == 0.0) throw DomainError("h_delta_at_zero: logarithmic singularity at r = 0");
    detail::require(r > 0.0 && r <= delta * (1.0 + 1e-12), "h_delta_at_zero: r must lie in (0, delta]");
    return std::log(delta / r) / (8.0 * pi * pi) + (r * r - delta * delta) / (32.0 * pi * pi * delta * delta);
}

/// p(r) = 2 pi^2 int_0^delta g(r, s) f(s) s^3 ds by direct quadrature of the
/// kernel, split at the kink s = r. Solves Delta p = f, p(delta) = 0.
template <class F>
double green_apply(const F& f, double r, double delta, double scale = 1.0) {
    detail::require(r >= 0.0 && r <= delta, "green_apply: r must lie in [0, delta]");
    auto integrand = [&](double s) { return g_delta_radial(r, s, delta) * f(s) * s * s * s; };
    double sum = 0.0;
    if (r > 0.0) sum += radial_integrate<8>(integrand, 0.0, r, std::min(scale, r), 32);
    if (r < delta) {
        // the kernel is smooth on [r, delta]; resolve on the scale of r
        auto outer = [&](double s) { return integrand(s); };
        sum += composite_integrate<8>(outer, radial_breaks(r, delta, std::min(scale, delta), 32));
    }
    return sphere_area * sum;
}

/// u reconstructed from its Navier data on B_delta:
///   int H_delta f + u(delta) + (delta^2 - r^2)/8 * Delta u(delta),
/// with the H_delta = G_delta * G_delta term evaluated as two nested
/// Dirichlet solves (tabulated moment form of the g-kernel).
class NavierRepresentation {
public:
    NavierRepresentation(std::function<double(double)> f, double delta, double u_delta, double w_delta,
                         double scale = 1.0)
        : delta_(delta), u_delta_(u_delta), w_delta_(w_delta) {
        detail::require(delta > 0.0, "NavierRepresentation: delta must be positive");
        inner_ = std::make_shared<RadialPoissonSolver>(std::move(f), delta, PoissonNormalization::ZeroAtRadius,
                                                       delta, scale, 32);
        auto inner = inner_;
        outer_ = std::make_shared<RadialPoissonSolver>([inner](double s) { return inner->value(s); }, delta,
                                                       PoissonNormalization::ZeroAtRadius, delta, scale, 32);
    }

    /// int_{B_delta} H_delta(x, y) f(y) dy.
    [[nodiscard]] double potential(double r) const { return outer_->value(r); }

    [[nodiscard]] double value(double r) const {
        return potential(r) + u_delta_ + (delta_ * delta_ - r * r) / 8.0 * w_delta_;
    }

private:
    double delta_, u_delta_, w_delta_;
    std::shared_ptr<const RadialPoissonSolver> inner_;
    std::shared_ptr<const RadialPoissonSolver> outer_;
};

/// sup over [0, 0.9 delta] of |u - representation(u)| for a field solving
/// Delta^2 u = V e^{4u} on B_delta.
template <RadialField F, class W = decltype(&unit_weight)>
double representation_residual(const F& field, double delta, const W& weight = &unit_weight,
                               std::size_t samples = 200) {
    detail::require(delta > 0.0, "representation_residual: delta must be positive");
    if (field.max_radius() < delta) throw DomainError("representation_residual: profile does not cover delta");
    const NavierRepresentation rep([&field, &weight](double s) { return weight(s) * std::exp(4.0 * field.value(s)); },
                                   delta, field.value(delta), field.laplacian(delta), std::min(1.0, delta));
    double worst = 0.0;
    for (std::size_t i = 0; i <= samples; ++i) {
        const double r = 0.9 * delta * static_cast<double>(i) / static_cast<double>(samples);
        worst = std::max(worst, std::abs(rep.value(r) - field.value(r)));
    }
    return worst;
}

inline double representation_residual(const RadialProfile& profile, double delta, const Weight& weight = {}) {
    const auto interp = ProfileInterpolant::on_solution(profile, weight);
    if (weight) return representation_residual(interp, delta, weight);
    return representation_residual(interp, delta);
}

// ---------------------------------------------------------------------------
// Pohozaev identity on B_r:
//   int x.grad(u) Delta^2 u dx
//     = 2 pi^2 r^3 [ (r/2) w^2 + w (u' + r u'') - r u' w' ]   at |x| = r.

struct PohozaevTerms {
    double r = 0.0;
    double volume = 0.0;
    double boundary = 0.0;
    double rhs_energy_form = 0.0;
};

/// Boundary side from the pointwise data (u', u'', w, w') at r.
inline double pohozaev_boundary(double r, double du, double d2u, double w, double dw) {
    return sphere_area * r * r * r * (0.5 * r * w * w + w * (du + r * d2u) - r * du * dw);
}

/// Pohozaev terms for a field with known bilaplacian. `scale` sets the
/// quadrature cells near the origin.
template <RadialField F, class B>
PohozaevTerms pohozaev_terms(const F& field, double r, const B& bilaplacian, double scale = 1.0) {
    detail::require(r > 0.0 && r <= field.max_radius() * (1.0 + 1e-12), "pohozaev_terms: r outside field");
    PohozaevTerms t;
    t.r = r;
    const double cell = std::min(scale, r);
    t.volume = sphere_area * radial_integrate<8>(
                                 [&](double s) {
                                     const double s2 = s * s;
                                     return s2 * s2 * field.derivative(s) * bilaplacian(s);
                                 },
                                 0.0, r, cell, 32);
    const double du = field.derivative(r);
    const double w = field.laplacian(r);
    t.boundary = pohozaev_boundary(r, du, -w - 3.0 * du / r, w, field.laplacian_derivative(r));
    const double mass =
        radial_integrate<8>([&](double s) { return s * s * s * std::exp(4.0 * field.value(s)); }, 0.0, r, cell, 32);
    t.rhs_energy_form = sphere_area * (-mass + 0.25 * r * r * r * r * std::exp(4.0 * field.value(r)));
    return t;
}

/// On-solution path: Delta^2 u = V e^{4u} along a profile. The energy form
/// of the right side equals the volume term when V = 1.
template <class W = decltype(&unit_weight)>
PohozaevTerms pohozaev_terms(const RadialProfile& profile, double r, const W& weight = &unit_weight) {
    const auto interp = ProfileInterpolant::on_solution(profile, weight);
    return pohozaev_terms(interp, r, [&](double s) { return weight(s) * std::exp(4.0 * interp.value(s)); });
}

/// Off-solution path: Delta^2 u by two Richardson-extrapolated centered
/// difference Laplacians with spacing h. Nesting divides rounding noise by
/// h^4, so h should stay near 1e-2 in the field's natural units.
template <RadialField F>
PohozaevTerms pohozaev_terms_fd(const F& field, double r, double h = 1e-2) {
    auto u = [&](double s) { return field.value(std::abs(s)); };
    auto lap = [&](double s) { return radial_laplacian_at(u, std::abs(s), h); };
    return pohozaev_terms(field, r, [&](double s) { return radial_laplacian_at(lap, s, h); });
}

/// Energy 4 pi^2 a^2 carried by a neck of slope a.
inline double energy_from_a(double a) {
    detail::require(a >= 0.0, "energy_from_a: a must be nonnegative");
    return 4.0 * pi * pi * a * a;
}

}  // namespace liouville4
