#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "liouville4/error.hpp"
#include "liouville4/profile.hpp"

namespace liouville4 {

/// (u, u', w, w') with w = Delta u.
struct RadialState {
    double u = 0.0;
    double du = 0.0;
    double w = 0.0;
    double dw = 0.0;
};

struct OdeConfig {
    double rtol = 1e-10;
    double atol = 1e-12;
    /// Series-start radius; 0 selects the default from (u0, beta).
    double r_seed = 0.0;
    double r_max = 50.0;
    double u_ceiling = 50.0;
    /// Largest step as a fraction of max(r, 1).
    double max_step_fraction = 0.1;
    /// Step-size floor relative to max(r, 1).
    double min_step_fraction = 1e-14;
    std::size_t max_steps = 2'000'000;
    /// Stop as soon as w + r w'/2 drops below -limit_tolerance. For a
    /// nonnegative weight this quantity is nonincreasing in r and bounds the
    /// limit of w from above, so a negative value certifies that w turns
    /// negative and u eventually grows without bound.
    bool abort_on_negative_limit = false;
    double limit_tolerance = 0.0;

    void validate() const {
        detail::require(rtol > 0.0 && atol > 0.0, "OdeConfig: tolerances must be positive");
        detail::require(r_seed >= 0.0 && r_seed < 1e-2, "OdeConfig: r_seed must be in [0, 1e-2)");
        detail::require(std::isfinite(r_max) && r_max > 0.0, "OdeConfig: r_max must be positive and finite");
        detail::require(std::isfinite(u_ceiling), "OdeConfig: u_ceiling must be finite");
        detail::require(max_step_fraction > 0.0, "OdeConfig: max_step_fraction must be positive");
        detail::require(min_step_fraction > 0.0, "OdeConfig: min_step_fraction must be positive");
        detail::require(limit_tolerance >= 0.0, "OdeConfig: limit_tolerance must be nonnegative");
    }
};

enum class TerminationKind { ReachedRmax, GrowthAbort, StepFailure };

/// Ceiling: u exceeded u_ceiling. NegativeLimit: w + r w'/2 < 0 was
/// certified. Singularity: the step size collapsed while u' > 0 and w < 0,
/// i.e. at a finite-radius blow-up that double precision cannot follow up
/// to the ceiling.
enum class GrowthCause { None, Ceiling, NegativeLimit, Singularity };

struct TerminationEvent {
    TerminationKind kind = TerminationKind::ReachedRmax;
    GrowthCause cause = GrowthCause::None;
    double r_stop = 0.0;
    RadialState state;
};

inline std::string to_string(GrowthCause c) {
    switch (c) {
        case GrowthCause::None: return "none";
        case GrowthCause::Ceiling: return "ceiling";
        case GrowthCause::NegativeLimit: return "negative_limit";
        case GrowthCause::Singularity: return "singularity";
    }
    return "?";
}

inline std::string to_string(TerminationKind k) {
    switch (k) {
        case TerminationKind::ReachedRmax: return "ReachedRmax";
        case TerminationKind::GrowthAbort: return "GrowthAbort";
        case TerminationKind::StepFailure: return "StepFailure";
    }
    return "?";
}

inline double default_seed_radius(double u0, double beta) {
    double scale = 1.0;
    if (beta != 0.0) scale = std::min(scale, std::sqrt(8.0 / std::abs(beta)));
    scale = std::min(scale, std::exp(-u0));
    return 1e-4 * scale;
}

/// Quartic Taylor expansion of the regular solution with u(0) = u0,
/// Delta u(0) = beta and weight V(0) = v0, evaluated at r.
inline RadialState taylor_seed(double u0, double beta, double v0, double r) {
    detail::require(r > 0.0, "taylor_seed: r_seed must be positive");
    const double c = v0 * std::exp(4.0 * u0);
    const double r2 = r * r;
    return {u0 - beta * r2 / 8.0 + c * r2 * r2 / 192.0, -beta * r / 4.0 + c * r2 * r / 48.0, beta - c * r2 / 8.0,
            -c * r / 4.0};
}

struct IvpResult {
    RadialProfile profile;
    TerminationEvent event;
};

namespace detail {

using Vec4 = std::array<double, 4>;

template <class Weight>
Vec4 radial_rhs(const Weight& weight, double r, const Vec4& y) {
    return {y[1], -y[2] - 3.0 * y[1] / r, y[3], -weight(r) * std::exp(4.0 * y[0]) - 3.0 * y[3] / r};
}

inline bool all_finite(const Vec4& y) {
    return std::isfinite(y[0]) && std::isfinite(y[1]) && std::isfinite(y[2]) && std::isfinite(y[3]);
}

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/// Integrates Delta^2 u = V e^{4u} (radial, minus-sign Laplacian) from the
/// Taylor seed at r_seed out to config.r_max with adaptive Dormand-Prince
/// 5(4) steps. Every accepted step is stored; the origin is stored as the
/// first node. Integration stops early on u > u_ceiling, on a certified
/// negative limit of w (when enabled), or when the step size underflows.
template <class Weight>
IvpResult integrate_ivp(double u0, double beta, const Weight& weight, const OdeConfig& config) {
    using detail::Vec4;
    using DP = detail::DormandPrince;
    config.validate();

    const double r_seed = config.r_seed > 0.0 ? config.r_seed : default_seed_radius(u0, beta);
    detail::require(r_seed < config.r_max, "integrate_ivp: r_max must exceed the seed radius");

    IvpResult out;
    std::vector<double> radii;
    auto& prof = out.profile;
    auto push = [&](double r, const Vec4& y) {
        radii.push_back(r);
        prof.u.push_back(y[0]);
        prof.du.push_back(y[1]);
        prof.w.push_back(y[2]);
        prof.dw.push_back(y[3]);
    };
    push(0.0, {u0, 0.0, beta, 0.0});

    const RadialState s = taylor_seed(u0, beta, weight(0.0), r_seed);
    Vec4 y{s.u, s.du, s.w, s.dw};
    double r = r_seed;
    push(r, y);

    auto finish = [&](TerminationKind kind, GrowthCause cause) {
        out.event.kind = kind;
        out.event.cause = cause;
        out.event.r_stop = r;
        out.event.state = {y[0], y[1], y[2], y[3]};
        prof.grid = RadialGrid(std::move(radii));
        return out;
    };

    Vec4 k1 = detail::radial_rhs(weight, r, y);
    double h = std::min(r_seed, config.max_step_fraction * std::max(r, 1.0));
    std::size_t steps = 0;
    double err_prev = 1e-4;

    while (r < config.r_max) {
        if (++steps > config.max_steps) return finish(TerminationKind::StepFailure, GrowthCause::None);
        const double h_cap = config.max_step_fraction * std::max(r, 1.0);
        h = std::min({h, h_cap, config.r_max - r});
        if (h < config.min_step_fraction * std::max(r, 1.0)) {
            if (y[1] > 0.0 && y[2] < 0.0) return finish(TerminationKind::GrowthAbort, GrowthCause::Singularity);
            return finish(TerminationKind::StepFailure, GrowthCause::None);
        }

        auto axpy = [&](std::initializer_list<std::pair<double, const Vec4*>> terms) {
            Vec4 z = y;
            for (const auto& [c, k] : terms)
                for (int j = 0; j < 4; ++j) z[j] += h * c * (*k)[j];
            return z;
        };
        const Vec4 k2 = detail::radial_rhs(weight, r + DP::c2 * h, axpy({{DP::a21, &k1}}));
        const Vec4 k3 = detail::radial_rhs(weight, r + DP::c3 * h, axpy({{DP::a31, &k1}, {DP::a32, &k2}}));
        const Vec4 k4 =
            detail::radial_rhs(weight, r + DP::c4 * h, axpy({{DP::a41, &k1}, {DP::a42, &k2}, {DP::a43, &k3}}));
        const Vec4 k5 = detail::radial_rhs(weight, r + DP::c5 * h,
                                           axpy({{DP::a51, &k1}, {DP::a52, &k2}, {DP::a53, &k3}, {DP::a54, &k4}}));
        const Vec4 k6 = detail::radial_rhs(
            weight, r + h, axpy({{DP::a61, &k1}, {DP::a62, &k2}, {DP::a63, &k3}, {DP::a64, &k4}, {DP::a65, &k5}}));
        const Vec4 y_new =
            axpy({{DP::b1, &k1}, {DP::b3, &k3}, {DP::b4, &k4}, {DP::b5, &k5}, {DP::b6, &k6}});
        const Vec4 k7 = detail::radial_rhs(weight, r + h, y_new);

        double err = 0.0;
        bool finite = detail::all_finite(y_new) && detail::all_finite(k7);
        if (finite) {
            for (int j = 0; j < 4; ++j) {
                const double e = h * (DP::e1 * k1[j] + DP::e3 * k3[j] + DP::e4 * k4[j] + DP::e5 * k5[j] +
                                      DP::e6 * k6[j] + DP::e7 * k7[j]);
                const double sc = config.atol + config.rtol * std::max(std::abs(y[j]), std::abs(y_new[j]));
                err += (e / sc) * (e / sc);
            }
            err = std::sqrt(err / 4.0);
            finite = std::isfinite(err);
        }
        if (!finite) {
            h *= 0.25;
            continue;
        }
        if (err <= 1.0) {
            r = (config.r_max - (r + h) < 1e-12 * config.r_max) ? config.r_max : r + h;
            y = y_new;
            k1 = k7;
            push(r, y);
            // PI step-size controller
            const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
            h *= std::clamp(fac, 0.2, 5.0);
            err_prev = std::max(err, 1e-4);
            if (y[0] > config.u_ceiling) return finish(TerminationKind::GrowthAbort, GrowthCause::Ceiling);
            if (config.abort_on_negative_limit && y[2] + 0.5 * r * y[3] < -config.limit_tolerance)
                return finish(TerminationKind::GrowthAbort, GrowthCause::NegativeLimit);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0));
        }
    }
    return finish(TerminationKind::ReachedRmax, GrowthCause::None);
}

}  // namespace liouville4
