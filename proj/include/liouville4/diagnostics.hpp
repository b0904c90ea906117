#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "liouville4/error.hpp"
#include "liouville4/families.hpp"
#include "liouville4/profile.hpp"
#include "liouville4/quadrature.hpp"

namespace liouville4 {

struct DiagnosticSeries {
    double delta = 0.5;
    std::vector<int> k_values;
    std::vector<double> mu;
    std::vector<double> u0;          // u_k(0)
    std::vector<double> d_k;         // mu_k^2 Delta u_k(delta)
    std::vector<double> mass_delta;  // V_k e^{4u_k}-mass of B_delta
};

inline DiagnosticSeries diagnostic_series(std::span<const FamilyMember> members, double delta) {
    detail::require(delta > 0.0 && delta < 1.0, "diagnostic_series: delta must lie in (0, 1)");
    DiagnosticSeries s;
    s.delta = delta;
    for (const auto& m : members) {
        if (delta > m.max_radius()) throw DomainError("diagnostic_series: delta outside member domain");
        const double d = m.mu() * m.mu() * m.laplacian(delta);
        if (!std::isfinite(d)) throw NumericalError("diagnostic_series: non-finite d_k");
        s.k_values.push_back(m.k());
        s.mu.push_back(m.mu());
        s.u0.push_back(m.value(0.0));
        s.d_k.push_back(d);
        s.mass_delta.push_back(member_mass(m, 0.0, delta));
    }
    return s;
}

enum class Regime { I, IIa, IIb, IIc, Inconclusive };

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::I: return "i";
        case Regime::IIa: return "ii.a";
        case Regime::IIb: return "ii.b";
        case Regime::IIc: return "ii.c";
        case Regime::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct RegimeOptions {
    /// Trend threshold on the log-log slope of d_k.
    double slope_threshold = 0.5;
    /// Regime (i): spread of u_k(0) below this and ...
    double bounded_spread = 10.0;
    /// ... growth of u_k(0) per unit ln k below this.
    double bounded_growth = 0.25;
    /// Members (from the largest k) entering the trend fit.
    std::size_t trend_window = 4;
};

struct RegimeReport {
    Regime regime = Regime::Inconclusive;
    double slope = std::numeric_limits<double>::quiet_NaN();
    double u0_spread = 0.0;
    double u0_growth = 0.0;
    double alpha_estimate = 0.0;
    bool alpha_extrapolated = false;
    std::string confidence = "low";
    std::size_t members = 0;
};

namespace detail {

/// Least-squares slope of y against x.
inline double ls_slope(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

/// Limit of the last three terms of a monotone sequence. The ratio of
/// successive differences estimates the geometric convergence rate, so the
/// extrapolation adapts to whatever power of 1/k the sequence follows.
inline std::pair<double, bool> extrapolate_limit(std::span<const double> m) {
    if (m.empty()) return {0.0, false};
    const double last = m.back();
    if (m.size() < 3) return {last, false};
    const double m1 = m[m.size() - 3], m2 = m[m.size() - 2], m3 = last;
    const double d1 = m2 - m1, d2 = m3 - m2;
    if (d1 == 0.0 || d2 == 0.0) return {last, false};
    const double q = d2 / d1;
    if (!(q > 0.0 && q < 0.9)) return {last, false};
    return {m3 + d2 * q / (1.0 - q), true};
}

}  // namespace detail

/// Places a family in the blow-up trichotomy from the trend of d_k and the
/// behavior of u_k(0); alpha is the limiting mass of B_delta.
inline RegimeReport regime_classify(const DiagnosticSeries& s, const RegimeOptions& opt = {}) {
    const auto n = s.k_values.size();
    detail::require(n >= 2, "regime_classify: need at least two family members");
    detail::require(s.d_k.size() == n && s.u0.size() == n && s.mass_delta.size() == n,
                    "regime_classify: series columns differ in length");
    RegimeReport rep;
    rep.members = n;

    std::vector<double> lnk(n);
    for (std::size_t i = 0; i < n; ++i) lnk[i] = std::log(static_cast<double>(s.k_values[i]));
    const auto [lo, hi] = std::minmax_element(s.u0.begin(), s.u0.end());
    rep.u0_spread = *hi - *lo;
    rep.u0_growth = detail::ls_slope(lnk, s.u0);
    const auto [alpha, extrapolated] = detail::extrapolate_limit(s.mass_delta);
    rep.alpha_estimate = alpha;
    rep.alpha_extrapolated = extrapolated;

    const std::size_t w = std::min(opt.trend_window, n);
    std::vector<double> x, y;
    bool positive = true;
    for (std::size_t i = n - w; i < n; ++i) {
        positive = positive && s.d_k[i] > 0.0;
        x.push_back(lnk[i]);
        y.push_back(s.d_k[i] > 0.0 ? std::log(s.d_k[i]) : 0.0);
    }
    if (positive) rep.slope = detail::ls_slope(x, y);

    bool consistent = false;
    const double frac = rep.alpha_estimate / bubble_energy;
    if (rep.u0_spread < opt.bounded_spread && rep.u0_growth < opt.bounded_growth) {
        rep.regime = Regime::I;
        consistent = true;
    } else if (!positive) {
        rep.regime = Regime::Inconclusive;
    } else if (rep.slope <= -opt.slope_threshold) {
        rep.regime = Regime::IIa;
        consistent = std::abs(frac - 1.0) < 1e-2;
    } else if (rep.slope >= opt.slope_threshold) {
        rep.regime = Regime::IIc;
        consistent = frac < 1e-2;
    } else {
        rep.regime = Regime::IIb;
        consistent = frac > 1e-3 && frac < 1.0 - 1e-3;
    }
    rep.confidence = (consistent && n >= 3) ? "high" : "low";
    return rep;
}

/// v_k(x) = u_k(mu_k x) - u_k(0).
inline double rescaled_v(const FamilyMember& m, double x) {
    const double r = m.mu() * std::abs(x);
    if (r > m.max_radius()) throw DomainError("rescaled_v: mu*|x| outside member domain");
    return m.value(r) - m.value(0.0);
}

/// Mass of the annulus B_delta minus B_{R mu_k}.
inline double neck_energy(const FamilyMember& m, double delta, double R) {
    detail::require(R > 0.0, "neck_energy: R must be positive");
    if (R * m.mu() >= delta) throw DomainError("neck_energy: need R*mu < delta");
    return member_mass(m, R * m.mu(), delta);
}

namespace detail {

/// Maximum of f over [a, b]: dense uniform sampling followed by
/// golden-section refinement around the best sample.
template <class F>
double refined_sup(const F& f, double a, double b, std::size_t samples = 2000) {
    detail::require(b >= a, "sup: empty interval");
    if (b == a) return f(a);
    std::vector<double> xs(samples + 1);
    for (std::size_t i = 0; i <= samples; ++i) xs[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(samples);
    std::size_t best = 0;
    double fbest = f(xs[0]);
    for (std::size_t i = 1; i <= samples; ++i) {
        const double v = f(xs[i]);
        if (v > fbest) {
            fbest = v;
            best = i;
        }
    }
    double lo = xs[best == 0 ? 0 : best - 1];
    double hi = xs[best == samples ? samples : best + 1];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 100 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    return std::max({fbest, f1, f2});
}

}  // namespace detail

/// sup of r e^{u(r)} over the annulus [r1, r2].
inline double wpe_sup(const FamilyMember& m, double r1, double r2) {
    detail::require(0.0 <= r1 && r1 <= r2 && r2 <= m.max_radius(), "wpe_sup: annulus outside domain");
    return detail::refined_sup([&](double r) { return r * std::exp(m.value(r)); }, r1, r2);
}

/// sup over r <= delta of r |u'(r) + Delta u(delta) r / 4|.
inline double ef1_sup(const FamilyMember& m, double delta) {
    detail::require(delta > 0.0 && delta <= m.max_radius(), "ef1_sup: delta outside domain");
    const double L = m.laplacian(delta);
    return detail::refined_sup([&](double r) { return r * std::abs(m.derivative(r) + 0.25 * L * r); }, 0.0, delta);
}

/// (int over B_R of |Delta v_k - d_k| dx) / R^2 with v_k the rescaled member
/// and d_k = mu_k^2 Delta u_k(delta).
inline double intvk_ratio(const FamilyMember& m, double delta, double R) {
    detail::require(delta > 0.0 && delta <= m.max_radius(), "intvk_ratio: delta outside domain");
    if (!(R > 0.0 && R < delta / m.mu())) throw DomainError("intvk_ratio: need 0 < R < delta/mu");
    const double mu = m.mu();
    const double d = mu * mu * m.laplacian(delta);
    auto f = [&](double s) { return s * s * s * std::abs(mu * mu * m.laplacian(mu * s) - d); };
    const double scale = std::min(R, m.length_scale() / mu);
    return sphere_area * radial_integrate<8>(f, 0.0, R, scale, 64) / (R * R);
}

/// sup over the rescaled ball of |u(x/sqrt(L)) - u(0) + |x|^2/8| / ln(2+|x|^2)
/// with L = Delta u(delta).
inline double ef2_residual(const FamilyMember& m, double delta) {
    detail::require(delta > 0.0 && delta <= m.max_radius(), "ef2_residual: delta outside domain");
    const double L = m.laplacian(delta);
    if (!(L > 0.0)) throw DomainError("ef2_residual: Delta u(delta) must be positive");
    const double sL = std::sqrt(L);
    const double u0 = m.value(0.0);
    auto dev = [&](double x) { return std::abs(m.value(x / sL) - u0 + x * x / 8.0) / std::log(2.0 + x * x); };
    return detail::refined_sup(dev, 0.0, delta * sL);
}

struct MonoRadius {
    double r_k = 0.0;
    bool break_found = false;
};

/// Inner radius of the window on which r^eta e^{v0(r)} is already
/// decreasing, with a 25% margin; equals 4 for eta = 1.
inline double mono_window_start(double eta) {
    return std::max(4.0, 1.25 * std::sqrt(eta * sqrt96 / (2.0 - eta)));
}

/// Largest r <= delta such that r^eta e^{u} is nonincreasing on
/// [R_eta mu, r]. A sign change of eta/r + u' from <= 0 to > 0 inside the
/// window is an interior critical point (break_found).
inline MonoRadius mono_radius(const FamilyMember& m, double eta, double delta) {
    detail::require(eta >= 1.0 && eta < 2.0, "mono_radius: eta must lie in [1, 2)");
    detail::require(delta > 0.0 && delta <= m.max_radius(), "mono_radius: delta outside domain");
    const double start = mono_window_start(eta) * m.mu();
    if (start >= delta) return {delta, false};
    auto g = [&](double r) { return eta / r + m.derivative(r); };
    if (g(start) > 0.0) return {start, false};
    const std::size_t n = 4000;
    const double ratio = std::pow(delta / start, 1.0 / n);
    double prev = start;
    for (std::size_t i = 1; i <= n; ++i) {
        const double r = i == n ? delta : start * std::pow(ratio, static_cast<double>(i));
        if (g(r) > 0.0) {
            double lo = prev, hi = r;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (g(mid) > 0.0 ? hi : lo) = mid;
            }
            return {lo, true};
        }
        prev = r;
    }
    return {delta, false};
}

struct MonotoneBreaks {
    std::optional<double> s_k;    // first zero of Delta u
    std::optional<double> tau_k;  // first zero of u' after s_k
};

namespace detail {

/// First sign change of f on (a, b] from `before` to not-`before`, refined
/// by bisection.
template <class F, class Pred>
std::optional<double> first_crossing(const F& f, double a, double b, const Pred& before, std::size_t n = 4000) {
    double prev = a;
    for (std::size_t i = 1; i <= n; ++i) {
        const double r = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
        if (!before(f(r))) {
            double lo = prev, hi = r;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(hi, 1e-300); ++it) {
                const double mid = 0.5 * (lo + hi);
                (before(f(mid)) ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev = r;
    }
    return std::nullopt;
}

}  // namespace detail

/// First zero s_k of Delta u on (0, delta] and the first zero tau_k of u'
/// after it.
template <RadialField F>
MonotoneBreaks detect_monotone_breaks(const F& field, double delta) {
    detail::require(delta > 0.0 && delta <= field.max_radius(), "detect_monotone_breaks: delta outside profile");
    MonotoneBreaks out;
    const double w0 = field.laplacian(0.0);
    if (!(w0 > 0.0)) {
        out.s_k = 0.0;
    } else {
        out.s_k = detail::first_crossing([&](double r) { return field.laplacian(r); }, 0.0, delta,
                                         [](double v) { return v > 0.0; });
    }
    if (out.s_k) {
        const double s = *out.s_k;
        if (s < delta)
            out.tau_k = detail::first_crossing([&](double r) { return field.derivative(r); }, s, delta,
                                               [](double v) { return v < 0.0; });
    }
    return out;
}

struct NeckFit {
    double a = 0.0;
    double rms_residual = 0.0;
    bool is_neck = false;
};

/// One-parameter least-squares fit of samples of u~(x) with u~(1) = 0 to
/// a ln(1/x) + (a-1)(x^2-1)/2. The model is linear in a:
///   u~ + (x^2-1)/2 = a g(x),   g = -ln x + (x^2-1)/2.
/// Fits with RMS residual above `threshold` are flagged as non-neck.
inline NeckFit fit_neck_profile(std::span<const double> xs, std::span<const double> ys, double threshold = 1e-6) {
    detail::require(xs.size() == ys.size() && xs.size() >= 2, "fit_neck_profile: need matching samples");
    double sgg = 0.0, sgy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        detail::require(xs[i] > 0.0, "fit_neck_profile: x must be positive");
        const double q = 0.5 * (xs[i] * xs[i] - 1.0);
        const double g = -std::log(xs[i]) + q;
        sgg += g * g;
        sgy += g * (ys[i] + q);
    }
    detail::require(sgg > 0.0, "fit_neck_profile: samples do not determine a (all at x = 1)");
    NeckFit fit;
    fit.a = sgy / sgg;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double q = 0.5 * (xs[i] * xs[i] - 1.0);
        const double model = fit.a * (-std::log(xs[i])) + (fit.a - 1.0) * q;
        ss += (ys[i] - model) * (ys[i] - model);
    }
    fit.rms_residual = std::sqrt(ss / static_cast<double>(xs.size()));
    fit.is_neck = fit.rms_residual <= threshold;
    return fit;
}

// ---------------------------------------------------------------------------
// Estimate suite over a family.

struct MemberEstimates {
    int k = 0;
    double mu = 0.0;
    double wpe_sup = 0.0;
    double ef1_sup = 0.0;
    double intvk_ratio = 0.0;
    double ef2_dev = 0.0;
    double mono_radius = 0.0;
    bool mono_break = false;
};

struct EstimateOptions {
    double delta = 0.5;
    /// wpe annulus as fractions of delta.
    double wpe_inner = 0.5;
    double wpe_outer = 1.0;
    /// Common R for intvk_ratio; 0 picks half of the smallest delta/mu.
    double intvk_R = 0.0;
    double eta = 1.0;
    /// Regime of the family; decides which lemmas apply. Inconclusive
    /// applies all of them.
    Regime regime = Regime::Inconclusive;
    /// Largest allowed growth factor between consecutive members.
    double wpe_factor = 2.0;
    double ef1_factor = 2.0;
    double intvk_factor = 3.0;
    double ef2_factor = 1.5;
};

struct EstimateReport {
    std::vector<MemberEstimates> members;
    double intvk_R = 0.0;
    double wpe_sup = 0.0;
    double ef1_sup = 0.0;
    double intvk_ratio = 0.0;
    double ef2_dev = 0.0;
    double mono_radius = 0.0;
    /// Per-lemma verdicts; empty when the lemma does not apply to the regime.
    std::optional<bool> wpe_pass;
    std::optional<bool> ef1_pass;
    std::optional<bool> intvk_pass;
    std::optional<bool> ef2_pass;
    std::optional<bool> mono_pass;

    [[nodiscard]] bool all_pass() const {
        for (const auto& f : {wpe_pass, ef1_pass, intvk_pass, ef2_pass, mono_pass})
            if (f && !*f) return false;
        return true;
    }
};

namespace detail {

/// Every consecutive ratio next/prev is at most `factor`. NaN entries (not
/// measured) are skipped; exact zeros always pass.
inline bool bounded_growth(std::span<const double> v, double factor) {
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (double x : v) {
        if (std::isnan(x)) continue;
        if (!std::isfinite(x) || x < 0.0) return false;
        if (!std::isnan(prev) && x > 0.0 && x > factor * prev) return false;
        prev = x;
    }
    return true;
}

}  // namespace detail

/// Measures the lemma quantities on each member (ordered by k) and checks
/// that none grows by more than the allowed factor from one member to the
/// next, a finite-k proxy for bounds uniform in k. wpe and intvk apply in
/// every regime, ef1 and ef2 in regime ii.c, the monotone radius in ii.a.
inline EstimateReport estimate_suite(std::span<const FamilyMember> members, const EstimateOptions& opt = {}) {
    detail::require(!members.empty(), "estimate_suite: no members");
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    const bool all = opt.regime == Regime::Inconclusive;
    const bool quad2 = all || opt.regime == Regime::IIc;
    const bool log = all || opt.regime == Regime::IIa;

    EstimateReport rep;
    rep.intvk_R = opt.intvk_R;
    if (rep.intvk_R <= 0.0) {
        double reach = std::numeric_limits<double>::infinity();
        for (const auto& m : members) reach = std::min(reach, opt.delta / m.mu());
        rep.intvk_R = 0.5 * reach;
    }
    std::vector<double> wpe, ef1, intvk, ef2;
    rep.mono_radius = std::numeric_limits<double>::infinity();
    bool mono_ok = true;
    for (const auto& m : members) {
        MemberEstimates e;
        e.k = m.k();
        e.mu = m.mu();
        e.wpe_sup = wpe_sup(m, opt.wpe_inner * opt.delta, opt.wpe_outer * opt.delta);
        e.ef1_sup = ef1_sup(m, opt.delta);
        e.intvk_ratio = rep.intvk_R < opt.delta / m.mu() ? intvk_ratio(m, opt.delta, rep.intvk_R) : nan;
        e.ef2_dev = m.laplacian(opt.delta) > 0.0 ? ef2_residual(m, opt.delta) : nan;
        const auto mr = mono_radius(m, opt.eta, opt.delta);
        e.mono_radius = mr.r_k;
        e.mono_break = mr.break_found;
        wpe.push_back(e.wpe_sup);
        ef1.push_back(e.ef1_sup);
        intvk.push_back(e.intvk_ratio);
        ef2.push_back(e.ef2_dev);
        rep.wpe_sup = std::max(rep.wpe_sup, e.wpe_sup);
        rep.ef1_sup = std::max(rep.ef1_sup, e.ef1_sup);
        if (!std::isnan(e.intvk_ratio)) rep.intvk_ratio = std::max(rep.intvk_ratio, e.intvk_ratio);
        if (!std::isnan(e.ef2_dev)) rep.ef2_dev = std::max(rep.ef2_dev, e.ef2_dev);
        rep.mono_radius = std::min(rep.mono_radius, e.mono_radius);
        // an empty window (start beyond delta) holds vacuously
        const double start = mono_window_start(opt.eta) * e.mu;
        mono_ok = mono_ok && (start >= opt.delta || e.mono_radius > start);
        rep.members.push_back(e);
    }
    rep.wpe_pass = detail::bounded_growth(wpe, opt.wpe_factor);
    rep.intvk_pass = detail::bounded_growth(intvk, opt.intvk_factor);
    if (quad2) {
        rep.ef1_pass = detail::bounded_growth(ef1, opt.ef1_factor);
        rep.ef2_pass = detail::bounded_growth(ef2, opt.ef2_factor);
    }
    if (log) rep.mono_pass = mono_ok;
    return rep;
}

}  // namespace liouville4
