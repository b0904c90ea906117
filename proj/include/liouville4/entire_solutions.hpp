#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "liouville4/error.hpp"
#include "liouville4/ode.hpp"
#include "liouville4/profile.hpp"
#include "liouville4/radial_engine.hpp"

namespace liouville4 {

enum class TrajectoryTag { LogEntire, QuadraticEntire, Growth };

inline std::string to_string(TrajectoryTag t) {
    switch (t) {
        case TrajectoryTag::LogEntire: return "LogEntire";
        case TrajectoryTag::QuadraticEntire: return "QuadraticEntire";
        case TrajectoryTag::Growth: return "Growth";
    }
    return "?";
}

struct TrajectoryClass {
    TrajectoryTag tag = TrajectoryTag::Growth;
    /// a in v(x) ~ -a|x|^2; set for QuadraticEntire only.
    double a_slope = std::numeric_limits<double>::quiet_NaN();
    /// Stopping radius; set for Growth only.
    double r_stop = std::numeric_limits<double>::quiet_NaN();
    bool confident = true;
};

struct ShootConfig {
    OdeConfig ode = [] {
        OdeConfig c;
        c.abort_on_negative_limit = true;
        return c;
    }();
    /// Minimum limit of w that counts as quadratic decay.
    double eps_w = 1e-3;
    /// LogEntire requires |w r^2 - 4| < log_band at the outer radius.
    double log_band = 0.5;
    /// Safety factor on a in the Gaussian tail bound of quadratic solutions.
    double tail_slope_factor = 0.9;
};

/// w + r w'/2 at the last node: the limit of w up to exponentially small
/// terms once the mass e^{4v} has been collected (w - 8a = M/(4 pi^2 r^2)
/// for a solution of mass M).
inline double corrected_laplacian_limit(const RadialProfile& p) {
    const auto n = p.size() - 1;
    return p.w[n] + 0.5 * p.grid[n] * p.dw[n];
}

/// Decides the fate of a normalized entire trajectory from its outer state.
inline TrajectoryClass classify_trajectory(const RadialProfile& profile, const TerminationEvent& event,
                                           const ShootConfig& cfg = {}) {
    TrajectoryClass out;
    if (event.kind != TerminationKind::ReachedRmax) {
        out.tag = TrajectoryTag::Growth;
        out.r_stop = event.r_stop;
        out.confident = event.kind == TerminationKind::GrowthAbort;
        return out;
    }
    const auto n = profile.size() - 1;
    const double R = profile.grid[n];
    const double limit = corrected_laplacian_limit(profile);
    const double log_dev = std::abs(profile.w[n] * R * R - 4.0);
    if (limit > cfg.eps_w) {
        out.tag = TrajectoryTag::QuadraticEntire;
        out.a_slope = limit / 8.0;
        return out;
    }
    if (log_dev < cfg.log_band && limit > -cfg.eps_w) {
        out.tag = TrajectoryTag::LogEntire;
        return out;
    }
    // Neither test passed cleanly: report the nearer class.
    out.confident = false;
    const double quad_gap = (cfg.eps_w - limit) / cfg.eps_w;
    const double log_gap = (log_dev - cfg.log_band) / cfg.log_band;
    if (limit < -cfg.eps_w) {
        out.tag = TrajectoryTag::Growth;
        out.r_stop = R;
    } else if (quad_gap < log_gap && limit > 0.0) {
        out.tag = TrajectoryTag::QuadraticEntire;
        out.a_slope = limit / 8.0;
    } else {
        out.tag = TrajectoryTag::LogEntire;
    }
    return out;
}

struct SlopeFit {
    double a = 0.0;
    double log_coeff = 0.0;
    double constant = 0.0;
    double rms_residual = 0.0;
    /// a from the corrected outer Laplacian, w + r w'/2 over 8.
    double a_from_laplacian = 0.0;
    /// |a - a_from_laplacian| <= 1% of a_from_laplacian.
    bool consistent = false;
};

/// Least-squares fit of v(r) = -a r^2 + c ln r + d on the outer quarter of
/// the profile's radial range.
inline SlopeFit asymptotic_slope(const RadialProfile& profile) {
    const double R = profile.r_max();
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < profile.size(); ++i)
        if (profile.grid[i] >= 0.75 * R && profile.grid[i] > 0.0) idx.push_back(i);
    detail::require(idx.size() >= 3, "asymptotic_slope: fewer than 3 nodes on the outer quarter");
    Eigen::MatrixXd A(static_cast<Eigen::Index>(idx.size()), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const double r = profile.grid[idx[j]] / R;  // scaled for conditioning
        const auto row = static_cast<Eigen::Index>(j);
        A(row, 0) = -r * r;
        A(row, 1) = std::log(r);
        A(row, 2) = 1.0;
        b(row) = profile.u[idx[j]];
    }
    const Eigen::Vector3d x = A.colPivHouseholderQr().solve(b);
    SlopeFit fit;
    fit.a = x(0) / (R * R);
    fit.log_coeff = x(1);
    fit.constant = x(2) - x(1) * std::log(R);
    fit.rms_residual = std::sqrt((A * x - b).squaredNorm() / static_cast<double>(idx.size()));
    fit.a_from_laplacian = corrected_laplacian_limit(profile) / 8.0;
    fit.consistent = std::abs(fit.a - fit.a_from_laplacian) <= 0.01 * std::abs(fit.a_from_laplacian);
    return fit;
}

/// Analytic continuation of the energy integral beyond the last node.
/// LogEntire: e^{4v} = C (b + r^2)^{-4} matched to (v, v') at R, which is
/// exact for the standard bubble. QuadraticEntire: the Gaussian bound
/// e^{4(v(R) - f a (r^2 - R^2))} with safety factor f.
inline double energy_tail(const RadialProfile& p, const TrajectoryClass& cls, const ShootConfig& cfg = {}) {
    const auto n = p.size() - 1;
    const double R = p.grid[n];
    const double e4 = std::exp(4.0 * p.u[n]);
    switch (cls.tag) {
        case TrajectoryTag::Growth: return 0.0;
        case TrajectoryTag::QuadraticEntire: {
            const double lambda = 4.0 * cfg.tail_slope_factor * cls.a_slope;
            return sphere_area * e4 * (lambda * R * R + 1.0) / (2.0 * lambda * lambda);
        }
        case TrajectoryTag::LogEntire: {
            const double slope = p.du[n];
            const double b = slope < 0.0 ? -2.0 * R / slope - R * R : -1.0;
            const double T = b + R * R;
            if (!(b > -0.5 * R * R) || !std::isfinite(T)) return sphere_area * e4 * R * R * R * R / 4.0;
            const double C = e4 * T * T * T * T;
            return sphere_area * C * 0.5 * (0.5 / (T * T) - b / (3.0 * T * T * T));
        }
    }
    return 0.0;
}

struct ShootResult {
    double beta = 0.0;
    TrajectoryClass cls;
    double energy_quadrature = 0.0;
    double energy_tail = 0.0;
    double energy_total = 0.0;
    RadialProfile profile;
    TerminationEvent event;
};

inline IvpResult integrate_entire(double beta, const ShootConfig& cfg) {
    return integrate_ivp(0.0, beta, [](double) { return 1.0; }, cfg.ode);
}

/// One shot of Delta^2 v = e^{4v} with v(0) = 0, Delta v(0) = beta.
inline ShootResult shoot(double beta, const ShootConfig& cfg = {}) {
    detail::require(std::isfinite(beta), "shoot: beta must be finite");
    auto ivp = integrate_entire(beta, cfg);
    if (ivp.event.kind == TerminationKind::StepFailure)
        throw NumericalError("shoot: integrator step failure at r = " + format_double(ivp.event.r_stop));
    ShootResult res;
    res.beta = beta;
    res.cls = classify_trajectory(ivp.profile, ivp.event, cfg);
    res.energy_quadrature = energy(ivp.profile, ivp.profile.r_max());
    res.energy_tail = energy_tail(ivp.profile, res.cls, cfg);
    res.energy_total = res.energy_quadrature + res.energy_tail;
    res.profile = std::move(ivp.profile);
    res.event = ivp.event;
    return res;
}

/// Bisection on beta between a Growth shot (lo) and a non-Growth shot (hi).
/// Only GrowthAbort events count as Growth.
inline double find_beta_star(double lo, double hi, double tol, const ShootConfig& cfg = {}) {
    detail::require(lo < hi, "find_beta_star: need lo < hi");
    detail::require(tol > 0.0, "find_beta_star: tol must be positive");
    auto grows = [&](double beta) {
        return integrate_entire(beta, cfg).event.kind == TerminationKind::GrowthAbort;
    };
    if (!grows(lo) || grows(hi))
        throw DomainError("find_beta_star: invalid bracket (need Growth at lo and non-Growth at hi)");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (grows(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct ScanRow {
    double beta = 0.0;
    std::string cls;  // tag name, or "Error"
    double a = std::numeric_limits<double>::quiet_NaN();
    double energy = std::numeric_limits<double>::quiet_NaN();
    double energy_tail = std::numeric_limits<double>::quiet_NaN();
    double r_stop = std::numeric_limits<double>::quiet_NaN();
    std::string error;
};

inline ScanRow scan_row(double beta, const ShootConfig& cfg) {
    ScanRow row;
    row.beta = beta;
    try {
        const auto res = shoot(beta, cfg);
        row.cls = to_string(res.cls.tag);
        row.a = res.cls.a_slope;
        row.energy = res.energy_total;
        row.energy_tail = res.energy_tail;
        row.r_stop = res.cls.r_stop;
    } catch (const std::exception& e) {
        row.cls = "Error";
        row.error = e.what();
    }
    return row;
}

/// Independent shots for each beta, rows in input order. Shots run on up to
/// `workers` threads; results do not depend on the worker count.
inline std::vector<ScanRow> energy_vs_beta_scan(std::span<const double> betas, const ShootConfig& cfg = {},
                                                unsigned workers = 0) {
    std::vector<ScanRow> rows(betas.size());
    if (betas.empty()) return rows;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(betas.size()));
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < betas.size(); i += workers) rows[i] = scan_row(betas[i], cfg);
        }));
    }
    for (auto& j : jobs) j.get();
    return rows;
}

}  // namespace liouville4
