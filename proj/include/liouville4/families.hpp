#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "liouville4/entire_solutions.hpp"
#include "liouville4/error.hpp"
#include "liouville4/profile.hpp"
#include "liouville4/quadrature.hpp"
#include "liouville4/radial_engine.hpp"

namespace liouville4 {

enum class FamilyKind { Log, QuadI, QuadII, Custom };
enum class Provenance { ClosedForm, ProfileBacked };

inline std::string to_string(FamilyKind k) {
    switch (k) {
        case FamilyKind::Log: return "log";
        case FamilyKind::QuadI: return "quad1";
        case FamilyKind::QuadII: return "quad2";
        case FamilyKind::Custom: return "custom";
    }
    return "?";
}

inline std::string to_string(Provenance p) {
    return p == Provenance::ClosedForm ? "closed-form" : "profile-backed";
}

/// Evaluators behind a family member. All radii are in the member's own
/// (unscaled) coordinates.
struct MemberModel {
    virtual ~MemberModel() = default;
    [[nodiscard]] virtual double u(double r) const = 0;
    [[nodiscard]] virtual double du(double r) const = 0;
    [[nodiscard]] virtual double lap(double r) const = 0;
    [[nodiscard]] virtual double dlap(double r) const = 0;
    [[nodiscard]] virtual double weight(double) const { return 1.0; }
    /// V e^{4u}; overridden where a closed form avoids cancellation.
    [[nodiscard]] virtual double density(double r) const { return weight(r) * std::exp(4.0 * u(r)); }
};

/// One member u_k (with weight V_k) of a blow-up family. Immutable; copies
/// share the underlying model.
class FamilyMember {
public:
    FamilyMember(FamilyKind kind, int k, double mu, Provenance provenance, std::shared_ptr<const MemberModel> model,
                 double domain_radius = 1.0)
        : kind_(kind), k_(k), mu_(mu), provenance_(provenance), model_(std::move(model)), domain_(domain_radius) {
        detail::require(model_ != nullptr, "FamilyMember: null model");
        detail::require(mu_ > 0.0 && std::isfinite(mu_), "FamilyMember: mu must be positive and finite");
        detail::require(domain_ > 0.0, "FamilyMember: domain radius must be positive");
    }

    [[nodiscard]] FamilyKind kind() const noexcept { return kind_; }
    [[nodiscard]] int k() const noexcept { return k_; }
    /// Concentration scale e^{-u_k(0)}.
    [[nodiscard]] double mu() const noexcept { return mu_; }
    [[nodiscard]] Provenance provenance() const noexcept { return provenance_; }
    [[nodiscard]] double max_radius() const noexcept { return domain_; }

    [[nodiscard]] double value(double r) const { return model_->u(check(r)); }
    [[nodiscard]] double derivative(double r) const { return r == 0.0 ? 0.0 : model_->du(check(r)); }
    [[nodiscard]] double laplacian(double r) const { return model_->lap(check(r)); }
    [[nodiscard]] double laplacian_derivative(double r) const { return r == 0.0 ? 0.0 : model_->dlap(check(r)); }
    [[nodiscard]] double weight(double r) const { return model_->weight(check(r)); }
    [[nodiscard]] double density(double r) const { return model_->density(check(r)); }

    /// Length on which the density varies near the origin: mu, shortened when
    /// mu^2 Delta u(0) is large (the Gaussian core of quad-II members).
    [[nodiscard]] double length_scale() const {
        const double d0 = mu_ * mu_ * model_->lap(0.0);
        return mu_ / std::sqrt(std::max(1.0, d0));
    }

    [[nodiscard]] const std::shared_ptr<const MemberModel>& model() const noexcept { return model_; }

private:
    FamilyKind kind_;
    int k_;
    double mu_;
    Provenance provenance_;
    std::shared_ptr<const MemberModel> model_;
    double domain_;

    double check(double r) const {
        if (!(r >= 0.0 && r <= domain_ * (1.0 + 1e-12)))
            throw DomainError("FamilyMember: radius " + format_double(r) + " outside [0, " + format_double(domain_) +
                              "]");
        return r;
    }
};

/// V_k e^{4u_k}-mass of the annulus a <= |x| <= b.
inline double member_mass(const FamilyMember& m, double a, double b) {
    detail::require(0.0 <= a && a <= b && b <= m.max_radius() * (1.0 + 1e-12), "member_mass: bad annulus");
    const double scale = std::min(m.length_scale(), b);
    auto f = [&](double s) { return s * s * s * m.density(s); };
    const double start = std::min(a, b);
    if (b == start) return 0.0;
    return sphere_area * radial_integrate<8>(f, start, b, std::max(scale, 1e-300), 32);
}

// ---------------------------------------------------------------------------
// Log family: u_k = ln(k sqrt96 / (sqrt96 + k^2 r^2)), V = 1.

namespace detail {

inline double bubble_lap(double rho) {
    const double t = sqrt96 + rho * rho;
    return (8.0 * sqrt96 + 4.0 * rho * rho) / (t * t);
}

inline double bubble_dlap(double rho) {
    const double t = sqrt96 + rho * rho;
    return -(24.0 * sqrt96 * rho + 8.0 * rho * rho * rho) / (t * t * t);
}

struct LogModel final : MemberModel {
    double k;
    explicit LogModel(double kk) : k(kk) {}
    double u(double r) const override { return std::log(k * sqrt96 / (sqrt96 + k * k * r * r)); }
    double du(double r) const override { return -2.0 * k * k * r / (sqrt96 + k * k * r * r); }
    double lap(double r) const override { return k * k * bubble_lap(k * r); }
    double dlap(double r) const override { return k * k * k * bubble_dlap(k * r); }
    double density(double r) const override {
        const double q = k * sqrt96 / (sqrt96 + k * k * r * r);
        return (q * q) * (q * q);
    }
};

}  // namespace detail

/// Standard bubble v0 = ln(sqrt96/(sqrt96 + r^2)) and its closed-form
/// derivatives.
inline double bubble_value(double r) { return std::log(sqrt96 / (sqrt96 + r * r)); }
inline double bubble_derivative(double r) { return -2.0 * r / (sqrt96 + r * r); }
inline double bubble_laplacian(double r) { return detail::bubble_lap(r); }
inline double bubble_laplacian_derivative(double r) { return detail::bubble_dlap(r); }

/// Fraction of the bubble's energy outside B_R.
inline double bubble_outer_fraction(double R) {
    const double t = sqrt96 + R * R;
    return 288.0 / (t * t) - 192.0 * sqrt96 / (t * t * t);
}

inline FamilyMember log_family(int k, double domain_radius = 1.0) {
    detail::require(k >= 1, "log_family: k must be >= 1");
    return {FamilyKind::Log, k, 1.0 / k, Provenance::ClosedForm,
            std::make_shared<detail::LogModel>(static_cast<double>(k)), domain_radius};
}

/// v0 itself on B_R (the k = 1 log member on a larger domain).
inline FamilyMember bubble_member(double domain_radius = 1e3) { return log_family(1, domain_radius); }

// ---------------------------------------------------------------------------
// Quad-I family: u_k(r) = v(kr) + ln k for a quadratic entire solution v.

namespace detail {

struct QuadIModel final : MemberModel {
    std::shared_ptr<const ShootResult> entire;
    ProfileInterpolant interp;
    double k;
    double R;            // outer radius of the backing profile
    double a, c, d;      // v ~ -a rho^2 + c ln rho + d beyond R

    QuadIModel(std::shared_ptr<const ShootResult> e, double kk)
        : entire(std::move(e)), interp(ProfileInterpolant::on_solution(entire->profile)), k(kk), R(entire->profile.r_max()) {
        const auto fit = asymptotic_slope(entire->profile);
        a = fit.a;
        c = fit.log_coeff;
        d = interp.value(R) + a * R * R - c * std::log(R);
    }

    double v(double rho) const { return rho <= R ? interp.value(rho) : -a * rho * rho + c * std::log(rho) + d; }
    double dv(double rho) const { return rho <= R ? interp.derivative(rho) : -2.0 * a * rho + c / rho; }
    double w(double rho) const { return rho <= R ? interp.laplacian(rho) : 8.0 * a - 2.0 * c / (rho * rho); }
    double dw(double rho) const {
        return rho <= R ? interp.laplacian_derivative(rho) : 4.0 * c / (rho * rho * rho);
    }

    double u(double r) const override { return v(k * r) + std::log(k); }
    double du(double r) const override { return k * dv(k * r); }
    double lap(double r) const override { return k * k * w(k * r); }
    double dlap(double r) const override { return k * k * k * dw(k * r); }
};

}  // namespace detail

inline FamilyMember quad1_family(int k, std::shared_ptr<const ShootResult> entire, double domain_radius = 1.0) {
    detail::require(k >= 1, "quad1_family: k must be >= 1");
    detail::require(entire != nullptr, "quad1_family: missing entire solution");
    if (entire->cls.tag != TrajectoryTag::QuadraticEntire)
        throw DomainError("quad1_family: backing solution is " + to_string(entire->cls.tag) +
                          ", need QuadraticEntire");
    return {FamilyKind::QuadI, k, 1.0 / k, Provenance::ProfileBacked,
            std::make_shared<detail::QuadIModel>(std::move(entire), static_cast<double>(k)), domain_radius};
}

// ---------------------------------------------------------------------------
// Quad-II family: u_k = ln k - k^6 r^2/8 + k^{-8} phi(k^3 r) with
// Delta^2 phi = e^{-r^2/2}, phi(0) = Delta phi(0) = 0.

/// phi and psi = Delta phi from two nested radial Poisson solves on
/// [0, R_phi]. Beyond R_phi the source is negligible and both are continued
/// by their exact far-field forms:
///   psi = -(A - B/rho^2)/2,  phi = C0 + A rho^2/16 - (B/4) ln rho + C1/rho^2
/// with A, B the first and third moments of the source, and C0, C1 matched to
/// phi and phi' at R_phi.
class PhiTable {
public:
    explicit PhiTable(double truncation_radius = 40.0) : R_(truncation_radius) {
        detail::require(R_ >= 10.0, "PhiTable: truncation radius must be >= 10");
        auto psi = std::make_shared<RadialPoissonSolver>([](double s) { return std::exp(-0.5 * s * s); }, R_,
                                                         PoissonNormalization::ZeroAtOrigin);
        psi_ = psi;
        phi_ = std::make_shared<RadialPoissonSolver>([psi](double s) { return psi->value(s); }, R_,
                                                     PoissonNormalization::ZeroAtOrigin);
        B_ = psi_->cubic_moment(R_);
        A_ = B_ / (R_ * R_) - 2.0 * psi_->value(R_);  // psi(R) = -(A - B/R^2)/2
        const double phiR = phi_->value(R_);
        const double dphiR = phi_->derivative(R_);
        C1_ = (A_ * R_ / 8.0 - B_ / (4.0 * R_) - dphiR) * R_ * R_ * R_ / 2.0;
        C0_ = phiR - A_ * R_ * R_ / 16.0 + 0.25 * B_ * std::log(R_) - C1_ / (R_ * R_);
    }

    [[nodiscard]] double truncation_radius() const noexcept { return R_; }

    [[nodiscard]] double phi(double rho) const {
        if (rho <= R_) return phi_->value(rho);
        return C0_ + A_ * rho * rho / 16.0 - 0.25 * B_ * std::log(rho) + C1_ / (rho * rho);
    }
    [[nodiscard]] double dphi(double rho) const {
        if (rho <= R_) return phi_->derivative(rho);
        return A_ * rho / 8.0 - B_ / (4.0 * rho) - 2.0 * C1_ / (rho * rho * rho);
    }
    [[nodiscard]] double psi(double rho) const {
        if (rho <= R_) return psi_->value(rho);
        return -0.5 * (A_ - B_ / (rho * rho));
    }
    [[nodiscard]] double dpsi(double rho) const {
        if (rho <= R_) return psi_->derivative(rho);
        return -B_ / (rho * rho * rho);
    }

private:
    double R_;
    std::shared_ptr<const RadialPoissonSolver> psi_;
    std::shared_ptr<const RadialPoissonSolver> phi_;
    double A_ = 0.0, B_ = 0.0, C0_ = 0.0, C1_ = 0.0;
};

/// Process-wide phi table for the default truncation radius, built on first
/// use (thread-safe static initialization) and shared read-only.
inline std::shared_ptr<const PhiTable> shared_phi_table() {
    static const auto table = std::make_shared<const PhiTable>();
    return table;
}

namespace detail {

struct QuadIIModel final : MemberModel {
    std::shared_ptr<const PhiTable> phi;
    double k, k3, k6, k8inv;
    QuadIIModel(std::shared_ptr<const PhiTable> p, double kk)
        : phi(std::move(p)), k(kk), k3(kk * kk * kk), k6(k3 * k3), k8inv(1.0 / (k6 * kk * kk)) {}

    double u(double r) const override { return std::log(k) - k6 * r * r / 8.0 + k8inv * phi->phi(k3 * r); }
    double du(double r) const override { return -k6 * r / 4.0 + k8inv * k3 * phi->dphi(k3 * r); }
    double lap(double r) const override { return k6 + k8inv * k6 * phi->psi(k3 * r); }
    double dlap(double r) const override { return k8inv * k6 * k3 * phi->dpsi(k3 * r); }
    double weight(double r) const override { return std::exp(-4.0 * k8inv * phi->phi(k3 * r)); }
    double density(double r) const override { return k * k * k * k * std::exp(-0.5 * k6 * r * r); }
};

}  // namespace detail

inline FamilyMember quad2_family(int k, std::shared_ptr<const PhiTable> phi = shared_phi_table(),
                                 double domain_radius = 1.0) {
    detail::require(k >= 1, "quad2_family: k must be >= 1");
    detail::require(phi != nullptr, "quad2_family: missing phi table");
    return {FamilyKind::QuadII, k, 1.0 / k, Provenance::ClosedForm,
            std::make_shared<detail::QuadIIModel>(std::move(phi), static_cast<double>(k)), domain_radius};
}

// ---------------------------------------------------------------------------
// Generic members.

namespace detail {

struct FunctionModel final : MemberModel {
    std::function<double(double)> fu, fdu, flap, fdlap, fw;
    double u(double r) const override { return fu(r); }
    double du(double r) const override { return fdu(r); }
    double lap(double r) const override { return flap(r); }
    double dlap(double r) const override { return fdlap(r); }
    double weight(double r) const override { return fw ? fw(r) : 1.0; }
};

struct ProfileModel final : MemberModel {
    std::shared_ptr<const RadialProfile> profile;
    ProfileInterpolant interp;
    std::function<double(double)> fw;
    ProfileModel(std::shared_ptr<const RadialProfile> p, std::function<double(double)> w)
        : profile(std::move(p)), interp(*profile), fw(std::move(w)) {}
    double u(double r) const override { return interp.value(r); }
    double du(double r) const override { return interp.derivative(r); }
    double lap(double r) const override { return interp.laplacian(r); }
    double dlap(double r) const override { return interp.laplacian_derivative(r); }
    double weight(double r) const override { return fw ? fw(r) : 1.0; }
};

struct RescaledModel final : MemberModel {
    std::shared_ptr<const MemberModel> base;
    double lambda;
    double u(double r) const override { return base->u(lambda * r) + std::log(lambda); }
    double du(double r) const override { return lambda * base->du(lambda * r); }
    double lap(double r) const override { return lambda * lambda * base->lap(lambda * r); }
    double dlap(double r) const override { return lambda * lambda * lambda * base->dlap(lambda * r); }
    double weight(double r) const override { return base->weight(lambda * r); }
    double density(double r) const override {
        const double l2 = lambda * lambda;
        return l2 * l2 * base->density(lambda * r);
    }
};

}  // namespace detail

/// Member from explicit evaluators (u, u', Delta u, (Delta u)') and an
/// optional weight V (default 1).
inline FamilyMember function_member(int k, double mu, std::function<double(double)> u,
                                    std::function<double(double)> du, std::function<double(double)> lap,
                                    std::function<double(double)> dlap, std::function<double(double)> weight = {},
                                    double domain_radius = 1.0) {
    auto m = std::make_shared<detail::FunctionModel>();
    m->fu = std::move(u);
    m->fdu = std::move(du);
    m->flap = std::move(lap);
    m->fdlap = std::move(dlap);
    m->fw = std::move(weight);
    return {FamilyKind::Custom, k, mu, Provenance::ClosedForm, std::move(m), domain_radius};
}

/// Member backed by a sampled profile (mu = e^{-u(0)}, domain = profile range).
inline FamilyMember member_from_profile(std::shared_ptr<const RadialProfile> profile,
                                        std::function<double(double)> weight = {}, int k = 1) {
    detail::require(profile != nullptr, "member_from_profile: null profile");
    profile->validate();
    detail::require(profile->grid.origin_included(), "member_from_profile: profile must start at r = 0");
    const double mu = std::exp(-profile->u[0]);
    const double R = profile->r_max();
    return {FamilyKind::Custom, k, mu, Provenance::ProfileBacked,
            std::make_shared<detail::ProfileModel>(std::move(profile), std::move(weight)), R};
}

/// u(lambda r) + ln lambda, which solves the same equation with weight
/// V(lambda r); mu becomes mu/lambda and the domain shrinks by lambda.
inline FamilyMember rescaled_member(const FamilyMember& m, double lambda) {
    detail::require(lambda > 0.0 && std::isfinite(lambda), "rescaled_member: lambda must be positive");
    auto model = std::make_shared<detail::RescaledModel>();
    model->base = m.model();
    model->lambda = lambda;
    return {m.kind(), m.k(), m.mu() / lambda, m.provenance(), std::move(model), m.max_radius() / lambda};
}

}  // namespace liouville4
