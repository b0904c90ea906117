#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "liouville4/families.hpp"

using namespace liouville4;

namespace {

const double s96 = std::sqrt(96.0);
const double bubble = 16.0 * std::numbers::pi * std::numbers::pi;

double v0(double r) { return std::log(s96 / (s96 + r * r)); }
double outer_fraction(double R) {
    const double t = s96 + R * R;
    return 288.0 / (t * t) - 192.0 * s96 / (t * t * t);
}

std::shared_ptr<const ShootResult> entire(double beta) { return std::make_shared<const ShootResult>(shoot(beta)); }

// Delta of the stored Laplacian; the stored Laplacian itself is checked
// against differences of u separately.
double fd_bilaplacian(const FamilyMember& m, double r, double h) {
    return radial_laplacian_at([&](double s) { return m.laplacian(std::abs(s)); }, r, h);
}

}  // namespace

TEST(LogFamily, OriginValues) {
    EXPECT_DOUBLE_EQ(log_family(1).value(0.0), 0.0);
    const auto m = log_family(8);
    EXPECT_DOUBLE_EQ(m.mu(), 0.125);
    EXPECT_NEAR(m.value(0.0), std::log(8.0), 1e-15);
    EXPECT_EQ(m.provenance(), Provenance::ClosedForm);
    EXPECT_THROW(log_family(0), DomainError);
}

TEST(LogFamily, RescalesToBubble) {
    for (int k : {1, 3, 8, 64}) {
        const auto m = log_family(k);
        for (double x : {0.0, 0.5, 2.0, 7.0, 0.9 * k}) {
            if (m.mu() * x > 1.0) continue;
            EXPECT_NEAR(m.value(m.mu() * x) - m.value(0.0), v0(x), 1e-13) << k << " " << x;
        }
    }
}

TEST(LogFamily, MassOfHalfBall) {
    for (int k : {8, 16, 64}) {
        const double expect = bubble * (1.0 - outer_fraction(0.5 * k));
        EXPECT_NEAR(member_mass(log_family(k), 0.0, 0.5), expect, 1e-10 * bubble) << k;
    }
    EXPECT_NEAR(outer_fraction(32.0), 2.678e-4, 1e-7);
}

TEST(LogFamily, EvaluationOutsideDomainThrows) {
    const auto m = log_family(4);
    EXPECT_THROW(static_cast<void>(m.value(1.5)), DomainError);
    EXPECT_THROW(static_cast<void>(m.value(-0.1)), DomainError);
    EXPECT_NO_THROW(static_cast<void>(log_family(4, 10.0).value(1.5)));
}

TEST(QuadIFamily, RescalesToEntireSolution) {
    const auto e = entire(1.5);
    const auto v = ProfileInterpolant::on_solution(e->profile);
    for (int k : {1, 4, 16}) {
        const auto m = quad1_family(k, e);
        EXPECT_DOUBLE_EQ(m.mu(), 1.0 / k);
        for (double x : {0.0, 0.3, 1.0, 3.0, 10.0}) {
            if (m.mu() * x > 1.0) continue;
            EXPECT_NEAR(m.value(m.mu() * x) - m.value(0.0), v.value(x), 1e-12) << k << " " << x;
        }
    }
}

TEST(QuadIFamily, KOneIsTheEntireSolution) {
    const auto e = entire(2.0);
    const auto v = ProfileInterpolant::on_solution(e->profile);
    const auto m = quad1_family(1, e);
    for (double r : {0.0, 0.25, 0.5, 1.0}) {
        EXPECT_DOUBLE_EQ(m.value(r), v.value(r));
        EXPECT_DOUBLE_EQ(m.laplacian(r), v.laplacian(r));
    }
}

TEST(QuadIFamily, MassOfUnitBallIsEntireMassOfBallK) {
    const auto e = entire(1.5);
    for (int k : {2, 8, 32}) {
        const double R = std::min(static_cast<double>(k), e->profile.r_max());
        EXPECT_NEAR(member_mass(quad1_family(k, e), 0.0, R / k), energy(e->profile, R), 1e-8 * energy(e->profile, R));
    }
}

TEST(QuadIFamily, AsymptoteBeyondProfileIsContinuous) {
    const auto e = entire(1.5);
    const auto m = quad1_family(64, e);
    const double rb = e->profile.r_max() / 64.0;
    EXPECT_NEAR(m.value(rb * (1 + 1e-12)), m.value(rb), 1e-9);
    EXPECT_NEAR(m.laplacian(rb * (1 + 1e-9)), m.laplacian(rb), 1e-5 * m.laplacian(rb));
    EXPECT_NO_THROW(static_cast<void>(m.value(1.0)));
}

TEST(QuadIFamily, RequiresQuadraticBacking) {
    EXPECT_THROW(quad1_family(2, entire(std::sqrt(2.0 / 3.0))), DomainError);
    EXPECT_THROW(quad1_family(2, entire(0.0)), DomainError);
    EXPECT_THROW(quad1_family(2, nullptr), DomainError);
}

TEST(QuadIIFamily, OriginLaplacianIsKToTheSixth) {
    for (int k : {1, 2, 3, 4}) {
        const auto m = quad2_family(k);
        EXPECT_DOUBLE_EQ(m.laplacian(0.0), std::pow(k, 6));
        EXPECT_DOUBLE_EQ(m.weight(0.0), 1.0);
        EXPECT_DOUBLE_EQ(m.mu(), 1.0 / k);
    }
}

TEST(QuadIIFamily, GaussianMass) {
    for (int k : {2, 3, 4}) {
        const double expect = 4.0 * std::numbers::pi * std::numbers::pi / std::pow(k, 8);
        EXPECT_NEAR(member_mass(quad2_family(k), 0.0, 1.0), expect, 1e-10 * expect) << k;
    }
}

TEST(QuadIIFamily, FluxAgreesWithMass) {
    // mass(B_R) = -2 pi^2 R^3 (Delta u)'(R) for any radial solution
    for (int k : {2, 3}) {
        const auto m = quad2_family(k);
        for (double R : {0.05, 0.2, 0.9}) {
            const double flux = -2.0 * std::numbers::pi * std::numbers::pi * R * R * R * m.laplacian_derivative(R);
            EXPECT_NEAR(flux, member_mass(m, 0.0, R), 1e-9 * member_mass(m, 0.0, 1.0)) << k << " " << R;
        }
    }
}

TEST(QuadIIFamily, TruncationRadiusDoesNotMatter) {
    const auto wide = std::make_shared<const PhiTable>(80.0);
    const auto base = shared_phi_table();
    for (double rho : {0.5, 5.0, 39.0, 41.0, 64.0, 79.0, 200.0}) {
        EXPECT_NEAR(wide->phi(rho), base->phi(rho), 1e-10 * std::max(1.0, std::abs(base->phi(rho)))) << rho;
        EXPECT_NEAR(wide->psi(rho), base->psi(rho), 1e-12) << rho;
        EXPECT_NEAR(wide->dphi(rho), base->dphi(rho), 1e-10 * std::max(1.0, std::abs(base->dphi(rho)))) << rho;
    }
    for (int k : {2, 3}) {
        const double a = member_mass(quad2_family(k, wide), 0.0, 1.0);
        const double b = member_mass(quad2_family(k, base), 0.0, 1.0);
        EXPECT_NEAR(a, b, 1e-8 * b);
    }
}

TEST(QuadIIFamily, PhiNormalization) {
    const auto phi = shared_phi_table();
    EXPECT_EQ(phi->phi(0.0), 0.0);
    EXPECT_EQ(phi->psi(0.0), 0.0);
    // Delta psi = e^{-r^2/2}: psi ~ -r^2/8 near 0
    EXPECT_NEAR(phi->psi(1e-2), -1e-4 / 8.0, 1e-9);
    // psi -> -1/2 + 1/r^2 in the far field
    EXPECT_NEAR(phi->psi(100.0), -0.5 + 1e-4, 1e-12);
}

TEST(QuadIIFamily, MaximumAtOriginAndWeightTendsToOne) {
    double prev = INFINITY;
    for (int k : {2, 3, 4, 5}) {
        const auto m = quad2_family(k);
        double dev = 0.0;
        for (int i = 0; i <= 400; ++i) {
            const double r = i / 400.0;
            EXPECT_LE(m.value(r), m.value(0.0));
            dev = std::max(dev, std::abs(m.weight(r) - 1.0));
        }
        EXPECT_LT(dev, prev) << k;
        prev = dev;
    }
}

TEST(FamilyProperty, MembersSolveTheEquation) {
    // Delta^2 u = V e^{4u}, checked by nested finite differences
    const auto e = entire(1.5);
    const std::vector<FamilyMember> members{log_family(2), log_family(5), quad1_family(2, e), quad2_family(1),
                                            quad2_family(2)};
    for (const auto& m : members) {
        for (double r : {0.1, 0.3, 0.6, 0.85}) {
            const double rhs = m.weight(r) * std::exp(4.0 * m.value(r));
            const double lhs = fd_bilaplacian(m, r, 2e-2 * std::min(1.0, m.length_scale()));
            EXPECT_NEAR(lhs, rhs, 1e-6 * std::max(1.0, std::abs(rhs))) << to_string(m.kind()) << " k=" << m.k()
                                                                         << " r=" << r;
        }
    }
}

TEST(FamilyProperty, StoredLaplacianMatchesFiniteDifferences) {
    const auto e = entire(2.0);
    const std::vector<FamilyMember> members{log_family(7), quad1_family(3, e), quad2_family(2)};
    for (const auto& m : members) {
        for (double r : {0.05, 0.4, 0.9}) {
            const double fd = radial_laplacian_at([&](double x) { return m.value(std::abs(x)); }, r, 1e-3);
            EXPECT_NEAR(fd, m.laplacian(r), 1e-6 * std::max(1.0, std::abs(m.laplacian(r))));
        }
    }
}

TEST(FamilyProperty, LogMassTendsToQuantum) {
    double prev = 0.0;
    for (int k : {4, 8, 16, 32, 64}) {
        const double mass = member_mass(log_family(k), 0.0, 0.5);
        EXPECT_GT(mass, prev);
        EXPECT_LT(mass, bubble);
        prev = mass;
    }
    EXPECT_NEAR(prev, bubble, 1e-3 * bubble);
}

TEST(GenericMembers, ProfileAndRescaled) {
    auto p = std::make_shared<const RadialProfile>(shoot(std::sqrt(2.0 / 3.0)).profile);
    const auto m = member_from_profile(p);
    EXPECT_DOUBLE_EQ(m.mu(), 1.0);
    EXPECT_EQ(m.max_radius(), 50.0);
    EXPECT_NEAR(m.value(3.0), v0(3.0), 1e-8);
    const auto r = rescaled_member(log_family(4), 2.0);
    EXPECT_DOUBLE_EQ(r.mu(), 0.125);
    EXPECT_NEAR(r.value(0.1), log_family(8, 0.5).value(0.1), 1e-14);
    EXPECT_NEAR(r.density(0.1), log_family(8, 0.5).density(0.1), 1e-10);
}
