#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "liouville4/analytic_fields.hpp"
#include "liouville4/diagnostics.hpp"

using namespace liouville4;

namespace {

const double s96 = std::sqrt(96.0);
const double pi2 = std::numbers::pi * std::numbers::pi;
const double quantum = 16.0 * pi2;

double v0(double r) { return std::log(s96 / (s96 + r * r)); }
double lap_v0(double r) {
    const double t = s96 + r * r;
    return (8.0 * s96 + 4.0 * r * r) / (t * t);
}
double outer_fraction(double R) {
    const double t = s96 + R * R;
    return 288.0 / (t * t) - 192.0 * s96 / (t * t * t);
}

std::vector<FamilyMember> log_members(std::initializer_list<int> ks) {
    std::vector<FamilyMember> out;
    for (int k : ks) out.push_back(log_family(k));
    return out;
}

std::vector<FamilyMember> quad2_members(std::initializer_list<int> ks) {
    std::vector<FamilyMember> out;
    for (int k : ks) out.push_back(quad2_family(k));
    return out;
}

FamilyMember zero_member(int k, double mu = 0.01) {
    auto zero = [](double) { return 0.0; };
    return function_member(k, mu, zero, zero, zero, zero);
}

/// u = c - L r^2 / 8, so Delta u = L everywhere.
FamilyMember paraboloid(double c, double L) {
    return function_member(
        1, 0.1, [=](double r) { return c - L * r * r / 8.0; }, [=](double r) { return -L * r / 4.0; },
        [=](double) { return L; }, [](double) { return 0.0; });
}

}  // namespace

TEST(DiagnosticSeries, LogFamilyValues) {
    const auto ms = log_members({8, 16, 32});
    const auto s = diagnostic_series(ms, 0.5);
    ASSERT_EQ(s.d_k.size(), 3u);
    // quoted values carry about four significant digits (the first is
    // 0.213939 to six); the closed form below is the tight oracle
    const double expect[] = {0.21392, 0.06140, 0.01560};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(s.d_k[i], expect[i], 2e-5) << i;
        EXPECT_NEAR(s.d_k[i], lap_v0(0.5 * s.k_values[i]), 1e-14);
        EXPECT_NEAR(s.u0[i], std::log(static_cast<double>(s.k_values[i])), 1e-14);
        EXPECT_NEAR(s.mass_delta[i], quantum * (1.0 - outer_fraction(0.5 * s.k_values[i])), 1e-9 * quantum);
    }
}

TEST(DiagnosticSeries, QuadIIScalesLikeKToTheFourth) {
    const auto s = diagnostic_series(quad2_members({2, 3, 4}), 0.5);
    for (std::size_t i = 0; i < 3; ++i) {
        const double k4 = std::pow(s.k_values[i], 4);
        EXPECT_NEAR(s.d_k[i] / k4, 1.0, 0.5 / k4 * 1.01) << s.k_values[i];
    }
}

TEST(DiagnosticSeries, QuadITendsToEightA) {
    const auto e = std::make_shared<const ShootResult>(shoot(1.5));
    std::vector<FamilyMember> ms;
    for (int k : {8, 16, 32, 64}) ms.push_back(quad1_family(k, e));
    const auto s = diagnostic_series(ms, 0.5);
    EXPECT_NEAR(s.d_k.back(), 8.0 * e->cls.a_slope, 1e-3 * 8.0 * e->cls.a_slope);
    const auto rep = regime_classify(s);
    EXPECT_EQ(rep.regime, Regime::IIb);
    EXPECT_LT(std::abs(rep.slope), 0.1);
    EXPECT_NEAR(rep.alpha_estimate, e->energy_total, 1e-3 * e->energy_total);
}

TEST(DiagnosticSeries, RejectsBadDelta) {
    const auto ms = log_members({2});
    EXPECT_THROW(diagnostic_series(ms, 0.0), DomainError);
    EXPECT_THROW(diagnostic_series(ms, 1.0), DomainError);
}

TEST(RegimeClassify, LogFamilyIsConcentrating) {
    const auto rep = regime_classify(diagnostic_series(log_members({4, 8, 16, 32, 64}), 0.5));
    EXPECT_EQ(rep.regime, Regime::IIa);
    EXPECT_EQ(to_string(rep.regime), "ii.a");
    EXPECT_LT(rep.slope, -1.5);
    EXPECT_NEAR(rep.alpha_estimate / quantum, 1.0, 1e-3);
    EXPECT_TRUE(rep.alpha_extrapolated);
    EXPECT_EQ(rep.confidence, "high");
}

TEST(RegimeClassify, QuadIIIsBlowingUpOnTheBall) {
    const auto rep = regime_classify(diagnostic_series(quad2_members({2, 3, 4}), 0.5));
    EXPECT_EQ(rep.regime, Regime::IIc);
    EXPECT_EQ(to_string(rep.regime), "ii.c");
    EXPECT_NEAR(rep.slope, 4.0, 0.05);
    EXPECT_LT(rep.alpha_estimate, 1e-2 * quantum);
    EXPECT_EQ(rep.confidence, "high");
}

TEST(RegimeClassify, BoundedFamilyIsRegimeOne) {
    const std::vector<FamilyMember> ms{zero_member(1), zero_member(2), zero_member(3)};
    const auto rep = regime_classify(diagnostic_series(ms, 0.5));
    EXPECT_EQ(rep.regime, Regime::I);
    EXPECT_EQ(to_string(rep.regime), "i");
    EXPECT_EQ(rep.u0_spread, 0.0);
}

TEST(RegimeClassify, TwoMembersGiveLowConfidence) {
    const auto rep = regime_classify(diagnostic_series(quad2_members({2, 3}), 0.5));
    EXPECT_EQ(rep.regime, Regime::IIc);
    EXPECT_EQ(rep.confidence, "low");
    EXPECT_THROW(regime_classify(diagnostic_series(quad2_members({2}), 0.5)), DomainError);
}

TEST(RegimeClassify, NonPositiveTrendIsInconclusive) {
    DiagnosticSeries s;
    s.k_values = {1, 2, 4};
    s.mu = {1, 0.5, 0.25};
    s.u0 = {0, 20, 40};
    s.d_k = {1.0, -1.0, 0.5};
    s.mass_delta = {1, 2, 3};
    EXPECT_EQ(regime_classify(s).regime, Regime::Inconclusive);
}

TEST(Extrapolation, GeometricSequenceIsExact) {
    std::vector<double> m;
    for (int j = 0; j < 5; ++j) m.push_back(3.0 - std::pow(0.25, j));
    const auto [lim, used] = detail::extrapolate_limit(m);
    EXPECT_TRUE(used);
    EXPECT_NEAR(lim, 3.0, 1e-12);
    const std::vector<double> flat{1.0, 1.0, 1.0};
    EXPECT_FALSE(detail::extrapolate_limit(flat).second);
}

TEST(RescaledV, LogMemberRescalesToBubble) {
    const auto m = log_family(16);
    for (double x : {0.0, 1.0, 3.0, 10.0, 16.0}) EXPECT_NEAR(rescaled_v(m, x), v0(x), 1e-13);
    EXPECT_THROW(rescaled_v(m, 17.0), DomainError);
}

TEST(NeckEnergy, LogFamilyOracle) {
    for (int k : {16, 64}) {
        const auto m = log_family(k);
        for (double R : {2.0, 5.0, 20.0}) {
            if (R >= 0.5 * k) continue;
            const double expect = quantum * (outer_fraction(R) - outer_fraction(0.5 * k));
            EXPECT_NEAR(neck_energy(m, 0.5, R), expect, 1e-10 * quantum) << k << " " << R;
        }
    }
}

TEST(NeckEnergy, DecreasesInR) {
    const auto m = log_family(64);
    double prev = INFINITY;
    for (double R : {1.0, 2.0, 4.0, 8.0, 16.0, 30.0}) {
        const double e = neck_energy(m, 0.5, R);
        EXPECT_LT(e, prev);
        prev = e;
    }
}

TEST(NeckEnergy, UnitDensityIsAnnulusVolume) {
    const auto m = zero_member(1, 0.01);
    const double delta = 0.5, R = 10.0, a = R * 0.01;
    EXPECT_NEAR(neck_energy(m, delta, R), pi2 * (std::pow(delta, 4) - std::pow(a, 4)) / 2.0, 1e-13);
}

TEST(NeckEnergy, MassDecomposes) {
    const auto m = log_family(32);
    const double R = 6.0;
    EXPECT_NEAR(member_mass(m, 0.0, R / 32.0) + neck_energy(m, 0.5, R), member_mass(m, 0.0, 0.5), 1e-11 * quantum);
}

TEST(NeckEnergy, RejectsOversizedCore) {
    const auto m = log_family(4);
    EXPECT_THROW(neck_energy(m, 0.5, 2.0), DomainError);
    EXPECT_THROW(neck_energy(m, 0.5, 0.0), DomainError);
}

TEST(WeightedPeak, BubbleMaximum) {
    // sup r e^{v0} is attained at r = 96^{1/4}
    EXPECT_NEAR(wpe_sup(bubble_member(), 0.0, 10.0), std::pow(96.0, 0.25) / 2.0, 1e-12);
    EXPECT_NEAR(wpe_sup(zero_member(1), 0.5, 1.0), 1.0, 1e-15);
}

TEST(WeightedPeak, LogFamilyOracle) {
    for (int k : {4, 16, 64}) {
        // r e^{u_k(r)} = rho e^{v0(rho)}, rho = k r, decreasing past 96^{1/4}
        const double rho = std::max(0.25 * k, std::min(0.5 * k, std::pow(96.0, 0.25)));
        EXPECT_NEAR(wpe_sup(log_family(k), 0.25, 0.5), rho * std::exp(v0(rho)), 1e-12) << k;
    }
}

TEST(EllipticFirst, ParaboloidVanishes) {
    EXPECT_NEAR(ef1_sup(paraboloid(0.3, 5.0), 0.5), 0.0, 1e-15);
}

TEST(EllipticFirst, QuadIIShrinks) {
    const double a = ef1_sup(quad2_family(2), 0.5);
    const double b = ef1_sup(quad2_family(3), 0.5);
    EXPECT_GT(a, 0.0);
    EXPECT_LE(b, 2.0 * a);
    EXPECT_NEAR(a, 9.87e-4, 1e-5);
}

TEST(EllipticFirst, InvariantUnderRescaling) {
    const auto m = log_family(8);
    const auto r = rescaled_member(m, 2.0);
    EXPECT_NEAR(ef1_sup(r, 0.25), ef1_sup(m, 0.5), 1e-12);
}

TEST(IntegralLaplacian, LogFamilyClosedForm) {
    for (int k : {8, 16}) {
        const double d = lap_v0(0.5 * k);
        for (double R : {1.0, 2.0, 3.5}) {
            const double expect = 2.0 * pi2 * (2.0 * R * R / (s96 + R * R) - d * R * R / 4.0);
            EXPECT_NEAR(intvk_ratio(log_family(k), 0.5, R), expect, 1e-10) << k << " " << R;
        }
    }
}

TEST(IntegralLaplacian, DependsOnlyOnKDelta) {
    EXPECT_NEAR(intvk_ratio(log_family(8), 0.5, 2.0), intvk_ratio(log_family(16), 0.25, 2.0), 1e-12);
}

TEST(IntegralLaplacian, ConstantLaplacianVanishes) {
    EXPECT_EQ(intvk_ratio(zero_member(1), 0.5, 10.0), 0.0);
    EXPECT_NEAR(intvk_ratio(paraboloid(0.0, 3.0), 0.5, 2.0), 0.0, 1e-15);
    EXPECT_THROW(intvk_ratio(log_family(4), 0.5, 2.0), DomainError);
}

TEST(EllipticSecond, ParaboloidVanishes) {
    EXPECT_NEAR(ef2_residual(paraboloid(1.0, 7.0), 0.5), 0.0, 1e-15);
    EXPECT_THROW(ef2_residual(zero_member(1), 0.5), DomainError);
}

TEST(EllipticSecond, QuadIIShrinks) {
    const double a = ef2_residual(quad2_family(2), 0.5);
    const double b = ef2_residual(quad2_family(3), 0.5);
    EXPECT_LE(b, 1.5 * a);
    EXPECT_NEAR(a, 4.33e-4, 1e-5);
}

TEST(MonotoneRadius, WindowStart) {
    EXPECT_EQ(mono_window_start(1.0), 4.0);
    EXPECT_GT(mono_window_start(1.9), 4.0);
    EXPECT_THROW(mono_radius(log_family(8), 2.0, 0.5), DomainError);
    EXPECT_THROW(mono_radius(log_family(8), 0.5, 0.5), DomainError);
}

TEST(MonotoneRadius, LogFamilyReachesDelta) {
    for (int k : {16, 64}) {
        const auto r = mono_radius(log_family(k), 1.0, 0.5);
        EXPECT_EQ(r.r_k, 0.5);
        EXPECT_FALSE(r.break_found);
    }
}

TEST(MonotoneRadius, IncreasingAtStart) {
    const auto r = mono_radius(zero_member(1, 0.01), 1.0, 0.5);
    EXPECT_DOUBLE_EQ(r.r_k, 0.04);
    EXPECT_FALSE(r.break_found);
}

TEST(MonotoneRadius, InteriorBreak) {
    // eta/r + u' = r - r0 changes sign at r0
    const double r0 = 0.3;
    auto stub = [](double) { return 0.0; };
    const auto m = function_member(1, 0.01, stub, [=](double r) { return -1.0 / r + (r - r0); }, stub, stub);
    const auto res = mono_radius(m, 1.0, 0.5);
    EXPECT_TRUE(res.break_found);
    EXPECT_NEAR(res.r_k, r0, 1e-12);
}

TEST(MonotoneBreaksDetect, PolynomialField) {
    // u = -r^2/8 + r^4/24: Delta u = 1 - r^2, u' = -r/4 + r^3/6
    const auto m = function_member(
        1, 1.0, [](double r) { return -r * r / 8.0 + r * r * r * r / 24.0; },
        [](double r) { return -r / 4.0 + r * r * r / 6.0; }, [](double r) { return 1.0 - r * r; },
        [](double r) { return -2.0 * r; }, {}, 2.0);
    const auto b = detect_monotone_breaks(m, 2.0);
    ASSERT_TRUE(b.s_k && b.tau_k);
    EXPECT_NEAR(*b.s_k, 1.0, 1e-12);
    EXPECT_NEAR(*b.tau_k, std::sqrt(1.5), 1e-12);
    const auto early = detect_monotone_breaks(m, 1.1);
    ASSERT_TRUE(early.s_k);
    EXPECT_FALSE(early.tau_k);
}

TEST(MonotoneBreaksDetect, NoBreaksForBubble) {
    const auto b = detect_monotone_breaks(log_family(8), 1.0);
    EXPECT_FALSE(b.s_k);
    EXPECT_FALSE(b.tau_k);
}

TEST(MonotoneBreaksDetect, NonPositiveLaplacianAtOrigin) {
    const auto b = detect_monotone_breaks(PolyGaussField({0.0, 1.0}, 1.0, 3.0), 3.0);
    ASSERT_TRUE(b.s_k);
    EXPECT_EQ(*b.s_k, 0.0);
}

TEST(NeckFitTest, RecoversSyntheticSlopes) {
    for (double a : {2.0, 1.0, 0.5}) {
        std::vector<double> xs, ys;
        for (int i = 0; i <= 50; ++i) {
            const double x = 0.1 + 0.9 * i / 50.0;
            xs.push_back(x);
            ys.push_back(a * std::log(1.0 / x) + (a - 1.0) * (x * x - 1.0) / 2.0);
        }
        const auto fit = fit_neck_profile(xs, ys);
        EXPECT_NEAR(fit.a, a, 1e-12);
        EXPECT_TRUE(fit.is_neck);
    }
}

TEST(NeckFitTest, BubbleTailIsNotANeck) {
    const double r0 = std::pow(96.0, 0.25);
    std::vector<double> xs, ys;
    for (int i = 0; i <= 50; ++i) {
        const double x = 0.2 + 0.8 * i / 50.0;
        xs.push_back(x);
        ys.push_back(v0(r0 / x) - v0(r0));
    }
    const auto fit = fit_neck_profile(xs, ys);
    EXPECT_FALSE(fit.is_neck);
    EXPECT_GT(fit.rms_residual, 1e-3);
}

TEST(NeckFitTest, RejectsDegenerateSamples) {
    const std::vector<double> one{1.0, 1.0}, zero{0.0, 0.0};
    EXPECT_THROW(fit_neck_profile(one, zero), DomainError);
    const std::vector<double> bad{0.0, 0.5};
    EXPECT_THROW(fit_neck_profile(bad, zero), DomainError);
}

TEST(EstimateSuite, QuadIIPassesItsLemmas) {
    EstimateOptions opt;
    opt.regime = Regime::IIc;
    const auto rep = estimate_suite(quad2_members({2, 3, 4}), opt);
    ASSERT_EQ(rep.members.size(), 3u);
    EXPECT_TRUE(rep.all_pass());
    EXPECT_TRUE(rep.ef1_pass.value());
    EXPECT_TRUE(rep.ef2_pass.value());
    EXPECT_FALSE(rep.mono_pass.has_value());
}

TEST(EstimateSuite, LogFamilyPassesItsLemmas) {
    EstimateOptions opt;
    opt.regime = Regime::IIa;
    const auto rep = estimate_suite(log_members({4, 8, 16, 32, 64}), opt);
    EXPECT_TRUE(rep.all_pass());
    EXPECT_TRUE(rep.mono_pass.value());
    EXPECT_TRUE(rep.wpe_pass.value());
    EXPECT_TRUE(rep.intvk_pass.value());
    EXPECT_FALSE(rep.ef1_pass.has_value());
    EXPECT_DOUBLE_EQ(rep.intvk_R, 0.5 * 0.5 * 4.0);
    for (const auto& e : rep.members) EXPECT_FALSE(e.mono_break);
}

TEST(EstimateSuite, GrowthCheck) {
    const std::vector<double> ok{1.0, 1.9, 3.7, NAN, 3.0, 0.0};
    EXPECT_TRUE(detail::bounded_growth(ok, 2.0));
    const std::vector<double> bad{1.0, 2.5};
    EXPECT_FALSE(detail::bounded_growth(bad, 2.0));
    EXPECT_THROW(estimate_suite(std::span<const FamilyMember>{}), DomainError);
}
