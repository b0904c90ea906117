#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "liouville4/analytic_fields.hpp"
#include "liouville4/entire_solutions.hpp"

using namespace liouville4;

namespace {

const double s96 = std::sqrt(96.0);
const double beta_star = std::sqrt(2.0 / 3.0);
const double bubble = 16.0 * std::numbers::pi * std::numbers::pi;

double v0(double r) { return std::log(s96 / (s96 + r * r)); }
double v0_lap(double r) {
    const double t = s96 + r * r;
    return 8.0 / t - 4.0 * r * r / (t * t);
}
double v0_lap_prime(double r) {
    const double t = s96 + r * r;
    return -16.0 * r / (t * t) - 8.0 * r / (t * t) + 16.0 * r * r * r / (t * t * t);
}

RadialProfile sampled(std::vector<double> radii, auto u, auto du, auto w, auto dw) {
    RadialProfile p;
    for (double r : radii) {
        p.u.push_back(u(r));
        p.du.push_back(du(r));
        p.w.push_back(w(r));
        p.dw.push_back(dw(r));
    }
    p.grid = RadialGrid(std::move(radii));
    return p;
}

std::vector<double> nodes(double a, double b, int n) {
    std::vector<double> r(n + 1);
    for (int i = 0; i <= n; ++i) r[i] = a + (b - a) * i / n;
    return r;
}

}  // namespace

TEST(Shoot, BubbleIsLogEntire) {
    const auto res = shoot(8.0 / s96);
    EXPECT_EQ(res.cls.tag, TrajectoryTag::LogEntire);
    EXPECT_TRUE(res.cls.confident);
    EXPECT_NEAR(res.energy_total, bubble, 1e-6 * bubble);
    EXPECT_GT(res.energy_tail, 0.0);
    EXPECT_NEAR(res.energy_total, res.energy_quadrature + res.energy_tail, 1e-12);
}

TEST(Shoot, BetaTwoIsQuadraticBelowQuantum) {
    const auto res = shoot(2.0);
    EXPECT_EQ(res.cls.tag, TrajectoryTag::QuadraticEntire);
    EXPECT_GT(res.cls.a_slope, 0.0);
    EXPECT_GT(res.energy_total, 0.0);
    EXPECT_LT(res.energy_total, bubble);
    // regression values of this run
    EXPECT_NEAR(res.cls.a_slope, 0.217801, 2e-6);
    EXPECT_NEAR(res.energy_total, 10.70905, 1e-4);
}

TEST(Shoot, BetaZeroGrows) {
    // the corrected limit is negative from the first step, which certifies growth
    const auto res = shoot(0.0);
    EXPECT_EQ(res.cls.tag, TrajectoryTag::Growth);
    EXPECT_EQ(res.event.cause, GrowthCause::NegativeLimit);
    EXPECT_LT(res.cls.r_stop, 1e-2);
    EXPECT_EQ(res.energy_tail, 0.0);
    // without the early exit the shot runs into the ceiling
    ShootConfig cfg;
    cfg.ode.abort_on_negative_limit = false;
    const auto full = shoot(0.0, cfg);
    EXPECT_EQ(full.cls.tag, TrajectoryTag::Growth);
    EXPECT_EQ(full.event.kind, TerminationKind::GrowthAbort);
    EXPECT_NE(full.event.cause, GrowthCause::NegativeLimit);
    EXPECT_NEAR(full.cls.r_stop, 4.13525491413, 1e-6);
}

TEST(Shoot, StepFailurePropagates) {
    ShootConfig cfg;
    cfg.ode.max_steps = 3;
    EXPECT_THROW(shoot(1.0, cfg), NumericalError);
    EXPECT_THROW(shoot(NAN), DomainError);
}

TEST(Classify, ExactBubbleSamples) {
    const auto p = sampled(nodes(0.0, 50.0, 500), v0, [](double r) { return -2.0 * r / (s96 + r * r); }, v0_lap,
                           v0_lap_prime);
    TerminationEvent ev;
    const auto c = classify_trajectory(p, ev);
    EXPECT_EQ(c.tag, TrajectoryTag::LogEntire);
    EXPECT_TRUE(c.confident);
    EXPECT_NEAR(p.w.back() * 2500.0, 4.0, 0.05);
}

TEST(Classify, ConstantLaplacianEightIsQuadraticWithSlopeOne) {
    const auto p = sampled(
        nodes(0.0, 50.0, 100), [](double r) { return -r * r; }, [](double r) { return -2.0 * r; },
        [](double) { return 8.0; }, [](double) { return 0.0; });
    const auto c = classify_trajectory(p, TerminationEvent{});
    EXPECT_EQ(c.tag, TrajectoryTag::QuadraticEntire);
    EXPECT_DOUBLE_EQ(c.a_slope, 1.0);
}

TEST(Classify, GrowthAbortEvent) {
    const auto p = sampled(nodes(0.0, 3.0, 10), [](double) { return 0.0; }, [](double) { return 0.0; },
                           [](double) { return 0.0; }, [](double) { return 0.0; });
    TerminationEvent ev;
    ev.kind = TerminationKind::GrowthAbort;
    ev.r_stop = 3.0;
    const auto c = classify_trajectory(p, ev);
    EXPECT_EQ(c.tag, TrajectoryTag::Growth);
    EXPECT_EQ(c.r_stop, 3.0);
}

TEST(Classify, AmbiguousProfileIsFlagged) {
    // w r^2 = 2 at the outer radius and a slightly negative corrected limit:
    // neither the quadratic nor the log test passes
    const auto p = sampled(
        nodes(1.0, 50.0, 100), [](double r) { return -std::log(r); }, [](double r) { return -1.0 / r; },
        [](double r) { return 2.0 / (r * r); }, [](double r) { return -4.4 / (r * r * r); });
    const auto c = classify_trajectory(p, TerminationEvent{});
    EXPECT_FALSE(c.confident);
    EXPECT_EQ(c.tag, TrajectoryTag::LogEntire);
}

TEST(AsymptoticSlope, ExactParabola) {
    const auto p = sampled(
        nodes(0.0, 50.0, 200), [](double r) { return -r * r; }, [](double r) { return -2.0 * r; },
        [](double) { return 8.0; }, [](double) { return 0.0; });
    const auto fit = asymptotic_slope(p);
    EXPECT_NEAR(fit.a, 1.0, 1e-10);
    EXPECT_NEAR(fit.log_coeff, 0.0, 1e-7);
    EXPECT_TRUE(fit.consistent);
}

TEST(AsymptoticSlope, ParabolaWithLogCorrection) {
    auto u = [](double r) { return -3.0 * r * r - 2.0 * std::log(1.0 + r); };
    auto du = [](double r) { return -6.0 * r - 2.0 / (1.0 + r); };
    auto w = [](double r) { return 24.0 + 2.0 * (1.0 / ((1.0 + r) * (1.0 + r)) + 3.0 / (r * (1.0 + r))); };
    auto dw = [](double r) {
        return 2.0 * (-2.0 / std::pow(1.0 + r, 3) - 3.0 * (1.0 + 2.0 * r) / std::pow(r * (1.0 + r), 2));
    };
    const auto p = sampled(nodes(1.0, 50.0, 400), u, du, w, dw);
    const auto fit = asymptotic_slope(p);
    EXPECT_NEAR(fit.a, 3.0, 1e-4);
    EXPECT_TRUE(fit.consistent);
}

TEST(AsymptoticSlope, AgreesWithLaplacianOnShot) {
    const auto res = shoot(2.0);
    const auto fit = asymptotic_slope(res.profile);
    EXPECT_TRUE(fit.consistent);
    EXPECT_NEAR(fit.a, res.cls.a_slope, 0.01 * res.cls.a_slope);
}

TEST(AsymptoticSlope, FlagsDisagreement) {
    // u says a = 1, w says a = 2
    const auto p = sampled(
        nodes(0.0, 50.0, 200), [](double r) { return -r * r; }, [](double r) { return -2.0 * r; },
        [](double) { return 16.0; }, [](double) { return 0.0; });
    EXPECT_FALSE(asymptotic_slope(p).consistent);
}

TEST(BetaStar, WideBracket) {
    EXPECT_NEAR(find_beta_star(0.5, 1.0, 1e-8), beta_star, 1e-6);
    EXPECT_NEAR(beta_star, 0.81649658, 1e-8);
}

TEST(BetaStar, NarrowBracket) { EXPECT_NEAR(find_beta_star(0.8, 0.82, 1e-6), beta_star, 1e-6); }

TEST(BetaStar, InvalidBracket) {
    EXPECT_THROW(find_beta_star(1.0, 2.0, 1e-6), DomainError);
    EXPECT_THROW(find_beta_star(0.0, 0.5, 1e-6), DomainError);
    EXPECT_THROW(find_beta_star(1.0, 0.5, 1e-6), DomainError);
}

TEST(BetaStar, BracketSidesNearCritical) {
    EXPECT_EQ(shoot(beta_star - 1e-3).cls.tag, TrajectoryTag::Growth);
    EXPECT_EQ(shoot(beta_star + 1e-3).cls.tag, TrajectoryTag::QuadraticEntire);
}

TEST(Scan, CriticalOnly) {
    const std::vector<double> betas{beta_star};
    const auto rows = energy_vs_beta_scan(betas);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].cls, "LogEntire");
    EXPECT_NEAR(rows[0].energy, bubble, 1e-6 * bubble);
}

TEST(Scan, QuadraticRowsInOrder) {
    const std::vector<double> betas{2.0, 1.0, 1.5};
    const auto rows = energy_vs_beta_scan(betas);
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(rows[i].beta, betas[i]);
        EXPECT_EQ(rows[i].cls, "QuadraticEntire");
        EXPECT_GT(rows[i].energy, 0.0);
        EXPECT_LT(rows[i].energy, bubble);
    }
    EXPECT_GT(rows[1].energy, rows[2].energy);
    EXPECT_GT(rows[2].energy, rows[0].energy);
}

TEST(Scan, EmptyAndErrorRows) {
    EXPECT_TRUE(energy_vs_beta_scan(std::vector<double>{}).empty());
    const std::vector<double> betas{1.0, NAN, 2.0};
    const auto rows = energy_vs_beta_scan(betas);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].cls, "QuadraticEntire");
    EXPECT_EQ(rows[1].cls, "Error");
    EXPECT_FALSE(rows[1].error.empty());
    EXPECT_EQ(rows[2].cls, "QuadraticEntire");
}

TEST(Scan, WorkerCountDoesNotChangeResults) {
    const std::vector<double> betas{0.3, 0.9, 1.2, 1.7, 2.4};
    const auto a = energy_vs_beta_scan(betas, {}, 1);
    const auto b = energy_vs_beta_scan(betas, {}, 4);
    for (std::size_t i = 0; i < betas.size(); ++i) {
        EXPECT_EQ(a[i].cls, b[i].cls);
        EXPECT_EQ(std::isnan(a[i].energy) ? 0.0 : a[i].energy, std::isnan(b[i].energy) ? 0.0 : b[i].energy);
    }
}

// ---------------------------------------------------------------------------
// Properties

TEST(EntireProperty, QuadraticEnergiesStayBelowQuantum) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 12; ++trial) {
        const double beta = uniform_from(rng, beta_star + 0.05, 4.0);
        const auto res = shoot(beta);
        ASSERT_EQ(res.cls.tag, TrajectoryTag::QuadraticEntire) << beta;
        EXPECT_GT(res.energy_total, 0.0);
        EXPECT_LT(res.energy_total, bubble * (1.0 - 1e-3)) << beta;
    }
}

TEST(EntireProperty, LaplacianStrictlyDecreasingAlongShots) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 12; ++trial) {
        const auto res = shoot(uniform_from(rng, -1.0, 4.0));
        for (std::size_t i = 1; i < res.profile.size(); ++i) ASSERT_LT(res.profile.w[i], res.profile.w[i - 1]);
    }
}

TEST(EntireProperty, ClassStableUnderTighterTolerances) {
    ShootConfig tight;
    tight.ode.rtol *= 0.5;
    tight.ode.atol *= 0.5;
    for (double beta : {0.0, 0.5, beta_star - 1e-3, beta_star, beta_star + 1e-3, 1.0, 1.5, 2.0}) {
        EXPECT_EQ(shoot(beta).cls.tag, shoot(beta, tight).cls.tag) << beta;
    }
}
