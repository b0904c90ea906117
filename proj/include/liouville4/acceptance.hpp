#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "liouville4/analytic_fields.hpp"
#include "liouville4/diagnostics.hpp"
#include "liouville4/entire_solutions.hpp"
#include "liouville4/families.hpp"
#include "liouville4/greens_pohozaev.hpp"
#include "liouville4/io.hpp"

namespace liouville4::acceptance {

using io::json;

struct Criterion {
    int id = 0;
    std::string name;
    bool pass = false;
    double tolerance = 0.0;
    std::string summary;
    json measured = json::object();
};

struct Options {
    /// Criterion names or ids to run; empty runs all twelve.
    std::set<std::string> only;
    /// Replaces every numeric tolerance when set.
    std::optional<double> tol;
    /// Seed of the random-profile generator.
    std::uint64_t seed = 20240601;
    /// Number of random profiles in the Pohozaev property suite.
    int random_profiles = 100;
};

struct Spec {
    int id;
    const char* name;
    double tolerance;
};

/// Pinned tolerances, one per criterion.
inline constexpr Spec criteria[] = {
    {1, "beta_star", 1e-6},       {2, "closed_form", 1e-6},    {3, "quantization", 1e-8},
    {4, "sub_quantization", 1e-3}, {5, "trichotomy", 2e-2},      {6, "log_mass", 1e-3},
    {7, "quad2_mass", 1e-6},       {8, "neck_energy", 1e-2},     {9, "pohozaev", 1e-8},
    {10, "representation", 1e-7},  {11, "estimates", 1e-6},      {12, "determinism", 0.0},
};

inline bool selected(const Options& opt, const Spec& s) {
    return opt.only.empty() || opt.only.count(s.name) || opt.only.count(std::to_string(s.id));
}

/// Rejects names in `only` that match no criterion.
inline void validate(const Options& opt) {
    for (const auto& key : opt.only) {
        bool known = false;
        for (const auto& s : criteria) known = known || key == s.name || key == std::to_string(s.id);
        if (!known) throw DomainError("unknown criterion '" + key + "'");
    }
    if (opt.tol) detail::require(*opt.tol > 0.0, "tolerance override must be positive");
    detail::require(opt.random_profiles >= 1, "random profile count must be positive");
}

namespace detail {

const double beta_log = std::sqrt(2.0 / 3.0);

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

/// Shared intermediate results, computed on first use.
struct Context {
    std::optional<ShootResult> log_shot;
    std::optional<double> beta_star;
    std::shared_ptr<const ShootResult> quad1_backing;

    const ShootResult& log() {
        if (!log_shot) log_shot = shoot(beta_log);
        return *log_shot;
    }
    const std::shared_ptr<const ShootResult>& quad1() {
        if (!quad1_backing) quad1_backing = std::make_shared<const ShootResult>(shoot(1.5));
        return quad1_backing;
    }
};

inline void beta_star(Criterion& c, Context& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    const double b = find_beta_star(0.5, 1.0, 1e-8);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ctx.beta_star = b;
    const double err = std::abs(b - beta_log);
    c.pass = err < c.tolerance && secs < 30.0;
    c.measured = {{"beta_star", b}, {"error", err}, {"under_30s", secs < 30.0}};
    c.summary = "|beta* - sqrt(2/3)| = " + fmt(err);
}

inline void closed_form(Criterion& c, Context& ctx) {
    const auto& s = ctx.log();
    const auto v = ProfileInterpolant::on_solution(s.profile);
    double worst = 0.0;
    const auto& g = s.profile.grid;
    for (std::size_t i = 0; i < g.size(); ++i) {
        worst = std::max(worst, std::abs(s.profile.u[i] - bubble_value(g[i])));
        if (i + 1 < g.size()) {
            const double mid = 0.5 * (g[i] + g[i + 1]);
            worst = std::max(worst, std::abs(v.value(mid) - bubble_value(mid)));
        }
    }
    c.pass = s.cls.tag == TrajectoryTag::LogEntire && worst < c.tolerance && g.back() >= 50.0;
    c.measured = {{"class", to_string(s.cls.tag)}, {"sup_error", worst}, {"r_max", g.back()}};
    c.summary = "sup|v - v0| on [0, 50] = " + fmt(worst);
}

inline void quantization(Criterion& c, Context&) {
    ShootConfig cfg;
    cfg.ode.r_max = 100.0;
    const auto s = shoot(beta_log, cfg);
    const double err = rel(s.energy_total, bubble_energy);
    c.pass = err < c.tolerance;
    c.measured = {{"energy", s.energy_total}, {"energy_tail", s.energy_tail}, {"relative_error", err}};
    c.summary = "energy(v0) / 16 pi^2 - 1 = " + fmt((s.energy_total - bubble_energy) / bubble_energy);
}

inline void sub_quantization(Criterion& c, Context&) {
    c.pass = true;
    c.measured = json::array();
    double worst_margin = INFINITY;
    for (double beta : {1.0, 1.5, 2.0}) {
        const auto s = shoot(beta);
        const double margin = std::min(s.energy_total, bubble_energy - s.energy_total) / bubble_energy;
        const bool ok = s.cls.tag == TrajectoryTag::QuadraticEntire && margin > c.tolerance;
        c.pass = c.pass && ok;
        worst_margin = std::min(worst_margin, margin);
        c.measured.push_back({{"beta", beta}, {"class", to_string(s.cls.tag)}, {"energy", s.energy_total},
                              {"a", s.cls.a_slope}, {"margin", margin}});
    }
    c.summary = "smallest margin / 16 pi^2 = " + fmt(worst_margin);
}

inline void trichotomy(Criterion& c, Context& ctx) {
    std::vector<FamilyMember> log, q1, q2;
    for (int k : {8, 16, 32, 64}) log.push_back(log_family(k));
    for (int k : {8, 16, 32, 64}) q1.push_back(quad1_family(k, ctx.quad1()));
    for (int k : {2, 3, 4}) q2.push_back(quad2_family(k));
    const auto r_log = regime_classify(diagnostic_series(log, 0.5));
    const auto s_q1 = diagnostic_series(q1, 0.5);
    const auto r_q1 = regime_classify(s_q1);
    const auto r_q2 = regime_classify(diagnostic_series(q2, 0.5));
    const double eight_a = 8.0 * ctx.quad1()->cls.a_slope;
    const double dk_err = rel(s_q1.d_k.back(), eight_a);
    c.pass = r_log.regime == Regime::IIa && r_q1.regime == Regime::IIb && r_q2.regime == Regime::IIc &&
             dk_err < c.tolerance;
    c.measured = {{"log", io::to_json(r_log)},
                  {"quad1", io::to_json(r_q1)},
                  {"quad2", io::to_json(r_q2)},
                  {"quad1_d64", s_q1.d_k.back()},
                  {"eight_a", eight_a},
                  {"d64_relative_error", dk_err}};
    c.summary = "log " + to_string(r_log.regime) + ", quad1 " + to_string(r_q1.regime) + ", quad2 " +
                to_string(r_q2.regime) + "; |d_64 / 8a - 1| = " + fmt(dk_err);
}

inline void log_mass(Criterion& c, Context&) {
    const double mass = member_mass(log_family(64), 0.0, 0.5);
    const double out32 = bubble_outer_fraction(32.0);
    const double oracle = bubble_energy * (1.0 - out32);
    const double oracle_err = rel(mass, oracle);
    const double quantum_err = rel(mass, bubble_energy);
    c.pass = oracle_err < 1e-10 && std::abs(out32 - 2.678e-4) < 5e-8 && quantum_err < c.tolerance;
    c.measured = {{"mass", mass}, {"oracle", oracle}, {"outer_fraction_32", out32},
                  {"oracle_relative_error", oracle_err}, {"quantum_relative_error", quantum_err}};
    c.summary = "mass(B_1/2), k=64: oracle error " + fmt(oracle_err) + ", distance to 16 pi^2 " + fmt(quantum_err);
}

inline void quad2_mass(Criterion& c, Context&) {
    c.pass = true;
    c.measured = json::array();
    double worst = 0.0;
    for (int k : {2, 3}) {
        const auto m = quad2_family(k);
        const double mass = member_mass(m, 0.0, 1.0);
        const double oracle = 4.0 * pi * pi / std::pow(k, 8);
        const double err = rel(mass, oracle);
        const double d0 = m.mu() * m.mu() * m.laplacian(0.0);
        const bool exact = d0 == std::pow(k, 4);
        c.pass = c.pass && err < c.tolerance && exact;
        worst = std::max(worst, err);
        c.measured.push_back({{"k", k}, {"mass", mass}, {"oracle", oracle}, {"relative_error", err},
                              {"d_at_origin", d0}});
    }
    c.summary = "worst |mass k^8 / 4 pi^2 - 1| = " + fmt(worst);
}

inline void neck_energy_check(Criterion& c, Context&) {
    const auto m = log_family(64);
    c.pass = true;
    c.measured = json::array();
    double prev = INFINITY, worst = 0.0;
    for (double R : {5.0, 10.0, 20.0}) {
        const double e = neck_energy(m, 0.5, R);
        const double oracle = bubble_energy * (bubble_outer_fraction(R) - bubble_outer_fraction(32.0));
        const double err = rel(e, oracle);
        c.pass = c.pass && err < c.tolerance && e < prev;
        prev = e;
        worst = std::max(worst, err);
        c.measured.push_back({{"R", R}, {"neck_energy", e}, {"oracle", oracle}, {"relative_error", err}});
    }
    c.summary = "worst neck-energy error " + fmt(worst) + ", decreasing in R";
}

inline void pohozaev(Criterion& c, Context& ctx, const Options& opt) {
    std::mt19937_64 rng(opt.seed);
    double worst = 0.0;
    for (int i = 0; i < opt.random_profiles; ++i) {
        const auto f = random_poly_gauss(rng, 3.0);
        const double r = uniform_from(rng, 0.2, 3.0);
        const auto t = pohozaev_terms(f, r, [&](double s) { return f.bilaplacian(s); });
        worst = std::max(worst, std::abs(t.volume - t.boundary) / (1.0 + std::abs(t.boundary)));
    }
    const auto t = pohozaev_terms(ctx.log().profile, 50.0);
    const double bnd_err = rel(t.boundary, -bubble_energy);
    c.pass = worst < c.tolerance && bnd_err < 5e-3;
    c.measured = {{"random_profiles", opt.random_profiles}, {"seed", opt.seed}, {"worst_scaled_gap", worst},
                  {"v0_r50", io::to_json(t)}, {"v0_boundary_relative_error", bnd_err}};
    c.summary = "random gap " + fmt(worst) + "; v0 boundary at r=50 off by " + fmt(bnd_err);
}

/// Biharmonic radial fields a + b r^2 (Delta^2 = 0): the representation
/// reduces to its boundary part and must be reproduced to rounding.
struct Paraboloid {
    double a, b, R;
    [[nodiscard]] double value(double r) const { return a + b * r * r; }
    [[nodiscard]] double derivative(double r) const { return 2.0 * b * r; }
    [[nodiscard]] double laplacian(double) const { return -8.0 * b; }
    [[nodiscard]] double laplacian_derivative(double) const { return 0.0; }
    [[nodiscard]] double max_radius() const { return R; }
};

inline void representation(Criterion& c, Context& ctx) {
    const double v0_res = representation_residual(ctx.log().profile, 0.5);
    double biharm = 0.0;
    for (const auto& p : {Paraboloid{1.0, 0.3, 1.0}, Paraboloid{-2.0, 5.0, 1.0}, Paraboloid{0.5, -1.0, 1.0}}) {
        const double res = representation_residual(p, 0.5, [](double) { return 0.0; });
        biharm = std::max(biharm, res / (1.0 + std::abs(p.a) + std::abs(p.b)));
    }
    double kernel = 0.0;
    for (int i = 1; i <= 20; ++i) {
        const double r = 0.5 * i / 21.0;
        const double lap = radial_laplacian_at([](double s) { return h_delta_at_zero(std::abs(s), 0.5); }, r, 1e-3 * r);
        kernel = std::max(kernel, rel(lap, g_delta_radial(r, 0.0, 0.5)));
    }
    const double machine = 64.0 * std::numeric_limits<double>::epsilon();
    c.pass = v0_res < c.tolerance && biharm <= machine && kernel < 1e-6;
    c.measured = {{"v0_residual", v0_res}, {"biharmonic_residual", biharm}, {"kernel_relative_error", kernel}};
    c.summary = "v0 residual " + fmt(v0_res) + ", biharmonic " + fmt(biharm) + ", Delta H = G " + fmt(kernel);
}

inline void estimates(Criterion& c, Context&) {
    const double wpe = wpe_sup(bubble_member(), 0.0, 10.0);
    const double wpe_err = std::abs(wpe - std::pow(96.0, 0.25) / 2.0);
    std::vector<FamilyMember> log, q2;
    for (int k : {8, 16, 32, 64}) log.push_back(log_family(k));
    for (int k : {2, 3, 4}) q2.push_back(quad2_family(k));
    EstimateOptions o_log;
    o_log.regime = Regime::IIa;
    EstimateOptions o_q2;
    o_q2.regime = Regime::IIc;
    const auto rep_log = estimate_suite(log, o_log);
    const auto rep_q2 = estimate_suite(q2, o_q2);
    c.pass = wpe_err < c.tolerance && rep_log.all_pass() && rep_q2.all_pass();
    c.measured = {{"wpe_v0", wpe}, {"wpe_error", wpe_err}, {"log", io::to_json(rep_log)}, {"quad2", io::to_json(rep_q2)}};
    c.summary = "wpe(v0) error " + fmt(wpe_err) + "; log suite " + (rep_log.all_pass() ? "bounded" : "UNBOUNDED") +
                ", quad2 suite " + (rep_q2.all_pass() ? "bounded" : "UNBOUNDED");
}

}  // namespace detail

/// Runs criteria 1 to 11 as selected; the determinism criterion is handled
/// by run().
inline std::vector<Criterion> run_numeric(const Options& opt) {
    detail::Context ctx;
    std::vector<Criterion> out;
    for (const auto& s : criteria) {
        if (s.id == 12 || !selected(opt, s)) continue;
        Criterion c;
        c.id = s.id;
        c.name = s.name;
        c.tolerance = opt.tol ? *opt.tol : s.tolerance;
        try {
            switch (s.id) {
                case 1: detail::beta_star(c, ctx); break;
                case 2: detail::closed_form(c, ctx); break;
                case 3: detail::quantization(c, ctx); break;
                case 4: detail::sub_quantization(c, ctx); break;
                case 5: detail::trichotomy(c, ctx); break;
                case 6: detail::log_mass(c, ctx); break;
                case 7: detail::quad2_mass(c, ctx); break;
                case 8: detail::neck_energy_check(c, ctx); break;
                case 9: detail::pohozaev(c, ctx, opt); break;
                case 10: detail::representation(c, ctx); break;
                case 11: detail::estimates(c, ctx); break;
                default: break;
            }
        } catch (const std::exception& e) {
            c.pass = false;
            c.summary = std::string("error: ") + e.what();
        }
        out.push_back(std::move(c));
    }
    return out;
}

inline json options_json(const Options& opt) {
    json only = json::array();
    for (const auto& o : opt.only) only.push_back(o);
    return {{"only", only},
            {"tol", opt.tol ? json(*opt.tol) : json(nullptr)},
            {"seed", opt.seed},
            {"random_profiles", opt.random_profiles}};
}

inline json report_json(const std::vector<Criterion>& cs) {
    json arr = json::array();
    bool all = true;
    for (const auto& c : cs) {
        all = all && c.pass;
        arr.push_back({{"id", c.id},
                       {"name", c.name},
                       {"pass", c.pass},
                       {"tolerance", c.tolerance},
                       {"summary", c.summary},
                       {"measured", c.measured}});
    }
    return {{"all_pass", all}, {"criteria", arr}};
}

/// Manifest bytes of one verify run: the report plus its checksum, with no
/// wall-clock content.
inline std::string manifest_bytes(const Options& opt, const std::string& report) {
    json m{{"tool", io::tool_name},
           {"version", io::tool_version},
           {"command", "verify"},
           {"config", options_json(opt)},
           {"outputs", json::array({{{"file", "verify.json"}, {"bytes", report.size()}, {"sha256", io::sha256_hex(report)}}})},
           {"volatile", json::array()}};
    return io::dump(m);
}

struct Result {
    std::vector<Criterion> criteria;
    std::string report;  // verify.json bytes
    [[nodiscard]] bool all_pass() const {
        for (const auto& c : criteria)
            if (!c.pass) return false;
        return true;
    }
};

/// Full suite. Determinism reruns the numeric criteria and compares the
/// resulting manifests byte for byte.
inline Result run(const Options& opt) {
    validate(opt);
    Result res;
    res.criteria = run_numeric(opt);
    const auto det = std::find_if(std::begin(criteria), std::end(criteria), [](const Spec& s) { return s.id == 12; });
    if (selected(opt, *det)) {
        Criterion c;
        c.id = 12;
        c.name = det->name;
        c.tolerance = 0.0;
        Options inner = opt;
        inner.only.clear();
        for (const auto& s : criteria)
            if (s.id != 12 && selected(opt, s)) inner.only.insert(s.name);
        if (inner.only.empty()) inner.only.insert("log_mass");
        const auto a = manifest_bytes(inner, io::dump(report_json(run_numeric(inner))));
        const auto b = manifest_bytes(inner, io::dump(report_json(run_numeric(inner))));
        c.pass = a == b;
        c.measured = {{"manifest_sha256_first", io::sha256_hex(a)}, {"manifest_sha256_second", io::sha256_hex(b)}};
        c.summary = c.pass ? "two runs give byte-identical manifests" : "manifests differ between runs";
        res.criteria.push_back(std::move(c));
    }
    res.report = io::dump(report_json(res.criteria));
    return res;
}

}  // namespace liouville4::acceptance
