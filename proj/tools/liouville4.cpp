// liouville4: command-line front end for the radial Liouville lab.
//
// Every command writes into one output directory together with
// manifest.json (resolved configuration plus SHA-256 of each output) and a
// volatile timing.json. Exit status: 0 success, 1 failed criterion or
// numerical failure, 2 usage error.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "liouville4/acceptance.hpp"
#include "liouville4/diagnostics.hpp"
#include "liouville4/entire_solutions.hpp"
#include "liouville4/families.hpp"
#include "liouville4/greens_pohozaev.hpp"
#include "liouville4/io.hpp"

namespace fs = std::filesystem;
using namespace liouville4;
using io::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

const char* const out_env = "LIOUVILLE4_OUT";

// ---------------------------------------------------------------------------
// JSON config files. Keys mirror the long flag names. A key may sit at the
// top level or inside a section named after the subcommand; the section
// wins. Keys that belong to another subcommand are skipped, unknown keys
// are an error.

class JsonConfig : public CLI::Config {
public:
    JsonConfig(const CLI::App* app, std::string active) : app_(app), active_(std::move(active)) {}

    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j;
        try {
            j = json::parse(input);
        } catch (const json::exception& e) {
            throw CLI::ConversionError(std::string("config: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config: top level must be a JSON object");
        std::vector<CLI::ConfigItem> found;
        std::set<std::string> seen;
        auto emit = [&](const std::string& key, const json& v, bool from_section) {
            if (!from_section && j.contains(active_) && j[active_].is_object() && j[active_].contains(key)) return;
            const auto* owner = owner_of(key);
            if (owner == nullptr) throw CLI::ConversionError("config: unknown key '" + key + "'");
            if (owner != app_ && owner->get_name() != active_) return;
            if (v.is_null()) return;  // unset optional, as written in manifests
            CLI::ConfigItem item;
            if (owner != app_) item.parents = {active_};
            item.name = key;
            item.inputs = inputs(key, v);
            found.push_back(std::move(item));
            seen.insert(key);
        };
        for (const auto& [key, v] : j.items()) {
            const auto* sub = subcommand(key);
            if (sub != nullptr) {
                if (!v.is_object()) throw CLI::ConversionError("config: section '" + key + "' must be an object");
                if (key != active_) continue;
                for (const auto& [k2, v2] : v.items()) emit(k2, v2, true);
            } else {
                emit(key, v, false);
            }
        }
        return found;
    }

private:
    const CLI::App* subcommand(const std::string& name) const {
        for (const auto* s : app_->get_subcommands([](const CLI::App*) { return true; }))
            if (s->get_name() == name) return s;
        return nullptr;
    }

    const CLI::App* owner_of(const std::string& key) const {
        for (const auto* s : app_->get_subcommands([](const CLI::App*) { return true; }))
            for (const auto* o : s->get_options())
                if (o->check_lname(key)) return s;
        for (const auto* o : app_->get_options())
            if (o->check_lname(key)) return app_;
        return nullptr;
    }

    static std::vector<std::string> inputs(const std::string& key, const json& v) {
        auto scalar = [&](const json& x) -> std::string {
            if (x.is_string()) return x.get<std::string>();
            if (x.is_boolean()) return x.get<bool>() ? "true" : "false";
            if (x.is_number()) return x.dump();
            throw CLI::ConversionError("config: value of '" + key + "' must be a scalar or array");
        };
        std::vector<std::string> out;
        if (v.is_array()) {
            for (const auto& x : v) out.push_back(scalar(x));
        } else {
            out.push_back(scalar(v));
        }
        return out;
    }

    const CLI::App* app_;
    std::string active_;
};

// ---------------------------------------------------------------------------
// Argument helpers

std::vector<double> parse_range(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ':');) {
        try {
            parts.push_back(parse_double(item));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--beta-range", "not a number: '" + item + "'");
        }
    }
    if (parts.size() != 3) throw CLI::ValidationError("--beta-range", "expected start:stop:step");
    const double a = parts[0], b = parts[1], h = parts[2];
    if (!(std::isfinite(a) && std::isfinite(b) && h > 0.0 && b >= a))
        throw CLI::ValidationError("--beta-range", "need finite start <= stop and step > 0");
    const double count = std::floor((b - a) / h + 1e-9) + 1.0;
    if (count > 1e6) throw CLI::ValidationError("--beta-range", "more than 10^6 values");
    std::vector<double> out;
    for (int i = 0; i < static_cast<int>(count); ++i) out.push_back(a + i * h);
    return out;
}

std::pair<double, double> parse_pair(const std::string& spec, const std::string& flag) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError(flag, "expected lo:hi");
    try {
        return {parse_double(spec.substr(0, colon)), parse_double(spec.substr(colon + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError(flag, "not a number pair: '" + spec + "'");
    }
}

void require_arg(bool ok, const std::string& flag, const std::string& msg) {
    if (!ok) throw CLI::ValidationError(flag, msg);
}

json doubles(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(io::number(x));
    return a;
}

// ---------------------------------------------------------------------------
// Run context shared by the commands.

struct Run {
    std::string command;
    json config = json::object();
    std::unique_ptr<io::OutputSet> out;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void finish() {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out->write_volatile("timing.json", io::dump(json{{"command", command}, {"wall_seconds", secs}}));
        out->finish(command, config);
    }
};

ShootConfig shoot_config(double rmax, double tol) {
    ShootConfig cfg;
    cfg.ode.r_max = rmax;
    cfg.ode.rtol = tol;
    cfg.ode.atol = 1e-2 * tol;
    return cfg;
}

// ---------------------------------------------------------------------------
// Commands

struct ShootArgs {
    std::optional<double> beta;
    std::string beta_range;
    double rmax = 50.0;
    double tol = 1e-10;
    unsigned workers = 0;
    std::string bracket;
    double bisect_tol = 1e-8;
};

void scan_outputs(Run& run, const std::vector<double>& betas, const ShootArgs& a) {
    const auto rows = energy_vs_beta_scan(betas, shoot_config(a.rmax, a.tol), a.workers);
    run.out->write("scan.csv", io::to_text([&](std::ostream& os) { io::write_scan_csv(os, rows); }));
    run.out->write_json("scan.json", io::scan_json(rows));
    std::size_t errors = 0;
    for (const auto& r : rows) errors += r.cls == "Error";
    std::cout << "scan: " << rows.size() << " rows";
    if (errors) std::cout << " (" << errors << " with errors)";
    std::cout << '\n';
}

int cmd_shoot(Run& run, const ShootArgs& a) {
    run.config = {{"beta", a.beta ? json(*a.beta) : json(nullptr)},
                  {"beta_range", a.beta_range},
                  {"rmax", a.rmax},
                  {"tol", a.tol}};
    if (!a.beta_range.empty()) {
        scan_outputs(run, parse_range(a.beta_range), a);
        return exit_ok;
    }
    const auto res = shoot(*a.beta, shoot_config(a.rmax, a.tol));
    run.out->write("profile.csv", io::to_text([&](std::ostream& os) { write_profile_csv(os, res.profile); }));
    run.out->write_json("shoot.json", io::to_json(res));
    std::cout << "shoot: beta=" << format_double(res.beta) << " class=" << to_string(res.cls.tag)
              << " energy=" << format_double(res.energy_total) << '\n';
    return exit_ok;
}

int cmd_scan(Run& run, const ShootArgs& a) {
    const auto betas = parse_range(a.beta_range);
    run.config = {{"beta_range", a.beta_range}, {"rmax", a.rmax}, {"tol", a.tol}, {"bracket", a.bracket},
                  {"bisect_tol", a.bisect_tol}};
    scan_outputs(run, betas, a);
    if (!a.bracket.empty()) {
        const auto [lo, hi] = parse_pair(a.bracket, "--bracket");
        const double b = find_beta_star(lo, hi, a.bisect_tol, shoot_config(a.rmax, a.tol));
        run.out->write_json("beta_star.json", json{{"lo", lo}, {"hi", hi}, {"tol", a.bisect_tol}, {"beta_star", b}});
        std::cout << "beta*: " << format_double(b) << '\n';
    }
    return exit_ok;
}

struct FamilyArgs {
    std::string kind;
    std::vector<int> k;
    double delta = 0.5;
    std::optional<double> beta;
    std::size_t points = 200;
    double rphi = 40.0;
    double eta = 1.0;
    double intvk_R = 0.0;
};

std::vector<FamilyMember> build_family(const FamilyArgs& a) {
    std::vector<FamilyMember> ms;
    if (a.kind == "log") {
        for (int k : a.k) ms.push_back(log_family(k));
    } else if (a.kind == "quad1") {
        auto e = std::make_shared<const ShootResult>(shoot(*a.beta));
        if (e->cls.tag != TrajectoryTag::QuadraticEntire)
            throw DomainError("quad1 needs a beta above beta*; beta=" + format_double(*a.beta) + " gives " +
                              to_string(e->cls.tag));
        for (int k : a.k) ms.push_back(quad1_family(k, e));
    } else {
        auto phi = a.rphi == 40.0 ? shared_phi_table() : std::make_shared<const PhiTable>(a.rphi);
        for (int k : a.k) ms.push_back(quad2_family(k, phi));
    }
    return ms;
}

json family_config(const FamilyArgs& a) {
    json ks = json::array();
    for (int k : a.k) ks.push_back(k);
    return {{"kind", a.kind}, {"k", ks}, {"delta", a.delta}, {"beta", a.beta ? json(*a.beta) : json(nullptr)},
            {"rphi", a.rphi}};
}

int cmd_family(Run& run, const FamilyArgs& a) {
    run.config = family_config(a);
    run.config["points"] = a.points;
    const auto ms = build_family(a);
    for (const auto& m : ms)
        run.out->write("member_k" + std::to_string(m.k()) + ".csv",
                       io::to_text([&](std::ostream& os) { io::write_member_csv(os, m, a.points); }));
    const auto series = diagnostic_series(ms, a.delta);
    run.out->write("series.csv", io::to_text([&](std::ostream& os) { io::write_series_csv(os, series); }));
    run.out->write_json("family.json", io::family_json(ms, a.delta));
    if (ms.size() >= 2) {
        const auto rep = regime_classify(series);
        run.out->write_json("regime.json", io::to_json(rep));
        std::cout << "family " << a.kind << ": regime " << to_string(rep.regime) << " (" << rep.confidence
                  << " confidence)\n";
    } else {
        std::cout << "family " << a.kind << ": one member, no regime report\n";
    }
    return exit_ok;
}

int cmd_classify(Run& run, const FamilyArgs& a) {
    run.config = family_config(a);
    run.config["eta"] = a.eta;
    run.config["intvk_R"] = a.intvk_R;
    const auto ms = build_family(a);
    const auto series = diagnostic_series(ms, a.delta);
    const auto rep = regime_classify(series);
    EstimateOptions eo;
    eo.delta = a.delta;
    eo.eta = a.eta;
    eo.intvk_R = a.intvk_R;
    eo.regime = rep.regime;
    const auto est = estimate_suite(ms, eo);
    run.out->write("series.csv", io::to_text([&](std::ostream& os) { io::write_series_csv(os, series); }));
    run.out->write_json("regime.json", io::to_json(rep));
    run.out->write_json("estimates.json", io::to_json(est));
    std::cout << "classify " << a.kind << ": regime " << to_string(rep.regime) << ", estimates "
              << (est.all_pass() ? "bounded" : "NOT bounded") << '\n';
    return exit_ok;
}

struct GreensArgs {
    double delta = 0.5;
    std::size_t points = 100;
    std::string kind = "log";
    int k = 1;
    std::optional<double> beta;
};

int cmd_greens(Run& run, const GreensArgs& a) {
    run.config = {{"delta", a.delta}, {"points", a.points}, {"kind", a.kind}, {"k", a.k},
                  {"beta", a.beta ? json(*a.beta) : json(nullptr)}};
    std::ostringstream os;
    os << "r,G0,H0\n";
    for (std::size_t i = 1; i <= a.points; ++i) {
        const double r = a.delta * static_cast<double>(i) / static_cast<double>(a.points);
        os << format_double(r) << ',' << format_double(g_delta_radial(r, 0.0, a.delta)) << ','
           << format_double(h_delta_at_zero(r, a.delta)) << '\n';
    }
    run.out->write("kernels.csv", os.str());
    FamilyArgs fa;
    fa.kind = a.kind;
    fa.k = {a.k};
    fa.beta = a.beta;
    const auto m = build_family(fa).front();
    const double res = representation_residual(m, a.delta, [&](double r) { return m.weight(r); });
    run.out->write_json("representation.json",
                        json{{"kind", a.kind}, {"k", a.k}, {"delta", a.delta}, {"residual", res}});
    std::cout << "greens: representation residual " << format_double(res) << '\n';
    return exit_ok;
}

struct PohozaevArgs {
    double beta = std::sqrt(2.0 / 3.0);
    std::vector<double> r{50.0};
    double rmax = 0.0;
    double tol = 1e-10;
};

int cmd_pohozaev(Run& run, const PohozaevArgs& a) {
    double rmax = a.rmax;
    for (double r : a.r) rmax = std::max(rmax, r);
    run.config = {{"beta", a.beta}, {"r", doubles(a.r)}, {"rmax", rmax}, {"tol", a.tol}};
    const auto res = shoot(a.beta, shoot_config(rmax, a.tol));
    json terms = json::array();
    for (double r : a.r) {
        if (r > res.profile.r_max())
            throw DomainError("pohozaev: r=" + format_double(r) + " beyond the shot's stopping radius " +
                              format_double(res.profile.r_max()));
        terms.push_back(io::to_json(pohozaev_terms(res.profile, r)));
    }
    run.out->write_json("pohozaev.json", json{{"beta", a.beta}, {"class", to_string(res.cls.tag)}, {"terms", terms}});
    std::cout << "pohozaev: " << terms.size() << " radii\n";
    return exit_ok;
}

struct VerifyArgs {
    std::vector<std::string> only;
    std::optional<double> tol;
    std::uint64_t seed = acceptance::Options{}.seed;
    int random_profiles = 100;
};

int cmd_verify(Run& run, const VerifyArgs& a) {
    acceptance::Options opt;
    for (const auto& o : a.only) opt.only.insert(o);
    opt.tol = a.tol;
    opt.seed = a.seed;
    opt.random_profiles = a.random_profiles;
    try {
        acceptance::validate(opt);
    } catch (const DomainError& e) {
        throw CLI::ValidationError("--only/--tol", e.what());
    }
    run.config = acceptance::options_json(opt);
    const auto res = acceptance::run(opt);
    run.out->write("verify.json", res.report);
    for (const auto& c : res.criteria) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.id << ' ' << c.name << ": " << c.summary << '\n';
        if (!c.pass) std::cerr << "criterion failed: " << c.name << '\n';
    }
    return res.all_pass() ? exit_ok : exit_fail;
}

struct PlotArgs {
    std::string beta_range = "0.5:3:0.05";
    std::vector<double> profile_betas{1.0, 1.5, 2.0};
    double profile_rmax = 10.0;
    std::size_t points = 400;
    std::vector<int> k{4, 8, 16, 32, 64};
    std::vector<int> quad2_k{2, 3, 4};
    double delta = 0.5;
    unsigned workers = 0;
};

int cmd_export(Run& run, const PlotArgs& a) {
    json ks = json::array(), q2 = json::array();
    for (int k : a.k) ks.push_back(k);
    for (int k : a.quad2_k) q2.push_back(k);
    run.config = {{"beta_range", a.beta_range}, {"profile_betas", doubles(a.profile_betas)},
                  {"profile_rmax", a.profile_rmax}, {"points", a.points}, {"k", ks}, {"quad2_k", q2},
                  {"delta", a.delta}};
    const auto rows = energy_vs_beta_scan(parse_range(a.beta_range), ShootConfig{}, a.workers);
    run.out->write("energy_vs_beta.csv", io::to_text([&](std::ostream& os) { io::write_scan_csv(os, rows); }));

    std::vector<ShootResult> shots;
    for (double b : a.profile_betas) shots.push_back(shoot(b));
    std::ostringstream prof;
    prof << "r,v0";
    for (double b : a.profile_betas) prof << ",beta_" << format_double(b);
    prof << '\n';
    std::vector<ProfileInterpolant> interp;
    for (const auto& s : shots) interp.push_back(ProfileInterpolant::on_solution(s.profile));
    for (std::size_t i = 0; i <= a.points; ++i) {
        const double r = a.profile_rmax * static_cast<double>(i) / static_cast<double>(a.points);
        prof << format_double(r) << ',' << format_double(bubble_value(r));
        for (const auto& v : interp) prof << ',' << (r <= v.max_radius() ? format_double(v.value(r)) : "nan");
        prof << '\n';
    }
    run.out->write("profiles.csv", prof.str());

    std::ostringstream dk;
    dk << "family,k,mu,d_k,mass_delta\n";
    auto dump_series = [&](const std::string& name, const std::vector<FamilyMember>& ms) {
        const auto s = diagnostic_series(ms, a.delta);
        for (std::size_t i = 0; i < s.k_values.size(); ++i)
            dk << name << ',' << s.k_values[i] << ',' << format_double(s.mu[i]) << ',' << format_double(s.d_k[i])
               << ',' << format_double(s.mass_delta[i]) << '\n';
    };
    FamilyArgs fa;
    fa.k = a.k;
    fa.kind = "log";
    dump_series("log", build_family(fa));
    fa.kind = "quad1";
    fa.beta = 1.5;
    dump_series("quad1", build_family(fa));
    fa.kind = "quad2";
    fa.k = a.quad2_k;
    dump_series("quad2", build_family(fa));
    run.out->write("dk_series.csv", dk.str());
    std::cout << "export-plotdata: wrote energy_vs_beta.csv, profiles.csv, dk_series.csv\n";
    return exit_ok;
}

std::string active_subcommand(int argc, char** argv, const CLI::App& app) {
    for (int i = 1; i < argc; ++i) {
        const std::string t = argv[i];
        for (const auto* s : app.get_subcommands([](const CLI::App*) { return true; }))
            if (s->get_name() == t) return t;
    }
    return {};
}

bool flag_on_argv(int argc, char** argv, const std::string& name) {
    for (int i = 1; i < argc; ++i) {
        const std::string t = argv[i];
        if (t == name || t.rfind(name + "=", 0) == 0) return true;
    }
    return false;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radial solutions of Delta^2 u = V e^{4u} on R^4", "liouville4"};
    app.set_version_flag("--version", io::tool_version);
    app.require_subcommand(1);
    app.fallthrough();

    std::string out_dir = "liouville4_out";
    app.add_option("--out", out_dir, "Output directory (env " + std::string(out_env) + " overrides the config file)");
    app.set_config("--config", "", "JSON config file; flags override its values");

    ShootArgs sa;
    auto* shoot_cmd = app.add_subcommand("shoot", "Shoot one beta (profile + JSON) or a beta range (scan CSV)");
    auto* beta_opt = shoot_cmd->add_option("--beta", sa.beta, "Delta v(0)");
    auto* range_opt = shoot_cmd->add_option("--beta-range", sa.beta_range, "start:stop:step");
    beta_opt->excludes(range_opt);
    shoot_cmd->add_option("--rmax", sa.rmax, "Outer radius")->check(CLI::PositiveNumber);
    shoot_cmd->add_option("--tol", sa.tol, "Relative tolerance")->check(CLI::Range(1e-14, 1e-3));
    shoot_cmd->add_option("--workers", sa.workers, "Scan threads (0 = hardware)");

    ShootArgs scan_a;
    auto* scan_cmd = app.add_subcommand("scan", "Energy versus beta, optionally with beta* by bisection");
    scan_cmd->add_option("--beta-range", scan_a.beta_range, "start:stop:step")->required();
    scan_cmd->add_option("--rmax", scan_a.rmax, "Outer radius")->check(CLI::PositiveNumber);
    scan_cmd->add_option("--tol", scan_a.tol, "Relative tolerance")->check(CLI::Range(1e-14, 1e-3));
    scan_cmd->add_option("--workers", scan_a.workers, "Scan threads (0 = hardware)");
    scan_cmd->add_option("--bracket", scan_a.bracket, "lo:hi bracket for beta*");
    scan_cmd->add_option("--bisect-tol", scan_a.bisect_tol, "Bisection tolerance")->check(CLI::PositiveNumber);

    auto family_options = [](CLI::App* cmd, FamilyArgs& fa) {
        cmd->add_option("--kind", fa.kind, "log, quad1 or quad2")
            ->required()
            ->check(CLI::IsMember({"log", "quad1", "quad2"}));
        cmd->add_option("--k", fa.k, "Comma-separated k values")->required()->delimiter(',');
        cmd->add_option("--delta", fa.delta, "Ball radius in (0, 1)")->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--beta", fa.beta, "Entire solution behind quad1");
        cmd->add_option("--rphi", fa.rphi, "Truncation radius of the quad2 profile table")
            ->check(CLI::Range(10.0, 1000.0));
    };
    FamilyArgs fam_a;
    auto* family_cmd = app.add_subcommand("family", "Family members, diagnostic series and regime");
    family_options(family_cmd, fam_a);
    family_cmd->add_option("--points", fam_a.points, "Intervals in each member CSV")->check(CLI::Range(1, 1000000));

    FamilyArgs cls_a;
    auto* classify_cmd = app.add_subcommand("classify", "Regime report and lemma-estimate suite");
    family_options(classify_cmd, cls_a);
    classify_cmd->add_option("--eta", cls_a.eta, "Monotone exponent in [1, 2)");
    classify_cmd->add_option("--intvk-R", cls_a.intvk_R, "Common R for the Laplacian integral (0 = auto)");

    GreensArgs gr_a;
    auto* greens_cmd = app.add_subcommand("greens", "Kernels at the origin and the representation residual");
    greens_cmd->add_option("--delta", gr_a.delta, "Ball radius in (0, 1]")->check(CLI::Range(0.0, 1.0));
    greens_cmd->add_option("--points", gr_a.points, "Kernel samples")->check(CLI::Range(1, 1000000));
    greens_cmd->add_option("--kind", gr_a.kind, "Member kind")->check(CLI::IsMember({"log", "quad1", "quad2"}));
    greens_cmd->add_option("--k", gr_a.k, "Member index")->check(CLI::PositiveNumber);
    greens_cmd->add_option("--beta", gr_a.beta, "Entire solution behind quad1");

    PohozaevArgs po_a;
    auto* poho_cmd = app.add_subcommand("pohozaev", "Pohozaev terms along a shot");
    poho_cmd->add_option("--beta", po_a.beta, "Delta v(0)");
    poho_cmd->add_option("--r", po_a.r, "Comma-separated radii")->delimiter(',');
    poho_cmd->add_option("--rmax", po_a.rmax, "Outer radius of the shot (default: largest r)");
    poho_cmd->add_option("--tol", po_a.tol, "Relative tolerance")->check(CLI::Range(1e-14, 1e-3));

    VerifyArgs ve_a;
    auto* verify_cmd = app.add_subcommand("verify", "Acceptance suite; exit 1 names failing criteria");
    verify_cmd->add_option("--only", ve_a.only, "Criterion names or ids")->delimiter(',');
    verify_cmd->add_option("--tol", ve_a.tol, "Override every numeric tolerance");
    verify_cmd->add_option("--seed", ve_a.seed, "Seed of the random-profile suite");
    verify_cmd->add_option("--random-profiles", ve_a.random_profiles, "Random profiles")->check(CLI::PositiveNumber);

    PlotArgs pl_a;
    auto* plot_cmd = app.add_subcommand("export-plotdata", "Plot-ready CSV: energy curve, profiles, d_k series");
    plot_cmd->add_option("--beta-range", pl_a.beta_range, "start:stop:step");
    plot_cmd->add_option("--profile-betas", pl_a.profile_betas, "Shots to tabulate")->delimiter(',');
    plot_cmd->add_option("--profile-rmax", pl_a.profile_rmax, "Tabulation radius")->check(CLI::Range(0.0, 50.0));
    plot_cmd->add_option("--points", pl_a.points, "Profile samples")->check(CLI::Range(1, 1000000));
    plot_cmd->add_option("--k", pl_a.k, "k values for log and quad1")->delimiter(',');
    plot_cmd->add_option("--quad2-k", pl_a.quad2_k, "k values for quad2")->delimiter(',');
    plot_cmd->add_option("--delta", pl_a.delta, "Ball radius in (0, 1)")->check(CLI::Range(0.0, 1.0));
    plot_cmd->add_option("--workers", pl_a.workers, "Scan threads (0 = hardware)");

    app.config_formatter(std::make_shared<JsonConfig>(&app, active_subcommand(argc, argv, app)));

    Run run;
    try {
        app.parse(argc, argv);
        if (!flag_on_argv(argc, argv, "--out"))
            if (const char* env = std::getenv(out_env); env != nullptr && *env != '\0') out_dir = env;

        // Validation against module preconditions happens before any output.
        auto positive_ks = [](const std::vector<int>& ks, const std::string& flag) {
            require_arg(!ks.empty(), flag, "empty k list");
            for (int k : ks) require_arg(k >= 1, flag, "k values must be >= 1");
        };
        auto check_family = [&](const FamilyArgs& fa) {
            positive_ks(fa.k, "--k");
            require_arg(fa.delta > 0.0 && fa.delta < 1.0, "--delta", "delta must lie in (0, 1)");
            require_arg(fa.kind != "quad1" || fa.beta.has_value(), "--beta", "quad1 requires --beta");
            require_arg(!fa.beta || std::isfinite(*fa.beta), "--beta", "beta must be finite");
        };
        const auto* sub = app.get_subcommands().front();
        run.command = sub->get_name();
        if (sub == shoot_cmd) {
            require_arg(sa.beta.has_value() != !sa.beta_range.empty(), "--beta", "give exactly one of --beta, --beta-range");
            require_arg(!sa.beta || std::isfinite(*sa.beta), "--beta", "beta must be finite");
            if (!sa.beta_range.empty()) static_cast<void>(parse_range(sa.beta_range));
        } else if (sub == scan_cmd) {
            static_cast<void>(parse_range(scan_a.beta_range));
            if (!scan_a.bracket.empty()) {
                const auto [lo, hi] = parse_pair(scan_a.bracket, "--bracket");
                require_arg(lo < hi, "--bracket", "need lo < hi");
            }
        } else if (sub == family_cmd) {
            check_family(fam_a);
        } else if (sub == classify_cmd) {
            check_family(cls_a);
            require_arg(cls_a.eta >= 1.0 && cls_a.eta < 2.0, "--eta", "eta must lie in [1, 2)");
            require_arg(cls_a.intvk_R >= 0.0, "--intvk-R", "R must be nonnegative");
        } else if (sub == greens_cmd) {
            require_arg(gr_a.delta > 0.0, "--delta", "delta must be positive");
            require_arg(gr_a.kind != "quad1" || gr_a.beta.has_value(), "--beta", "quad1 requires --beta");
        } else if (sub == poho_cmd) {
            require_arg(!po_a.r.empty(), "--r", "empty radius list");
            for (double r : po_a.r) require_arg(r > 0.0 && std::isfinite(r), "--r", "radii must be positive");
            require_arg(std::isfinite(po_a.beta), "--beta", "beta must be finite");
            require_arg(po_a.rmax >= 0.0, "--rmax", "rmax must be nonnegative");
        } else if (sub == plot_cmd) {
            static_cast<void>(parse_range(pl_a.beta_range));
            positive_ks(pl_a.k, "--k");
            positive_ks(pl_a.quad2_k, "--quad2-k");
            require_arg(!pl_a.profile_betas.empty(), "--profile-betas", "empty beta list");
        }
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        run.out = std::make_unique<io::OutputSet>(fs::path(out_dir));
        int code = exit_ok;
        if (run.command == "shoot") code = cmd_shoot(run, sa);
        else if (run.command == "scan") code = cmd_scan(run, scan_a);
        else if (run.command == "family") code = cmd_family(run, fam_a);
        else if (run.command == "classify") code = cmd_classify(run, cls_a);
        else if (run.command == "greens") code = cmd_greens(run, gr_a);
        else if (run.command == "pohozaev") code = cmd_pohozaev(run, po_a);
        else if (run.command == "verify") code = cmd_verify(run, ve_a);
        else if (run.command == "export-plotdata") code = cmd_export(run, pl_a);
        run.finish();
        return code;
    } catch (const CLI::ValidationError& e) {
        std::cerr << run.command << ": " << e.what() << '\n';
        return exit_usage;
    } catch (const DomainError& e) {
        std::cerr << run.command << ": " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << run.command << ": " << e.what() << '\n';
        return exit_fail;
    }
}
