#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "liouville4/diagnostics.hpp"
#include "liouville4/entire_solutions.hpp"
#include "liouville4/families.hpp"
#include "liouville4/greens_pohozaev.hpp"
#include "liouville4/profile.hpp"

namespace liouville4::io {

/// Insertion-ordered JSON keeps field order stable across runs.
using json = nlohmann::ordered_json;

inline constexpr const char* tool_name = "liouville4";
inline constexpr const char* tool_version = "0.1.0";

/// JSON number, or null for NaN and infinities (JSON has no spelling for them).
inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

/// Two-space indented dump with a trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + '\n'; }

// ---------------------------------------------------------------------------
// Checksums

inline std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericalError("sha256: digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Entire solutions

inline json to_json(const TerminationEvent& e) {
    return {{"kind", to_string(e.kind)}, {"cause", to_string(e.cause)}, {"r_stop", number(e.r_stop)}};
}

inline json to_json(const ShootResult& s) {
    json j;
    j["beta"] = number(s.beta);
    j["class"] = to_string(s.cls.tag);
    j["confident"] = s.cls.confident;
    j["a"] = number(s.cls.a_slope);
    j["r_stop"] = number(s.cls.r_stop);
    j["energy"] = number(s.energy_total);
    j["energy_quadrature"] = number(s.energy_quadrature);
    j["energy_tail"] = number(s.energy_tail);
    j["r_max"] = number(s.profile.r_max());
    j["nodes"] = s.profile.size();
    j["termination"] = to_json(s.event);
    return j;
}

inline constexpr const char* scan_csv_header = "beta,class,a,energy,energy_tail,r_stop";

inline void write_scan_csv(std::ostream& os, std::span<const ScanRow> rows) {
    os << scan_csv_header << '\n';
    for (const auto& r : rows)
        os << format_double(r.beta) << ',' << r.cls << ',' << format_double(r.a) << ',' << format_double(r.energy)
           << ',' << format_double(r.energy_tail) << ',' << format_double(r.r_stop) << '\n';
}

inline json to_json(const ScanRow& r) {
    json j{{"beta", number(r.beta)},     {"class", r.cls},
           {"a", number(r.a)},           {"energy", number(r.energy)},
           {"energy_tail", number(r.energy_tail)}, {"r_stop", number(r.r_stop)}};
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

inline json scan_json(std::span<const ScanRow> rows) {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(to_json(r));
    return arr;
}

// ---------------------------------------------------------------------------
// Families

inline constexpr const char* member_csv_header = "r,u,V,e4u";

/// Samples u, V and e^{4u} at n+1 uniform radii on [0, r_max].
inline void write_member_csv(std::ostream& os, const FamilyMember& m, std::size_t n, double r_max = 0.0) {
    detail::require(n >= 1, "write_member_csv: need at least one interval");
    if (r_max <= 0.0) r_max = m.max_radius();
    detail::require(r_max <= m.max_radius(), "write_member_csv: r_max outside member domain");
    os << member_csv_header << '\n';
    for (std::size_t i = 0; i <= n; ++i) {
        const double r = i == n ? r_max : r_max * static_cast<double>(i) / static_cast<double>(n);
        const double u = m.value(r);
        os << format_double(r) << ',' << format_double(u) << ',' << format_double(m.weight(r)) << ','
           << format_double(std::exp(4.0 * u)) << '\n';
    }
}

/// Per-member metadata: k, mu, origin value and masses of B_delta and B_1.
inline json member_json(const FamilyMember& m, double delta) {
    return {{"k", m.k()},
            {"mu", number(m.mu())},
            {"u0", number(m.value(0.0))},
            {"mass_delta", number(member_mass(m, 0.0, delta))},
            {"mass", number(member_mass(m, 0.0, m.max_radius()))},
            {"domain", number(m.max_radius())}};
}

inline json family_json(std::span<const FamilyMember> members, double delta) {
    json j;
    j["kind"] = members.empty() ? std::string("custom") : to_string(members.front().kind());
    j["provenance"] = members.empty() ? std::string("closed-form") : to_string(members.front().provenance());
    j["delta"] = number(delta);
    j["members"] = json::array();
    for (const auto& m : members) j["members"].push_back(member_json(m, delta));
    return j;
}

// ---------------------------------------------------------------------------
// Diagnostics

inline constexpr const char* series_csv_header = "k,mu,d_k,mass_delta";

inline void write_series_csv(std::ostream& os, const DiagnosticSeries& s) {
    os << series_csv_header << '\n';
    for (std::size_t i = 0; i < s.k_values.size(); ++i)
        os << s.k_values[i] << ',' << format_double(s.mu[i]) << ',' << format_double(s.d_k[i]) << ','
           << format_double(s.mass_delta[i]) << '\n';
}

inline json to_json(const DiagnosticSeries& s) {
    json rows = json::array();
    for (std::size_t i = 0; i < s.k_values.size(); ++i)
        rows.push_back({{"k", s.k_values[i]},
                        {"mu", number(s.mu[i])},
                        {"u0", number(s.u0[i])},
                        {"d_k", number(s.d_k[i])},
                        {"mass_delta", number(s.mass_delta[i])}});
    return {{"delta", number(s.delta)}, {"members", rows}};
}

inline json to_json(const RegimeReport& r) {
    return {{"regime", to_string(r.regime)},
            {"slope", number(r.slope)},
            {"u0_spread", number(r.u0_spread)},
            {"u0_growth", number(r.u0_growth)},
            {"alpha_estimate", number(r.alpha_estimate)},
            {"alpha_fraction", number(r.alpha_estimate / bubble_energy)},
            {"alpha_extrapolated", r.alpha_extrapolated},
            {"confidence", r.confidence},
            {"members", r.members}};
}

inline json verdict(const std::optional<bool>& v) { return v ? json(*v) : json("not_applicable"); }

inline json to_json(const EstimateReport& r) {
    json members = json::array();
    for (const auto& e : r.members)
        members.push_back({{"k", e.k},
                           {"mu", number(e.mu)},
                           {"wpe_sup", number(e.wpe_sup)},
                           {"ef1_sup", number(e.ef1_sup)},
                           {"intvk_ratio", number(e.intvk_ratio)},
                           {"ef2_residual", number(e.ef2_dev)},
                           {"mono_radius", number(e.mono_radius)},
                           {"mono_break", e.mono_break}});
    return {{"intvk_R", number(r.intvk_R)},
            {"max", {{"wpe_sup", number(r.wpe_sup)},
                     {"ef1_sup", number(r.ef1_sup)},
                     {"intvk_ratio", number(r.intvk_ratio)},
                     {"ef2_residual", number(r.ef2_dev)}}},
            {"min_mono_radius", number(r.mono_radius)},
            {"pass", {{"wpe", verdict(r.wpe_pass)},
                      {"ef1", verdict(r.ef1_pass)},
                      {"intvk", verdict(r.intvk_pass)},
                      {"ef2", verdict(r.ef2_pass)},
                      {"mono", verdict(r.mono_pass)}}},
            {"all_pass", r.all_pass()},
            {"members", members}};
}

// ---------------------------------------------------------------------------
// Green functions and Pohozaev

inline json to_json(const PohozaevTerms& t) {
    return {{"r", number(t.r)},
            {"volume", number(t.volume)},
            {"boundary", number(t.boundary)},
            {"rhs_energy_form", number(t.rhs_energy_form)}};
}

inline PohozaevTerms pohozaev_from_json(const json& j) {
    PohozaevTerms t;
    t.r = j.at("r").get<double>();
    t.volume = j.at("volume").get<double>();
    t.boundary = j.at("boundary").get<double>();
    t.rhs_energy_form = j.at("rhs_energy_form").get<double>();
    return t;
}

// ---------------------------------------------------------------------------
// Output directory with a checksummed manifest.

/// Collects files written during one run. Every file is hashed as written;
/// the manifest lists them in write order together with the resolved
/// configuration. Volatile files (timings) are listed by name only so the
/// manifest itself stays byte-identical across reruns.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }

    void write(const std::string& name, const std::string& bytes) {
        write_raw(name, bytes);
        outputs_.push_back({{"file", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
    }

    void write_json(const std::string& name, const json& j) { write(name, dump(j)); }

    void write_volatile(const std::string& name, const std::string& bytes) {
        write_raw(name, bytes);
        volatile_.push_back(name);
    }

    [[nodiscard]] json manifest(const std::string& command, const json& config) const {
        json m;
        m["tool"] = tool_name;
        m["version"] = tool_version;
        m["command"] = command;
        m["config"] = config;
        m["outputs"] = outputs_;
        m["volatile"] = volatile_;
        return m;
    }

    /// Writes manifest.json and returns its bytes.
    std::string finish(const std::string& command, const json& config) {
        const auto bytes = dump(manifest(command, config));
        write_raw("manifest.json", bytes);
        return bytes;
    }

private:
    void write_raw(const std::string& name, const std::string& bytes) {
        std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!f) throw DomainError("cannot open output file " + (dir_ / name).string());
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw NumericalError("write failed for " + (dir_ / name).string());
    }

    std::filesystem::path dir_;
    json outputs_ = json::array();
    json volatile_ = json::array();
};

template <class Writer>
std::string to_text(const Writer& w) {
    std::ostringstream os;
    w(os);
    return os.str();
}

}  // namespace liouville4::io
