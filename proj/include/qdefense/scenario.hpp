#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qdefense {

/// Reserved pseudo-host: the attacker's entry point. Permanently compromised,
/// carries no vulnerabilities, and may only appear as a link source.
inline constexpr std::string_view kInternet = "internet";

class Error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scenario file rejected: syntax (with byte offset), dangling reference, or
/// out-of-range field.
class ParseError : public Error {
    using Error::Error;
};

/// A configured limit (e.g. the state cap) was exceeded.
class ResourceError : public Error {
    using Error::Error;
};

class IoError : public Error {
    using Error::Error;
};

struct Vulnerability {
    std::string id;
    double cvss = 0.0;        // [0,10], severity; attack-transition penalty
    double patch_cost = 0.0;  // [0,10]
    bool patchable = true;

    bool operator==(const Vulnerability&) const = default;
};

struct Host {
    std::string id;
    std::vector<Vulnerability> vulns;

    bool operator==(const Host&) const = default;
};

/// Directed connection; `from` may be kInternet, `to` is always a declared host.
struct Link {
    std::string from;
    std::string to;

    bool operator==(const Link&) const = default;
};

enum class DefenseKind { Block, Patch };

struct DefenseSpec {
    std::string id;
    DefenseKind kind = DefenseKind::Block;
    // Block: removes the directed link from -> protected_host.
    std::string protected_host;
    std::string from;
    // Patch: removes vulnerability `vuln` from host `target`.
    std::string target;
    std::string vuln;
    // Explicit cost override; block defenses only. Without it a block costs
    // the maximum CVSS among the protected host's vulnerabilities.
    std::optional<double> cost;

    bool operator==(const DefenseSpec&) const = default;
};

/// How the environment picks the attacked host when several (host, vuln)
/// pairs are exposed and no attack path constrains the choice.
enum class AttackResolution { Uniform, MaxCvss };

struct RewardParams {
    double attack_weight = 1.0;  // scales CVSS when computing attack penalties
    double attack_success_rate = 1.0;
    double defense_success_rate = 1.0;
    double attack_fail_reward = 0.0;   // <= 0
    double defense_fail_reward = 0.0;  // <= 0
    AttackResolution attack_resolution = AttackResolution::Uniform;

    bool operator==(const RewardParams&) const = default;
};

struct LearningParams {
    double gamma = 0.9;    // (0,1)
    double alpha = 0.1;    // (0,1]
    double epsilon = 0.7;  // [0,1]
    std::uint64_t epochs = 5000;
    std::uint64_t seed = 1;

    bool operator==(const LearningParams&) const = default;
};

/// Declared network world. Immutable after parse; safe to share read-only.
struct Scenario {
    std::vector<Host> hosts;
    std::vector<Link> links;
    std::vector<DefenseSpec> defenses;
    // Optional attacker route. Empty = unconstrained. When present the first
    // element is kInternet and consecutive elements are joined by declared links.
    std::vector<std::string> attack_path;
    RewardParams rewards;
    LearningParams learning;

    bool operator==(const Scenario&) const = default;

    const Host* find_host(std::string_view id) const;
    const Vulnerability* find_vuln(std::string_view host_id, std::string_view vuln_id) const;
    bool has_link(std::string_view from, std::string_view to) const;
    bool has_attack_path() const { return !attack_path.empty(); }
};

/// Parses the scenario document (JSON, schema in docs/scenario.schema.json).
/// Throws ParseError on syntax errors (byte position reported), unresolved
/// references, or out-of-range fields.
Scenario parse_scenario(std::string_view text);

/// Structural parse only: syntax and shape are enforced, semantic invariants
/// are not. Feed the result to validate_scenario for the violation list.
Scenario parse_scenario_unchecked(std::string_view text);

Scenario load_scenario(const std::filesystem::path& path);

/// Serializes a Scenario back into the document format. parse(emit(s)) == s.
std::string emit_scenario(const Scenario& s);

/// Checks every declared invariant; returns human-readable violations,
/// empty when the scenario is valid. Never throws.
std::vector<std::string> validate_scenario(const Scenario& s);

/// Patch defenses cost the vulnerability's patch cost; block defenses cost
/// the explicit override when declared, else the max CVSS on the protected host.
double defense_cost(const Scenario& s, const DefenseSpec& d);

/// CVSS scaled by the configured attack weight.
double attack_penalty(const Scenario& s, const Vulnerability& v);

}  // namespace qdefense
