#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "qdefense/scenario.hpp"

namespace qdefense {

using Bitset = boost::dynamic_bitset<std::uint64_t>;

/// Global action alphabet: column 0 is the attack action, columns 1..n follow
/// the defense catalog order. The column order is the tie-breaking order.
class ActionId {
  public:
    static constexpr ActionId attack() { return ActionId(0); }
    static constexpr ActionId defense(std::uint32_t catalog_index) {
        return ActionId(catalog_index + 1);
    }
    static constexpr ActionId from_column(std::uint32_t col) { return ActionId(col); }

    constexpr bool is_attack() const { return col_ == 0; }
    constexpr std::uint32_t defense_index() const { return col_ - 1; }
    constexpr std::uint32_t column() const { return col_; }

    friend constexpr auto operator<=>(ActionId, ActionId) = default;

  private:
    explicit constexpr ActionId(std::uint32_t col) : col_(col) {}
    std::uint32_t col_;
};

/// One MDP state. All sets are bitsets over the scenario's declaration order;
/// the internet pseudo-host is implicitly always compromised and not stored.
struct NetworkState {
    Bitset compromised;         // declared hosts
    Bitset links;               // surviving declared links
    Bitset vulns;               // surviving (host, vuln) pairs
    Bitset defenses_remaining;  // unconsumed catalog entries
    std::uint32_t path_cursor = 0;  // position on the attack path; 0 when none declared

    bool operator==(const NetworkState&) const = default;
};

struct Transition {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    ActionId action = ActionId::attack();
    double success_rate = 1.0;
    double success_reward = 0.0;  // <= 0
    double fail_reward = 0.0;     // <= 0
    std::int32_t target_pair = -1;  // attacked (host, vuln) pair index; -1 for defenses
};

/// Resolved, index-based view of a valid Scenario. Everything the generation
/// and training loops touch is a plain array lookup here.
class ScenarioIndex {
  public:
    struct VulnPair {
        std::uint32_t host;        // declared host index
        std::uint32_t local;       // position within the host's vuln list
        double cvss;
        double penalty;            // cvss * attack_weight
        double patch_cost;
        bool patchable;
    };
    struct IndexedLink {
        std::int32_t from;  // declared host index, or kInternetNode
        std::uint32_t to;
    };
    struct IndexedDefense {
        DefenseKind kind;
        std::uint32_t link = 0;  // block: declared link index
        std::uint32_t pair = 0;  // patch: vuln pair index
        double cost = 0.0;
    };

    static constexpr std::int32_t kInternetNode = -1;

    /// Pre: validate_scenario(s) is empty. Throws ParseError otherwise.
    explicit ScenarioIndex(Scenario s);

    const Scenario& scenario() const { return scenario_; }
    std::size_t num_hosts() const { return scenario_.hosts.size(); }
    std::size_t num_links() const { return scenario_.links.size(); }
    std::size_t num_pairs() const { return pairs_.size(); }
    std::size_t num_defenses() const { return scenario_.defenses.size(); }

    const VulnPair& pair(std::uint32_t i) const { return pairs_[i]; }
    const IndexedLink& link(std::uint32_t i) const { return links_[i]; }
    const IndexedDefense& defense(std::uint32_t i) const { return defenses_[i]; }
    std::span<const std::uint32_t> pairs_on_host(std::uint32_t host) const;
    std::span<const std::uint32_t> links_into(std::uint32_t host) const;
    /// Attack path as host indices (leading internet stripped); empty if none.
    std::span<const std::uint32_t> path_hosts() const { return path_hosts_; }

    std::uint32_t host_index(std::string_view id) const;  // throws on unknown id
    std::uint32_t defense_index(std::string_view id) const;
    std::uint32_t pair_index(std::string_view host_id, std::string_view vuln_id) const;
    const std::string& host_id(std::uint32_t i) const { return scenario_.hosts[i].id; }
    const std::string& defense_id(std::uint32_t i) const { return scenario_.defenses[i].id; }
    const std::string& vuln_id(std::uint32_t pair) const;

    /// Declaration-order-independent ranks used by canonical_key.
    std::span<const std::uint32_t> host_rank() const { return host_rank_; }
    std::span<const std::uint32_t> link_rank() const { return link_rank_; }
    std::span<const std::uint32_t> pair_rank() const { return pair_rank_; }
    std::span<const std::uint32_t> defense_rank() const { return defense_rank_; }

  private:
    Scenario scenario_;
    std::vector<VulnPair> pairs_;
    std::vector<IndexedLink> links_;
    std::vector<IndexedDefense> defenses_;
    std::vector<std::uint32_t> path_hosts_;
    std::unordered_map<std::string, std::uint32_t> host_by_id_;
    std::unordered_map<std::string, std::uint32_t> defense_by_id_;
    std::vector<std::uint32_t> host_pair_offsets_;  // num_hosts + 1
    std::vector<std::uint32_t> host_pair_list_;
    std::vector<std::uint32_t> links_into_offsets_;
    std::vector<std::uint32_t> links_into_list_;
    std::vector<std::uint32_t> host_rank_, link_rank_, pair_rank_, defense_rank_;
};

struct GenOptions {
    std::size_t state_cap = 1'000'000;
    bool ignore_attack_path = false;
};

/// All hosts intact, every link/vuln/defense surviving, cursor at the start.
NetworkState initial_state(const ScenarioIndex& ix);

/// Byte string identical for states equal under set semantics and independent
/// of declaration order (bits are remapped through the id-sorted ranks).
std::string canonical_key(const ScenarioIndex& ix, const NetworkState& st);

/// Exposed (host, vuln) pair indices an attacker can strike next. With a
/// declared path this is at most one pair: the next path host, provided it is
/// uncompromised, keeps a surviving vulnerability, and a surviving link from a
/// compromised node reaches it.
std::vector<std::uint32_t> feasible_attacks(const ScenarioIndex& ix, const NetworkState& st);

/// Remaining defenses, minus patches whose target host is already compromised.
std::vector<std::uint32_t> feasible_defenses(const ScenarioIndex& ix, const NetworkState& st);

/// Successor state, or nullopt when the action has no successor here.
/// Attack requires a target pair drawn from feasible_attacks.
std::optional<NetworkState> apply_action(const ScenarioIndex& ix, const NetworkState& st,
                                         ActionId action,
                                         std::optional<std::uint32_t> target_pair = std::nullopt);

class StateSpace {
  public:
    const Scenario& scenario() const { return index_.scenario(); }
    const ScenarioIndex& index() const { return index_; }
    const GenOptions& options() const { return options_; }

    std::size_t num_states() const { return states_.size(); }
    std::size_t num_actions() const { return index_.num_defenses() + 1; }
    const NetworkState& state(std::uint32_t i) const { return states_[i]; }
    std::optional<std::uint32_t> find(const NetworkState& st) const;

    std::span<const Transition> transitions(std::uint32_t s) const;
    std::span<const Transition> transitions(std::uint32_t s, ActionId a) const;
    std::span<const Transition> attack_transitions(std::uint32_t s) const;
    bool attack_feasible(std::uint32_t s) const { return !attack_transitions(s).empty(); }

    /// Columns the Q-update's future value maximizes over in state s: the
    /// attack column plus every feasible defense column.
    std::span<const std::uint16_t> future_columns(std::uint32_t s) const;

    bool has_path() const;

  private:
    friend StateSpace generate_state_space(const Scenario&, const GenOptions&);
    friend StateSpace assemble_state_space(Scenario, GenOptions, std::vector<NetworkState>);

    explicit StateSpace(Scenario sc, GenOptions opt)
        : options_(opt), index_(std::move(sc)) {}

    struct Range {
        std::uint32_t offset = 0;
        std::uint16_t attack_count = 0;
        std::uint16_t defense_count = 0;
    };

    GenOptions options_;
    ScenarioIndex index_;
    std::vector<NetworkState> states_;
    std::vector<Transition> transitions_;
    std::vector<Range> ranges_;
    std::vector<std::uint16_t> future_cols_;
    std::vector<std::uint32_t> future_offsets_;  // num_states + 1
    std::unordered_map<std::string, std::uint32_t> by_key_;

    void build_from_states();  // fills transitions/future columns/key map
};

/// Breadth-first enumeration of every state reachable from the initial state,
/// deduplicated by canonical key and indexed in discovery order (0 = initial).
/// Throws ResourceError when more than options.state_cap states appear and
/// ParseError when the scenario fails validation.
StateSpace generate_state_space(const Scenario& s, const GenOptions& options = {});

/// Rebuilds a StateSpace from a stored state list (artifact loader path).
/// The states must be listed in their original discovery order.
StateSpace assemble_state_space(Scenario s, GenOptions options, std::vector<NetworkState> states);

}  // namespace qdefense
