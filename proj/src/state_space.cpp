#include "qdefense/state_space.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <tuple>

namespace qdefense {

namespace {

template <typename Less>
std::vector<std::uint32_t> ranks_by(std::size_t n, Less less) {
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), less);
    std::vector<std::uint32_t> rank(n);
    for (std::uint32_t pos = 0; pos < n; ++pos) rank[order[pos]] = pos;
    return rank;
}

void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_bits_ranked(std::string& out, const Bitset& bits,
                        std::span<const std::uint32_t> rank) {
    std::vector<std::uint64_t> words((bits.size() + 63) / 64, 0);
    for (auto i = bits.find_first(); i != Bitset::npos; i = bits.find_next(i)) {
        const std::uint32_t r = rank[i];
        words[r >> 6] |= std::uint64_t{1} << (r & 63);
    }
    const std::size_t bytes = (bits.size() + 7) / 8;
    for (std::size_t b = 0; b < bytes; ++b)
        out.push_back(static_cast<char>((words[b >> 3] >> (8 * (b & 7))) & 0xFF));
}

}  // namespace

ScenarioIndex::ScenarioIndex(Scenario sc) : scenario_(std::move(sc)) {
    const Scenario& s = scenario_;
    if (auto violations = validate_scenario(s); !violations.empty()) {
        std::string msg = "invalid scenario: " + violations.front();
        for (std::size_t i = 1; i < violations.size(); ++i) msg += "; " + violations[i];
        throw ParseError(msg);
    }
    if (s.defenses.size() + 1 > 0xFFFF)
        throw ResourceError("defense catalog too large (max 65534 defenses)");

    const std::size_t n_hosts = s.hosts.size();
    host_pair_offsets_.assign(n_hosts + 1, 0);
    for (std::uint32_t h = 0; h < n_hosts; ++h) {
        host_by_id_.emplace(s.hosts[h].id, h);
        for (std::uint32_t v = 0; v < s.hosts[h].vulns.size(); ++v) {
            const Vulnerability& vul = s.hosts[h].vulns[v];
            pairs_.push_back(VulnPair{h, v, vul.cvss, attack_penalty(s, vul), vul.patch_cost,
                                      vul.patchable});
        }
        host_pair_offsets_[h + 1] = static_cast<std::uint32_t>(pairs_.size());
    }
    host_pair_list_.resize(pairs_.size());
    std::iota(host_pair_list_.begin(), host_pair_list_.end(), 0u);

    for (const Link& l : s.links) {
        IndexedLink il;
        il.from = (l.from == kInternet) ? kInternetNode
                                        : static_cast<std::int32_t>(host_by_id_.at(l.from));
        il.to = host_by_id_.at(l.to);
        links_.push_back(il);
    }
    links_into_offsets_.assign(n_hosts + 1, 0);
    for (const IndexedLink& il : links_) ++links_into_offsets_[il.to + 1];
    for (std::size_t h = 0; h < n_hosts; ++h) links_into_offsets_[h + 1] += links_into_offsets_[h];
    links_into_list_.resize(links_.size());
    {
        std::vector<std::uint32_t> cursor(links_into_offsets_.begin(),
                                          links_into_offsets_.end() - 1);
        for (std::uint32_t li = 0; li < links_.size(); ++li)
            links_into_list_[cursor[links_[li].to]++] = li;
    }

    for (std::uint32_t di = 0; di < s.defenses.size(); ++di) {
        const DefenseSpec& d = s.defenses[di];
        defense_by_id_.emplace(d.id, di);
        IndexedDefense id;
        id.kind = d.kind;
        id.cost = defense_cost(s, d);
        if (d.kind == DefenseKind::Block) {
            for (std::uint32_t li = 0; li < s.links.size(); ++li)
                if (s.links[li].from == d.from && s.links[li].to == d.protected_host) {
                    id.link = li;
                    break;
                }
        } else {
            id.pair = pair_index(d.target, d.vuln);
        }
        defenses_.push_back(id);
    }

    for (std::size_t i = 1; i < s.attack_path.size(); ++i)
        path_hosts_.push_back(host_by_id_.at(s.attack_path[i]));

    host_rank_ = ranks_by(n_hosts, [&](std::uint32_t a, std::uint32_t b) {
        return s.hosts[a].id < s.hosts[b].id;
    });
    link_rank_ = ranks_by(links_.size(), [&](std::uint32_t a, std::uint32_t b) {
        return std::tie(s.links[a].from, s.links[a].to) < std::tie(s.links[b].from, s.links[b].to);
    });
    pair_rank_ = ranks_by(pairs_.size(), [&](std::uint32_t a, std::uint32_t b) {
        const auto& pa = pairs_[a];
        const auto& pb = pairs_[b];
        return std::tie(s.hosts[pa.host].id, s.hosts[pa.host].vulns[pa.local].id) <
               std::tie(s.hosts[pb.host].id, s.hosts[pb.host].vulns[pb.local].id);
    });
    defense_rank_ = ranks_by(defenses_.size(), [&](std::uint32_t a, std::uint32_t b) {
        return s.defenses[a].id < s.defenses[b].id;
    });
}

std::span<const std::uint32_t> ScenarioIndex::pairs_on_host(std::uint32_t host) const {
    return {host_pair_list_.data() + host_pair_offsets_[host],
            host_pair_list_.data() + host_pair_offsets_[host + 1]};
}

std::span<const std::uint32_t> ScenarioIndex::links_into(std::uint32_t host) const {
    return {links_into_list_.data() + links_into_offsets_[host],
            links_into_list_.data() + links_into_offsets_[host + 1]};
}

std::uint32_t ScenarioIndex::host_index(std::string_view id) const {
    auto it = host_by_id_.find(std::string(id));
    if (it == host_by_id_.end()) throw Error("unknown host '" + std::string(id) + "'");
    return it->second;
}

std::uint32_t ScenarioIndex::defense_index(std::string_view id) const {
    auto it = defense_by_id_.find(std::string(id));
    if (it == defense_by_id_.end()) throw Error("unknown defense '" + std::string(id) + "'");
    return it->second;
}

std::uint32_t ScenarioIndex::pair_index(std::string_view host_id, std::string_view vuln_id) const {
    const std::uint32_t h = host_index(host_id);
    for (std::uint32_t p : pairs_on_host(h)) {
        const VulnPair& vp = pairs_[p];
        if (scenario_.hosts[h].vulns[vp.local].id == vuln_id) return p;
    }
    throw Error("unknown vulnerability '" + std::string(vuln_id) + "' on host '" +
                std::string(host_id) + "'");
}

const std::string& ScenarioIndex::vuln_id(std::uint32_t pair) const {
    const VulnPair& vp = pairs_[pair];
    return scenario_.hosts[vp.host].vulns[vp.local].id;
}

NetworkState initial_state(const ScenarioIndex& ix) {
    NetworkState st;
    st.compromised.resize(ix.num_hosts());
    st.links.resize(ix.num_links());
    st.links.set();
    st.vulns.resize(ix.num_pairs());
    st.vulns.set();
    st.defenses_remaining.resize(ix.num_defenses());
    st.defenses_remaining.set();
    st.path_cursor = 0;
    return st;
}

std::string canonical_key(const ScenarioIndex& ix, const NetworkState& st) {
    std::string key;
    key.reserve(4 + (st.compromised.size() + st.links.size() + st.vulns.size() +
                     st.defenses_remaining.size()) / 8 + 4);
    append_u32(key, st.path_cursor);
    append_bits_ranked(key, st.compromised, ix.host_rank());
    append_bits_ranked(key, st.links, ix.link_rank());
    append_bits_ranked(key, st.vulns, ix.pair_rank());
    append_bits_ranked(key, st.defenses_remaining, ix.defense_rank());
    return key;
}

namespace {

bool reachable_from_compromised(const ScenarioIndex& ix, const NetworkState& st,
                                std::uint32_t host) {
    for (std::uint32_t li : ix.links_into(host)) {
        if (!st.links.test(li)) continue;
        const std::int32_t from = ix.link(li).from;
        if (from == ScenarioIndex::kInternetNode ||
            st.compromised.test(static_cast<std::size_t>(from)))
            return true;
    }
    return false;
}

}  // namespace

std::vector<std::uint32_t> feasible_attacks(const ScenarioIndex& ix, const NetworkState& st) {
    std::vector<std::uint32_t> out;
    if (!ix.path_hosts().empty()) {
        if (st.path_cursor >= ix.path_hosts().size()) return out;
        const std::uint32_t host = ix.path_hosts()[st.path_cursor];
        if (st.compromised.test(host)) return out;
        if (!reachable_from_compromised(ix, st, host)) return out;
        // One target pair: the worst (highest-penalty) surviving vulnerability.
        std::int64_t best = -1;
        for (std::uint32_t p : ix.pairs_on_host(host)) {
            if (!st.vulns.test(p)) continue;
            if (best < 0 ||
                ix.pair(p).penalty > ix.pair(static_cast<std::uint32_t>(best)).penalty)
                best = p;
        }
        if (best >= 0) out.push_back(static_cast<std::uint32_t>(best));
        return out;
    }
    for (std::uint32_t host = 0; host < ix.num_hosts(); ++host) {
        if (st.compromised.test(host)) continue;
        if (!reachable_from_compromised(ix, st, host)) continue;
        for (std::uint32_t p : ix.pairs_on_host(host))
            if (st.vulns.test(p)) out.push_back(p);
    }
    return out;
}

std::vector<std::uint32_t> feasible_defenses(const ScenarioIndex& ix, const NetworkState& st) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t d = 0; d < ix.num_defenses(); ++d) {
        if (!st.defenses_remaining.test(d)) continue;
        const auto& def = ix.defense(d);
        // No value in patching an already-compromised host.
        if (def.kind == DefenseKind::Patch && st.compromised.test(ix.pair(def.pair).host))
            continue;
        out.push_back(d);
    }
    return out;
}

std::optional<NetworkState> apply_action(const ScenarioIndex& ix, const NetworkState& st,
                                         ActionId action,
                                         std::optional<std::uint32_t> target_pair) {
    if (action.is_attack()) {
        std::uint32_t pair;
        if (target_pair) {
            const auto feasible = feasible_attacks(ix, st);
            if (std::find(feasible.begin(), feasible.end(), *target_pair) == feasible.end())
                return std::nullopt;
            pair = *target_pair;
        } else {
            const auto feasible = feasible_attacks(ix, st);
            if (feasible.empty()) return std::nullopt;
            pair = feasible.front();
        }
        NetworkState next = st;
        next.compromised.set(ix.pair(pair).host);
        if (!ix.path_hosts().empty()) ++next.path_cursor;
        return next;
    }

    const std::uint32_t d = action.defense_index();
    if (d >= ix.num_defenses() || !st.defenses_remaining.test(d)) return std::nullopt;
    const auto& def = ix.defense(d);
    if (def.kind == DefenseKind::Patch && st.compromised.test(ix.pair(def.pair).host))
        return std::nullopt;
    NetworkState next = st;
    next.defenses_remaining.reset(d);
    if (def.kind == DefenseKind::Block)
        next.links.reset(def.link);
    else
        next.vulns.reset(def.pair);
    return next;
}

std::optional<std::uint32_t> StateSpace::find(const NetworkState& st) const {
    auto it = by_key_.find(canonical_key(index_, st));
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
}

std::span<const Transition> StateSpace::transitions(std::uint32_t s) const {
    const Range& r = ranges_[s];
    return {transitions_.data() + r.offset,
            static_cast<std::size_t>(r.attack_count) + r.defense_count};
}

std::span<const Transition> StateSpace::attack_transitions(std::uint32_t s) const {
    const Range& r = ranges_[s];
    return {transitions_.data() + r.offset, static_cast<std::size_t>(r.attack_count)};
}

std::span<const Transition> StateSpace::transitions(std::uint32_t s, ActionId a) const {
    const Range& r = ranges_[s];
    if (a.is_attack()) return attack_transitions(s);
    const Transition* begin = transitions_.data() + r.offset + r.attack_count;
    const Transition* end = begin + r.defense_count;
    // Defense entries are sorted by column; there is at most one per defense.
    auto it = std::lower_bound(begin, end, a.column(), [](const Transition& t, std::uint32_t col) {
        return t.action.column() < col;
    });
    if (it != end && it->action == a) return {it, 1};
    return {};
}

std::span<const std::uint16_t> StateSpace::future_columns(std::uint32_t s) const {
    return {future_cols_.data() + future_offsets_[s],
            future_cols_.data() + future_offsets_[s + 1]};
}

bool StateSpace::has_path() const { return scenario().has_attack_path(); }

void StateSpace::build_from_states() {
    by_key_.clear();
    by_key_.reserve(states_.size() * 2);
    for (std::uint32_t i = 0; i < states_.size(); ++i) {
        auto [it, fresh] = by_key_.emplace(canonical_key(index_, states_[i]), i);
        if (!fresh) throw Error("state space corrupt: duplicate canonical key");
    }

    const RewardParams& rw = scenario().rewards;
    transitions_.clear();
    ranges_.assign(states_.size(), Range{});
    future_cols_.clear();
    future_offsets_.assign(states_.size() + 1, 0);

    for (std::uint32_t s = 0; s < states_.size(); ++s) {
        const NetworkState st = states_[s];
        Range r;
        r.offset = static_cast<std::uint32_t>(transitions_.size());

        for (std::uint32_t p : feasible_attacks(index_, st)) {
            auto next = apply_action(index_, st, ActionId::attack(), p);
            auto to = find(*next);
            if (!to) throw Error("state space corrupt: missing attack successor");
            Transition t;
            t.from = s;
            t.to = *to;
            t.action = ActionId::attack();
            t.success_rate = rw.attack_success_rate;
            t.success_reward = -index_.pair(p).penalty;
            t.fail_reward = rw.attack_fail_reward;
            t.target_pair = static_cast<std::int32_t>(p);
            transitions_.push_back(t);
            ++r.attack_count;
        }

        future_cols_.push_back(0);  // attack column always participates
        for (std::uint32_t d : feasible_defenses(index_, st)) {
            auto next = apply_action(index_, st, ActionId::defense(d));
            auto to = find(*next);
            if (!to) throw Error("state space corrupt: missing defense successor");
            Transition t;
            t.from = s;
            t.to = *to;
            t.action = ActionId::defense(d);
            t.success_rate = rw.defense_success_rate;
            t.success_reward = -index_.defense(d).cost;
            t.fail_reward = rw.defense_fail_reward;
            transitions_.push_back(t);
            ++r.defense_count;
            future_cols_.push_back(static_cast<std::uint16_t>(ActionId::defense(d).column()));
        }

        ranges_[s] = r;
        future_offsets_[s + 1] = static_cast<std::uint32_t>(future_cols_.size());
    }
}

StateSpace generate_state_space(const Scenario& s, const GenOptions& options) {
    Scenario local = s;
    if (options.ignore_attack_path) local.attack_path.clear();

    StateSpace space(std::move(local), options);
    const ScenarioIndex& ix = space.index_;

    space.states_.push_back(initial_state(ix));
    space.by_key_.emplace(canonical_key(ix, space.states_[0]), 0u);

    std::deque<std::uint32_t> queue{0u};
    auto discover = [&](const NetworkState& next) {
        std::string key = canonical_key(ix, next);
        if (space.by_key_.count(key)) return;
        if (space.states_.size() >= options.state_cap)
            throw ResourceError("state cap exceeded: scenario requires more than " +
                                std::to_string(options.state_cap) + " states");
        const auto idx = static_cast<std::uint32_t>(space.states_.size());
        space.states_.push_back(next);
        space.by_key_.emplace(std::move(key), idx);
        queue.push_back(idx);
    };

    while (!queue.empty()) {
        const std::uint32_t s_idx = queue.front();
        queue.pop_front();
        const NetworkState st = space.states_[s_idx];
        for (std::uint32_t p : feasible_attacks(ix, st))
            discover(*apply_action(ix, st, ActionId::attack(), p));
        for (std::uint32_t d : feasible_defenses(ix, st))
            discover(*apply_action(ix, st, ActionId::defense(d)));
    }

    space.build_from_states();
    return space;
}

StateSpace assemble_state_space(Scenario s, GenOptions options,
                                std::vector<NetworkState> states) {
    StateSpace space(std::move(s), options);
    space.states_ = std::move(states);
    space.build_from_states();
    return space;
}

}  // namespace qdefense
