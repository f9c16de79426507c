#include <algorithm>
#include <random>
#include <set>

#include <doctest.h>

#include "qdefense/state_space.hpp"
#include "test_util.hpp"

using namespace qdefense;

namespace {

Scenario no_defense_scenario() {
    Scenario s = testutil::tiny1();
    s.defenses.clear();
    return s;
}

}  // namespace

TEST_CASE("initial_state starts fully intact") {
    SUBCASE("paper8") {
        const ScenarioIndex ix(testutil::paper8());
        const NetworkState st = initial_state(ix);
        CHECK(st.compromised.count() == 0);
        CHECK(st.links.count() == 13);
        CHECK(st.vulns.count() == 8);
        CHECK(st.defenses_remaining.count() == 6);
        CHECK(st.path_cursor == 0);
    }
    SUBCASE("no defenses") {
        const ScenarioIndex ix(no_defense_scenario());
        const NetworkState st = initial_state(ix);
        CHECK(st.defenses_remaining.count() == 0);
        CHECK(st.vulns.count() == 1);
    }
    SUBCASE("tiny1") {
        const ScenarioIndex ix(testutil::tiny1());
        const NetworkState st = initial_state(ix);
        CHECK(st.links.count() == 1);
        CHECK(st.defenses_remaining.count() == 2);
    }
}

TEST_CASE("canonical_key is order-insensitive and injective") {
    const ScenarioIndex ix(testutil::tiny1());
    const NetworkState s0 = initial_state(ix);
    const auto patch = ActionId::defense(ix.defense_index("P1"));
    const auto block = ActionId::defense(ix.defense_index("B1"));

    // Applying patch-then-block and block-then-patch lands in the same state.
    const NetworkState a = *apply_action(ix, *apply_action(ix, s0, patch), block);
    const NetworkState b = *apply_action(ix, *apply_action(ix, s0, block), patch);
    CHECK(canonical_key(ix, a) == canonical_key(ix, b));

    // A single differing link makes keys differ.
    const NetworkState c = *apply_action(ix, s0, block);
    CHECK(canonical_key(ix, s0) != canonical_key(ix, c));

    // Pure function: byte-equal across calls.
    CHECK(canonical_key(ix, s0) == canonical_key(ix, s0));
}

TEST_CASE("feasible_attacks honors the attack path") {
    const Scenario sc = testutil::paper8();

    SUBCASE("with the path only the next hop is exposed") {
        const ScenarioIndex ix(sc);
        const auto targets = feasible_attacks(ix, initial_state(ix));
        REQUIRE(targets.size() == 1);
        CHECK(ix.host_id(ix.pair(targets[0]).host) == "172.16.0.2");
        CHECK(ix.vuln_id(targets[0]) == "V2");
    }
    SUBCASE("without the path both entry hosts are exposed") {
        Scenario open = sc;
        open.attack_path.clear();
        const ScenarioIndex ix(open);
        const auto targets = feasible_attacks(ix, initial_state(ix));
        REQUIRE(targets.size() == 2);
        CHECK(ix.host_id(ix.pair(targets[0]).host) == "172.16.0.1");
        CHECK(ix.host_id(ix.pair(targets[1]).host) == "172.16.0.2");
    }
    SUBCASE("blocking both entry links leaves nothing to attack") {
        Scenario open = sc;
        open.attack_path.clear();
        const ScenarioIndex ix(open);
        NetworkState st = initial_state(ix);
        st = *apply_action(ix, st, ActionId::defense(ix.defense_index("D3")));
        st = *apply_action(ix, st, ActionId::defense(ix.defense_index("D1")));
        CHECK(feasible_attacks(ix, st).empty());
    }
}

TEST_CASE("feasible_defenses drops patches on compromised hosts") {
    const Scenario sc = testutil::paper8();
    const ScenarioIndex ix(sc);
    NetworkState st = initial_state(ix);
    CHECK(feasible_defenses(ix, st).size() == 6);

    // Compromise h7 (V7's host): D2 becomes pointless, blocks stay.
    st.compromised.set(ix.host_index("172.16.0.7"));
    const auto defs = feasible_defenses(ix, st);
    CHECK(defs.size() == 5);
    for (std::uint32_t d : defs) CHECK(ix.defense_id(d) != "D2");

    st.defenses_remaining.reset();
    CHECK(feasible_defenses(ix, st).empty());
}

TEST_CASE("apply_action follows the transition rules") {
    const Scenario sc = testutil::paper8();
    const ScenarioIndex ix(sc);
    const NetworkState s0 = initial_state(ix);
    const auto d3 = ActionId::defense(ix.defense_index("D3"));

    SUBCASE("block removes the directed link") {
        const auto next = apply_action(ix, s0, d3);
        REQUIRE(next);
        CHECK(next->links.count() == 12);
        CHECK(s0.links.count() == 13);  // input untouched
        // internet->172.16.0.2 is gone
        bool found = false;
        for (std::uint32_t li = 0; li < ix.num_links(); ++li)
            if (ix.link(li).from == ScenarioIndex::kInternetNode &&
                ix.host_id(ix.link(li).to) == "172.16.0.2")
                found = !next->links.test(li);
        CHECK(found);
    }
    SUBCASE("attack compromises the target and advances the cursor") {
        const auto targets = feasible_attacks(ix, s0);
        const auto next = apply_action(ix, s0, ActionId::attack(), targets.at(0));
        REQUIRE(next);
        CHECK(next->compromised.test(ix.host_index("172.16.0.2")));
        CHECK(next->compromised.count() == 1);
        CHECK(next->path_cursor == 1);
    }
    SUBCASE("a consumed defense has no successor") {
        const auto once = apply_action(ix, s0, d3);
        REQUIRE(once);
        CHECK(!apply_action(ix, *once, d3));
    }
}

TEST_CASE("generate_state_space enumerates tiny1 exactly") {
    const StateSpace space = generate_state_space(testutil::tiny1());
    CHECK(space.num_states() == 6);
    CHECK(space.num_actions() == 3);
}

TEST_CASE("a scenario with no defenses and no reachable vulns is a single state") {
    Scenario s = no_defense_scenario();
    s.hosts[0].vulns.clear();
    s.attack_path.clear();
    const StateSpace space = generate_state_space(s);
    CHECK(space.num_states() == 1);
    CHECK(space.num_actions() == 1);
    CHECK(space.transitions(0).empty());
}

TEST_CASE("paper8 state counts are pinned") {
    CHECK(generate_state_space(testutil::paper8()).num_states() == 256);
    GenOptions open;
    open.ignore_attack_path = true;
    CHECK(generate_state_space(testutil::paper8(), open).num_states() == 1312);
}

TEST_CASE("the state cap raises a resource error naming the cap") {
    GenOptions opt;
    opt.state_cap = 10;
    CHECK_THROWS_WITH_AS(generate_state_space(testutil::paper8(), opt), doctest::Contains("10"),
                         ResourceError);
}

TEST_CASE("state space properties hold") {
    for (const bool ignore_path : {false, true}) {
        GenOptions opt;
        opt.ignore_attack_path = ignore_path;
        const StateSpace space = generate_state_space(testutil::paper8(), opt);
        const ScenarioIndex& ix = space.index();
        CAPTURE(ignore_path);

        // Canonical uniqueness.
        std::set<std::string> keys;
        for (std::uint32_t i = 0; i < space.num_states(); ++i)
            keys.insert(canonical_key(ix, space.state(i)));
        CHECK(keys.size() == space.num_states());

        std::size_t max_attack_successors = 0;
        for (std::uint32_t s = 0; s < space.num_states(); ++s) {
            max_attack_successors =
                std::max(max_attack_successors, space.attack_transitions(s).size());
            for (const Transition& t : space.transitions(s)) {
                const NetworkState& from = space.state(t.from);
                const NetworkState& to = space.state(t.to);
                // Monotone resources: compromised grows, everything else shrinks.
                CHECK(to.compromised.count() >= from.compromised.count());
                CHECK(to.links.count() <= from.links.count());
                CHECK(to.vulns.count() <= from.vulns.count());
                CHECK(to.defenses_remaining.count() <= from.defenses_remaining.count());
                // Rewards are never positive.
                CHECK(t.success_reward <= 0.0);
                CHECK(t.fail_reward <= 0.0);
                CHECK(t.success_rate >= 0.0);
                CHECK(t.success_rate <= 1.0);
            }
        }
        if (!ignore_path) CHECK(max_attack_successors <= 1);
    }
}

TEST_CASE("permuting the defense catalog preserves the canonical state set") {
    const Scenario base = testutil::paper8();
    auto keys_of = [](const Scenario& s) {
        const StateSpace space = generate_state_space(s);
        std::set<std::string> keys;
        for (std::uint32_t i = 0; i < space.num_states(); ++i)
            keys.insert(canonical_key(space.index(), space.state(i)));
        return keys;
    };
    const auto reference = keys_of(base);

    std::mt19937 shuffler(99);
    for (int trial = 0; trial < 4; ++trial) {
        Scenario permuted = base;
        std::shuffle(permuted.defenses.begin(), permuted.defenses.end(), shuffler);
        CHECK(keys_of(permuted) == reference);
    }
}
