#include <array>
#include <cmath>

#include <doctest.h>

#include "qdefense/qlearning.hpp"
#include "test_util.hpp"

using namespace qdefense;

namespace {

// Table-3-shaped row for select_action/best_action checks.
QTable single_row(const std::array<double, 7>& values) {
    QTable q(1, 7);
    for (std::uint32_t c = 0; c < 7; ++c) q.set(0, c, values[c], values[c] != 0.0 ? 1 : 0);
    return q;
}

}  // namespace

TEST_CASE("init_q_table is all zero with the right shape") {
    SUBCASE("tiny1: 6 states x 3 actions") {
        const StateSpace space = generate_state_space(testutil::tiny1());
        const QTable q = init_q_table(space);
        CHECK(q.num_states() == 6);
        CHECK(q.num_actions() == 3);
        CHECK(count_unupdated(q) == 18);
        for (std::uint32_t s = 0; s < 6; ++s)
            for (std::uint32_t c = 0; c < 3; ++c) CHECK(q.value(s, c) == 0.0);
    }
    SUBCASE("paper8: 7 action columns") {
        const StateSpace space = generate_state_space(testutil::paper8());
        CHECK(init_q_table(space).num_actions() == 7);
    }
    SUBCASE("no defenses: a single attack column") {
        Scenario s = testutil::tiny1();
        s.defenses.clear();
        CHECK(init_q_table(generate_state_space(s)).num_actions() == 1);
    }
}

TEST_CASE("select_action exploits the row argmax") {
    const QTable q = single_row({-9.298, -6.19, -7.89, -2.1, -10.69, -5.39, -6.89});
    RandomSource rng(1);
    // epsilon 0: deterministic exploit; D3 holds the row maximum.
    CHECK(select_action(q, 0, 0.0, rng) == ActionId::defense(2));
}

TEST_CASE("select_action explores uniformly at epsilon 1") {
    const QTable q = single_row({-9.298, -6.19, -7.89, -2.1, -10.69, -5.39, -6.89});
    RandomSource rng(123);
    std::array<int, 7> hits{};
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) ++hits[select_action(q, 0, 1.0, rng).column()];
    const double expected = draws / 7.0;
    const double sigma = std::sqrt(draws * (1.0 / 7.0) * (6.0 / 7.0));
    for (int c = 0; c < 7; ++c) {
        CAPTURE(c);
        CHECK(std::abs(hits[c] - expected) <= 3.0 * sigma);
    }
}

TEST_CASE("select_action breaks ties toward the attack column") {
    const QTable q = single_row({0, 0, 0, 0, 0, 0, 0});
    RandomSource rng(5);
    CHECK(select_action(q, 0, 0.0, rng) == ActionId::attack());
}

TEST_CASE("q_update evaluates the one-step rule") {
    CHECK(q_update(0.0, -2.1, 0.0, 0.1, 0.9) == doctest::Approx(-0.21).epsilon(1e-12));
    CHECK(q_update(-0.21, -2.1, 0.0, 0.1, 0.9) == doctest::Approx(-0.399).epsilon(1e-12));
    // alpha = 1 collapses to the target itself.
    CHECK(q_update(-3.0, -1.5, -2.0, 1.0, 0.9) == doctest::Approx(-1.5 + 0.9 * -2.0));
}

TEST_CASE("run_episode performs the first tiny1 update") {
    const StateSpace space = generate_state_space(testutil::tiny1());
    QTable q = init_q_table(space);
    TrainConfig cfg;
    cfg.epsilon = 0.0;
    RandomSource rng(1);
    run_episode(space, q, cfg, rng);
    // All-zero row ties to the attack column; one update lands at -0.5.
    CHECK(q.value(0, 0) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(q.update_count(0, 0) == 1);
}

TEST_CASE("zero success rate keeps the agent at state 0") {
    Scenario s = testutil::tiny1();
    s.rewards.attack_success_rate = 0.0;
    s.rewards.defense_success_rate = 0.0;
    const StateSpace space = generate_state_space(s);
    TrainConfig cfg;
    cfg.epochs = 200;
    const QTable q = train(space, cfg);
    for (std::uint32_t st = 1; st < q.num_states(); ++st)
        for (std::uint32_t c = 0; c < q.num_actions(); ++c) CHECK(q.update_count(st, c) == 0);
    CHECK(q.update_count(0, 0) > 0);
}

TEST_CASE("train reaches the tiny1 fixed point") {
    const StateSpace space = generate_state_space(testutil::tiny1());
    TrainConfig cfg;
    cfg.epochs = 20000;
    cfg.seed = 17;
    const QTable q = train(space, cfg);
    const ScenarioIndex& ix = space.index();
    CHECK(std::abs(q.value(0, ActionId::defense(ix.defense_index("P1")).column()) - -2.0) <= 0.01);
    CHECK(std::abs(q.value(0, ActionId::defense(ix.defense_index("B1")).column()) - -5.0) <= 0.01);
    CHECK(std::abs(q.value(0, 0) - -5.0) <= 0.01);

    // Every feasible cell was exercised; infeasible cells stay unupdated.
    CHECK(count_unupdated(q) == 12);
}

TEST_CASE("train rejects out-of-range configs") {
    const StateSpace space = generate_state_space(testutil::tiny1());
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(train(space, cfg), std::invalid_argument);
    cfg.epochs = 10;
    cfg.gamma = 1.0;
    CHECK_THROWS_AS(train(space, cfg), std::invalid_argument);
}

TEST_CASE("training is deterministic per seed") {
    const StateSpace space = generate_state_space(testutil::paper8());
    TrainConfig cfg;
    cfg.epochs = 3000;
    cfg.seed = 42;
    const QTable a = train(space, cfg);
    const QTable b = train(space, cfg);
    CHECK(a == b);
    cfg.seed = 43;
    CHECK(!(train(space, cfg) == a));
}

TEST_CASE("q-values stay non-positive and untouched cells stay zero") {
    const StateSpace space = generate_state_space(testutil::paper8());
    TrainConfig cfg;
    cfg.epochs = 5000;
    const QTable q = train(space, cfg);
    for (std::uint32_t s = 0; s < q.num_states(); ++s)
        for (std::uint32_t c = 0; c < q.num_actions(); ++c) {
            CHECK(q.value(s, c) <= 0.0);
            if (q.update_count(s, c) == 0) CHECK(q.value(s, c) == 0.0);
        }
}

TEST_CASE("unupdated counts shrink as the episode prefix grows") {
    const StateSpace space = generate_state_space(testutil::paper8());
    std::size_t prev = init_q_table(space).num_states() * 7;
    for (std::uint64_t epochs : {10ull, 100ull, 1000ull, 10000ull}) {
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.seed = 11;  // same seed: longer runs replay the same prefix
        const std::size_t now = count_unupdated(train(space, cfg));
        CHECK(now <= prev);
        prev = now;
    }
}

TEST_CASE("value_iteration_oracle solves tiny1 exactly") {
    const StateSpace space = generate_state_space(testutil::tiny1());
    const QTable q = value_iteration_oracle(space, 0.9);
    const ScenarioIndex& ix = space.index();
    const auto p1 = ActionId::defense(ix.defense_index("P1")).column();
    const auto b1 = ActionId::defense(ix.defense_index("B1")).column();
    CHECK(std::abs(q.value(0, p1) - -2.0) <= 1e-9);
    CHECK(std::abs(q.value(0, b1) - -5.0) <= 1e-9);
    CHECK(std::abs(q.value(0, 0) - -5.0) <= 1e-9);
}

TEST_CASE("value_iteration_oracle reproduces the paper8 defense columns") {
    const StateSpace space = generate_state_space(testutil::paper8());
    const QTable q = value_iteration_oracle(space, 0.9);
    const std::array<double, 6> expected{-6.19, -7.89, -2.1, -10.69, -5.39, -6.89};
    for (std::uint32_t d = 0; d < 6; ++d) {
        CAPTURE(d);
        CHECK(std::abs(q.value(0, d + 1) - expected[d]) <= 1e-9);
    }
}

TEST_CASE("oracle sweeps contract at rate gamma") {
    const StateSpace space = generate_state_space(testutil::paper8());
    for (const double gamma : {0.5, 0.9}) {
        std::vector<double> residuals;
        value_iteration_oracle(space, gamma, 1e-12, 1'000'000, &residuals);
        REQUIRE(residuals.size() >= 2);
        for (std::size_t i = 1; i < residuals.size(); ++i) {
            CAPTURE(gamma);
            CAPTURE(i);
            CHECK(residuals[i] <= gamma * residuals[i - 1] + 1e-12);
        }
    }
}

TEST_CASE("gamma approaching zero leaves single-step rewards") {
    const StateSpace space = generate_state_space(testutil::paper8());
    const QTable q = value_iteration_oracle(space, 0.0);
    for (std::uint32_t s = 0; s < space.num_states(); ++s)
        for (const Transition& t : space.transitions(s)) {
            if (t.action.is_attack()) continue;  // attack column averages targets
            CHECK(q.value(s, t.action.column()) == doctest::Approx(t.success_reward));
        }
}

TEST_CASE("training converges to the oracle on the paper8 defense columns") {
    const StateSpace space = generate_state_space(testutil::paper8());
    TrainConfig cfg;
    cfg.epochs = 50000;
    cfg.seed = 3;
    const QTable trained = train(space, cfg);
    const QTable oracle = value_iteration_oracle(space, cfg.gamma);
    for (std::uint32_t d = 1; d <= 6; ++d) {
        CAPTURE(d);
        CHECK(std::abs(trained.value(0, d) - oracle.value(0, d)) <= 0.05);
    }
}
