#include "qdefense/policy.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace qdefense {

std::vector<std::string> DefensePlan::step_ids(const ScenarioIndex& ix) const {
    std::vector<std::string> out;
    out.reserve(steps.size());
    for (std::uint32_t d : steps) out.push_back(ix.defense_id(d));
    return out;
}

ActionId best_action(const QTable& q, std::uint32_t state) {
    const auto row = q.row(state);
    std::size_t best = 0;
    for (std::size_t col = 1; col < row.size(); ++col)
        if (row[col] > row[best]) best = col;
    return ActionId::from_column(static_cast<std::uint32_t>(best));
}

DefensePlan extract_defense_sequence(const StateSpace& space, const QTable& q,
                                     std::uint32_t start, double gamma) {
    DefensePlan plan;
    std::unordered_set<std::uint32_t> visited;
    std::uint32_t s = start;
    double discount = 1.0;

    for (;;) {
        if (!visited.insert(s).second)
            throw Error("defense extraction revisited state " + std::to_string(s));

        // Best defense still applicable here; consumed columns (stuck at 0)
        // must not shadow it.
        const Transition* chosen = nullptr;
        for (const Transition& t : space.transitions(s)) {
            if (t.action.is_attack()) continue;
            if (!chosen || q.value(s, t.action.column()) > q.value(s, chosen->action.column()))
                chosen = &t;
        }
        if (!chosen) break;  // nothing feasible remains

        // Stopping rule: once the attack column matches or beats every
        // feasible defense, further defenses only add cost.
        if (q.value(s, 0) >= q.value(s, chosen->action.column())) break;

        plan.steps.push_back(chosen->action.defense_index());
        plan.per_step_reward.push_back(chosen->success_reward);
        plan.total_undiscounted += chosen->success_reward;
        plan.total_discounted += discount * chosen->success_reward;
        discount *= gamma;
        s = chosen->to;
    }

    plan.terminal_state = s;
    return plan;
}

namespace {

double baseline_rec(const StateSpace& space, std::uint32_t s, double gamma,
                    std::vector<double>& memo, std::vector<char>& done) {
    if (done[s]) return memo[s];
    const auto attacks = space.attack_transitions(s);
    double value = 0.0;
    if (!attacks.empty()) {
        const AttackResolution resolution = space.scenario().rewards.attack_resolution;
        auto branch = [&](const Transition& t) {
            // Failure keeps the state, so the per-target value solves
            //   x = rate*(r + g*V(to)) + (1-rate)*(fail + g*x).
            const double denom = 1.0 - (1.0 - t.success_rate) * gamma;
            if (denom <= 0.0)
                throw std::invalid_argument(
                    "no-defense baseline diverges: success rate 0 with gamma 1");
            const double nominal =
                t.success_rate * (t.success_reward +
                                  gamma * baseline_rec(space, t.to, gamma, memo, done)) +
                (1.0 - t.success_rate) * t.fail_reward;
            return nominal / denom;
        };
        if (resolution == AttackResolution::Uniform) {
            double sum = 0.0;
            for (const Transition& t : attacks) sum += branch(t);
            value = sum / static_cast<double>(attacks.size());
        } else {
            const Transition* worst = &attacks.front();
            for (const Transition& t : attacks.subspan(1))
                if (space.index().pair(t.target_pair).cvss >
                    space.index().pair(worst->target_pair).cvss)
                    worst = &t;
            value = branch(*worst);
        }
    }
    memo[s] = value;
    done[s] = 1;
    return value;
}

}  // namespace

double no_defense_baseline(const StateSpace& space, std::uint32_t start, double gamma) {
    std::vector<double> memo(space.num_states(), 0.0);
    std::vector<char> done(space.num_states(), 0);
    return baseline_rec(space, start, gamma, memo, done);
}

double improvement_percentage(double osr, double ndr) {
    if (ndr == 0.0)
        throw std::invalid_argument("improvement undefined: no-defense baseline is zero");
    return -(osr - ndr) / ndr;
}

}  // namespace qdefense
