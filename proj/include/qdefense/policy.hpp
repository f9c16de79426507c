#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdefense/qlearning.hpp"
#include "qdefense/state_space.hpp"

namespace qdefense {

/// Ordered defense sequence read off a trained table, with the reward of each
/// step and the discounted/undiscounted totals of executing it.
struct DefensePlan {
    std::vector<std::uint32_t> steps;  // defense catalog indices, in order
    std::vector<double> per_step_reward;
    double total_undiscounted = 0.0;
    double total_discounted = 0.0;
    std::uint32_t terminal_state = 0;

    std::vector<std::string> step_ids(const ScenarioIndex& ix) const;
};

/// Row argmax over the full action alphabet, ties to the lowest column.
ActionId best_action(const QTable& q, std::uint32_t state);

/// Greedy defense extraction from `start`: repeatedly take the best feasible
/// defense and follow its transition; stop once the attack cell is >= every
/// feasible defense cell (no defense is worth its cost any more) or nothing
/// feasible remains. Revisiting a state aborts (cannot happen: resources are
/// monotone).
DefensePlan extract_defense_sequence(const StateSpace& space, const QTable& q,
                                     std::uint32_t start, double gamma);

/// Discounted total reward of letting the attack run unopposed from `start`
/// (expectation under the configured attack resolution; a declared path makes
/// this the plain discounted CVSS sum along the remaining path).
double no_defense_baseline(const StateSpace& space, std::uint32_t start, double gamma);

/// -(osr - ndr) / ndr. Requires ndr < 0; throws std::invalid_argument on 0.
double improvement_percentage(double osr, double ndr);

}  // namespace qdefense
