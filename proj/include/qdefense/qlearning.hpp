#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qdefense/random.hpp"
#include "qdefense/state_space.hpp"

namespace qdefense {

struct TrainConfig {
    double gamma = 0.9;    // (0,1)
    double alpha = 0.1;    // (0,1]
    double epsilon = 0.7;  // [0,1]
    std::uint64_t epochs = 5000;
    std::uint64_t seed = 1;

    static TrainConfig from(const LearningParams& p) {
        return TrainConfig{p.gamma, p.alpha, p.epsilon, p.epochs, p.seed};
    }
    /// Throws std::invalid_argument when a field is out of range.
    void check() const;

    bool operator==(const TrainConfig&) const = default;
};

/// Dense |states| x |actions| table of Q-values with per-cell update counts.
/// Values start at zero and stay <= 0 (all rewards are non-positive); a cell
/// is nonzero only if it has been updated.
class QTable {
  public:
    QTable(std::size_t states, std::size_t actions)
        : states_(states), actions_(actions), values_(states * actions, 0.0),
          counts_(states * actions, 0) {}

    std::size_t num_states() const { return states_; }
    std::size_t num_actions() const { return actions_; }

    double value(std::uint32_t s, std::uint32_t col) const { return values_[s * actions_ + col]; }
    std::uint32_t update_count(std::uint32_t s, std::uint32_t col) const {
        return counts_[s * actions_ + col];
    }
    std::span<const double> row(std::uint32_t s) const {
        return {values_.data() + s * actions_, actions_};
    }

    void update(std::uint32_t s, std::uint32_t col, double v) {
        values_[s * actions_ + col] = v;
        ++counts_[s * actions_ + col];
    }
    /// Sets a cell without counting it as a training update (oracle writes).
    void set(std::uint32_t s, std::uint32_t col, double v, std::uint32_t count) {
        values_[s * actions_ + col] = v;
        counts_[s * actions_ + col] = count;
    }

    bool operator==(const QTable&) const = default;

  private:
    std::size_t states_;
    std::size_t actions_;
    std::vector<double> values_;
    std::vector<std::uint32_t> counts_;
};

/// Zeroed table shaped |states| x (1 + |defense catalog|).
QTable init_q_table(const StateSpace& space);

/// Epsilon-greedy over the full action alphabet: with probability epsilon a
/// uniformly random action, otherwise the row argmax (ties to the lowest
/// column). Infeasible actions may be selected; taking one ends the episode.
ActionId select_action(const QTable& q, std::uint32_t state, double epsilon, RandomSource& rng);

/// One-step update target: (1 - alpha) * q_sa + alpha * (reward + gamma * future_q).
inline double q_update(double q_sa, double reward, double future_q, double alpha, double gamma) {
    return (1.0 - alpha) * q_sa + alpha * (reward + gamma * future_q);
}

/// Future value of a state: the maximum over its attack cell (0 while the
/// attack is infeasible or unexplored) and the cells of defenses feasible
/// there. Consumed or blocked defense columns do not contribute their zeros.
double future_value(const StateSpace& space, const QTable& q, std::uint32_t state);

/// Runs one episode from state 0: select, resolve the attack target when
/// several are exposed, sample success (failure keeps the state and pays the
/// fail reward), update, move. Ends when a selected action has no successor.
void run_episode(const StateSpace& space, QTable& q, const TrainConfig& cfg, RandomSource& rng);

/// cfg.epochs episodes over a stream seeded with cfg.seed. Deterministic:
/// identical (space, cfg) yield identical tables.
QTable train(const StateSpace& space, const TrainConfig& cfg);

/// Number of cells never written.
std::size_t count_unupdated(const QTable& q);

/// Exact fixed point of the training semantics (expected rewards, same future
/// rule, infeasible cells pinned at zero), iterated until the sup-norm
/// residual drops below tolerance. Independent of the sampling path above.
/// When given, `residuals` receives the per-sweep sup-norm residuals.
QTable value_iteration_oracle(const StateSpace& space, double gamma, double tolerance = 1e-12,
                              std::size_t max_sweeps = 1'000'000,
                              std::vector<double>* residuals = nullptr);

}  // namespace qdefense
