#include "qdefense/qlearning.hpp"

#include <cmath>
#include <stdexcept>

namespace qdefense {

void TrainConfig::check() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma out of range (0,1)");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha out of range (0,1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("epsilon out of range [0,1]");
    if (epochs < 1) throw std::invalid_argument("epochs out of range: must be >= 1");
}

QTable init_q_table(const StateSpace& space) {
    return QTable(space.num_states(), space.num_actions());
}

ActionId select_action(const QTable& q, std::uint32_t state, double epsilon, RandomSource& rng) {
    if (rng.uniform01() < epsilon)
        return ActionId::from_column(
            static_cast<std::uint32_t>(rng.uniform_below(q.num_actions())));
    const auto row = q.row(state);
    std::size_t best = 0;
    for (std::size_t col = 1; col < row.size(); ++col)
        if (row[col] > row[best]) best = col;
    return ActionId::from_column(static_cast<std::uint32_t>(best));
}

double future_value(const StateSpace& space, const QTable& q, std::uint32_t state) {
    double best = 0.0;
    bool first = true;
    for (std::uint16_t col : space.future_columns(state)) {
        const double v = q.value(state, col);
        if (first || v > best) {
            best = v;
            first = false;
        }
    }
    return best;
}

namespace {

// Max-CVSS attack resolution: the worst exposed target, ties to declared order.
const Transition& worst_target(const ScenarioIndex& ix, std::span<const Transition> attacks) {
    const Transition* best = &attacks.front();
    for (const Transition& t : attacks.subspan(1))
        if (ix.pair(t.target_pair).cvss > ix.pair(best->target_pair).cvss) best = &t;
    return *best;
}

}  // namespace

void run_episode(const StateSpace& space, QTable& q, const TrainConfig& cfg, RandomSource& rng) {
    const AttackResolution resolution = space.scenario().rewards.attack_resolution;
    std::uint32_t s = 0;
    for (;;) {
        const ActionId a = select_action(q, s, cfg.epsilon, rng);
        const auto options = space.transitions(s, a);
        if (options.empty()) break;  // no successor: the episode ends

        const Transition* t = &options.front();
        if (a.is_attack() && options.size() > 1) {
            if (resolution == AttackResolution::Uniform)
                t = &options[rng.uniform_below(options.size())];
            else
                t = &worst_target(space.index(), options);
        }

        double reward;
        std::uint32_t next;
        if (rng.uniform01() < t->success_rate) {
            reward = t->success_reward;
            next = t->to;
        } else {
            reward = t->fail_reward;
            next = s;
        }

        const double future = future_value(space, q, next);
        const std::uint32_t col = a.column();
        q.update(s, col, q_update(q.value(s, col), reward, future, cfg.alpha, cfg.gamma));
        s = next;
    }
}

QTable train(const StateSpace& space, const TrainConfig& cfg) {
    cfg.check();
    QTable q = init_q_table(space);
    RandomSource rng(cfg.seed);
    for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) run_episode(space, q, cfg, rng);
    return q;
}

std::size_t count_unupdated(const QTable& q) {
    std::size_t n = 0;
    for (std::uint32_t s = 0; s < q.num_states(); ++s)
        for (std::uint32_t col = 0; col < q.num_actions(); ++col)
            if (q.update_count(s, col) == 0) ++n;
    return n;
}

QTable value_iteration_oracle(const StateSpace& space, double gamma, double tolerance,
                              std::size_t max_sweeps, std::vector<double>* residuals) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma out of range [0,1)");
    if (residuals) residuals->clear();

    const std::size_t S = space.num_states();
    const std::size_t A = space.num_actions();
    const AttackResolution resolution = space.scenario().rewards.attack_resolution;

    std::vector<double> cur(S * A, 0.0), nxt(S * A, 0.0);
    std::vector<double> v(S, 0.0);

    auto value_of = [&](const std::vector<double>& tbl, std::uint32_t s) {
        double best = 0.0;
        bool first = true;
        for (std::uint16_t col : space.future_columns(s)) {
            const double val = tbl[s * A + col];
            if (first || val > best) {
                best = val;
                first = false;
            }
        }
        return best;
    };
    auto backup = [&](const Transition& t, std::uint32_t s) {
        return t.success_rate * (t.success_reward + gamma * v[t.to]) +
               (1.0 - t.success_rate) * (t.fail_reward + gamma * v[s]);
    };

    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        for (std::uint32_t s = 0; s < S; ++s) v[s] = value_of(cur, s);

        double residual = 0.0;
        for (std::uint32_t s = 0; s < S; ++s) {
            const auto attacks = space.attack_transitions(s);
            if (!attacks.empty()) {
                double q_attack;
                if (resolution == AttackResolution::Uniform) {
                    double sum = 0.0;
                    for (const Transition& t : attacks) sum += backup(t, s);
                    q_attack = sum / static_cast<double>(attacks.size());
                } else {
                    q_attack = backup(worst_target(space.index(), attacks), s);
                }
                nxt[s * A] = q_attack;
            }
            for (const Transition& t : space.transitions(s)) {
                if (t.action.is_attack()) continue;
                nxt[s * A + t.action.column()] = backup(t, s);
            }
        }
        for (std::size_t i = 0; i < nxt.size(); ++i)
            residual = std::max(residual, std::abs(nxt[i] - cur[i]));
        cur.swap(nxt);
        if (residuals) residuals->push_back(residual);
        if (residual < tolerance) {
            QTable q(S, A);
            for (std::uint32_t s = 0; s < S; ++s) {
                if (space.attack_feasible(s)) q.set(s, 0, cur[s * A], 1);
                for (std::uint16_t col : space.future_columns(s))
                    if (col != 0) q.set(s, col, cur[s * A + col], 1);
            }
            return q;
        }
    }
    throw Error("value iteration did not converge within the sweep cap");
}

}  // namespace qdefense
