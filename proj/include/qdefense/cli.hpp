#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qdefense/qlearning.hpp"
#include "qdefense/state_space.hpp"

namespace qdefense::cli {

enum class Command { Validate, Generate, Train, Solve, Sweep, Bench, Dump };

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitResource = 2;
inline constexpr int kExitIo = 3;

struct CommandInvocation {
    Command command = Command::Validate;
    std::string scenario_path;  // empty when running from a stored space
    std::string space_path;     // --space
    std::string qtable_path;    // --qtable
    std::string out_dir = ".";
    std::string format = "text";  // text|csv (dump)

    std::optional<double> gamma, alpha, epsilon;
    std::optional<std::uint64_t> epochs, seed;
    bool ignore_attack_path = false;
    std::optional<std::size_t> state_cap;

    // sweep
    std::string sweep_param = "epsilon";
    std::vector<double> sweep_values;
    std::uint32_t repetitions = 5;

    // bench
    std::vector<std::uint32_t> bench_hosts;
    std::string topology = "chain";
    double edge_prob = 0.3;
    std::uint64_t synth_seed = 0;
};

/// Executes one invocation, writing artifacts under out_dir. Diagnostics go to
/// `err` as a single machine-parsable line: `error: <category>: <message>`.
int run(const CommandInvocation& inv, std::ostream& out, std::ostream& err);

/// Paper-style per-state text dump: Compromised Hosts / Links / Vulnerabilities
/// / Q-Values lines, blank-line separated, in discovery order.
void dump_qtable_text(const StateSpace& space, const QTable& q, std::ostream& out);

/// Same record format without the Q-Values line (state-space export).
void dump_states_text(const StateSpace& space, std::ostream& out);

/// Up to three decimals, trailing zeros trimmed, always one decimal digit.
std::string format_qvalue(double v);

}  // namespace qdefense::cli
