#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qdefense/qlearning.hpp"
#include "qdefense/scenario.hpp"
#include "qdefense/state_space.hpp"

namespace qdefense {

enum class Topology { Chain, Random };

/// Deterministic synthetic scenario family: every host carries one
/// vulnerability with CVSS and patch cost drawn from the seeded generator in
/// [1,10]; the catalog holds one patch per vulnerability plus one block per
/// internet-facing edge.
struct SynthSpec {
    std::uint32_t hosts = 2;
    Topology topology = Topology::Chain;
    std::uint64_t seed = 0;
    double edge_prob = 0.3;  // random topology only
};

/// Throws Error when a random topology stays unreachable after the retry cap.
Scenario synth_scenario(const SynthSpec& spec);

enum class SweepParameter { Gamma, Epsilon, Epochs };

std::string to_string(SweepParameter p);

struct SweepSpec {
    SweepParameter parameter = SweepParameter::Epsilon;
    std::vector<double> values;
    std::uint32_t repetitions = 1;  // seeds per value
    TrainConfig base;
    const Scenario* scenario = nullptr;
    GenOptions gen;
};

struct SweepRow {
    double value = 0.0;
    std::uint64_t seed = 0;
    double optimal_reward = 0.0;   // discounted value of the extracted plan
    double improvement_pct = 0.0;  // vs. the no-defense baseline
    std::size_t unupdated_count = 0;
    double gen_ms = 0.0;
    double train_ms = 0.0;
    std::string error;  // per-row failure; empty on success
};

/// Per-row seed: mix_seed(mix_seed(base + value_index) + repetition).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t value_index, std::uint64_t repetition);

/// One independent training run per (value, repetition); the state space is
/// generated once and reused. A failing row records its error and the sweep
/// continues. Rows are ordered by (value, repetition).
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct ScaleRow {
    std::uint32_t hosts = 0;
    std::size_t states = 0;
    double gen_ms = 0.0;
    double train_ms = 0.0;
    bool capped = false;  // state cap hit; states/timings unavailable
};

/// Synthesizes one scenario per host count (topology/seed/edge_prob from
/// `generator`) and measures state count, generation time, and training time
/// under a fixed TrainConfig.
std::vector<ScaleRow> scaling_benchmark(const std::vector<std::uint32_t>& host_counts,
                                        const SynthSpec& generator, const TrainConfig& cfg,
                                        std::size_t state_cap = GenOptions{}.state_cap);

void write_scaling_csv(std::ostream& out, const std::vector<ScaleRow>& rows);

}  // namespace qdefense
