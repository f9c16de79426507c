#include "qdefense/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "qdefense/policy.hpp"

namespace qdefense {

namespace {

constexpr int kTopologyRetryCap = 100;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

double ms_between(std::chrono::steady_clock::time_point a,
                  std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

bool all_reachable(std::uint32_t n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack;
    for (const auto& [from, to] : edges)
        if (from < 0 && !seen[to]) {
            seen[to] = 1;
            stack.push_back(to);
        }
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        for (const auto& [from, to] : edges)
            if (from == cur && !seen[to]) {
                seen[to] = 1;
                stack.push_back(to);
            }
    }
    for (std::uint32_t h = 0; h < n; ++h)
        if (!seen[h]) return false;
    return true;
}

}  // namespace

Scenario synth_scenario(const SynthSpec& spec) {
    if (spec.hosts < 1) throw std::invalid_argument("synth scenario needs >= 1 host");
    if (!(spec.edge_prob >= 0.0 && spec.edge_prob <= 1.0))
        throw std::invalid_argument("edge_prob out of [0,1]");

    RandomSource rng(spec.seed);
    const std::uint32_t n = spec.hosts;

    // Edges as (from, to) with -1 for the internet node.
    std::vector<std::pair<int, int>> edges;
    if (spec.topology == Topology::Chain) {
        edges.emplace_back(-1, 0);
        for (std::uint32_t h = 0; h + 1 < n; ++h) edges.emplace_back(h, h + 1);
    } else {
        bool ok = false;
        for (int attempt = 0; attempt < kTopologyRetryCap && !ok; ++attempt) {
            edges.clear();
            for (std::uint32_t h = 0; h < n; ++h)
                if (rng.uniform01() < spec.edge_prob) edges.emplace_back(-1, h);
            for (std::uint32_t a = 0; a < n; ++a)
                for (std::uint32_t b = 0; b < n; ++b)
                    if (a != b && rng.uniform01() < spec.edge_prob) edges.emplace_back(a, b);
            ok = all_reachable(n, edges);
        }
        if (!ok)
            throw Error("random topology left hosts unreachable after " +
                        std::to_string(kTopologyRetryCap) + " attempts");
    }

    Scenario s;
    for (std::uint32_t h = 0; h < n; ++h) {
        Host host;
        host.id = "h" + std::to_string(h + 1);
        Vulnerability v;
        v.id = "v" + std::to_string(h + 1);
        v.cvss = 1.0 + 9.0 * rng.uniform01();
        v.patch_cost = 1.0 + 9.0 * rng.uniform01();
        host.vulns.push_back(std::move(v));
        s.hosts.push_back(std::move(host));
    }
    for (const auto& [from, to] : edges) {
        Link l;
        l.from = from < 0 ? std::string(kInternet) : "h" + std::to_string(from + 1);
        l.to = "h" + std::to_string(to + 1);
        s.links.push_back(std::move(l));
    }
    std::uint32_t patch_no = 0;
    for (std::uint32_t h = 0; h < n; ++h) {
        DefenseSpec d;
        d.id = "P" + std::to_string(++patch_no);
        d.kind = DefenseKind::Patch;
        d.target = s.hosts[h].id;
        d.vuln = s.hosts[h].vulns.front().id;
        s.defenses.push_back(std::move(d));
    }
    std::uint32_t block_no = 0;
    for (const Link& l : s.links) {
        if (l.from != kInternet) continue;
        DefenseSpec d;
        d.id = "B" + std::to_string(++block_no);
        d.kind = DefenseKind::Block;
        d.protected_host = l.to;
        d.from = l.from;
        s.defenses.push_back(std::move(d));
    }
    return s;
}

std::string to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::Gamma: return "gamma";
        case SweepParameter::Epsilon: return "epsilon";
        case SweepParameter::Epochs: return "epochs";
    }
    return "?";
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t value_index,
                          std::uint64_t repetition) {
    return mix_seed(mix_seed(base + value_index) + repetition);
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    if (!spec.scenario) throw std::invalid_argument("sweep needs a scenario");
    if (spec.repetitions < 1) throw std::invalid_argument("sweep repetitions must be >= 1");
    if (spec.values.empty()) throw std::invalid_argument("sweep needs at least one value");
    for (double v : spec.values) {
        switch (spec.parameter) {
            case SweepParameter::Gamma:
                if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("gamma value out of (0,1)");
                break;
            case SweepParameter::Epsilon:
                if (!(v >= 0.0 && v <= 1.0))
                    throw std::invalid_argument("epsilon value out of [0,1]");
                break;
            case SweepParameter::Epochs:
                if (!(v >= 1.0 && v == std::floor(v)))
                    throw std::invalid_argument("epochs value must be a positive integer");
                break;
        }
    }

    const auto gen_start = std::chrono::steady_clock::now();
    const StateSpace space = generate_state_space(*spec.scenario, spec.gen);
    const double gen_ms = ms_between(gen_start, std::chrono::steady_clock::now());

    std::vector<SweepRow> rows;
    rows.reserve(spec.values.size() * spec.repetitions);
    for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
        for (std::uint32_t rep = 0; rep < spec.repetitions; ++rep) {
            SweepRow row;
            row.value = spec.values[vi];
            row.seed = derive_seed(spec.base.seed, vi, rep);
            row.gen_ms = gen_ms;
            try {
                TrainConfig cfg = spec.base;
                cfg.seed = row.seed;
                switch (spec.parameter) {
                    case SweepParameter::Gamma: cfg.gamma = row.value; break;
                    case SweepParameter::Epsilon: cfg.epsilon = row.value; break;
                    case SweepParameter::Epochs:
                        cfg.epochs = static_cast<std::uint64_t>(row.value);
                        break;
                }
                const auto train_start = std::chrono::steady_clock::now();
                const QTable q = train(space, cfg);
                row.train_ms = ms_between(train_start, std::chrono::steady_clock::now());
                row.unupdated_count = count_unupdated(q);
                const DefensePlan plan = extract_defense_sequence(space, q, 0, cfg.gamma);
                const double ndr = no_defense_baseline(space, 0, cfg.gamma);
                // An empty plan accepts the no-defense outcome.
                row.optimal_reward = plan.steps.empty() ? ndr : plan.total_discounted;
                row.improvement_pct = improvement_percentage(row.optimal_reward, ndr);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "value,seed,optimal_reward,improvement_pct,unupdated_count,gen_ms,train_ms,error\n";
    for (const SweepRow& r : rows) {
        out << num(r.value) << ',' << r.seed << ',';
        if (r.error.empty())
            out << num(r.optimal_reward) << ',' << num(r.improvement_pct) << ','
                << r.unupdated_count;
        else
            out << ",,";
        out << ',' << num(r.gen_ms) << ',' << num(r.train_ms) << ',';
        if (!r.error.empty()) {
            std::string quoted = "\"";
            for (char c : r.error) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            quoted += '"';
            out << quoted;
        }
        out << '\n';
    }
}

std::vector<ScaleRow> scaling_benchmark(const std::vector<std::uint32_t>& host_counts,
                                        const SynthSpec& generator, const TrainConfig& cfg,
                                        std::size_t state_cap) {
    std::vector<ScaleRow> rows;
    for (std::uint32_t n : host_counts) {
        if (n < 1) throw std::invalid_argument("host counts must be >= 1");
        SynthSpec spec = generator;
        spec.hosts = n;
        const Scenario scenario = synth_scenario(spec);

        ScaleRow row;
        row.hosts = n;
        GenOptions gen;
        gen.state_cap = state_cap;
        try {
            const auto t0 = std::chrono::steady_clock::now();
            const StateSpace space = generate_state_space(scenario, gen);
            const auto t1 = std::chrono::steady_clock::now();
            train(space, cfg);
            const auto t2 = std::chrono::steady_clock::now();
            row.states = space.num_states();
            row.gen_ms = ms_between(t0, t1);
            row.train_ms = ms_between(t1, t2);
        } catch (const ResourceError&) {
            row.capped = true;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_scaling_csv(std::ostream& out, const std::vector<ScaleRow>& rows) {
    out << "hosts,states,gen_ms,train_ms\n";
    for (const ScaleRow& r : rows) {
        out << r.hosts << ',';
        if (r.capped)
            out << ",,";  // cap hit: counts and timings unavailable
        else
            out << r.states << ',' << num(r.gen_ms) << ',' << num(r.train_ms);
        out << '\n';
    }
}

}  // namespace qdefense
