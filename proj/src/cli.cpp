#include "qdefense/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "qdefense/experiments.hpp"
#include "qdefense/policy.hpp"
#include "qdefense/serialize.hpp"

namespace qdefense::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

TrainConfig effective_config(const Scenario& sc, const CommandInvocation& inv) {
    TrainConfig cfg = TrainConfig::from(sc.learning);
    if (inv.gamma) cfg.gamma = *inv.gamma;
    if (inv.alpha) cfg.alpha = *inv.alpha;
    if (inv.epsilon) cfg.epsilon = *inv.epsilon;
    if (inv.epochs) cfg.epochs = *inv.epochs;
    if (inv.seed) cfg.seed = *inv.seed;
    cfg.check();
    return cfg;
}

GenOptions effective_gen(const CommandInvocation& inv) {
    GenOptions g;
    if (inv.state_cap) g.state_cap = *inv.state_cap;
    g.ignore_attack_path = inv.ignore_attack_path;
    return g;
}

StateSpace obtain_space(const CommandInvocation& inv) {
    if (!inv.space_path.empty()) return load_state_space(inv.space_path);
    if (inv.scenario_path.empty())
        throw std::invalid_argument("need a scenario file or --space artifact");
    return generate_state_space(load_scenario(inv.scenario_path), effective_gen(inv));
}

fs::path ensure_out_dir(const CommandInvocation& inv) {
    fs::path dir(inv.out_dir.empty() ? "." : inv.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::string defense_detail(const DefenseSpec& d) {
    if (d.kind == DefenseKind::Block) return "block " + d.from + "->" + d.protected_host;
    return "patch " + d.vuln + " on " + d.target;
}

std::string state_record(const StateSpace& space, std::uint32_t i) {
    const ScenarioIndex& ix = space.index();
    const NetworkState& st = space.state(i);
    std::string out = "Compromised Hosts: [";
    bool first = true;
    for (auto b = st.compromised.find_first(); b != Bitset::npos;
         b = st.compromised.find_next(b)) {
        if (!first) out += ", ";
        out += std::to_string(b);
        first = false;
    }
    out += "]\nLinks: [";
    first = true;
    for (auto b = st.links.find_first(); b != Bitset::npos; b = st.links.find_next(b)) {
        if (!first) out += ", ";
        const auto& link = ix.link(static_cast<std::uint32_t>(b));
        out += '(';
        out += link.from == ScenarioIndex::kInternetNode ? std::string(kInternet)
                                                         : std::to_string(link.from);
        out += ", ";
        out += std::to_string(link.to);
        out += ')';
        first = false;
    }
    out += "]\nVulnerabilities: [";
    first = true;
    for (auto b = st.vulns.find_first(); b != Bitset::npos; b = st.vulns.find_next(b)) {
        if (!first) out += ", ";
        out += ix.vuln_id(static_cast<std::uint32_t>(b));
        first = false;
    }
    out += "]\n";
    return out;
}

std::string transitions_csv(const StateSpace& space) {
    const ScenarioIndex& ix = space.index();
    std::string out =
        "from,action,to,success_rate,success_reward,fail_reward,target_host,target_vuln\n";
    for (std::uint32_t s = 0; s < space.num_states(); ++s) {
        for (const Transition& t : space.transitions(s)) {
            out += std::to_string(t.from);
            out += ',';
            out += t.action.is_attack() ? "attack" : ix.defense_id(t.action.defense_index());
            out += ',';
            out += std::to_string(t.to);
            out += ',';
            out += full(t.success_rate);
            out += ',';
            out += full(t.success_reward);
            out += ',';
            out += full(t.fail_reward);
            out += ',';
            if (t.target_pair >= 0) {
                const auto& p = ix.pair(static_cast<std::uint32_t>(t.target_pair));
                out += ix.host_id(p.host);
                out += ',';
                out += ix.vuln_id(static_cast<std::uint32_t>(t.target_pair));
            } else {
                out += ',';
            }
            out += '\n';
        }
    }
    return out;
}

struct SolveReport {
    std::string text;
    std::string plan_csv;
};

SolveReport make_solve_report(const StateSpace& space, const QTable& q, const TrainConfig& cfg) {
    const Scenario& sc = space.scenario();
    const DefensePlan plan = extract_defense_sequence(space, q, 0, cfg.gamma);
    const double ndr = no_defense_baseline(space, 0, cfg.gamma);

    std::ostringstream text;
    std::string plan_csv = "step,defense,detail,cost,cumulative_discounted\n";

    text << "states: " << space.num_states() << "\n";
    text << "actions: " << space.num_actions() << "\n";
    if (plan.steps.empty()) {
        text << "plan: (no defense needed)\n";
    } else {
        text << "plan:";
        for (std::uint32_t d : plan.steps) text << ' ' << sc.defenses[d].id;
        text << "\n";
        double discount = 1.0;
        double cumulative = 0.0;
        for (std::size_t i = 0; i < plan.steps.size(); ++i) {
            const DefenseSpec& d = sc.defenses[plan.steps[i]];
            const double cost = -plan.per_step_reward[i];
            cumulative += discount * plan.per_step_reward[i];
            text << "  " << (i + 1) << ". " << d.id << "  " << defense_detail(d)
                 << "  cost=" << num(cost) << "  cumulative=" << num(cumulative) << "\n";
            plan_csv += std::to_string(i + 1) + "," + d.id + "," + defense_detail(d) + "," +
                        num(cost) + "," + num(cumulative) + "\n";
            discount *= cfg.gamma;
        }
    }
    text << "plan reward (undiscounted): " << num(plan.total_undiscounted) << "\n";
    text << "plan reward (discounted, gamma=" << num(cfg.gamma)
         << "): " << num(plan.total_discounted) << "\n";
    text << "no-defense baseline: " << num(ndr) << "\n";
    if (ndr < 0.0) {
        // An empty plan accepts the no-defense outcome.
        const double osr = plan.steps.empty() ? ndr : plan.total_discounted;
        const double imp = improvement_percentage(osr, ndr);
        text << "improvement: " << num(imp * 100.0) << "%\n";
    } else {
        text << "improvement: n/a (no attack exposure from the initial state)\n";
    }
    return {text.str(), std::move(plan_csv)};
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d%H%M%S", &tm);
    return buf;
}

int cmd_validate(const CommandInvocation& inv, std::ostream& out) {
    if (inv.scenario_path.empty()) throw std::invalid_argument("validate needs a scenario file");
    const Scenario s = parse_scenario_unchecked(read_text_file(inv.scenario_path));
    const auto violations = validate_scenario(s);
    if (violations.empty()) {
        out << "ok: " << s.hosts.size() << " hosts, " << s.links.size() << " links, "
            << s.defenses.size() << " defenses\n";
        return kExitOk;
    }
    for (const auto& v : violations) out << "violation: " << v << "\n";
    return kExitValidation;
}

int cmd_generate(const CommandInvocation& inv, std::ostream& out) {
    if (inv.scenario_path.empty()) throw std::invalid_argument("generate needs a scenario file");
    const fs::path dir = ensure_out_dir(inv);
    const Scenario scenario = load_scenario(inv.scenario_path);
    const auto t0 = std::chrono::steady_clock::now();
    const StateSpace space = generate_state_space(scenario, effective_gen(inv));
    const double gen_ms = ms_since(t0);

    std::ostringstream states_txt;
    dump_states_text(space, states_txt);
    write_text_file(dir / "states.txt", states_txt.str());
    write_text_file(dir / "transitions.csv", transitions_csv(space));
    save_state_space(space, dir / "space.json");

    std::size_t n_transitions = 0;
    for (std::uint32_t s = 0; s < space.num_states(); ++s)
        n_transitions += space.transitions(s).size();
    out << "states: " << space.num_states() << "\n";
    out << "actions: " << space.num_actions() << "\n";
    out << "transitions: " << n_transitions << "\n";
    out << "gen_ms: " << num(gen_ms) << "\n";
    out << "wrote: " << (dir / "states.txt").string() << ", "
        << (dir / "transitions.csv").string() << ", " << (dir / "space.json").string() << "\n";
    return kExitOk;
}

int cmd_train(const CommandInvocation& inv, std::ostream& out) {
    const fs::path dir = ensure_out_dir(inv);
    const StateSpace space = obtain_space(inv);
    const TrainConfig cfg = effective_config(space.scenario(), inv);
    const auto t0 = std::chrono::steady_clock::now();
    const QTable q = train(space, cfg);
    const double train_ms = ms_since(t0);

    write_text_file(dir / "qtable.csv", qtable_to_csv(space, q));
    std::ostringstream dump;
    dump_qtable_text(space, q, dump);
    write_text_file(dir / "qtable.txt", dump.str());

    out << "states: " << space.num_states() << "\n";
    out << "epochs: " << cfg.epochs << "\n";
    out << "unupdated q-values: " << count_unupdated(q) << "\n";
    out << "train_ms: " << num(train_ms) << "\n";
    out << "wrote: " << (dir / "qtable.csv").string() << ", " << (dir / "qtable.txt").string()
        << "\n";
    return kExitOk;
}

int cmd_solve(const CommandInvocation& inv, std::ostream& out) {
    const fs::path dir = ensure_out_dir(inv);
    const StateSpace space = obtain_space(inv);
    const TrainConfig cfg = effective_config(space.scenario(), inv);
    QTable q = inv.qtable_path.empty()
                   ? train(space, cfg)
                   : qtable_from_csv(space, read_text_file(inv.qtable_path));

    const SolveReport report = make_solve_report(space, q, cfg);
    write_text_file(dir / "report.txt", report.text);
    write_text_file(dir / "plan.csv", report.plan_csv);
    out << report.text;
    return kExitOk;
}

int cmd_sweep(const CommandInvocation& inv, std::ostream& out) {
    if (inv.scenario_path.empty()) throw std::invalid_argument("sweep needs a scenario file");
    if (inv.sweep_values.empty()) throw std::invalid_argument("sweep needs --values");
    const fs::path dir = ensure_out_dir(inv);
    const Scenario scenario = load_scenario(inv.scenario_path);

    SweepSpec spec;
    if (inv.sweep_param == "gamma")
        spec.parameter = SweepParameter::Gamma;
    else if (inv.sweep_param == "epsilon")
        spec.parameter = SweepParameter::Epsilon;
    else if (inv.sweep_param == "epochs")
        spec.parameter = SweepParameter::Epochs;
    else
        throw std::invalid_argument("unknown sweep parameter '" + inv.sweep_param +
                                    "' (gamma|epsilon|epochs)");
    spec.values = inv.sweep_values;
    spec.repetitions = inv.repetitions;
    spec.base = effective_config(scenario, inv);
    spec.scenario = &scenario;
    spec.gen = effective_gen(inv);

    const auto rows = run_sweep(spec);
    const fs::path file = dir / ("sweep_" + inv.sweep_param + "_" + utc_timestamp() + ".csv");
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    write_text_file(file, csv.str());
    out << "wrote: " << file.string() << " (" << rows.size() << " rows)\n";
    return kExitOk;
}

int cmd_bench(const CommandInvocation& inv, std::ostream& out) {
    if (inv.bench_hosts.empty()) throw std::invalid_argument("bench needs --hosts");
    const fs::path dir = ensure_out_dir(inv);

    SynthSpec generator;
    if (inv.topology == "chain")
        generator.topology = Topology::Chain;
    else if (inv.topology == "random")
        generator.topology = Topology::Random;
    else
        throw std::invalid_argument("unknown topology '" + inv.topology + "' (chain|random)");
    generator.seed = inv.synth_seed;
    generator.edge_prob = inv.edge_prob;

    TrainConfig cfg;
    if (inv.gamma) cfg.gamma = *inv.gamma;
    if (inv.alpha) cfg.alpha = *inv.alpha;
    if (inv.epsilon) cfg.epsilon = *inv.epsilon;
    if (inv.epochs) cfg.epochs = *inv.epochs;
    if (inv.seed) cfg.seed = *inv.seed;
    cfg.check();

    const auto rows = scaling_benchmark(inv.bench_hosts, generator, cfg,
                                        inv.state_cap.value_or(GenOptions{}.state_cap));
    std::ostringstream csv;
    write_scaling_csv(csv, rows);
    write_text_file(dir / "scaling.csv", csv.str());
    out << csv.str();
    out << "wrote: " << (dir / "scaling.csv").string() << "\n";
    return kExitOk;
}

int cmd_dump(const CommandInvocation& inv, std::ostream& out) {
    const StateSpace space = obtain_space(inv);
    if (inv.qtable_path.empty()) throw std::invalid_argument("dump needs --qtable");
    const QTable q = qtable_from_csv(space, read_text_file(inv.qtable_path));
    if (inv.format == "csv")
        out << qtable_to_csv(space, q);
    else
        dump_qtable_text(space, q, out);
    return kExitOk;
}

}  // namespace

std::string format_qvalue(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    std::string s = buf;
    if (s == "-0.000") s = "0.000";
    while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
    return s;
}

void dump_states_text(const StateSpace& space, std::ostream& out) {
    for (std::uint32_t i = 0; i < space.num_states(); ++i) {
        if (i) out << '\n';
        out << state_record(space, i);
    }
}

void dump_qtable_text(const StateSpace& space, const QTable& q, std::ostream& out) {
    for (std::uint32_t s = 0; s < space.num_states(); ++s) {
        if (s) out << '\n';
        out << state_record(space, s);
        out << "Q-Values: ";
        for (std::uint32_t col = 0; col < q.num_actions(); ++col) {
            if (col) out << ", ";
            out << format_qvalue(q.value(s, col));
        }
        out << '\n';
    }
}

int run(const CommandInvocation& inv, std::ostream& out, std::ostream& err) {
    try {
        switch (inv.command) {
            case Command::Validate: return cmd_validate(inv, out);
            case Command::Generate: return cmd_generate(inv, out);
            case Command::Train: return cmd_train(inv, out);
            case Command::Solve: return cmd_solve(inv, out);
            case Command::Sweep: return cmd_sweep(inv, out);
            case Command::Bench: return cmd_bench(inv, out);
            case Command::Dump: return cmd_dump(inv, out);
        }
        err << "error: validation: unknown command\n";
        return kExitValidation;
    } catch (const ResourceError& e) {
        err << "error: resource: " << e.what() << "\n";
        return kExitResource;
    } catch (const IoError& e) {
        err << "error: io: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: io: " << e.what() << "\n";
        return kExitIo;
    } catch (const ParseError& e) {
        err << "error: validation: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        err << "error: validation: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace qdefense::cli
