#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qdefense/cli.hpp"
#include "qdefense/experiments.hpp"
#include "qdefense/policy.hpp"
#include "qdefense/qlearning.hpp"
#include "qdefense/scenario.hpp"
#include "qdefense/serialize.hpp"
#include "qdefense/state_space.hpp"

namespace py = pybind11;
using namespace qdefense;

namespace {

TrainConfig make_config(const StateSpace& space, py::object gamma, py::object alpha,
                        py::object epsilon, py::object epochs, py::object seed) {
    TrainConfig cfg = TrainConfig::from(space.scenario().learning);
    if (!gamma.is_none()) cfg.gamma = gamma.cast<double>();
    if (!alpha.is_none()) cfg.alpha = alpha.cast<double>();
    if (!epsilon.is_none()) cfg.epsilon = epsilon.cast<double>();
    if (!epochs.is_none()) cfg.epochs = epochs.cast<std::uint64_t>();
    if (!seed.is_none()) cfg.seed = seed.cast<std::uint64_t>();
    cfg.check();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_qdefense, m) {
    m.doc() = "Network defense planning: MDP state enumeration + tabular Q-learning";

    py::register_exception<ParseError>(m, "ScenarioError");
    py::register_exception<ResourceError>(m, "ResourceLimitError");

    py::class_<Scenario>(m, "Scenario")
        .def_property_readonly("num_hosts", [](const Scenario& s) { return s.hosts.size(); })
        .def_property_readonly("num_links", [](const Scenario& s) { return s.links.size(); })
        .def_property_readonly("num_defenses", [](const Scenario& s) { return s.defenses.size(); })
        .def_property_readonly("num_vulnerabilities",
                               [](const Scenario& s) {
                                   std::size_t n = 0;
                                   for (const auto& h : s.hosts) n += h.vulns.size();
                                   return n;
                               })
        .def_property_readonly("host_ids",
                               [](const Scenario& s) {
                                   std::vector<std::string> ids;
                                   for (const auto& h : s.hosts) ids.push_back(h.id);
                                   return ids;
                               })
        .def_property_readonly("defense_ids",
                               [](const Scenario& s) {
                                   std::vector<std::string> ids;
                                   for (const auto& d : s.defenses) ids.push_back(d.id);
                                   return ids;
                               })
        .def_property_readonly("attack_path", [](const Scenario& s) { return s.attack_path; })
        .def("validate", &validate_scenario)
        .def("emit", &emit_scenario)
        .def("__eq__", [](const Scenario& a, const Scenario& b) { return a == b; })
        .def("__repr__", [](const Scenario& s) {
            std::ostringstream os;
            os << "<Scenario hosts=" << s.hosts.size() << " links=" << s.links.size()
               << " defenses=" << s.defenses.size() << ">";
            return os.str();
        });

    py::class_<StateSpace>(m, "StateSpace")
        .def_property_readonly("num_states", &StateSpace::num_states)
        .def_property_readonly("num_actions", &StateSpace::num_actions)
        .def_property_readonly("has_attack_path", &StateSpace::has_path)
        .def_property_readonly("action_names",
                               [](const StateSpace& sp) {
                                   std::vector<std::string> names{"attack"};
                                   for (const auto& d : sp.scenario().defenses)
                                       names.push_back(d.id);
                                   return names;
                               })
        .def(
            "feasible_attacks",
            [](const StateSpace& sp, std::uint32_t state) {
                std::vector<std::pair<std::string, std::string>> out;
                const ScenarioIndex& ix = sp.index();
                for (std::uint32_t p : feasible_attacks(ix, sp.state(state)))
                    out.emplace_back(ix.host_id(ix.pair(p).host), ix.vuln_id(p));
                return out;
            },
            py::arg("state"))
        .def(
            "feasible_defenses",
            [](const StateSpace& sp, std::uint32_t state) {
                std::vector<std::string> out;
                for (std::uint32_t d : feasible_defenses(sp.index(), sp.state(state)))
                    out.push_back(sp.index().defense_id(d));
                return out;
            },
            py::arg("state"))
        .def("dump_text",
             [](const StateSpace& sp) {
                 std::ostringstream os;
                 cli::dump_states_text(sp, os);
                 return os.str();
             })
        .def("save",
             [](const StateSpace& sp, const std::string& path) { save_state_space(sp, path); })
        .def("__repr__", [](const StateSpace& sp) {
            std::ostringstream os;
            os << "<StateSpace states=" << sp.num_states() << " actions=" << sp.num_actions()
               << ">";
            return os.str();
        });

    py::class_<QTable>(m, "QTable")
        .def_property_readonly("num_states", &QTable::num_states)
        .def_property_readonly("num_actions", &QTable::num_actions)
        .def("value", &QTable::value, py::arg("state"), py::arg("column"))
        .def("update_count", &QTable::update_count, py::arg("state"), py::arg("column"))
        .def(
            "row",
            [](const QTable& q, std::uint32_t s) {
                const auto r = q.row(s);
                return std::vector<double>(r.begin(), r.end());
            },
            py::arg("state"))
        .def(
            "best_column",
            [](const QTable& q, std::uint32_t s) { return best_action(q, s).column(); },
            py::arg("state"))
        .def("unupdated", [](const QTable& q) { return count_unupdated(q); })
        .def("__eq__", [](const QTable& a, const QTable& b) { return a == b; });

    py::class_<DefensePlan>(m, "DefensePlan")
        .def_property_readonly("per_step_reward",
                               [](const DefensePlan& p) { return p.per_step_reward; })
        .def_property_readonly("total_undiscounted",
                               [](const DefensePlan& p) { return p.total_undiscounted; })
        .def_property_readonly("total_discounted",
                               [](const DefensePlan& p) { return p.total_discounted; })
        .def_property_readonly("terminal_state",
                               [](const DefensePlan& p) { return p.terminal_state; })
        .def_property_readonly("step_indices", [](const DefensePlan& p) { return p.steps; });

    m.def(
        "parse_scenario", [](const std::string& text) { return parse_scenario(text); },
        py::arg("text"));
    m.def(
        "load_scenario", [](const std::string& path) { return load_scenario(path); },
        py::arg("path"));
    m.def("validate_scenario", &validate_scenario, py::arg("scenario"));
    m.def("emit_scenario", &emit_scenario, py::arg("scenario"));

    m.def(
        "generate",
        [](const Scenario& s, bool ignore_attack_path, std::size_t state_cap) {
            GenOptions opt;
            opt.ignore_attack_path = ignore_attack_path;
            opt.state_cap = state_cap;
            return generate_state_space(s, opt);
        },
        py::arg("scenario"), py::arg("ignore_attack_path") = false,
        py::arg("state_cap") = GenOptions{}.state_cap);
    m.def(
        "load_state_space", [](const std::string& path) { return load_state_space(path); },
        py::arg("path"));

    m.def(
        "train",
        [](const StateSpace& space, py::object gamma, py::object alpha, py::object epsilon,
           py::object epochs, py::object seed) {
            return train(space, make_config(space, gamma, alpha, epsilon, epochs, seed));
        },
        py::arg("space"), py::kw_only(), py::arg("gamma") = py::none(),
        py::arg("alpha") = py::none(), py::arg("epsilon") = py::none(),
        py::arg("epochs") = py::none(), py::arg("seed") = py::none());

    m.def("value_iteration", &value_iteration_oracle, py::arg("space"), py::arg("gamma"),
          py::arg("tolerance") = 1e-12, py::arg("max_sweeps") = 1'000'000);

    m.def(
        "extract_plan",
        [](const StateSpace& space, const QTable& q, std::uint32_t start, py::object gamma) {
            const double g =
                gamma.is_none() ? space.scenario().learning.gamma : gamma.cast<double>();
            DefensePlan plan = extract_defense_sequence(space, q, start, g);
            py::list ids;
            for (std::uint32_t d : plan.steps) ids.append(space.index().defense_id(d));
            return py::make_tuple(ids, plan);
        },
        py::arg("space"), py::arg("qtable"), py::arg("start") = 0, py::arg("gamma") = py::none());

    m.def(
        "solve",
        [](const Scenario& s, bool ignore_attack_path, py::object epochs, py::object seed) {
            GenOptions opt;
            opt.ignore_attack_path = ignore_attack_path;
            const StateSpace space = generate_state_space(s, opt);
            TrainConfig cfg = TrainConfig::from(s.learning);
            if (!epochs.is_none()) cfg.epochs = epochs.cast<std::uint64_t>();
            if (!seed.is_none()) cfg.seed = seed.cast<std::uint64_t>();
            cfg.check();
            const QTable q = train(space, cfg);
            const DefensePlan plan = extract_defense_sequence(space, q, 0, cfg.gamma);
            std::vector<std::string> ids;
            for (std::uint32_t d : plan.steps) ids.push_back(space.index().defense_id(d));
            return ids;
        },
        py::arg("scenario"), py::arg("ignore_attack_path") = false, py::kw_only(),
        py::arg("epochs") = py::none(), py::arg("seed") = py::none());

    m.def("no_defense_baseline", &no_defense_baseline, py::arg("space"), py::arg("start"),
          py::arg("gamma"));
    m.def("improvement_percentage", &improvement_percentage, py::arg("osr"), py::arg("ndr"));

    m.def("qtable_to_csv", &qtable_to_csv, py::arg("space"), py::arg("qtable"));
    m.def("dump_qtable_text", [](const StateSpace& space, const QTable& q) {
        std::ostringstream os;
        cli::dump_qtable_text(space, q, os);
        return os.str();
    });

    m.def(
        "synth_scenario",
        [](std::uint32_t hosts, const std::string& topology, std::uint64_t seed,
           double edge_prob) {
            SynthSpec spec;
            spec.hosts = hosts;
            if (topology == "chain")
                spec.topology = Topology::Chain;
            else if (topology == "random")
                spec.topology = Topology::Random;
            else
                throw std::invalid_argument("topology must be 'chain' or 'random'");
            spec.seed = seed;
            spec.edge_prob = edge_prob;
            return synth_scenario(spec);
        },
        py::arg("hosts"), py::arg("topology") = "chain", py::arg("seed") = 0,
        py::arg("edge_prob") = 0.3);
}
