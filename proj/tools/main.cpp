#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdefense/cli.hpp"

namespace {

using qdefense::cli::Command;
using qdefense::cli::CommandInvocation;

void add_common_flags(CLI::App* cmd, CommandInvocation& inv) {
    cmd->add_option("--gamma", inv.gamma, "Discount factor override, (0,1)");
    cmd->add_option("--alpha", inv.alpha, "Learning rate override, (0,1]");
    cmd->add_option("--epsilon", inv.epsilon, "Exploration rate override, [0,1]");
    cmd->add_option("--epochs", inv.epochs, "Training episode count override");
    cmd->add_option("--seed", inv.seed, "Random seed override");
    cmd->add_flag("--ignore-attack-path", inv.ignore_attack_path,
                  "Drop the declared attack path (unconstrained attacker)");
    cmd->add_option("--state-cap", inv.state_cap, "Abort generation beyond this many states");
    cmd->add_option("--out", inv.out_dir, "Output directory for artifacts");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qdefense: network defense planning via MDP state enumeration + Q-learning"};
    app.require_subcommand(1);

    CommandInvocation inv;

    auto* validate = app.add_subcommand("validate", "Check a scenario file, list violations");
    validate->add_option("scenario", inv.scenario_path, "Scenario file")->required();

    auto* generate = app.add_subcommand("generate", "Enumerate the state space and write it out");
    generate->add_option("scenario", inv.scenario_path, "Scenario file")->required();
    add_common_flags(generate, inv);

    auto* train_cmd = app.add_subcommand("train", "Train a Q-table over the generated space");
    train_cmd->add_option("scenario", inv.scenario_path, "Scenario file");
    train_cmd->add_option("--space", inv.space_path, "Stored state-space artifact (space.json)");
    add_common_flags(train_cmd, inv);

    auto* solve = app.add_subcommand("solve", "Train and extract the optimal defense sequence");
    solve->add_option("scenario", inv.scenario_path, "Scenario file");
    solve->add_option("--space", inv.space_path, "Stored state-space artifact");
    solve->add_option("--qtable", inv.qtable_path, "Stored q-table artifact (qtable.csv)");
    add_common_flags(solve, inv);

    auto* sweep = app.add_subcommand("sweep", "Parameter sweep, one training run per value/seed");
    sweep->add_option("scenario", inv.scenario_path, "Scenario file")->required();
    sweep->add_option("--param", inv.sweep_param, "gamma|epsilon|epochs")->required();
    sweep->add_option("--values", inv.sweep_values, "Values to sweep")->required()->delimiter(',');
    sweep->add_option("--reps", inv.repetitions, "Seeds per value");
    add_common_flags(sweep, inv);

    auto* bench = app.add_subcommand("bench", "Scaling benchmark over synthetic scenarios");
    bench->add_option("--hosts", inv.bench_hosts, "Host counts")->required()->delimiter(',');
    bench->add_option("--topology", inv.topology, "chain|random");
    bench->add_option("--edge-prob", inv.edge_prob, "Random topology edge probability");
    bench->add_option("--synth-seed", inv.synth_seed, "Synthetic generator seed");
    add_common_flags(bench, inv);

    auto* dump = app.add_subcommand("dump", "Render a stored q-table in the text dump format");
    dump->add_option("--space", inv.space_path, "Stored state-space artifact")->required();
    dump->add_option("--qtable", inv.qtable_path, "Stored q-table artifact")->required();
    dump->add_option("--format", inv.format, "text|csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: validation: " << e.what() << "\n";
        return qdefense::cli::kExitValidation;
    }

    if (validate->parsed()) inv.command = Command::Validate;
    if (generate->parsed()) inv.command = Command::Generate;
    if (train_cmd->parsed()) inv.command = Command::Train;
    if (solve->parsed()) inv.command = Command::Solve;
    if (sweep->parsed()) inv.command = Command::Sweep;
    if (bench->parsed()) inv.command = Command::Bench;
    if (dump->parsed()) inv.command = Command::Dump;

    return qdefense::cli::run(inv, std::cout, std::cerr);
}
