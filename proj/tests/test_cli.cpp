#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "qdefense/cli.hpp"
#include "qdefense/serialize.hpp"
#include "test_util.hpp"

using namespace qdefense;
using cli::Command;
using cli::CommandInvocation;

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qdefense_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run(const CommandInvocation& inv) {
    std::ostringstream out, err;
    const int code = cli::run(inv, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

}  // namespace

TEST_CASE("validate reports ok and violations with the right exit codes") {
    CommandInvocation inv;
    inv.command = Command::Validate;
    inv.scenario_path = testutil::fixture("paper8.scenario").string();
    auto r = run(inv);
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("ok:") == 0);

    TempDir tmp;
    const fs::path bad = tmp.path / "bad.scenario";
    write_text_file(bad, R"({"hosts": [{"id": "h1", "vulns": [{"id": "v1", "cvss": 11.0, "patch_cost": 1.0}]}]})");
    inv.scenario_path = bad.string();
    r = run(inv);
    CHECK(r.code == cli::kExitValidation);
    CHECK(r.out.find("cvss out of [0,10]") != std::string::npos);
}

TEST_CASE("missing files exit with the io code") {
    CommandInvocation inv;
    inv.command = Command::Validate;
    inv.scenario_path = "/nonexistent/nope.scenario";
    const auto r = run(inv);
    CHECK(r.code == cli::kExitIo);
    CHECK(r.err.find("error: io:") == 0);
}

TEST_CASE("train rejects out-of-range overrides with a range diagnostic") {
    TempDir tmp;
    CommandInvocation inv;
    inv.command = Command::Train;
    inv.scenario_path = testutil::fixture("tiny1.scenario").string();
    inv.out_dir = tmp.path.string();
    inv.epochs = 0;
    const auto r = run(inv);
    CHECK(r.code == cli::kExitValidation);
    CHECK(r.err.find("error: validation:") == 0);
    CHECK(r.err.find("epochs") != std::string::npos);
}

TEST_CASE("the state cap exits with the resource code") {
    TempDir tmp;
    CommandInvocation inv;
    inv.command = Command::Generate;
    inv.scenario_path = testutil::fixture("paper8.scenario").string();
    inv.out_dir = tmp.path.string();
    inv.state_cap = 10;
    const auto r = run(inv);
    CHECK(r.code == cli::kExitResource);
    CHECK(r.err.find("error: resource:") == 0);
}

TEST_CASE("solve reproduces the published plans") {
    TempDir tmp;
    CommandInvocation inv;
    inv.command = Command::Solve;
    inv.scenario_path = testutil::fixture("paper8.scenario").string();
    inv.out_dir = tmp.path.string();

    auto r = run(inv);
    REQUIRE(r.code == cli::kExitOk);
    CHECK(r.out.find("plan: D3\n") != std::string::npos);
    CHECK(slurp(tmp.path / "plan.csv").find("1,D3,block internet->172.16.0.2,2.1,-2.1") !=
          std::string::npos);
    CHECK(slurp(tmp.path / "report.txt") == r.out);

    inv.ignore_attack_path = true;
    r = run(inv);
    REQUIRE(r.code == cli::kExitOk);
    CHECK(r.out.find("plan: D3 D1\n") != std::string::npos);
}

TEST_CASE("train artifacts are byte-identical across reruns") {
    TempDir a, b;
    CommandInvocation inv;
    inv.command = Command::Train;
    inv.scenario_path = testutil::fixture("paper8.scenario").string();
    inv.epochs = 2000;
    inv.seed = 5;

    inv.out_dir = a.path.string();
    REQUIRE(run(inv).code == cli::kExitOk);
    inv.out_dir = b.path.string();
    REQUIRE(run(inv).code == cli::kExitOk);

    CHECK(slurp(a.path / "qtable.csv") == slurp(b.path / "qtable.csv"));
    CHECK(slurp(a.path / "qtable.txt") == slurp(b.path / "qtable.txt"));
}

TEST_CASE("staged generate/train/solve equals the fused solve") {
    TempDir staged, fused;

    CommandInvocation gen;
    gen.command = Command::Generate;
    gen.scenario_path = testutil::fixture("paper8.scenario").string();
    gen.out_dir = staged.path.string();
    REQUIRE(run(gen).code == cli::kExitOk);

    CommandInvocation tr;
    tr.command = Command::Train;
    tr.space_path = (staged.path / "space.json").string();
    tr.out_dir = staged.path.string();
    REQUIRE(run(tr).code == cli::kExitOk);

    CommandInvocation sv;
    sv.command = Command::Solve;
    sv.space_path = (staged.path / "space.json").string();
    sv.qtable_path = (staged.path / "qtable.csv").string();
    sv.out_dir = staged.path.string();
    REQUIRE(run(sv).code == cli::kExitOk);

    CommandInvocation direct;
    direct.command = Command::Solve;
    direct.scenario_path = testutil::fixture("paper8.scenario").string();
    direct.out_dir = fused.path.string();
    REQUIRE(run(direct).code == cli::kExitOk);

    CHECK(slurp(staged.path / "report.txt") == slurp(fused.path / "report.txt"));
    CHECK(slurp(staged.path / "plan.csv") == slurp(fused.path / "plan.csv"));
}

TEST_CASE("generate writes the paper-format state dump in discovery order") {
    TempDir tmp;
    CommandInvocation inv;
    inv.command = Command::Generate;
    inv.scenario_path = testutil::fixture("paper8.scenario").string();
    inv.out_dir = tmp.path.string();
    REQUIRE(run(inv).code == cli::kExitOk);

    const std::string states = slurp(tmp.path / "states.txt");
    // First record is the initial state: nothing compromised, all links alive.
    CHECK(states.rfind("Compromised Hosts: []\n"
                       "Links: [(internet, 0), (internet, 1), (0, 1), (1, 0), (0, 2), (1, 2), "
                       "(2, 3), (2, 6), (3, 4), (4, 5), (6, 5), (5, 7), (6, 7)]\n"
                       "Vulnerabilities: [V1, V2, V3, V4, V5, V6, V7, V8]\n",
                       0) == 0);
    const std::string trans = slurp(tmp.path / "transitions.csv");
    CHECK(trans.rfind("from,action,to,", 0) == 0);
    CHECK(trans.find("0,attack,") != std::string::npos);
    CHECK(trans.find(",172.16.0.2,V2") != std::string::npos);
}

TEST_CASE("dump renders stored q-tables in the text format") {
    TempDir tmp;
    CommandInvocation gen;
    gen.command = Command::Generate;
    gen.scenario_path = testutil::fixture("paper8.scenario").string();
    gen.out_dir = tmp.path.string();
    REQUIRE(run(gen).code == cli::kExitOk);

    // Store the oracle table, then dump it.
    const StateSpace space = load_state_space(tmp.path / "space.json");
    const QTable oracle = value_iteration_oracle(space, 0.9);
    write_text_file(tmp.path / "qtable.csv", qtable_to_csv(space, oracle));

    CommandInvocation dump;
    dump.command = Command::Dump;
    dump.space_path = (tmp.path / "space.json").string();
    dump.qtable_path = (tmp.path / "qtable.csv").string();
    const auto r = run(dump);
    REQUIRE(r.code == cli::kExitOk);
    // Secure post-D3 state renders the known row.
    CHECK(r.out.find("Q-Values: 0.0, -4.3, -6.0, 0.0, -8.8, -3.5, -5.0") != std::string::npos);
    // Initial state renders the converged State0 row.
    CHECK(r.out.find("Q-Values: -15.6, -6.19, -7.89, -2.1, -10.69, -5.39, -6.89") !=
          std::string::npos);
}

TEST_CASE("a fresh table dumps as zeros") {
    const StateSpace space = generate_state_space(testutil::tiny1());
    const QTable q = init_q_table(space);
    std::ostringstream os;
    cli::dump_qtable_text(space, q, os);
    CHECK(os.str().find("Q-Values: 0.0, 0.0, 0.0") != std::string::npos);
    CHECK(os.str().find("-") == std::string::npos);
}

TEST_CASE("format_qvalue trims to the dump style") {
    CHECK(cli::format_qvalue(0.0) == "0.0");
    CHECK(cli::format_qvalue(-0.0) == "0.0");
    CHECK(cli::format_qvalue(-2.1) == "-2.1");
    CHECK(cli::format_qvalue(-6.0) == "-6.0");
    CHECK(cli::format_qvalue(-9.298) == "-9.298");
    CHECK(cli::format_qvalue(-9.2984) == "-9.298");
    CHECK(cli::format_qvalue(-6.19) == "-6.19");
}

TEST_CASE("sweep and bench write their csv artifacts") {
    TempDir tmp;
    CommandInvocation sweep;
    sweep.command = Command::Sweep;
    sweep.scenario_path = testutil::fixture("tiny1.scenario").string();
    sweep.out_dir = tmp.path.string();
    sweep.sweep_param = "epochs";
    sweep.sweep_values = {10, 50};
    sweep.repetitions = 2;
    const auto r = run(sweep);
    REQUIRE(r.code == cli::kExitOk);
    bool found_sweep = false;
    for (const auto& entry : fs::directory_iterator(tmp.path)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("sweep_epochs_", 0) == 0) {
            found_sweep = true;
            const std::string csv = slurp(entry.path());
            std::size_t lines = 0;
            for (char c : csv)
                if (c == '\n') ++lines;
            CHECK(lines == 5);  // header + 2 values x 2 reps
        }
    }
    CHECK(found_sweep);

    CommandInvocation bench;
    bench.command = Command::Bench;
    bench.out_dir = tmp.path.string();
    bench.bench_hosts = {2, 3};
    bench.epochs = 50;
    REQUIRE(run(bench).code == cli::kExitOk);
    const std::string scaling = slurp(tmp.path / "scaling.csv");
    CHECK(scaling.rfind("hosts,states,gen_ms,train_ms\n", 0) == 0);
}
