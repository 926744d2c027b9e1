// carleson_bench: scenario-driven experiments for dyadic and analytic Carleson
// embeddings. One subcommand per experiment kind, plus `report`, which re-runs
// the scenario echoed inside an existing report.json and checks that the new
// report is byte-identical.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "carleson/experiments/runner.hpp"

namespace ex = carleson::experiments;

namespace {

struct Flags {
    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> depth;
    std::optional<double> tol;
    int threads = 1;
};

void add_flags(CLI::App* cmd, Flags& f, const std::string& scenario_help) {
    cmd->add_option("--scenario", f.scenario, scenario_help);
    cmd->add_option("--out", f.out, std::string("results root (default: $") + ex::kResultsEnv + " or ./results)");
    cmd->add_option("--seed", f.seed, "override the scenario seed");
    cmd->add_option("--depth", f.depth, "override the depth (dyadic depth, B2 levels or lambda-grid levels)");
    cmd->add_option("--tol", f.tol, "override the quadrature tolerance");
    cmd->add_option("--threads", f.threads, "worker threads; results do not depend on it")->check(CLI::Range(1, 256));
}

ex::RunOptions options(const Flags& f) {
    ex::RunOptions o;
    o.out = f.out;
    o.threads = f.threads;
    o.overrides = {f.seed, f.depth, f.tol};
    return o;
}

int finish(const ex::RunOutcome& o) {
    if (o.exit_code != ex::kOk) {
        std::cerr << "carleson_bench: " << o.message << "\n";
        return o.exit_code;
    }
    std::cout << "results: " << o.directory.string() << "\n";
    std::cout << o.report->results.dump() << "\n";
    for (const auto& inv : o.report->invariants)
        std::cout << (inv.passed ? "  PASS  " : "  FAIL  ") << inv.name << "  (" << ex::format17(inv.value) << ")\n";
    return ex::kOk;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dyadic and analytic Carleson embedding experiments"};
    app.require_subcommand(1);

    Flags flags;
    for (const auto& kind : ex::experiment_kinds()) {
        auto* cmd = app.add_subcommand(kind, "run a " + kind + " experiment");
        add_flags(cmd, flags, "scenario file (YAML); defaults are used when omitted");
    }
    auto* report = app.add_subcommand("report", "re-run the scenario inside a report.json and compare");
    add_flags(report, flags, "existing report.json");
    report->get_option("--scenario")->required();

    CLI11_PARSE(app, argc, argv);
    const std::string kind = app.get_subcommands().front()->get_name();

    try {
        if (kind != "report") return finish(ex::run_scenario_file(flags.scenario, kind, options(flags)));

        const auto raw = ex::scenario_from_report(flags.scenario);
        const auto o = ex::run_scenario(raw, "", options(flags));
        const int code = finish(o);
        if (code != ex::kOk) return code;
        const bool same = slurp(flags.scenario) == slurp((o.directory / "report.json").string());
        std::cout << (same ? "report reproduced byte-for-byte\n" : "report DIFFERS from the original\n");
        return same ? ex::kOk : 4;
    } catch (const ex::ConfigError& e) {
        std::cerr << "carleson_bench: invalid configuration: " << e.what() << "\n";
        return ex::kInvalidConfig;
    } catch (const std::exception& e) {
        std::cerr << "carleson_bench: " << e.what() << "\n";
        return ex::kInvalidConfig;
    }
}
