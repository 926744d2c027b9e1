#pragma once

// Runs one scenario and persists it under <root>/<kind>/<timestamp>-<seed>/.
// Directories are never reused; a clash within the same second gets a suffix.
// Wall-clock time goes to manifest.json so that report.json stays reproducible.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "carleson/experiments/report.hpp"

namespace carleson::experiments {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kInvalidConfig = 1, kDegenerate = 2, kToleranceNotReached = 3 };

inline constexpr const char* kResultsEnv = "CARLESON_RESULTS";

inline fs::path results_root(const std::string& out) {
    if (!out.empty()) return out;
    if (const char* env = std::getenv(kResultsEnv); env && *env) return env;
    return "results";
}

inline std::string utc_stamp(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

inline fs::path fresh_directory(const fs::path& parent, const std::string& stem) {
    fs::create_directories(parent);
    for (int k = 0;; ++k) {
        const fs::path p = parent / (k == 0 ? stem : stem + "-" + std::to_string(k));
        if (fs::create_directory(p)) return p;
    }
}

inline void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

struct RunOptions {
    std::string out;
    Overrides overrides;
    int threads = 1;
};

struct RunOutcome {
    int exit_code = kOk;
    fs::path directory;
    std::string message;
    std::optional<Report> report;
};

inline std::string render_echo(const json& echo) {
    return "# Resolved scenario; re-run with carleson_bench <kind> --scenario <this file>\n" + echo.dump(2) + "\n";
}

// Writes report.json, curves.csv, plot.svg, scenario.yaml and manifest.json.
inline fs::path persist(const Report& r, const Scenario& sc, const RunOptions& opt, double seconds,
                        std::chrono::system_clock::time_point started) {
    // Render everything first: a plot error must not leave a half-written directory.
    const std::string report = render_report(r);
    const std::string csv = render_csv(r.table);
    const std::string svg = render_svg(r.plot);
    const std::string echo = render_echo(sc.echo);
    const std::string seed = sc.echo.contains("seed") ? std::to_string(sc.seed) : "unseeded";
    const fs::path dir = fresh_directory(results_root(opt.out) / sc.kind, utc_stamp(started) + "-" + seed);
    write_file(dir / "report.json", report);
    write_file(dir / "curves.csv", csv);
    write_file(dir / "plot.svg", svg);
    write_file(dir / "scenario.yaml", echo);
    const json manifest = {{"kind", sc.kind},
                           {"seed", sc.seed},
                           {"created_utc", utc_stamp(started)},
                           {"wall_clock_seconds", seconds},
                           {"threads", opt.threads},
                           {"report_schema", kReportSchema},
                           {"scenario_version", kScenarioVersion},
                           {"files", {"report.json", "curves.csv", "plot.svg", "scenario.yaml"}},
                           {"all_invariants_passed", r.all_passed()}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return dir;
}

// Parses, runs and persists. Errors map onto exit codes; nothing is written unless
// the run succeeds.
inline RunOutcome run_scenario(const json& raw, const std::string& command_kind, const RunOptions& opt) {
    RunOutcome o;
    try {
        const Scenario sc = parse_scenario(raw, opt.overrides, command_kind);
        const auto started = std::chrono::system_clock::now();
        const auto t0 = std::chrono::steady_clock::now();
        Report r = run_experiment(sc, Execution{opt.threads});
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.directory = persist(r, sc, opt, seconds, started);
        o.report = std::move(r);
    } catch (const DegenerateWeight& e) {
        o = {kDegenerate, {}, std::string("numerical degeneracy: ") + e.what(), std::nullopt};
    } catch (const NotPositiveSemidefinite& e) {
        o = {kDegenerate, {}, std::string("numerical degeneracy: ") + e.what(), std::nullopt};
    } catch (const ToleranceNotReached& e) {
        o = {kToleranceNotReached, {}, e.what(), std::nullopt};
    } catch (const ConvergenceFailure& e) {
        o = {kToleranceNotReached, {}, std::string(e.what()) + " (last value " + format17(e.last_value()) + ")",
             std::nullopt};
    } catch (const InvalidArgument& e) {
        o = {kInvalidConfig, {}, std::string("invalid configuration: ") + e.what(), std::nullopt};
    } catch (const json::exception& e) {
        o = {kInvalidConfig, {}, std::string("invalid configuration: ") + e.what(), std::nullopt};
    }
    return o;
}

inline RunOutcome run_scenario_file(const std::string& path, const std::string& command_kind,
                                    const RunOptions& opt) {
    try {
        return run_scenario(path.empty() ? json::object() : load_scenario_file(path), command_kind, opt);
    } catch (const ConfigError& e) {
        return {kInvalidConfig, {}, std::string("invalid configuration: ") + e.what(), std::nullopt};
    }
}

// Extracts the scenario echo from a report.json.
inline json scenario_from_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read report " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("report is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("schema", "") != kReportSchema || !doc.contains("scenario"))
        throw ConfigError("file is not a " + std::string(kReportSchema) + " report");
    return doc.at("scenario");
}

}  // namespace carleson::experiments
