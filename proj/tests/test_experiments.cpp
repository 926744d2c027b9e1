#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "carleson/experiments/runner.hpp"

using namespace carleson;
using namespace carleson::experiments;

namespace {

class Experiments : public ::testing::Test {
protected:
    void SetUp() override {
        std::random_device rd;
        root_ = fs::temp_directory_path() / ("carleson-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    RunOptions opts(int threads = 1) const {
        RunOptions o;
        o.out = root_.string();
        o.threads = threads;
        return o;
    }

    RunOutcome run(const std::string& yaml, int threads = 1, const std::string& kind = "") const {
        return run_scenario(load_scenario_text(yaml), kind, opts(threads));
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::size_t entries() const {
        std::size_t n = 0;
        for ([[maybe_unused]] const auto& e : fs::recursive_directory_iterator(root_)) ++n;
        return n;
    }

    fs::path root_;
};

const char* kOriginAtom = R"(
version: 1
kind: equivalence
depth: 6
measure:
  kind: atom
  point: [0, 0]
)";

const char* kRandom = R"(
version: 1
kind: equivalence
seed: 99
depth: 7
measure:
  kind: random
  dim: 3
  atoms: 6
)";

}  // namespace

TEST(ScenarioYaml, ScalarsKeepTheirTypes) {
    const json j = load_scenario_text("a: 1\nb: 1.5\nc: '7'\nd: true\ne: ~\nf: [1, 2.0]\ng: 1e-08\n");
    EXPECT_TRUE(j["a"].is_number_integer());
    EXPECT_DOUBLE_EQ(j["b"].get<double>(), 1.5);
    EXPECT_TRUE(j["c"].is_string());
    EXPECT_TRUE(j["d"].get<bool>());
    EXPECT_TRUE(j["e"].is_null());
    EXPECT_TRUE(j["f"][1].is_number_float());
    EXPECT_DOUBLE_EQ(j["g"].get<double>(), 1e-8);
}

TEST(ScenarioYaml, MalformedYamlIsAConfigError) {
    EXPECT_THROW(load_scenario_text("a: [1, 2"), ConfigError);
}

TEST(ScenarioParse, DefaultsAreEchoed) {
    const Scenario sc = parse_scenario(json::object(), {}, "intensity");
    EXPECT_EQ(sc.kind, "intensity");
    EXPECT_EQ(sc.depth, 6);
    EXPECT_EQ(sc.echo["version"], 1);
    EXPECT_EQ(sc.echo["measure"]["kind"], "identity-density");
    EXPECT_FALSE(sc.echo.contains("seed"));
}

TEST(ScenarioParse, RejectsUnknownKeysAtEveryLevel) {
    EXPECT_THROW(parse_scenario(load_scenario_text("kind: intensity\nbogus: 1\n")), ConfigError);
    EXPECT_THROW(parse_scenario(load_scenario_text("kind: intensity\nmeasure: {kind: atom, colour: red}\n")),
                 ConfigError);
    EXPECT_THROW(parse_scenario(load_scenario_text("kind: embed\nseed: 1\ngrid: {levels: 4, step: 2}\n")),
                 ConfigError);
}

TEST(ScenarioParse, RejectsBadValues) {
    auto bad = [](const std::string& y) { EXPECT_THROW(parse_scenario(load_scenario_text(y)), ConfigError) << y; };
    bad("version: 2\nkind: intensity\n");
    bad("kind: nonsense\n");
    bad("kind: intensity\ndepth: 0\n");
    bad("kind: intensity\ndepth: 15\n");
    bad("kind: intensity\ntol: -1\n");
    bad("kind: intensity\nseed: -3\n");
    bad("kind: intensity\nmeasure: {kind: atom, point: [1, 0]}\n");
    bad("kind: intensity\nmeasure: {kind: random}\n");  // needs a seed
    bad("kind: b2\nweight: {kind: scalar-power, exponent: 1.0}\n");
    bad("kind: embed\n");  // needs a seed
    bad("kind: embed\nseed: 1\ndictionary: {gamma: 0}\n");
    bad("kind: sweep\ndims: [4]\n");
    bad("kind: volterra\nweight: {dim: 1}\nsymbol: {kind: linear, matrix: offdiagonal}\n");
}

TEST(ScenarioParse, CommandKindMustAgree) {
    EXPECT_THROW(parse_scenario(load_scenario_text(kOriginAtom), {}, "sweep"), ConfigError);
    EXPECT_NO_THROW(parse_scenario(load_scenario_text(kOriginAtom), {}, "equivalence"));
}

TEST(ScenarioParse, OverridesLandInTheEcho) {
    Overrides ov;
    ov.seed = 5;
    ov.depth = 3;
    ov.tol = 1e-6;
    EXPECT_EQ(parse_scenario(load_scenario_text(kOriginAtom), ov).echo["depth"], 3);
    EXPECT_EQ(parse_scenario(load_scenario_text(kOriginAtom), ov).echo["seed"], 5);
    EXPECT_EQ(parse_scenario(json::object(), ov, "b2").echo["levels"], 3);
    EXPECT_EQ(parse_scenario(json::object(), ov, "embed").echo["grid"]["levels"], 3);
    EXPECT_DOUBLE_EQ(parse_scenario(json::object(), ov, "volterra").echo["tol"].get<double>(), 1e-6);
}

TEST_F(Experiments, InvalidConfigExitsOneAndWritesNothing) {
    const auto o = run("version: 2\nkind: equivalence\n");
    EXPECT_EQ(o.exit_code, kInvalidConfig);
    EXPECT_NE(o.message.find("version"), std::string::npos);
    EXPECT_EQ(entries(), 0u);
    EXPECT_EQ(run_scenario_file((root_ / "missing.yaml").string(), "intensity", opts()).exit_code, kInvalidConfig);
}

TEST_F(Experiments, OriginAtomRatioIsFour) {
    const auto o = run(kOriginAtom);
    ASSERT_EQ(o.exit_code, kOk) << o.message;
    for (const char* f : {"report.json", "curves.csv", "plot.svg", "scenario.yaml", "manifest.json"})
        EXPECT_TRUE(fs::exists(o.directory / f)) << f;
    EXPECT_EQ(o.directory.parent_path().filename(), "equivalence");
    EXPECT_NE(o.directory.filename().string().find("-unseeded"), std::string::npos);

    const json doc = json::parse(slurp(o.directory / "report.json"));
    EXPECT_EQ(doc["schema"], kReportSchema);
    EXPECT_DOUBLE_EQ(doc["results"]["ratio"].get<double>(), 4.0);
    EXPECT_DOUBLE_EQ(doc["results"]["intensity"].get<double>(), 1.0);
    EXPECT_TRUE(doc["all_invariants_passed"].get<bool>());
}

TEST_F(Experiments, IdentitySweepIsFlatInDimension) {
    const auto o = run("kind: sweep\ndepth: 5\ndims: [1, 3, 9, 27]\n");
    ASSERT_EQ(o.exit_code, kOk) << o.message;
    const json& res = o.report->results;
    EXPECT_EQ(res["rows"].size(), 4u);
    // mu_N drops the annulus |z| >= 1 - 2^-6, of normalized area e(2 - e).
    const double e = 1.0 / 64.0;
    const double expected = 1.0 / (1.0 - e * (2.0 - e));
    for (const auto& row : res["rows"]) EXPECT_NEAR(row["ratio"].get<double>(), expected, 1e-12);
    EXPECT_LT(res["ratio_spread"].get<double>(), 1e-12);
}

TEST_F(Experiments, ReportIsIndependentOfThreadsAndReruns) {
    const auto a = run(kRandom, 1);
    const auto b = run(kRandom, 4);
    const auto c = run(kRandom, 1);
    ASSERT_EQ(a.exit_code, kOk) << a.message;
    ASSERT_EQ(b.exit_code, kOk);
    ASSERT_EQ(c.exit_code, kOk);
    EXPECT_NE(a.directory, b.directory);
    EXPECT_NE(a.directory, c.directory);
    const std::string ra = slurp(a.directory / "report.json");
    EXPECT_EQ(ra, slurp(b.directory / "report.json"));
    EXPECT_EQ(ra, slurp(c.directory / "report.json"));
    EXPECT_EQ(slurp(a.directory / "curves.csv"), slurp(b.directory / "curves.csv"));
    EXPECT_EQ(slurp(a.directory / "plot.svg"), slurp(b.directory / "plot.svg"));
}

TEST_F(Experiments, EchoReproducesTheReport) {
    const auto a = run(kRandom);
    ASSERT_EQ(a.exit_code, kOk) << a.message;
    const auto from_echo = run_scenario_file((a.directory / "scenario.yaml").string(), "equivalence", opts(3));
    ASSERT_EQ(from_echo.exit_code, kOk) << from_echo.message;
    EXPECT_EQ(slurp(a.directory / "report.json"), slurp(from_echo.directory / "report.json"));

    const auto from_report = run_scenario(scenario_from_report((a.directory / "report.json").string()), "", opts(2));
    ASSERT_EQ(from_report.exit_code, kOk) << from_report.message;
    EXPECT_EQ(slurp(a.directory / "report.json"), slurp(from_report.directory / "report.json"));
}

TEST_F(Experiments, SeedChangesTheRandomMeasure) {
    Overrides ov;
    ov.seed = 100;
    RunOptions o = opts();
    o.overrides = ov;
    const auto a = run(kRandom);
    const auto b = run_scenario(load_scenario_text(kRandom), "", o);
    ASSERT_EQ(b.exit_code, kOk);
    EXPECT_NE(a.report->results["intensity"], b.report->results["intensity"]);
    EXPECT_NE(b.directory.filename().string().find("-100"), std::string::npos);
}

TEST_F(Experiments, CsvUsesSeventeenDigits) {
    const auto o = run("kind: intensity\ndepth: 4\nmeasure: {kind: atom, point: [0.3, 0.1]}\n");
    ASSERT_EQ(o.exit_code, kOk) << o.message;
    std::istringstream csv(slurp(o.directory / "curves.csv"));
    std::string header, line;
    std::getline(csv, header);
    EXPECT_EQ(header, "level,square_ratio,tophalf_ratio");
    int rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            const double v = std::stod(cell);
            EXPECT_EQ(std::stod(format17(v)), v);
            EXPECT_EQ(cell, format17(v));
        }
    }
    EXPECT_EQ(rows, 5);
}

TEST(Format17, RoundTrips) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        EXPECT_EQ(std::stod(format17(v)), v);
    }
}

TEST(Svg, RejectsEmptyAndSinglePointCurves) {
    Plot p;
    EXPECT_THROW(render_svg(p), InvalidArgument);
    p.curves.push_back({"one", {1.0}, {2.0}});
    EXPECT_THROW(render_svg(p), InvalidArgument);
    p.curves[0] = {"empty", {}, {}};
    EXPECT_THROW(render_svg(p), InvalidArgument);
    p.curves[0] = {"mismatch", {1.0, 2.0}, {1.0}};
    EXPECT_THROW(render_svg(p), InvalidArgument);
}

TEST(Svg, EmbedsDataAndSlope) {
    Plot p;
    p.title = "t";
    p.log_x = p.log_y = true;
    p.slope = -0.5;
    p.curves.push_back({"c<1>--x", {1.0, 10.0, 100.0}, {1.0, 0.316, 0.1}});
    const std::string s = render_svg(p);
    EXPECT_EQ(s.rfind("<?xml", 0), 0u);
    EXPECT_NE(s.find("<!--"), std::string::npos);
    EXPECT_NE(s.find("0.316"), std::string::npos);
    EXPECT_NE(s.find("slope"), std::string::npos);
    EXPECT_NE(s.find(">c&lt;1&gt;--x<"), std::string::npos);  // label is escaped
    const auto open = s.find("<!--"), close = s.find("-->");
    EXPECT_EQ(s.substr(open + 4, close - open - 4).find("--"), std::string::npos);
    EXPECT_NE(s.find("</svg>"), std::string::npos);
}

TEST_F(Experiments, DegenerateAndToleranceFailuresMapToExitCodes) {
    // A tolerance too tight for the evaluation budget.
    const auto t = run("kind: b2\ntol: 1e-300\nlevels: 3\nweight: {kind: scalar-power, exponent: 0.9}\n");
    EXPECT_EQ(t.exit_code, kToleranceNotReached) << t.message;
    EXPECT_EQ(entries(), 0u);
}

TEST_F(Experiments, EveryKindRunsWithDefaults) {
    for (const auto& kind : experiment_kinds()) {
        RunOptions o = opts(2);
        o.overrides.seed = 1;
        o.overrides.depth = 4;
        const auto r = run_scenario(json::object(), kind, o);
        ASSERT_EQ(r.exit_code, kOk) << kind << ": " << r.message;
        EXPECT_TRUE(r.report->all_passed()) << kind;
        EXPECT_EQ(r.directory.parent_path().filename(), kind);
    }
}
