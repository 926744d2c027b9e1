#pragma once

// Scenario files: versioned YAML, one experiment per file. Parsing builds every
// numerical object up front, so a bad file fails before anything is written. The
// echo is the fully resolved scenario (defaults and command-line overrides filled
// in); it is valid YAML and re-runs to the same report.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "carleson/analytic.hpp"
#include "carleson/dyadic.hpp"
#include "carleson/errors.hpp"
#include "carleson/measures.hpp"
#include "carleson/weights.hpp"

namespace carleson::experiments {

using json = nlohmann::json;

inline constexpr int kScenarioVersion = 1;

struct ConfigError : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = {"intensity", "dyadic-norm", "equivalence", "sweep",
                                                   "b2",        "embed",       "volterra"};
    return kinds;
}

// YAML -> JSON ------------------------------------------------------------------

inline json scalar_to_json(const YAML::Node& n) {
    const std::string s = n.Scalar();
    if (n.Tag() == "!") return s;  // quoted
    if (s == "true" || s == "True") return true;
    if (s == "false" || s == "False") return false;
    if (s == "null" || s == "~" || s.empty()) return nullptr;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    std::int64_t i = 0;
    if (auto r = std::from_chars(b, e, i); r.ec == std::errc() && r.ptr == e) return i;
    std::uint64_t u = 0;
    if (auto r = std::from_chars(b, e, u); r.ec == std::errc() && r.ptr == e) return u;
    double d = 0.0;
    if (auto r = std::from_chars(b, e, d); r.ec == std::errc() && r.ptr == e) return d;
    return s;
}

inline json yaml_to_json(const YAML::Node& n) {
    switch (n.Type()) {
        case YAML::NodeType::Map: {
            json o = json::object();
            for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return o;
        }
        case YAML::NodeType::Sequence: {
            json a = json::array();
            for (const auto& v : n) a.push_back(yaml_to_json(v));
            return a;
        }
        case YAML::NodeType::Scalar:
            return scalar_to_json(n);
        default:
            return nullptr;
    }
}

inline json load_scenario_text(const std::string& text) {
    try {
        return yaml_to_json(YAML::Load(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("scenario is not valid YAML: ") + e.what());
    }
}

inline json load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read scenario file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario_text(ss.str());
}

// Sections ------------------------------------------------------------------------

// Reads keys from `in`, records resolved values into `out`, and rejects keys it
// never looked at.
class Section {
public:
    Section(const json& in, json& out, std::string path) : in_(in), out_(out), path_(std::move(path)) {
        if (!in_.is_null() && !in_.is_object()) fail("", "must be a mapping");
        out_ = json::object();
    }

    bool has(const std::string& key) const { return in_.is_object() && in_.contains(key); }

    double real(const std::string& key, std::optional<double> def = std::nullopt) {
        const json& v = fetch(key, def.has_value());
        const double x = v.is_null() ? *def : as_real(v, key);
        out_[key] = x;
        return x;
    }

    int integer(const std::string& key, std::optional<int> def = std::nullopt) {
        const json& v = fetch(key, def.has_value());
        int x = 0;
        if (v.is_null()) x = *def;
        else if (v.is_number_integer()) x = v.get<int>();
        else fail(key, "must be an integer");
        out_[key] = x;
        return x;
    }

    bool boolean(const std::string& key, bool def) {
        const json& v = fetch(key, true);
        bool x = def;
        if (!v.is_null()) {
            if (!v.is_boolean()) fail(key, "must be true or false");
            x = v.get<bool>();
        }
        out_[key] = x;
        return x;
    }

    std::string text(const std::string& key, std::optional<std::string> def, const std::vector<std::string>& allowed) {
        const json& v = fetch(key, def.has_value());
        std::string x;
        if (v.is_null()) x = *def;
        else if (v.is_string()) x = v.get<std::string>();
        else fail(key, "must be a string");
        if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), x) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            fail(key, "must be one of: " + list);
        }
        out_[key] = x;
        return x;
    }

    std::vector<double> reals(const std::string& key, std::optional<std::vector<double>> def = std::nullopt) {
        const json& v = fetch(key, def.has_value());
        std::vector<double> x;
        if (v.is_null()) x = *def;
        else if (v.is_array())
            for (const auto& e : v) x.push_back(as_real(e, key));
        else fail(key, "must be a list of numbers");
        out_[key] = x;
        return x;
    }

    std::vector<int> integers(const std::string& key, std::optional<std::vector<int>> def = std::nullopt) {
        const json& v = fetch(key, def.has_value());
        std::vector<int> x;
        if (v.is_null()) x = *def;
        else if (v.is_array())
            for (const auto& e : v) {
                if (!e.is_number_integer()) fail(key, "must be a list of integers");
                x.push_back(e.get<int>());
            }
        else fail(key, "must be a list of integers");
        out_[key] = x;
        return x;
    }

    Section child(const std::string& key) {
        seen_.insert(key);
        static const json empty;
        return Section(has(key) ? in_.at(key) : empty, out_[key], path_ + key + ".");
    }

    // Marks a key as consumed without echoing it.
    void skip(const std::string& key) { seen_.insert(key); }

    void close() const {
        if (!in_.is_object()) return;
        for (const auto& [k, v] : in_.items())
            if (!seen_.count(k)) fail(k, "is not a recognized key");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError("scenario key '" + path_ + key + "' " + msg);
    }

    void require(bool ok, const std::string& key, const std::string& msg) const {
        if (!ok) fail(key, msg);
    }

private:
    const json& fetch(const std::string& key, bool optional) {
        seen_.insert(key);
        static const json null;
        if (!has(key) || in_.at(key).is_null()) {
            if (!optional) fail(key, "is required");
            return null;
        }
        return in_.at(key);
    }

    double as_real(const json& v, const std::string& key) const {
        if (!v.is_number()) fail(key, "must be a number");
        return v.get<double>();
    }

    const json& in_;
    json& out_;
    std::string path_;
    std::set<std::string> seen_;
};

// Scenario -------------------------------------------------------------------------

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> depth;
    std::optional<double> tol;
};

struct Scenario {
    std::string kind;
    std::uint64_t seed = 0;
    double tol = kDefaultTol;
    int depth = 0;
    json echo;

    std::optional<MatrixMeasure> measure;
    SweepTemplate sweep_template = SweepTemplate::IdentityDensity;
    std::vector<int> dims;
    std::optional<OperatorWeight> weight;
    double eta = 0.0;
    std::optional<EmbeddingProblem> problem;
    LambdaGrid grid;
    int max_degree = 64;
    double gamma = 1.0;
    std::optional<VolterraSymbol> symbol;
    double r = 0.5;
};

namespace scenario_detail {

// Randomized families draw from one generator in parse order.
struct Randomness {
    std::optional<std::uint64_t> seed;
    std::optional<std::mt19937_64> rng;

    std::mt19937_64& get(const Section& s, const std::string& key) {
        if (!seed) s.fail(key, "is randomized, so the scenario needs a seed");
        if (!rng) rng.emplace(*seed);
        return *rng;
    }
};

inline Matrix base_matrix(Section& s, int dim, Randomness& rnd, const std::vector<std::string>& allowed) {
    const std::string m = s.text("matrix", "identity", allowed);
    if (m == "random") {
        Matrix p = random_psd(dim, rnd.get(s, "matrix")) / static_cast<double>(dim);
        return p + 0.1 * Matrix::Identity(dim, dim);  // keep it safely invertible
    }
    if (m == "offdiagonal") {
        s.require(dim >= 2, "matrix", "offdiagonal needs dim >= 2");
        Matrix o = Matrix::Zero(dim, dim);
        o(0, 1) = 1.0;
        return o;
    }
    return Matrix::Identity(dim, dim);
}

inline int dimension(Section& s, int def) {
    const int d = s.integer("dim", def);
    s.require(d >= 1 && d <= 256, "dim", "must lie in [1, 256]");
    return d;
}

inline MatrixMeasure parse_measure(Section s, Randomness& rnd) {
    const std::string kind = s.text("kind", "identity-density", {"identity-density", "atom", "radial-density", "random"});
    const int dim = dimension(s, 1);
    MatrixMeasure mu(dim);
    if (kind == "identity-density") {
        mu = MatrixMeasure::identity_density(dim);
    } else if (kind == "atom") {
        const auto pt = s.reals("point", std::vector<double>{0.0, 0.0});
        s.require(pt.size() == 2, "point", "must be [re, im]");
        const Complex z(pt[0], pt[1]);
        s.require(std::abs(z) < 1.0, "point", "must lie in the open unit disc");
        mu = MatrixMeasure::single_atom(z, base_matrix(s, dim, rnd, {"identity", "random"}));
    } else if (kind == "radial-density") {
        const double e = s.real("exponent", 0.0);
        s.require(e > -1.0, "exponent", "must exceed -1");
        mu.set_density(MatrixField::radial_power(e, base_matrix(s, dim, rnd, {"identity", "random"})));
    } else {
        RandomMeasureSpec spec;
        spec.dim = dim;
        spec.atom_count = s.integer("atoms", 4);
        s.require(spec.atom_count >= 0 && spec.atom_count <= 10000, "atoms", "must lie in [0, 10000]");
        const auto ann = s.reals("annulus", std::vector<double>{0.0, 0.95});
        s.require(ann.size() == 2 && ann[0] >= 0.0 && ann[0] <= ann[1] && ann[1] < 1.0, "annulus",
                  "must be [inner, outer] with 0 <= inner <= outer < 1");
        spec.annulus_inner = ann[0];
        spec.annulus_outer = ann[1];
        spec.with_density = s.boolean("density", true);
        spec.density_exponent = s.real("density_exponent", 0.0);
        s.require(spec.density_exponent > -1.0, "density_exponent", "must exceed -1");
        spec.density_scale = s.real("density_scale", 1.0);
        s.require(spec.density_scale > 0.0, "density_scale", "must be positive");
        s.require(spec.atom_count > 0 || spec.with_density, "atoms", "an empty measure has nothing to measure");
        mu = random_measure(spec, rnd.get(s, "kind"));
    }
    s.close();
    return mu;
}

inline OperatorWeight parse_weight(Section s, Randomness& rnd, double eta) {
    const std::string kind = s.text("kind", "identity", {"identity", "scalar-power", "diagonal-powers"});
    OperatorWeight w = OperatorWeight::identity(1);
    if (kind == "identity") {
        w = OperatorWeight::identity(dimension(s, 1));
    } else if (kind == "scalar-power") {
        const int dim = dimension(s, 1);
        const double a = s.real("exponent");
        s.require(std::abs(a) < 1.0 + eta, "exponent", "must satisfy |a| < 1 + eta for a B2 weight");
        w = OperatorWeight::scalar_power(a, base_matrix(s, dim, rnd, {"identity", "random"}));
    } else {
        const auto a = s.reals("exponents");
        s.require(!a.empty() && a.size() <= 256, "exponents", "must list between 1 and 256 exponents");
        for (double x : a) s.require(std::abs(x) < 1.0 + eta, "exponents", "must satisfy |a| < 1 + eta");
        const int dim = static_cast<int>(a.size());
        const std::string u = s.text("unitary", "random", {"identity", "random"});
        const Matrix m = u == "random" ? random_unitary(dim, rnd.get(s, "unitary")) : Matrix::Identity(dim, dim);
        w = OperatorWeight::diagonal_powers(a, m);
    }
    s.close();
    return w;
}

inline double eta_value(Section& s) {
    const double eta = s.real("eta", 0.0);
    s.require(eta > -1.0, "eta", "must exceed -1");
    return eta;
}

inline double ratio_value(Section& s) {
    const double r = s.real("r", 0.5);
    s.require(r > 0.0 && r < 1.0, "r", "must lie in (0, 1)");
    return r;
}

inline LambdaGrid parse_grid(Section s, double r) {
    const int levels = s.integer("levels", 10);
    const int angles = s.integer("angles", 16);
    s.require(levels >= 1 && levels <= 20, "levels", "must lie in [1, 20]");
    s.require(angles >= 1 && angles <= 1024, "angles", "must lie in [1, 1024]");
    s.close();
    return LambdaGrid::standard(r, levels, angles);
}

// --depth means the dyadic depth, the B2 level count J, or the lambda-grid level
// count, whichever the experiment has.
inline void apply_depth_override(json& raw, int depth) {
    const std::string kind = raw.contains("kind") && raw["kind"].is_string() ? raw["kind"].get<std::string>() : "";
    if (kind == "b2") {
        raw["levels"] = depth;
    } else if (kind == "embed" || kind == "volterra") {
        if (!raw.contains("grid") || raw["grid"].is_null()) raw["grid"] = json::object();
        if (raw["grid"].is_object()) raw["grid"]["levels"] = depth;
    } else {
        raw["depth"] = depth;
    }
}

}  // namespace scenario_detail

inline Scenario parse_scenario(json raw, const Overrides& ov = {}, const std::string& command_kind = "") {
    using namespace scenario_detail;
    if (raw.is_null()) raw = json::object();
    if (!raw.is_object()) throw ConfigError("scenario must be a mapping");
    if (!command_kind.empty() && !raw.contains("kind")) raw["kind"] = command_kind;
    if (!raw.contains("version")) raw["version"] = kScenarioVersion;
    if (ov.seed) raw["seed"] = *ov.seed;
    if (ov.tol) raw["tol"] = *ov.tol;
    if (ov.depth) apply_depth_override(raw, *ov.depth);

    Scenario sc;
    Section top(raw, sc.echo, "");
    const json& v = raw.at("version");
    if (!v.is_number_integer() || v.get<std::int64_t>() != kScenarioVersion)
        top.fail("version", "must be " + std::to_string(kScenarioVersion));
    top.integer("version");
    sc.kind = top.text("kind", std::nullopt, experiment_kinds());
    if (!command_kind.empty() && command_kind != sc.kind)
        top.fail("kind", "is '" + sc.kind + "' but the command was '" + command_kind + "'");

    Randomness rnd;
    if (top.has("seed")) {
        const json& s = raw.at("seed");
        const bool ok = s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0);
        if (!ok) top.fail("seed", "must be a nonnegative integer");
        sc.seed = s.get<std::uint64_t>();
        rnd.seed = sc.seed;
        top.skip("seed");
        sc.echo["seed"] = sc.seed;
    }
    sc.tol = top.real("tol", kDefaultTol);
    top.require(sc.tol > 0.0 && sc.tol < 1e-2, "tol", "must lie in (0, 1e-2)");

    const std::string& k = sc.kind;
    if (k == "intensity" || k == "dyadic-norm" || k == "equivalence" || k == "sweep") {
        sc.depth = top.integer("depth", 6);
        top.require(sc.depth >= 1 && sc.depth <= 14, "depth", "must lie in [1, 14]");
    }

    if (k == "intensity" || k == "dyadic-norm" || k == "equivalence") {
        sc.measure = parse_measure(top.child("measure"), rnd);
    } else if (k == "sweep") {
        const std::string t =
            top.text("template", "identity-density",
                     {"identity-density", "origin-atom", "deep-atom", "random-scalar", "mixed"});
        if (t == "origin-atom") sc.sweep_template = SweepTemplate::OriginAtom;
        else if (t == "deep-atom") sc.sweep_template = SweepTemplate::DeepAtom;
        else if (t == "random-scalar") sc.sweep_template = SweepTemplate::RandomScalar;
        else if (t == "mixed") sc.sweep_template = SweepTemplate::Mixed;
        if (t != "identity-density" && !rnd.seed) top.fail("template", "is randomized, so the scenario needs a seed");
        sc.dims = top.integers("dims", std::vector<int>{1, 2, 4, 8, 16, 32, 64});
        top.require(sc.dims.size() >= 2, "dims", "needs at least two dimensions to draw a curve");
        for (int d : sc.dims) top.require(d >= 1 && d <= 256, "dims", "entries must lie in [1, 256]");
    } else if (k == "b2") {
        sc.eta = eta_value(top);
        sc.weight = parse_weight(top.child("weight"), rnd, sc.eta);
        sc.depth = top.integer("levels", 8);
        top.require(sc.depth >= 1 && sc.depth <= 12, "levels", "must lie in [1, 12]");
    } else if (k == "embed") {
        sc.eta = eta_value(top);
        sc.r = ratio_value(top);
        const int n = top.integer("n", 0);
        top.require(n >= 0 && n <= 8, "n", "must lie in [0, 8]");
        const OperatorWeight w = parse_weight(top.child("weight"), rnd, sc.eta);
        Section g = top.child("G");
        g.text("kind", "radial-power", {"radial-power"});
        const int gdim = dimension(g, w.dim());
        g.require(gdim == w.dim(), "dim", "must equal the weight dimension");
        const double s = g.real("exponent", 0.0);
        g.require(s > -1.0, "exponent", "must exceed -1");
        const Matrix gm = base_matrix(g, gdim, rnd, {"identity", "random"});
        g.close();
        sc.problem = EmbeddingProblem{MatrixField::radial_power(s, gm), w, sc.eta, n, sc.r};
        sc.grid = parse_grid(top.child("grid"), sc.r);
        Section d = top.child("dictionary");
        sc.max_degree = d.integer("max_degree", 64);
        d.require(sc.max_degree >= 0 && sc.max_degree <= kMaxPolyDegree, "max_degree", "must lie in [0, 256]");
        sc.gamma = d.real("gamma", sc.eta + 1.0);
        d.require(sc.gamma > sc.eta, "gamma", "must exceed eta");
        d.close();
        if (!rnd.seed) top.fail("seed", "is required: the dictionary uses seeded random directions");
    } else if (k == "volterra") {
        sc.eta = eta_value(top);
        sc.r = ratio_value(top);
        sc.weight = parse_weight(top.child("weight"), rnd, sc.eta);
        Section s = top.child("symbol");
        const std::string kind = s.text("kind", "linear", {"linear", "logarithm"});
        const int dim = dimension(s, sc.weight->dim());
        s.require(dim == sc.weight->dim(), "dim", "must equal the weight dimension");
        const Matrix m = base_matrix(s, dim, rnd, {"identity", "offdiagonal", "random"});
        s.close();
        sc.symbol = kind == "linear" ? VolterraSymbol::linear(m) : VolterraSymbol::logarithm(m);
        sc.grid = parse_grid(top.child("grid"), sc.r);
    }
    top.close();
    return sc;
}

}  // namespace carleson::experiments
