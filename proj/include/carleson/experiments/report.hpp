#pragma once

// Experiment execution and report rendering. A Report is pure data computed from
// a Scenario; rendering it (JSON, CSV, SVG) is deterministic, so identical
// scenarios give byte-identical files whatever the thread count.

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "carleson/experiments/scenario.hpp"

namespace carleson::experiments {

inline constexpr const char* kReportSchema = "carleson-report/1";

struct Curve {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Curve> curves;
    std::optional<double> slope;  // log-log fit of the first curve, shown as an annotation
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

struct Invariant {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double bound = 0.0;
};

struct Report {
    std::string kind;
    json scenario;
    json results = json::object();
    Table table;
    Plot plot;
    std::vector<Invariant> invariants;

    bool all_passed() const {
        return std::all_of(invariants.begin(), invariants.end(), [](const Invariant& i) { return i.passed; });
    }
};

// Formatting ---------------------------------------------------------------------

inline std::string format17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json to_json(Complex z) { return json::array({z.real(), z.imag()}); }
inline json to_json(DyadicIndex i) { return json{{"level", i.level}, {"position", i.position}}; }

// JSON cannot carry NaN; null marks an unavailable number.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json render_json(const Report& r) {
    json curves = json::array();
    for (const auto& c : r.plot.curves) {
        json xs = json::array(), ys = json::array();
        for (double v : c.x) xs.push_back(number(v));
        for (double v : c.y) ys.push_back(number(v));
        curves.push_back({{"name", c.name}, {"x", xs}, {"y", ys}});
    }
    json inv = json::array();
    for (const auto& i : r.invariants)
        inv.push_back({{"name", i.name}, {"passed", i.passed}, {"value", number(i.value)}, {"bound", number(i.bound)}});
    return {{"schema", kReportSchema},
            {"kind", r.kind},
            {"scenario", r.scenario},
            {"results", r.results},
            {"curves", {{"x_label", r.plot.x_label}, {"y_label", r.plot.y_label}, {"series", curves}}},
            {"invariants", inv},
            {"all_invariants_passed", r.all_passed()}};
}

inline std::string render_report(const Report& r) { return render_json(r).dump(2) + "\n"; }

inline std::string render_csv(const Table& t) {
    std::ostringstream out;
    for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format17(row[i]);
        out << "\n";
    }
    return out.str();
}

inline std::string xml_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

// Standalone SVG line chart. The data table is repeated inside a comment so the
// numbers can be recovered from the file.
inline std::string render_svg(const Plot& p) {
    if (p.curves.empty()) throw InvalidArgument("plot has no curves");
    for (const auto& c : p.curves) {
        if (c.x.size() != c.y.size()) throw InvalidArgument("curve '" + c.name + "' has mismatched columns");
        if (c.x.size() < 2) throw InvalidArgument("curve '" + c.name + "' needs at least two points");
    }
    auto tx = [&](double v) { return p.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return p.log_y ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!p.log_x || x > 0) && (!p.log_y || y > 0);
    };
    constexpr double inf = std::numeric_limits<double>::infinity();
    double x0 = inf, x1 = -inf, y0 = inf, y1 = -inf;
    for (const auto& c : p.curves)
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            if (!usable(c.x[i], c.y[i])) continue;
            x0 = std::min(x0, tx(c.x[i]));
            x1 = std::max(x1, tx(c.x[i]));
            y0 = std::min(y0, ty(c.y[i]));
            y1 = std::max(y1, ty(c.y[i]));
        }
    if (!(x0 <= x1 && y0 <= y1)) throw InvalidArgument("plot has no drawable points");
    if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
    // Flat lines get a visible band around them.
    if (y1 - y0 < 1e-9 * std::max(1.0, std::abs(y0))) {
        const double pad = p.log_y ? 0.1 : 0.05 * std::max(1.0, std::abs(y0));
        y0 -= pad;
        y1 += pad;
    }

    const double W = 640, H = 420, L = 80, R = 20, T = 40, B = 60;
    auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << " " << H << "\">\n";
    s << "<!-- data\n";
    for (const auto& c : p.curves) {
        std::string name = c.name;  // "--" would end the comment early
        for (auto at = name.find("--"); at != std::string::npos; at = name.find("--")) name.replace(at, 2, "- ");
        s << "series," << name << "\n";
        for (std::size_t i = 0; i < c.x.size(); ++i) s << format17(c.x[i]) << "," << format17(c.y[i]) << "\n";
    }
    s << "-->\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
      << xml_escape(p.title) << "</text>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
        const double vx = p.log_x ? std::pow(10.0, fx) : fx, vy = p.log_y ? std::pow(10.0, fy) : fy;
        char bx[32], by[32];
        std::snprintf(bx, sizeof bx, "%.3g", vx);
        std::snprintf(by, sizeof by, "%.4g", vy);
        s << "<text x=\"" << px(vx) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          << "font-size=\"11\">" << bx << "</text>\n";
        s << "<text x=\"" << L - 6 << "\" y=\"" << py(vy) + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          << "font-size=\"11\">" << by << "</text>\n";
    }
    s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(p.x_label) << (p.log_x ? " (log)" : "")
      << "</text>\n";
    s << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\" transform=\"rotate(-90 18 " << (T + H - B) / 2 << ")\">" << xml_escape(p.y_label)
      << (p.log_y ? " (log)" : "") << "</text>\n";
    for (std::size_t c = 0; c < p.curves.size(); ++c) {
        const auto& cv = p.curves[c];
        s << "<polyline fill=\"none\" stroke=\"" << colors[c % 5] << "\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < cv.x.size(); ++i) {
            if (!usable(cv.x[i], cv.y[i])) continue;
            s << (first ? "" : " ") << px(cv.x[i]) << "," << py(cv.y[i]);
            first = false;
        }
        s << "\"/>\n";
        s << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 16 + 16 * c << "\" text-anchor=\"end\" "
          << "font-family=\"sans-serif\" font-size=\"12\" fill=\"" << colors[c % 5] << "\">" << xml_escape(cv.name)
          << "</text>\n";
    }
    if (p.slope && p.log_x && p.log_y) {
        char b[64];
        std::snprintf(b, sizeof b, "log-log slope %.3f", *p.slope);
        s << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 << "\" font-family=\"sans-serif\" font-size=\"12\">" << b
          << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

// Experiments ----------------------------------------------------------------------

inline Invariant check(std::string name, double value, double bound, bool passed) {
    return {std::move(name), passed, value, bound};
}

inline std::vector<double> iota_levels(std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
    return v;
}

inline void level_outputs(Report& r, const std::vector<double>& squares, const std::vector<double>& tops) {
    r.table.header = {"level", "square_ratio", "tophalf_ratio"};
    for (std::size_t i = 0; i < squares.size(); ++i) r.table.rows.push_back({double(i), squares[i], tops[i]});
    r.plot.x_label = "level n";
    r.plot.y_label = "max ||mu(.)|| / A(.)";
    r.plot.log_y = true;
    r.plot.curves = {{"Carleson squares", iota_levels(squares.size()), squares},
                     {"top halves", iota_levels(tops.size()), tops}};
}

inline void run_intensity(const Scenario& sc, Execution exec, Report& r) {
    const auto rep = carleson_intensity(*sc.measure, sc.depth, sc.tol, exec);
    r.results = {{"depth", rep.depth},
                 {"intensity", rep.intensity},
                 {"tophalf_intensity", rep.tophalf_intensity},
                 {"argmax_square", to_json(rep.argmax_square)},
                 {"argmax_tophalf", to_json(rep.argmax_tophalf)},
                 {"residual_mass_norm", rep.residual_mass_norm}};
    r.invariants.push_back(check("intensity <= 4 alpha", rep.intensity, 4 * rep.tophalf_intensity,
                                 rep.intensity <= 4 * rep.tophalf_intensity * (1 + 1e-12)));
    r.plot.title = "Carleson intensity by level";
    level_outputs(r, rep.level_square_ratio, rep.level_tophalf_ratio);
}

inline void run_dyadic_norm(const Scenario& sc, Execution exec, Report& r) {
    const auto cm = cell_masses(*sc.measure, sc.depth, sc.tol, exec);
    const auto n = dyadic_norm(cm, PowerIterationOptions{1e-10, 10000, sc.seed});
    const auto lv = intensity_from(cm, false);
    const double rel = std::abs(n.power_iteration - n.closed_form) / std::max(n.closed_form, 1e-300);
    r.results = {{"depth", sc.depth},
                 {"norm_closed_form", n.closed_form},
                 {"norm_power_iteration", n.power_iteration},
                 {"power_iterations", n.iterations},
                 {"argmax", to_json(n.argmax)},
                 {"relative_difference", rel}};
    r.invariants.push_back(check("power iteration matches closed form (rel 1e-6)", rel, 1e-6, rel <= 1e-6));
    r.plot.title = "Block ratios of the dyadic operator";
    level_outputs(r, lv.level_square_ratio, lv.level_tophalf_ratio);
}

inline void run_equivalence(const Scenario& sc, Execution exec, Report& r) {
    const auto e = equivalence_report(*sc.measure, sc.depth, sc.tol, PowerIterationOptions{1e-10, 10000, sc.seed},
                                      exec);
    const double rel = std::abs(e.norm_b_squared_power - e.norm_b_squared) / std::max(e.norm_b_squared, 1e-300);
    r.results = {{"depth", e.depth},
                 {"norm_b_squared", e.norm_b_squared},
                 {"norm_b_squared_power", e.norm_b_squared_power},
                 {"alpha", e.alpha},
                 {"intensity", e.intensity},
                 {"intensity_full", e.intensity_full},
                 {"ratio", e.ratio_upper},
                 {"covering_slack", e.covering_slack},
                 {"residual_mass_norm", e.residual_mass_norm},
                 {"argmax_tophalf", to_json(e.argmax_tophalf)},
                 {"argmax_square", to_json(e.argmax_square)}};
    r.invariants.push_back(check("ratio >= 1", e.ratio_upper, 1.0, e.ratio_upper >= 1.0 - 1e-9));
    r.invariants.push_back(check("ratio <= 4", e.ratio_upper, 4.0, e.ratio_upper <= 4.0 + 1e-9));
    r.invariants.push_back(check("covering slack >= 0", e.covering_slack, 0.0, e.covering_slack >= -1e-9));
    r.invariants.push_back(check("power iteration matches closed form (rel 1e-6)", rel, 1e-6, rel <= 1e-6));
    r.plot.title = "Dyadic operator against Carleson intensity";
    level_outputs(r, e.level_square_ratio, e.level_tophalf_ratio);
}

inline void run_sweep(const Scenario& sc, Execution exec, Report& r) {
    const auto rows = dimension_sweep(sc.sweep_template, sc.dims, sc.depth, sc.seed, sc.tol, exec);
    Curve c{"ratio", {}, {}};
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    json out = json::array();
    r.table.header = {"dim", "norm_b_squared", "intensity", "ratio"};
    for (const auto& row : rows) {
        out.push_back({{"dim", row.dim}, {"norm_b_squared", row.norm_b_squared}, {"intensity", row.intensity},
                       {"ratio", row.ratio}});
        r.table.rows.push_back({double(row.dim), row.norm_b_squared, row.intensity, row.ratio});
        c.x.push_back(row.dim);
        c.y.push_back(row.ratio);
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
    }
    r.results = {{"depth", sc.depth}, {"rows", out}, {"ratio_min", lo}, {"ratio_max", hi}, {"ratio_spread", hi - lo}};
    r.invariants.push_back(check("all ratios >= 1", lo, 1.0, lo >= 1.0 - 1e-9));
    r.invariants.push_back(check("all ratios <= 4", hi, 4.0, hi <= 4.0 + 1e-9));
    if (sc.sweep_template != SweepTemplate::Mixed)
        r.invariants.push_back(check("ratio spread across d < 1e-8", hi - lo, 1e-8, hi - lo < 1e-8));
    r.plot.title = "Equivalence ratio against dimension";
    r.plot.x_label = "dimension d";
    r.plot.y_label = "||B_N||^2 / intensity";
    r.plot.log_x = true;
    r.plot.curves = {c};
}

inline void run_b2(const Scenario& sc, Execution exec, Report& r) {
    const auto rep = b2_constant(*sc.weight, sc.eta, SquareGrid::standard(sc.depth), sc.tol, exec);
    r.results = {{"levels", sc.depth},
                 {"eta", sc.eta},
                 {"b2_constant", rep.value},
                 {"argmax_h", rep.argmax_h},
                 {"argmax_theta", rep.argmax_theta},
                 {"in_b2_class", sc.weight->in_b2_class(sc.eta)},
                 {"grid_squares", SquareGrid::standard(sc.depth).size()}};
    r.invariants.push_back(check("B2 constant >= 1", rep.value, 1.0, rep.value >= 1.0 - 1e-9));
    r.table.header = {"h", "row_value"};
    // Only the dyadic rows h = 2^-j form the curve; 0.9 and 0.75 stay in the table.
    Curve c{"max over theta", {}, {}};
    for (std::size_t i = 0; i < rep.h.size(); ++i) {
        r.table.rows.push_back({rep.h[i], rep.row_value[i]});
        if (i >= 2) {
            c.x.push_back(rep.h[i]);
            c.y.push_back(rep.row_value[i]);
        }
    }
    r.plot.title = "B2 square values";
    r.plot.x_label = "square size h";
    r.plot.y_label = "||<W>^1/2 <W^-1>^1/2||";
    r.plot.log_x = true;
    r.plot.curves = {c};
}

inline void run_embed(const Scenario& sc, Execution exec, Report& r) {
    const auto& p = *sc.problem;
    const auto cond = condition_constant(p, sc.grid, sc.tol, exec);
    Dictionary dict = Dictionary::standard(p, sc.seed, sc.max_degree);
    dict.gamma = sc.gamma;
    dict.kernel_grid = sc.grid;
    const auto d = dictionary_sup(p, dict, sc.tol, exec);
    const double k = d.sup / cond.sup;
    r.results = {{"condition_sup", cond.sup},
                 {"condition_argmax", to_json(cond.argmax)},
                 {"condition_slope", number(cond.curve.slope)},
                 {"dictionary_sup", d.sup},
                 {"monomial_sup", d.monomial_sup},
                 {"kernel_sup", d.kernel_sup},
                 {"kernel_argmax", to_json(d.kernels.argmax)},
                 {"kernel_slope", number(d.kernels.curve.slope)},
                 {"sufficiency_constant", k},
                 {"monomial_ratios", d.monomial_ratio},
                 {"lambda_points", sc.grid.size()},
                 {"slope_fit_from_level", kTailFitFromLevel}};
    r.invariants.push_back(check("dictionary sup <= 1e3 condition sup", k, 1e3, k <= 1e3));
    if (cond.curve.slope < -0.1) {
        const double gap = std::abs(cond.curve.slope - d.kernels.curve.slope);
        r.invariants.push_back(check("growth exponents agree within 0.2", gap, 0.2, gap <= 0.2));
    }
    r.table.header = {"level", "one_minus_abs_lambda", "condition", "kernel_ratio"};
    for (std::size_t i = 0; i < cond.curve.levels.size(); ++i)
        r.table.rows.push_back({double(cond.curve.levels[i]), cond.curve.x[i], cond.curve.y[i], d.kernels.curve.y[i]});
    r.plot.title = "Embedding condition on the radial grid";
    r.plot.x_label = "1 - |lambda|";
    r.plot.y_label = "c(lambda)";
    r.plot.log_x = r.plot.log_y = true;
    r.plot.curves = {{"condition c(lambda)", cond.curve.x, cond.curve.y},
                     {"kernel ratio", d.kernels.curve.x, d.kernels.curve.y}};
    if (std::isfinite(cond.curve.slope)) r.plot.slope = cond.curve.slope;
}

inline void run_volterra(const Scenario& sc, Execution exec, Report& r) {
    const auto s = volterra_condition(*sc.symbol, *sc.weight, sc.eta, sc.r, sc.grid, sc.tol, exec);
    const auto i = volterra_integral_condition(*sc.symbol, *sc.weight, sc.r, sc.grid, sc.tol, exec);
    const auto c = volterra_consistency(sc.grid, s, i, sc.r);
    r.results = {{"pointwise_sup", s.report.sup},
                 {"pointwise_argmax", to_json(s.report.argmax)},
                 {"integral_sup", i.report.sup},
                 {"integral_argmax", to_json(i.report.argmax)},
                 {"c_r", c.c_r},
                 {"max_consistency_ratio", c.max_ratio},
                 {"lambda_points", sc.grid.size()}};
    r.invariants.push_back(check("(1-|l|)^2 s^2 <= C_r i at every grid point", c.max_ratio, c.c_r, c.holds));
    r.table.header = {"level", "one_minus_abs_lambda", "pointwise", "integral"};
    for (std::size_t k = 0; k < s.report.curve.levels.size(); ++k)
        r.table.rows.push_back(
            {double(s.report.curve.levels[k]), s.report.curve.x[k], s.report.curve.y[k], i.report.curve.y[k]});
    r.plot.title = "Volterra criterion on the radial grid";
    r.plot.x_label = "1 - |lambda|";
    r.plot.y_label = "sup over angles";
    r.plot.log_x = r.plot.log_y = true;
    r.plot.curves = {{"(1-|l|) ||[W]^1/2 G' [W]^-1/2||", s.report.curve.x, s.report.curve.y},
                     {"integral condition", i.report.curve.x, i.report.curve.y}};
}

inline Report run_experiment(const Scenario& sc, Execution exec = {}) {
    Report r;
    r.kind = sc.kind;
    r.scenario = sc.echo;
    if (sc.kind == "intensity") run_intensity(sc, exec, r);
    else if (sc.kind == "dyadic-norm") run_dyadic_norm(sc, exec, r);
    else if (sc.kind == "equivalence") run_equivalence(sc, exec, r);
    else if (sc.kind == "sweep") run_sweep(sc, exec, r);
    else if (sc.kind == "b2") run_b2(sc, exec, r);
    else if (sc.kind == "embed") run_embed(sc, exec, r);
    else if (sc.kind == "volterra") run_volterra(sc, exec, r);
    else throw ConfigError("unknown experiment kind " + sc.kind);
    return r;
}

}  // namespace carleson::experiments
