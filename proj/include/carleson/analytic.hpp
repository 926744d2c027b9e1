#pragma once

// Analytic test functions, the embedding condition on hyperbolic discs, and the
// Volterra criterion.
//
// Quadratic forms of kernels are computed as matrix integrals: K e = k(z) e with a
// scalar k, so int <G K e, K e> = e* (int G |k|^2) e and the best direction is a
// generalized eigenvector.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "carleson/errors.hpp"
#include "carleson/geometry.hpp"
#include "carleson/linalg.hpp"
#include "carleson/parallel.hpp"
#include "carleson/quadrature.hpp"
#include "carleson/weights.hpp"

namespace carleson {

inline constexpr int kMaxPolyDegree = 256;

// Test functions -----------------------------------------------------------------

struct VectorPoly {
    int dim = 1;
    std::vector<Vector> coeffs;  // coeffs[k] multiplies z^k

    VectorPoly() = default;
    VectorPoly(int d, std::vector<Vector> c) : dim(d), coeffs(std::move(c)) {
        if (dim < 1) throw InvalidArgument("polynomial dimension must be positive");
        if (static_cast<int>(coeffs.size()) > kMaxPolyDegree + 1) throw InvalidArgument("polynomial degree above 256");
        for (const auto& v : coeffs)
            if (v.size() != dim) throw InvalidArgument("coefficient dimension mismatch");
    }

    static VectorPoly monomial(int m, const Vector& e) {
        if (m < 0) throw InvalidArgument("monomial degree must be nonnegative");
        std::vector<Vector> c(static_cast<std::size_t>(m) + 1, Vector::Zero(e.size()));
        c.back() = e;
        return VectorPoly(static_cast<int>(e.size()), std::move(c));
    }

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    Vector operator()(Complex z) const {
        Vector v = Vector::Zero(dim);
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = (z * v + *it).eval();
        return v;
    }

    VectorPoly derivative(int n = 1) const {
        if (n < 0) throw InvalidArgument("derivative order must be nonnegative");
        std::vector<Vector> c;
        for (std::size_t k = static_cast<std::size_t>(n); k < coeffs.size(); ++k) {
            double f = 1.0;
            for (int j = 0; j < n; ++j) f *= static_cast<double>(k - static_cast<std::size_t>(j));
            c.push_back(f * coeffs[k]);
        }
        if (c.empty()) c.push_back(Vector::Zero(dim));
        return VectorPoly(dim, std::move(c));
    }
};

// order-th derivative of z -> e / (1 - conj(lambda) z)^{gamma + 2}
struct KernelFunction {
    Complex lambda;
    double gamma = 1.0;
    Vector e;
    int order = 0;

    KernelFunction(Complex l, double g, Vector dir, int n = 0) : lambda(l), gamma(g), e(std::move(dir)), order(n) {
        detail::require_in_disc(lambda);
        if (!(gamma > -2.0)) throw InvalidArgument("kernel exponent gamma must exceed -2");
        if (order < 0) throw InvalidArgument("derivative order must be nonnegative");
    }

    int dim() const { return static_cast<int>(e.size()); }

    // (gamma+2)(gamma+3)...(gamma+order+1) conj(lambda)^order
    Complex coefficient() const {
        Complex c = 1.0;
        for (int j = 0; j < order; ++j) c *= (gamma + 2.0 + j) * std::conj(lambda);
        return c;
    }

    Complex scalar(Complex z) const {
        return coefficient() * std::pow(1.0 - std::conj(lambda) * z, -(gamma + 2.0 + order));
    }

    Vector operator()(Complex z) const { return scalar(z) * e; }

    KernelFunction derivative(int n = 1) const {
        if (n < 0) throw InvalidArgument("derivative order must be nonnegative");
        return KernelFunction(lambda, gamma, e, order + n);
    }
};

using TestFunction = std::variant<VectorPoly, KernelFunction>;

inline Vector evaluate(const TestFunction& f, Complex z) {
    return std::visit([z](const auto& g) -> Vector { return g(z); }, f);
}

inline TestFunction derivative(const TestFunction& f, int n) {
    return std::visit([n](const auto& g) -> TestFunction { return g.derivative(n); }, f);
}

inline int dimension(const TestFunction& f) {
    if (const auto* p = std::get_if<VectorPoly>(&f)) return p->dim;
    return std::get<KernelFunction>(f).dim();
}

inline TestFunction conjugated(const TestFunction& f, const Matrix& u) {
    if (const auto* p = std::get_if<VectorPoly>(&f)) {
        VectorPoly q = *p;
        for (auto& c : q.coeffs) c = u * c;
        return q;
    }
    KernelFunction k = std::get<KernelFunction>(f);
    k.e = u * k.e;
    return k;
}

struct OperatorPoly {
    int dim = 1;
    std::vector<Matrix> coeffs;

    OperatorPoly() = default;
    OperatorPoly(int d, std::vector<Matrix> c) : dim(d), coeffs(std::move(c)) {
        if (dim < 1) throw InvalidArgument("polynomial dimension must be positive");
        if (coeffs.empty()) coeffs.push_back(Matrix::Zero(dim, dim));
        for (const auto& m : coeffs)
            if (m.rows() != dim || m.cols() != dim) throw InvalidArgument("coefficient dimension mismatch");
    }

    Matrix operator()(Complex z) const {
        Matrix m = Matrix::Zero(dim, dim);
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) m = (z * m + *it).eval();
        return m;
    }

    OperatorPoly derivative(int n = 1) const {
        std::vector<Matrix> c;
        for (std::size_t k = static_cast<std::size_t>(n); k < coeffs.size(); ++k) {
            double f = 1.0;
            for (int j = 0; j < n; ++j) f *= static_cast<double>(k - static_cast<std::size_t>(j));
            c.push_back(f * coeffs[k]);
        }
        return OperatorPoly(dim, std::move(c));
    }

    OperatorPoly conjugated(const Matrix& u) const {
        OperatorPoly p = *this;
        for (auto& m : p.coeffs) m = u * m * u.adjoint();
        return p;
    }
};

// Norms ------------------------------------------------------------------------

inline double field_singular_exponent(const MatrixField& g) {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& t : g.terms) s = std::min(s, t.scalar.singular_exponent);
    if (g.general) s = std::min(s, g.general_singular_exponent);
    return std::isfinite(s) ? std::min(s, 0.0) : 0.0;
}

// int <G f, f> over a region
inline double quadratic_integral(const MatrixField& g, const TestFunction& f, const Region& region,
                                 const MeasureSpec& spec, double tol = kDefaultTol) {
    if (dimension(f) != g.dim) throw InvalidArgument("test function and field dimensions differ");
    ScalarField s{[&](const DiscPoint& p) {
                      const Vector v = evaluate(f, p.z);
                      return quadratic_form(g(p), v);
                  },
                  field_singular_exponent(g)};
    return integrate_scalar(s, region, spec, tol);
}

inline MeasureSpec eta_measure(double eta) { return eta == 0.0 ? MeasureSpec::plain() : MeasureSpec::bergman(eta); }

// int <W f, f> dA_eta
inline double weighted_norm2(const TestFunction& f, const OperatorWeight& w, double eta, double tol = kDefaultTol) {
    return quadratic_integral(w.field(), f, WholeDisc{}, eta_measure(eta), tol);
}

// int <G f^(n), f^(n)> dA
inline double seminorm2(const TestFunction& f, const MatrixField& g, int n, double tol = kDefaultTol) {
    return quadratic_integral(g, derivative(f, n), WholeDisc{}, MeasureSpec::plain(), tol);
}

// Problems and grids -----------------------------------------------------------

struct EmbeddingProblem {
    MatrixField G;
    OperatorWeight W;
    double eta = 0.0;
    int n = 0;
    double r = 0.5;

    int dim() const { return W.dim(); }
    double delta() const { return r / (r + 2.0); }

    void validate() const {
        if (G.dim != W.dim()) throw InvalidArgument("G and W dimensions differ");
        if (!(eta > -1.0)) throw InvalidArgument("eta must exceed -1");
        if (n < 0) throw InvalidArgument("derivative order must be nonnegative");
        detail::require_ratio(r);
    }
};

// Radial geometric grid 1 - |lambda| = 2^-j (level j) crossed with equally spaced
// angles, plus a coarse sample of |lambda| < delta marked with level -1.
struct LambdaGrid {
    std::vector<Complex> points;
    std::vector<int> levels;

    static LambdaGrid radial(int max_level, int angles, double angle_offset = 0.0) {
        if (max_level < 0 || angles < 1) throw InvalidArgument("lambda grid needs levels and angles");
        LambdaGrid g;
        for (int j = 0; j <= max_level; ++j) {
            const double rho = 1.0 - std::ldexp(1.0, -j);
            const int count = j == 0 ? 1 : angles;
            for (int a = 0; a < count; ++a) {
                g.points.push_back(std::polar(rho, angle_offset + kTwoPi * a / angles));
                g.levels.push_back(j);
            }
        }
        return g;
    }

    static LambdaGrid standard(double r, int max_level = 10, int angles = 16) {
        LambdaGrid g = radial(max_level, angles);
        const double delta = r / (r + 2.0);
        for (double frac : {1.0 / 3.0, 2.0 / 3.0})
            for (int a = 0; a < 4; ++a) {
                g.points.push_back(std::polar(frac * delta, kTwoPi * (a + 0.5) / 4));
                g.levels.push_back(-1);
            }
        return g;
    }

    std::size_t size() const { return points.size(); }
};

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw InvalidArgument("slope fit needs positive data");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(x.size());
    const double den = n * sxx - sx * sx;
    if (!(den > 0.0)) throw InvalidArgument("slope fit needs distinct abscissae");
    return (n * sxy - sx * sy) / den;
}

// Levels from which the radial curves are treated as asymptotic.
inline constexpr int kTailFitFromLevel = 4;

// Per-level maximum over angles, x = 1 - |lambda| = 2^-j.
struct RadialCurve {
    std::vector<int> levels;
    std::vector<double> x;
    std::vector<double> y;
    double slope = std::numeric_limits<double>::quiet_NaN();

    static RadialCurve from(const LambdaGrid& grid, const std::vector<double>& values) {
        std::map<int, double> best;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const int j = grid.levels[i];
            if (j < 0) continue;
            auto [it, fresh] = best.emplace(j, values[i]);
            if (!fresh) it->second = std::max(it->second, values[i]);
        }
        RadialCurve c;
        std::vector<double> fx, fy;
        for (const auto& [j, v] : best) {
            c.levels.push_back(j);
            c.x.push_back(std::ldexp(1.0, -j));
            c.y.push_back(v);
            if (j >= kTailFitFromLevel && v > 0.0) {
                fx.push_back(c.x.back());
                fy.push_back(v);
            }
        }
        if (fx.size() >= 2) c.slope = loglog_slope(fx, fy);
        return c;
    }
};

struct GridReport {
    double sup = 0.0;
    Complex argmax = 0.0;
    std::vector<double> values;
    RadialCurve curve;
};

inline GridReport grid_report(const LambdaGrid& grid, std::vector<double> values) {
    GridReport r;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (i == 0 || values[i] > r.sup) {
            r.sup = values[i];
            r.argmax = grid.points[i];
        }
    r.curve = RadialCurve::from(grid, values);
    r.values = std::move(values);
    return r;
}

// Embedding condition ----------------------------------------------------------

// c(lambda) = || M_W^-1/2 M_G M_W^-1/2 || / (1 - |lambda|)^{2n}
inline double condition_value(const EmbeddingProblem& p, Complex lambda, double tol = kDefaultTol) {
    detail::require_in_disc(lambda);
    const HyperbolicDisc disc{lambda, p.r};
    const Matrix mg = integrate_local(p.G, disc, MeasureSpec::plain(), tol);
    const Matrix mw = integrate_local(p.W.field(), disc, eta_measure(p.eta), tol);
    require_nondegenerate(mw, "weight integral over the disc");
    const Matrix h = psd_inv_sqrt(mw);
    return op_norm(h * mg * h) / std::pow(1.0 - std::abs(lambda), 2.0 * p.n);
}

inline GridReport condition_constant(const EmbeddingProblem& p, const LambdaGrid& grid, double tol = kDefaultTol,
                                     Execution exec = {}) {
    p.validate();
    if (grid.size() == 0) throw InvalidArgument("lambda grid is empty");
    std::vector<double> values(grid.size());
    parallel_for(grid.size(), exec, [&](std::size_t i) { values[i] = condition_value(p, grid.points[i], tol); });
    return grid_report(grid, std::move(values));
}

inline double embedding_ratio(const TestFunction& f, const EmbeddingProblem& p, double tol = kDefaultTol) {
    p.validate();
    const double den = weighted_norm2(f, p.W, p.eta, tol);
    if (!(den > 0.0)) throw InvalidArgument("test function has zero weighted norm");
    return seminorm2(f, p.G, p.n, tol) / den;
}

// The two quadratic forms of a scalar profile k: A = int G |k^(n)|^2 dA and
// B = int W |k|^2 dA_eta.
struct FormPair {
    Matrix a;
    Matrix b;
};

inline FormPair profile_forms(const EmbeddingProblem& p, std::function<Complex(Complex)> k,
                              std::function<Complex(Complex)> kn, double tol) {
    const ScalarField sa{[kn](const DiscPoint& q) { return std::norm(kn(q.z)); }, 0.0};
    const ScalarField sb{[k](const DiscPoint& q) { return std::norm(k(q.z)); }, 0.0};
    return {integrate(p.G.scaled_by(sa), WholeDisc{}, MeasureSpec::plain(), tol),
            integrate(p.W.field().scaled_by(sb), WholeDisc{}, eta_measure(p.eta), tol)};
}

inline FormPair kernel_forms(const EmbeddingProblem& p, double gamma, Complex lambda, double tol) {
    const KernelFunction k(lambda, gamma, Vector::Ones(1));
    const KernelFunction kn = k.derivative(p.n);
    return profile_forms(p, [k](Complex z) { return k.scalar(z); }, [kn](Complex z) { return kn.scalar(z); }, tol);
}

inline Complex ipow(Complex z, int m) {
    Complex v = 1.0;
    for (int j = 0; j < m; ++j) v *= z;
    return v;
}

inline FormPair monomial_forms(const EmbeddingProblem& p, int m, double tol) {
    double c = m >= p.n ? 1.0 : 0.0;
    for (int j = 0; j < p.n && m >= p.n; ++j) c *= m - j;
    const int mn = std::max(0, m - p.n);
    return profile_forms(p, [m](Complex z) { return ipow(z, m); },
                         [c, mn](Complex z) { return c * ipow(z, mn); }, tol);
}

// Largest Rayleigh quotient seminorm2 / weighted_norm2 over K^gamma_lambda e, e in
// C^d. This is the raw ratio: it already scales like c(lambda).
inline double necessity_lower_bound(const EmbeddingProblem& p, double gamma, Complex lambda,
                                    double tol = kDefaultTol) {
    p.validate();
    if (!(gamma > p.eta)) throw InvalidArgument("kernel exponent gamma must exceed eta");
    detail::require_in_disc(lambda);
    if (std::abs(lambda) < p.delta()) throw InvalidArgument("|lambda| must be at least r / (r + 2)");
    const auto f = kernel_forms(p, gamma, lambda, tol);
    require_nondegenerate(f.b, "kernel weight form");
    return generalized_max_eigenvalue(f.a, f.b);
}

// Dictionary -------------------------------------------------------------------

struct Dictionary {
    int max_degree = 64;
    double gamma = 1.0;
    LambdaGrid kernel_grid;
    std::vector<Vector> directions;

    // Coordinate vectors plus eight seeded random unit vectors; gamma = eta + 1.
    static Dictionary standard(const EmbeddingProblem& p, std::uint64_t seed, int max_degree = 64) {
        Dictionary d;
        d.max_degree = max_degree;
        d.gamma = p.eta + 1.0;
        d.kernel_grid = LambdaGrid::standard(p.r);
        const int dim = p.dim();
        for (int i = 0; i < dim; ++i) d.directions.push_back(Matrix::Identity(dim, dim).col(i));
        std::mt19937_64 rng(seed);
        for (int i = 0; i < 8; ++i) d.directions.push_back(random_unit_vector(dim, rng));
        return d;
    }
};

struct DictionaryReport {
    double sup = 0.0;
    double monomial_sup = 0.0;
    double kernel_sup = 0.0;
    std::vector<double> monomial_ratio;  // per degree, max over directions
    GridReport kernels;                  // per lambda, max over directions
};

inline double best_direction(const FormPair& f, const std::vector<Vector>& dirs) {
    double best = 0.0;
    for (const auto& e : dirs) {
        const double den = quadratic_form(f.b, e);
        if (!(den > 0.0)) throw DegenerateWeight("dictionary element has zero weighted norm");
        best = std::max(best, quadratic_form(f.a, e) / den);
    }
    return best;
}

inline DictionaryReport dictionary_sup(const EmbeddingProblem& p, const Dictionary& dict, double tol = kDefaultTol,
                                       Execution exec = {}) {
    p.validate();
    if (dict.directions.empty()) throw InvalidArgument("dictionary needs at least one direction");
    if (dict.max_degree < 0 || dict.max_degree > kMaxPolyDegree) throw InvalidArgument("dictionary degree out of range");
    DictionaryReport out;
    out.monomial_ratio.assign(static_cast<std::size_t>(dict.max_degree) + 1, 0.0);
    parallel_for(out.monomial_ratio.size(), exec, [&](std::size_t m) {
        out.monomial_ratio[m] = best_direction(monomial_forms(p, static_cast<int>(m), tol), dict.directions);
    });
    std::vector<double> kv(dict.kernel_grid.size());
    parallel_for(kv.size(), exec, [&](std::size_t i) {
        kv[i] = best_direction(kernel_forms(p, dict.gamma, dict.kernel_grid.points[i], tol), dict.directions);
    });
    out.monomial_sup = *std::max_element(out.monomial_ratio.begin(), out.monomial_ratio.end());
    if (!kv.empty()) {
        out.kernels = grid_report(dict.kernel_grid, std::move(kv));
        out.kernel_sup = out.kernels.sup;
    }
    out.sup = std::max(out.monomial_sup, out.kernel_sup);
    return out;
}

// Volterra -----------------------------------------------------------------------

// Operator symbol G given by a polynomial, or by log(1 / (1 - z)) M.
class VolterraSymbol {
public:
    static VolterraSymbol polynomial(OperatorPoly g) {
        VolterraSymbol s;
        s.dim_ = g.dim;
        s.poly_ = std::move(g);
        return s;
    }

    static VolterraSymbol logarithm(const Matrix& m) {
        VolterraSymbol s;
        s.dim_ = static_cast<int>(m.rows());
        s.log_ = true;
        s.log_matrix_ = m;
        return s;
    }

    // G(z) = z C, so G' = C.
    static VolterraSymbol linear(const Matrix& c) {
        return polynomial(OperatorPoly(static_cast<int>(c.rows()), {Matrix::Zero(c.rows(), c.cols()), c}));
    }

    int dim() const { return dim_; }
    bool is_logarithm() const { return log_; }

    Matrix value(Complex z) const { return log_ ? Matrix(-std::log(1.0 - z) * log_matrix_) : poly_(z); }

    Matrix derivative(Complex z) const {
        return log_ ? Matrix(log_matrix_ / (1.0 - z)) : poly_.derivative(1)(z);
    }

    VolterraSymbol conjugated(const Matrix& u) const {
        VolterraSymbol s = *this;
        s.poly_ = poly_.conjugated(u);
        if (log_) s.log_matrix_ = u * log_matrix_ * u.adjoint();
        return s;
    }

private:
    int dim_ = 1;
    bool log_ = false;
    OperatorPoly poly_;
    Matrix log_matrix_;
};

struct VolterraReport {
    GridReport report;               // (1 - |lambda|) s(lambda), or i(lambda)
    std::vector<double> pointwise;   // s(lambda) without the (1 - |lambda|) factor
};

inline void check_volterra_inputs(const VolterraSymbol& g, const OperatorWeight& w, double r, const LambdaGrid& grid) {
    if (g.dim() != w.dim()) throw InvalidArgument("symbol and weight dimensions differ");
    detail::require_ratio(r);
    if (grid.size() == 0) throw InvalidArgument("lambda grid is empty");
}

// sup (1 - |lambda|) || [W]^1/2 G'(lambda) [W]^-1/2 ||. The averages use dA; eta
// only fixes the space and is validated.
inline VolterraReport volterra_condition(const VolterraSymbol& g, const OperatorWeight& w, double eta, double r,
                                         const LambdaGrid& grid, double tol = kDefaultTol, Execution exec = {}) {
    if (!(eta > -1.0)) throw InvalidArgument("eta must exceed -1");
    check_volterra_inputs(g, w, r, grid);
    std::vector<double> s(grid.size()), v(grid.size());
    parallel_for(grid.size(), exec, [&](std::size_t i) {
        const Complex lambda = grid.points[i];
        const Matrix avg = averaged_weight(w, lambda, r, tol);
        s[i] = op_norm(psd_sqrt(avg) * g.derivative(lambda) * psd_inv_sqrt(avg));
        v[i] = (1.0 - std::abs(lambda)) * s[i];
    });
    return {grid_report(grid, std::move(v)), std::move(s)};
}

// sup || [W]^-1/2 (int_D G'* [W] G' dA) [W]^-1/2 ||
inline VolterraReport volterra_integral_condition(const VolterraSymbol& g, const OperatorWeight& w, double r,
                                                  const LambdaGrid& grid, double tol = kDefaultTol,
                                                  Execution exec = {}) {
    check_volterra_inputs(g, w, r, grid);
    std::vector<double> v(grid.size());
    parallel_for(grid.size(), exec, [&](std::size_t i) {
        const Complex lambda = grid.points[i];
        const HyperbolicDisc disc{lambda, r};
        const Matrix avg = averaged_weight(w, lambda, r, tol);
        auto integrand = [&](const DiscPoint& p) -> Matrix {
            const Matrix d = g.derivative(p.z);
            return d.adjoint() * avg * d;
        };
        const double size = max_abs_entry(integrand(DiscPoint(lambda)));
        const double local = local_tolerance(tol, disc, MeasureSpec::plain(), size);
        const Matrix m = hermitian_part(
            integrate_general(integrand, g.dim(), g.dim(), disc, MeasureSpec::plain(), local).value);
        const Matrix h = psd_inv_sqrt(avg);
        v[i] = op_norm(h * m * h);
    });
    return {grid_report(grid, std::move(v)), {}};
}

// Mean-value bound: (1 - |lambda|)^2 s(lambda)^2 <= C_r i(lambda) with C_r = 1 / r^2.
struct VolterraConsistency {
    double c_r = 0.0;
    double max_ratio = 0.0;  // max of (1 - |lambda|)^2 s^2 / i
    bool holds = false;
};

inline VolterraConsistency volterra_consistency(const LambdaGrid& grid, const VolterraReport& pointwise,
                                                const VolterraReport& integral, double r) {
    VolterraConsistency c;
    c.c_r = 1.0 / (r * r);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double lhs = std::pow((1.0 - std::abs(grid.points[i])) * pointwise.pointwise[i], 2);
        const double rhs = integral.report.values[i];
        c.max_ratio = std::max(c.max_ratio, rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
    }
    c.holds = c.max_ratio <= c.c_r * (1.0 + 1e-6);
    return c;
}

// T_G f(z) = int_0^z G'(zeta) f(zeta) dzeta, Gauss-Legendre along the segment.
inline Vector apply_volterra(const VolterraSymbol& g, const TestFunction& f, Complex z, int steps = 16) {
    detail::require_in_disc(z);
    if (steps < 8) throw InvalidArgument("apply_volterra needs at least 8 steps");
    if (dimension(f) != g.dim()) throw InvalidArgument("symbol and function dimensions differ");
    const auto rule = quad_detail::make_gauss_rule(steps);
    Vector sum = Vector::Zero(g.dim());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const Complex zeta = rule.nodes[i] * z;
        sum += rule.weights[i] * (g.derivative(zeta) * evaluate(f, zeta));
    }
    return z * sum;
}

}  // namespace carleson
