#pragma once

// Adaptive integration of scalar and matrix-valued fields over disc regions
// against dA and dA_eta(z) = (eta + 1)(1 - |z|)^eta dA(z).
//
// Regions are mapped onto rectangles in a parameter plane by a chart (polar about
// the origin, or polar about a local centre). Each rectangle is a panel carrying a
// tensor Gauss-Legendre rule. A panel's error indicator compares its own estimate
// with the radial and the angular bisection; the panel with the largest indicator
// is split in the worse direction until the summed indicator is below
// tol * (1 + |result|). Panels that touch |z| = 1 use the graded radius
// 1 - |z| = h u^q, with q chosen so that (1 - |z|)^s du becomes an integer power of
// u; the chart supplies 1 - |z| directly so nothing is lost to cancellation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <queue>
#include <variant>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

#include "carleson/errors.hpp"
#include "carleson/geometry.hpp"
#include "carleson/linalg.hpp"

namespace carleson {

inline constexpr double kDefaultTol = 1e-8;
inline constexpr std::size_t kDefaultNodeBudget = 2'000'000;

// A point of the disc together with 1 - |z| computed without cancellation.
struct DiscPoint {
    Complex z;
    double depth;

    DiscPoint() = default;
    DiscPoint(Complex z_, double depth_) : z(z_), depth(depth_) {}
    explicit DiscPoint(Complex z_) : z(z_), depth(1.0 - std::abs(z_)) {}
};

struct MeasureSpec {
    double eta = 0.0;
    bool weighted = false;

    static MeasureSpec plain() { return {}; }
    static MeasureSpec bergman(double eta) {
        if (!(eta > -1.0)) throw InvalidArgument("eta must exceed -1");
        return {eta, true};
    }

    double density(double depth) const { return weighted ? (eta + 1.0) * std::pow(depth, eta) : 1.0; }
    double singular_exponent() const { return weighted ? eta : 0.0; }
};

// Scalar integrand with an optional radial singularity hint: the field behaves
// like (1 - |z|)^singular_exponent near the boundary (0 means smooth).
struct ScalarField {
    std::function<double(const DiscPoint&)> fn;
    double singular_exponent = 0.0;
};

// Matrix-valued integrand: sum_k s_k(z) M_k plus an optional general part. The
// separable form covers every weight family used here and is integrated one scalar
// at a time.
struct MatrixField {
    struct Term {
        ScalarField scalar;
        Matrix matrix;
    };

    int dim = 1;
    std::vector<Term> terms;
    std::function<Matrix(const DiscPoint&)> general;
    double general_singular_exponent = 0.0;

    Matrix operator()(const DiscPoint& p) const {
        Matrix m = Matrix::Zero(dim, dim);
        for (const auto& t : terms) m += t.scalar.fn(p) * t.matrix;
        if (general) m += general(p);
        return m;
    }

    static MatrixField constant(const Matrix& m) {
        MatrixField f;
        f.dim = static_cast<int>(m.rows());
        f.terms.push_back({{[](const DiscPoint&) { return 1.0; }, 0.0}, m});
        return f;
    }

    static MatrixField identity(int d) { return constant(Matrix::Identity(d, d)); }

    // (1 - |z|)^a M
    static MatrixField radial_power(double a, const Matrix& m) {
        MatrixField f;
        f.dim = static_cast<int>(m.rows());
        f.terms.push_back({{[a](const DiscPoint& p) { return std::pow(p.depth, a); }, a}, m});
        return f;
    }

    MatrixField& operator+=(const MatrixField& other) {
        if (other.dim != dim) throw InvalidArgument("matrix field dimensions differ");
        terms.insert(terms.end(), other.terms.begin(), other.terms.end());
        if (other.general) {
            if (general) {
                auto a = general;
                auto b = other.general;
                general = [a, b](const DiscPoint& p) { Matrix m = a(p); m += b(p); return m; };
            } else {
                general = other.general;
            }
            general_singular_exponent = std::min(general_singular_exponent, other.general_singular_exponent);
        }
        return *this;
    }

    // Pointwise product with a scalar function (kept separable).
    MatrixField scaled_by(const ScalarField& s) const {
        MatrixField out;
        out.dim = dim;
        for (const auto& t : terms) {
            auto a = t.scalar.fn;
            auto b = s.fn;
            out.terms.push_back({{[a, b](const DiscPoint& p) { return a(p) * b(p); },
                                  t.scalar.singular_exponent + s.singular_exponent},
                                 t.matrix});
        }
        if (general) {
            auto g = general;
            auto b = s.fn;
            out.general = [g, b](const DiscPoint& p) { return Matrix(b(p) * g(p)); };
            out.general_singular_exponent = general_singular_exponent + s.singular_exponent;
        }
        return out;
    }
};

template <class V>
struct QuadratureResult {
    V value;
    double error = 0.0;
    std::size_t evaluations = 0;
};

namespace quad_detail {

inline constexpr int kOrder = 10;

struct GaussRule {
    std::vector<double> nodes;    // on [0, 1]
    std::vector<double> weights;  // sum to 1
};

inline GaussRule make_gauss_rule(int n) {
    const auto zeros = boost::math::legendre_p_zeros<double>(n);
    std::vector<double> x;
    std::vector<double> w;
    for (double z : zeros) {
        const double dp = boost::math::legendre_p_prime(n, z);
        const double wt = 2.0 / ((1.0 - z * z) * dp * dp);
        if (z == 0.0) {
            x.push_back(0.0);
            w.push_back(wt);
        } else {
            x.push_back(z);
            w.push_back(wt);
            x.push_back(-z);
            w.push_back(wt);
        }
    }
    GaussRule rule;
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    for (auto i : order) {
        rule.nodes.push_back(0.5 * (x[i] + 1.0));
        rule.weights.push_back(0.5 * w[i]);
    }
    return rule;
}

inline const GaussRule& panel_rule() {
    static const GaussRule rule = make_gauss_rule(kOrder);
    return rule;
}

// Chart from parameters (u, v) to disc points; jacobian includes the 1/pi of the
// normalized area measure.
struct OriginPolar {
    bool graded = false;
    double width = 1.0;  // graded: 1 - |z| = width * u^power
    double power = 1.0;

    bool map(double u, double v, DiscPoint& p, double& jac) const {
        double rho = u;
        double depth = 1.0 - u;
        double drho = 1.0;
        if (graded) {
            depth = width * std::pow(u, power);
            if (!(depth > 0.0)) return false;
            rho = 1.0 - depth;
            drho = power * width * std::pow(u, power - 1.0);
        }
        p = DiscPoint(std::polar(rho, v), depth);
        jac = rho * drho / std::numbers::pi;
        return true;
    }
};

struct LocalPolar {
    Complex center;
    double ratio = 0.5;
    bool tilde = false;

    double radius(double v) const {
        if (!tilde) return ratio * (1.0 - std::abs(center));
        // Boundary of {|zeta - c| < r (1 - |zeta|)} along direction e^{iv}: the
        // smaller positive root of (r^2 - 1) t^2 + 2r(r Re(conj(c) w) + 1) t + r^2(|c|^2 - 1).
        const Complex w = std::polar(1.0, v);
        const double r = ratio;
        const double a = r * r - 1.0;
        const double b = 2.0 * r * (r * (std::conj(center) * w).real() + 1.0);
        const double c = r * r * (std::norm(center) - 1.0);
        return -2.0 * c / (b + std::sqrt(b * b - 4.0 * a * c));
    }

    bool map(double u, double v, DiscPoint& p, double& jac) const {
        const double rad = radius(v);
        p = DiscPoint(center + u * rad * std::polar(1.0, v));
        jac = u * rad * rad / std::numbers::pi;
        return p.depth > 0.0;
    }
};

using Chart = std::variant<OriginPolar, LocalPolar>;

struct Rect {
    int chart = 0;
    double u0, u1, v0, v1;
};

struct Layout {
    std::vector<Chart> charts;
    std::vector<Rect> rects;
};

// Grading exponent turning (1 - |z|)^s du into an integer power of u.
inline double grading_power(double s) {
    if (!(s > -1.0)) throw InvalidArgument("radial singularity exponent must exceed -1");
    const double e = s + 1.0;
    const double ce = std::ceil(e - 1e-12);
    if (std::abs(ce - e) < 1e-12) return 1.0;
    return ce / e;
}

inline void add_angular(Layout& l, int chart, double u0, double u1, double v0, double v1, int pieces) {
    for (int i = 0; i < pieces; ++i) {
        const double a = v0 + (v1 - v0) * i / pieces;
        const double b = v0 + (v1 - v0) * (i + 1) / pieces;
        l.rects.push_back({chart, u0, u1, a, b});
    }
}

// Annulus [inner, 1) x [v0, v1): graded when it reaches the boundary.
inline void add_outer_band(Layout& l, double inner, double v0, double v1, int pieces, double s) {
    if (inner <= 0.0) {
        l.charts.push_back(OriginPolar{});
        add_angular(l, static_cast<int>(l.charts.size()) - 1, 0.0, 0.5, v0, v1, pieces);
        inner = 0.5;
    }
    l.charts.push_back(OriginPolar{true, 1.0 - inner, grading_power(s)});
    add_angular(l, static_cast<int>(l.charts.size()) - 1, 0.0, 1.0, v0, v1, pieces);
}

inline Layout layout_for(const Region& region, double singular_exponent) {
    Layout l;
    struct Visitor {
        Layout& l;
        double s;
        void operator()(const WholeDisc&) const { add_outer_band(l, 0.0, 0.0, kTwoPi, 8, s); }
        void operator()(const CarlesonSquare& q) const {
            if (!q.index.valid()) throw InvalidArgument("invalid dyadic index");
            const double w = arc_width(q.index.level);
            const double v0 = w * static_cast<double>(q.index.position);
            add_outer_band(l, square_inner_radius(q.index.level), v0, v0 + w, q.index.level == 0 ? 8 : 2, s);
        }
        void operator()(const TopHalf& t) const {
            if (!t.index.valid()) throw InvalidArgument("invalid dyadic index");
            const double w = arc_width(t.index.level);
            const double v0 = w * static_cast<double>(t.index.position);
            l.charts.push_back(OriginPolar{});
            add_angular(l, 0, square_inner_radius(t.index.level), tophalf_outer_radius(t.index.level), v0, v0 + w,
                        t.index.level == 0 ? 4 : 1);
        }
        void operator()(const HyperbolicDisc& d) const {
            detail::require_in_disc(d.center);
            detail::require_ratio(d.ratio);
            l.charts.push_back(LocalPolar{d.center, d.ratio, false});
            add_angular(l, 0, 0.0, 1.0, 0.0, kTwoPi, 4);
        }
        void operator()(const TildeDisc& d) const {
            detail::require_in_disc(d.center);
            detail::require_ratio(d.ratio);
            l.charts.push_back(LocalPolar{d.center, d.ratio, true});
            add_angular(l, 0, 0.0, 1.0, 0.0, kTwoPi, 4);
        }
        void operator()(const AnnularSector& a) const {
            if (!(a.inner >= 0.0 && a.inner < a.outer && a.outer <= 1.0 && a.theta_hi > a.theta_lo))
                throw InvalidArgument("malformed annular sector");
            const double span = std::min(a.theta_hi - a.theta_lo, kTwoPi);
            const int pieces = std::clamp(static_cast<int>(std::ceil(span / (kTwoPi / 8))), 1, 8);
            if (a.outer >= 1.0) {
                add_outer_band(l, a.inner, a.theta_lo, a.theta_lo + span, pieces, s);
            } else {
                l.charts.push_back(OriginPolar{});
                add_angular(l, 0, a.inner, a.outer, a.theta_lo, a.theta_lo + span, pieces);
            }
        }
    };
    std::visit(Visitor{l, singular_exponent}, region);
    return l;
}

inline double value_norm(double v) { return std::abs(v); }
inline double value_norm(const Matrix& m) { return max_abs_entry(m); }

template <class V>
V zero_like(const V& proto) {
    if constexpr (std::is_same_v<V, double>) {
        return 0.0;
    } else {
        return V::Zero(proto.rows(), proto.cols());
    }
}

template <class V, class F>
class AdaptiveIntegrator {
public:
    AdaptiveIntegrator(const Layout& layout, F f, V zero, std::size_t budget)
        : layout_(layout), f_(std::move(f)), zero_(std::move(zero)), budget_(budget) {}

    QuadratureResult<V> run(double tol) {
        const auto& rule = panel_rule();
        const std::size_t per_panel = rule.nodes.size() * rule.nodes.size();
        std::vector<Panel> panels;
        for (const auto& r : layout_.rects) panels.push_back(make_panel(r, eval(r)));

        auto worse = [&](std::size_t a, std::size_t b) {
            if (panels[a].error != panels[b].error) return panels[a].error < panels[b].error;
            return a > b;
        };
        std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(worse)> queue(worse);
        std::vector<bool> active;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            queue.push(i);
            active.push_back(true);
        }

        auto totals = [&]() {
            V value = zero_;
            double err = 0.0;
            for (std::size_t i = 0; i < panels.size(); ++i)
                if (active[i]) {
                    value += panels[i].value;
                    err += panels[i].error;
                }
            return std::pair<V, double>{value, err};
        };

        auto [value, error] = totals();
        std::size_t since_refresh = 0;
        while (error > tol * (1.0 + value_norm(value))) {
            if (evaluations_ + 4 * per_panel > budget_)
                throw ToleranceNotReached("quadrature tolerance not reached within the node budget", error);
            const std::size_t worst = queue.top();
            queue.pop();
            active[worst] = false;
            Panel p = panels[worst];
            value -= p.value;
            error -= p.error;
            const auto [a, b] = p.split_radial ? split_u(p.rect) : split_v(p.rect);
            const V& va = p.split_radial ? p.radial_lo : p.angular_lo;
            const V& vb = p.split_radial ? p.radial_hi : p.angular_hi;
            for (auto child : {make_panel(a, va), make_panel(b, vb)}) {
                value += child.value;
                error += child.error;
                panels.push_back(std::move(child));
                active.push_back(true);
                queue.push(panels.size() - 1);
            }
            // Running sums drift; recompute them exactly from time to time.
            if (++since_refresh == 64) {
                std::tie(value, error) = totals();
                since_refresh = 0;
            }
        }
        std::tie(value, error) = totals();
        return {value, error, evaluations_};
    }

private:
    struct Panel {
        Rect rect;
        V value, radial_lo, radial_hi, angular_lo, angular_hi;
        double error = 0.0;
        bool split_radial = true;
    };

    static std::pair<Rect, Rect> split_u(const Rect& r) {
        const double m = 0.5 * (r.u0 + r.u1);
        return {Rect{r.chart, r.u0, m, r.v0, r.v1}, Rect{r.chart, m, r.u1, r.v0, r.v1}};
    }
    static std::pair<Rect, Rect> split_v(const Rect& r) {
        const double m = 0.5 * (r.v0 + r.v1);
        return {Rect{r.chart, r.u0, r.u1, r.v0, m}, Rect{r.chart, r.u0, r.u1, m, r.v1}};
    }

    V eval(const Rect& r) {
        const auto& rule = panel_rule();
        const Chart& chart = layout_.charts[static_cast<std::size_t>(r.chart)];
        const double du = r.u1 - r.u0;
        const double dv = r.v1 - r.v0;
        V acc = zero_;
        DiscPoint p;
        double jac = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double u = r.u0 + du * rule.nodes[i];
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                const double v = r.v0 + dv * rule.nodes[j];
                const bool ok = std::visit([&](const auto& c) { return c.map(u, v, p, jac); }, chart);
                if (!ok || jac == 0.0) continue;
                acc += (rule.weights[i] * rule.weights[j] * jac) * f_(p);
            }
        }
        evaluations_ += rule.nodes.size() * rule.nodes.size();
        acc *= du * dv;
        return acc;
    }

    Panel make_panel(const Rect& r, V coarse) {
        Panel p;
        p.rect = r;
        const auto [ra, rb] = split_u(r);
        const auto [aa, ab] = split_v(r);
        p.radial_lo = eval(ra);
        p.radial_hi = eval(rb);
        p.angular_lo = eval(aa);
        p.angular_hi = eval(ab);
        V radial = p.radial_lo + p.radial_hi;
        V angular = p.angular_lo + p.angular_hi;
        const double er = value_norm(V(radial - coarse));
        const double ea = value_norm(V(angular - coarse));
        p.split_radial = er >= ea;
        p.value = p.split_radial ? radial : angular;
        p.error = std::max(er, ea);
        return p;
    }

    const Layout& layout_;
    F f_;
    V zero_;
    std::size_t budget_;
    std::size_t evaluations_ = 0;
};

template <class V, class F>
QuadratureResult<V> integrate_layout(const Layout& layout, F&& f, V zero, double tol, std::size_t budget) {
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    AdaptiveIntegrator<V, std::decay_t<F>> integrator(layout, std::forward<F>(f), std::move(zero), budget);
    return integrator.run(tol);
}

}  // namespace quad_detail

inline QuadratureResult<double> integrate_scalar_detailed(const ScalarField& field, const Region& region,
                                                          const MeasureSpec& spec, double tol = kDefaultTol,
                                                          std::size_t budget = kDefaultNodeBudget) {
    const auto layout =
        quad_detail::layout_for(region, field.singular_exponent + spec.singular_exponent());
    auto integrand = [&](const DiscPoint& p) { return field.fn(p) * spec.density(p.depth); };
    return quad_detail::integrate_layout<double>(layout, integrand, 0.0, tol, budget);
}

inline double integrate_scalar(const ScalarField& field, const Region& region, const MeasureSpec& spec,
                               double tol = kDefaultTol) {
    return integrate_scalar_detailed(field, region, spec, tol).value;
}

inline double integrate_scalar(const std::function<double(const DiscPoint&)>& fn, const Region& region,
                               const MeasureSpec& spec, double tol = kDefaultTol) {
    return integrate_scalar(ScalarField{fn, 0.0}, region, spec, tol);
}

// Integral of a Hermitian matrix field; the result is symmetrized. The error
// estimate sums the per-term estimates weighted by the term matrices.
inline QuadratureResult<Matrix> integrate_detailed(const MatrixField& field, const Region& region,
                                                   const MeasureSpec& spec, double tol = kDefaultTol,
                                                   std::size_t budget = kDefaultNodeBudget) {
    QuadratureResult<Matrix> out{Matrix::Zero(field.dim, field.dim), 0.0, 0};
    for (const auto& t : field.terms) {
        const double scale = std::max(1.0, max_abs_entry(t.matrix));
        const auto r = integrate_scalar_detailed(t.scalar, region, spec, tol / scale, budget);
        out.value += r.value * t.matrix;
        out.error += r.error * max_abs_entry(t.matrix);
        out.evaluations += r.evaluations;
    }
    if (field.general) {
        const auto layout =
            quad_detail::layout_for(region, field.general_singular_exponent + spec.singular_exponent());
        auto integrand = [&](const DiscPoint& p) -> Matrix { return spec.density(p.depth) * field.general(p); };
        const auto r = quad_detail::integrate_layout<Matrix>(layout, integrand,
                                                             Matrix::Zero(field.dim, field.dim), tol, budget);
        out.value += r.value;
        out.error += r.error;
        out.evaluations += r.evaluations;
    }
    out.value = hermitian_part(out.value);
    return out;
}

inline Matrix integrate(const MatrixField& field, const Region& region, const MeasureSpec& spec,
                        double tol = kDefaultTol) {
    return integrate_detailed(field, region, spec, tol).value;
}

// Complex-valued scalar integral (real and imaginary parts in one pass); used for
// cell averages of vector fields.
inline QuadratureResult<Matrix> integrate_general(const std::function<Matrix(const DiscPoint&)>& fn, int rows,
                                                  int cols, const Region& region, const MeasureSpec& spec,
                                                  double tol = kDefaultTol, double singular_exponent = 0.0) {
    const auto layout = quad_detail::layout_for(region, singular_exponent + spec.singular_exponent());
    auto integrand = [&](const DiscPoint& p) -> Matrix { return spec.density(p.depth) * fn(p); };
    return quad_detail::integrate_layout<Matrix>(layout, integrand, Matrix::Zero(rows, cols), tol,
                                                 kDefaultNodeBudget);
}

// Hyperbolic discs shrink toward the boundary, so an absolute tolerance means
// nothing there. The tolerance is rescaled by the disc area times the size of the
// integrand at the centre.
inline double local_tolerance(double tol, const HyperbolicDisc& disc, const MeasureSpec& spec, double centre_size) {
    const double area = region_area(disc) * spec.density(1.0 - std::abs(disc.center));
    return tol * area * (centre_size > 0.0 ? centre_size : 1.0);
}

inline Matrix integrate_local(const MatrixField& field, const HyperbolicDisc& disc, const MeasureSpec& spec,
                              double tol = kDefaultTol) {
    const double size = max_abs_entry(field(DiscPoint(disc.center)));
    return integrate(field, disc, spec, local_tolerance(tol, disc, spec, size));
}

}  // namespace carleson
