#pragma once

// Operator weights W(z) = sum_k (1 - |z|)^{a_k} M_k with closed-form inverses, the
// Bekolle-Bonami B_2(eta) constant over Carleson squares, and the disc averages
// [W]_{z,r}.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "carleson/geometry.hpp"
#include "carleson/linalg.hpp"
#include "carleson/parallel.hpp"
#include "carleson/quadrature.hpp"

namespace carleson {

struct RadialPowerTerm {
    double exponent;
    Matrix matrix;
};

class OperatorWeight {
public:
    enum class Family { Identity, ScalarPower, DiagonalPowers, Block };

    static OperatorWeight identity(int d) {
        OperatorWeight w(Family::Identity, d);
        w.terms_.push_back({0.0, Matrix::Identity(d, d)});
        w.inverse_terms_.push_back({0.0, Matrix::Identity(d, d)});
        w.exponents_ = {0.0};
        return w;
    }

    // (1 - |z|)^a P with P positive definite.
    static OperatorWeight scalar_power(double a, const Matrix& p) {
        OperatorWeight w(Family::ScalarPower, static_cast<int>(p.rows()));
        w.terms_.push_back({a, hermitian_part(p)});
        w.inverse_terms_.push_back({-a, psd_inverse(p)});
        w.exponents_ = {a};
        return w;
    }

    // U diag((1 - |z|)^{a_i}) U*
    static OperatorWeight diagonal_powers(const std::vector<double>& a, const Matrix& u) {
        const int d = static_cast<int>(a.size());
        if (d == 0 || u.rows() != d || u.cols() != d) throw InvalidArgument("diagonal-powers shape mismatch");
        if ((u.adjoint() * u - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
            throw InvalidArgument("conjugating matrix must be unitary");
        OperatorWeight w(Family::DiagonalPowers, d);
        for (int i = 0; i < d; ++i) {
            const Matrix proj = u.col(i) * u.col(i).adjoint();
            w.terms_.push_back({a[static_cast<std::size_t>(i)], proj});
            w.inverse_terms_.push_back({-a[static_cast<std::size_t>(i)], proj});
        }
        w.exponents_ = a;
        return w;
    }

    static OperatorWeight block(const std::vector<OperatorWeight>& blocks) {
        int d = 0;
        for (const auto& b : blocks) d += b.dim();
        if (d == 0) throw InvalidArgument("block weight needs at least one block");
        OperatorWeight w(Family::Block, d);
        int offset = 0;
        for (const auto& b : blocks) {
            auto embed = [&](const std::vector<RadialPowerTerm>& src, std::vector<RadialPowerTerm>& dst) {
                for (const auto& t : src) {
                    Matrix m = Matrix::Zero(d, d);
                    m.block(offset, offset, b.dim(), b.dim()) = t.matrix;
                    dst.push_back({t.exponent, m});
                }
            };
            embed(b.terms_, w.terms_);
            embed(b.inverse_terms_, w.inverse_terms_);
            w.exponents_.insert(w.exponents_.end(), b.exponents_.begin(), b.exponents_.end());
            offset += b.dim();
        }
        return w;
    }

    int dim() const noexcept { return dim_; }
    Family family() const noexcept { return family_; }
    const std::vector<RadialPowerTerm>& terms() const noexcept { return terms_; }
    const std::vector<RadialPowerTerm>& inverse_terms() const noexcept { return inverse_terms_; }
    const std::vector<double>& exponents() const noexcept { return exponents_; }

    Matrix at(const DiscPoint& p) const { return evaluate(terms_, p); }
    Matrix inverse_at(const DiscPoint& p) const { return evaluate(inverse_terms_, p); }

    MatrixField field() const { return as_field(terms_); }
    MatrixField inverse_field() const { return as_field(inverse_terms_); }

    // Every radial exponent inside (-(1 + eta), 1 + eta).
    bool in_b2_class(double eta) const {
        return std::all_of(exponents_.begin(), exponents_.end(),
                           [eta](double a) { return std::abs(a) < 1.0 + eta; });
    }

    // U W U*
    OperatorWeight conjugated(const Matrix& u) const {
        OperatorWeight w = *this;
        for (auto& t : w.terms_) t.matrix = hermitian_part(u * t.matrix * u.adjoint());
        for (auto& t : w.inverse_terms_) t.matrix = hermitian_part(u * t.matrix * u.adjoint());
        return w;
    }

private:
    OperatorWeight(Family f, int d) : family_(f), dim_(d) {
        if (d < 1) throw InvalidArgument("weight dimension must be positive");
    }

    Matrix evaluate(const std::vector<RadialPowerTerm>& ts, const DiscPoint& p) const {
        Matrix m = Matrix::Zero(dim_, dim_);
        for (const auto& t : ts) m += std::pow(p.depth, t.exponent) * t.matrix;
        return m;
    }

    MatrixField as_field(const std::vector<RadialPowerTerm>& ts) const {
        MatrixField f;
        f.dim = dim_;
        for (const auto& t : ts) f += MatrixField::radial_power(t.exponent, t.matrix);
        return f;
    }

    Family family_;
    int dim_;
    std::vector<RadialPowerTerm> terms_;
    std::vector<RadialPowerTerm> inverse_terms_;
    std::vector<double> exponents_;
};

// Fails with DegenerateWeight when the smallest eigenvalue is below the relative floor.
inline void require_nondegenerate(const Matrix& m, const char* what) {
    const auto ev = hermitian_eigenvalues(m);
    const double top = ev(ev.size() - 1);
    if (!(top > 0.0) || ev(0) < kDegenerateFloor * top)
        throw DegenerateWeight(std::string(what) + " is singular to relative precision 1e-12");
}

// B_2 --------------------------------------------------------------------------

// Squares S(h, theta) to scan. The standard grid uses h = 2^-j (j = 0..J) with 2^j
// equally spaced theta, plus h in {0.9, 0.75} with four theta each.
struct SquareGrid {
    struct Row {
        double h;
        std::vector<double> thetas;
    };
    std::vector<Row> rows;

    static SquareGrid standard(int max_level = 8) {
        SquareGrid g;
        for (double h : {0.9, 0.75}) {
            Row r{h, {}};
            for (int k = 0; k < 4; ++k) r.thetas.push_back(kTwoPi * k / 4.0);
            g.rows.push_back(std::move(r));
        }
        for (int j = 0; j <= max_level; ++j) {
            Row r{std::ldexp(1.0, -j), {}};
            const int count = 1 << j;
            for (int k = 0; k < count; ++k) r.thetas.push_back(kTwoPi * k / count);
            g.rows.push_back(std::move(r));
        }
        return g;
    }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& r : rows) n += r.thetas.size();
        return n;
    }
};

struct B2Report {
    double value = 0.0;
    double argmax_h = 0.0;
    double argmax_theta = 0.0;
    std::vector<double> h;          // per grid row
    std::vector<double> row_value;  // max over theta in that row
};

// || avg_S(W)^{1/2} avg_S(W^{-1})^{1/2} || for one square, averages against dA_eta.
inline double b2_square_value(const OperatorWeight& w, double eta, const AnnularSector& square,
                              double tol = kDefaultTol) {
    if (square.outer != 1.0) throw InvalidArgument("B2 squares must reach the circle");
    const auto spec = MeasureSpec::bergman(eta);
    // A_eta(S) in closed form: (eta + 1) int_{1-h}^1 (1 - r)^eta 2r dr times the angular fraction.
    const double h = square.outer - square.inner;
    const double mass = (square.theta_hi - square.theta_lo) / kTwoPi * 2.0 * (eta + 1.0) *
                        (std::pow(h, eta + 1.0) / (eta + 1.0) - std::pow(h, eta + 2.0) / (eta + 2.0));
    // Tolerances relative to the size of the averages, which scale like h^a.
    const DiscPoint mid(std::polar(1.0 - 0.5 * h, 0.5 * (square.theta_lo + square.theta_hi)), 0.5 * h);
    auto local = [&](const Matrix& m) { return tol * mass * std::max(max_abs_entry(m), 1e-300); };
    const Matrix avg_w = integrate(w.field(), square, spec, local(w.at(mid))) / mass;
    const Matrix avg_inv = integrate(w.inverse_field(), square, spec, local(w.inverse_at(mid))) / mass;
    require_nondegenerate(avg_w, "average of W");
    require_nondegenerate(avg_inv, "average of W^-1");
    return op_norm(psd_sqrt(avg_w) * psd_sqrt(avg_inv));
}

// Maximum over the grid: a lower bound for the B_2(eta) constant. Ties keep the
// first grid square.
inline B2Report b2_constant(const OperatorWeight& w, double eta, const SquareGrid& grid,
                            double tol = kDefaultTol, Execution exec = {}) {
    if (grid.rows.empty() || grid.size() == 0) throw InvalidArgument("square grid is empty");
    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t i = 0; i < grid.rows.size(); ++i)
        for (std::size_t j = 0; j < grid.rows[i].thetas.size(); ++j) jobs.emplace_back(i, j);
    std::vector<double> values(jobs.size());
    parallel_for(jobs.size(), exec, [&](std::size_t k) {
        const auto& row = grid.rows[jobs[k].first];
        values[k] = b2_square_value(w, eta, bb_square(row.h, row.thetas[jobs[k].second]), tol);
    });
    B2Report r;
    for (const auto& row : grid.rows) {
        r.h.push_back(row.h);
        r.row_value.push_back(0.0);
    }
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        const auto& row = grid.rows[jobs[k].first];
        r.row_value[jobs[k].first] = std::max(r.row_value[jobs[k].first], values[k]);
        if (k == 0 || values[k] > r.value) {
            r.value = values[k];
            r.argmax_h = row.h;
            r.argmax_theta = row.thetas[jobs[k].second];
        }
    }
    return r;
}

// Averages ---------------------------------------------------------------------

// [W]_{z,r} = A(D_{z,r})^-1 int_{D_{z,r}} W dA
inline Matrix averaged_weight(const OperatorWeight& w, Complex z, double r, double tol = kDefaultTol) {
    const HyperbolicDisc disc{z, r};
    const double area = region_area(disc);
    Matrix avg = integrate_local(w.field(), disc, MeasureSpec::plain(), tol) / area;
    require_nondegenerate(avg, "averaged weight");
    return avg;
}

struct Comparability {
    double k1 = 0.0;  // smallest eigenvalue of [W]_lambda^-1/2 [W]_z [W]_lambda^-1/2
    double k2 = 0.0;  // largest
    std::size_t pairs = 0;
};

// Samples z in D_{lambda,r} for each lambda and records the spectral range of
// [W]_{z,r} relative to [W]_{lambda,r}.
inline Comparability averaged_weight_comparability(const OperatorWeight& w, double r,
                                                   const std::vector<Complex>& lambdas, int samples_per_lambda,
                                                   std::uint64_t seed, double tol = kDefaultTol) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Comparability c{std::numeric_limits<double>::infinity(), 0.0, 0};
    for (const Complex& lambda : lambdas) {
        const Matrix base = averaged_weight(w, lambda, r, tol);
        const Matrix h = psd_inv_sqrt(base);
        const double rad = r * (1.0 - std::abs(lambda));
        for (int s = 0; s < samples_per_lambda; ++s) {
            const Complex z = lambda + std::polar(rad * std::sqrt(unif(rng)), kTwoPi * unif(rng));
            const auto ev = hermitian_eigenvalues(h * averaged_weight(w, z, r, tol) * h);
            c.k1 = std::min(c.k1, ev(0));
            c.k2 = std::max(c.k2, ev(ev.size() - 1));
            ++c.pairs;
        }
    }
    return c;
}

}  // namespace carleson
