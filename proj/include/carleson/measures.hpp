#pragma once

// Positive matrix-valued measures on the disc (finitely many PSD atoms plus a PSD
// density against dA) and their Carleson intensities over the dyadic squares.

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "carleson/geometry.hpp"
#include "carleson/linalg.hpp"
#include "carleson/parallel.hpp"
#include "carleson/quadrature.hpp"

namespace carleson {

struct Atom {
    Complex point;
    Matrix mass;
};

class MatrixMeasure {
public:
    explicit MatrixMeasure(int dim) : dim_(dim) {
        if (dim < 1) throw InvalidArgument("measure dimension must be positive");
    }

    int dim() const noexcept { return dim_; }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const std::optional<MatrixField>& density() const noexcept { return density_; }

    MatrixMeasure& add_atom(Complex point, const Matrix& mass) {
        detail::require_in_disc(point);
        if (mass.rows() != dim_ || mass.cols() != dim_) throw InvalidArgument("atom mass has wrong dimension");
        const auto ev = hermitian_eigenvalues(mass);
        if (ev(0) < -1e-12 * std::max(1.0, std::abs(ev(ev.size() - 1))))
            throw NotPositiveSemidefinite("atom mass is not positive semidefinite");
        atoms_.push_back({point, hermitian_part(mass)});
        return *this;
    }

    MatrixMeasure& set_density(MatrixField density) {
        if (density.dim != dim_) throw InvalidArgument("density has wrong dimension");
        density_ = std::move(density);
        return *this;
    }

    // U mu U*
    MatrixMeasure conjugated(const Matrix& u) const {
        MatrixMeasure out(dim_);
        for (const auto& a : atoms_) out.atoms_.push_back({a.point, hermitian_part(u * a.mass * u.adjoint())});
        if (density_) {
            MatrixField f = *density_;
            for (auto& t : f.terms) t.matrix = u * t.matrix * u.adjoint();
            if (f.general) {
                auto g = f.general;
                f.general = [g, u](const DiscPoint& p) { return Matrix(u * g(p) * u.adjoint()); };
            }
            out.density_ = std::move(f);
        }
        return out;
    }

    static MatrixMeasure identity_density(int d) {
        MatrixMeasure m(d);
        m.set_density(MatrixField::identity(d));
        return m;
    }

    static MatrixMeasure single_atom(Complex point, const Matrix& mass) {
        MatrixMeasure m(static_cast<int>(mass.rows()));
        m.add_atom(point, mass);
        return m;
    }

private:
    int dim_;
    std::vector<Atom> atoms_;
    std::optional<MatrixField> density_;
};

inline Matrix measure_of(const MatrixMeasure& mu, const Region& region, double tol = kDefaultTol) {
    Matrix m = Matrix::Zero(mu.dim(), mu.dim());
    for (const auto& a : mu.atoms())
        if (contains(region, a.point)) m += a.mass;
    if (mu.density()) m += integrate(*mu.density(), region, MeasureSpec::plain(), tol);
    return m;
}

// mu(T_I) for every top half of level <= depth, and the mass each level-depth
// square carries beyond the partition (its part of the residual annulus).
struct CellMasses {
    int depth = 0;
    int dim = 1;
    std::vector<Matrix> tophalf;  // partition_slot order
    std::vector<Matrix> tail;     // indexed by position at level `depth`
};

inline CellMasses cell_masses(const MatrixMeasure& mu, int depth, double tol = kDefaultTol, Execution exec = {}) {
    const auto partition = tophalf_partition(depth);
    CellMasses out;
    out.depth = depth;
    out.dim = mu.dim();
    out.tophalf.resize(partition.cells.size());
    const std::size_t leaves = std::size_t{1} << depth;
    out.tail.resize(leaves);
    parallel_for(partition.cells.size() + leaves, exec, [&](std::size_t i) {
        if (i < partition.cells.size()) {
            out.tophalf[i] = measure_of(mu, TopHalf{partition.cells[i]}, tol);
        } else {
            const auto k = static_cast<std::int64_t>(i - partition.cells.size());
            const auto [a, b] = dyadic_children({depth, k});
            out.tail[static_cast<std::size_t>(k)] =
                measure_of(mu, CarlesonSquare{a}, tol) + measure_of(mu, CarlesonSquare{b}, tol);
        }
    });
    return out;
}

// mu(Q_I) for every square of level <= depth, assembled bottom-up from the top
// halves. Without the tail this is the mass of the truncated measure
// mu restricted to {|z| < 1 - 2^-(depth+1)}.
inline std::vector<Matrix> square_masses(const CellMasses& cm, bool with_tail) {
    std::vector<Matrix> q(cm.tophalf.size());
    for (int n = cm.depth; n >= 0; --n) {
        for (std::int64_t k = 0; k < (std::int64_t{1} << n); ++k) {
            const DyadicIndex idx{n, k};
            Matrix m = cm.tophalf[partition_slot(idx)];
            if (n == cm.depth) {
                if (with_tail) m += cm.tail[static_cast<std::size_t>(k)];
            } else {
                const auto [a, b] = dyadic_children(idx);
                m += q[partition_slot(a)] + q[partition_slot(b)];
            }
            q[partition_slot(idx)] = std::move(m);
        }
    }
    return q;
}

inline Matrix residual_mass(const CellMasses& cm) {
    Matrix m = Matrix::Zero(cm.dim, cm.dim);
    for (const auto& t : cm.tail) m += t;
    return m;
}

struct IntensityReport {
    double intensity = 0.0;          // sup ||mu(Q_I)|| / A(Q_I)
    double tophalf_intensity = 0.0;  // alpha = sup ||mu(T_I)|| / A(T_I)
    DyadicIndex argmax_square;
    DyadicIndex argmax_tophalf;
    int depth = 0;
    double residual_mass_norm = 0.0;
    std::vector<double> level_square_ratio;   // max over each level
    std::vector<double> level_tophalf_ratio;
};

inline IntensityReport intensity_from(const CellMasses& cm, bool with_tail) {
    const auto partition = tophalf_partition(cm.depth);
    const auto squares = square_masses(cm, with_tail);
    IntensityReport r;
    r.depth = cm.depth;
    r.residual_mass_norm = op_norm(residual_mass(cm));
    r.level_square_ratio.assign(static_cast<std::size_t>(cm.depth) + 1, 0.0);
    r.level_tophalf_ratio.assign(static_cast<std::size_t>(cm.depth) + 1, 0.0);
    bool first = true;
    for (std::size_t i = 0; i < partition.cells.size(); ++i) {
        const auto idx = partition.cells[i];
        const double qs = op_norm(squares[i]) / carleson_square_area(idx.level);
        const double ts = op_norm(cm.tophalf[i]) / tophalf_area(idx.level);
        auto& lq = r.level_square_ratio[static_cast<std::size_t>(idx.level)];
        auto& lt = r.level_tophalf_ratio[static_cast<std::size_t>(idx.level)];
        lq = std::max(lq, qs);
        lt = std::max(lt, ts);
        if (first || qs > r.intensity) {
            r.intensity = qs;
            r.argmax_square = idx;
        }
        if (first || ts > r.tophalf_intensity) {
            r.tophalf_intensity = ts;
            r.argmax_tophalf = idx;
        }
        first = false;
    }
    return r;
}

inline IntensityReport carleson_intensity(const MatrixMeasure& mu, int max_depth, double tol = kDefaultTol,
                                          Execution exec = {}) {
    return intensity_from(cell_masses(mu, max_depth, tol, exec), true);
}

// Seeded random measures -------------------------------------------------------

struct RandomMeasureSpec {
    int dim = 1;
    int atom_count = 4;
    double annulus_inner = 0.0;
    double annulus_outer = 0.95;
    bool with_density = true;
    double density_exponent = 0.0;  // profile (1 - |z|)^s
    double density_scale = 1.0;
};

// Atoms are area-uniform in the annulus with masses R R* / d for Gaussian R; the
// density is (1 - |z|)^s times a seeded PSD matrix.
template <class Rng>
MatrixMeasure random_measure(const RandomMeasureSpec& spec, Rng& rng) {
    if (!(spec.annulus_inner >= 0.0 && spec.annulus_inner < spec.annulus_outer && spec.annulus_outer < 1.0))
        throw InvalidArgument("annulus must satisfy 0 <= inner < outer < 1");
    MatrixMeasure mu(spec.dim);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double a2 = spec.annulus_inner * spec.annulus_inner;
    const double b2 = spec.annulus_outer * spec.annulus_outer;
    for (int i = 0; i < spec.atom_count; ++i) {
        const double rho = std::sqrt(a2 + (b2 - a2) * unif(rng));
        const double theta = kTwoPi * unif(rng);
        const Matrix mass = random_psd(spec.dim, rng) / static_cast<double>(spec.dim);
        mu.add_atom(std::polar(rho, theta), mass);
    }
    if (spec.with_density) {
        const Matrix p = spec.density_scale * random_psd(spec.dim, rng) / static_cast<double>(spec.dim);
        mu.set_density(MatrixField::radial_power(spec.density_exponent, p));
    }
    return mu;
}

}  // namespace carleson
