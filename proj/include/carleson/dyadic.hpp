#pragma once

// The dyadic embedding operator B f = sum_I (avg_{T_I} f) chi_{T_I}, truncated to
// the top halves of level <= N.
//
// B_N maps into step functions on the top-half partition, so ||B_N f||^2 in
// L^2(mu) is sum_I <mu(T_I) a_I, a_I> with a_I the cell averages. In the scaled
// coordinates y_I = A(T_I)^{1/2} a_I that form is block diagonal with blocks
// mu(T_I) / A(T_I), hence ||B_N||^2 = max_I ||mu(T_I)|| / A(T_I). The norm is
// computed both from that identity and by power iteration on the assembled form.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "carleson/geometry.hpp"
#include "carleson/linalg.hpp"
#include "carleson/measures.hpp"
#include "carleson/parallel.hpp"
#include "carleson/quadrature.hpp"

namespace carleson {

// f = sum_I values[I] chi_{T_I} over the cells of level <= depth.
struct CellFunction {
    int dim = 1;
    int depth = 0;
    std::vector<Vector> values;  // partition_slot order

    static CellFunction zero(int dim, int depth) {
        CellFunction f{dim, depth, {}};
        f.values.assign(tophalf_partition(depth).cells.size(), Vector::Zero(dim));
        return f;
    }

    static CellFunction indicator(int dim, int depth, DyadicIndex cell, const Vector& e) {
        if (cell.level > depth) throw InvalidArgument("cell is deeper than the function's depth");
        CellFunction f = zero(dim, depth);
        f.values[partition_slot(cell)] = e;
        return f;
    }

    const Vector& at(DyadicIndex idx) const { return values.at(partition_slot(idx)); }

    // int ||f||^2 dA
    double norm_squared_area() const {
        const auto partition = tophalf_partition(depth);
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            s += tophalf_area(partition.cells[i].level) * values[i].squaredNorm();
        return s;
    }
};

struct VectorField {
    int dim = 1;
    std::function<Vector(const DiscPoint&)> fn;
    double singular_exponent = 0.0;
};

// Cell averages of f over every top half of level <= depth.
inline CellFunction apply_B(const VectorField& f, int depth, double tol = kDefaultTol, Execution exec = {}) {
    const auto partition = tophalf_partition(depth);
    CellFunction out{f.dim, depth, std::vector<Vector>(partition.cells.size())};
    parallel_for(partition.cells.size(), exec, [&](std::size_t i) {
        const TopHalf cell{partition.cells[i]};
        const auto r = integrate_general([&](const DiscPoint& p) -> Matrix { return f.fn(p); }, f.dim, 1, cell,
                                         MeasureSpec::plain(), tol, f.singular_exponent);
        out.values[i] = r.value.col(0) / region_area(cell);
    });
    return out;
}

// B fixes step functions on the partition; cells deeper than `depth` are dropped.
inline CellFunction apply_B(const CellFunction& f, int depth) {
    CellFunction out = CellFunction::zero(f.dim, depth);
    for (std::size_t i = 0; i < out.values.size() && i < f.values.size(); ++i) out.values[i] = f.values[i];
    return out;
}

// sum_I <mu(T_I) a_I, a_I>
inline double norm_squared_mu(const CellFunction& f, const CellMasses& cm) {
    if (f.depth > cm.depth) throw InvalidArgument("function is finer than the measure resolution");
    if (f.dim != cm.dim) throw InvalidArgument("dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) s += quadratic_form(cm.tophalf[i], f.values[i]);
    return s;
}

inline double norm_squared_mu(const CellFunction& f, const MatrixMeasure& mu, double tol = kDefaultTol) {
    return norm_squared_mu(f, cell_masses(mu, f.depth, tol));
}

// Power iteration -----------------------------------------------------------------

struct PowerIterationOptions {
    double tol = 1e-10;        // relative Rayleigh-quotient increment
    int max_iterations = 10000;
    std::uint64_t seed = 0x5eed;
};

struct PowerIterationResult {
    double eigenvalue = 0.0;
    int iterations = 0;
};

// Largest eigenvalue of the block-diagonal PSD form blockdiag(blocks).
inline PowerIterationResult block_power_iteration(const std::vector<Matrix>& blocks,
                                                  const PowerIterationOptions& opt = {}) {
    std::size_t n = 0;
    for (const auto& b : blocks) n += static_cast<std::size_t>(b.rows());
    if (n == 0) return {};
    std::mt19937_64 rng(opt.seed);
    Vector x = complex_gaussian_matrix(static_cast<int>(n), 1, rng).col(0);
    x /= x.norm();
    auto apply = [&](const Vector& v) {
        Vector out(v.size());
        Eigen::Index offset = 0;
        for (const auto& b : blocks) {
            out.segment(offset, b.rows()).noalias() = b * v.segment(offset, b.rows());
            offset += b.rows();
        }
        return out;
    };
    double theta = 0.0;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        Vector y = apply(x);
        const double next = x.dot(y).real();
        const double ny = y.norm();
        if (ny == 0.0) return {0.0, it};
        x = y / ny;
        if (it > 1 && std::abs(next - theta) <= opt.tol * std::abs(next)) return {next, it};
        theta = next;
    }
    throw ConvergenceFailure("power iteration did not converge within the iteration budget", theta);
}

struct DyadicNorm {
    double closed_form = 0.0;      // sqrt(max ||mu(T_I)|| / A(T_I))
    double power_iteration = 0.0;  // sqrt of the largest eigenvalue of the assembled form
    DyadicIndex argmax;
    int iterations = 0;
};

inline DyadicNorm dyadic_norm(const CellMasses& cm, const PowerIterationOptions& opt = {}) {
    const auto partition = tophalf_partition(cm.depth);
    std::vector<Matrix> blocks(cm.tophalf.size());
    DyadicNorm r;
    double best = -1.0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        blocks[i] = cm.tophalf[i] / tophalf_area(partition.cells[i].level);
        const double v = op_norm(blocks[i]);
        if (v > best) {
            best = v;
            r.argmax = partition.cells[i];
        }
    }
    r.closed_form = std::sqrt(std::max(best, 0.0));
    const auto pi = block_power_iteration(blocks, opt);
    r.power_iteration = std::sqrt(std::max(pi.eigenvalue, 0.0));
    r.iterations = pi.iterations;
    return r;
}

inline DyadicNorm dyadic_norm(const MatrixMeasure& mu, int depth, double tol = kDefaultTol,
                              const PowerIterationOptions& opt = {}, Execution exec = {}) {
    return dyadic_norm(cell_masses(mu, depth, tol, exec), opt);
}

// Equivalence report --------------------------------------------------------------

// B_N only sees the truncated measure mu_N = mu restricted to the partition, so the
// two-sided bracket intensity(mu_N) <= ||B_N||^2 <= 4 intensity(mu_N) is exact at
// every depth. The intensity of the full measure is reported alongside.
struct EquivalenceReport {
    int depth = 0;
    double norm_b_squared = 0.0;        // closed form
    double norm_b_squared_power = 0.0;  // power iteration
    double alpha = 0.0;
    double intensity = 0.0;             // of mu_N
    double intensity_full = 0.0;        // of mu
    double ratio_upper = 0.0;           // norm_b_squared / intensity
    double covering_slack = 0.0;        // min_I alpha A(Q_I) + ||tail_I|| - ||mu(Q_I)||, level <= 4
    double residual_mass_norm = 0.0;
    DyadicIndex argmax_tophalf;
    DyadicIndex argmax_square;
    std::vector<double> level_tophalf_ratio;
    std::vector<double> level_square_ratio;
};

inline EquivalenceReport equivalence_report(const CellMasses& cm, const PowerIterationOptions& opt = {}) {
    if (cm.depth < 1) throw InvalidArgument("equivalence report needs depth >= 1");
    const auto norm = dyadic_norm(cm, opt);
    const auto truncated = intensity_from(cm, false);
    const auto full = intensity_from(cm, true);
    if (!(truncated.intensity > 0.0)) throw InvalidArgument("measure has no mass on the top-half partition");

    EquivalenceReport r;
    r.depth = cm.depth;
    r.norm_b_squared = norm.closed_form * norm.closed_form;
    r.norm_b_squared_power = norm.power_iteration * norm.power_iteration;
    r.alpha = truncated.tophalf_intensity;
    r.intensity = truncated.intensity;
    r.intensity_full = full.intensity;
    r.ratio_upper = r.norm_b_squared / r.intensity;
    r.residual_mass_norm = full.residual_mass_norm;
    r.argmax_tophalf = truncated.argmax_tophalf;
    r.argmax_square = truncated.argmax_square;
    r.level_tophalf_ratio = truncated.level_tophalf_ratio;
    r.level_square_ratio = truncated.level_square_ratio;

    const auto with_tail = square_masses(cm, true);
    const auto without_tail = square_masses(cm, false);
    const int top = std::min(4, cm.depth);
    bool first = true;
    for (int n = 0; n <= top; ++n)
        for (std::int64_t k = 0; k < (std::int64_t{1} << n); ++k) {
            const auto slot = partition_slot({n, k});
            const double tail = op_norm(with_tail[slot] - without_tail[slot]);
            const double slack = r.alpha * carleson_square_area(n) + tail - op_norm(with_tail[slot]);
            if (first || slack < r.covering_slack) r.covering_slack = slack;
            first = false;
        }
    return r;
}

inline EquivalenceReport equivalence_report(const MatrixMeasure& mu, int depth, double tol = kDefaultTol,
                                            const PowerIterationOptions& opt = {}, Execution exec = {}) {
    return equivalence_report(cell_masses(mu, depth, tol, exec), opt);
}

// Dimension sweep -----------------------------------------------------------------

enum class SweepTemplate {
    IdentityDensity,  // I dA in every dimension
    OriginAtom,       // atom at 0
    DeepAtom,         // atom at 1 - 2^-5
    RandomScalar,     // seeded scalar atoms + scalar radial density
    Mixed,            // seeded genuinely matrix-valued measure in each dimension
};

struct SweepRow {
    int dim = 1;
    double norm_b_squared = 0.0;
    double intensity = 0.0;
    double ratio = 0.0;
};

// Scalar templates are lifted to dimension d as mu_s(E) U diag(1, p_2, ..., p_d) U*
// with seeded unitary U and p_i in [0, 1), so every operator norm equals the
// scalar value.
inline MatrixMeasure sweep_measure(SweepTemplate t, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(d)));
    if (t == SweepTemplate::IdentityDensity) return MatrixMeasure::identity_density(d);
    if (t == SweepTemplate::Mixed) {
        RandomMeasureSpec spec;
        spec.dim = d;
        spec.atom_count = 6;
        spec.annulus_outer = 0.97;
        spec.density_exponent = -0.25;
        return random_measure(spec, rng);
    }

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const Matrix u = random_unitary(d, rng);
    Eigen::VectorXd diag(d);
    diag(0) = 1.0;
    for (int i = 1; i < d; ++i) diag(i) = unif(rng) * 0.999;
    const Matrix lift = hermitian_part(u * diag.cast<Complex>().asDiagonal() * u.adjoint());

    MatrixMeasure mu(d);
    switch (t) {
        case SweepTemplate::OriginAtom:
            mu.add_atom(0.0, lift);
            break;
        case SweepTemplate::DeepAtom:
            mu.add_atom(1.0 - std::ldexp(1.0, -5), lift);
            break;
        case SweepTemplate::RandomScalar: {
            // The scalar part depends on the seed only, not on d.
            std::mt19937_64 srng(seed);
            std::uniform_real_distribution<double> su(0.0, 1.0);
            for (int i = 0; i < 5; ++i) {
                const double rho = std::sqrt(0.95 * 0.95 * su(srng));
                const double theta = kTwoPi * su(srng);
                const double mass = 0.05 + su(srng);
                mu.add_atom(std::polar(rho, theta), mass * lift);
            }
            mu.set_density(MatrixField::radial_power(-0.25, (0.5 + su(srng)) * lift));
            break;
        }
        default:
            break;
    }
    return mu;
}

inline std::vector<SweepRow> dimension_sweep(SweepTemplate t, const std::vector<int>& dims, int depth,
                                             std::uint64_t seed, double tol = kDefaultTol, Execution exec = {}) {
    if (dims.empty()) throw InvalidArgument("dimension list is empty");
    std::vector<SweepRow> rows(dims.size());
    parallel_for(dims.size(), exec, [&](std::size_t i) {
        if (dims[i] < 1) throw InvalidArgument("dimensions must be positive");
        const auto cm = cell_masses(sweep_measure(t, dims[i], seed), depth, tol);
        const auto rep = equivalence_report(cm);
        rows[i] = {dims[i], rep.norm_b_squared, rep.intensity, rep.ratio_upper};
    });
    return rows;
}

}  // namespace carleson
