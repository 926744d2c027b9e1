#pragma once

// Hermitian / PSD matrix utilities shared by every module. All matrices are
// dense complex; the value space C^d is small (d <= 64 in practice).

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "carleson/errors.hpp"

namespace carleson {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kNotPsdFloor = 1e-10;     // relative, negative eigenvalues
inline constexpr double kDegenerateFloor = 1e-12; // relative, smallest eigenvalue

inline Matrix hermitian_part(const Matrix& m) {
    return 0.5 * (m + m.adjoint());
}

inline double max_abs_entry(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Eigenvalues in increasing order.
inline Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

// Largest singular value. Hermitian input takes the eigenvalue path.
inline double op_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, max_abs_entry(m))) {
        const auto ev = hermitian_eigenvalues(m);
        return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

namespace detail {

inline Eigen::SelfAdjointEigenSolver<Matrix> checked_psd_eigen(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
    if (es.info() != Eigen::Success) throw NotPositiveSemidefinite("eigendecomposition failed");
    const auto& ev = es.eigenvalues();
    const double scale = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    if (ev(0) < -kNotPsdFloor * std::max(scale, 1e-300))
        throw NotPositiveSemidefinite("matrix has eigenvalue " + std::to_string(ev(0)) +
                                      " below the PSD floor");
    return es;
}

}  // namespace detail

inline void require_psd(const Matrix& m) {
    if (m.size() > 0) detail::checked_psd_eigen(m);
}

inline Matrix psd_sqrt(const Matrix& m) {
    const auto es = detail::checked_psd_eigen(m);
    const Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix psd_inv_sqrt(const Matrix& m) {
    const auto es = detail::checked_psd_eigen(m);
    const auto& ev = es.eigenvalues();
    const double top = ev(ev.size() - 1);
    if (!(top > 0.0) || ev(0) < kDegenerateFloor * top)
        throw DegenerateWeight("matrix is singular to relative precision " +
                               std::to_string(kDegenerateFloor));
    const Eigen::VectorXd s = ev.cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix psd_inverse(const Matrix& m) {
    const Matrix h = psd_inv_sqrt(m);
    return h * h;
}

// max over e != 0 of <A e, e> / <B e, e> for Hermitian A and positive definite B.
inline double generalized_max_eigenvalue(const Matrix& a, const Matrix& b) {
    const Matrix h = psd_inv_sqrt(b);
    const auto ev = hermitian_eigenvalues(h * hermitian_part(a) * h);
    return ev(ev.size() - 1);
}

inline double quadratic_form(const Matrix& m, const Vector& v) {
    return (v.adjoint() * m * v)(0, 0).real();
}

// Seeded random matrices. std::normal_distribution is deterministic for a fixed
// standard library, which is what reproducibility of reports relies on.
template <class Rng>
Matrix complex_gaussian_matrix(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            m(i, j) = Complex(re, im) / std::sqrt(2.0);
        }
    return m;
}

template <class Rng>
Matrix random_psd(int d, Rng& rng) {
    const Matrix r = complex_gaussian_matrix(d, d, rng);
    return hermitian_part(r * r.adjoint());
}

// Haar-distributed unitary: QR of a Gaussian matrix with the phases of R's
// diagonal absorbed into Q.
template <class Rng>
Matrix random_unitary(int d, Rng& rng) {
    const Matrix g = complex_gaussian_matrix(d, d, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        const double a = std::abs(r(j, j));
        if (a > 0.0) q.col(j) *= r(j, j) / a;
    }
    return q;
}

template <class Rng>
Vector random_unit_vector(int d, Rng& rng) {
    Vector v = complex_gaussian_matrix(d, 1, rng).col(0);
    return v / v.norm();
}

}  // namespace carleson
