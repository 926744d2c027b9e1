#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "carleson/weights.hpp"

using namespace carleson;

namespace {

Matrix eye(int d) { return Matrix::Identity(d, d); }

// int_{1-h}^1 (1-r)^c r dr
double radial_moment(double c, double h) {
    return std::pow(h, c + 1) / (c + 1) - std::pow(h, c + 2) / (c + 2);
}

// B_2 value of the square of size h for W = (1-|z|)^a, against dA_eta.
double radial_b2_oracle(double a, double eta, double h) {
    const double m = radial_moment(eta, h);
    return std::sqrt(radial_moment(eta + a, h) / m * radial_moment(eta - a, h) / m);
}

}  // namespace

TEST(Weight, FamiliesAndInverses) {
    std::mt19937_64 rng(3);
    const Matrix u = random_unitary(3, rng);
    const auto w = OperatorWeight::diagonal_powers({0.5, -0.3, 0.2}, u);
    const DiscPoint p(Complex(0.3, 0.6));
    EXPECT_LT((w.at(p) * w.inverse_at(p) - eye(3)).cwiseAbs().maxCoeff(), 1e-12);
    const auto s = OperatorWeight::scalar_power(0.7, random_psd(2, rng));
    EXPECT_LT((s.at(p) * s.inverse_at(p) - eye(2)).cwiseAbs().maxCoeff(), 1e-10);
    const auto b = OperatorWeight::block({w, s, OperatorWeight::identity(1)});
    EXPECT_EQ(b.dim(), 6);
    EXPECT_LT((b.at(p) * b.inverse_at(p) - eye(6)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_TRUE(w.in_b2_class(0.0));
    EXPECT_FALSE(OperatorWeight::scalar_power(1.2, eye(1)).in_b2_class(0.0));
    EXPECT_TRUE(OperatorWeight::scalar_power(1.2, eye(1)).in_b2_class(0.5));
    Matrix sing = eye(2);
    sing(1, 1) = 0.0;
    EXPECT_THROW(OperatorWeight::scalar_power(0.5, sing), DegenerateWeight);
    EXPECT_THROW(OperatorWeight::diagonal_powers({0.1, 0.2}, 2.0 * eye(2)), InvalidArgument);
}

TEST(B2, IdentityIsOne) {
    const auto r = b2_constant(OperatorWeight::identity(2), 0.0, SquareGrid::standard(4));
    EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(B2, RadialPowerMatchesOracle) {
    for (double eta : {0.0, 1.0}) {
        for (double a : {0.5, -0.5, 0.99}) {
            const auto grid = SquareGrid::standard(8);
            const auto r = b2_constant(OperatorWeight::scalar_power(a, eye(1)), eta, grid);
            double expected = 0.0;
            for (std::size_t i = 0; i < grid.rows.size(); ++i) {
                const double o = radial_b2_oracle(a, eta, grid.rows[i].h);
                EXPECT_NEAR(r.row_value[i], o, 1e-7 * o) << "a=" << a << " h=" << grid.rows[i].h;
                expected = std::max(expected, o);
            }
            EXPECT_NEAR(r.value, expected, 1e-6 * expected);
        }
    }
}

TEST(B2, SmallSquareLimit) {
    const auto r = b2_constant(OperatorWeight::scalar_power(0.5, eye(1)), 0.0, SquareGrid::standard(8));
    EXPECT_GE(r.value, 1.0 / std::sqrt(1.0 - 0.25) - 1e-3);
    EXPECT_TRUE(std::isfinite(r.value));
    // Deepest row approaches (1 - a^2)^{-1/2}.
    EXPECT_NEAR(r.row_value.back(), 1.0 / std::sqrt(0.75), 1e-3);
}

TEST(B2, AtLeastOneAndUnitaryInvariant) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-0.9, 0.9);
    for (int t = 0; t < 3; ++t) {
        const Matrix u = random_unitary(3, rng);
        const auto w = OperatorWeight::diagonal_powers({unif(rng), unif(rng), unif(rng)}, u);
        const auto grid = SquareGrid::standard(3);
        const auto r = b2_constant(w, 0.0, grid);
        EXPECT_GE(r.value, 1.0 - 1e-9);
        const auto v = random_unitary(3, rng);
        const auto rc = b2_constant(w.conjugated(v), 0.0, grid);
        EXPECT_NEAR(r.value, rc.value, 1e-10 * r.value);
    }
}

TEST(B2, ParallelMatchesSerial) {
    std::mt19937_64 rng(6);
    const auto w = OperatorWeight::diagonal_powers({0.4, -0.6}, random_unitary(2, rng));
    const auto grid = SquareGrid::standard(4);
    const auto a = b2_constant(w, 0.5, grid, kDefaultTol, {1});
    const auto b = b2_constant(w, 0.5, grid, kDefaultTol, {4});
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.row_value, b.row_value);
}

TEST(AveragedWeight, Examples) {
    EXPECT_LT((averaged_weight(OperatorWeight::identity(2), Complex(0.4, -0.7), 0.3) - eye(2)).cwiseAbs().maxCoeff(),
              1e-12);
    const Matrix m = averaged_weight(OperatorWeight::scalar_power(1.0, eye(2)), 0.0, 0.5);
    EXPECT_LT((m - (2.0 / 3.0) * eye(2)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(AveragedWeight, ComparabilityIndependentOfDepth) {
    std::mt19937_64 rng(12);
    const auto w = OperatorWeight::diagonal_powers({0.5, -0.5}, random_unitary(2, rng));
    std::vector<Complex> shallow, deep;
    for (int k = 0; k < 5; ++k) {
        shallow.push_back(std::polar(0.5, 1.1 * k));
        deep.push_back(std::polar(1.0 - std::ldexp(1.0, -10), 1.1 * k));
    }
    const auto a = averaged_weight_comparability(w, 0.5, shallow, 20, 1);
    const auto b = averaged_weight_comparability(w, 0.5, deep, 20, 1);
    EXPECT_EQ(a.pairs, 100u);
    EXPECT_GT(a.k1, 0.2);
    EXPECT_LT(a.k2, 5.0);
    EXPECT_GT(b.k1, 0.2);
    EXPECT_LT(b.k2, 5.0);
    // Same relative geometry at every depth, so the brackets nearly coincide.
    EXPECT_NEAR(std::log(a.k2 / a.k1), std::log(b.k2 / b.k1), 0.5);
}
