#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rckoopman/linalg.hpp"

using namespace rck;

namespace {

Matrix random_matrix(Index rows, Index cols, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = dist(gen);
    return m;
}

double rel(const Matrix& a, const Matrix& b) {
    const double scale = std::max(1.0, b.norm());
    return (a - b).norm() / scale;
}

void expect_moore_penrose(const Matrix& a, const Matrix& p, double tol) {
    EXPECT_LT(rel(a * p * a, a), tol);
    EXPECT_LT(rel(p * a * p, p), tol);
    EXPECT_LT(rel((a * p).transpose(), a * p), tol);
    EXPECT_LT(rel((p * a).transpose(), p * a), tol);
}

}  // namespace

TEST(Pinv, TallFullRankMatchesNormalEquations) {
    Matrix a(3, 2);
    a << 1, 2, 3, 4, 5, 6;
    // (A^T A)^{-1} A^T worked out by hand with fractions.
    Matrix expected(2, 3);
    expected << -4.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0, 13.0 / 12.0, 1.0 / 3.0, -5.0 / 12.0;
    EXPECT_LT((pinv(a) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pinv, RankOneSymmetric) {
    Matrix a(2, 2);
    a << 1, 2, 2, 4;
    // A = v v^T with v = (1, 2): pinv = A / |v|^4 = A / 25.
    EXPECT_LT((pinv(a) - a / 25.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Pinv, ZeroMatrixGivesZeroTranspose) {
    const Matrix p = pinv(Matrix::Zero(3, 5));
    EXPECT_EQ(p.rows(), 5);
    EXPECT_EQ(p.cols(), 3);
    EXPECT_EQ(p.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Pinv, EmptyIsRejected) { EXPECT_THROW(pinv(Matrix(0, 3)), std::invalid_argument); }

TEST(Pinv, MoorePenroseConditionsOnRandomShapes) {
    const std::pair<Index, Index> shapes[] = {{1, 1}, {5, 3}, {3, 5}, {40, 40}, {80, 17}, {17, 80}};
    unsigned seed = 11;
    for (auto [r, c] : shapes) {
        const Matrix a = random_matrix(r, c, seed++);
        expect_moore_penrose(a, pinv(a), 1e-8);
    }
}

TEST(Pinv, MoorePenroseConditionsOnRankDeficient) {
    const Matrix a = random_matrix(30, 4, 3) * random_matrix(4, 25, 4);
    const Matrix p = pinv(a);
    expect_moore_penrose(a, p, 1e-8);
    EXPECT_EQ(numerical_rank(a), 4);
}

TEST(Lstsq, AgreesWithPinvProduct) {
    for (Index n : {3, 20, 200}) {
        const Matrix a = random_matrix(n + 7, n, static_cast<unsigned>(n));
        const Matrix b = random_matrix(n + 7, 3, static_cast<unsigned>(n) + 1);
        EXPECT_LT(rel(lstsq(a, b), pinv(a) * b), 1e-10) << "n = " << n;
    }
}

TEST(Lstsq, ExactSystemIsSolved) {
    const Matrix a = random_matrix(6, 6, 21);
    const Matrix x = random_matrix(6, 2, 22);
    EXPECT_LT(rel(lstsq(a, a * x), x), 1e-10);
}

TEST(Rank, CutoffFollowsRelativeTolerance) {
    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 1.0, 1e-6, 1e-20;
    EXPECT_EQ(numerical_rank(d), 2);
    EXPECT_EQ(numerical_rank(d, 1e-3), 1);
    const Vector s = singular_values(d);
    EXPECT_DOUBLE_EQ(s(0), 1.0);
    EXPECT_DOUBLE_EQ(s(1), 1e-6);
}

TEST(Eig, FibonacciMatrixGivesGoldenRatio) {
    Matrix m(2, 2);
    m << 1, 1, 1, 0;
    const EigenDecomposition e = eig(m);
    EXPECT_NEAR(e.values(0).real(), 1.618033988749895, 1e-14);
    EXPECT_NEAR(e.values(1).real(), -0.6180339887498949, 1e-14);
    EXPECT_EQ(e.values(0).imag(), 0.0);
}

TEST(Eig, ComplexPairOrderedByImaginaryPart) {
    Matrix m(2, 2);
    m << 0.9, -0.2, 0.1, 0.8;
    // Trace 1.7, determinant 0.74: 0.85 +- i sqrt(0.74 - 0.7225).
    const CVector v = eigenvalues(m);
    EXPECT_NEAR(v(0).real(), 0.85, 1e-14);
    EXPECT_NEAR(v(0).imag(), std::sqrt(0.0175), 1e-14);
    EXPECT_NEAR(v(1).imag(), -std::sqrt(0.0175), 1e-14);
}

TEST(Eig, LeftAndRightResiduals) {
    const Matrix m = random_matrix(30, 30, 5);
    const EigenDecomposition e = eig(m);
    const CMatrix mc = m.cast<std::complex<double>>();
    for (Index i = 0; i < 30; ++i) {
        const auto lambda = e.values(i);
        EXPECT_LT((mc * e.right.col(i) - lambda * e.right.col(i)).norm(), 1e-10);
        EXPECT_LT((e.left.col(i).transpose() * mc - lambda * e.left.col(i).transpose()).norm(), 1e-10);
        EXPECT_NEAR(e.right.col(i).norm(), 1.0, 1e-12);
        EXPECT_NEAR(e.left.col(i).norm(), 1.0, 1e-12);
    }
    for (Index i = 0; i + 1 < 30; ++i) EXPECT_GE(std::abs(e.values(i)), std::abs(e.values(i + 1)));
}

TEST(Eig, RejectsNonSquareAndNonFinite) {
    EXPECT_THROW(eig(Matrix::Zero(2, 3)), std::invalid_argument);
    Matrix m = Matrix::Identity(2, 2);
    m(0, 1) = std::nan("");
    EXPECT_THROW(eigenvalues(m), std::invalid_argument);
}

TEST(SpectralRadius, MatchesPowerIteration) {
    // Symmetric so that power iteration converges to |lambda|_max.
    const Matrix b = random_matrix(50, 50, 8);
    const Matrix m = b + b.transpose();
    Vector v = Vector::Ones(50);
    double estimate = 0.0;
    for (int i = 0; i < 3000; ++i) {
        Vector w = m * (m * v);
        estimate = std::sqrt(w.norm() / v.norm());
        v = w.normalized();
    }
    EXPECT_NEAR(spectral_radius(m), estimate, 1e-8 * estimate);
    EXPECT_EQ(spectral_radius(Matrix::Zero(4, 4)), 0.0);
}

TEST(Vec, ColumnMajorOrder) {
    Matrix m(2, 2);
    m << 1, 2, 3, 4;
    const Matrix v = vec(m);
    ASSERT_EQ(v.rows(), 4);
    EXPECT_EQ(v(0), 1);
    EXPECT_EQ(v(1), 3);
    EXPECT_EQ(v(2), 2);
    EXPECT_EQ(v(3), 4);
    EXPECT_EQ(unvec(v, 2, 2), m);
}

TEST(Kron, SmallExampleByHand) {
    Matrix a(1, 2), b(2, 1);
    a << 1, 2;
    b << 3, 4;
    Matrix expected(2, 2);
    expected << 3, 6, 4, 8;
    EXPECT_EQ(kron(a, b), expected);
}

TEST(Kron, VecIdentity) {
    // vec(A X B) = (B^T kron A) vec(X)
    const Matrix a = random_matrix(4, 3, 31), x = random_matrix(3, 5, 32), b = random_matrix(5, 2, 33);
    const Matrix lhs = vec(a * x * b);
    const Matrix rhs = kron(b.transpose(), a) * vec(x);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kron, MixedProductProperty) {
    const Matrix a = random_matrix(2, 3, 41), b = random_matrix(3, 2, 42);
    const Matrix c = random_matrix(3, 2, 43), d = random_matrix(2, 4, 44);
    EXPECT_LT((kron(a, b) * kron(c, d) - kron(a * c, b * d)).cwiseAbs().maxCoeff(), 1e-12);
}
