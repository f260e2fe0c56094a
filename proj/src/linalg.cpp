#include "rckoopman/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <lapacke.h>

#include "rckoopman/kernels.hpp"

namespace rck {
namespace {

struct Svd {
    Matrix u;
    Vector s;
    Matrix v;
};

Svd thin_svd(Matrix a) {
    const auto m = static_cast<lapack_int>(a.rows()), n = static_cast<lapack_int>(a.cols());
    const lapack_int k = std::min(m, n);
    Svd out{Matrix(m, k), Vector(k), Matrix(k, n)};
    Matrix copy = a;
    lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, a.data(), m, out.s.data(),
                                     out.u.data(), m, out.v.data(), k);
    if (info != 0) {
        // gesdd can fail to converge (or to get its larger workspace) where
        // the QR-iteration driver still succeeds.
        std::vector<double> superb(static_cast<std::size_t>(std::max<lapack_int>(k, 2)));
        info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n, copy.data(), m, out.s.data(), out.u.data(), m,
                              out.v.data(), k, superb.data());
    }
    if (info != 0) throw NumericalError("SVD failed (LAPACK info " + std::to_string(info) + ")");
    out.v.transposeInPlace();
    return out;
}

double resolve_tol(double rel_tol, Index rows, Index cols) {
    return rel_tol < 0.0 ? default_rel_tol(rows, cols) : rel_tol;
}

Index rank_from(const Vector& s, double rel_tol) {
    if (s.size() == 0 || s(0) == 0.0) return 0;
    const double cutoff = rel_tol * s(0);
    Index r = 0;
    while (r < s.size() && s(r) > cutoff) ++r;
    return r;
}

void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols())
        throw std::invalid_argument(std::string(what) + ": matrix must be square");
}

std::vector<Index> sorted_order(const CVector& values) {
    std::vector<Index> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Index a, Index b) { return eigen_order(values(a), values(b)); });
    return idx;
}

}  // namespace

double default_rel_tol(Index rows, Index cols) {
    return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

void require_finite(const Matrix& m, const std::string& what) {
    if (!m.allFinite()) throw std::invalid_argument(what + ": non-finite entry");
}

Matrix pinv(const Matrix& m, double rel_tol) {
    if (m.size() == 0) throw std::invalid_argument("pinv: empty matrix");
    const Svd svd = thin_svd(m);
    const Index r = rank_from(svd.s, resolve_tol(rel_tol, m.rows(), m.cols()));
    if (r == 0) return Matrix::Zero(m.cols(), m.rows());
    return svd.v.leftCols(r) * svd.s.head(r).cwiseInverse().asDiagonal() *
           svd.u.leftCols(r).transpose();
}

Matrix lstsq(const Matrix& a, const Matrix& b, double rel_tol) {
    if (a.rows() != b.rows()) throw std::invalid_argument("lstsq: row count mismatch");
    if (a.size() == 0) return Matrix::Zero(a.cols(), b.cols());
    const Svd svd = thin_svd(a);
    const Index r = rank_from(svd.s, resolve_tol(rel_tol, a.rows(), a.cols()));
    if (r == 0) return Matrix::Zero(a.cols(), b.cols());
    const Matrix ub = svd.u.leftCols(r).transpose() * b;
    return svd.v.leftCols(r) * (svd.s.head(r).cwiseInverse().asDiagonal() * ub);
}

Index numerical_rank(const Matrix& m, double rel_tol) {
    if (m.size() == 0) return 0;
    return rank_from(singular_values(m), resolve_tol(rel_tol, m.rows(), m.cols()));
}

Vector singular_values(const Matrix& m) {
    Matrix a = m;
    const auto rows = static_cast<lapack_int>(a.rows()), cols = static_cast<lapack_int>(a.cols());
    Vector s(std::min(rows, cols));
    const lapack_int info =
        LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', rows, cols, a.data(), rows, s.data(), nullptr, 1, nullptr, 1);
    if (info != 0) throw NumericalError("SVD did not converge");
    return s;
}

bool eigen_order(const std::complex<double>& x, const std::complex<double>& y) {
    const double ax = std::abs(x), ay = std::abs(y);
    if (ax != ay) return ax > ay;
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
}

namespace {

struct Geev {
    CVector values;
    CMatrix left;
    CMatrix right;
};

// Unpacks LAPACK's real storage of complex conjugate eigenvector pairs.
CMatrix unpack_vectors(const Vector& wi, const Matrix& v) {
    const Index n = v.rows();
    CMatrix out(n, n);
    for (Index j = 0; j < n; ++j) {
        if (wi(j) == 0.0) {
            out.col(j) = v.col(j).cast<std::complex<double>>();
        } else {
            const std::complex<double> i1(0.0, 1.0);
            out.col(j) = v.col(j).cast<std::complex<double>>() + i1 * v.col(j + 1);
            out.col(j + 1) = out.col(j).conjugate();
            ++j;
        }
    }
    return out;
}

Geev geev(const Matrix& m, bool vectors) {
    Matrix a = m;
    const auto n = static_cast<lapack_int>(a.rows());
    Vector wr(n), wi(n);
    Matrix vl(vectors ? n : 1, vectors ? n : 1), vr(vl.rows(), vl.cols());
    const char job = vectors ? 'V' : 'N';
    const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, job, job, n, a.data(), n, wr.data(), wi.data(),
                                          vl.data(), static_cast<lapack_int>(vl.rows()), vr.data(),
                                          static_cast<lapack_int>(vr.rows()));
    if (info != 0) throw NumericalError("eig: no convergence");
    Geev out;
    out.values.resize(n);
    for (Index j = 0; j < n; ++j) out.values(j) = {wr(j), wi(j)};
    if (vectors) {
        out.right = unpack_vectors(wi, vr);
        // geev returns u with u^H A = lambda u^H; we want w^T A = lambda w^T.
        out.left = unpack_vectors(wi, vl).conjugate();
    }
    return out;
}

}  // namespace

EigenDecomposition eig(const Matrix& m) {
    require_square(m, "eig");
    require_finite(m, "eig");
    EigenDecomposition out;
    if (m.rows() == 0) return out;
    const Geev g = geev(m, true);
    const auto order = sorted_order(g.values);
    const Index n = m.rows();
    out.values.resize(n);
    out.right.resize(n, n);
    out.left.resize(n, n);
    for (Index i = 0; i < n; ++i) {
        const Index j = order[static_cast<std::size_t>(i)];
        out.values(i) = g.values(j);
        out.right.col(i) = g.right.col(j).normalized();
        out.left.col(i) = g.left.col(j).normalized();
    }
    return out;
}

CVector eigenvalues(const Matrix& m) {
    require_square(m, "eigenvalues");
    require_finite(m, "eigenvalues");
    if (m.rows() == 0) return {};
    const CVector v = geev(m, false).values;
    const auto order = sorted_order(v);
    CVector out(v.size());
    for (Index i = 0; i < v.size(); ++i) out(i) = v(order[static_cast<std::size_t>(i)]);
    return out;
}

double spectral_radius(const Matrix& m) {
    require_square(m, "spectral_radius");
    if (m.rows() == 0) return 0.0;
    if (m.isZero(0.0)) return 0.0;
    return std::abs(eigenvalues(m)(0));
}

Matrix vec(const Matrix& m) {
    // Eigen storage is column-major, so the raw buffer is already vec(m).
    return Eigen::Map<const Matrix>(m.data(), m.size(), 1);
}

Matrix unvec(const Matrix& v, Index rows, Index cols) {
    if (v.size() != rows * cols) throw std::invalid_argument("unvec: size mismatch");
    const Matrix flat = v;
    return Eigen::Map<const Matrix>(flat.data(), rows, cols);
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out;
    kernels::parallel::kron(a, b, out);
    return out;
}

}  // namespace rck
