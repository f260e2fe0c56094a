#pragma once

// Dense linear-algebra kernel used throughout the library.
//
// Matrices are Eigen dense types. Everything here is a pure function of its
// inputs. SVD and eigendecompositions go straight to LAPACK (gesdd, geev).

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rck {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Raised when a decomposition does not converge, an iteration blows up, or a
/// value becomes non-finite.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// max(rows, cols) * machine epsilon.
double default_rel_tol(Index rows, Index cols);

/// Throws std::invalid_argument naming `what` if any entry is NaN or Inf.
void require_finite(const Matrix& m, const std::string& what);

/// Moore-Penrose pseudo-inverse through the SVD. Singular values below
/// rel_tol * sigma_max are dropped. A negative rel_tol selects
/// default_rel_tol(m.rows(), m.cols()).
Matrix pinv(const Matrix& m, double rel_tol = -1.0);

/// Minimum-norm least-squares solution of a X = b (equals pinv(a) * b).
Matrix lstsq(const Matrix& a, const Matrix& b, double rel_tol = -1.0);

/// Number of singular values above rel_tol * sigma_max.
Index numerical_rank(const Matrix& m, double rel_tol = -1.0);

Vector singular_values(const Matrix& m);

struct EigenDecomposition {
    CVector values;  // descending modulus, then real part, then imaginary part
    CMatrix right;   // m * right.col(i) = values(i) * right.col(i)
    CMatrix left;    // left.col(i)^T * m = values(i) * left.col(i)^T
};

/// Full eigendecomposition; left and right vectors come from the same geev call.
/// Columns of both vector matrices have unit Euclidean norm.
EigenDecomposition eig(const Matrix& m);

/// Eigenvalues only, sorted like eig().
CVector eigenvalues(const Matrix& m);

double spectral_radius(const Matrix& m);

/// Column-stacking vectorization.
Matrix vec(const Matrix& m);
Matrix unvec(const Matrix& v, Index rows, Index cols);

/// Kronecker product, shape (a.rows*b.rows) x (a.cols*b.cols).
Matrix kron(const Matrix& a, const Matrix& b);

/// Strict ordering used by eig(): descending modulus, ties broken by
/// descending real part and then descending imaginary part.
bool eigen_order(const std::complex<double>& x, const std::complex<double>& y);

}  // namespace rck
