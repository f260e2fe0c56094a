#pragma once

// Koopman matrix estimation.
//
// Three estimators share one representation (KoopmanModel):
//   * EDMD over an explicit dictionary (projection maps + Gaussian RBFs, or
//     projection maps alone, which is DMD);
//   * method 1: EDMD whose dictionary is the full concatenated reservoir state;
//   * method 2: a learned dictionary of L linear readouts of the reservoir
//     state plus the K projection maps, fitted by alternating least squares.

#include <cstdint>
#include <string>
#include <vector>

#include "rckoopman/dynamics.hpp"
#include "rckoopman/linalg.hpp"
#include "rckoopman/reservoir.hpp"

namespace rck {

enum class DictionaryKind { explicit_rbf, reservoir_full, reservoir_learned };

std::string to_string(DictionaryKind kind);

struct Dictionary {
    DictionaryKind kind = DictionaryKind::explicit_rbf;
    Index size = 0;       // D
    Index state_dim = 0;  // K

    // explicit_rbf: rows are the K projection maps followed by one Gaussian
    // per column of `centers`.
    Matrix centers;  // K x (D - K)
    double gamma_rbf = 0.0;

    // reservoir_learned: dictionary = [w1; w2] * sbar with w2 = [0, I_K].
    Matrix w1;  // L x (N + K)

    std::vector<Index> proj_rows;

    /// Evaluates an explicit dictionary at states stored one per column.
    Matrix evaluate(const Matrix& states) const;
};

Dictionary rbf_dictionary(const Matrix& centers, double gamma_rbf);

struct KoopmanModel {
    Matrix k;  // D x D
    Dictionary dictionary;
    Vector psi_first;  // Psi(1)
    Vector psi_last;   // Psi(T)
    std::string method;
    double residue = 0.0;
    std::vector<double> iteration_log;  // method 2: objective after each sweep
    Index rank = 0;                     // numerical rank of the regression matrix Psi
    bool rank_deficient = false;

    Index size() const { return k.rows(); }
    const std::vector<Index>& proj_rows() const { return dictionary.proj_rows; }
};

/// Sum over samples of ||psi_next(:, t) - k psi(:, t)||^2.
double residue(const Matrix& k, const Matrix& psi, const Matrix& psi_next);

/// K = psi_next * pinv(psi). The returned dictionary is an empty explicit one
/// with every row marked as a projection row; callers that know the dictionary
/// overwrite it.
KoopmanModel edmd(const Matrix& psi, const Matrix& psi_next);

/// Snapshot pairs of a dictionary evaluated along one trajectory.
struct DictionaryValues {
    Matrix psi;       // D x (T - 1), columns psi(x(1 .. T-1))
    Matrix psi_next;  // D x (T - 1), columns psi(x(2 .. T))
};

/// `count` centers picked among the samples of `data` (columns of the
/// result). Picks are without replacement; when count exceeds the sample
/// count a fresh pass over all samples starts.
Matrix sample_rbf_centers(const TrajectoryData& data, Index count, std::uint64_t seed);

/// Projection maps followed by exp(-gamma ||x - c||^2) for each center,
/// evaluated on samples [first, T) of `data`.
DictionaryValues rbf_dictionary_evaluate(const TrajectoryData& data, const Matrix& centers,
                                         double gamma_rbf, Index first = 0);

/// EDMD with projection maps and `centers.cols()` Gaussian RBFs.
KoopmanModel fit_edmd_rbf(const TrajectoryData& data, const Matrix& centers, double gamma_rbf,
                          Index first = 0);

/// DMD: EDMD on the projection maps alone.
KoopmanModel fit_dmd(const TrajectoryData& data, Index first = 0);

/// Method 1: K = S' pinv(S) on the concatenated reservoir states. The last
/// `inputs` rows of S are the projection maps.
KoopmanModel method1(const Matrix& s, const Matrix& s_next, Index inputs);

enum class Method2Variant { weights, values };

std::string to_string(Method2Variant v);
Method2Variant parse_variant(const std::string& name);

struct Method2Options {
    Index l = 13;
    int max_iters = 20;
    double tol = 1e-10;  // relative change of the objective between sweeps
    Method2Variant variant = Method2Variant::values;
    std::uint64_t seed = 1;
    double init_scale = 1.0;  // initial W1 entries uniform on [-init_scale, init_scale]
};

/// Method 2 by alternating least squares. The last `inputs` rows of S are the
/// projection maps; they stay fixed as the last K dictionary rows.
KoopmanModel method2(const Matrix& s, const Matrix& s_next, Index inputs,
                     const Method2Options& opts);

/// [w1; 0 I_K] for a reservoir with `total` = N + K concatenated rows.
Matrix output_weights(const Matrix& w1, Index inputs);

/// Step 1, direct form: K = (W_out S') pinv(W_out S).
Matrix method2_step1(const Matrix& s, const Matrix& s_next, const Matrix& w_out);

/// Step 1, factored form W_out S' pinv(S) pinv(W_out). Agrees with the direct
/// form only when W_out S has full row rank; kept as a cross-check.
Matrix method2_step1_factored(const Matrix& s, const Matrix& s_next, const Matrix& w_out);

struct KoopmanBlocks {
    Matrix k11;  // L x L
    Matrix k12;  // L x K
    Matrix k21;  // K x L
    Matrix k22;  // K x K
};

KoopmanBlocks partition(const Matrix& k, Index l);

/// Objective sum_t ||W_out sbar(t+1) - K W_out sbar(t)||^2 with W_out = [w1; 0 I].
double method2_objective(const Matrix& s, const Matrix& s_next, const Matrix& k, const Matrix& w1);

/// Step 2, output-weight variant: least-squares W1 for fixed K, assembled from
/// Kronecker products and solved with the pseudo-inverse.
Matrix method2_step2_weights(const Matrix& s, const Matrix& s_next, const Matrix& k, Index l);

/// Transition matrix pinv(S) S'. When S has full column rank it is a companion
/// matrix (ones on the subdiagonal); only its last column is then solved for.
struct TransitionMatrix {
    Matrix m;
    bool companion = false;
    Vector last_column() const { return m.col(m.cols() - 1); }
};

TransitionMatrix transition_matrix(const Matrix& s, const Matrix& s_next);

/// Step 2, dictionary-value variant: least-squares Psi1 of
///   Psi1 M - K11 Psi1 = C1,  -K21 Psi1 = C2
/// with C1 = K12 X and C2 = -X' + K22 X (X, X' the projection rows of S, S').
/// Uses the structured companion solver when available, otherwise the dense
/// Kronecker assembly.
Matrix method2_step2_values(const Matrix& s, const Matrix& s_next, const Matrix& k, Index l);

namespace detail {

/// Dense Kronecker-assembled least-squares solve of the value system for a
/// general transition matrix m.
Matrix solve_values_dense(const Matrix& m, const KoopmanBlocks& b, const Matrix& c1,
                          const Matrix& c2);

/// Same system for a companion transition matrix with last column `last`,
/// through block-tridiagonal normal equations plus a rank-L correction.
/// Falls back to solve_values_dense when the banded part is not positive
/// definite.
Matrix solve_values_companion(const Vector& last, const KoopmanBlocks& b, const Matrix& c1,
                              const Matrix& c2);

/// Entry count above which dense Kronecker systems are refused.
inline constexpr double dense_system_limit = 6.0e7;
/// Bound on rows * cols * min(rows, cols) (the SVD cost) of those systems.
inline constexpr double dense_work_limit = 2.0e10;

}  // namespace detail

}  // namespace rck
