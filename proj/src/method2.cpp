// Method 2: dictionary learning by alternating least squares.
//
// Unknowns are W1 (weights variant) or Psi1 = W1 S (values variant); the
// projection block W2 = [0, I_K] stays fixed, so the projection rows of the
// dictionary are always the raw inputs.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rckoopman/koopman.hpp"
#include "rckoopman/rng.hpp"

namespace rck {
namespace {

Matrix right_pinv_product(const Matrix& lhs, const Matrix& rhs) {
    // rhs * pinv(lhs)
    return lstsq(lhs.transpose(), rhs.transpose()).transpose();
}

void require_dense_size(Index rows, Index cols, const char* what) {
    const double r = static_cast<double>(rows), c = static_cast<double>(cols);
    if (r * c > detail::dense_system_limit || r * c * std::min(r, c) > detail::dense_work_limit)
        throw std::invalid_argument(std::string(what) + ": dense system of " + std::to_string(rows) + " x " +
                                    std::to_string(cols) +
                                    " is too large; the values variant stays structured only when the "
                                    "reservoir has at least as many rows (N + K) as snapshots");
}

void require_snapshots(const Matrix& s, const Matrix& s_next, Index inputs) {
    if (s.rows() != s_next.rows() || s.cols() != s_next.cols())
        throw std::invalid_argument("method2: S and S' differ in shape");
    if (s.cols() < 1) throw std::invalid_argument("method2: no snapshots");
    if (inputs < 1 || inputs >= s.rows()) throw std::invalid_argument("method2: bad input count");
}

Matrix shift_apply(const Matrix& psi, const Vector& last) {
    // psi * M for the companion matrix with the given last column.
    const Index n = psi.cols();
    Matrix out(psi.rows(), n);
    if (n > 1) out.leftCols(n - 1) = psi.rightCols(n - 1);
    out.col(n - 1) = psi * last;
    return out;
}

Matrix shift_apply_transpose(const Matrix& r, const Vector& last) {
    // r * M^T for the companion matrix with the given last column.
    const Index n = r.cols();
    Matrix out = r.col(n - 1) * last.transpose();
    if (n > 1) out.rightCols(n - 1) += r.leftCols(n - 1);
    return out;
}

/// Symmetric positive definite block-tridiagonal system, block size b:
/// diagonal blocks diag[j], sub-diagonal blocks all equal to `lower`
/// (block (j+1, j)), super-diagonal its transpose.
class BlockTridiagonal {
public:
    BlockTridiagonal(std::vector<Matrix> diag, Matrix lower)
        : diag_(std::move(diag)), lower_(std::move(lower)) {}

    /// Block Cholesky. Returns false if a pivot block is not positive definite.
    bool factorize() {
        const std::size_t n = diag_.size();
        chol_.clear();
        coupling_.assign(n, Matrix());
        for (std::size_t j = 0; j < n; ++j) {
            Matrix pivot = diag_[j];
            if (j > 0) {
                // E_j = lower * L_{j-1}^{-T}
                Matrix e = chol_[j - 1].matrixL().solve(lower_.transpose()).transpose();
                pivot.noalias() -= e * e.transpose();
                coupling_[j] = std::move(e);
            }
            chol_.emplace_back(pivot);
            if (chol_.back().info() != Eigen::Success) return false;
            // LLT does not flag every indefinite matrix; check the pivots.
            const Vector d = chol_.back().matrixLLT().diagonal();
            if (!d.allFinite() || (d.array() <= 0.0).any()) return false;
        }
        return true;
    }

    /// Solves for a block-stacked right-hand side with n*b rows.
    Matrix solve(const Matrix& rhs) const {
        const Index b = lower_.rows();
        const auto n = static_cast<Index>(diag_.size());
        Matrix y(rhs.rows(), rhs.cols());
        for (Index j = 0; j < n; ++j) {
            Matrix r = rhs.middleRows(j * b, b);
            if (j > 0) r.noalias() -= coupling_[static_cast<std::size_t>(j)] * y.middleRows((j - 1) * b, b);
            y.middleRows(j * b, b) = chol_[static_cast<std::size_t>(j)].matrixL().solve(r);
        }
        Matrix x(rhs.rows(), rhs.cols());
        for (Index j = n - 1; j >= 0; --j) {
            Matrix r = y.middleRows(j * b, b);
            if (j + 1 < n)
                r.noalias() -= coupling_[static_cast<std::size_t>(j + 1)].transpose() * x.middleRows((j + 1) * b, b);
            x.middleRows(j * b, b) = chol_[static_cast<std::size_t>(j)].matrixU().solve(r);
        }
        return x;
    }

private:
    std::vector<Matrix> diag_;
    Matrix lower_;
    std::vector<Eigen::LLT<Matrix>> chol_;
    std::vector<Matrix> coupling_;
};

Matrix stack_columns(const Matrix& m) { return vec(m); }

}  // namespace

std::string to_string(Method2Variant v) {
    return v == Method2Variant::weights ? "weights" : "values";
}

Method2Variant parse_variant(const std::string& name) {
    if (name == "weights") return Method2Variant::weights;
    if (name == "values") return Method2Variant::values;
    throw std::invalid_argument("unknown method2 variant: " + name);
}

Matrix output_weights(const Matrix& w1, Index inputs) {
    const Index total = w1.cols();
    Matrix w(w1.rows() + inputs, total);
    w.topRows(w1.rows()) = w1;
    w.bottomRows(inputs).setZero();
    w.bottomRightCorner(inputs, inputs).setIdentity();
    return w;
}

Matrix method2_step1(const Matrix& s, const Matrix& s_next, const Matrix& w_out) {
    if (w_out.cols() != s.rows()) throw std::invalid_argument("method2_step1: W_out shape");
    return right_pinv_product(w_out * s, w_out * s_next);
}

Matrix method2_step1_factored(const Matrix& s, const Matrix& s_next, const Matrix& w_out) {
    if (w_out.cols() != s.rows()) throw std::invalid_argument("method2_step1: W_out shape");
    return w_out * right_pinv_product(s, s_next) * pinv(w_out);
}

KoopmanBlocks partition(const Matrix& k, Index l) {
    if (k.rows() != k.cols() || l < 0 || l > k.rows())
        throw std::invalid_argument("partition: bad block size");
    const Index kk = k.rows() - l;
    return {k.topLeftCorner(l, l), k.topRightCorner(l, kk), k.bottomLeftCorner(kk, l),
            k.bottomRightCorner(kk, kk)};
}

double method2_objective(const Matrix& s, const Matrix& s_next, const Matrix& k, const Matrix& w1) {
    const Matrix w = output_weights(w1, k.rows() - w1.rows());
    return residue(k, w * s, w * s_next);
}

Matrix method2_step2_weights(const Matrix& s, const Matrix& s_next, const Matrix& k, Index l) {
    const Index total = s.rows();
    const Index inputs = k.rows() - l;
    const Index n = s.cols();
    if (inputs < 1 || inputs >= total) throw std::invalid_argument("method2_step2_weights: bad sizes");
    require_snapshots(s, s_next, inputs);
    require_dense_size((l + inputs) * n, l * total, "method2_step2_weights");

    const KoopmanBlocks b = partition(k, l);
    const Matrix x = s.bottomRows(inputs);
    const Matrix x_next = s_next.bottomRows(inputs);
    const Matrix c1 = b.k12 * x;
    const Matrix c2 = -x_next + b.k22 * x;

    Matrix a(l * n + inputs * n, l * total);
    a.topRows(l * n) = kron(s_next.transpose(), Matrix::Identity(l, l)) - kron(s.transpose(), b.k11);
    a.bottomRows(inputs * n) = -kron(s.transpose(), b.k21);
    Matrix rhs(l * n + inputs * n, 1);
    rhs.topRows(l * n) = stack_columns(c1);
    rhs.bottomRows(inputs * n) = stack_columns(c2);
    return unvec(lstsq(a, rhs), l, total);
}

TransitionMatrix transition_matrix(const Matrix& s, const Matrix& s_next) {
    if (s.rows() != s_next.rows() || s.cols() != s_next.cols())
        throw std::invalid_argument("transition_matrix: shape mismatch");
    const Index n = s.cols();
    TransitionMatrix out;
    if (numerical_rank(s) == n) {
        // pinv(S) S = I, and S' is S shifted by one column, so pinv(S) S'
        // maps e_j to e_{j+1}; only the last column needs a solve.
        out.companion = true;
        out.m.setZero(n, n);
        for (Index j = 0; j + 1 < n; ++j) out.m(j + 1, j) = 1.0;
        out.m.col(n - 1) = lstsq(s, s_next.col(n - 1));
    } else {
        out.m = lstsq(s, s_next);
    }
    return out;
}

namespace detail {

Matrix solve_values_dense(const Matrix& m, const KoopmanBlocks& b, const Matrix& c1,
                          const Matrix& c2) {
    const Index l = b.k11.rows();
    const Index inputs = b.k21.rows();
    const Index n = m.rows();
    require_dense_size((l + inputs) * n, l * n, "solve_values_dense");
    Matrix a(l * n + inputs * n, l * n);
    const Matrix in = Matrix::Identity(n, n);
    a.topRows(l * n) = kron(m.transpose(), Matrix::Identity(l, l)) - kron(in, b.k11);
    a.bottomRows(inputs * n) = -kron(in, b.k21);
    Matrix rhs(l * n + inputs * n, 1);
    rhs.topRows(l * n) = stack_columns(c1);
    rhs.bottomRows(inputs * n) = stack_columns(c2);
    return unvec(lstsq(a, rhs), l, n);
}

Matrix solve_values_companion(const Vector& last, const KoopmanBlocks& b, const Matrix& c1,
                              const Matrix& c2) {
    const Index l = b.k11.rows();
    const Index n = last.size();
    if (c1.rows() != l || c1.cols() != n || c2.cols() != n || c2.rows() != b.k21.rows())
        throw std::invalid_argument("solve_values_companion: shape mismatch");

    // Split the residual rows into a banded part (everything except the last
    // column of the first equation) and the L dense rows R psi = C1(:, n-1),
    // R = [last_0 I, ..., last_{n-2} I, last_{n-1} I - K11].
    const Matrix k11tk11 = b.k11.transpose() * b.k11;
    const Matrix k21tk21 = b.k21.transpose() * b.k21;
    const Matrix eye = Matrix::Identity(l, l);
    std::vector<Matrix> diag(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
        Matrix d = k21tk21;
        if (j + 1 < n) d += k11tk11;
        if (j >= 1) d += eye;
        diag[static_cast<std::size_t>(j)] = std::move(d);
    }
    BlockTridiagonal banded(std::move(diag), -b.k11);
    if (!banded.factorize()) {
        Matrix m = Matrix::Zero(n, n);
        for (Index j = 0; j + 1 < n; ++j) m(j + 1, j) = 1.0;
        m.col(n - 1) = last;
        return solve_values_dense(m, b, c1, c2);
    }

    Matrix r(l, l * n);
    for (Index j = 0; j < n; ++j) r.middleCols(j * l, l) = last(j) * eye;
    r.rightCols(l) -= b.k11;

    // Woodbury: (B + R^T R)^{-1} = B^{-1} - B^{-1} R^T (I + R B^{-1} R^T)^{-1} R B^{-1}.
    const Matrix z = banded.solve(r.transpose());
    const Eigen::PartialPivLU<Matrix> cap(eye + r * z);

    auto normal_solve = [&](const Matrix& g) -> Matrix {
        const Matrix y = banded.solve(g);
        return y - z * cap.solve(r * y);
    };
    // A^T applied to (first, second) in block-stacked form.
    auto apply_t = [&](const Matrix& first, const Matrix& second) -> Matrix {
        const Matrix t = shift_apply_transpose(first, last) - b.k11.transpose() * first -
                         b.k21.transpose() * second;
        return vec(t);
    };

    Matrix psi = unvec(normal_solve(apply_t(c1, c2)), l, n);
    // Two rounds of refinement against the exact operator.
    for (int round = 0; round < 2; ++round) {
        const Matrix e1 = c1 - (shift_apply(psi, last) - b.k11 * psi);
        const Matrix e2 = c2 + b.k21 * psi;
        psi += unvec(normal_solve(apply_t(e1, e2)), l, n);
    }
    return psi;
}

}  // namespace detail

namespace {

Matrix values_step(const TransitionMatrix& tm, const Matrix& x, const Matrix& x_next,
                   const Matrix& k, Index l) {
    const KoopmanBlocks b = partition(k, l);
    const Matrix c1 = b.k12 * x;
    const Matrix c2 = -x_next + b.k22 * x;
    if (tm.companion) return detail::solve_values_companion(tm.last_column(), b, c1, c2);
    return detail::solve_values_dense(tm.m, b, c1, c2);
}

Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
    Matrix out(top.rows() + bottom.rows(), top.cols());
    out.topRows(top.rows()) = top;
    out.bottomRows(bottom.rows()) = bottom;
    return out;
}

Matrix apply_transition(const TransitionMatrix& tm, const Matrix& psi) {
    if (tm.companion) return shift_apply(psi, tm.last_column());
    return psi * tm.m;
}

}  // namespace

Matrix method2_step2_values(const Matrix& s, const Matrix& s_next, const Matrix& k, Index l) {
    const Index inputs = k.rows() - l;
    require_snapshots(s, s_next, inputs);
    const TransitionMatrix tm = transition_matrix(s, s_next);
    return values_step(tm, s.bottomRows(inputs), s_next.bottomRows(inputs), k, l);
}

KoopmanModel method2(const Matrix& s, const Matrix& s_next, Index inputs,
                     const Method2Options& opts) {
    require_snapshots(s, s_next, inputs);
    if (opts.l < 1) throw std::invalid_argument("method2: L must be at least 1");
    if (opts.max_iters < 1) throw std::invalid_argument("method2: max_iters must be at least 1");
    if (!(opts.init_scale > 0.0)) throw std::invalid_argument("method2: init_scale must be positive");
    const Index total = s.rows();
    const Index l = opts.l;

    RandomStream rng(opts.seed, streams::method2_init);
    Matrix w1(l, total);
    for (Index i = 0; i < l; ++i)
        for (Index j = 0; j < total; ++j) w1(i, j) = rng.uniform(-opts.init_scale, opts.init_scale);

    const Matrix x = s.bottomRows(inputs);
    const Matrix x_next = s_next.bottomRows(inputs);
    std::vector<double> log;
    auto converged = [&](double r) {
        log.push_back(r);
        if (!std::isfinite(r)) {
            std::string msg = "method2: non-finite objective; log:";
            for (double v : log) msg += " " + std::to_string(v);
            throw NumericalError(msg);
        }
        if (log.size() < 2) return false;
        const double prev = log[log.size() - 2];
        return std::abs(prev - r) <= opts.tol * std::max(prev, 1e-300);
    };

    if (opts.variant == Method2Variant::values) {
        const TransitionMatrix tm = transition_matrix(s, s_next);
        Matrix psi1 = w1 * s;
        for (int it = 0; it < opts.max_iters; ++it) {
            const Matrix psi = stack_rows(psi1, x);
            const Matrix psi_next = stack_rows(apply_transition(tm, psi1), x_next);
            const Matrix k = right_pinv_product(psi, psi_next);
            psi1 = values_step(tm, x, x_next, k, l);
            const double r = residue(k, stack_rows(psi1, x), stack_rows(apply_transition(tm, psi1), x_next));
            if (converged(r)) break;
        }
        w1 = right_pinv_product(s, psi1);
    } else {
        for (int it = 0; it < opts.max_iters; ++it) {
            const Matrix k = method2_step1(s, s_next, output_weights(w1, inputs));
            w1 = method2_step2_weights(s, s_next, k, l);
            const Matrix w = output_weights(w1, inputs);
            if (converged(residue(k, w * s, w * s_next))) break;
        }
    }

    const Matrix w_out = output_weights(w1, inputs);
    const Matrix psi = w_out * s;
    const Matrix psi_next = w_out * s_next;
    KoopmanModel m;
    m.method = "method2";
    m.k = right_pinv_product(psi, psi_next);
    m.psi_first = psi.col(0);
    m.psi_last = psi_next.col(psi_next.cols() - 1);
    m.residue = residue(m.k, psi, psi_next);
    m.rank = numerical_rank(psi);
    m.rank_deficient = m.rank < std::min(psi.rows(), psi.cols());
    m.iteration_log = std::move(log);

    Dictionary& d = m.dictionary;
    d.kind = DictionaryKind::reservoir_learned;
    d.size = l + inputs;
    d.state_dim = inputs;
    d.w1 = w1;
    for (Index i = 0; i < inputs; ++i) d.proj_rows.push_back(l + i);
    return m;
}

}  // namespace rck
