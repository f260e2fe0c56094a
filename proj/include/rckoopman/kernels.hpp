#pragma once

// Data-parallel inner loops.
//
// Each kernel exists twice: `serial::` is the reference implementation kept
// for testing, `parallel::` splits the outer loop across OpenMP threads. Both
// run the identical per-element arithmetic in the identical order, so their
// results are bit-for-bit equal regardless of thread count.

#include <span>

#include "rckoopman/linalg.hpp"

namespace rck::kernels {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Activation { tanh, identity };

/// Arguments of one reservoir update
///   next = (1 - c a) prev + c act(w_in u + w prev + noise).
struct ReservoirStep {
    const RowMatrix* w;
    const RowMatrix* w_in;
    double c;
    double a;
    Activation activation = Activation::tanh;
};

namespace serial {

void reservoir_step(const ReservoirStep& step, std::span<const double> input,
                    std::span<const double> prev, std::span<const double> noise,
                    std::span<double> next);

/// out(j, t) = exp(-gamma ||x_t - center_j||^2); points and centers are
/// stored one per column.
void rbf_evaluate(const Matrix& points, const Matrix& centers, double gamma, Matrix& out);

void kron(const Matrix& a, const Matrix& b, Matrix& out);

/// Per-column squared Euclidean norms.
void column_squared_norms(const Matrix& m, Vector& out);

}  // namespace serial

namespace parallel {

void reservoir_step(const ReservoirStep& step, std::span<const double> input,
                    std::span<const double> prev, std::span<const double> noise,
                    std::span<double> next);

void rbf_evaluate(const Matrix& points, const Matrix& centers, double gamma, Matrix& out);

void kron(const Matrix& a, const Matrix& b, Matrix& out);

void column_squared_norms(const Matrix& m, Vector& out);

}  // namespace parallel

/// Number of OpenMP threads the parallel kernels will use.
int max_threads();

}  // namespace rck::kernels
