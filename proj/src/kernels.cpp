#include "rckoopman/kernels.hpp"

#include <cmath>

#include <omp.h>

namespace rck::kernels {
namespace {

inline double activate(Activation act, double x) {
    return act == Activation::tanh ? std::tanh(x) : x;
}

inline void reservoir_row(const ReservoirStep& step, Index i, std::span<const double> input,
                          std::span<const double> prev, std::span<const double> noise,
                          std::span<double> next) {
    const RowMatrix& w = *step.w;
    const RowMatrix& w_in = *step.w_in;
    const double* wr = w.data() + i * w.cols();
    double acc = 0.0;
    for (Index j = 0; j < w.cols(); ++j) acc += wr[j] * prev[j];
    const double* wir = w_in.data() + i * w_in.cols();
    for (Index k = 0; k < w_in.cols(); ++k) acc += wir[k] * input[k];
    if (!noise.empty()) acc += noise[i];
    next[i] = (1.0 - step.c * step.a) * prev[i] + step.c * activate(step.activation, acc);
}

inline void rbf_column(const Matrix& points, const Matrix& centers, double gamma, Index t,
                       Matrix& out) {
    for (Index j = 0; j < centers.cols(); ++j) {
        double d2 = 0.0;
        for (Index k = 0; k < points.rows(); ++k) {
            const double d = points(k, t) - centers(k, j);
            d2 += d * d;
        }
        out(j, t) = std::exp(-gamma * d2);
    }
}

inline void kron_column(const Matrix& a, const Matrix& b, Index ja, Matrix& out) {
    for (Index jb = 0; jb < b.cols(); ++jb) {
        const Index col = ja * b.cols() + jb;
        for (Index ia = 0; ia < a.rows(); ++ia) {
            const double s = a(ia, ja);
            for (Index ib = 0; ib < b.rows(); ++ib) out(ia * b.rows() + ib, col) = s * b(ib, jb);
        }
    }
}

inline double column_sq(const Matrix& m, Index j) {
    double s = 0.0;
    for (Index i = 0; i < m.rows(); ++i) s += m(i, j) * m(i, j);
    return s;
}

void check_step(const ReservoirStep& step, std::span<const double> input,
                std::span<const double> prev, std::span<const double> noise,
                std::span<double> next) {
    const auto n = static_cast<std::size_t>(step.w->rows());
    if (prev.size() != n || next.size() != n || step.w->cols() != step.w->rows() ||
        step.w_in->rows() != step.w->rows() ||
        input.size() != static_cast<std::size_t>(step.w_in->cols()) ||
        (!noise.empty() && noise.size() != n)) {
        throw std::invalid_argument("reservoir_step: dimension mismatch");
    }
}

}  // namespace

namespace serial {

void reservoir_step(const ReservoirStep& step, std::span<const double> input,
                    std::span<const double> prev, std::span<const double> noise,
                    std::span<double> next) {
    check_step(step, input, prev, noise, next);
    for (Index i = 0; i < step.w->rows(); ++i) reservoir_row(step, i, input, prev, noise, next);
}

void rbf_evaluate(const Matrix& points, const Matrix& centers, double gamma, Matrix& out) {
    if (points.rows() != centers.rows())
        throw std::invalid_argument("rbf_evaluate: dimension mismatch");
    out.resize(centers.cols(), points.cols());
    for (Index t = 0; t < points.cols(); ++t) rbf_column(points, centers, gamma, t, out);
}

void kron(const Matrix& a, const Matrix& b, Matrix& out) {
    out.resize(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index ja = 0; ja < a.cols(); ++ja) kron_column(a, b, ja, out);
}

void column_squared_norms(const Matrix& m, Vector& out) {
    out.resize(m.cols());
    for (Index j = 0; j < m.cols(); ++j) out(j) = column_sq(m, j);
}

}  // namespace serial

namespace parallel {

void reservoir_step(const ReservoirStep& step, std::span<const double> input,
                    std::span<const double> prev, std::span<const double> noise,
                    std::span<double> next) {
    check_step(step, input, prev, noise, next);
    const Index n = step.w->rows();
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) reservoir_row(step, i, input, prev, noise, next);
}

void rbf_evaluate(const Matrix& points, const Matrix& centers, double gamma, Matrix& out) {
    if (points.rows() != centers.rows())
        throw std::invalid_argument("rbf_evaluate: dimension mismatch");
    out.resize(centers.cols(), points.cols());
    const Index cols = points.cols();
#pragma omp parallel for schedule(static)
    for (Index t = 0; t < cols; ++t) rbf_column(points, centers, gamma, t, out);
}

void kron(const Matrix& a, const Matrix& b, Matrix& out) {
    out.resize(a.rows() * b.rows(), a.cols() * b.cols());
    const Index cols = a.cols();
#pragma omp parallel for schedule(static)
    for (Index ja = 0; ja < cols; ++ja) kron_column(a, b, ja, out);
}

void column_squared_norms(const Matrix& m, Vector& out) {
    out.resize(m.cols());
    const Index cols = m.cols();
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < cols; ++j) out(j) = column_sq(m, j);
}

}  // namespace parallel

int max_threads() { return omp_get_max_threads(); }

}  // namespace rck::kernels
