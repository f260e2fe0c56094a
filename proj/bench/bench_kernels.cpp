#include <benchmark/benchmark.h>

#include <random>
#include <span>

#include "rckoopman/kernels.hpp"

using namespace rck;
using namespace rck::kernels;

namespace {

Matrix random_matrix(Index rows, Index cols, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = dist(gen);
    return m;
}

template <bool Parallel>
void reservoir_step(benchmark::State& state) {
    const Index n = state.range(0), k = 3;
    const RowMatrix w = random_matrix(n, n, 1) * (0.79 / std::sqrt(static_cast<double>(n))),
                    w_in = random_matrix(n, k, 2);
    const Vector u = random_matrix(k, 1, 3), prev = random_matrix(n, 1, 4), noise = random_matrix(n, 1, 5) * 1e-4;
    Vector next(n);
    const ReservoirStep step{&w, &w_in, 0.45, 3.0};
    for (auto _ : state) {
        const std::span<const double> us(u.data(), k), ps(prev.data(), n), ns(noise.data(), n);
        if constexpr (Parallel)
            parallel::reservoir_step(step, us, ps, ns, {next.data(), static_cast<std::size_t>(n)});
        else
            serial::reservoir_step(step, us, ps, ns, {next.data(), static_cast<std::size_t>(n)});
        benchmark::DoNotOptimize(next.data());
    }
}

template <bool Parallel>
void rbf(benchmark::State& state) {
    const Matrix points = random_matrix(3, state.range(0), 6), centers = random_matrix(3, 997, 7);
    Matrix out;
    for (auto _ : state) {
        if constexpr (Parallel)
            parallel::rbf_evaluate(points, centers, 0.05, out);
        else
            serial::rbf_evaluate(points, centers, 0.05, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void kronecker(benchmark::State& state) {
    const Index n = state.range(0);
    const Matrix a = random_matrix(n, n, 8), b = random_matrix(13, 13, 9);
    Matrix out;
    for (auto _ : state) {
        if constexpr (Parallel)
            parallel::kron(a, b, out);
        else
            serial::kron(a, b, out);
        benchmark::DoNotOptimize(out.data());
    }
}

}  // namespace

BENCHMARK(reservoir_step<false>)->Name("reservoir_step/serial")->Arg(998)->Arg(2000);
BENCHMARK(reservoir_step<true>)->Name("reservoir_step/parallel")->Arg(998)->Arg(2000);
BENCHMARK(rbf<false>)->Name("rbf_evaluate/serial")->Arg(751);
BENCHMARK(rbf<true>)->Name("rbf_evaluate/parallel")->Arg(751);
BENCHMARK(kronecker<false>)->Name("kron/serial")->Arg(100)->Arg(300);
BENCHMARK(kronecker<true>)->Name("kron/parallel")->Arg(100)->Arg(300);

BENCHMARK_MAIN();
