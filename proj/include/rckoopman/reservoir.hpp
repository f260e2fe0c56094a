#pragma once

// Echo state network: random weight realization, the leaky-tanh state
// recurrence driven by a trajectory, and the snapshot matrices S, S'.

#include <cstdint>
#include <optional>

#include "rckoopman/dynamics.hpp"
#include "rckoopman/kernels.hpp"
#include "rckoopman/linalg.hpp"

namespace rck {

struct ReservoirConfig {
    Index n = 998;              // internal nodes
    Index k = 2;                // input dimension
    double c = 0.45;            // timescale constant
    double a = 3.0;             // leaking rate
    double density = 0.02;      // fraction of nonzero internal weights
    double rho = 0.79;          // target spectral radius of W
    double w_in_gain = 1.0;     // W_in entries uniform on [-gain, gain]
    double noise = 1e-4;        // state noise uniform on [-noise, noise]
    Index washout = 100;        // leading samples dropped from the stored run
    std::uint64_t seed = 1;
    kernels::Activation activation = kernels::Activation::tanh;

    /// |1 - c (a - rho)|; the echo state property needs this below one.
    double esp_factor() const;
    /// Throws std::invalid_argument describing the first violated constraint.
    void validate() const;
};

/// Published settings for `kind`: N + K = 1000 total nodes.
ReservoirConfig default_reservoir(SystemKind kind, std::uint64_t seed = 1);

struct ReservoirWeights {
    kernels::RowMatrix w_in;  // N x K
    kernels::RowMatrix w;     // N x N, spectral radius rho
};

ReservoirWeights build_weights(const ReservoirConfig& cfg);

struct ReservoirRun {
    ReservoirWeights weights;
    Matrix states;        // N x T', one column per retained time step
    Matrix concatenated;  // (N + K) x T', columns [s(t); u(t)]
    Vector last_state;    // s at the final time step (for re-driving)

    Index retained() const { return states.cols(); }
    Index nodes() const { return states.rows(); }
    Index inputs() const { return concatenated.rows() - states.rows(); }
};

/// Builds the weights and runs from a random initial state.
ReservoirRun run(const ReservoirConfig& cfg, const TrajectoryData& input);

/// Runs with the given weights from `initial_state`. Noise is drawn from the
/// cfg.seed noise stream, so two drives with equal cfg see equal noise.
ReservoirRun drive(const ReservoirConfig& cfg, const ReservoirWeights& weights,
                   const TrajectoryData& input, const Vector& initial_state,
                   bool use_parallel = true);

/// Initial reservoir state drawn uniformly on [0, 1].
Vector initial_state(const ReservoirConfig& cfg);

struct SnapshotPair {
    Matrix s;        // columns sbar(1 .. T'-1)
    Matrix s_next;   // columns sbar(2 .. T')
};

SnapshotPair state_matrices(const ReservoirRun& run);

/// Advances a trained reservoir one step on a new input, without noise.
/// Used when re-lifting predicted states.
Vector step_reservoir(const ReservoirConfig& cfg, const ReservoirWeights& weights,
                      const Vector& state, const Vector& input);

}  // namespace rck
