#pragma once

// Model evaluation: optimization residue, reconstruction and prediction by
// iterating K, NRMSE reports, re-lifted prediction and the spectrum.

#include <functional>
#include <optional>

#include "rckoopman/koopman.hpp"
#include "rckoopman/linalg.hpp"
#include "rckoopman/reservoir.hpp"

namespace rck {

/// Dictionary values above this magnitude end an iteration.
inline constexpr double divergence_threshold = 1e12;

struct Iteration {
    Matrix values;                    // D x steps
    std::optional<Index> diverged_at;  // first step (1-based) that exceeded the threshold
};

double residue(const KoopmanModel& model, const Matrix& psi, const Matrix& psi_next);

/// Iterates psi <- K psi from `start`, one column per step. After a divergence
/// the remaining columns repeat the last finite value.
Iteration iterate(const Matrix& k, const Vector& start, Index steps);

/// Columns K Psi(1), K^2 Psi(1), ...
Iteration reconstruct(const KoopmanModel& model, Index steps);

/// Columns K Psi(T), K^2 Psi(T), ...
Iteration predict(const KoopmanModel& model, Index steps);

/// Re-evaluates the whole dictionary at a predicted state. Stateful
/// evaluators (the reservoir one) advance on every call.
using StateLifter = std::function<Vector(const Vector& state)>;

/// Lifter for an explicit RBF dictionary.
StateLifter rbf_lifter(const Dictionary& dict);

/// Lifter for a learned reservoir dictionary: each call feeds the state into
/// the reservoir and reads [W1; W2] sbar.
StateLifter reservoir_lifter(const Dictionary& dict, const ReservoirConfig& cfg,
                             const ReservoirWeights& weights, const Vector& last_state);

/// Prediction that projects back onto the dictionary manifold: one K step,
/// extract the projection rows, lift them again. Returns K x steps states.
Iteration predict_relift(const KoopmanModel& model, const StateLifter& lift, Index steps);

struct ErrorReport {
    Matrix error;        // horizon x D, E(t) = K^t Psi(1) - Psi(t+1)
    Vector nrmse_full;   // D; NaN where the reference row has zero variance
    Vector nrmse;        // projection rows only
    double mean_nrmse = 0.0;
    Index undefined_rows = 0;
    std::optional<Index> diverged_at;
};

/// NRMSE of `reconstruction` against `reference` over the first `horizon`
/// columns. reference column t is Psi(t+2) when reconstruction column t is
/// K^{t+1} Psi(1), i.e. pass Psi' as the reference.
ErrorReport error_report(const KoopmanModel& model, const Iteration& reconstruction,
                         const Matrix& reference, Index horizon);

/// Element-wise NRMSE between rows of two equally shaped matrices.
Vector nrmse_rows(const Matrix& estimate, const Matrix& reference);

struct SpectrumResult {
    CVector eigenvalues;
    CMatrix left;   // eigenfunction coefficients, unit norm, first nonzero entry real > 0
    CMatrix right;
    Index rank = 0;
    Vector unit_circle_distance;  // |lambda| - 1
};

SpectrumResult spectrum(const KoopmanModel& model);
SpectrumResult spectrum(const Matrix& k);

}  // namespace rck
