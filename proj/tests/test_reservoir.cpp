#include <gtest/gtest.h>

#include <cmath>

#include "rckoopman/reservoir.hpp"

using namespace rck;

namespace {

TrajectoryData ramp(Index samples, Index dim) {
    TrajectoryData d;
    d.states.resize(samples, dim);
    for (Index t = 0; t < samples; ++t)
        for (Index k = 0; k < dim; ++k) d.states(t, k) = std::sin(0.1 * static_cast<double>(t) + k);
    d.time_step = 1.0;
    return d;
}

ReservoirConfig small_config() {
    ReservoirConfig c;
    c.n = 20;
    c.k = 2;
    c.density = 0.3;
    c.washout = 5;
    c.seed = 9;
    return c;
}

}  // namespace

TEST(EchoState, PublishedParameterArithmetic) {
    // |1 - 0.45 (3 - 0.79)| and |1 - 0.11 (1 - 0.79)|
    EXPECT_NEAR(default_reservoir(SystemKind::van_der_pol).esp_factor(), 0.0055, 1e-12);
    EXPECT_NEAR(default_reservoir(SystemKind::duffing).esp_factor(), 0.0055, 1e-12);
    EXPECT_NEAR(default_reservoir(SystemKind::mackey_glass).esp_factor(), 0.9769, 1e-12);
    EXPECT_NEAR(default_reservoir(SystemKind::rossler).esp_factor(), std::abs(1 - 0.11 * (3 - 0.79)), 1e-12);
}

TEST(EchoState, ViolationRejected) {
    ReservoirConfig c = small_config();
    c.c = 1.0;  // |1 - 1 * (3 - 0.79)| = 1.21
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_THROW(build_weights(c), std::invalid_argument);
}

TEST(Defaults, PublishedSettings) {
    for (SystemKind kind : all_systems()) {
        const ReservoirConfig c = default_reservoir(kind);
        EXPECT_EQ(c.n + c.k, 1000);
        EXPECT_EQ(c.rho, 0.79);
        EXPECT_EQ(c.noise, 1e-4);
        EXPECT_EQ(c.washout, 100);
        EXPECT_EQ(c.a, kind == SystemKind::mackey_glass ? 1.0 : 3.0);
        const bool slow = kind == SystemKind::van_der_pol || kind == SystemKind::duffing;
        EXPECT_EQ(c.c, slow ? 0.45 : 0.11);
    }
}

TEST(Weights, DensityAndSpectralRadius) {
    ReservoirConfig c = default_reservoir(SystemKind::van_der_pol, 3);
    const ReservoirWeights w = build_weights(c);
    const double nonzero = static_cast<double>((w.w.array() != 0.0).count());
    const double density = nonzero / static_cast<double>(w.w.size());
    // Binomial(1e6, 0.02): standard deviation 1.4e-4.
    EXPECT_NEAR(density, 0.02, 1e-3);
    EXPECT_NEAR(spectral_radius(Matrix(w.w)), 0.79, 1e-10);
    EXPECT_LE(w.w_in.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_EQ(w.w_in.rows(), 998);
    EXPECT_EQ(w.w_in.cols(), 2);
}

TEST(Weights, SeedSelectsRealization) {
    const ReservoirConfig a = small_config();
    ReservoirConfig b = a;
    b.seed = 10;
    EXPECT_EQ(build_weights(a).w, build_weights(a).w);
    EXPECT_NE(build_weights(a).w, build_weights(b).w);
}

TEST(Drive, ZeroTimescaleFreezesState) {
    ReservoirConfig c = small_config();
    c.c = 0.0;
    const ReservoirWeights w = build_weights(small_config());
    const Vector s0 = initial_state(c);
    const ReservoirRun r = drive(c, w, ramp(30, 2), s0);
    for (Index t = 0; t < r.retained(); ++t) EXPECT_EQ(r.states.col(t), s0);
}

TEST(Drive, ZeroWeightsDecayGeometrically) {
    ReservoirConfig c = small_config();
    c.noise = 0.0;
    c.washout = 0;
    ReservoirWeights w;
    w.w = kernels::RowMatrix::Zero(c.n, c.n);
    w.w_in = kernels::RowMatrix::Zero(c.n, c.k);
    const Vector s0 = initial_state(c);
    const ReservoirRun r = drive(c, w, ramp(10, 2), s0);
    const double f = 1.0 - c.c * c.a;
    for (Index t = 0; t < r.retained(); ++t)
        EXPECT_LT((r.states.col(t) - std::pow(f, static_cast<double>(t + 1)) * s0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Drive, SingleNodeByHand) {
    ReservoirConfig c;
    c.n = 1;
    c.k = 1;
    c.c = 0.5;
    c.a = 1.0;
    c.noise = 0.0;
    c.washout = 0;
    ReservoirWeights w;
    w.w = kernels::RowMatrix::Constant(1, 1, 0.3);
    w.w_in = kernels::RowMatrix::Constant(1, 1, 2.0);
    TrajectoryData in;
    in.states.resize(3, 1);
    in.states << 0.1, -0.2, 0.4;
    const ReservoirRun r = drive(c, w, in, Vector::Constant(1, 0.6));
    double s = 0.6;
    for (Index t = 0; t < 3; ++t) {
        s = 0.5 * s + 0.5 * std::tanh(2.0 * in.states(t, 0) + 0.3 * s);
        EXPECT_NEAR(r.states(0, t), s, 1e-15);
        EXPECT_EQ(r.concatenated(1, t), in.states(t, 0));
    }
}

TEST(Drive, SerialAndParallelIdentical) {
    const ReservoirConfig c = small_config();
    const ReservoirWeights w = build_weights(c);
    const Vector s0 = initial_state(c);
    const TrajectoryData in = ramp(40, 2);
    EXPECT_EQ(drive(c, w, in, s0, true).states, drive(c, w, in, s0, false).states);
}

TEST(Drive, StatesStayBoundedAndFinite) {
    const ReservoirConfig c = default_reservoir(SystemKind::duffing);
    const ReservoirRun r = run(c, make_dataset(SystemKind::duffing));
    EXPECT_TRUE(r.states.allFinite());
    EXPECT_LE(r.states.cwiseAbs().maxCoeff(), 1.0 + c.c * c.a);
}

TEST(Drive, ForgetsInitialCondition) {
    // Van der Pol settings: contraction |1 - C(a - rho)| = 0.0055 per step.
    const ReservoirConfig c = default_reservoir(SystemKind::van_der_pol, 4);
    const ReservoirWeights w = build_weights(c);
    const TrajectoryData in = make_dataset(SystemKind::van_der_pol);
    const ReservoirRun a = drive(c, w, in, Vector::Zero(c.n));
    const ReservoirRun b = drive(c, w, in, Vector::Ones(c.n));
    EXPECT_LT((a.states - b.states).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Drive, WashoutValidation) {
    ReservoirConfig c = small_config();
    c.washout = 30;
    EXPECT_THROW(run(c, ramp(30, 2)), std::invalid_argument);
    c.washout = 0;
    EXPECT_THROW(run(c, ramp(30, 3)), std::invalid_argument);
}

TEST(Run, FullScaleShapes) {
    const ReservoirRun r = run(default_reservoir(SystemKind::van_der_pol), make_dataset(SystemKind::van_der_pol));
    EXPECT_EQ(r.concatenated.rows(), 1000);
    EXPECT_EQ(r.concatenated.cols(), 401);
    const SnapshotPair sp = state_matrices(r);
    EXPECT_EQ(sp.s.cols(), 400);
    EXPECT_EQ(sp.s_next.cols(), 400);
}

TEST(Run, Deterministic) {
    const ReservoirConfig c = small_config();
    const TrajectoryData in = ramp(50, 2);
    EXPECT_EQ(run(c, in).concatenated, run(c, in).concatenated);
}

TEST(StateMatrices, ShiftedViewAndInputRows) {
    const ReservoirConfig c = small_config();
    const TrajectoryData in = ramp(50, 2);
    const ReservoirRun r = run(c, in);
    const SnapshotPair sp = state_matrices(r);
    for (Index t = 0; t + 1 < sp.s.cols(); ++t) EXPECT_EQ(sp.s.col(t + 1), sp.s_next.col(t));
    for (Index t = 0; t < r.retained(); ++t)
        EXPECT_EQ(r.concatenated.col(t).tail(2), in.states.row(t + c.washout).transpose());
}

TEST(StepReservoir, MatchesNoiselessDrive) {
    ReservoirConfig c = small_config();
    c.noise = 0.0;
    c.washout = 0;
    const ReservoirWeights w = build_weights(c);
    const TrajectoryData in = ramp(5, 2);
    const Vector s0 = initial_state(c);
    const ReservoirRun r = drive(c, w, in, s0);
    Vector s = s0;
    for (Index t = 0; t < 5; ++t) s = step_reservoir(c, w, s, in.states.row(t).transpose());
    EXPECT_LT((s - r.last_state).cwiseAbs().maxCoeff(), 1e-15);
}
