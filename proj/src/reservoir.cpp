#include "rckoopman/reservoir.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rckoopman/rng.hpp"

namespace rck {

double ReservoirConfig::esp_factor() const { return std::abs(1.0 - c * (a - rho)); }

void ReservoirConfig::validate() const {
    if (n < 1 || k < 1) throw std::invalid_argument("reservoir: n and k must be positive");
    if (!(density > 0.0 && density <= 1.0))
        throw std::invalid_argument("reservoir: density must lie in (0, 1]");
    if (!(rho > 0.0)) throw std::invalid_argument("reservoir: rho must be positive");
    if (!(w_in_gain > 0.0)) throw std::invalid_argument("reservoir: w_in_gain must be positive");
    if (!(noise >= 0.0)) throw std::invalid_argument("reservoir: noise must be nonnegative");
    if (washout < 0) throw std::invalid_argument("reservoir: washout must be nonnegative");
    if (!(esp_factor() < 1.0))
        throw std::invalid_argument("reservoir: echo state property violated, |1 - C(a - rho)| = " +
                                    std::to_string(esp_factor()));
}

ReservoirConfig default_reservoir(SystemKind kind, std::uint64_t seed) {
    ReservoirConfig cfg;
    cfg.k = default_spec(kind).state_dim;
    cfg.n = 1000 - cfg.k;
    cfg.rho = 0.79;
    cfg.noise = 1e-4;
    cfg.a = kind == SystemKind::mackey_glass ? 1.0 : 3.0;
    cfg.c = (kind == SystemKind::van_der_pol || kind == SystemKind::duffing) ? 0.45 : 0.11;
    cfg.seed = seed;
    return cfg;
}

ReservoirWeights build_weights(const ReservoirConfig& cfg) {
    cfg.validate();
    RandomStream rng(cfg.seed, streams::reservoir_weights);
    ReservoirWeights out;
    out.w_in.resize(cfg.n, cfg.k);
    for (Index i = 0; i < cfg.n; ++i)
        for (Index j = 0; j < cfg.k; ++j) out.w_in(i, j) = rng.uniform(-cfg.w_in_gain, cfg.w_in_gain);

    out.w.setZero(cfg.n, cfg.n);
    for (Index i = 0; i < cfg.n; ++i) {
        for (Index j = 0; j < cfg.n; ++j) {
            // Two draws per entry regardless of outcome keeps the layout of the
            // stream independent of the density.
            const double keep = rng.uniform();
            const double value = rng.uniform(-1.0, 1.0);
            if (keep < cfg.density) out.w(i, j) = value;
        }
    }
    const double raw = spectral_radius(out.w);
    if (!(raw > 0.0))
        throw NumericalError("reservoir: raw internal weights have zero spectral radius");
    out.w *= cfg.rho / raw;
    return out;
}

Vector initial_state(const ReservoirConfig& cfg) {
    RandomStream rng(cfg.seed, streams::reservoir_initial);
    Vector s(cfg.n);
    for (Index i = 0; i < cfg.n; ++i) s(i) = rng.uniform();
    return s;
}

ReservoirRun run(const ReservoirConfig& cfg, const TrajectoryData& input) {
    ReservoirWeights w = build_weights(cfg);
    const Vector s0 = initial_state(cfg);
    return drive(cfg, w, input, s0);
}

ReservoirRun drive(const ReservoirConfig& cfg, const ReservoirWeights& weights,
                   const TrajectoryData& input, const Vector& s0, bool use_parallel) {
    if (!(cfg.c >= 0.0)) throw std::invalid_argument("reservoir: c must be nonnegative");
    if (input.dim() != cfg.k || weights.w_in.cols() != cfg.k || weights.w.rows() != cfg.n ||
        weights.w_in.rows() != cfg.n || s0.size() != cfg.n)
        throw std::invalid_argument("reservoir: dimension mismatch");
    const Index total = input.samples();
    if (cfg.washout >= total)
        throw std::invalid_argument("reservoir: washout leaves no samples");
    require_finite(input.states, "reservoir input");

    const Index kept = total - cfg.washout;
    ReservoirRun out;
    out.weights = weights;
    out.states.resize(cfg.n, kept);
    out.concatenated.resize(cfg.n + cfg.k, kept);

    RandomStream noise_rng(cfg.seed, streams::reservoir_noise);
    kernels::ReservoirStep step{&out.weights.w, &out.weights.w_in, cfg.c, cfg.a, cfg.activation};
    Vector prev = s0, next(cfg.n), noise(cfg.n), u(cfg.k);
    const bool noisy = cfg.noise > 0.0;

    for (Index t = 0; t < total; ++t) {
        u = input.states.row(t).transpose();
        if (noisy)
            for (Index i = 0; i < cfg.n; ++i) noise(i) = noise_rng.uniform(-cfg.noise, cfg.noise);
        const std::span<const double> nz =
            noisy ? std::span<const double>(noise.data(), static_cast<std::size_t>(cfg.n))
                  : std::span<const double>();
        const std::span<const double> us(u.data(), static_cast<std::size_t>(cfg.k));
        const std::span<const double> ps(prev.data(), static_cast<std::size_t>(cfg.n));
        const std::span<double> ns(next.data(), static_cast<std::size_t>(cfg.n));
        if (use_parallel)
            kernels::parallel::reservoir_step(step, us, ps, nz, ns);
        else
            kernels::serial::reservoir_step(step, us, ps, nz, ns);
        if (!next.allFinite())
            throw NumericalError("reservoir state became non-finite at step " + std::to_string(t + 1));
        if (t >= cfg.washout) {
            const Index col = t - cfg.washout;
            out.states.col(col) = next;
            out.concatenated.col(col).head(cfg.n) = next;
            out.concatenated.col(col).tail(cfg.k) = u;
        }
        prev.swap(next);
    }
    out.last_state = prev;
    return out;
}

SnapshotPair state_matrices(const ReservoirRun& run) {
    const Index cols = run.retained();
    if (cols < 2) throw std::invalid_argument("state_matrices: need at least two retained steps");
    return {run.concatenated.leftCols(cols - 1), run.concatenated.rightCols(cols - 1)};
}

Vector step_reservoir(const ReservoirConfig& cfg, const ReservoirWeights& weights,
                      const Vector& state, const Vector& input) {
    kernels::ReservoirStep step{&weights.w, &weights.w_in, cfg.c, cfg.a, cfg.activation};
    Vector next(state.size());
    kernels::parallel::reservoir_step(
        step, std::span<const double>(input.data(), static_cast<std::size_t>(input.size())),
        std::span<const double>(state.data(), static_cast<std::size_t>(state.size())), {},
        std::span<double>(next.data(), static_cast<std::size_t>(next.size())));
    return next;
}

}  // namespace rck
