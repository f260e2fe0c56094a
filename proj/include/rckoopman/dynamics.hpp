#pragma once

// Benchmark systems: vector fields, fixed-step integrators and the [-1, 1]
// rescaling applied to every dataset before it reaches a reservoir.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "rckoopman/linalg.hpp"

namespace rck {

enum class SystemKind { van_der_pol, duffing, mackey_glass, rossler, lorenz63 };

std::string to_string(SystemKind kind);
SystemKind parse_system(std::string_view name);
const std::vector<SystemKind>& all_systems();

struct SystemSpec {
    SystemKind kind;
    std::map<std::string, double> params;
    Index state_dim;
    double delay = 0.0;  // > 0 only for mackey_glass

    double param(const std::string& name) const;
    bool is_delay() const { return delay > 0.0; }
};

/// Parameters used for the published experiments.
SystemSpec default_spec(SystemKind kind);

/// Per-component affine map y = gain * x + offset.
struct Scaling {
    Vector offset;
    Vector gain;
};

struct TrajectoryData {
    Matrix states;  // T x K, one sample per row
    double time_step = 0.0;
    double t0 = 0.0;
    std::optional<Scaling> scaling;  // set once rescaled
    Vector raw_min;
    Vector raw_max;

    Index samples() const { return states.rows(); }
    Index dim() const { return states.cols(); }
    double time(Index i) const { return t0 + static_cast<double>(i) * time_step; }
};

/// In-place right-hand side: dx = f(x).
using VectorField = std::function<void(const Vector& x, Vector& dx)>;

VectorField vector_field(const SystemSpec& spec);

/// Classical RK4 over [t0, t1] with `substeps` internal steps per sample
/// interval h. Returns the samples t0, t0 + h, ..., t1.
TrajectoryData integrate_ode(const VectorField& f, const Vector& x0, double t0, double t1,
                             double h, int substeps = 10);

TrajectoryData integrate_ode(const SystemSpec& spec, const Vector& x0, double t0, double t1,
                             double h);

/// Mackey-Glass with constant history x(t < t0) = history and x(t0) = history.
/// RK4 with h / substeps internal steps; the delayed value is read from the
/// stored solution through cubic Hermite interpolation.
TrajectoryData integrate_dde(const SystemSpec& spec, double history, double t0, double t1,
                             double h, int substeps = 20);

/// Maps every component's [min, max] onto [-1, 1].
TrajectoryData rescale(const TrajectoryData& raw);
Matrix unscale(const TrajectoryData& scaled);

/// Generates, integrates and rescales one of the benchmark datasets.
TrajectoryData make_dataset(SystemKind kind);

/// Integration window and initial condition of the published datasets.
struct DatasetRecipe {
    double t0;
    double t1;
    double h;
    Vector x0;  // for mackey_glass: the constant history value
};
DatasetRecipe default_recipe(SystemKind kind);

/// CSV with header `t,x1,...,xK` and 17 significant digits, plus a JSON
/// sidecar (`<path>.scaling.json`) carrying the time grid and scaling record.
void save_trajectory(const TrajectoryData& data, const std::string& csv_path);
TrajectoryData load_trajectory(const std::string& csv_path);

}  // namespace rck
