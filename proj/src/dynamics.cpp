#include "rckoopman/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "rckoopman/io.hpp"

namespace rck {
namespace {

using json = nlohmann::json;

Index sample_count(double t0, double t1, double h) {
    if (!(h > 0.0) || !(t1 > t0)) throw std::invalid_argument("integration window: need t1 > t0, h > 0");
    const double steps = (t1 - t0) / h;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps))
        throw std::invalid_argument("integration window: h does not divide t1 - t0");
    return static_cast<Index>(rounded) + 1;
}

void require_bounded(const Vector& x, double t) {
    if (!x.allFinite())
        throw NumericalError("integration blew up at t = " + io::format_double(t));
}

void record_extremes(TrajectoryData& d) {
    d.raw_min = d.states.colwise().minCoeff().transpose();
    d.raw_max = d.states.colwise().maxCoeff().transpose();
}

/// Delayed-value lookup over a uniformly spaced history of nodes.
class HermiteHistory {
public:
    HermiteHistory(double t0, double dt, double before) : t0_(t0), dt_(dt), before_(before) {}

    void push(double x, double dx) {
        x_.push_back(x);
        dx_.push_back(dx);
    }

    double operator()(double t) const {
        if (t <= t0_) return before_;
        double s = (t - t0_) / dt_;
        auto k = static_cast<std::size_t>(std::floor(s));
        if (k + 1 >= x_.size()) {
            // Only rounding can push a lookup onto the newest node.
            if (k + 1 == x_.size() && s - static_cast<double>(k) < 1e-9) return x_.back();
            throw std::logic_error("delayed lookup ahead of the stored solution");
        }
        const double th = std::clamp(s - static_cast<double>(k), 0.0, 1.0);
        const double th2 = th * th, th3 = th2 * th;
        const double h00 = 2 * th3 - 3 * th2 + 1;
        const double h10 = th3 - 2 * th2 + th;
        const double h01 = -2 * th3 + 3 * th2;
        const double h11 = th3 - th2;
        return h00 * x_[k] + h10 * dt_ * dx_[k] + h01 * x_[k + 1] + h11 * dt_ * dx_[k + 1];
    }

private:
    double t0_;
    double dt_;
    double before_;
    std::vector<double> x_;
    std::vector<double> dx_;
};

}  // namespace

std::string to_string(SystemKind kind) {
    switch (kind) {
        case SystemKind::van_der_pol: return "van_der_pol";
        case SystemKind::duffing: return "duffing";
        case SystemKind::mackey_glass: return "mackey_glass";
        case SystemKind::rossler: return "rossler";
        case SystemKind::lorenz63: return "lorenz63";
    }
    throw std::invalid_argument("unknown system kind");
}

SystemKind parse_system(std::string_view name) {
    for (SystemKind k : all_systems())
        if (to_string(k) == name) return k;
    if (name == "lorenz") return SystemKind::lorenz63;
    throw std::invalid_argument("unknown system: " + std::string(name));
}

const std::vector<SystemKind>& all_systems() {
    static const std::vector<SystemKind> systems = {SystemKind::van_der_pol, SystemKind::duffing,
                                                    SystemKind::mackey_glass, SystemKind::rossler,
                                                    SystemKind::lorenz63};
    return systems;
}

double SystemSpec::param(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw std::invalid_argument("missing parameter " + name);
    return it->second;
}

SystemSpec default_spec(SystemKind kind) {
    switch (kind) {
        case SystemKind::van_der_pol: return {kind, {{"mu", 1.0}}, 2, 0.0};
        case SystemKind::duffing:
            return {kind, {{"alpha", 1.0}, {"beta", -1.0}, {"gamma", 0.5}}, 2, 0.0};
        case SystemKind::mackey_glass:
            return {kind, {{"alpha", 0.2}, {"beta", 0.1}, {"n", 10.0}, {"tau", 17.0}}, 1, 17.0};
        case SystemKind::rossler:
            return {kind, {{"alpha", 0.1}, {"beta", 0.1}, {"gamma", 14.0}}, 3, 0.0};
        case SystemKind::lorenz63:
            return {kind, {{"s", 10.0}, {"r", 28.0}, {"b", 8.0 / 3.0}}, 3, 0.0};
    }
    throw std::invalid_argument("unknown system kind");
}

DatasetRecipe default_recipe(SystemKind kind) {
    auto v = [](std::initializer_list<double> xs) {
        Vector out(static_cast<Index>(xs.size()));
        Index i = 0;
        for (double x : xs) out(i++) = x;
        return out;
    };
    switch (kind) {
        case SystemKind::van_der_pol: return {0.0, 20.0, 0.04, v({-4.0, 5.0})};
        case SystemKind::duffing: return {0.0, 20.0, 0.04, v({-1.21, 0.81})};
        case SystemKind::mackey_glass: return {0.0, 500.0, 1.0, v({0.1})};
        case SystemKind::rossler: return {0.0, 300.0, 0.5, v({2.0, 1.0, 5.0})};
        case SystemKind::lorenz63: return {0.0, 15.0, 0.02, v({3.0, 3.0, 19.0})};
    }
    throw std::invalid_argument("unknown system kind");
}

VectorField vector_field(const SystemSpec& spec) {
    switch (spec.kind) {
        case SystemKind::van_der_pol: {
            const double mu = spec.param("mu");
            return [mu](const Vector& x, Vector& dx) {
                dx(0) = x(1);
                dx(1) = mu * (1.0 - x(0) * x(0)) * x(1) - x(0);
            };
        }
        case SystemKind::duffing: {
            const double al = spec.param("alpha"), be = spec.param("beta"),
                         ga = spec.param("gamma");
            return [al, be, ga](const Vector& x, Vector& dx) {
                dx(0) = x(1);
                dx(1) = -ga * x(1) - (al * x(0) * x(0) + be) * x(0);
            };
        }
        case SystemKind::rossler: {
            const double al = spec.param("alpha"), be = spec.param("beta"),
                         ga = spec.param("gamma");
            return [al, be, ga](const Vector& x, Vector& dx) {
                dx(0) = -x(1) - x(2);
                dx(1) = x(0) + al * x(1);
                dx(2) = be + (x(0) - ga) * x(2);
            };
        }
        case SystemKind::lorenz63: {
            const double s = spec.param("s"), r = spec.param("r"), b = spec.param("b");
            return [s, r, b](const Vector& x, Vector& dx) {
                dx(0) = s * (x(1) - x(0));
                dx(1) = r * x(0) - x(1) - x(0) * x(2);
                dx(2) = x(0) * x(1) - b * x(2);
            };
        }
        case SystemKind::mackey_glass:
            throw std::invalid_argument("mackey_glass is a delay system; use integrate_dde");
    }
    throw std::invalid_argument("unknown system kind");
}

TrajectoryData integrate_ode(const VectorField& f, const Vector& x0, double t0, double t1,
                             double h, int substeps) {
    if (substeps < 1) throw std::invalid_argument("integrate_ode: substeps must be >= 1");
    const Index samples = sample_count(t0, t1, h);
    const Index dim = x0.size();
    const double dt = h / substeps;

    TrajectoryData out;
    out.time_step = h;
    out.t0 = t0;
    out.states.resize(samples, dim);
    out.states.row(0) = x0.transpose();

    Vector x = x0, k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    for (Index i = 1; i < samples; ++i) {
        for (int j = 0; j < substeps; ++j) {
            f(x, k1);
            tmp = x + 0.5 * dt * k1;
            f(tmp, k2);
            tmp = x + 0.5 * dt * k2;
            f(tmp, k3);
            tmp = x + dt * k3;
            f(tmp, k4);
            x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            require_bounded(x, t0 + (static_cast<double>(i - 1) + (j + 1.0) / substeps) * h);
        }
        out.states.row(i) = x.transpose();
    }
    record_extremes(out);
    return out;
}

TrajectoryData integrate_ode(const SystemSpec& spec, const Vector& x0, double t0, double t1,
                             double h) {
    if (spec.is_delay()) throw std::invalid_argument("integrate_ode: delay system");
    if (x0.size() != spec.state_dim)
        throw std::invalid_argument("integrate_ode: initial condition has wrong dimension");
    return integrate_ode(vector_field(spec), x0, t0, t1, h, 10);
}

TrajectoryData integrate_dde(const SystemSpec& spec, double history, double t0, double t1,
                             double h, int substeps) {
    if (spec.kind != SystemKind::mackey_glass)
        throw std::invalid_argument("integrate_dde: only mackey_glass is a delay system");
    if (substeps < 1) throw std::invalid_argument("integrate_dde: substeps must be >= 1");
    const double al = spec.param("alpha"), be = spec.param("beta"), n = spec.param("n");
    const double tau = spec.delay;
    const Index samples = sample_count(t0, t1, h);
    const double dt = h / substeps;
    if (tau < dt) throw std::invalid_argument("integrate_dde: delay shorter than internal step");

    auto rhs = [&](double x, double xd) { return al * xd / (1.0 + std::pow(xd, n)) - be * x; };

    HermiteHistory past(t0, dt, history);
    TrajectoryData out;
    out.time_step = h;
    out.t0 = t0;
    out.states.resize(samples, 1);
    out.states(0, 0) = history;

    double x = history;
    double t = t0;
    past.push(x, rhs(x, past(t - tau)));
    for (Index i = 1; i < samples; ++i) {
        for (int j = 0; j < substeps; ++j) {
            const double d0 = past(t - tau);
            const double dm = past(t + 0.5 * dt - tau);
            const double d1 = past(t + dt - tau);
            const double k1 = rhs(x, d0);
            const double k2 = rhs(x + 0.5 * dt * k1, dm);
            const double k3 = rhs(x + 0.5 * dt * k2, dm);
            const double k4 = rhs(x + dt * k3, d1);
            x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t = t0 + (static_cast<double>(i - 1) * substeps + j + 1) * dt;
            if (!std::isfinite(x))
                throw NumericalError("integration blew up at t = " + io::format_double(t));
            past.push(x, rhs(x, past(t - tau)));
        }
        out.states(i, 0) = x;
    }
    record_extremes(out);
    return out;
}

TrajectoryData rescale(const TrajectoryData& raw) {
    require_finite(raw.states, "rescale");
    const Index dim = raw.dim();
    Scaling sc{Vector(dim), Vector(dim)};
    TrajectoryData out = raw;
    out.raw_min = raw.states.colwise().minCoeff().transpose();
    out.raw_max = raw.states.colwise().maxCoeff().transpose();
    for (Index k = 0; k < dim; ++k) {
        const double lo = out.raw_min(k), hi = out.raw_max(k);
        if (!(hi > lo))
            throw std::invalid_argument("rescale: component " + std::to_string(k + 1) +
                                        " is constant");
        sc.gain(k) = 2.0 / (hi - lo);
        sc.offset(k) = -1.0 - sc.gain(k) * lo;
        for (Index t = 0; t < raw.samples(); ++t)
            out.states(t, k) = sc.gain(k) * (raw.states(t, k) - lo) - 1.0;
    }
    out.scaling = sc;
    return out;
}

Matrix unscale(const TrajectoryData& scaled) {
    if (!scaled.scaling) return scaled.states;
    const Scaling& sc = *scaled.scaling;
    Matrix raw = scaled.states;
    for (Index k = 0; k < raw.cols(); ++k)
        raw.col(k) = (raw.col(k).array() - sc.offset(k)) / sc.gain(k);
    return raw;
}

TrajectoryData make_dataset(SystemKind kind) {
    const SystemSpec spec = default_spec(kind);
    const DatasetRecipe r = default_recipe(kind);
    TrajectoryData raw = spec.is_delay() ? integrate_dde(spec, r.x0(0), r.t0, r.t1, r.h)
                                         : integrate_ode(spec, r.x0, r.t0, r.t1, r.h);
    return rescale(raw);
}

void save_trajectory(const TrajectoryData& data, const std::string& csv_path) {
    Matrix table(data.samples(), data.dim() + 1);
    for (Index i = 0; i < data.samples(); ++i) table(i, 0) = data.time(i);
    table.rightCols(data.dim()) = data.states;
    std::vector<std::string> header{"t"};
    for (auto& name : io::numbered("x", data.dim())) header.push_back(name);
    io::write_csv(csv_path, table, header);

    auto to_list = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    json side;
    side["t0"] = data.t0;
    side["time_step"] = data.time_step;
    side["raw_min"] = to_list(data.raw_min);
    side["raw_max"] = to_list(data.raw_max);
    if (data.scaling) {
        side["scaling"]["offset"] = to_list(data.scaling->offset);
        side["scaling"]["gain"] = to_list(data.scaling->gain);
    } else {
        side["scaling"] = nullptr;
    }
    std::ofstream out(csv_path + ".scaling.json");
    if (!out) throw std::runtime_error("cannot write scaling sidecar for " + csv_path);
    out << side.dump(2) << '\n';
}

TrajectoryData load_trajectory(const std::string& csv_path) {
    const io::CsvTable table = io::read_csv(csv_path, true);
    if (table.values.cols() < 2 || table.header.empty() || table.header.front() != "t")
        throw std::invalid_argument("load_trajectory: expected header t,x1,...");
    TrajectoryData d;
    d.states = table.values.rightCols(table.values.cols() - 1);
    require_finite(d.states, "load_trajectory");
    d.t0 = table.values.rows() ? table.values(0, 0) : 0.0;
    d.time_step = table.values.rows() > 1 ? table.values(1, 0) - table.values(0, 0) : 0.0;
    record_extremes(d);

    std::ifstream side(csv_path + ".scaling.json");
    if (side) {
        const json j = json::parse(side);
        auto to_vec = [](const json& a) {
            const auto xs = a.get<std::vector<double>>();
            return Vector(Eigen::Map<const Vector>(xs.data(), static_cast<Index>(xs.size())));
        };
        d.t0 = j.at("t0").get<double>();
        d.time_step = j.at("time_step").get<double>();
        d.raw_min = to_vec(j.at("raw_min"));
        d.raw_max = to_vec(j.at("raw_max"));
        if (!j.at("scaling").is_null())
            d.scaling = Scaling{to_vec(j["scaling"]["offset"]), to_vec(j["scaling"]["gain"])};
    }
    return d;
}

}  // namespace rck
