// Acceptance gate. Runs the benchmark grid over three seeds and prints one
// PASS/FAIL line per criterion; exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rckoopman/experiment.hpp"

using namespace rck;

namespace {

constexpr int seeds = 3;

struct Line {
    int id;
    std::string title;
    bool pass;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string short_name(SystemKind s) {
    switch (s) {
        case SystemKind::van_der_pol: return "vdp";
        case SystemKind::duffing: return "duffing";
        case SystemKind::mackey_glass: return "mg";
        case SystemKind::rossler: return "rossler";
        case SystemKind::lorenz63: return "lorenz";
    }
    return "?";
}

std::string short_name(MethodKind m) {
    switch (m) {
        case MethodKind::edmd_rbf: return "edmd";
        case MethodKind::method1: return "m1";
        case MethodKind::method2: return "m2";
        case MethodKind::dmd: return "dmd";
    }
    return "?";
}

Matrix random_matrix(Index rows, Index cols, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = dist(gen);
    return m;
}

double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

using Grid = std::map<SystemKind, std::vector<SystemEvaluation>>;

// Median over seeds of f(outcome of method m on system s).
double med(const Grid& g, SystemKind s, MethodKind m, const std::function<double(const MethodOutcome&)>& f) {
    std::vector<double> v;
    for (const auto& ev : g.at(s)) v.push_back(f(ev.methods.at(m)));
    return median(v);
}

double residue_of(const MethodOutcome& o) { return o.residue; }

Line residue_ordering(const Grid& g, double seconds) {
    Line l{1, "residue ordering m1 < m2 < edmd (median of 3 seeds)", seconds < 300.0, ""};
    std::ostringstream d;
    for (SystemKind s : all_systems()) {
        const double m1 = med(g, s, MethodKind::method1, residue_of);
        const double m2 = med(g, s, MethodKind::method2, residue_of);
        const double ed = med(g, s, MethodKind::edmd_rbf, residue_of);
        const bool ok = m1 < m2 && m2 < ed;
        l.pass = l.pass && ok;
        d << short_name(s) << " " << sci(m1) << "<" << sci(m2) << "<" << sci(ed) << (ok ? "" : " (violated)") << "; ";
    }
    d << "runtime " << sci(seconds) << " s (limit 300)";
    l.detail = d.str();
    return l;
}

Line residue_magnitudes(const Grid& g) {
    Line l{2, "residue magnitudes m1 <= 1e-12, m2 <= 1e-8, edmd mackey_glass > 1", true, ""};
    std::ostringstream d;
    for (SystemKind s : all_systems()) {
        const double m1 = med(g, s, MethodKind::method1, residue_of);
        const double m2 = med(g, s, MethodKind::method2, residue_of);
        const bool ok = m1 <= 1e-12 && m2 <= 1e-8;
        l.pass = l.pass && ok;
        d << short_name(s) << " m1 " << sci(m1) << " m2 " << sci(m2) << (ok ? "" : " (violated)") << "; ";
    }
    const double mg = med(g, SystemKind::mackey_glass, MethodKind::edmd_rbf, residue_of);
    l.pass = l.pass && mg > 1.0;
    d << "mg edmd " << sci(mg);
    l.detail = d.str();
    return l;
}

Line reconstruction(const Grid& g) {
    Line l{3, "reconstruction mean nrmse over 100 steps", true, ""};
    std::ostringstream d;
    auto nrmse = [](const MethodOutcome& o) { return o.mean_nrmse; };
    for (SystemKind s : all_systems()) {
        const bool chaotic = s == SystemKind::rossler || s == SystemKind::lorenz63;
        const double bound2 = chaotic ? 2.0 : 0.5;
        const double m1 = med(g, s, MethodKind::method1, nrmse);
        const double m2 = med(g, s, MethodKind::method2, nrmse);
        const bool ok = m1 <= 1e-6 && m2 <= bound2;
        l.pass = l.pass && ok;
        d << short_name(s) << " m1 " << sci(m1) << " m2 " << sci(m2) << " (<= " << bound2 << ")"
          << (ok ? "" : " (violated)") << "; ";
    }
    l.detail = d.str();
    return l;
}

double count_if(const CVector& ev, const std::function<bool(std::complex<double>)>& f) {
    double n = 0.0;
    for (Index i = 0; i < ev.size(); ++i) n += f(ev(i)) ? 1.0 : 0.0;
    return n;
}

Line spectrum_checks(const Grid& g) {
    Line l{4, "spectrum structure (duffing edmd and m2, mackey_glass m2)", true, ""};
    std::ostringstream d;
    const SystemKind duf = SystemKind::duffing, mg = SystemKind::mackey_glass;

    const double edmd_rank = med(g, duf, MethodKind::edmd_rbf, [](const MethodOutcome& o) { return double(o.rank); });
    const double edmd_size = static_cast<double>(g.at(duf).front().methods.at(MethodKind::edmd_rbf).model.size());
    const double near_zero = med(g, duf, MethodKind::edmd_rbf, [](const MethodOutcome& o) {
        return count_if(o.eigenvalues, [](auto z) { return std::abs(z) < 1e-6; });
    });
    const bool a = edmd_rank < edmd_size && near_zero >= 100.0;
    d << "(a) edmd rank " << edmd_rank << "/" << edmd_size << ", |lambda|<1e-6: " << near_zero << (a ? "" : " (violated)");

    const double m2_rank = med(g, duf, MethodKind::method2, [](const MethodOutcome& o) { return double(o.rank); });
    const double m2_size = static_cast<double>(g.at(duf).front().methods.at(MethodKind::method2).model.size());
    const bool b = m2_rank == m2_size;
    d << "; (b) m2 rank " << m2_rank << "/" << m2_size << (b ? "" : " (violated)");

    const std::complex<double> target(0.9885, 0.0551);
    const double pair = med(g, duf, MethodKind::method2, [&](const MethodOutcome& o) {
        double best_up = 1e300, best_down = 1e300;
        for (Index i = 0; i < o.eigenvalues.size(); ++i) {
            best_up = std::min(best_up, std::abs(o.eigenvalues(i) - target));
            best_down = std::min(best_down, std::abs(o.eigenvalues(i) - std::conj(target)));
        }
        return std::max(best_up, best_down);
    });
    const bool c = pair <= 0.02;
    d << "; (c) distance to 0.9885+-0.0551i: " << sci(pair) << (c ? "" : " (violated)");

    const double outside = med(g, mg, MethodKind::method2, [](const MethodOutcome& o) {
        return count_if(o.eigenvalues, [](auto z) { return std::abs(z) > 1.0 + 1e-3; });
    });
    const double at_one = med(g, mg, MethodKind::method2, [](const MethodOutcome& o) {
        return count_if(o.eigenvalues, [](auto z) { return std::abs(z - 1.0) <= 1e-3; });
    });
    const bool dd = outside == 0.0 && at_one == 1.0;
    d << "; (d) mg m2 |lambda|>1+1e-3: " << outside << ", near 1: " << at_one << (dd ? "" : " (violated)");

    l.pass = a && b && c && dd;
    l.detail = d.str();
    return l;
}

Line prediction(const Grid& g) {
    Line l{5, "prediction boundedness and convergence to the mean", true, ""};
    const double vdp = med(g, SystemKind::van_der_pol, MethodKind::method1, [](const MethodOutcome& o) {
        return o.prediction.leftCols(100).cwiseAbs().maxCoeff();
    });
    std::vector<double> dist;
    for (const auto& ev : g.at(SystemKind::mackey_glass)) {
        const Matrix& p = ev.methods.at(MethodKind::method2).prediction;
        dist.push_back((p.col(p.cols() - 1) - ev.train_mean).cwiseAbs().maxCoeff());
    }
    const double mg = median(dist);
    l.pass = vdp <= 2.0 && mg <= 0.1;
    std::ostringstream d;
    d << "vdp m1 max|xhat| over 100 steps " << sci(vdp) << " (<= 2); mg m2 distance to training mean at step 500 "
      << sci(mg) << " (<= 0.1; seeds";
    for (double v : dist) d << " " << sci(v);
    d << ")";
    l.detail = d.str();
    return l;
}

// Seed-independent property checks. Each returns an empty string on success.
std::vector<std::pair<std::string, std::string>> properties(const Grid& g) {
    std::vector<std::pair<std::string, std::string>> out;
    auto check = [&](const std::string& name, const std::function<std::string()>& f) {
        std::string msg;
        try {
            msg = f();
        } catch (const std::exception& e) {
            msg = std::string("threw: ") + e.what();
        }
        out.emplace_back(name, msg);
    };

    check("moore-penrose", [] {
        for (auto [r, c] : {std::pair<Index, Index>{5, 3}, {3, 5}, {40, 40}, {80, 17}}) {
            const Matrix a = random_matrix(r, c, static_cast<unsigned>(r * 100 + c));
            const Matrix p = pinv(a);
            const double e = std::max({rel(a * p * a, a), rel(p * a * p, p), rel((a * p).transpose(), a * p),
                                       rel((p * a).transpose(), p * a)});
            if (e > 1e-8) return "error " + sci(e);
        }
        return std::string();
    });
    check("vec-kron", [] {
        const Matrix a = random_matrix(3, 3, 1), x = random_matrix(3, 3, 2), b = random_matrix(3, 3, 3);
        const double e = (vec(a * x * b) - kron(b.transpose(), a) * vec(x)).cwiseAbs().maxCoeff();
        return e <= 1e-12 ? std::string() : "error " + sci(e);
    });
    check("rk4 order", [] {
        const VectorField f = [](const Vector& x, Vector& dx) { dx = -x; };
        auto err = [&](int sub) {
            const TrajectoryData d = integrate_ode(f, Vector::Ones(1), 0.0, 2.0, 0.2, sub);
            return std::abs(d.states(d.samples() - 1, 0) - std::exp(-2.0));
        };
        const double ratio = err(1) / err(2);
        return ratio >= 12.0 ? std::string() : "ratio " + sci(ratio);
    });
    check("esp arithmetic", [] {
        const double f = default_reservoir(SystemKind::van_der_pol).esp_factor();
        return std::abs(f - 0.0055) < 1e-12 && f < 1.0 ? std::string() : "factor " + sci(f);
    });
    check("echo-state forgetting", [] {
        const ReservoirConfig c = default_reservoir(SystemKind::van_der_pol, 7);
        const ReservoirWeights w = build_weights(c);
        const TrajectoryData in = make_dataset(SystemKind::van_der_pol);
        const double e = (drive(c, w, in, Vector::Zero(c.n)).states - drive(c, w, in, Vector::Ones(c.n)).states)
                             .cwiseAbs()
                             .maxCoeff();
        return e < 1e-6 ? std::string() : "difference " + sci(e);
    });
    check("dmd oracle", [] {
        Matrix a(2, 2);
        a << 0.9, -0.2, 0.1, 0.8;
        TrajectoryData d;
        d.states.resize(20, 2);
        Vector x = Vector::Ones(2);
        for (Index t = 0; t < 20; ++t, x = a * x) d.states.row(t) = x.transpose();
        const double e = (fit_dmd(d).k - a).cwiseAbs().maxCoeff();
        return e <= 1e-8 ? std::string() : "error " + sci(e);
    });
    check("m2 residue log non-increasing (weights)", [] {
        ReservoirConfig c;
        c.n = 20;
        c.k = 2;
        c.density = 0.3;
        c.washout = 10;
        TrajectoryData d = make_dataset(SystemKind::van_der_pol);
        d.states = d.states.topRows(80).eval();
        const SnapshotPair sp = state_matrices(run(c, d));
        Method2Options o;
        o.l = 3;
        o.max_iters = 20;
        o.tol = 0.0;
        o.variant = Method2Variant::weights;
        const auto log = method2(sp.s, sp.s_next, 2, o).iteration_log;
        for (std::size_t i = 1; i < log.size(); ++i)
            if (log[i] > log[i - 1] * (1 + 1e-10)) return "sweep " + std::to_string(i) + " rose to " + sci(log[i]);
        return std::string();
    });
    check("step2 variants agree", [] {
        const Matrix z = random_matrix(6, 7, 14);
        const Matrix s = z.leftCols(6), s_next = z.rightCols(6);
        const Matrix k = random_matrix(4, 4, 15) * 0.5;
        const double e = rel(method2_step2_weights(s, s_next, k, 2) * s, method2_step2_values(s, s_next, k, 2));
        return e <= 1e-8 ? std::string() : "error " + sci(e);
    });
    check("step2 weights oracle", [] {
        const Matrix z = random_matrix(3, 7, 10);
        const Matrix s = z.leftCols(6), s_next = z.rightCols(6);
        const Matrix k = random_matrix(2, 2, 11);
        // Normal equations of the residual, linear in the three entries of W1.
        auto residual = [&](const Matrix& w1) {
            Matrix r(2, 6);
            r.row(0) = w1 * s_next - k(0, 0) * w1 * s - k(0, 1) * s.row(2);
            r.row(1) = s_next.row(2) - k(1, 0) * w1 * s - k(1, 1) * s.row(2);
            return Vector(Eigen::Map<const Vector>(r.data(), r.size()));
        };
        const Vector r0 = residual(Matrix::Zero(1, 3));
        Matrix jac(12, 3);
        for (Index j = 0; j < 3; ++j) {
            Matrix e = Matrix::Zero(1, 3);
            e(0, j) = 1.0;
            jac.col(j) = residual(e) - r0;
        }
        const Vector w = (jac.transpose() * jac).ldlt().solve(-(jac.transpose() * r0));
        const double e = (method2_step2_weights(s, s_next, k, 1).transpose() - w).cwiseAbs().maxCoeff();
        return e <= 1e-8 ? std::string() : "error " + sci(e);
    });
    check("companion structure", [] {
        const Matrix z = random_matrix(15, 11, 16);
        const Matrix s = z.leftCols(10), s_next = z.rightCols(10);
        const TransitionMatrix tm = transition_matrix(s, s_next);
        if (!tm.companion) return std::string("not detected");
        const double e = (tm.m - pinv(s) * s_next).cwiseAbs().maxCoeff();
        return e <= 1e-8 ? std::string() : "error " + sci(e);
    });
    check("determinism", [&] {
        EvaluationOptions o;
        const SystemEvaluation again = evaluate_system(SystemKind::van_der_pol, 1, o);
        const SystemEvaluation* first = nullptr;
        for (const auto& ev : g.at(SystemKind::van_der_pol))
            if (ev.seed == 1) first = &ev;
        for (MethodKind m : o.methods)
            if (again.methods.at(m).model.k != first->methods.at(m).model.k) return "K differs for " + to_string(m);
        return std::string();
    });
    return out;
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    Grid grid;
    for (SystemKind s : all_systems()) {
        EvaluationOptions o;
        if (s == SystemKind::duffing) o.spectra = {MethodKind::edmd_rbf, MethodKind::method2};
        if (s == SystemKind::mackey_glass) o.spectra = {MethodKind::method2};
        if (s == SystemKind::van_der_pol || s == SystemKind::mackey_glass) o.predict_steps = 500;
        for (int i = 0; i < seeds; ++i) {
            grid[s].push_back(evaluate_system(s, static_cast<std::uint64_t>(1 + i), o));
            std::fprintf(stderr, "  evaluated %s seed %d\n", to_string(s).c_str(), 1 + i);
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<Line> lines{residue_ordering(grid, seconds), residue_magnitudes(grid), reconstruction(grid),
                            spectrum_checks(grid), prediction(grid)};
    Line props{6, "property suite", true, ""};
    for (const auto& [name, msg] : properties(grid)) {
        props.pass = props.pass && msg.empty();
        props.detail += name + (msg.empty() ? " ok" : " FAILED (" + msg + ")") + "; ";
    }
    lines.push_back(props);

    bool all = true;
    for (const auto& l : lines) {
        std::printf("%s criterion %d: %s | %s\n", l.pass ? "PASS" : "FAIL", l.id, l.title.c_str(), l.detail.c_str());
        all = all && l.pass;
    }
    std::fflush(stdout);
    return all ? 0 : 1;
}
