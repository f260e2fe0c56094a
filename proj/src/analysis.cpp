#include "rckoopman/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rck {

double residue(const KoopmanModel& model, const Matrix& psi, const Matrix& psi_next) {
    return residue(model.k, psi, psi_next);
}

Iteration iterate(const Matrix& k, const Vector& start, Index steps) {
    if (steps < 0) throw std::invalid_argument("iterate: negative step count");
    if (k.cols() != start.size()) throw std::invalid_argument("iterate: dimension mismatch");
    Iteration out;
    out.values.resize(k.rows(), steps);
    Vector current = start;
    for (Index t = 0; t < steps; ++t) {
        if (!out.diverged_at) {
            Vector next = k * current;
            if (!next.allFinite() || next.cwiseAbs().maxCoeff() > divergence_threshold) {
                out.diverged_at = t + 1;
            } else {
                current = std::move(next);
            }
        }
        out.values.col(t) = current;
    }
    return out;
}

Iteration reconstruct(const KoopmanModel& model, Index steps) {
    if (steps < 1) throw std::invalid_argument("reconstruct: steps must be >= 1");
    return iterate(model.k, model.psi_first, steps);
}

Iteration predict(const KoopmanModel& model, Index steps) {
    return iterate(model.k, model.psi_last, steps);
}

StateLifter rbf_lifter(const Dictionary& dict) {
    if (dict.kind != DictionaryKind::explicit_rbf)
        throw std::invalid_argument("rbf_lifter: dictionary is not explicit");
    return [dict](const Vector& x) -> Vector { return dict.evaluate(x); };
}

StateLifter reservoir_lifter(const Dictionary& dict, const ReservoirConfig& cfg,
                             const ReservoirWeights& weights, const Vector& last_state) {
    if (dict.kind != DictionaryKind::reservoir_learned)
        throw std::invalid_argument("reservoir_lifter: dictionary is not a learned reservoir readout");
    const Matrix w_out = output_weights(dict.w1, dict.state_dim);
    return [w_out, cfg, weights, state = Vector(last_state)](const Vector& x) mutable -> Vector {
        state = step_reservoir(cfg, weights, state, x);
        Vector sbar(state.size() + x.size());
        sbar << state, x;
        return w_out * sbar;
    };
}

Iteration predict_relift(const KoopmanModel& model, const StateLifter& lift, Index steps) {
    if (model.dictionary.kind == DictionaryKind::reservoir_full)
        throw std::invalid_argument(
            "predict_relift: the full reservoir dictionary cannot be re-evaluated at arbitrary states");
    const auto& rows = model.proj_rows();
    const auto kdim = static_cast<Index>(rows.size());
    Iteration out;
    out.values.resize(kdim, steps);
    Vector psi = model.psi_last;
    Vector x(kdim);
    for (Index t = 0; t < steps; ++t) {
        if (!out.diverged_at) {
            const Vector next = model.k * psi;
            for (Index i = 0; i < kdim; ++i) x(i) = next(rows[static_cast<std::size_t>(i)]);
            if (!x.allFinite() || x.cwiseAbs().maxCoeff() > divergence_threshold) {
                out.diverged_at = t + 1;
                for (Index i = 0; i < kdim; ++i) x(i) = psi(rows[static_cast<std::size_t>(i)]);
            } else {
                psi = lift(x);
            }
        }
        out.values.col(t) = x;
    }
    return out;
}

Vector nrmse_rows(const Matrix& estimate, const Matrix& reference) {
    if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols())
        throw std::invalid_argument("nrmse_rows: shape mismatch");
    Vector out(reference.rows());
    const double n = static_cast<double>(reference.cols());
    for (Index i = 0; i < reference.rows(); ++i) {
        if (n == 0.0 || (reference.row(i).array() == reference(i, 0)).all()) {
            out(i) = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double mean = reference.row(i).sum() / n;
        const double num = (estimate.row(i) - reference.row(i)).squaredNorm();
        const double den = (reference.row(i).array() - mean).square().sum();
        out(i) = std::sqrt(num) / std::sqrt(den);
    }
    return out;
}

ErrorReport error_report(const KoopmanModel& model, const Iteration& reconstruction,
                         const Matrix& reference, Index horizon) {
    if (horizon < 1 || horizon > reconstruction.values.cols() || horizon > reference.cols())
        throw std::invalid_argument("error_report: horizon exceeds available steps");
    if (reference.rows() != reconstruction.values.rows())
        throw std::invalid_argument("error_report: dictionary size mismatch");
    ErrorReport r;
    const Matrix est = reconstruction.values.leftCols(horizon);
    const Matrix ref = reference.leftCols(horizon);
    r.error = (est - ref).transpose();
    r.nrmse_full = nrmse_rows(est, ref);
    const auto& rows = model.proj_rows();
    r.nrmse.resize(static_cast<Index>(rows.size()));
    double sum = 0.0;
    Index defined = 0;
    for (Index i = 0; i < r.nrmse.size(); ++i) {
        r.nrmse(i) = r.nrmse_full(rows[static_cast<std::size_t>(i)]);
        if (std::isnan(r.nrmse(i))) continue;
        sum += r.nrmse(i);
        ++defined;
    }
    for (Index i = 0; i < r.nrmse_full.size(); ++i)
        if (std::isnan(r.nrmse_full(i))) ++r.undefined_rows;
    r.mean_nrmse = defined ? sum / static_cast<double>(defined) : std::numeric_limits<double>::quiet_NaN();
    if (reconstruction.diverged_at && *reconstruction.diverged_at <= horizon)
        r.diverged_at = reconstruction.diverged_at;
    return r;
}

SpectrumResult spectrum(const Matrix& k) {
    const EigenDecomposition e = eig(k);
    SpectrumResult s;
    s.eigenvalues = e.values;
    s.right = e.right;
    s.left = e.left;
    for (Index j = 0; j < s.left.cols(); ++j) {
        auto col = s.left.col(j);
        const double norm = col.norm();
        if (norm == 0.0) continue;
        col /= norm;
        const double floor = 1e-14;
        for (Index i = 0; i < col.size(); ++i) {
            if (std::abs(col(i)) > floor) {
                const std::complex<double> phase = std::conj(col(i)) / std::abs(col(i));
                col *= phase;
                col(i) = std::abs(col(i));
                break;
            }
        }
    }
    s.rank = numerical_rank(k);
    s.unit_circle_distance = s.eigenvalues.cwiseAbs().array() - 1.0;
    return s;
}

SpectrumResult spectrum(const KoopmanModel& model) { return spectrum(model.k); }

}  // namespace rck
