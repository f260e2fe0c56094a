#include "rckoopman/koopman.hpp"

#include <algorithm>
#include <numeric>
#include <vector>
#include <stdexcept>

#include "rckoopman/kernels.hpp"
#include "rckoopman/rng.hpp"

namespace rck {

std::string to_string(DictionaryKind kind) {
    switch (kind) {
        case DictionaryKind::explicit_rbf: return "explicit_rbf";
        case DictionaryKind::reservoir_full: return "reservoir_full";
        case DictionaryKind::reservoir_learned: return "reservoir_learned";
    }
    throw std::invalid_argument("unknown dictionary kind");
}

Matrix Dictionary::evaluate(const Matrix& states) const {
    if (kind != DictionaryKind::explicit_rbf)
        throw std::invalid_argument("dictionary of kind " + to_string(kind) +
                                    " cannot be evaluated at arbitrary states");
    if (states.rows() != state_dim) throw std::invalid_argument("dictionary: state dimension mismatch");
    Matrix out(size, states.cols());
    out.topRows(state_dim) = states;
    if (centers.cols() > 0) {
        Matrix rbf;
        kernels::parallel::rbf_evaluate(states, centers, gamma_rbf, rbf);
        out.bottomRows(centers.cols()) = rbf;
    }
    return out;
}

Dictionary rbf_dictionary(const Matrix& centers, double gamma_rbf) {
    Dictionary d;
    d.kind = DictionaryKind::explicit_rbf;
    d.state_dim = centers.rows();
    d.size = centers.rows() + centers.cols();
    d.centers = centers;
    d.gamma_rbf = gamma_rbf;
    d.proj_rows.resize(static_cast<std::size_t>(d.state_dim));
    std::iota(d.proj_rows.begin(), d.proj_rows.end(), Index{0});
    return d;
}

double residue(const Matrix& k, const Matrix& psi, const Matrix& psi_next) {
    if (k.rows() != k.cols() || k.cols() != psi.rows() || psi.rows() != psi_next.rows() ||
        psi.cols() != psi_next.cols())
        throw std::invalid_argument("residue: shape mismatch");
    const Matrix err = psi_next - k * psi;
    Vector per_col;
    kernels::parallel::column_squared_norms(err, per_col);
    double total = 0.0;
    for (Index t = 0; t < per_col.size(); ++t) total += per_col(t);
    return total;
}

namespace {

void finish_model(KoopmanModel& m, const Matrix& psi, const Matrix& psi_next) {
    m.psi_first = psi.col(0);
    m.psi_last = psi_next.col(psi_next.cols() - 1);
    m.residue = residue(m.k, psi, psi_next);
    m.rank = numerical_rank(psi);
    m.rank_deficient = m.rank < std::min(psi.rows(), psi.cols());
}

Matrix transpose_solve(const Matrix& lhs, const Matrix& rhs) {
    // rhs * pinv(lhs) computed as (pinv(lhs^T) rhs^T)^T.
    return lstsq(lhs.transpose(), rhs.transpose()).transpose();
}

}  // namespace

KoopmanModel edmd(const Matrix& psi, const Matrix& psi_next) {
    if (psi.rows() != psi_next.rows() || psi.cols() != psi_next.cols())
        throw std::invalid_argument("edmd: snapshot matrices differ in shape");
    if (psi.cols() == 0) throw std::invalid_argument("edmd: no snapshots");
    KoopmanModel m;
    m.method = "edmd";
    m.k = transpose_solve(psi, psi_next);
    m.dictionary.size = psi.rows();
    m.dictionary.state_dim = psi.rows();
    m.dictionary.proj_rows.resize(static_cast<std::size_t>(psi.rows()));
    std::iota(m.dictionary.proj_rows.begin(), m.dictionary.proj_rows.end(), Index{0});
    finish_model(m, psi, psi_next);
    return m;
}

Matrix sample_rbf_centers(const TrajectoryData& data, Index count, std::uint64_t seed) {
    if (count < 0) throw std::invalid_argument("sample_rbf_centers: negative count");
    const Index samples = data.samples();
    if (count > 0 && samples == 0) throw std::invalid_argument("sample_rbf_centers: no samples");
    RandomStream rng(seed, streams::rbf_centers);
    Matrix c(data.dim(), count);
    std::vector<Index> order(static_cast<std::size_t>(samples));
    Index used = samples;
    for (Index j = 0; j < count; ++j) {
        if (used == samples) {
            // Fisher-Yates over all samples for the next pass.
            std::iota(order.begin(), order.end(), Index{0});
            for (Index i = samples - 1; i > 0; --i)
                std::swap(order[static_cast<std::size_t>(i)],
                          order[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i) + 1))]);
            used = 0;
        }
        c.col(j) = data.states.row(order[static_cast<std::size_t>(used++)]).transpose();
    }
    return c;
}

DictionaryValues rbf_dictionary_evaluate(const TrajectoryData& data, const Matrix& centers,
                                         double gamma_rbf, Index first) {
    if (first < 0 || data.samples() - first < 2)
        throw std::invalid_argument("rbf_dictionary_evaluate: need at least two samples");
    const Dictionary dict = rbf_dictionary(centers, gamma_rbf);
    const Index count = data.samples() - first;
    const Matrix states = data.states.middleRows(first, count).transpose();
    const Matrix all = dict.evaluate(states);
    return {all.leftCols(count - 1), all.rightCols(count - 1)};
}

KoopmanModel fit_edmd_rbf(const TrajectoryData& data, const Matrix& centers, double gamma_rbf,
                          Index first) {
    const DictionaryValues v = rbf_dictionary_evaluate(data, centers, gamma_rbf, first);
    KoopmanModel m = edmd(v.psi, v.psi_next);
    m.method = centers.cols() > 0 ? "edmd_rbf" : "dmd";
    m.dictionary = rbf_dictionary(centers, gamma_rbf);
    return m;
}

KoopmanModel fit_dmd(const TrajectoryData& data, Index first) {
    return fit_edmd_rbf(data, Matrix(data.dim(), 0), 0.0, first);
}

KoopmanModel method1(const Matrix& s, const Matrix& s_next, Index inputs) {
    if (inputs < 1 || inputs > s.rows()) throw std::invalid_argument("method1: bad input count");
    KoopmanModel m = edmd(s, s_next);
    m.method = "method1";
    Dictionary& d = m.dictionary;
    d.kind = DictionaryKind::reservoir_full;
    d.size = s.rows();
    d.state_dim = inputs;
    d.proj_rows.resize(static_cast<std::size_t>(inputs));
    std::iota(d.proj_rows.begin(), d.proj_rows.end(), s.rows() - inputs);
    return m;
}

}  // namespace rck
