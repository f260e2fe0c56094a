#pragma once

// Experiment harness shared by the CLI and the acceptance suite.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rckoopman/analysis.hpp"
#include "rckoopman/dynamics.hpp"
#include "rckoopman/koopman.hpp"
#include "rckoopman/reservoir.hpp"

namespace rck {

enum class MethodKind { edmd_rbf, method1, method2, dmd };

std::string to_string(MethodKind m);
MethodKind parse_method(std::string_view name);

struct ReservoirOverrides {
    std::optional<Index> n;
    std::optional<double> c;
    std::optional<double> a;
    std::optional<double> density;
    std::optional<double> rho;
    std::optional<double> w_in_gain;
    std::optional<double> noise;
    std::optional<Index> washout;
};

struct ExperimentConfig {
    SystemKind system = SystemKind::duffing;
    MethodKind method = MethodKind::method1;
    ReservoirOverrides reservoir;
    std::optional<Index> l;             // default: 15 - K
    int max_iters = 20;
    double tol = 1e-10;
    Method2Variant variant = Method2Variant::values;
    double w1_init_scale = 1.0;
    std::optional<Index> rbf_centers;  // default: 1000 - K
    double gamma_rbf = 0.05;
    std::uint64_t seed = 1;
    Index horizon = 100;
    Index predict_steps = 100;
    bool relift = false;
    std::string output_dir = "out";

    nlohmann::json to_json() const;
    /// Accepts a config object or a manifest (whose "config" member is used).
    /// Keys absent from `j` keep the values already in `base`.
    static ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base);
    static ExperimentConfig from_json(const nlohmann::json& j);
};

ReservoirConfig resolved_reservoir(const ExperimentConfig& cfg);
Method2Options resolved_method2(const ExperimentConfig& cfg);
Index resolved_rbf_centers(const ExperimentConfig& cfg);

/// Every parameter a run depends on, defaults expanded.
nlohmann::json manifest(const ExperimentConfig& cfg);

/// A fitted model with the dictionary values it was fitted on.
struct Fit {
    KoopmanModel model;
    Matrix psi;
    Matrix psi_next;
};

/// Fits `cfg.method` on `data`. Reservoir methods reuse `run` when given,
/// otherwise drive a fresh reservoir. EDMD and DMD use the whole trajectory;
/// the washout only concerns reservoir states.
Fit fit(const ExperimentConfig& cfg, const TrajectoryData& data, const ReservoirRun* run = nullptr);

struct ExperimentResult {
    TrajectoryData data;
    Fit fit;
    Iteration reconstruction;
    ErrorReport report;
    Iteration prediction;   // projection rows only
    SpectrumResult spectrum;
};

/// Evaluates a config end to end in memory.
ExperimentResult evaluate(const ExperimentConfig& cfg);

/// Runs and writes dataset.csv, model.txt, summary.json, reconstruction.csv,
/// prediction.csv, spectrum.csv and manifest.json into cfg.output_dir.
/// On failure every file written so far is removed and the error rethrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

void save_model(const KoopmanModel& model, const std::string& path);
KoopmanModel load_model(const std::string& path);

/// Per-method outcome inside a system evaluation.
struct MethodOutcome {
    KoopmanModel model;
    double residue = 0.0;
    double mean_nrmse = 0.0;
    std::optional<Index> diverged_at;
    Index rank = 0;
    CVector eigenvalues;  // filled when requested
    Matrix prediction;    // K x predict_steps, projection rows
};

struct SystemEvaluation {
    SystemKind system;
    std::uint64_t seed;
    TrajectoryData data;
    Vector train_mean;  // mean of the training window per component
    std::map<MethodKind, MethodOutcome> methods;
};

struct EvaluationOptions {
    std::vector<MethodKind> methods{MethodKind::edmd_rbf, MethodKind::method1, MethodKind::method2};
    std::vector<MethodKind> spectra;  // methods whose eigenvalues are computed
    Index horizon = 100;
    Index predict_steps = 0;
};

/// Fits every requested method for one (system, seed) on a shared dataset and
/// reservoir run, using the published defaults.
SystemEvaluation evaluate_system(SystemKind system, std::uint64_t seed, const EvaluationOptions& opts);

enum class SuiteKind { fig2, table1, spectra, predictions };

std::string to_string(SuiteKind s);
SuiteKind parse_suite(std::string_view name);

struct SuiteCell {
    SystemKind system;
    MethodKind method;
    std::string metric;
    std::vector<double> values;  // one per seed
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct SuiteResult {
    SuiteKind kind;
    std::vector<std::uint64_t> seeds;
    std::vector<SuiteCell> cells;
    std::vector<SystemEvaluation> evaluations;

    const SuiteCell& cell(SystemKind s, MethodKind m, const std::string& metric) const;
};

double median(std::vector<double> v);

/// Runs the (system x method) grid of a suite over `seeds` consecutive seeds
/// starting at `base_seed`. Cells are computed in parallel workers.
SuiteResult run_suite(SuiteKind kind, std::uint64_t base_seed, int seeds = 3);

/// Writes suite_<name>.csv (and per-seed detail files) into `dir`.
void write_suite(const SuiteResult& result, const std::filesystem::path& dir);

}  // namespace rck
