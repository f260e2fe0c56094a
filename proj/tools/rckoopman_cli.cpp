// rckoopman: command line front end for the reservoir Koopman experiments.
//
//   rckoopman generate duffing -o duffing.csv
//   rckoopman run --system mackey_glass --method method2 --output-dir out/mg
//   rckoopman suite fig2 --seed 1 --output-dir out/suites
//   rckoopman spectrum --model out/mg/model.txt
//   rckoopman predict --system van_der_pol --method method1 --steps 100

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rckoopman/experiment.hpp"
#include "rckoopman/io.hpp"

using namespace rck;

namespace {

struct Flags {
    std::string system = "duffing";
    std::string method = "method1";
    std::string variant = "values";
    std::string config;
    std::optional<Index> n, washout, l, rbf_centers;
    std::optional<double> c, a, density, rho, w_in_gain, noise;
};

void add_experiment_flags(CLI::App* app, Flags& f, ExperimentConfig& cfg) {
    app->add_option("--system", f.system, "van_der_pol | duffing | mackey_glass | rossler | lorenz")
        ->capture_default_str();
    app->add_option("--method", f.method, "edmd_rbf | method1 | method2 | dmd")->capture_default_str();
    app->add_option("--n", f.n, "reservoir nodes");
    app->add_option("--c", f.c, "timescale constant C");
    app->add_option("--a", f.a, "leaking rate a");
    app->add_option("--density", f.density, "density of W");
    app->add_option("--rho", f.rho, "spectral radius of W");
    app->add_option("--w-in-gain", f.w_in_gain, "scale of W_in entries");
    app->add_option("--noise", f.noise, "noise amplitude");
    app->add_option("--washout", f.washout, "discarded reservoir columns");
    app->add_option("--l", f.l, "learned observables for method2 (default 15 - K)");
    app->add_option("--max-iters", cfg.max_iters, "method2 iterations")->capture_default_str();
    app->add_option("--tol", cfg.tol, "method2 relative residue change for stopping")->capture_default_str();
    app->add_option("--variant", f.variant, "method2 step 2: values | weights")->capture_default_str();
    app->add_option("--w1-init-scale", cfg.w1_init_scale, "method2 initial W1 entries on [-s, s]")
        ->capture_default_str();
    app->add_option("--rbf-centers", f.rbf_centers, "EDMD centers (default 1000 - K)");
    app->add_option("--gamma-rbf", cfg.gamma_rbf, "RBF width")->capture_default_str();
    app->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
    app->add_option("--horizon", cfg.horizon, "reconstruction steps scored")->capture_default_str();
    app->add_option("--steps", cfg.predict_steps, "prediction steps")->capture_default_str();
    app->add_flag("--relift", cfg.relift, "re-lift predicted states through the dictionary");
    app->add_option("--output-dir,-o", cfg.output_dir, "artifact directory")->capture_default_str();
    app->add_option("--config", f.config, "JSON config or manifest; its keys override flags");
}

ExperimentConfig resolve(const Flags& f, ExperimentConfig cfg) {
    cfg.system = parse_system(f.system);
    cfg.method = parse_method(f.method);
    cfg.variant = parse_variant(f.variant);
    cfg.reservoir = {f.n, f.c, f.a, f.density, f.rho, f.w_in_gain, f.noise, f.washout};
    cfg.l = f.l;
    cfg.rbf_centers = f.rbf_centers;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw std::runtime_error("cannot open " + f.config);
        cfg = ExperimentConfig::from_json(nlohmann::json::parse(in), cfg);
    }
    return cfg;
}

void print_summary(const ExperimentConfig& cfg, const ExperimentResult& r) {
    std::printf("system        %s\n", to_string(cfg.system).c_str());
    std::printf("method        %s\n", to_string(cfg.method).c_str());
    std::printf("dictionary    %ld\n", static_cast<long>(r.fit.model.size()));
    std::printf("residue       %.6e\n", r.fit.model.residue);
    std::printf("mean nrmse    %.6e  (first %ld steps)\n", r.report.mean_nrmse,
                static_cast<long>(r.report.error.rows()));
    std::printf("rank          %ld\n", static_cast<long>(r.spectrum.rank));
    if (r.report.diverged_at)
        std::printf("reconstruction diverged at step %ld\n", static_cast<long>(*r.report.diverged_at));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Koopman operator approximation with reservoir computers"};
    app.require_subcommand(1);

    std::string gen_system, gen_out;
    std::uint64_t gen_seed = 1;
    auto* gen = app.add_subcommand("generate", "integrate and rescale a dataset");
    gen->add_option("system", gen_system, "system name")->required();
    gen->add_option("--output,-o", gen_out, "CSV path (default <system>.csv)");
    gen->add_option("--seed", gen_seed, "unused; datasets are deterministic");

    Flags run_flags;
    ExperimentConfig run_cfg;
    auto* run_cmd = app.add_subcommand("run", "fit one method on one system and write artifacts");
    add_experiment_flags(run_cmd, run_flags, run_cfg);

    std::string suite_name, suite_dir = "out";
    std::uint64_t suite_seed = 1;
    int suite_seeds = 3;
    auto* suite = app.add_subcommand("suite", "run a system x method grid over several seeds");
    suite->add_option("name", suite_name, "fig2 | table1 | spectra | predictions")->required();
    suite->add_option("--seed", suite_seed, "first seed")->capture_default_str();
    suite->add_option("--seeds", suite_seeds, "number of seeds")->capture_default_str();
    suite->add_option("--output-dir,-o", suite_dir, "output directory")->capture_default_str();

    Flags spec_flags;
    ExperimentConfig spec_cfg;
    std::string spec_model, spec_out;
    auto* spec = app.add_subcommand("spectrum", "eigenvalues and eigenfunction coefficients of K");
    add_experiment_flags(spec, spec_flags, spec_cfg);
    spec->add_option("--model", spec_model, "saved model instead of fitting");
    spec->add_option("--csv", spec_out, "write eigenvalues here (default stdout)");

    Flags pred_flags;
    ExperimentConfig pred_cfg;
    std::string pred_model, pred_out;
    auto* pred = app.add_subcommand("predict", "iterate K beyond the training data");
    add_experiment_flags(pred, pred_flags, pred_cfg);
    pred->add_option("--model", pred_model, "saved model instead of fitting");
    pred->add_option("--csv", pred_out, "write predictions here (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const TrajectoryData data = make_dataset(parse_system(gen_system));
            const std::string path = gen_out.empty() ? gen_system + ".csv" : gen_out;
            save_trajectory(data, path);
            std::printf("%s: %ld samples x %ld components\n", path.c_str(), static_cast<long>(data.samples()),
                        static_cast<long>(data.dim()));
        } else if (*run_cmd) {
            const ExperimentConfig cfg = resolve(run_flags, run_cfg);
            const ExperimentResult r = run_experiment(cfg);
            print_summary(cfg, r);
            std::printf("artifacts     %s\n", cfg.output_dir.c_str());
        } else if (*suite) {
            const SuiteResult r = run_suite(parse_suite(suite_name), suite_seed, suite_seeds);
            write_suite(r, suite_dir);
            std::printf("%-14s %-9s %-32s %14s %14s %14s\n", "system", "method", "metric", "median", "min", "max");
            for (const auto& c : r.cells)
                std::printf("%-14s %-9s %-32s %14.6e %14.6e %14.6e\n", to_string(c.system).c_str(),
                            to_string(c.method).c_str(), c.metric.c_str(), c.median, c.min, c.max);
        } else if (*spec) {
            KoopmanModel model;
            if (!spec_model.empty()) {
                model = load_model(spec_model);
            } else {
                ExperimentConfig cfg = resolve(spec_flags, spec_cfg);
                cfg.predict_steps = 0;
                model = evaluate(cfg).fit.model;
            }
            const SpectrumResult s = spectrum(model);
            Matrix ev(s.eigenvalues.size(), 3);
            ev.leftCols(2) = io::complex_columns(s.eigenvalues);
            ev.col(2) = s.eigenvalues.cwiseAbs();
            if (spec_out.empty()) {
                io::write_csv(std::cout, ev, {"re", "im", "abs"});
            } else {
                io::write_csv(spec_out, ev, {"re", "im", "abs"});
                const CMatrix& w = s.left;
                Matrix coeffs(w.rows(), 2 * w.cols());
                for (Index j = 0; j < w.cols(); ++j) coeffs.middleCols(2 * j, 2) = io::complex_columns(w.col(j));
                io::write_csv(spec_out + ".eigenfunctions.csv", coeffs);
            }
            std::fprintf(stderr, "rank %ld of %ld\n", static_cast<long>(s.rank), static_cast<long>(model.size()));
        } else if (*pred) {
            Matrix values;
            if (!pred_model.empty()) {
                const KoopmanModel model = load_model(pred_model);
                const Iteration it = predict(model, pred_cfg.predict_steps);
                values.resize(static_cast<Index>(model.proj_rows().size()), it.values.cols());
                for (std::size_t i = 0; i < model.proj_rows().size(); ++i)
                    values.row(static_cast<Index>(i)) = it.values.row(model.proj_rows()[i]);
            } else {
                values = evaluate(resolve(pred_flags, pred_cfg)).prediction.values;
            }
            const Matrix table = values.transpose();
            const auto header = io::numbered("xhat", table.cols());
            if (pred_out.empty())
                io::write_csv(std::cout, table, header);
            else
                io::write_csv(pred_out, table, header);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "rckoopman: %s\n", e.what());
        return 1;
    }
    return 0;
}
