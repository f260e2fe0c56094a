#include "rckoopman/experiment.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rckoopman/io.hpp"
#include "rckoopman/rng.hpp"

namespace rck {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(MethodKind m) {
    switch (m) {
        case MethodKind::edmd_rbf: return "edmd_rbf";
        case MethodKind::method1: return "method1";
        case MethodKind::method2: return "method2";
        case MethodKind::dmd: return "dmd";
    }
    throw std::invalid_argument("unknown method");
}

MethodKind parse_method(std::string_view name) {
    for (MethodKind m : {MethodKind::edmd_rbf, MethodKind::method1, MethodKind::method2, MethodKind::dmd})
        if (to_string(m) == name) return m;
    throw std::invalid_argument("unknown method: " + std::string(name));
}

std::string to_string(SuiteKind s) {
    switch (s) {
        case SuiteKind::fig2: return "fig2";
        case SuiteKind::table1: return "table1";
        case SuiteKind::spectra: return "spectra";
        case SuiteKind::predictions: return "predictions";
    }
    throw std::invalid_argument("unknown suite");
}

SuiteKind parse_suite(std::string_view name) {
    for (SuiteKind s : {SuiteKind::fig2, SuiteKind::table1, SuiteKind::spectra, SuiteKind::predictions})
        if (to_string(s) == name) return s;
    throw std::invalid_argument("unknown suite: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    j[key] = v ? json(*v) : json(nullptr);
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null())
        out.reset();
    else
        out = j.at(key).get<T>();
}

template <typename T>
void get_value(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json ExperimentConfig::to_json() const {
    json j;
    j["system"] = to_string(system);
    j["method"] = to_string(method);
    json r;
    put_optional(r, "n", reservoir.n);
    put_optional(r, "c", reservoir.c);
    put_optional(r, "a", reservoir.a);
    put_optional(r, "density", reservoir.density);
    put_optional(r, "rho", reservoir.rho);
    put_optional(r, "w_in_gain", reservoir.w_in_gain);
    put_optional(r, "noise", reservoir.noise);
    put_optional(r, "washout", reservoir.washout);
    j["reservoir"] = r;
    put_optional(j, "l", l);
    j["max_iters"] = max_iters;
    j["tol"] = tol;
    j["variant"] = to_string(variant);
    j["w1_init_scale"] = w1_init_scale;
    put_optional(j, "rbf_centers", rbf_centers);
    j["gamma_rbf"] = gamma_rbf;
    j["seed"] = seed;
    j["horizon"] = horizon;
    j["predict_steps"] = predict_steps;
    j["relift"] = relift;
    j["output_dir"] = output_dir;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& in, ExperimentConfig c) {
    const json& j = in.contains("config") ? in.at("config") : in;
    if (j.contains("system")) c.system = parse_system(j.at("system").get<std::string>());
    if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("reservoir")) {
        const json& r = j.at("reservoir");
        get_optional(r, "n", c.reservoir.n);
        get_optional(r, "c", c.reservoir.c);
        get_optional(r, "a", c.reservoir.a);
        get_optional(r, "density", c.reservoir.density);
        get_optional(r, "rho", c.reservoir.rho);
        get_optional(r, "w_in_gain", c.reservoir.w_in_gain);
        get_optional(r, "noise", c.reservoir.noise);
        get_optional(r, "washout", c.reservoir.washout);
    }
    get_optional(j, "l", c.l);
    get_value(j, "max_iters", c.max_iters);
    get_value(j, "tol", c.tol);
    if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
    get_value(j, "w1_init_scale", c.w1_init_scale);
    get_optional(j, "rbf_centers", c.rbf_centers);
    get_value(j, "gamma_rbf", c.gamma_rbf);
    get_value(j, "seed", c.seed);
    get_value(j, "horizon", c.horizon);
    get_value(j, "predict_steps", c.predict_steps);
    get_value(j, "relift", c.relift);
    get_value(j, "output_dir", c.output_dir);
    return c;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) { return from_json(j, ExperimentConfig{}); }

ReservoirConfig resolved_reservoir(const ExperimentConfig& cfg) {
    ReservoirConfig r = default_reservoir(cfg.system, cfg.seed);
    const ReservoirOverrides& o = cfg.reservoir;
    if (o.n) r.n = *o.n;
    if (o.c) r.c = *o.c;
    if (o.a) r.a = *o.a;
    if (o.density) r.density = *o.density;
    if (o.rho) r.rho = *o.rho;
    if (o.w_in_gain) r.w_in_gain = *o.w_in_gain;
    if (o.noise) r.noise = *o.noise;
    if (o.washout) r.washout = *o.washout;
    return r;
}

Method2Options resolved_method2(const ExperimentConfig& cfg) {
    Method2Options m;
    m.l = cfg.l ? *cfg.l : 15 - default_spec(cfg.system).state_dim;
    m.max_iters = cfg.max_iters;
    m.tol = cfg.tol;
    m.variant = cfg.variant;
    m.seed = cfg.seed;
    m.init_scale = cfg.w1_init_scale;
    return m;
}

Index resolved_rbf_centers(const ExperimentConfig& cfg) {
    return cfg.rbf_centers ? *cfg.rbf_centers : 1000 - default_spec(cfg.system).state_dim;
}

json manifest(const ExperimentConfig& cfg) {
    json m;
    m["format"] = "rckoopman-manifest/1";
    m["config"] = cfg.to_json();

    const SystemSpec spec = default_spec(cfg.system);
    const DatasetRecipe recipe = default_recipe(cfg.system);
    json sys;
    sys["name"] = to_string(cfg.system);
    sys["params"] = spec.params;
    sys["state_dim"] = spec.state_dim;
    sys["delay"] = spec.delay;
    sys["t0"] = recipe.t0;
    sys["t1"] = recipe.t1;
    sys["h"] = recipe.h;
    sys["initial_condition"] = std::vector<double>(recipe.x0.data(), recipe.x0.data() + recipe.x0.size());
    sys["samples"] = static_cast<Index>(std::llround((recipe.t1 - recipe.t0) / recipe.h)) + 1;
    m["system"] = sys;

    const ReservoirConfig r = resolved_reservoir(cfg);
    json res;
    res["n"] = r.n;
    res["k"] = r.k;
    res["total_nodes"] = r.n + r.k;
    res["c"] = r.c;
    res["a"] = r.a;
    res["density"] = r.density;
    res["rho"] = r.rho;
    res["w_in_gain"] = r.w_in_gain;
    res["noise"] = r.noise;
    res["washout"] = r.washout;
    res["esp_factor"] = r.esp_factor();
    m["reservoir"] = res;

    const Method2Options m2 = resolved_method2(cfg);
    json meth2;
    meth2["l"] = m2.l;
    meth2["dictionary_size"] = m2.l + spec.state_dim;
    meth2["max_iters"] = m2.max_iters;
    meth2["tol"] = m2.tol;
    meth2["variant"] = to_string(m2.variant);
    meth2["w1_init_scale"] = m2.init_scale;
    m["method2"] = meth2;

    json edmd;
    edmd["rbf_centers"] = resolved_rbf_centers(cfg);
    edmd["dictionary_size"] = resolved_rbf_centers(cfg) + spec.state_dim;
    edmd["gamma_rbf"] = cfg.gamma_rbf;
    m["edmd"] = edmd;

    json seeds;
    seeds["master"] = cfg.seed;
    seeds["reservoir_weights"] = derive_seed(cfg.seed, streams::reservoir_weights);
    seeds["reservoir_initial_state"] = derive_seed(cfg.seed, streams::reservoir_initial);
    seeds["reservoir_noise"] = derive_seed(cfg.seed, streams::reservoir_noise);
    seeds["method2_init"] = derive_seed(cfg.seed, streams::method2_init);
    seeds["rbf_centers"] = derive_seed(cfg.seed, streams::rbf_centers);
    m["seeds"] = seeds;
    return m;
}

// ---------------------------------------------------------------------------
// Fitting and evaluation

Fit fit(const ExperimentConfig& cfg, const TrajectoryData& data, const ReservoirRun* run) {
    if (cfg.method == MethodKind::edmd_rbf || cfg.method == MethodKind::dmd) {
        const Index count = cfg.method == MethodKind::dmd ? 0 : resolved_rbf_centers(cfg);
        const Matrix centers = sample_rbf_centers(data, count, cfg.seed);
        const DictionaryValues v = rbf_dictionary_evaluate(data, centers, cfg.gamma_rbf);
        Fit f{edmd(v.psi, v.psi_next), v.psi, v.psi_next};
        f.model.method = to_string(cfg.method);
        f.model.dictionary = rbf_dictionary(centers, cfg.gamma_rbf);
        return f;
    }

    ReservoirRun local;
    if (!run) {
        local = rck::run(resolved_reservoir(cfg), data);
        run = &local;
    }
    const SnapshotPair sp = state_matrices(*run);
    if (cfg.method == MethodKind::method1) return {method1(sp.s, sp.s_next, data.dim()), sp.s, sp.s_next};

    KoopmanModel m = method2(sp.s, sp.s_next, data.dim(), resolved_method2(cfg));
    const Matrix w_out = output_weights(m.dictionary.w1, data.dim());
    return {std::move(m), w_out * sp.s, w_out * sp.s_next};
}

namespace {

Matrix projection_rows(const Matrix& values, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = values.row(rows[i]);
    return out;
}

Iteration project(const Iteration& it, const std::vector<Index>& rows) {
    return {projection_rows(it.values, rows), it.diverged_at};
}

}  // namespace

ExperimentResult evaluate(const ExperimentConfig& cfg) {
    ExperimentResult r;
    r.data = make_dataset(cfg.system);
    const ReservoirConfig rc = resolved_reservoir(cfg);

    std::optional<ReservoirRun> run;
    if (cfg.method == MethodKind::method1 || cfg.method == MethodKind::method2) run = rck::run(rc, r.data);
    r.fit = fit(cfg, r.data, run ? &*run : nullptr);

    const Index horizon = std::min<Index>(cfg.horizon, r.fit.psi_next.cols());
    r.reconstruction = reconstruct(r.fit.model, horizon);
    r.report = error_report(r.fit.model, r.reconstruction, r.fit.psi_next, horizon);

    const auto& rows = r.fit.model.proj_rows();
    if (cfg.relift && cfg.predict_steps > 0) {
        StateLifter lift = cfg.method == MethodKind::method2
                               ? reservoir_lifter(r.fit.model.dictionary, rc, run->weights, run->last_state)
                               : rbf_lifter(r.fit.model.dictionary);
        r.prediction = predict_relift(r.fit.model, lift, cfg.predict_steps);
    } else {
        r.prediction = project(predict(r.fit.model, cfg.predict_steps), rows);
    }
    r.spectrum = spectrum(r.fit.model);
    return r;
}

// ---------------------------------------------------------------------------
// Model files

namespace {

void write_block(std::ostream& out, const std::string& name, const Matrix& m) {
    out << "[" << name << "] " << m.rows() << " " << m.cols() << "\n";
    io::write_csv(out, m);
}

template <typename T>
std::string join(const std::vector<T>& xs) {
    std::ostringstream s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s << ",";
        if constexpr (std::is_floating_point_v<T>)
            s << io::format_double(xs[i]);
        else
            s << xs[i];
    }
    return s.str();
}

DictionaryKind parse_dictionary_kind(const std::string& s) {
    for (DictionaryKind k : {DictionaryKind::explicit_rbf, DictionaryKind::reservoir_full,
                             DictionaryKind::reservoir_learned})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown dictionary kind: " + s);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(s);
    while (std::getline(ss, cell, sep))
        if (!cell.empty()) out.push_back(cell);
    return out;
}

}  // namespace

void save_model(const KoopmanModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    const Dictionary& d = model.dictionary;
    out << "# rckoopman model v1\n";
    out << "method: " << model.method << "\n";
    out << "dictionary: " << to_string(d.kind) << "\n";
    out << "D: " << model.size() << "\n";
    out << "state_dim: " << d.state_dim << "\n";
    out << "proj_rows: " << join(d.proj_rows) << "\n";
    out << "gamma_rbf: " << io::format_double(d.gamma_rbf) << "\n";
    out << "residue: " << io::format_double(model.residue) << "\n";
    out << "rank: " << model.rank << "\n";
    out << "rank_deficient: " << (model.rank_deficient ? 1 : 0) << "\n";
    out << "iteration_log: " << join(model.iteration_log) << "\n";
    write_block(out, "K", model.k);
    write_block(out, "psi_first", model.psi_first.transpose());
    write_block(out, "psi_last", model.psi_last.transpose());
    if (d.kind == DictionaryKind::explicit_rbf) write_block(out, "centers", d.centers);
    if (d.kind == DictionaryKind::reservoir_learned) write_block(out, "W1", d.w1);
    if (!out) throw std::runtime_error("write failed: " + path);
}

KoopmanModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    KoopmanModel m;
    Dictionary& d = m.dictionary;
    std::string line;
    std::getline(in, line);
    if (line != "# rckoopman model v1") throw std::invalid_argument("load_model: bad header");
    std::map<std::string, Matrix> blocks;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '[') {
            const auto close = line.find(']');
            const std::string name = line.substr(1, close - 1);
            std::istringstream dims(line.substr(close + 1));
            Index rows = 0, cols = 0;
            dims >> rows >> cols;
            std::ostringstream body;
            for (Index i = 0; i < rows; ++i) {
                std::getline(in, line);
                body << line << "\n";
            }
            std::istringstream bs(body.str());
            Matrix v = io::read_csv(bs, false).values;
            if (rows == 0) v.resize(0, cols);
            if (v.rows() != rows || v.cols() != cols)
                throw std::invalid_argument("load_model: block " + name + " has wrong shape");
            blocks[name] = std::move(v);
            continue;
        }
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("load_model: bad line " + line);
        const std::string key = line.substr(0, colon);
        std::string value = line.substr(colon + 1);
        value.erase(0, value.find_first_not_of(' '));
        if (key == "method") m.method = value;
        else if (key == "dictionary") d.kind = parse_dictionary_kind(value);
        else if (key == "D") d.size = std::stol(value);
        else if (key == "state_dim") d.state_dim = std::stol(value);
        else if (key == "proj_rows") for (auto& s : split(value, ',')) d.proj_rows.push_back(std::stol(s));
        else if (key == "gamma_rbf") d.gamma_rbf = std::stod(value);
        else if (key == "residue") m.residue = std::stod(value);
        else if (key == "rank") m.rank = std::stol(value);
        else if (key == "rank_deficient") m.rank_deficient = value == "1";
        else if (key == "iteration_log") for (auto& s : split(value, ',')) m.iteration_log.push_back(std::stod(s));
    }
    m.k = blocks.at("K");
    m.psi_first = blocks.at("psi_first").transpose();
    m.psi_last = blocks.at("psi_last").transpose();
    if (blocks.count("centers")) d.centers = blocks["centers"];
    if (blocks.count("W1")) d.w1 = blocks["W1"];
    if (m.k.rows() != d.size) throw std::invalid_argument("load_model: K does not match D");
    return m;
}

// ---------------------------------------------------------------------------
// Artifacts

namespace {

class ArtifactSet {
public:
    explicit ArtifactSet(fs::path dir) : dir_(std::move(dir)) {
        created_dir_ = !fs::exists(dir_);
        fs::create_directories(dir_);
    }
    ~ArtifactSet() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& p : files_) fs::remove(p, ec);
        if (created_dir_) fs::remove(dir_, ec);
    }
    std::string add(const std::string& name) {
        files_.push_back(dir_ / name);
        return files_.back().string();
    }
    void commit() { committed_ = true; }

private:
    fs::path dir_;
    std::vector<fs::path> files_;
    bool created_dir_ = false;
    bool committed_ = false;
};

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

std::vector<double> to_list(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    ArtifactSet files(cfg.output_dir);
    const std::string dataset = files.add("dataset.csv");
    files.add("dataset.csv.scaling.json");
    const std::string model = files.add("model.txt");
    const std::string summary = files.add("summary.json");
    const std::string recon = files.add("reconstruction.csv");
    const std::string pred = files.add("prediction.csv");
    const std::string spec = files.add("spectrum.csv");
    const std::string man = files.add("manifest.json");

    ExperimentResult r = evaluate(cfg);
    const auto& rows = r.fit.model.proj_rows();
    const Index kdim = static_cast<Index>(rows.size());

    save_trajectory(r.data, dataset);
    save_model(r.fit.model, model);

    json s;
    s["system"] = to_string(cfg.system);
    s["method"] = to_string(cfg.method);
    s["dictionary_size"] = r.fit.model.size();
    s["residue"] = r.fit.model.residue;
    s["rank"] = r.fit.model.rank;
    s["rank_deficient"] = r.fit.model.rank_deficient;
    s["iteration_log"] = r.fit.model.iteration_log;
    s["horizon"] = r.report.error.rows();
    s["nrmse"] = to_list(r.report.nrmse);
    s["mean_nrmse"] = r.report.mean_nrmse;
    s["reconstruction_diverged_at"] = r.report.diverged_at ? json(*r.report.diverged_at) : json(nullptr);
    s["prediction_diverged_at"] = r.prediction.diverged_at ? json(*r.prediction.diverged_at) : json(nullptr);
    s["spectral_rank"] = r.spectrum.rank;
    s["max_eigenvalue_modulus"] = r.spectrum.eigenvalues.size() ? std::abs(r.spectrum.eigenvalues(0)) : 0.0;
    write_json(summary, s);

    const Index horizon = r.report.error.rows();
    Matrix rec(horizon, 1 + 2 * kdim);
    const Matrix est = projection_rows(r.reconstruction.values, rows);
    const Matrix ref = projection_rows(r.fit.psi_next, rows);
    std::vector<std::string> header{"step"};
    for (auto& n : io::numbered("xhat", kdim)) header.push_back(n);
    for (auto& n : io::numbered("x", kdim)) header.push_back(n);
    for (Index t = 0; t < horizon; ++t) {
        rec(t, 0) = static_cast<double>(t + 1);
        rec.row(t).segment(1, kdim) = est.col(t).transpose();
        rec.row(t).segment(1 + kdim, kdim) = ref.col(t).transpose();
    }
    io::write_csv(recon, rec, header);

    Matrix p(r.prediction.values.cols(), 1 + kdim);
    for (Index t = 0; t < p.rows(); ++t) {
        p(t, 0) = static_cast<double>(t + 1);
        p.row(t).tail(kdim) = r.prediction.values.col(t).transpose();
    }
    std::vector<std::string> ph{"step"};
    for (auto& n : io::numbered("xhat", kdim)) ph.push_back(n);
    io::write_csv(pred, p, ph);

    Matrix ev(r.spectrum.eigenvalues.size(), 3);
    ev.leftCols(2) = io::complex_columns(r.spectrum.eigenvalues);
    ev.col(2) = r.spectrum.eigenvalues.cwiseAbs();
    io::write_csv(spec, ev, {"re", "im", "abs"});

    write_json(man, manifest(cfg));
    files.commit();
    return r;
}

// ---------------------------------------------------------------------------
// Suites

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SystemEvaluation evaluate_system(SystemKind system, std::uint64_t seed, const EvaluationOptions& opts) {
    SystemEvaluation ev{system, seed, make_dataset(system), {}, {}};
    ExperimentConfig cfg;
    cfg.system = system;
    cfg.seed = seed;
    const ReservoirConfig rc = resolved_reservoir(cfg);
    ev.train_mean = ev.data.states.bottomRows(ev.data.samples() - rc.washout).colwise().mean().transpose();

    std::optional<ReservoirRun> run;
    for (MethodKind m : opts.methods) {
        cfg.method = m;
        if ((m == MethodKind::method1 || m == MethodKind::method2) && !run) run = rck::run(rc, ev.data);
        Fit f = fit(cfg, ev.data, run ? &*run : nullptr);
        MethodOutcome out;
        const Index horizon = std::min<Index>(opts.horizon, f.psi_next.cols());
        const Iteration rec = reconstruct(f.model, horizon);
        const ErrorReport rep = error_report(f.model, rec, f.psi_next, horizon);
        out.residue = f.model.residue;
        out.mean_nrmse = rep.mean_nrmse;
        out.diverged_at = rep.diverged_at;
        out.rank = numerical_rank(f.model.k);
        if (std::find(opts.spectra.begin(), opts.spectra.end(), m) != opts.spectra.end())
            out.eigenvalues = eigenvalues(f.model.k);
        if (opts.predict_steps > 0)
            out.prediction = projection_rows(predict(f.model, opts.predict_steps).values, f.model.proj_rows());
        out.model = std::move(f.model);
        ev.methods.emplace(m, std::move(out));
    }
    return ev;
}

const SuiteCell& SuiteResult::cell(SystemKind s, MethodKind m, const std::string& metric) const {
    for (const auto& c : cells)
        if (c.system == s && c.method == m && c.metric == metric) return c;
    throw std::out_of_range("suite has no cell " + to_string(s) + "/" + to_string(m) + "/" + metric);
}

namespace {

struct SuitePlan {
    std::vector<SystemKind> systems;
    EvaluationOptions options;
};

SuitePlan plan_for(SuiteKind kind) {
    SuitePlan p;
    p.systems = all_systems();
    switch (kind) {
        case SuiteKind::fig2:
        case SuiteKind::table1: break;
        case SuiteKind::spectra:
            p.systems = {SystemKind::duffing, SystemKind::rossler};
            p.options.spectra = p.options.methods;
            break;
        case SuiteKind::predictions:
            p.systems = {SystemKind::van_der_pol, SystemKind::mackey_glass};
            p.options.methods = {MethodKind::method1, MethodKind::method2};
            p.options.predict_steps = 500;
            break;
    }
    return p;
}

std::vector<std::pair<std::string, double>> metrics_for(SuiteKind kind, const SystemEvaluation& ev,
                                                        const MethodOutcome& o) {
    switch (kind) {
        case SuiteKind::fig2: return {{"residue", o.residue}};
        case SuiteKind::table1: return {{"mean_nrmse", o.mean_nrmse}};
        case SuiteKind::spectra: {
            double near_zero = 0.0, outside = 0.0;
            for (Index i = 0; i < o.eigenvalues.size(); ++i) {
                const double a = std::abs(o.eigenvalues(i));
                if (a < 1e-6) near_zero += 1.0;
                if (a > 1.0 + 1e-3) outside += 1.0;
            }
            return {{"rank", static_cast<double>(o.rank)},
                    {"size", static_cast<double>(o.model.size())},
                    {"eigenvalues_below_1e-6", near_zero},
                    {"eigenvalues_outside_unit_circle", outside},
                    {"max_modulus", o.eigenvalues.size() ? std::abs(o.eigenvalues(0)) : 0.0}};
        }
        case SuiteKind::predictions: {
            const Matrix& p = o.prediction;
            const Vector last = p.col(p.cols() - 1);
            const Index short_steps = std::min<Index>(100, p.cols());
            return {{"max_abs_first_100", p.leftCols(short_steps).cwiseAbs().maxCoeff()},
                    {"final_distance_to_mean", (last - ev.train_mean).cwiseAbs().maxCoeff()}};
        }
    }
    return {};
}

}  // namespace

SuiteResult run_suite(SuiteKind kind, std::uint64_t base_seed, int seeds) {
    if (seeds < 1) throw std::invalid_argument("run_suite: need at least one seed");
    const SuitePlan plan = plan_for(kind);
    SuiteResult result;
    result.kind = kind;
    for (int i = 0; i < seeds; ++i) result.seeds.push_back(base_seed + static_cast<std::uint64_t>(i));

    const auto jobs = static_cast<long>(plan.systems.size() * result.seeds.size());
    std::vector<std::optional<SystemEvaluation>> evals(static_cast<std::size_t>(jobs));
    std::vector<std::string> errors(static_cast<std::size_t>(jobs));
#pragma omp parallel for schedule(dynamic)
    for (long j = 0; j < jobs; ++j) {
        const auto sys = plan.systems[static_cast<std::size_t>(j) / result.seeds.size()];
        const auto seed = result.seeds[static_cast<std::size_t>(j) % result.seeds.size()];
        try {
            evals[static_cast<std::size_t>(j)] = evaluate_system(sys, seed, plan.options);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(j)] =
                to_string(sys) + " seed " + std::to_string(seed) + ": " + e.what();
        }
    }
    std::string failures;
    for (const auto& e : errors)
        if (!e.empty()) failures += e + "\n";
    if (!failures.empty()) throw std::runtime_error("suite " + to_string(kind) + " failed:\n" + failures);

    for (auto& e : evals) result.evaluations.push_back(std::move(*e));
    for (SystemKind sys : plan.systems) {
        for (MethodKind m : plan.options.methods) {
            std::vector<SuiteCell> cells;
            for (const auto& ev : result.evaluations) {
                if (ev.system != sys) continue;
                const auto metrics = metrics_for(kind, ev, ev.methods.at(m));
                if (cells.empty())
                    for (const auto& [name, _] : metrics) cells.push_back({sys, m, name, {}, 0, 0, 0});
                for (std::size_t i = 0; i < metrics.size(); ++i) cells[i].values.push_back(metrics[i].second);
            }
            for (auto& c : cells) {
                c.median = median(c.values);
                c.min = *std::min_element(c.values.begin(), c.values.end());
                c.max = *std::max_element(c.values.begin(), c.values.end());
                result.cells.push_back(std::move(c));
            }
        }
    }
    return result;
}

void write_suite(const SuiteResult& result, const fs::path& dir) {
    fs::create_directories(dir);
    const fs::path table = dir / ("suite_" + to_string(result.kind) + ".csv");
    std::ofstream out(table);
    if (!out) throw std::runtime_error("cannot open " + table.string());
    out << "system,method,metric,median,min,max";
    for (auto s : result.seeds) out << ",seed_" << s;
    out << "\n";
    for (const auto& c : result.cells) {
        out << to_string(c.system) << "," << to_string(c.method) << "," << c.metric << ","
            << io::format_double(c.median) << "," << io::format_double(c.min) << ","
            << io::format_double(c.max);
        for (double v : c.values) out << "," << io::format_double(v);
        out << "\n";
    }

    for (const auto& ev : result.evaluations) {
        for (const auto& [m, o] : ev.methods) {
            const std::string stem = to_string(ev.system) + "_" + to_string(m) + "_seed" + std::to_string(ev.seed);
            if (o.eigenvalues.size() > 0) {
                Matrix e(o.eigenvalues.size(), 3);
                e.leftCols(2) = io::complex_columns(o.eigenvalues);
                e.col(2) = o.eigenvalues.cwiseAbs();
                io::write_csv((dir / ("eigenvalues_" + stem + ".csv")).string(), e, {"re", "im", "abs"});
            }
            if (o.prediction.size() > 0) {
                const Matrix p = o.prediction.transpose();
                io::write_csv((dir / ("prediction_" + stem + ".csv")).string(), p,
                              io::numbered("xhat", p.cols()));
            }
        }
    }
}

}  // namespace rck
