// Copyright 2026 The Toric Learn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command line front end: dataset generation, training, correction runs,
// noise and size sweeps, e_r fits and phase scans. Every command writes tidy
// CSV/JSON plus a manifest.json into its output directory.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "manifest.hpp"
#include "run_config.hpp"
#include "toric/toric.hpp"

namespace fs = std::filesystem;

namespace toric::cli {
namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalError = 3, kIoError = 4 };

/// Flag values; unset flags leave the file or default value alone.
struct Overrides {
    std::string config_path;
    std::optional<std::string> out;
    std::optional<size_t> threads, k, phase_samples, n_examples, n_seeds, n_iter, steps, phase_k, realizations;
    std::optional<uint64_t> seed;
    std::optional<double> b_max, deadband, damping, noise_sigma, disorder_parameter;
    std::optional<std::string> distribution, triple_source, disorder, input_transform;
    std::optional<size_t> mc_samples;
    bool allow_k_mismatch = false;
};

RunConfig resolve_config(const Overrides &o, const std::string &command) {
    RunConfig c;
    if (!o.config_path.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(o.config_path));
        } catch (const nlohmann::json::exception &e) {
            throw ConfigError("config file " + o.config_path + " is not valid JSON: " + e.what());
        }
        apply_json(j, c);
    }
    if (o.threads) c.threads = *o.threads;
    if (o.k) c.k = *o.k;
    if (o.n_examples) c.n_examples = *o.n_examples;
    if (o.n_seeds) c.n_seeds = *o.n_seeds;
    if (o.n_iter) c.n_iter = *o.n_iter;
    if (o.steps) c.train.steps = *o.steps;
    if (o.phase_k) c.phase_k = *o.phase_k;
    if (o.phase_samples) c.phase_samples = *o.phase_samples;
    if (o.realizations) c.realizations = *o.realizations;
    if (o.seed) c.seed = *o.seed;
    if (o.b_max) c.b_max = *o.b_max;
    if (o.deadband) c.deadband = *o.deadband;
    if (o.damping) c.damping = *o.damping;
    if (o.noise_sigma) c.noise_sigma = *o.noise_sigma;
    if (o.disorder_parameter) c.disorder_parameter = *o.disorder_parameter;
    if (o.distribution) c.distribution = *o.distribution;
    if (o.triple_source) c.triple_source = *o.triple_source;
    if (o.disorder) c.disorder = *o.disorder;
    if (o.input_transform) c.input_transform = *o.input_transform;
    if (o.mc_samples) c.mc.n_samples = *o.mc_samples;
    if (o.allow_k_mismatch) c.allow_k_mismatch = true;
    if (o.out) c.output_dir = *o.out;
    if (c.output_dir.empty()) {
        const char *root = std::getenv("TORIC_OUTPUT_ROOT");
        c.output_dir = (fs::path(root && *root ? root : "toric_runs") / command).string();
    }
    c.mc.threads = 1;
    c.validate();
    return c;
}

/// Writes `content` under the output directory and records it.
void emit(const RunConfig &c, Manifest &m, const std::string &relative, const std::string &content) {
    atomic_write(fs::path(c.output_dir) / relative, content);
    m.add_output(c.output_dir, relative);
}

void finish(const RunConfig &c, Manifest &m) {
    emit(c, m, "config.json", to_json(c).dump(1) + "\n");
    m.write(c.output_dir);
    std::printf("wrote %s\n", (fs::path(c.output_dir) / "manifest.json").string().c_str());
}

DatasetParams dataset_params(const RunConfig &c, uint64_t seed) {
    DatasetParams dp;
    dp.n = c.n_examples;
    dp.b_max = c.b_max;
    dp.mc = c.mc;
    dp.seed = seed;
    dp.threads = c.threads;
    dp.distribution = parse_distribution(c.distribution);
    return dp;
}

TripleSource triple_source(const RunConfig &c) {
    return c.triple_source == "enumeration" ? enumeration_triple_source() : sampler_triple_source(c.mc);
}

TrainResult train_model(const RunConfig &c, const Dataset &data, size_t k, uint64_t seed) {
    RegressorModel model = RegressorModel::init(seed);
    model.set_input_transform(parse_transform(c.input_transform));
    model.metadata().k = k;
    model.metadata().b_max = c.b_max;
    TrainParams hp = c.train;
    hp.seed = seed;
    return train(model, data, hp);
}

std::string loss_trace_csv(const LossTrace &trace) {
    CsvTable t{{"step", "train_loss", "eval_loss"}, {}};
    size_t prev = 0;
    for (size_t i = 0; i < trace.eval_steps.size(); ++i) {
        const size_t step = trace.eval_steps[i];
        double sum = 0;
        for (size_t s = prev; s < step; ++s) sum += trace.train[s];
        t.rows.push_back({static_cast<double>(step), sum / static_cast<double>(step - prev), trace.eval[i]});
        prev = step;
    }
    return t.to_string();
}

/// Exact backend with mixed fields for k <= 3, solvable b^z-only otherwise.
std::unique_ptr<Backend> make_backend(const RunConfig &c, const Lattice &lat, uint64_t seed, double sigma) {
    const bool exact = lat.k() <= 3;
    const FieldConfig f = draw_fields(lat.n_edges(), parse_distribution(c.distribution), c.b_max,
                                      exact ? FieldSectors::Both : FieldSectors::Z, derive_seed(seed, 0));
    std::unique_ptr<Backend> b;
    if (exact) {
        b = std::make_unique<ExactBackend>(lat, f);
    } else {
        b = std::make_unique<SolvableBackend>(lat, f, c.mc, derive_seed(seed, 1));
    }
    if (sigma > 0) b = std::make_unique<NoisyBackend>(std::move(b), sigma, derive_seed(seed, 2));
    return b;
}

CorrectionParams correction_params(const RunConfig &c) {
    CorrectionParams p;
    p.n_iter = c.n_iter;
    p.damping = c.damping;
    p.inference.deadband = c.deadband;
    p.inference.b_max = c.b_max;
    p.inference.allow_k_mismatch = c.allow_k_mismatch;
    return p;
}

int cmd_gen_data(const RunConfig &c) {
    Manifest m("gen-data", to_json(c));
    const Lattice lat = Lattice::build(c.k);
    const Dataset d = generate_dataset(lat, dataset_params(c, c.seed), triple_source(c));
    d.save(fs::path(c.output_dir) / "dataset.csv");
    m.add_output(c.output_dir, "dataset.csv");
    m.add_output(c.output_dir, "dataset.json");
    std::printf("generated %zu rows at k=%zu\n", d.size(), c.k);
    finish(c, m);
    return kOk;
}

int cmd_train(const RunConfig &c, const std::string &data_path) {
    Manifest m("train", to_json(c));
    const Dataset data = Dataset::load(data_path);
    m.add_input(data_path);
    const size_t k = data.provenance.value("k", c.k);
    const TrainResult r = train_model(c, data, k, c.seed);
    r.model.save(fs::path(c.output_dir) / "model.json");
    m.add_output(c.output_dir, "model.json");
    emit(c, m, "loss_trace.csv", loss_trace_csv(r.trace));
    const auto &md = r.model.metadata();
    std::printf("best eval loss %.4e at step %zu, final train loss %.4e\n", md.best_eval_loss, md.best_step,
                md.final_train_loss);
    if (c.train.steps >= 2000 + 500) {
        std::printf("eval relative change over the last 2000 steps: %.4f\n",
                    r.trace.eval_relative_change(c.train.steps));
    }
    finish(c, m);
    return kOk;
}

int cmd_correct(const RunConfig &c, const std::string &model_path) {
    Manifest m("correct", to_json(c));
    const RegressorModel model = RegressorModel::load(model_path);
    m.add_input(model_path);
    const Lattice lat = Lattice::build(c.k);
    CsvTable finals{{"seed", "iterations", "bit_err", "phase_err", "delta_H", "max_field"}, {}};
    for (size_t i = 0; i < c.n_seeds; ++i) {
        const uint64_t seed = c.seed + i;
        auto backend = make_backend(c, lat, seed, c.noise_sigma);
        const CorrectionTrace trace = correct_iteratively(*backend, model, correction_params(c));
        const std::string dir = "seed_" + std::to_string(seed) + "/";
        emit(c, m, dir + "trace.jsonl", trace.to_jsonl());
        emit(c, m, dir + "summary.csv", trace.summary_csv());
        const IterationRecord &f = trace.final();
        finals.rows.push_back({static_cast<double>(seed), static_cast<double>(f.iter), f.error.bit, f.error.phase,
                               f.delta_h, f.max_field});
        std::printf("seed %llu: iteration 0 bit %.4f phase %.4f -> iteration %zu bit %.2e phase %.2e delta_H %.3e\n",
                    static_cast<unsigned long long>(seed), trace.iterations[0].error.bit,
                    trace.iterations[0].error.phase, f.iter, f.error.bit, f.error.phase, f.delta_h);
    }
    emit(c, m, "final.csv", finals.to_string());
    finish(c, m);
    return kOk;
}

int cmd_noise_sweep(const RunConfig &c, const std::string &model_path) {
    Manifest m("noise-sweep", to_json(c));
    const RegressorModel model = RegressorModel::load(model_path);
    m.add_input(model_path);
    const Lattice lat = Lattice::build(c.k);
    CsvTable rows{{"sigma", "seed", "bit_err", "phase_err", "delta_H"}, {}};
    CsvTable agg{{"sigma", "mean_bit_err", "mean_phase_err", "success_fraction"}, {}};
    for (double sigma : c.sigma_grid) {
        double bit = 0, phase = 0, ok = 0;
        for (size_t i = 0; i < c.n_seeds; ++i) {
            const uint64_t seed = c.seed + i;
            auto backend = make_backend(c, lat, seed, sigma);
            const IterationRecord f = correct_iteratively(*backend, model, correction_params(c)).final();
            rows.rows.push_back({sigma, static_cast<double>(seed), f.error.bit, f.error.phase, f.delta_h});
            bit += f.error.bit;
            phase += f.error.phase;
            ok += (f.error.bit < 0.05 && f.error.phase < 0.05) ? 1 : 0;
        }
        const double n = static_cast<double>(c.n_seeds);
        agg.rows.push_back({sigma, bit / n, phase / n, ok / n});
        std::printf("sigma %.4f: mean bit %.4f phase %.4f, %g/%zu below 5%%\n", sigma, bit / n, phase / n, ok,
                    c.n_seeds);
    }
    emit(c, m, "noise_sweep.csv", rows.to_string());
    emit(c, m, "noise_summary.csv", agg.to_string());
    finish(c, m);
    return kOk;
}

int cmd_scaling(const RunConfig &c) {
    Manifest m("scaling", to_json(c));
    CsvTable t{{"k", "holdout_rmse", "initial_bit_err", "initial_phase_err", "final_bit_err", "final_phase_err",
                "final_delta_H"},
               {}};
    for (size_t k : c.scaling_k) {
        const Lattice lat = Lattice::build(k);
        RunConfig ck = c;
        ck.k = k;
        if (k > 4) ck.triple_source = "sampler";
        const uint64_t seed = derive_seed(c.seed, k);
        const Dataset data = generate_dataset(lat, dataset_params(ck, seed), triple_source(ck));
        DatasetParams hold = dataset_params(ck, derive_seed(seed, 1));
        hold.n = 500;
        const Dataset holdout = generate_dataset(lat, hold, triple_source(ck));
        const TrainResult r = train_model(ck, data, k, seed);
        std::vector<size_t> rows(holdout.size());
        std::iota(rows.begin(), rows.end(), 0);
        const double rmse = std::sqrt(r.model.loss(holdout.input_matrix(rows), holdout.label_vector(rows)));
        r.model.save(fs::path(c.output_dir) / ("model_k" + std::to_string(k) + ".json"));
        m.add_output(c.output_dir, "model_k" + std::to_string(k) + ".json");

        auto backend = make_backend(ck, lat, seed, c.noise_sigma);
        CorrectionParams cp = correction_params(ck);
        const CorrectionTrace trace = correct_iteratively(*backend, r.model, cp);
        emit(c, m, "trace_k" + std::to_string(k) + ".csv", trace.summary_csv());
        const auto &i0 = trace.iterations.front();
        const auto &f = trace.final();
        t.rows.push_back({static_cast<double>(k), rmse, i0.error.bit, i0.error.phase, f.error.bit, f.error.phase,
                          f.delta_h});
        std::printf("k=%zu: holdout rmse %.4f, phase error %.4f -> %.2e\n", k, rmse, i0.error.phase, f.error.phase);
    }
    emit(c, m, "scaling.csv", t.to_string());
    finish(c, m);
    return kOk;
}

int cmd_fit_er(const RunConfig &c) {
    Manifest m("fit-er", to_json(c));
    const std::vector<double> grid = linear_grid(0.0, 0.2, c.er_points);
    const PCurve curve = sample_p_curve(c.er_k, grid, c.er_trials, c.seed);
    const ErPolynomial poly = fit_er_polynomial(curve);
    CsvTable t{{"e_r", "p", "p_stderr", "p_oracle"}, {}};
    for (const auto &pt : curve.points) t.rows.push_back({pt.e_r, pt.p, pt.std_error, parity_flip_probability(pt.e_r)});
    emit(c, m, "p_curve.csv", t.to_string());
    const ErPolynomial ref = ErPolynomial::reference();
    const nlohmann::json j = {{"coefficients", poly.c},
                              {"mse", poly.mse},
                              {"p_min", poly.p_min},
                              {"p_max", poly.p_max},
                              {"k", poly.k},
                              {"condition_number", poly.condition_number},
                              {"e_r_at_p_0.1", poly(0.1)},
                              {"reference_coefficients", ref.c},
                              {"reference_e_r_at_p_0.1", ref(0.1)}};
    emit(c, m, "er_polynomial.json", j.dump(1) + "\n");
    std::printf("e_r(0.1) = %.5f (reference polynomial %.5f)\n", poly(0.1), ref(0.1));
    finish(c, m);
    return kOk;
}

std::string model_file_label(const DisorderModel &d) {
    std::string s = disorder_name(d.kind);
    if (d.kind != DisorderKind::Uniform) s += "_" + format_double(d.parameter);
    if (d.sign < 0) s = "negated_" + s;
    return s;
}

int cmd_phase_scan(const RunConfig &c) {
    Manifest m("phase-scan", to_json(c));
    std::vector<DisorderModel> models;
    if (c.disorder == "anchors") {
        models = anchor_models(c.seed);
    } else {
        models.push_back(DisorderModel{parse_disorder(c.disorder), c.disorder_parameter, c.seed, 1});
    }
    ScanParams sp;
    sp.mc.n_samples = c.phase_samples;
    sp.mc.burn_in = std::max<size_t>(c.phase_samples / 10, 100);
    sp.n_realizations = c.realizations;
    sp.threads = c.threads;
    const std::vector<double> grid = linear_grid(c.beta_min, c.beta_max, c.n_beta);
    nlohmann::json summary = nlohmann::json::array();
    for (size_t i = 0; i < models.size(); ++i) {
        const DisorderModel &d = models[i];
        const TransitionReport r = detect_transition(c.phase_k, d, grid, sp, derive_seed(c.seed, i));
        const std::string label = model_file_label(d);
        emit(c, m, "scan_" + label + ".csv", r.curve.to_csv().to_string());
        emit(c, m, "scan_" + label + "_half_k.csv", r.reference.to_csv().to_string());
        summary.push_back({{"model", d.label()},
                           {"k", c.phase_k},
                           {"transition_detected", r.detected},
                           {"peak_beta", r.peak.beta},
                           {"peak_cv", r.peak.cv},
                           {"peak_prominence_sigma", r.peak.prominence_sigma},
                           {"growth_sigma", r.growth_sigma}});
        std::printf("%s: %s (peak beta %.3f, %.1f sigma above edges, growth %.1f sigma)\n", d.label().c_str(),
                    r.detected ? "transition detected" : "no transition detected", r.peak.beta,
                    r.peak.prominence_sigma, r.growth_sigma);
    }
    emit(c, m, "transitions.json", summary.dump(1) + "\n");
    finish(c, m);
    return kOk;
}

int cmd_verify(const std::string &dir) {
    const VerifyResult r = verify_manifest(dir);
    if (r.ok) {
        std::printf("manifest ok\n");
        return kOk;
    }
    for (const auto &p : r.problems) std::fprintf(stderr, "%s\n", p.c_str());
    return kIoError;
}

int run(int argc, char **argv) {
    CLI::App app{"Hamiltonian learning for the disordered toric code"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides o;
    app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", o.out, "Output directory (default $TORIC_OUTPUT_ROOT/<command>)");
    app.add_option("--threads", o.threads, "Worker threads; 1 gives bit-identical reruns");
    app.add_option("--seed", o.seed, "Master seed");
    app.add_option("--k", o.k, "Lattice size");
    app.add_option("--n-examples", o.n_examples, "Dataset rows");
    app.add_option("--n-seeds", o.n_seeds, "Number of field seeds");
    app.add_option("--n-iter", o.n_iter, "Correction rounds");
    app.add_option("--steps", o.steps, "Training steps");
    app.add_option("--b-max", o.b_max, "Field scale");
    app.add_option("--deadband", o.deadband, "Sign deadband");
    app.add_option("--damping", o.damping, "Correction step factor in (0, 1]");
    app.add_option("--noise-sigma", o.noise_sigma, "Gaussian measurement noise");
    app.add_option("--distribution", o.distribution, "uniform, zero or scaled_uniform");
    app.add_option("--triple-source", o.triple_source, "sampler or enumeration");
    app.add_option("--input-transform", o.input_transform, "identity or sqrt_deficit");
    app.add_option("--mc-samples", o.mc_samples, "Monte-Carlo samples per estimate");
    app.add_flag("--allow-k-mismatch", o.allow_k_mismatch, "Use a model trained on another lattice size");
    app.add_option("--disorder", o.disorder, "anchors, uniform, bond_dilution or sign_flip");
    app.add_option("--disorder-parameter", o.disorder_parameter, "q or p of the disorder model");
    app.add_option("--phase-k", o.phase_k, "Lattice size of phase scans");
    app.add_option("--phase-samples", o.phase_samples, "Metropolis samples per phase-scan point");
    app.add_option("--realizations", o.realizations, "Disorder realizations per point");

    std::string data_path, model_path, verify_dir;
    auto *gen = app.add_subcommand("gen-data", "Generate a training dataset");
    auto *tr = app.add_subcommand("train", "Train the field regressor");
    tr->add_option("--data", data_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
    auto *cor = app.add_subcommand("correct", "Run the iterative correction");
    cor->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
    auto *noise = app.add_subcommand("noise-sweep", "Correction under measurement noise");
    noise->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
    auto *scal = app.add_subcommand("scaling", "Train and correct across lattice sizes");
    auto *fit = app.add_subcommand("fit-er", "Sample p(e_r) and fit the e_r(p) quartic");
    auto *phase = app.add_subcommand("phase-scan", "Heat-capacity scans of the disorder anchors");
    auto *ver = app.add_subcommand("verify-manifest", "Check output hashes against a manifest");
    ver->add_option("dir", verify_dir, "Output directory holding manifest.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (ver->parsed()) return cmd_verify(verify_dir);
        CLI::App *sub = app.get_subcommands().front();
        const RunConfig c = resolve_config(o, sub->get_name());
        if (sub == gen) return cmd_gen_data(c);
        if (sub == tr) return cmd_train(c, data_path);
        if (sub == cor) return cmd_correct(c, model_path);
        if (sub == noise) return cmd_noise_sweep(c, model_path);
        if (sub == scal) return cmd_scaling(c);
        if (sub == fit) return cmd_fit_er(c);
        if (sub == phase) return cmd_phase_scan(c);
    } catch (const ConfigError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const NumericalError &e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumericalError;
    } catch (const IoError &e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return kIoError;
    } catch (const std::invalid_argument &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    }
    return kConfigError;
}

}  // namespace
}  // namespace toric::cli

int main(int argc, char **argv) { return toric::cli::run(argc, argv); }
