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

// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset; the exit status is non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "toric/toric.hpp"

namespace {

using namespace toric;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<double> uniform_vector(size_t n, double b_max, uint64_t seed) {
    Rng rng = make_rng(seed);
    std::vector<double> v(n);
    draw_field_vector(v, FieldDistribution::Uniform, b_max, rng);
    return v;
}

void collect(const MeasurementSet &ms, std::vector<Estimate> &out) {
    out.insert(out.end(), ms.stars.begin(), ms.stars.end());
    out.insert(out.end(), ms.plaquettes.begin(), ms.plaquettes.end());
    for (const auto &e : ms.edges) {
        for (const Estimate &x : {e.a_s, e.a_sp, e.a_corr, e.b_p, e.b_pp, e.b_corr, e.sz, e.sx}) out.push_back(x);
    }
}

// --- 1: sampler against enumeration -------------------------------------

Outcome criterion_oracle() {
    size_t within = 0, total = 0;
    MCParams mc;
    mc.n_samples = 4000;
    for (uint64_t c = 0; c < 100; ++c) {
        const Lattice lat = Lattice::build(c < 50 ? 2 : 3);
        FieldConfig f = FieldConfig::zeros(lat.n_edges());
        f.bz = uniform_vector(lat.n_edges(), 1.7, derive_seed(101, c));
        std::vector<Estimate> mcv, exv;
        collect(sample_measurements(lat, f, mc, derive_seed(102, c)), mcv);
        collect(enumerate_solvable(lat, f).measurements, exv);
        for (size_t i = 0; i < mcv.size(); ++i) {
            within += std::abs(mcv[i].value - exv[i].value) <= 3 * mcv[i].std_error + 1e-12;
            ++total;
        }
    }
    const double frac = static_cast<double>(within) / static_cast<double>(total);
    return {frac >= 0.95, fmt("%zu/%zu entries within 3 standard errors (%.2f%%)", within, total, 100 * frac)};
}

// --- 2: exact solver against enumeration --------------------------------

Outcome criterion_exact_vs_solvable() {
    const Lattice lat = Lattice::build(3);
    double worst = 0;
    for (uint64_t c = 0; c < 20; ++c) {
        FieldConfig f = FieldConfig::zeros(lat.n_edges());
        f.bz = uniform_vector(lat.n_edges(), 1.7, derive_seed(201, c));
        std::vector<Estimate> ex, en;
        collect(measurement_set_exact(lat, f), ex);
        collect(enumerate_solvable(lat, f).measurements, en);
        for (size_t i = 0; i < ex.size(); ++i) worst = std::max(worst, std::abs(ex[i].value - en[i].value));
    }
    return {worst < 1e-8, fmt("max |exact - enumeration| = %.2e over 20 configs", worst)};
}

// --- 3: sparse fields reduce to single-spin fields -----------------------

Outcome criterion_sparse() {
    const Lattice lat = Lattice::build(3);
    double worst = 1;
    size_t max_fields = 0;
    for (uint64_t c = 0; c < 10; ++c) {
        Rng rng = make_rng(derive_seed(301, c));
        std::vector<size_t> order(lat.n_edges());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const double beta = std::uniform_real_distribution<double>(0.2, 1.0)(rng);
        // Each star holds at most one field-carrying edge.
        std::vector<bool> used(lat.n_vertices(), false);
        FieldConfig f = FieldConfig::zeros(lat.n_edges());
        std::vector<double> hz(lat.n_edges(), 0.0);
        size_t n_fields = 0;
        for (size_t e : order) {
            const EdgeEnds ends = lat.edge_vertices(e);
            if (used[ends.first] || used[ends.second] || n_fields == 1 + c % 4) continue;
            used[ends.first] = used[ends.second] = true;
            const double lambda = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
            f.bz[e] = beta * lambda;
            hz[e] = 2 * std::sinh(f.bz[e]);
            ++n_fields;
        }
        max_fields = std::max(max_fields, n_fields);
        EigenOptions opt;
        opt.pin = LogicalPin::ZLoops;
        const StateVector a = ground_state(lat, f, opt);
        const StateVector b = ground_state(lat, build_single_field_hamiltonian(lat, hz), LogicalPin::ZLoops, opt);
        worst = std::min(worst, fidelity(a, b));
    }
    return {worst >= 1 - 1e-10, fmt("min fidelity 1 - %.2e over 10 configs (up to %zu fields)", 1 - worst, max_fields)};
}

// --- 4 and 7: training on the uniform recipe -----------------------------

struct UniformRun {
    size_t k;
    RegressorModel model;
    double plateau_change;
    double holdout_rmse;
};

// Baseline recipe: iid U(-1.7, 1.7) fields, 7450 sampled rows, raw inputs,
// constant learning rate.
UniformRun train_uniform(size_t k) {
    const Lattice lat = Lattice::build(k);
    DatasetParams dp;
    dp.n = 7450;
    dp.b_max = 1.7;
    dp.distribution = FieldDistribution::Uniform;
    dp.seed = derive_seed(401, k);
    const TripleSource source = sampler_triple_source(dp.mc);
    const Dataset data = generate_dataset(lat, dp, source);
    DatasetParams hp = dp;
    hp.n = 500;
    hp.seed = derive_seed(402, k);
    const Dataset holdout = generate_dataset(lat, hp, source);

    RegressorModel init = RegressorModel::init(derive_seed(403, k));
    init.set_input_transform(InputTransform::Identity);
    TrainParams tp;
    tp.final_lr_fraction = 1.0;
    const TrainResult r = train(init, data, tp);
    std::vector<size_t> rows(holdout.size());
    std::iota(rows.begin(), rows.end(), 0);
    const double rmse = std::sqrt(r.model.loss(holdout.input_matrix(rows), holdout.label_vector(rows)));
    return {k, r.model, r.trace.eval_relative_change(tp.steps), rmse};
}

std::map<size_t, UniformRun> &uniform_runs() {
    static std::map<size_t, UniformRun> runs;
    return runs;
}

const UniformRun &uniform_run(size_t k) {
    auto &runs = uniform_runs();
    if (!runs.count(k)) runs.emplace(k, train_uniform(k));
    return runs.at(k);
}

double gradient_check_error() {
    RegressorModel model = RegressorModel::init(404);
    model.set_input_transform(InputTransform::Identity);
    Rng rng = make_rng(405);
    std::uniform_real_distribution<double> unif(-1, 1);
    Eigen::MatrixXd X(3, 32);
    Eigen::RowVectorXd y(32);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = unif(rng);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = 1 + unif(rng);
    Gradients g;
    model.loss_and_gradients(X, y, g);
    std::uniform_int_distribution<size_t> pick(0, model.n_parameters() - 1);
    double worst = 0;
    for (int t = 0; t < 50; ++t) {
        const size_t idx = pick(rng);
        double &p = model.parameter(idx);
        const double saved = p, eps = 1e-5;
        p = saved + eps;
        const double up = model.loss(X, y);
        p = saved - eps;
        const double down = model.loss(X, y);
        p = saved;
        const double numeric = (up - down) / (2 * eps);
        const double analytic = RegressorModel::gradient_entry(g, idx);
        const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
        worst = std::max(worst, std::abs(numeric - analytic) / scale);
    }
    return worst;
}

Outcome criterion_training() {
    const double grad = gradient_check_error();
    bool ok = grad < 1e-4;
    std::string detail = fmt("gradient check max rel error %.1e", grad);
    for (size_t k : {3, 8}) {
        const UniformRun &r = uniform_run(k);
        ok = ok && r.plateau_change < 0.05;
        detail += fmt("; k=%zu eval change over last 2000 steps %.2f%%", k, 100 * r.plateau_change);
    }
    return {ok, detail};
}

Outcome criterion_scaling() {
    std::string detail;
    double lo = INFINITY, hi = 0;
    for (size_t k : {3, 8, 16}) {
        const double rmse = uniform_run(k).holdout_rmse;
        lo = std::min(lo, rmse);
        hi = std::max(hi, rmse);
        detail += fmt("k=%zu rmse %.4f; ", k, rmse);
    }
    return {hi <= 1.5 * lo, detail + fmt("max/min %.3f", hi / lo)};
}

// --- 5 and 6: correction on the exact backend -----------------------------

const RegressorModel &correction_model() {
    static const RegressorModel model = [] {
        const Lattice lat = Lattice::build(3);
        DatasetParams dp;
        dp.distribution = FieldDistribution::ScaledUniform;
        dp.seed = 7;
        const Dataset data = generate_dataset(lat, dp, enumeration_triple_source());
        TrainParams tp;
        tp.seed = 7;
        RegressorModel m = train(RegressorModel::init(7), data, tp).model;
        m.metadata().k = 3;
        return m;
    }();
    return model;
}

struct SeedResult {
    double initial_error;
    double bit, phase, delta_h;
};

constexpr double kIterationZeroFloor = 0.12;

// Mixed fields, redrawn until the iteration-0 bit or phase error exceeds 12%.
SeedResult run_seed(uint64_t seed, double sigma) {
    const Lattice lat = Lattice::build(3);
    const ErPolynomial poly = ErPolynomial::reference();
    for (uint64_t attempt = 0;; ++attempt) {
        const FieldConfig f = draw_fields(lat.n_edges(), FieldDistribution::Uniform, 1.7, FieldSectors::Both,
                                          derive_seed(501, seed, attempt));
        auto exact = std::make_unique<ExactBackend>(lat, f);
        const SingleQubitError e0 = single_qubit_error(exact->measure(), poly);
        if (std::max(e0.bit, e0.phase) <= kIterationZeroFloor) continue;
        std::unique_ptr<Backend> backend = std::move(exact);
        if (sigma > 0) backend = std::make_unique<NoisyBackend>(std::move(backend), sigma, derive_seed(502, seed));
        CorrectionParams cp;
        cp.n_iter = 5;
        cp.inference.deadband = std::max(0.005, sigma);
        const CorrectionTrace t = correct_iteratively(*backend, correction_model(), cp);
        const IterationRecord &f5 = t.final();
        return {std::max(e0.bit, e0.phase), f5.error.bit, f5.error.phase, f5.delta_h};
    }
}

Outcome criterion_correction() {
    double bit = 0, phase = 0, dh = 0, min0 = 1;
    size_t ok = 0;
    for (uint64_t s = 0; s < 10; ++s) {
        const SeedResult r = run_seed(s, 0.0);
        std::printf("  seed %llu: iteration 0 error %.3f -> bit %.2e phase %.2e delta_H %.2e\n",
                    static_cast<unsigned long long>(s), r.initial_error, r.bit, r.phase, r.delta_h);
        std::fflush(stdout);
        bit += r.bit / 10;
        phase += r.phase / 10;
        dh += r.delta_h / 10;
        min0 = std::min(min0, r.initial_error);
        ok += r.bit < 1e-3 && r.phase < 1e-3 && r.delta_h < 1e-2;
    }
    const bool pass = bit < 1e-3 && phase < 1e-3 && dh < 1e-2 && ok >= 8;
    return {pass, fmt("mean bit %.2e, phase %.2e, delta_H %.2e; %zu/10 seeds succeed; min iteration-0 error %.3f", bit,
                      phase, dh, ok, min0)};
}

Outcome criterion_noise() {
    bool pass = true;
    std::string detail;
    double prev = -1;
    for (double sigma : {0.005, 0.01, 0.02}) {
        size_t ok = 0;
        double mean = 0;
        for (uint64_t s = 0; s < 10; ++s) {
            const SeedResult r = run_seed(s, sigma);
            ok += r.bit < 0.05 && r.phase < 0.05;
            mean += std::max(r.bit, r.phase) / 10;
        }
        std::printf("  sigma %.3f: %zu/10 below 5%%, mean final error %.2e\n", sigma, ok, mean);
        std::fflush(stdout);
        pass = pass && ok >= 8 && mean >= prev;
        prev = mean;
        detail += fmt("sigma %.3f: %zu/10, mean %.2e; ", sigma, ok, mean);
    }
    return {pass, detail + "mean final error must not decrease with sigma"};
}

// --- 8: e_r / p regression ------------------------------------------------

Outcome criterion_er() {
    const std::vector<double> grid = linear_grid(0.0, 0.2, 21);
    const PCurve c8 = sample_p_curve(8, grid, 4000, 801);
    const PCurve c16 = sample_p_curve(16, grid, 4000, 802);
    size_t oracle_bad = 0, size_bad = 0;
    for (size_t i = 0; i < grid.size(); ++i) {
        for (const PCurve *c : {&c8, &c16}) {
            const auto &pt = c->points[i];
            oracle_bad += std::abs(pt.p - parity_flip_probability(pt.e_r)) > 3 * pt.std_error + 1e-12;
        }
        const double se = std::hypot(c8.points[i].std_error, c16.points[i].std_error);
        size_bad += std::abs(c8.points[i].p - c16.points[i].p) > 3 * se + 1e-12;
    }
    const ErPolynomial fit = fit_er_polynomial(c8);
    const ErPolynomial ref = ErPolynomial::reference();
    double worst = 0;
    for (double p = 0; p <= 0.35 + 1e-12; p += 0.005) worst = std::max(worst, std::abs(fit(p) - ref(p)));
    return {oracle_bad == 0 && size_bad == 0 && worst <= 0.01,
            fmt("%zu points off the parity oracle, %zu k=8/k=16 disagreements, max |fit - reference| %.4f", oracle_bad,
                size_bad, worst)};
}

// --- 9: phase anchors --------------------------------------------------------

Outcome criterion_phase() {
    const ScanParams sp;
    const TransitionReport uniform =
        detect_transition(16, DisorderModel::uniform(), linear_grid(0.30, 0.60, 16), sp, 901);
    const TransitionReport diluted =
        detect_transition(16, DisorderModel::dilution(0.6, 902), linear_grid(0.1, 5.0, 16), sp, 903);
    const std::vector<double> grid = linear_grid(0.1, 1.7, 16);
    const Lattice lat = Lattice::build(16);
    const ScanCurve low = scan_transition(lat, DisorderModel::sign_flip(0.2, 904), grid, sp, 905);
    const ScanCurve high = scan_transition(lat, DisorderModel::sign_flip(0.8, 906), grid, sp, 907);
    double zmax = 0;
    for (double z : curve_z_scores(low, high)) zmax = std::max(zmax, std::abs(z));

    const bool peak_ok = uniform.detected && std::abs(uniform.peak.beta - 0.44) <= 0.03;
    const bool dilution_ok = !diluted.detected;
    const bool symmetry_ok = zmax < 3;
    return {peak_ok && dilution_ok && symmetry_ok,
            fmt("uniform peak beta %.3f (detected %d, growth %.1f sigma); q=0.6 detected %d (peak %.1f sigma, growth "
                "%.1f sigma); sign flip p=0.2 vs 0.8 max |z| %.2f",
                uniform.peak.beta, uniform.detected, uniform.growth_sigma, diluted.detected,
                diluted.peak.prominence_sigma, diluted.growth_sigma, zmax)};
}

}  // namespace

int main(int argc, char **argv) {
    const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
        {"oracle equivalence", criterion_oracle},
        {"solvable vs exact consistency", criterion_exact_vs_solvable},
        {"sparse-field reduction", criterion_sparse},
        {"training convergence", criterion_training},
        {"end-to-end correction", criterion_correction},
        {"noise robustness", criterion_noise},
        {"lattice-size independence", criterion_scaling},
        {"e_r/p regression", criterion_er},
        {"phase anchors", criterion_phase},
    };
    std::set<size_t> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::strtoul(argv[i], nullptr, 10));
    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        if (!selected.empty() && !selected.count(i + 1)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %zu (%s): %s [%.0f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
