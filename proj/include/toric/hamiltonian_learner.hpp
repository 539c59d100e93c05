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

#ifndef TORIC_HAMILTONIAN_LEARNER_HPP
#define TORIC_HAMILTONIAN_LEARNER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "toric/common.hpp"
#include "toric/error_metrics.hpp"
#include "toric/exact_solver.hpp"
#include "toric/fields.hpp"
#include "toric/gibbs_sampler.hpp"
#include "toric/io.hpp"
#include "toric/lattice.hpp"
#include "toric/neural_regressor.hpp"

namespace toric {

/// Produces the network input triple for field vector b at the reference
/// edge. The default source is the Metropolis sampler.
using TripleSource = std::function<Triple(const Lattice &, std::span<const double> b, uint64_t seed)>;

inline TripleSource sampler_triple_source(const MCParams &mc) {
    return [mc](const Lattice &lat, std::span<const double> b, uint64_t seed) {
        const auto est = sample_edge_triple(lat, b, kReferenceEdge, mc, seed);
        return Triple{est[0].value, est[1].value, est[2].value};
    };
}

/// Exact triples by group enumeration (k <= 4).
inline TripleSource enumeration_triple_source() {
    return [](const Lattice &lat, std::span<const double> b, uint64_t) {
        const auto en = enumerate_sector(lat, b).measurements;
        const EdgeEnds e = lat.edge_vertices(kReferenceEdge);
        return Triple{en.stabilizer[e.first].value, en.stabilizer[e.second].value,
                      en.correlator[kReferenceEdge].value};
    };
}

/// Uniform: iid U(-b_max, b_max) on every edge. Zero: all fields 0.
/// ScaledUniform: a per-row scale u = U(0, 1)^3, then iid U(-u b_max, u b_max),
/// so background fields of every strength down to zero are represented and
/// weak fields, where the correction loop ends up, are sampled densely.
enum class FieldDistribution { Uniform, Zero, ScaledUniform };

inline std::string distribution_name(FieldDistribution d) {
    switch (d) {
        case FieldDistribution::Uniform:
            return "uniform";
        case FieldDistribution::Zero:
            return "zero";
        case FieldDistribution::ScaledUniform:
            return "scaled_uniform";
    }
    return "unknown";
}

inline FieldDistribution parse_distribution(const std::string &name) {
    if (name == "uniform") return FieldDistribution::Uniform;
    if (name == "zero") return FieldDistribution::Zero;
    if (name == "scaled_uniform") return FieldDistribution::ScaledUniform;
    throw ConfigError("unknown field distribution '" + name + "'");
}

struct DatasetParams {
    size_t n = 7450;
    double b_max = 1.7;
    MCParams mc{};
    uint64_t seed = 1;
    size_t threads = 1;
    FieldDistribution distribution = FieldDistribution::Uniform;

    void validate() const {
        if (n == 0) throw ConfigError("dataset size must be at least 1");
        if (!(b_max > 0) || !std::isfinite(b_max)) throw ConfigError("b_max must be positive");
        if (b_max > kDefaultFieldCap) throw ConfigError("b_max exceeds the field cap");
        mc.validate();
    }
};

/// Fills `b` with one draw from the distribution.
inline void draw_field_vector(std::span<double> b, FieldDistribution d, double b_max, Rng &rng) {
    std::uniform_real_distribution<double> unif(-b_max, b_max);
    double scale = 1.0;
    if (d == FieldDistribution::Zero) {
        std::fill(b.begin(), b.end(), 0.0);
        return;
    }
    if (d == FieldDistribution::ScaledUniform) scale = std::pow(std::uniform_real_distribution<double>(0.0, 1.0)(rng), 3);
    for (double &x : b) x = scale * unif(rng);
}

enum class FieldSectors { Z, X, Both };

/// Random field configuration for correction runs. With both sectors the
/// b^z and b^x vectors are independent draws.
inline FieldConfig draw_fields(size_t n_edges, FieldDistribution d, double b_max, FieldSectors sectors,
                               uint64_t seed) {
    Rng rng = make_rng(seed);
    FieldConfig f = FieldConfig::zeros(n_edges);
    if (sectors != FieldSectors::X) draw_field_vector(f.bz, d, b_max, rng);
    if (sectors != FieldSectors::Z) draw_field_vector(f.bx, d, b_max, rng);
    return f;
}

/// Rows of (<A_s>, <A_s'>, <A_s A_s'>) at the reference edge for random
/// b^z, labelled |b^z| at that edge. Sampled entries are clipped to
/// [-1, 1], the range of the exact expectations.
inline Dataset generate_dataset(const Lattice &lattice, const DatasetParams &params,
                                const TripleSource &source = {}) {
    params.validate();
    const TripleSource src = source ? source : sampler_triple_source(params.mc);
    Dataset d;
    d.inputs.resize(params.n);
    d.labels.resize(params.n);
    parallel_for(params.n, params.threads, [&](size_t row) {
        Rng rng = make_rng(derive_seed(params.seed, row));
        std::vector<double> b(lattice.n_edges(), 0.0);
        draw_field_vector(b, params.distribution, params.b_max, rng);
        Triple t = src(lattice, b, derive_seed(params.seed, row, 1));
        for (double &v : t) v = std::clamp(v, -1.0, 1.0);
        d.inputs[row] = t;
        d.labels[row] = std::abs(b[kReferenceEdge]);
    });
    d.provenance = {{"k", lattice.k()},
                    {"n", params.n},
                    {"b_max", params.b_max},
                    {"seed", params.seed},
                    {"distribution", distribution_name(params.distribution)},
                    {"reference_edge", kReferenceEdge},
                    {"mc",
                     {{"burn_in", params.mc.burn_in},
                      {"n_samples", params.mc.n_samples},
                      {"thinning", params.mc.thinning},
                      {"n_batches", params.mc.n_batches},
                      {"n_chains", params.mc.n_chains}}}};
    return d;
}

/// +1 above the deadband, -1 below its negative, 0 inside.
inline int infer_sign(double value, double deadband = 0.02) {
    if (value > deadband) return 1;
    if (value < -deadband) return -1;
    return 0;
}

struct InferenceParams {
    double deadband = 0.02;
    /// Upper clamp for magnitudes; the model's recorded b_max when set.
    double b_max = 1.7;
    bool allow_k_mismatch = false;
};

/// Per-edge field estimates: magnitude from the network on the sector's
/// triple, sign from the single-spin expectation.
inline FieldConfig infer_fields(const RegressorModel &model, const MeasurementSet &ms, const Lattice &lattice,
                                const InferenceParams &params = {}) {
    const size_t model_k = model.metadata().k;
    if (model_k != 0 && model_k != lattice.k() && !params.allow_k_mismatch) {
        throw ConfigError("model was trained for k=" + std::to_string(model_k) + " but the lattice has k=" +
                          std::to_string(lattice.k()) + "; pass the mismatch override to use it anyway");
    }
    if (ms.edges.size() != lattice.n_edges()) throw ConfigError("measurement set does not match lattice");
    const double cap = model.metadata().b_max > 0 ? model.metadata().b_max : params.b_max;
    const Eigen::Index m = static_cast<Eigen::Index>(ms.edges.size());
    Eigen::MatrixXd xz(3, m), xx(3, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const EdgeMeasurement &e = ms.edges[static_cast<size_t>(i)];
        xz.col(i) << e.a_s.value, e.a_sp.value, e.a_corr.value;
        xx.col(i) << e.b_p.value, e.b_pp.value, e.b_corr.value;
    }
    const Eigen::RowVectorXd mag_z = model.forward_batch(xz);
    const Eigen::RowVectorXd mag_x = model.forward_batch(xx);
    FieldConfig est = FieldConfig::zeros(lattice.n_edges());
    for (Eigen::Index i = 0; i < m; ++i) {
        const EdgeMeasurement &e = ms.edges[static_cast<size_t>(i)];
        est.bz[static_cast<size_t>(i)] = infer_sign(e.sz.value, params.deadband) * std::clamp(mag_z(i), 0.0, cap);
        est.bx[static_cast<size_t>(i)] = infer_sign(e.sx.value, params.deadband) * std::clamp(mag_x(i), 0.0, cap);
    }
    return est;
}

/// Adds iid N(0, sigma) noise to each distinct expectation value (every
/// <A_s>, <B_p>, pair correlator and single-spin value) and clips to [-1, 1].
/// Per-edge copies of shared stabilizers see the same noisy value.
inline MeasurementSet add_measurement_noise(const MeasurementSet &ms, double sigma, uint64_t seed) {
    if (!(sigma >= 0)) throw ConfigError("noise sigma must be non-negative");
    if (sigma == 0) return ms;
    Rng rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    auto perturb = [&](Estimate &e) { e.value = std::clamp(e.value + noise(rng), -1.0, 1.0); };
    MeasurementSet out = ms;
    for (auto &e : out.stars) perturb(e);
    for (auto &e : out.plaquettes) perturb(e);
    for (auto &e : out.edges) {
        perturb(e.a_corr);
        perturb(e.b_corr);
        perturb(e.sz);
        perturb(e.sx);
        e.a_s = out.stars[e.s];
        e.a_sp = out.stars[e.sp];
        e.b_p = out.plaquettes[e.p];
        e.b_pp = out.plaquettes[e.pp];
    }
    return out;
}

struct BackendCapabilities {
    bool mixed_sectors = false;
    size_t max_k = 0;
    bool exact = false;
};

/// Measurement source whose Hamiltonian fields can be shifted.
class Backend {
   public:
    virtual ~Backend() = default;
    virtual MeasurementSet measure() = 0;
    /// Measurement without injected noise, used for metrics.
    virtual MeasurementSet measure_noiseless() { return measure(); }
    /// b <- b - delta.
    virtual void apply_correction(const FieldConfig &delta) = 0;
    virtual const FieldConfig &true_fields() const = 0;
    virtual const Lattice &lattice() const = 0;
    virtual BackendCapabilities capabilities() const = 0;
    virtual std::string id() const = 0;
};

/// Ground state of the two-sector Hamiltonian by Lanczos (k <= 3).
class ExactBackend : public Backend {
   public:
    ExactBackend(Lattice lattice, FieldConfig fields, EigenOptions opt = {})
        : lattice_(std::move(lattice)), fields_(std::move(fields)), opt_(std::move(opt)) {
        detail::check_exact_size(lattice_);
        fields_.validate(lattice_.n_edges());
    }

    MeasurementSet measure() override {
        if (!cached_) {
            EigenOptions opt = opt_;
            const LogicalPin pin = resolve_pin(opt_.pin, fields_);
            if (!state_.amplitudes.empty() && pin == last_pin_) opt.initial = state_.amplitudes;
            state_ = ground_state(lattice_, fields_, opt);
            last_pin_ = pin;
            cached_ = measure_state(state_, lattice_);
        }
        return *cached_;
    }

    void apply_correction(const FieldConfig &delta) override {
        FieldConfig next = fields_;
        next -= delta;
        next.validate(lattice_.n_edges());
        fields_ = std::move(next);
        cached_.reset();
    }

    const FieldConfig &true_fields() const override { return fields_; }
    const Lattice &lattice() const override { return lattice_; }
    BackendCapabilities capabilities() const override { return {true, 3, true}; }
    std::string id() const override { return "exact"; }
    const StateVector &state() const { return state_; }

   private:
    Lattice lattice_;
    FieldConfig fields_;
    EigenOptions opt_;
    StateVector state_;
    LogicalPin last_pin_ = LogicalPin::Auto;
    std::optional<MeasurementSet> cached_;
};

/// Monte-Carlo measurements of the solvable model (one field sector).
class SolvableBackend : public Backend {
   public:
    SolvableBackend(Lattice lattice, FieldConfig fields, MCParams mc, uint64_t seed)
        : lattice_(std::move(lattice)), fields_(std::move(fields)), mc_(mc), seed_(seed) {
        fields_.validate(lattice_.n_edges());
        check_single_sector(fields_);
    }

    MeasurementSet measure() override {
        if (!cached_) cached_ = sample_measurements(lattice_, fields_, mc_, derive_seed(seed_, rounds_++));
        return *cached_;
    }

    void apply_correction(const FieldConfig &delta) override {
        FieldConfig next = fields_;
        next -= delta;
        next.validate(lattice_.n_edges());
        check_single_sector(next);
        fields_ = std::move(next);
        cached_.reset();
    }

    const FieldConfig &true_fields() const override { return fields_; }
    const Lattice &lattice() const override { return lattice_; }
    BackendCapabilities capabilities() const override { return {false, 0, false}; }
    std::string id() const override { return "solvable"; }

   private:
    static void check_single_sector(const FieldConfig &f) {
        if (!f.z_is_zero() && !f.x_is_zero()) {
            throw ConfigError("the solvable backend cannot represent fields in both sectors");
        }
    }

    Lattice lattice_;
    FieldConfig fields_;
    MCParams mc_;
    uint64_t seed_;
    uint64_t rounds_ = 0;
    std::optional<MeasurementSet> cached_;
};

/// Wraps a backend and adds Gaussian noise to every measurement.
class NoisyBackend : public Backend {
   public:
    NoisyBackend(std::unique_ptr<Backend> inner, double sigma, uint64_t seed)
        : inner_(std::move(inner)), sigma_(sigma), seed_(seed) {
        if (!inner_) throw std::invalid_argument("NoisyBackend needs an inner backend");
        if (!(sigma_ >= 0)) throw ConfigError("noise sigma must be non-negative");
    }

    MeasurementSet measure() override {
        return add_measurement_noise(inner_->measure(), sigma_, derive_seed(seed_, rounds_++));
    }
    MeasurementSet measure_noiseless() override { return inner_->measure_noiseless(); }
    void apply_correction(const FieldConfig &delta) override { inner_->apply_correction(delta); }
    const FieldConfig &true_fields() const override { return inner_->true_fields(); }
    const Lattice &lattice() const override { return inner_->lattice(); }
    BackendCapabilities capabilities() const override {
        BackendCapabilities c = inner_->capabilities();
        c.exact = false;
        return c;
    }
    std::string id() const override { return "noisy(" + inner_->id() + ",sigma=" + format_double(sigma_) + ")"; }
    Backend &inner() { return *inner_; }

   private:
    std::unique_ptr<Backend> inner_;
    double sigma_;
    uint64_t seed_;
    uint64_t rounds_ = 0;
};

struct CorrectionParams {
    size_t n_iter = 5;
    double damping = 1.0;
    InferenceParams inference{};
    ErPolynomial poly = ErPolynomial::reference();

    void validate() const {
        if (n_iter == 0) throw ConfigError("n_iter must be at least 1");
        if (!(damping > 0 && damping <= 1)) throw ConfigError("damping must lie in (0, 1]");
        if (!(inference.deadband >= 0)) throw ConfigError("deadband must be non-negative");
    }
};

struct IterationRecord {
    size_t iter = 0;
    FieldConfig estimate;         // inferred from this iteration's measurement
    FieldConfig residual_fields;  // true fields of the backend at measurement time
    FieldConfig cumulative;       // sum of corrections applied before this measurement
    double mean_star = 0;
    double mean_plaquette = 0;
    size_t requested_values = 0;
    SingleQubitError error;
    double delta_h = 0;           // raw, initial true fields vs cumulative estimate
    double delta_h_rescaled = 0;  // divided by the iteration-0 value
    double max_field = 0;         // max |residual true field|
    bool no_op = false;
};

struct CorrectionTrace {
    std::string backend_id;
    std::string model_id;
    size_t k = 0;
    std::vector<IterationRecord> iterations;
    bool converged_early = false;

    const IterationRecord &final() const { return iterations.back(); }

    std::string summary_csv() const {
        CsvTable t;
        t.header = {"iter", "bit_err", "phase_err", "delta_H", "max_field"};
        for (const auto &r : iterations) {
            t.rows.push_back({static_cast<double>(r.iter), r.error.bit, r.error.phase, r.delta_h, r.max_field});
        }
        return t.to_string();
    }

    std::string to_jsonl() const {
        std::string out;
        for (const auto &r : iterations) {
            nlohmann::json j = {{"iter", r.iter},
                                {"backend", backend_id},
                                {"model", model_id},
                                {"k", k},
                                {"estimate", {{"bz", r.estimate.bz}, {"bx", r.estimate.bx}}},
                                {"residual_fields", {{"bz", r.residual_fields.bz}, {"bx", r.residual_fields.bx}}},
                                {"cumulative", {{"bz", r.cumulative.bz}, {"bx", r.cumulative.bx}}},
                                {"mean_star", r.mean_star},
                                {"mean_plaquette", r.mean_plaquette},
                                {"requested_values", r.requested_values},
                                {"bit_err", r.error.bit},
                                {"phase_err", r.error.phase},
                                {"p_star", r.error.p_star},
                                {"p_plaquette", r.error.p_plaquette},
                                {"p_clamped", r.error.clamped},
                                {"delta_H", r.delta_h},
                                {"delta_H_rescaled", r.delta_h_rescaled},
                                {"max_field", r.max_field},
                                {"no_op", r.no_op}};
            out += j.dump() + "\n";
        }
        return out;
    }
};

/// Measure, infer, subtract, repeat. Iteration 0 is the uncorrected state;
/// iteration t > 0 is measured after t corrections. Stops after a no-op
/// record once every estimate lies inside the deadband.
inline CorrectionTrace correct_iteratively(Backend &backend, const RegressorModel &model,
                                           const CorrectionParams &params = {}) {
    params.validate();
    const Lattice &lat = backend.lattice();
    const FieldConfig initial = backend.true_fields();
    CorrectionTrace trace;
    trace.backend_id = backend.id();
    trace.model_id = "mlp(seed=" + std::to_string(model.metadata().seed) + ",k=" + std::to_string(model.metadata().k) + ")";
    trace.k = lat.k();
    FieldConfig cumulative = FieldConfig::zeros(lat.n_edges());
    double delta_h0 = 0;

    auto record = [&](size_t iter, const MeasurementSet &ms, const MeasurementSet &clean, bool no_op) {
        IterationRecord r;
        r.iter = iter;
        r.estimate = no_op ? FieldConfig::zeros(lat.n_edges()) : infer_fields(model, ms, lat, params.inference);
        r.residual_fields = backend.true_fields();
        r.cumulative = cumulative;
        for (const auto &e : clean.stars) r.mean_star += e.value / static_cast<double>(clean.stars.size());
        for (const auto &e : clean.plaquettes) r.mean_plaquette += e.value / static_cast<double>(clean.plaquettes.size());
        r.requested_values = ms.requested_values();
        r.error = single_qubit_error(clean, params.poly);
        r.delta_h = hamiltonian_error(initial, cumulative, lat);
        if (iter == 0) delta_h0 = r.delta_h;
        r.delta_h_rescaled = delta_h0 > 0 ? r.delta_h / delta_h0 : 0.0;
        r.max_field = r.residual_fields.max_abs();
        r.no_op = no_op;
        trace.iterations.push_back(std::move(r));
    };

    for (size_t iter = 0; iter <= params.n_iter; ++iter) {
        MeasurementSet ms, clean;
        try {
            ms = backend.measure();
            clean = backend.capabilities().exact ? ms : backend.measure_noiseless();
        } catch (const NumericalError &e) {
            throw NumericalError("iteration " + std::to_string(iter) + ": " + e.what());
        }
        record(iter, ms, clean, false);
        if (iter == params.n_iter) break;
        const FieldConfig &est = trace.iterations.back().estimate;
        if (est.max_abs() < params.inference.deadband) {
            record(iter + 1, ms, clean, true);
            trace.converged_early = true;
            break;
        }
        const FieldConfig step = est.scaled(params.damping);
        backend.apply_correction(step);
        cumulative += step;
    }
    return trace;
}

}  // namespace toric

#endif  // TORIC_HAMILTONIAN_LEARNER_HPP
