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

#ifndef TORIC_PHASE_ANALYSIS_HPP
#define TORIC_PHASE_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "toric/common.hpp"
#include "toric/gibbs_sampler.hpp"
#include "toric/io.hpp"
#include "toric/lattice.hpp"

namespace toric {

enum class DisorderKind { Uniform, BondDilution, SignFlip };

inline std::string disorder_name(DisorderKind k) {
    switch (k) {
        case DisorderKind::Uniform:
            return "uniform";
        case DisorderKind::BondDilution:
            return "bond_dilution";
        case DisorderKind::SignFlip:
            return "sign_flip";
    }
    return "unknown";
}

inline DisorderKind parse_disorder(const std::string &name) {
    if (name == "uniform") return DisorderKind::Uniform;
    if (name == "bond_dilution" || name == "dilution") return DisorderKind::BondDilution;
    if (name == "sign_flip") return DisorderKind::SignFlip;
    throw ConfigError("unknown disorder kind '" + name + "'");
}

/// Quenched coupling distribution. `parameter` is q for bond dilution
/// (P(lambda = 0) = q) and p for sign flips (P(lambda = -1) = p); it is
/// ignored for the uniform model. `sign` = -1 negates every coupling.
struct DisorderModel {
    DisorderKind kind = DisorderKind::Uniform;
    double parameter = 0;
    uint64_t seed = 1;
    double sign = 1;

    static DisorderModel uniform() { return {}; }
    static DisorderModel dilution(double q, uint64_t seed = 1) { return {DisorderKind::BondDilution, q, seed, 1}; }
    static DisorderModel sign_flip(double p, uint64_t seed = 1) { return {DisorderKind::SignFlip, p, seed, 1}; }

    void validate() const {
        if (!(parameter >= 0 && parameter <= 1)) throw ConfigError("disorder parameter must lie in [0, 1]");
        if (sign != 1 && sign != -1) throw ConfigError("disorder sign must be +1 or -1");
    }

    std::string label() const {
        std::string s = disorder_name(kind);
        if (kind != DisorderKind::Uniform) s += "(" + format_double(parameter) + ")";
        if (sign < 0) s = "-" + s;
        return s;
    }
};

/// One quenched realization of per-edge couplings lambda_i in {-1, 0, +1}.
inline std::vector<double> generate_lambda(const Lattice &lattice, const DisorderModel &model,
                                           uint64_t realization = 0) {
    model.validate();
    std::vector<double> lambda(lattice.n_edges(), model.sign);
    if (model.kind == DisorderKind::Uniform) return lambda;
    Rng rng = make_rng(derive_seed(model.seed, realization));
    std::bernoulli_distribution coin(model.parameter);
    for (double &l : lambda) {
        if (!coin(rng)) continue;
        l = model.kind == DisorderKind::BondDilution ? 0.0 : -l;
    }
    return lambda;
}

/// The five labelled anchor families: all +1, dilution at q_c = 0.5, all 0,
/// sign flips at p_c = 0.12, all -1.
inline std::vector<DisorderModel> anchor_models(uint64_t seed = 1) {
    DisorderModel zero = DisorderModel::dilution(1.0, seed);
    DisorderModel negative = DisorderModel::uniform();
    negative.sign = -1;
    return {DisorderModel::uniform(), DisorderModel::dilution(0.5, seed), zero, DisorderModel::sign_flip(0.12, seed),
            negative};
}

struct ScanParams {
    MCParams mc{.burn_in = 2000, .n_samples = 20000, .thinning = 1, .n_batches = 20};
    size_t n_realizations = 10;
    size_t threads = 1;

    void validate() const {
        mc.validate();
        if (n_realizations < 2) throw ConfigError("a scan needs at least two disorder realizations");
    }
};

/// Disorder-averaged curve value at one beta. Standard errors are the
/// spread across realizations divided by sqrt(n), so they include both
/// thermal and disorder fluctuations.
struct ScanPoint {
    double beta = 0;
    double cv = 0;
    double cv_std_error = 0;
    double chi_f = 0;
    double chi_f_std_error = 0;
    double cv_spread = 0;
};

struct RealizationPoint {
    double beta = 0;
    size_t realization = 0;
    SusceptibilityEstimate estimate;
};

struct ScanCurve {
    DisorderModel model;
    size_t k = 0;
    std::vector<ScanPoint> points;
    std::vector<RealizationPoint> realizations;

    /// Per-realization rows followed by the averaged rows, which carry
    /// realization = -1.
    CsvTable to_csv() const {
        CsvTable t{{"beta", "cv", "cv_stderr", "chi_f", "realization"}, {}};
        for (const auto &r : realizations) {
            t.rows.push_back({r.beta, r.estimate.heat_capacity, r.estimate.heat_capacity_std_error, r.estimate.chi_f,
                              static_cast<double>(r.realization)});
        }
        for (const auto &p : points) t.rows.push_back({p.beta, p.cv, p.cv_std_error, p.chi_f, -1.0});
        return t;
    }
};

inline ScanCurve scan_transition(const Lattice &lattice, const DisorderModel &model,
                                 const std::vector<double> &beta_grid, const ScanParams &params, uint64_t seed) {
    params.validate();
    model.validate();
    if (beta_grid.size() < 3) throw ConfigError("beta grid needs at least three points");
    for (size_t i = 0; i < beta_grid.size(); ++i) {
        if (!(beta_grid[i] >= 0) || (i > 0 && !(beta_grid[i] > beta_grid[i - 1]))) {
            throw ConfigError("beta grid must be non-negative and strictly increasing");
        }
    }
    const size_t nb = beta_grid.size(), nr = params.n_realizations;
    std::vector<std::vector<double>> lambdas(nr);
    for (size_t r = 0; r < nr; ++r) lambdas[r] = generate_lambda(lattice, model, r);

    ScanCurve curve;
    curve.model = model;
    curve.k = lattice.k();
    curve.realizations.resize(nb * nr);
    MCParams mc = params.mc;
    mc.threads = 1;
    parallel_for(nb * nr, params.threads, [&](size_t idx) {
        const size_t i = idx / nr, r = idx % nr;
        auto &out = curve.realizations[idx];
        out.beta = beta_grid[i];
        out.realization = r;
        out.estimate = fidelity_susceptibility(lattice, lambdas[r], beta_grid[i], mc, derive_seed(seed, i, r));
    });

    curve.points.resize(nb);
    for (size_t i = 0; i < nb; ++i) {
        std::vector<double> cv(nr), chi(nr);
        for (size_t r = 0; r < nr; ++r) {
            cv[r] = curve.realizations[i * nr + r].estimate.heat_capacity;
            chi[r] = curve.realizations[i * nr + r].estimate.chi_f;
        }
        const BatchStats c = batch_stats(cv), x = batch_stats(chi);
        auto &p = curve.points[i];
        p.beta = beta_grid[i];
        p.cv = c.mean;
        p.cv_std_error = c.std_error;
        p.chi_f = x.mean;
        p.chi_f_std_error = x.std_error;
        p.cv_spread = c.std_error * std::sqrt(static_cast<double>(nr));
    }
    return curve;
}

/// Location of the heat-capacity maximum. `detected` requires the maximum
/// to exceed both end points of the curve by 3 combined standard errors.
struct PeakEstimate {
    bool detected = false;
    double beta = 0;
    double cv = 0;
    double cv_std_error = 0;
    double prominence_sigma = 0;
    size_t index = 0;
};

inline PeakEstimate find_peak(const ScanCurve &curve, double threshold_sigma = 3.0) {
    const auto &pts = curve.points;
    if (pts.size() < 3) throw ConfigError("peak search needs at least three points");
    size_t m = 0;
    for (size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].cv > pts[m].cv) m = i;
    }
    PeakEstimate out;
    out.index = m;
    out.beta = pts[m].beta;
    out.cv = pts[m].cv;
    out.cv_std_error = pts[m].cv_std_error;
    if (m > 0 && m + 1 < pts.size()) {
        // Vertex of the parabola through the maximum and its two neighbours.
        const double x0 = pts[m - 1].beta, x1 = pts[m].beta, x2 = pts[m + 1].beta;
        const double y0 = pts[m - 1].cv, y1 = pts[m].cv, y2 = pts[m + 1].cv;
        const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
        const double a = (d12 - d01) / (x2 - x0);
        if (a < 0) {
            const double b = d01 - a * (x0 + x1);
            const double xv = std::clamp(-b / (2 * a), x0, x2);
            out.beta = xv;
            out.cv = y0 + d01 * (xv - x0) + a * (xv - x0) * (xv - x1);
        }
    }
    auto sigma_above = [&](const ScanPoint &edge) {
        const double se = std::hypot(pts[m].cv_std_error, edge.cv_std_error);
        const double diff = pts[m].cv - edge.cv;
        if (se == 0) return diff > 0 ? INFINITY : 0.0;
        return diff / se;
    };
    out.prominence_sigma = std::min(sigma_above(pts.front()), sigma_above(pts.back()));
    out.detected = m > 0 && m + 1 < pts.size() && out.prominence_sigma > threshold_sigma;
    return out;
}

/// A transition needs an interior heat-capacity peak at size k whose height
/// per site also grows from size k / 2 to size k by 3 combined standard
/// errors. Disordered paramagnets and the +-J glass show a Schottky-like
/// bump that passes the peak test alone but does not grow with size.
struct TransitionReport {
    ScanCurve curve;
    ScanCurve reference;
    PeakEstimate peak;
    PeakEstimate reference_peak;
    double growth_sigma = 0;
    bool detected = false;
};

inline TransitionReport detect_transition(size_t k, const DisorderModel &model, const std::vector<double> &beta_grid,
                                          const ScanParams &params, uint64_t seed, double threshold_sigma = 3.0) {
    if (k < 4) throw ConfigError("transition detection needs k >= 4 for the k / 2 reference scan");
    TransitionReport out;
    out.curve = scan_transition(Lattice::build(k), model, beta_grid, params, seed);
    out.reference = scan_transition(Lattice::build(k / 2), model, beta_grid, params, derive_seed(seed, 1));
    out.peak = find_peak(out.curve, threshold_sigma);
    out.reference_peak = find_peak(out.reference, threshold_sigma);
    const double n1 = static_cast<double>(k * k), n0 = static_cast<double>((k / 2) * (k / 2));
    const auto &top = out.curve.points[out.peak.index];
    const auto &ref = out.reference.points[out.reference_peak.index];
    const double se = std::hypot(top.cv_std_error / n1, ref.cv_std_error / n0);
    const double diff = top.cv / n1 - ref.cv / n0;
    out.growth_sigma = se > 0 ? diff / se : (diff > 0 ? INFINITY : 0.0);
    out.detected = out.peak.detected && out.growth_sigma > threshold_sigma;
    return out;
}

/// Pointwise z-scores of the heat-capacity difference between two curves on
/// the same grid.
inline std::vector<double> curve_z_scores(const ScanCurve &a, const ScanCurve &b) {
    if (a.points.size() != b.points.size()) throw ConfigError("curves have different grids");
    std::vector<double> z(a.points.size());
    for (size_t i = 0; i < z.size(); ++i) {
        if (a.points[i].beta != b.points[i].beta) throw ConfigError("curves have different grids");
        const double se = std::hypot(a.points[i].cv_std_error, b.points[i].cv_std_error);
        const double d = a.points[i].cv - b.points[i].cv;
        z[i] = se > 0 ? d / se : (d == 0 ? 0.0 : INFINITY);
    }
    return z;
}

inline std::vector<double> linear_grid(double lo, double hi, size_t n) {
    if (n < 2 || !(hi > lo)) throw ConfigError("grid needs n >= 2 and hi > lo");
    std::vector<double> g(n);
    for (size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

}  // namespace toric

#endif  // TORIC_PHASE_ANALYSIS_HPP
