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

#ifndef TORIC_ERROR_METRICS_HPP
#define TORIC_ERROR_METRICS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "toric/common.hpp"
#include "toric/exact_solver.hpp"
#include "toric/fields.hpp"
#include "toric/lattice.hpp"

namespace toric {

enum class Sector { Star, Plaquette };

/// Mean stabilizer flip probability p = (1 - mean <S>) / 2 over one sector.
inline double stabilizer_flip_rate(const MeasurementSet &ms, Sector sector) {
    const auto &values = sector == Sector::Star ? ms.stars : ms.plaquettes;
    if (values.empty()) throw std::invalid_argument("measurement set has no stabilizer values");
    double mean = 0;
    for (const Estimate &e : values) mean += e.value;
    mean /= static_cast<double>(values.size());
    return std::clamp((1.0 - mean) / 2.0, 0.0, 1.0);
}

/// e_r(p) = c1 p + c2 p^2 + c3 p^3 + c4 p^4 with fit diagnostics.
struct ErPolynomial {
    std::array<double, 4> c{};
    double mse = 0;
    double p_min = 0;
    double p_max = 0.4;
    size_t k = 0;
    double condition_number = 0;

    /// Published fit at k = 32.
    static ErPolynomial reference() {
        ErPolynomial poly;
        poly.c = {0.2187, 0.72419, -2.5398, 4.90118};
        poly.mse = 1e-7;
        poly.k = 32;
        return poly;
    }

    /// Evaluation with p clamped to [p_min, p_max].
    double operator()(double p) const { return raw(std::clamp(p, p_min, p_max)); }

    double raw(double p) const { return p * (c[0] + p * (c[1] + p * (c[2] + p * c[3]))); }

    double derivative(double p) const { return c[0] + p * (2 * c[1] + p * (3 * c[2] + p * 4 * c[3])); }

    bool in_range(double p) const { return p >= p_min && p <= p_max; }

    /// True when e_r' > 0 on a fine grid over [lo, hi].
    bool increasing_on(double lo, double hi, size_t n = 400) const {
        for (size_t i = 0; i <= n; ++i) {
            if (derivative(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n)) <= 0) return false;
        }
        return true;
    }
};

/// Odd-parity probability of a vertex whose four edges flip independently
/// with probability e: the exact curve that sample_p_curve estimates.
inline double parity_flip_probability(double e) { return 0.5 * (1.0 - std::pow(1.0 - 2.0 * e, 4)); }

struct PCurvePoint {
    double e_r = 0;
    double p = 0;
    double std_error = 0;
};

struct PCurve {
    size_t k = 0;
    size_t n_trials = 0;
    std::vector<PCurvePoint> points;
};

/// For each e_r on the grid: flip every edge of a k x k lattice with
/// probability e_r and record the fraction of vertices touched by an odd
/// number of flips, averaged over n_trials.
inline PCurve sample_p_curve(size_t k, std::span<const double> er_grid, size_t n_trials, uint64_t seed) {
    if (n_trials < 2) throw ConfigError("sample_p_curve needs at least two trials");
    for (double e : er_grid) {
        if (!(e >= 0.0 && e <= 0.2)) throw ConfigError("e_r grid values must lie in [0, 0.2]");
    }
    const Lattice lat = Lattice::build(k);
    PCurve curve;
    curve.k = k;
    curve.n_trials = n_trials;
    std::vector<uint8_t> flipped(lat.n_edges());
    for (size_t g = 0; g < er_grid.size(); ++g) {
        Rng rng = make_rng(derive_seed(seed, g));
        std::bernoulli_distribution flip(er_grid[g]);
        double sum = 0, sum2 = 0;
        for (size_t t = 0; t < n_trials; ++t) {
            for (auto &f : flipped) f = flip(rng) ? 1 : 0;
            size_t odd = 0;
            for (size_t s = 0; s < lat.n_vertices(); ++s) {
                unsigned par = 0;
                for (size_t e : lat.star_edges(s)) par ^= flipped[e];
                odd += par;
            }
            const double frac = static_cast<double>(odd) / static_cast<double>(lat.n_vertices());
            sum += frac;
            sum2 += frac * frac;
        }
        const double n = static_cast<double>(n_trials);
        const double mean = sum / n;
        const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1));
        curve.points.push_back(PCurvePoint{er_grid[g], mean, std::sqrt(var / n)});
    }
    return curve;
}

/// Least-squares fit of e_r as a zero-intercept quartic in p.
inline ErPolynomial fit_er_polynomial(const PCurve &curve, double max_condition = 1e10) {
    const auto &pts = curve.points;
    if (pts.size() < 10) throw ConfigError("fit_er_polynomial needs at least 10 curve points");
    const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd A(n, 4);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double p = pts[static_cast<size_t>(i)].p;
        double pw = p;
        for (Eigen::Index j = 0; j < 4; ++j, pw *= p) A(i, j) = pw;
        y(i) = pts[static_cast<size_t>(i)].e_r;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    if (!(cond <= max_condition)) {
        throw NumericalError("e_r polynomial fit is ill-conditioned (condition number " + std::to_string(cond) +
                             "); widen the e_r grid");
    }
    const Eigen::VectorXd coef = svd.solve(y);
    ErPolynomial poly;
    for (int j = 0; j < 4; ++j) poly.c[static_cast<size_t>(j)] = coef(j);
    poly.mse = (A * coef - y).squaredNorm() / static_cast<double>(n);
    poly.p_min = 0.0;
    poly.p_max = 0.4;
    poly.k = curve.k;
    poly.condition_number = cond;
    return poly;
}

struct SingleQubitError {
    double bit = 0;
    double phase = 0;
    double p_star = 0;
    double p_plaquette = 0;
    bool clamped = false;  // a flip rate fell outside the polynomial's range
};

/// Phase-flip probability from the star sector, bit-flip probability from
/// the plaquette sector, both via the e_r(p) polynomial.
inline SingleQubitError single_qubit_error(const MeasurementSet &ms, const ErPolynomial &poly) {
    SingleQubitError out;
    out.p_star = stabilizer_flip_rate(ms, Sector::Star);
    out.p_plaquette = stabilizer_flip_rate(ms, Sector::Plaquette);
    out.clamped = !poly.in_range(out.p_star) || !poly.in_range(out.p_plaquette);
    out.phase = std::clamp(poly(out.p_star), 0.0, 1.0);
    out.bit = std::clamp(poly(out.p_plaquette), 0.0, 1.0);
    return out;
}

/// Version of the coefficient ordering below; bump on any change.
inline constexpr int kCoefficientBasisVersion = 1;

/// Entries per vertex (and per plaquette): stabilizer, identity, then the
/// nonempty subsets T of the four edges ordered by size and then
/// lexicographically in the lattice's star/plaquette edge order.
inline constexpr size_t kCoefficientsPerSite = 17;

/// Subset bit masks over the four local edges in basis order (identity first).
inline const std::array<unsigned, 16> &coefficient_subsets() {
    static const std::array<unsigned, 16> order = [] {
        std::array<unsigned, 16> o{};
        size_t idx = 0;
        for (int size = 0; size <= 4; ++size) {
            // Lexicographic order of index tuples equals this scan for 4 bits.
            std::vector<unsigned> group;
            for (unsigned m = 0; m < 16; ++m) {
                if (std::popcount(m) == size) group.push_back(m);
            }
            std::sort(group.begin(), group.end(), [](unsigned a, unsigned b) {
                for (unsigned j = 0; j < 4; ++j) {
                    const bool ha = (a >> j) & 1, hb = (b >> j) & 1;
                    if (ha != hb) return ha;
                }
                return false;
            });
            for (unsigned m : group) o[idx++] = m;
        }
        return o;
    }();
    return order;
}

/// Expansion coefficients of H in the Pauli-product basis: star block
/// (k^2 x 17) followed by the plaquette block (k^2 x 17).
struct CoefficientVector {
    size_t k = 0;
    int version = kCoefficientBasisVersion;
    std::vector<double> values;

    double norm() const {
        double s = 0;
        for (double v : values) s += v * v;
        return std::sqrt(s);
    }
};

inline CoefficientVector coefficient_vector(const Lattice &lattice, const FieldConfig &fields) {
    fields.validate(lattice.n_edges(), std::numeric_limits<double>::max());
    CoefficientVector cv;
    cv.k = lattice.k();
    cv.values.reserve(2 * lattice.n_vertices() * kCoefficientsPerSite);
    const auto &subsets = coefficient_subsets();
    auto emit = [&](const Lattice::Quad &edges, const std::vector<double> &b) {
        cv.values.push_back(-1.0);
        for (unsigned t : subsets) {
            double c = 1.0;
            for (unsigned j = 0; j < 4; ++j) c *= ((t >> j) & 1) ? -std::sinh(b[edges[j]]) : std::cosh(b[edges[j]]);
            cv.values.push_back(c);
        }
    };
    for (size_t s = 0; s < lattice.n_vertices(); ++s) emit(lattice.star_edges(s), fields.bz);
    for (size_t p = 0; p < lattice.n_plaquettes(); ++p) emit(lattice.plaquette_edges(p), fields.bx);
    return cv;
}

/// Rebuilds sum_m c_m S_m as an operator on the 2^(2k^2) spin space.
inline SpinOperator expand_coefficients(const Lattice &lattice, const CoefficientVector &cv) {
    detail::check_exact_size(lattice);
    const size_t n = lattice.n_vertices();
    if (cv.version != kCoefficientBasisVersion) throw ConfigError("unsupported coefficient basis version");
    if (cv.values.size() != 2 * n * kCoefficientsPerSite) throw ConfigError("coefficient vector length mismatch");
    SpinOperator op;
    op.n_spins = lattice.n_edges();
    op.diagonal.assign(op.dim(), 0.0);
    std::map<Mask, double> terms;
    const auto &subsets = coefficient_subsets();
    for (size_t block = 0; block < 2; ++block) {
        const bool star = block == 0;
        for (size_t site = 0; site < n; ++site) {
            const auto &edges = star ? lattice.star_edges(site) : lattice.plaquette_edges(site);
            const double *c = &cv.values[(block * n + site) * kCoefficientsPerSite];
            const Mask stab = edge_mask(edges);
            if (star) {
                terms[stab] += c[0];
            } else {
                for (size_t x = 0; x < op.dim(); ++x) op.diagonal[x] += c[0] * (parity(x & stab) ? -1.0 : 1.0);
            }
            for (size_t q = 0; q < 16; ++q) {
                Mask m = 0;
                for (unsigned j = 0; j < 4; ++j) {
                    if ((subsets[q] >> j) & 1) m ^= Mask{1} << edges[j];
                }
                if (star) {
                    // sigma^z products are diagonal.
                    for (size_t x = 0; x < op.dim(); ++x) op.diagonal[x] += c[1 + q] * (parity(x & m) ? -1.0 : 1.0);
                } else if (m == 0) {
                    for (double &v : op.diagonal) v += c[1 + q];
                } else {
                    terms[m] += c[1 + q];
                }
            }
        }
    }
    op.flips = detail::merge_flips(terms);
    return op;
}

/// ||c_a / |c_a| - c_b / |c_b|||_2.
inline double coefficient_distance(const CoefficientVector &a, const CoefficientVector &b) {
    if (a.values.size() != b.values.size() || a.version != b.version) {
        throw std::invalid_argument("coefficient vectors are not comparable");
    }
    const double na = a.norm(), nb = b.norm();
    double s = 0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] / na - b.values[i] / nb;
        s += d * d;
    }
    return std::sqrt(s);
}

/// Raw Hamiltonian error between two field configurations on one lattice.
inline double hamiltonian_error(const FieldConfig &true_fields, const FieldConfig &recovered, const Lattice &lattice) {
    return coefficient_distance(coefficient_vector(lattice, true_fields), coefficient_vector(lattice, recovered));
}

}  // namespace toric

#endif  // TORIC_ERROR_METRICS_HPP
