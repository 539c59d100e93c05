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

#ifndef TORIC_EXACT_SOLVER_HPP
#define TORIC_EXACT_SOLVER_HPP

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "toric/common.hpp"
#include "toric/fields.hpp"
#include "toric/lanczos.hpp"
#include "toric/lattice.hpp"

namespace toric {

/// Largest number of spins the dense state-vector routines accept (k = 3).
inline constexpr size_t kMaxExactSpins = 20;

using Mask = uint64_t;

inline Mask edge_mask(std::span<const size_t> edges) {
    Mask m = 0;
    for (size_t e : edges) m ^= Mask{1} << e;
    return m;
}

inline int parity(Mask m) { return std::popcount(m) & 1; }

/// Product of commuting single-spin factors prod_j (a_j + b_j sigma^x_{e_j}).
struct ProductTerm {
    std::vector<size_t> edges;
    std::vector<double> a;
    std::vector<double> b;
};

/// Real operator on 2^n basis states of sigma^z, written as
///     H = diag(x) + sum_m c_m X^{mask_m} + sum_t prod_j (a_tj + b_tj X_j)
/// where X^{mask} flips the spins in mask. Basis state x has bit i set when
/// sigma^z_i = -1.
struct SpinOperator {
    size_t n_spins = 0;
    std::vector<double> diagonal;
    std::vector<std::pair<Mask, double>> flips;
    std::vector<ProductTerm> products;

    size_t dim() const { return size_t{1} << n_spins; }

    void apply(std::span<const double> in, std::span<double> out) const {
        const size_t d = dim();
        for (size_t x = 0; x < d; ++x) out[x] = diagonal[x] * in[x];
        for (const auto &[mask, c] : flips) {
            for (size_t x = 0; x < d; ++x) out[x] += c * in[x ^ mask];
        }
        if (products.empty()) return;
        std::vector<double> tmp(d);
        for (const ProductTerm &t : products) {
            std::copy(in.begin(), in.end(), tmp.begin());
            for (size_t j = 0; j < t.edges.size(); ++j) {
                const size_t bit = size_t{1} << t.edges[j];
                const double a = t.a[j], b = t.b[j];
                for (size_t base = 0; base < d; base += 2 * bit) {
                    double *lo = &tmp[base];
                    double *hi = &tmp[base + bit];
                    for (size_t x = 0; x < bit; ++x) {
                        const double u = lo[x], v = hi[x];
                        lo[x] = a * u + b * v;
                        hi[x] = a * v + b * u;
                    }
                }
            }
            for (size_t x = 0; x < d; ++x) out[x] += tmp[x];
        }
    }

    /// Gershgorin-type bound on the spectral radius.
    double spectral_bound() const {
        double d = 0;
        for (double v : diagonal) d = std::max(d, std::abs(v));
        for (const auto &f : flips) d += std::abs(f.second);
        for (const auto &t : products) {
            double p = 1.0;
            for (size_t j = 0; j < t.edges.size(); ++j) p *= std::abs(t.a[j]) + std::abs(t.b[j]);
            d += p;
        }
        return d;
    }
};

namespace detail {

inline void check_exact_size(const Lattice &lattice) {
    if (lattice.n_edges() > kMaxExactSpins) {
        throw ConfigError("exact state-vector routines support at most " + std::to_string(kMaxExactSpins) +
                          " spins (k <= 3), got " + std::to_string(lattice.n_edges()));
    }
}

/// Collapses duplicate masks and drops zero coefficients.
inline std::vector<std::pair<Mask, double>> merge_flips(const std::map<Mask, double> &terms) {
    std::vector<std::pair<Mask, double>> out;
    for (const auto &[mask, c] : terms) {
        if (mask != 0 && c != 0.0) out.emplace_back(mask, c);
    }
    return out;
}

inline double sigma_z(size_t x, size_t edge) { return ((x >> edge) & 1) ? -1.0 : 1.0; }

}  // namespace detail

/// Hamiltonian with both disorder sectors,
///     H = sum_s (-A_s + exp(-sum_{i in s} b^z_i sigma^z_i))
///       + sum_p (-B_p + exp(-sum_{i in p} b^x_i sigma^x_i)),
/// whose ground energy is 0 whenever only one sector carries fields (and for
/// the pure toric code). The plaquette exponential is kept in product form
/// prod_{i in p} (cosh b_i - sinh b_i sigma^x_i).
inline SpinOperator build_hamiltonian(const Lattice &lattice, const FieldConfig &fields) {
    detail::check_exact_size(lattice);
    fields.validate(lattice.n_edges(), 1e300);
    SpinOperator op;
    op.n_spins = lattice.n_edges();
    op.diagonal.assign(op.dim(), 0.0);
    std::map<Mask, double> terms;

    for (size_t s = 0; s < lattice.n_vertices(); ++s) {
        const auto &star = lattice.star_edges(s);
        terms[edge_mask(star)] -= 1.0;
        std::array<double, 16> table{};
        for (unsigned pattern = 0; pattern < 16; ++pattern) {
            double arg = 0;
            for (unsigned j = 0; j < 4; ++j) arg -= fields.bz[star[j]] * (((pattern >> j) & 1) ? -1.0 : 1.0);
            table[pattern] = std::exp(arg);
        }
        for (size_t x = 0; x < op.dim(); ++x) {
            unsigned pattern = 0;
            for (unsigned j = 0; j < 4; ++j) pattern |= static_cast<unsigned>((x >> star[j]) & 1) << j;
            op.diagonal[x] += table[pattern];
        }
    }
    for (size_t p = 0; p < lattice.n_plaquettes(); ++p) {
        const auto &plaq = lattice.plaquette_edges(p);
        const Mask pm = edge_mask(plaq);
        for (size_t x = 0; x < op.dim(); ++x) op.diagonal[x] -= parity(x & pm) ? -1.0 : 1.0;
        bool field_free = true;
        for (size_t e : plaq) field_free = field_free && fields.bx[e] == 0.0;
        if (field_free) {
            for (double &v : op.diagonal) v += 1.0;
            continue;
        }
        ProductTerm t;
        for (size_t e : plaq) {
            t.edges.push_back(e);
            t.a.push_back(std::cosh(fields.bx[e]));
            t.b.push_back(-std::sinh(fields.bx[e]));
        }
        op.products.push_back(std::move(t));
    }
    op.flips = detail::merge_flips(terms);
    return op;
}

/// Toric code with single-spin fields, H_TC - sum_i h_i sigma^z_i, in the
/// stabilizer-sum normalization (pure toric code has energy -2k^2).
inline SpinOperator build_single_field_hamiltonian(const Lattice &lattice, std::span<const double> hz) {
    detail::check_exact_size(lattice);
    if (hz.size() != lattice.n_edges()) throw ConfigError("field vector length does not match lattice");
    SpinOperator op;
    op.n_spins = lattice.n_edges();
    op.diagonal.assign(op.dim(), 0.0);
    std::map<Mask, double> terms;
    for (size_t s = 0; s < lattice.n_vertices(); ++s) terms[edge_mask(lattice.star_edges(s))] -= 1.0;
    std::vector<Mask> plaq_masks;
    for (size_t p = 0; p < lattice.n_plaquettes(); ++p) plaq_masks.push_back(edge_mask(lattice.plaquette_edges(p)));
    for (size_t x = 0; x < op.dim(); ++x) {
        double d = 0;
        for (Mask pm : plaq_masks) d -= parity(x & pm) ? -1.0 : 1.0;
        for (size_t i = 0; i < hz.size(); ++i) d -= hz[i] * detail::sigma_z(x, i);
        op.diagonal[x] = d;
    }
    op.flips = detail::merge_flips(terms);
    return op;
}

/// Which logical sector the eigensolver is restricted to.
///
/// With b^x = 0 the Z-type loop operators commute with H and every sector
/// holds one ground state; the sector with all Z loops at +1 is the one
/// reached from the all-up reference state, matching the group-sum form of
/// the solvable ground state. With b^z = 0 the same holds for X loops and
/// the all-plus reference. Mixed fields break both symmetries.
enum class LogicalPin { Auto, None, ZLoops, XLoops };

struct LogicalLoops {
    Mask z_row = 0, z_col = 0;  // sigma^z strings commuting with every A_s
    Mask x_row = 0, x_col = 0;  // sigma^x strings commuting with every B_p
};

inline LogicalLoops logical_loops(const Lattice &lattice) {
    const size_t k = lattice.k();
    LogicalLoops out;
    for (size_t c = 0; c < k; ++c) {
        out.z_row ^= Mask{1} << c;               // h(0, c)
        out.x_row ^= Mask{1} << (k * k + c);     // v(0, c)
    }
    for (size_t r = 0; r < k; ++r) {
        out.z_col ^= Mask{1} << (k * k + r * k);  // v(r, 0)
        out.x_col ^= Mask{1} << (r * k);          // h(r, 0)
    }
    // On the dual lattice the star and plaquette edge sets trade places.
    if (lattice.is_dual()) {
        std::swap(out.z_row, out.x_row);
        std::swap(out.z_col, out.x_col);
    }
    return out;
}

inline LogicalPin resolve_pin(LogicalPin pin, const FieldConfig &fields) {
    if (pin != LogicalPin::Auto) return pin;
    if (fields.x_is_zero()) return LogicalPin::ZLoops;
    if (fields.z_is_zero()) return LogicalPin::XLoops;
    return LogicalPin::None;
}

/// Projects v onto the +1 eigenspace of the pinned loop operators.
inline void project_sector(const Lattice &lattice, LogicalPin pin, std::span<double> v) {
    if (pin == LogicalPin::None || pin == LogicalPin::Auto) return;
    const LogicalLoops loops = logical_loops(lattice);
    if (pin == LogicalPin::ZLoops) {
        for (size_t x = 0; x < v.size(); ++x) {
            if (parity(x & loops.z_row) || parity(x & loops.z_col)) v[x] = 0.0;
        }
        return;
    }
    for (Mask loop : {loops.x_row, loops.x_col}) {
        for (size_t x = 0; x < v.size(); ++x) {
            const size_t y = x ^ loop;
            if (x < y) {
                const double avg = 0.5 * (v[x] + v[y]);
                v[x] = avg;
                v[y] = avg;
            }
        }
    }
}

/// Normalized real ground-state vector in the sigma^z basis, edge i on bit i.
struct StateVector {
    size_t n_spins = 0;
    std::vector<double> amplitudes;
    double energy = 0;
    double residual = 0;
    size_t matvecs = 0;
    bool converged = false;
};

struct EigenOptions {
    double tol = 1e-10;
    LanczosOptions lanczos{};
    uint64_t seed = 0x70121C;
    LogicalPin pin = LogicalPin::Auto;
    /// Optional warm start; must have 2^n_edges entries when set.
    std::vector<double> initial;
    /// Report non-convergence as a NumericalError instead of returning the
    /// best vector with converged = false.
    bool throw_on_failure = true;
};

inline StateVector ground_state(const Lattice &lattice, const SpinOperator &op, LogicalPin pin,
                                const EigenOptions &opt) {
    if (opt.tol <= 0) throw ConfigError("eigensolver tolerance must be positive");
    const size_t dim = op.dim();
    Vector start;
    if (!opt.initial.empty()) {
        if (opt.initial.size() != dim) throw ConfigError("warm-start vector has the wrong dimension");
        start = opt.initial;
    } else {
        Rng rng = make_rng(opt.seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        start.resize(dim);
        for (double &a : start) a = unif(rng);
    }
    project_sector(lattice, pin, start);
    if (norm(start) == 0.0) {
        // Warm start orthogonal to the pinned sector; fall back to random.
        Rng rng = make_rng(opt.seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (double &a : start) a = unif(rng);
        project_sector(lattice, pin, start);
    }
    auto apply = [&](std::span<const double> in, std::span<double> out) {
        op.apply(in, out);
        project_sector(lattice, pin, out);
    };
    const double bound = op.spectral_bound();
    LanczosOptions lopt = opt.lanczos;
    // Residuals below a few hundred ulps of ||H|| are not reachable in double precision.
    lopt.tol = std::max(opt.tol, 200.0 * std::numeric_limits<double>::epsilon() * bound);
    LanczosResult res = lowest_eigenpair(apply, std::move(start), lopt, bound);
    if (!res.converged && opt.throw_on_failure) {
        throw NumericalError("eigensolver did not converge: best residual " + std::to_string(res.residual) +
                             " after " + std::to_string(res.matvecs) + " matvecs");
    }
    StateVector out;
    out.n_spins = op.n_spins;
    out.amplitudes = std::move(res.vector);
    out.energy = res.eigenvalue;
    out.residual = res.residual;
    out.matvecs = res.matvecs;
    out.converged = res.converged;
    return out;
}

inline StateVector ground_state(const Lattice &lattice, const FieldConfig &fields, const EigenOptions &opt = {}) {
    const SpinOperator op = build_hamiltonian(lattice, fields);
    return ground_state(lattice, op, resolve_pin(opt.pin, fields), opt);
}

/// |<a|b>|^2 for real normalized states.
inline double fidelity(const StateVector &a, const StateVector &b) {
    if (a.amplitudes.size() != b.amplitudes.size()) throw std::invalid_argument("state dimension mismatch");
    const double o = dot(a.amplitudes, b.amplitudes);
    return o * o;
}

enum class ObservableKind { Star, Plaquette, StarPair, PlaquettePair, SigmaZ, SigmaX };

struct Observable {
    ObservableKind kind;
    size_t a = 0;
    size_t b = 0;
};

/// Expectation value of an involutory Pauli-product observable.
inline double expectation(const StateVector &state, const Lattice &lattice, const Observable &obs) {
    if (state.n_spins != lattice.n_edges()) throw std::invalid_argument("state does not match lattice");
    const auto &v = state.amplitudes;
    const size_t n_sites = lattice.n_vertices();
    auto site = [&](size_t idx) {
        if (idx >= n_sites) throw std::out_of_range("observable site index out of range");
        return idx;
    };
    auto edge = [&](size_t idx) {
        if (idx >= lattice.n_edges()) throw std::out_of_range("observable edge index out of range");
        return idx;
    };
    Mask x_mask = 0, z_mask = 0;
    switch (obs.kind) {
        case ObservableKind::Star:
            x_mask = edge_mask(lattice.star_edges(site(obs.a)));
            break;
        case ObservableKind::StarPair:
            x_mask = edge_mask(lattice.star_edges(site(obs.a))) ^ edge_mask(lattice.star_edges(site(obs.b)));
            break;
        case ObservableKind::Plaquette:
            z_mask = edge_mask(lattice.plaquette_edges(site(obs.a)));
            break;
        case ObservableKind::PlaquettePair:
            z_mask = edge_mask(lattice.plaquette_edges(site(obs.a))) ^
                     edge_mask(lattice.plaquette_edges(site(obs.b)));
            break;
        case ObservableKind::SigmaZ:
            z_mask = Mask{1} << edge(obs.a);
            break;
        case ObservableKind::SigmaX:
            x_mask = Mask{1} << edge(obs.a);
            break;
        default:
            throw std::invalid_argument("unsupported observable");
    }
    double acc = 0;
    for (size_t x = 0; x < v.size(); ++x) {
        const double sign = parity(x & z_mask) ? -1.0 : 1.0;
        acc += sign * v[x] * v[x ^ x_mask];
    }
    return acc;
}

/// Full measurement table of a state vector (standard errors zero).
inline MeasurementSet measure_state(const StateVector &state, const Lattice &lattice) {
    const size_t n = lattice.n_vertices();
    const size_t m = lattice.n_edges();
    SectorMeasurements star, plaq;
    star.stabilizer.resize(n);
    plaq.stabilizer.resize(n);
    star.correlator.resize(m);
    plaq.correlator.resize(m);
    star.spin.resize(m);
    plaq.spin.resize(m);
    for (size_t s = 0; s < n; ++s) {
        star.stabilizer[s].value = expectation(state, lattice, {ObservableKind::Star, s});
        plaq.stabilizer[s].value = expectation(state, lattice, {ObservableKind::Plaquette, s});
    }
    for (size_t i = 0; i < m; ++i) {
        const EdgeEnds v = lattice.edge_vertices(i);
        const EdgeEnds p = lattice.edge_plaquettes(i);
        star.correlator[i].value = expectation(state, lattice, {ObservableKind::StarPair, v.first, v.second});
        plaq.correlator[i].value = expectation(state, lattice, {ObservableKind::PlaquettePair, p.first, p.second});
        star.spin[i].value = expectation(state, lattice, {ObservableKind::SigmaZ, i});
        plaq.spin[i].value = expectation(state, lattice, {ObservableKind::SigmaX, i});
    }
    return assemble_measurements(lattice, star, plaq, 0, true);
}

/// Ground state of the two-sector Hamiltonian followed by every observable.
inline MeasurementSet measurement_set_exact(const Lattice &lattice, const FieldConfig &fields,
                                            const EigenOptions &opt = {}) {
    return measure_state(ground_state(lattice, fields, opt), lattice);
}

/// Exact sector results from summing over the star group.
struct SectorEnumeration {
    double z = 0;
    size_t group_size = 0;
    SectorMeasurements measurements;
};

/// Enumerates the 2^(k^2 - 1) elements g of the star group (subsets of
/// stars modulo the product of all stars) with amplitudes
/// psi(g) = exp(1/2 sum_i b_i sigma_i(g)). Stabilizer expectations are the
/// overlaps sum_g psi(g) psi(A_s g) / Z, evaluated by looking up the partner
/// element directly rather than through the Gibbs estimator form.
inline SectorEnumeration enumerate_sector(const Lattice &lattice, std::span<const double> b) {
    const size_t n_sites = lattice.n_vertices();
    const size_t n_edges = lattice.n_edges();
    if (n_sites > 16) throw ConfigError("group enumeration supports k <= 4");
    if (b.size() != n_edges) throw ConfigError("field vector length does not match lattice");
    const size_t free_sites = n_sites - 1;
    const size_t count = size_t{1} << free_sites;
    const uint64_t all_sites = (uint64_t{1} << n_sites) - 1;

    std::vector<Mask> star_mask(n_sites);
    for (size_t s = 0; s < n_sites; ++s) star_mask[s] = edge_mask(lattice.star_edges(s));

    std::vector<double> amp(count);
    std::vector<Mask> pattern(count);
    double z = 0;
    for (uint64_t u = 0; u < count; ++u) {
        Mask flips = 0;
        for (size_t s = 0; s < free_sites; ++s) {
            if ((u >> s) & 1) flips ^= star_mask[s];
        }
        pattern[u] = flips;
        double arg = 0;
        for (size_t i = 0; i < n_edges; ++i) arg += b[i] * (((flips >> i) & 1) ? -1.0 : 1.0);
        amp[u] = std::exp(0.5 * arg);
        z += amp[u] * amp[u];
    }
    auto canonical = [&](uint64_t subset) {
        return ((subset >> free_sites) & 1) ? (subset ^ all_sites) : subset;
    };

    SectorEnumeration out;
    out.z = z;
    out.group_size = count;
    auto &ms = out.measurements;
    ms.stabilizer.resize(n_sites);
    ms.correlator.resize(n_edges);
    ms.spin.resize(n_edges);
    for (size_t s = 0; s < n_sites; ++s) {
        double acc = 0;
        for (uint64_t u = 0; u < count; ++u) acc += amp[u] * amp[canonical(u ^ (uint64_t{1} << s))];
        ms.stabilizer[s] = Estimate{acc / z, 0.0};
    }
    for (size_t i = 0; i < n_edges; ++i) {
        const EdgeEnds e = lattice.edge_vertices(i);
        const uint64_t pair = (uint64_t{1} << e.first) ^ (uint64_t{1} << e.second);
        double corr = 0, spin = 0;
        for (uint64_t u = 0; u < count; ++u) {
            corr += amp[u] * amp[canonical(u ^ pair)];
            spin += amp[u] * amp[u] * (((pattern[u] >> i) & 1) ? -1.0 : 1.0);
        }
        ms.correlator[i] = Estimate{corr / z, 0.0};
        ms.spin[i] = Estimate{spin / z, 0.0};
    }
    return out;
}

struct SolvableEnumeration {
    double z = 0;
    size_t group_size = 0;
    MeasurementSet measurements;
};

/// Exact measurement table of the solvable model with fields in at most one
/// sector; the b^x sector is enumerated on the dual lattice.
inline SolvableEnumeration enumerate_solvable(const Lattice &lattice, const FieldConfig &fields) {
    fields.validate(lattice.n_edges(), 1e300);
    if (!fields.z_is_zero() && !fields.x_is_zero()) {
        throw ConfigError("enumeration requires fields in one sector only");
    }
    const size_t n = lattice.n_vertices();
    const size_t m = lattice.n_edges();
    SectorMeasurements star = SectorMeasurements::trivial(n, m);
    SectorMeasurements plaq = SectorMeasurements::trivial(n, m);
    SectorEnumeration en;
    if (!fields.x_is_zero()) {
        en = enumerate_sector(lattice.dual(), fields.bx);
        plaq = en.measurements;
    } else {
        en = enumerate_sector(lattice, fields.bz);
        star = en.measurements;
    }
    SolvableEnumeration out;
    out.z = en.z;
    out.group_size = en.group_size;
    out.measurements = assemble_measurements(lattice, star, plaq, 0, true);
    return out;
}

inline SolvableEnumeration enumerate_solvable(const Lattice &lattice, std::span<const double> bz) {
    FieldConfig f = FieldConfig::zeros(lattice.n_edges());
    if (bz.size() != f.bz.size()) throw ConfigError("field vector length does not match lattice");
    f.bz.assign(bz.begin(), bz.end());
    return enumerate_solvable(lattice, f);
}

}  // namespace toric

#endif  // TORIC_EXACT_SOLVER_HPP
