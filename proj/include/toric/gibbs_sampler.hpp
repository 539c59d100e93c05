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

#ifndef TORIC_GIBBS_SAMPLER_HPP
#define TORIC_GIBBS_SAMPLER_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "toric/common.hpp"
#include "toric/fields.hpp"
#include "toric/lattice.hpp"

namespace toric {

/// Monte-Carlo schedule. Sweeps are counted per chain; n_samples is the
/// total across chains.
struct MCParams {
    size_t burn_in = 200;
    size_t n_samples = 2000;
    size_t thinning = 2;
    size_t n_batches = 20;
    size_t n_chains = 1;
    size_t threads = 1;

    void validate() const {
        if (n_samples < 100) throw ConfigError("n_samples must be at least 100");
        if (thinning == 0) throw ConfigError("thinning must be positive");
        if (n_chains == 0) throw ConfigError("n_chains must be positive");
        if (n_batches < 2) throw ConfigError("n_batches must be at least 2");
        if (n_samples / n_chains < n_batches) throw ConfigError("fewer samples per chain than batches");
    }
};

/// Pseudo-spin neighbourhood of each site: the four edges of its star and
/// the site across each edge.
class IsingGraph {
   public:
    struct Bond {
        size_t edge;
        size_t neighbor;
    };

    explicit IsingGraph(const Lattice &lattice) : n_sites_(lattice.n_vertices()), n_edges_(lattice.n_edges()) {
        bonds_.resize(n_sites_);
        for (size_t s = 0; s < n_sites_; ++s) {
            const auto &star = lattice.star_edges(s);
            for (size_t j = 0; j < 4; ++j) {
                const EdgeEnds ends = lattice.edge_vertices(star[j]);
                bonds_[s][j] = Bond{star[j], ends.first == s ? ends.second : ends.first};
            }
        }
        ends_.resize(n_edges_);
        shared_.resize(n_edges_);
        for (size_t i = 0; i < n_edges_; ++i) {
            ends_[i] = lattice.edge_vertices(i);
            const auto &a = lattice.star_edges(ends_[i].first);
            const auto &b = lattice.star_edges(ends_[i].second);
            for (size_t e : a) {
                for (size_t f : b) {
                    if (e == f) shared_[i].push_back(e);
                }
            }
        }
    }

    size_t n_sites() const { return n_sites_; }
    size_t n_edges() const { return n_edges_; }
    const std::array<Bond, 4> &bonds(size_t s) const { return bonds_[s]; }
    EdgeEnds ends(size_t i) const { return ends_[i]; }
    /// Edges common to both stars at edge i (one edge for k >= 3, two for k = 2).
    const std::vector<size_t> &shared(size_t i) const { return shared_[i]; }

   private:
    size_t n_sites_;
    size_t n_edges_;
    std::vector<std::array<Bond, 4>> bonds_;
    std::vector<EdgeEnds> ends_;
    std::vector<std::vector<size_t>> shared_;
};

/// Classical pseudo-spins theta_s = +-1 on the sites, with the cached
/// Gibbs exponent M = sum_i b_i theta_s theta_s'.
class PseudoSpinState {
   public:
    PseudoSpinState() = default;

    PseudoSpinState(const IsingGraph &graph, std::span<const double> b, std::vector<int8_t> theta)
        : theta_(std::move(theta)) {
        if (theta_.size() != graph.n_sites()) throw std::invalid_argument("pseudo-spin count mismatch");
        energy_ = recompute_energy(graph, b);
    }

    static PseudoSpinState all_up(const IsingGraph &graph, std::span<const double> b) {
        return PseudoSpinState(graph, b, std::vector<int8_t>(graph.n_sites(), 1));
    }

    static PseudoSpinState random(const IsingGraph &graph, std::span<const double> b, Rng &rng) {
        std::vector<int8_t> theta(graph.n_sites());
        for (auto &t : theta) t = (rng() >> 63) ? int8_t{1} : int8_t{-1};
        return PseudoSpinState(graph, b, std::move(theta));
    }

    int theta(size_t s) const { return theta_[s]; }
    const std::vector<int8_t> &spins() const { return theta_; }
    double energy() const { return energy_; }

    /// sigma^z_i(g) of the group element this configuration encodes.
    int edge_sign(const IsingGraph &graph, size_t i) const {
        const EdgeEnds e = graph.ends(i);
        return theta_[e.first] * theta_[e.second];
    }

    double recompute_energy(const IsingGraph &graph, std::span<const double> b) const {
        double m = 0;
        for (size_t i = 0; i < graph.n_edges(); ++i) m += b[i] * edge_sign(graph, i);
        return m;
    }

    /// Sum over the star of s of b_i sigma_i. Flipping s changes M by -2x this.
    double local_field(const IsingGraph &graph, std::span<const double> b, size_t s) const {
        double h = 0;
        for (const auto &bond : graph.bonds(s)) h += b[bond.edge] * theta_[bond.neighbor];
        return theta_[s] * h;
    }

    void flip(size_t s, double delta) {
        theta_[s] = static_cast<int8_t>(-theta_[s]);
        energy_ += delta;
    }

    void global_flip() {
        for (auto &t : theta_) t = static_cast<int8_t>(-t);
    }

   private:
    std::vector<int8_t> theta_;
    double energy_ = 0;
};

/// One Metropolis sweep: n_sites single-flip proposals at uniformly random
/// sites, each accepted with probability min(1, exp(dM)) for weight exp(M).
/// A fixed visiting order is not ergodic on the k = 2 torus, where every
/// neighbouring pair is joined by two edges.
inline void metropolis_sweep(PseudoSpinState &state, std::span<const double> b, const IsingGraph &graph, Rng &rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<size_t> pick(0, graph.n_sites() - 1);
    for (size_t step = 0; step < graph.n_sites(); ++step) {
        const size_t s = pick(rng);
        const double delta = -2.0 * state.local_field(graph, b, s);
        if (delta >= 0.0 || unif(rng) < std::exp(delta)) state.flip(s, delta);
    }
}

inline void metropolis_sweep(PseudoSpinState &state, std::span<const double> b, const Lattice &lattice, Rng &rng) {
    metropolis_sweep(state, b, IsingGraph(lattice), rng);
}

namespace detail {

struct ChainSchedule {
    size_t samples;
    size_t batches;
};

/// Runs one chain, calling observe(state, batch) for every retained sample.
template <typename Observe>
void run_chain(const IsingGraph &graph, std::span<const double> b, const MCParams &mc, const ChainSchedule &plan,
               PseudoSpinState &state, Rng &rng, Observe &&observe) {
    for (size_t t = 0; t < mc.burn_in; ++t) metropolis_sweep(state, b, graph, rng);
    for (size_t n = 0; n < plan.samples; ++n) {
        for (size_t t = 0; t < mc.thinning; ++t) metropolis_sweep(state, b, graph, rng);
        observe(state, n * plan.batches / plan.samples);
    }
}

inline std::vector<ChainSchedule> plan_chains(const MCParams &mc) {
    std::vector<ChainSchedule> plans(mc.n_chains);
    for (size_t c = 0; c < mc.n_chains; ++c) {
        plans[c].samples = mc.n_samples / mc.n_chains + (c < mc.n_samples % mc.n_chains ? 1 : 0);
        plans[c].batches = mc.n_batches;
    }
    return plans;
}

/// Accumulates per-batch sums for a fixed number of observables.
class BatchAccumulator {
   public:
    BatchAccumulator(size_t n_observables, size_t n_batches)
        : n_obs_(n_observables), n_batches_(n_batches), sums_(n_observables * n_batches, 0.0), counts_(n_batches, 0) {}

    double *row(size_t batch) { return &sums_[batch * n_obs_]; }
    void count(size_t batch) { ++counts_[batch]; }

    /// Batch means for observable j, appended to out.
    void append_means(size_t j, std::vector<double> &out) const {
        for (size_t q = 0; q < n_batches_; ++q) {
            if (counts_[q] > 0) out.push_back(sums_[q * n_obs_ + j] / static_cast<double>(counts_[q]));
        }
    }

    size_t n_observables() const { return n_obs_; }

   private:
    size_t n_obs_;
    size_t n_batches_;
    std::vector<double> sums_;
    std::vector<size_t> counts_;
};

/// Merges per-chain accumulators in chain order into mean and standard error.
inline std::vector<Estimate> reduce_chains(const std::vector<BatchAccumulator> &chains) {
    const size_t n_obs = chains.front().n_observables();
    std::vector<Estimate> out(n_obs);
    std::vector<double> means;
    for (size_t j = 0; j < n_obs; ++j) {
        means.clear();
        for (const auto &acc : chains) acc.append_means(j, means);
        const BatchStats st = batch_stats(means);
        out[j] = Estimate{st.mean, st.std_error};
    }
    return out;
}

}  // namespace detail

/// Monte-Carlo estimate of one disorder sector of the solvable ground state.
///
/// The Gibbs weight over pseudo-spins is exp(sum_i b_i theta_s theta_s'). In
/// terms of sigma_i = theta_s theta_s':
///   <sigma_i>      = E[sigma_i]
///   <A_s>          = E[exp(-sum_{i in s} b_i sigma_i)]
///   <A_s A_s'>     = E[exp(-sum_{i in s xor s'} b_i sigma_i)]
/// Pass `lattice.dual()` and b^x to get the plaquette sector.
inline SectorMeasurements sample_sector(const Lattice &lattice, std::span<const double> b, const MCParams &mc,
                                        uint64_t seed) {
    mc.validate();
    if (b.size() != lattice.n_edges()) throw ConfigError("field vector length does not match lattice");
    const IsingGraph graph(lattice);
    const size_t n_sites = graph.n_sites();
    const size_t n_edges = graph.n_edges();
    const size_t n_obs = n_sites + 2 * n_edges;
    const auto plans = detail::plan_chains(mc);

    std::vector<detail::BatchAccumulator> chains(mc.n_chains, detail::BatchAccumulator(n_obs, mc.n_batches));
    parallel_for(mc.n_chains, mc.threads, [&](size_t c) {
        Rng rng = make_rng(derive_seed(seed, c));
        PseudoSpinState state = PseudoSpinState::random(graph, b, rng);
        std::vector<double> field(n_sites);
        auto &acc = chains[c];
        detail::run_chain(graph, b, mc, plans[c], state, rng, [&](const PseudoSpinState &st, size_t batch) {
            double *row = acc.row(batch);
            for (size_t s = 0; s < n_sites; ++s) {
                field[s] = st.local_field(graph, b, s);
                row[s] += std::exp(-field[s]);
            }
            for (size_t i = 0; i < n_edges; ++i) {
                const EdgeEnds e = graph.ends(i);
                double shared = 0;
                for (size_t j : graph.shared(i)) shared += b[j] * st.edge_sign(graph, j);
                row[n_sites + i] += std::exp(-field[e.first] - field[e.second] + 2.0 * shared);
                row[n_sites + n_edges + i] += st.edge_sign(graph, i);
            }
            acc.count(batch);
        });
    });

    const auto est = detail::reduce_chains(chains);
    SectorMeasurements out;
    out.stabilizer.assign(est.begin(), est.begin() + static_cast<std::ptrdiff_t>(n_sites));
    out.correlator.assign(est.begin() + static_cast<std::ptrdiff_t>(n_sites),
                          est.begin() + static_cast<std::ptrdiff_t>(n_sites + n_edges));
    out.spin.assign(est.begin() + static_cast<std::ptrdiff_t>(n_sites + n_edges), est.end());
    return out;
}

/// (<A_s>, <A_s'>, <A_s A_s'>) at a single edge; the network input triple.
inline std::array<Estimate, 3> sample_edge_triple(const Lattice &lattice, std::span<const double> b, size_t edge,
                                                  const MCParams &mc, uint64_t seed) {
    mc.validate();
    if (b.size() != lattice.n_edges()) throw ConfigError("field vector length does not match lattice");
    if (edge >= lattice.n_edges()) throw std::out_of_range("edge index out of range");
    const IsingGraph graph(lattice);
    const EdgeEnds ends = graph.ends(edge);
    const auto plans = detail::plan_chains(mc);
    std::vector<detail::BatchAccumulator> chains(mc.n_chains, detail::BatchAccumulator(3, mc.n_batches));
    parallel_for(mc.n_chains, mc.threads, [&](size_t c) {
        Rng rng = make_rng(derive_seed(seed, c));
        PseudoSpinState state = PseudoSpinState::random(graph, b, rng);
        auto &acc = chains[c];
        detail::run_chain(graph, b, mc, plans[c], state, rng, [&](const PseudoSpinState &st, size_t batch) {
            const double fs = st.local_field(graph, b, ends.first);
            const double fsp = st.local_field(graph, b, ends.second);
            double shared = 0;
            for (size_t j : graph.shared(edge)) shared += b[j] * st.edge_sign(graph, j);
            double *row = acc.row(batch);
            row[0] += std::exp(-fs);
            row[1] += std::exp(-fsp);
            row[2] += std::exp(-fs - fsp + 2.0 * shared);
            acc.count(batch);
        });
    });
    const auto est = detail::reduce_chains(chains);
    return {est[0], est[1], est[2]};
}

/// Ground-state expectation values of the solvable model with fields in one
/// sector only. The sector whose fields are all zero is exact (stabilizers
/// at +1, single spins at 0) unless both are zero, in which case the star
/// sector is still sampled so <sigma^z> carries a statistical estimate.
inline MeasurementSet sample_measurements(const Lattice &lattice, const FieldConfig &fields, const MCParams &mc,
                                          uint64_t seed, double cap = kDefaultFieldCap) {
    fields.validate(lattice.n_edges(), cap);
    mc.validate();
    const bool z_zero = fields.z_is_zero();
    const bool x_zero = fields.x_is_zero();
    if (!z_zero && !x_zero) {
        throw ConfigError("the sampler supports one disorder sector at a time (b^z or b^x)");
    }
    const uint64_t sector_seed = derive_seed(seed, 0x5EC7);
    const size_t n = lattice.n_vertices();
    const size_t m = lattice.n_edges();
    SectorMeasurements star = SectorMeasurements::trivial(n, m);
    SectorMeasurements plaq = SectorMeasurements::trivial(n, m);
    if (!x_zero) {
        plaq = sample_sector(lattice.dual(), fields.bx, mc, sector_seed);
    } else {
        star = sample_sector(lattice, fields.bz, mc, sector_seed);
    }
    return assemble_measurements(lattice, star, plaq, mc.n_samples, false);
}

/// Fidelity susceptibility chi_F = Var(M_lambda) / 4 with
/// M_lambda = sum_i lambda_i sigma_i under weight exp(beta M_lambda), and the
/// Ising heat capacity C_v = beta^2 Var(M_lambda) = 4 beta^2 chi_F.
struct SusceptibilityEstimate {
    double chi_f = 0;
    double chi_f_std_error = 0;
    double heat_capacity = 0;
    double heat_capacity_std_error = 0;
    double mean_abs_magnetization = 0;
};

inline SusceptibilityEstimate fidelity_susceptibility(const Lattice &lattice, std::span<const double> lambda,
                                                      double beta, const MCParams &mc, uint64_t seed) {
    if (beta < 0) throw ConfigError("beta must be non-negative");
    mc.validate();
    if (lambda.size() != lattice.n_edges()) throw ConfigError("lambda vector length does not match lattice");
    const IsingGraph graph(lattice);
    std::vector<double> b(lambda.begin(), lambda.end());
    for (double &x : b) x *= beta;
    const auto plans = detail::plan_chains(mc);
    // Observables per batch: M, M^2, |magnetization|.
    std::vector<detail::BatchAccumulator> chains(mc.n_chains, detail::BatchAccumulator(3, mc.n_batches));
    parallel_for(mc.n_chains, mc.threads, [&](size_t c) {
        Rng rng = make_rng(derive_seed(seed, c));
        PseudoSpinState state = PseudoSpinState::random(graph, b, rng);
        auto &acc = chains[c];
        detail::run_chain(graph, b, mc, plans[c], state, rng, [&](const PseudoSpinState &st, size_t batch) {
            double m = 0;
            for (size_t i = 0; i < graph.n_edges(); ++i) m += lambda[i] * st.edge_sign(graph, i);
            double mag = 0;
            for (int8_t t : st.spins()) mag += t;
            double *row = acc.row(batch);
            row[0] += m;
            row[1] += m * m;
            row[2] += std::abs(mag) / static_cast<double>(graph.n_sites());
            acc.count(batch);
        });
    });
    // Variance per batch, then mean and spread across batches.
    std::vector<double> m1, m2, mag;
    for (const auto &acc : chains) {
        acc.append_means(0, m1);
        acc.append_means(1, m2);
        acc.append_means(2, mag);
    }
    std::vector<double> variances(m1.size());
    for (size_t q = 0; q < m1.size(); ++q) variances[q] = std::max(0.0, m2[q] - m1[q] * m1[q]);
    const BatchStats var = batch_stats(variances);
    SusceptibilityEstimate out;
    out.chi_f = var.mean / 4.0;
    out.chi_f_std_error = var.std_error / 4.0;
    out.heat_capacity = 4.0 * beta * beta * out.chi_f;
    out.heat_capacity_std_error = 4.0 * beta * beta * out.chi_f_std_error;
    out.mean_abs_magnetization = batch_stats(mag).mean;
    return out;
}

/// Exact partition sums for small lattices: Z_Ising over all pseudo-spin
/// configurations and Z over the star group G (products of star operators
/// modulo the product of all of them).
struct PartitionCheck {
    double z_ising = 0;
    double z_group = 0;
    double ratio = 0;
    size_t group_size = 0;
};

inline PartitionCheck partition_ratio_check(const Lattice &lattice, std::span<const double> b) {
    const size_t n_sites = lattice.n_vertices();
    const size_t n_edges = lattice.n_edges();
    if (n_sites > 20) throw ConfigError("partition_ratio_check enumerates 2^(k^2) states; use k <= 4");
    if (b.size() != n_edges) throw ConfigError("field vector length does not match lattice");

    PartitionCheck out;
    // Ising side: every theta configuration, sigma_i = theta_s theta_s'.
    for (uint64_t conf = 0; conf < (uint64_t{1} << n_sites); ++conf) {
        double m = 0;
        for (size_t i = 0; i < n_edges; ++i) {
            const EdgeEnds e = lattice.edge_vertices(i);
            const int sign = (((conf >> e.first) ^ (conf >> e.second)) & 1) ? -1 : 1;
            m += b[i] * sign;
        }
        out.z_ising += std::exp(m);
    }
    // Group side: XOR of star flip masks over subsets of all but the last site.
    std::vector<uint64_t> star_mask(n_sites, 0);
    for (size_t s = 0; s < n_sites; ++s) {
        for (size_t e : lattice.star_edges(s)) star_mask[s] ^= uint64_t{1} << e;
    }
    const size_t free_sites = n_sites - 1;
    for (uint64_t subset = 0; subset < (uint64_t{1} << free_sites); ++subset) {
        uint64_t flips = 0;
        for (size_t s = 0; s < free_sites; ++s) {
            if ((subset >> s) & 1) flips ^= star_mask[s];
        }
        double m = 0;
        for (size_t i = 0; i < n_edges; ++i) m += b[i] * (((flips >> i) & 1) ? -1.0 : 1.0);
        out.z_group += std::exp(m);
        ++out.group_size;
    }
    out.ratio = out.z_ising / out.z_group;
    return out;
}

}  // namespace toric

#endif  // TORIC_GIBBS_SAMPLER_HPP
