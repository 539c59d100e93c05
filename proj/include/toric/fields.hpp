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

#ifndef TORIC_FIELDS_HPP
#define TORIC_FIELDS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "toric/common.hpp"
#include "toric/lattice.hpp"

namespace toric {

/// Default hard cap on |b| for any field entry.
inline constexpr double kDefaultFieldCap = 5.0;

/// Per-edge field parameters b^z_i and b^x_i (dimensionless, b = beta * lambda).
struct FieldConfig {
    std::vector<double> bz;
    std::vector<double> bx;

    static FieldConfig zeros(size_t n_edges) {
        return FieldConfig{std::vector<double>(n_edges, 0.0), std::vector<double>(n_edges, 0.0)};
    }

    size_t n_edges() const { return bz.size(); }

    bool z_is_zero() const {
        return std::all_of(bz.begin(), bz.end(), [](double b) { return b == 0.0; });
    }
    bool x_is_zero() const {
        return std::all_of(bx.begin(), bx.end(), [](double b) { return b == 0.0; });
    }

    double max_abs() const {
        double m = 0;
        for (double b : bz) m = std::max(m, std::abs(b));
        for (double b : bx) m = std::max(m, std::abs(b));
        return m;
    }

    /// Throws ConfigError unless both sectors have n_edges finite entries
    /// bounded by `cap`.
    void validate(size_t n_edges, double cap = kDefaultFieldCap) const {
        if (bz.size() != n_edges || bx.size() != n_edges) {
            throw ConfigError("field config has " + std::to_string(bz.size()) + "/" + std::to_string(bx.size()) +
                              " entries, lattice has " + std::to_string(n_edges) + " edges");
        }
        for (const auto *sector : {&bz, &bx}) {
            for (double b : *sector) {
                if (!std::isfinite(b)) throw ConfigError("field entry is not finite");
                if (std::abs(b) > cap) {
                    throw ConfigError("field entry " + std::to_string(b) + " exceeds cap " + std::to_string(cap));
                }
            }
        }
    }

    FieldConfig &operator+=(const FieldConfig &o) {
        for (size_t i = 0; i < bz.size(); ++i) bz[i] += o.bz[i];
        for (size_t i = 0; i < bx.size(); ++i) bx[i] += o.bx[i];
        return *this;
    }
    FieldConfig &operator-=(const FieldConfig &o) {
        for (size_t i = 0; i < bz.size(); ++i) bz[i] -= o.bz[i];
        for (size_t i = 0; i < bx.size(); ++i) bx[i] -= o.bx[i];
        return *this;
    }
    FieldConfig scaled(double f) const {
        FieldConfig out = *this;
        for (double &b : out.bz) b *= f;
        for (double &b : out.bx) b *= f;
        return out;
    }
};

struct Estimate {
    double value = 0;
    double std_error = 0;
};

/// Everything measured for one edge i: the two stars s, s' and two
/// plaquettes p, p' touching it, their pair correlators, and the
/// single-spin expectations.
struct EdgeMeasurement {
    size_t s = 0, sp = 0, p = 0, pp = 0;
    Estimate a_s, a_sp, a_corr;
    Estimate b_p, b_pp, b_corr;
    Estimate sz, sx;
};

/// Stabilizer and single-spin expectation values for a whole lattice.
///
/// `stars` and `plaquettes` hold each distinct <A_s> and <B_p> once; the
/// per-edge table repeats them next to the pair correlators so a consumer
/// can read the network inputs of an edge directly.
struct MeasurementSet {
    std::vector<Estimate> stars;
    std::vector<Estimate> plaquettes;
    std::vector<EdgeMeasurement> edges;
    size_t n_samples = 0;
    bool exact = false;

    size_t n_edges() const { return edges.size(); }

    /// Per-edge entries handed to consumers each round: six stabilizer
    /// values and two single-spin values per edge.
    size_t requested_values() const { return 8 * edges.size(); }

    /// Distinct physical expectation values behind the per-edge table.
    size_t distinct_values() const { return stars.size() + plaquettes.size() + 4 * edges.size(); }
};

/// Sector-local results from either the sampler or the exact oracle: one
/// value per site of the (possibly dual) lattice and per edge.
struct SectorMeasurements {
    std::vector<Estimate> stabilizer;  // <A_s> per vertex of the lattice used
    std::vector<Estimate> correlator;  // <A_s A_s'> per edge
    std::vector<Estimate> spin;        // <sigma_i> per edge

    static SectorMeasurements trivial(size_t n_sites, size_t n_edges) {
        SectorMeasurements out;
        out.stabilizer.assign(n_sites, Estimate{1.0, 0.0});
        out.correlator.assign(n_edges, Estimate{1.0, 0.0});
        out.spin.assign(n_edges, Estimate{0.0, 0.0});
        return out;
    }
};

/// Assembles a MeasurementSet from the star sector (computed on `lattice`)
/// and the plaquette sector (computed on `lattice.dual()`).
inline MeasurementSet assemble_measurements(const Lattice &lattice, const SectorMeasurements &star,
                                            const SectorMeasurements &plaquette, size_t n_samples, bool exact) {
    MeasurementSet ms;
    ms.stars = star.stabilizer;
    ms.plaquettes = plaquette.stabilizer;
    ms.n_samples = n_samples;
    ms.exact = exact;
    ms.edges.resize(lattice.n_edges());
    for (size_t i = 0; i < lattice.n_edges(); ++i) {
        EdgeMeasurement &e = ms.edges[i];
        const EdgeEnds v = lattice.edge_vertices(i);
        const EdgeEnds p = lattice.edge_plaquettes(i);
        e.s = v.first;
        e.sp = v.second;
        e.p = p.first;
        e.pp = p.second;
        e.a_s = ms.stars[e.s];
        e.a_sp = ms.stars[e.sp];
        e.a_corr = star.correlator[i];
        e.b_p = ms.plaquettes[e.p];
        e.b_pp = ms.plaquettes[e.pp];
        e.b_corr = plaquette.correlator[i];
        e.sz = star.spin[i];
        e.sx = plaquette.spin[i];
    }
    return ms;
}

}  // namespace toric

#endif  // TORIC_FIELDS_HPP
