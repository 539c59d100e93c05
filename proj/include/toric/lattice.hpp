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

#ifndef TORIC_LATTICE_HPP
#define TORIC_LATTICE_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace toric {

enum class Orientation : uint8_t { Horizontal, Vertical };

/// Two endpoints of an edge: incident vertices, or incident plaquettes.
struct EdgeEnds {
    size_t first = 0;
    size_t second = 0;
    bool operator==(const EdgeEnds &) const = default;
};

/// The two stars meeting at an edge, with the edges in exactly one of them.
struct StarPair {
    size_t s = 0;
    size_t sp = 0;
    std::vector<size_t> symmetric_difference;
};

/// k x k periodic square lattice with spins on edges.
///
/// Vertex (r, c) and plaquette (r, c) both have index r * k + c. Plaquette
/// (r, c) is the face with corners (r, c), (r, c + 1), (r + 1, c) and
/// (r + 1, c + 1). Edges are numbered horizontal block first:
///
///     h(r, c) = r * k + c          joins vertex (r, c) to (r, c + 1)
///     v(r, c) = k * k + r * k + c  joins vertex (r, c) to (r + 1, c)
///
/// `dual()` exchanges vertices with plaquettes (and the matching edge maps)
/// while keeping edge indices fixed, so per-edge data such as b^x can be fed
/// to a dual lattice unchanged. Applying it twice gives back the original.
class Lattice {
   public:
    using Quad = std::array<size_t, 4>;

    static Lattice build(size_t k) {
        if (k < 2) {
            throw std::invalid_argument("lattice size k must be at least 2, got " + std::to_string(k));
        }
        Lattice lat;
        lat.k_ = k;
        const size_t n = k * k;
        lat.stars_.resize(n);
        lat.plaquettes_.resize(n);
        lat.edge_vertices_.resize(2 * n);
        lat.edge_plaquettes_.resize(2 * n);
        lat.orientation_.resize(2 * n);

        auto vid = [k](size_t r, size_t c) { return (r % k) * k + (c % k); };
        auto h = [k](size_t r, size_t c) { return (r % k) * k + (c % k); };
        auto v = [k](size_t r, size_t c) { return k * k + (r % k) * k + (c % k); };

        for (size_t r = 0; r < k; ++r) {
            for (size_t c = 0; c < k; ++c) {
                const size_t up = (r + k - 1) % k;
                const size_t left = (c + k - 1) % k;
                lat.stars_[vid(r, c)] = {h(r, c), h(r, left), v(r, c), v(up, c)};
                lat.plaquettes_[vid(r, c)] = {h(r, c), h(r + 1, c), v(r, c), v(r, c + 1)};

                lat.edge_vertices_[h(r, c)] = {vid(r, c), vid(r, c + 1)};
                lat.edge_vertices_[v(r, c)] = {vid(r, c), vid(r + 1, c)};
                lat.edge_plaquettes_[h(r, c)] = {vid(up, c), vid(r, c)};
                lat.edge_plaquettes_[v(r, c)] = {vid(r, left), vid(r, c)};
                lat.orientation_[h(r, c)] = Orientation::Horizontal;
                lat.orientation_[v(r, c)] = Orientation::Vertical;
            }
        }
        return lat;
    }

    size_t k() const { return k_; }
    size_t n_vertices() const { return k_ * k_; }
    size_t n_plaquettes() const { return k_ * k_; }
    size_t n_edges() const { return 2 * k_ * k_; }
    bool is_dual() const { return dual_; }

    const Quad &star_edges(size_t s) const { return stars_.at(s); }
    const Quad &plaquette_edges(size_t p) const { return plaquettes_.at(p); }
    EdgeEnds edge_vertices(size_t i) const { return edge_vertices_.at(i); }
    EdgeEnds edge_plaquettes(size_t i) const { return edge_plaquettes_.at(i); }
    Orientation orientation(size_t i) const { return orientation_.at(i); }

    StarPair adjacent_star_pair(size_t i) const {
        if (i >= n_edges()) {
            throw std::out_of_range("edge index " + std::to_string(i) + " out of range");
        }
        const EdgeEnds ends = edge_vertices_[i];
        StarPair out{ends.first, ends.second, {}};
        const Quad &a = stars_[ends.first];
        const Quad &b = stars_[ends.second];
        for (size_t e : a) {
            if (std::find(b.begin(), b.end(), e) == b.end()) out.symmetric_difference.push_back(e);
        }
        for (size_t e : b) {
            if (std::find(a.begin(), a.end(), e) == a.end()) out.symmetric_difference.push_back(e);
        }
        std::sort(out.symmetric_difference.begin(), out.symmetric_difference.end());
        return out;
    }

    Lattice dual() const {
        Lattice d = *this;
        std::swap(d.stars_, d.plaquettes_);
        std::swap(d.edge_vertices_, d.edge_plaquettes_);
        for (auto &o : d.orientation_) {
            o = o == Orientation::Horizontal ? Orientation::Vertical : Orientation::Horizontal;
        }
        d.dual_ = !dual_;
        return d;
    }

    /// Image of vertex (or plaquette) index under translation by (dr, dc).
    size_t translate_site(size_t s, size_t dr, size_t dc) const {
        const size_t r = s / k_, c = s % k_;
        return ((r + dr) % k_) * k_ + (c + dc) % k_;
    }

    size_t translate_edge(size_t i, size_t dr, size_t dc) const {
        const size_t block = i / (k_ * k_);
        return block * k_ * k_ + translate_site(i % (k_ * k_), dr, dc);
    }

    bool operator==(const Lattice &) const = default;

   private:
    size_t k_ = 0;
    bool dual_ = false;
    std::vector<Quad> stars_;
    std::vector<Quad> plaquettes_;
    std::vector<EdgeEnds> edge_vertices_;
    std::vector<EdgeEnds> edge_plaquettes_;
    std::vector<Orientation> orientation_;
};

/// Edge used when building single-edge training data.
inline constexpr size_t kReferenceEdge = 0;

}  // namespace toric

#endif  // TORIC_LATTICE_HPP
