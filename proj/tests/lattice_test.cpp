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

#include "toric/lattice.hpp"

#include <algorithm>
#include <set>

#include "gtest/gtest.h"

namespace toric {
namespace {

using ::testing::TestWithParam;

TEST(LatticeTest, K2StarsAndPlaquettesByHand) {
    const Lattice lat = Lattice::build(2);
    // h(r,c) = 2r + c, v(r,c) = 4 + 2r + c.
    auto sorted = [](Lattice::Quad q) {
        std::sort(q.begin(), q.end());
        return q;
    };
    EXPECT_EQ(sorted(lat.star_edges(0)), (Lattice::Quad{0, 1, 4, 6}));
    EXPECT_EQ(sorted(lat.star_edges(1)), (Lattice::Quad{0, 1, 5, 7}));
    EXPECT_EQ(sorted(lat.star_edges(2)), (Lattice::Quad{2, 3, 4, 6}));
    EXPECT_EQ(sorted(lat.star_edges(3)), (Lattice::Quad{2, 3, 5, 7}));
    EXPECT_EQ(sorted(lat.plaquette_edges(0)), (Lattice::Quad{0, 2, 4, 5}));
    EXPECT_EQ(sorted(lat.plaquette_edges(3)), (Lattice::Quad{1, 3, 6, 7}));
    EXPECT_EQ(lat.edge_vertices(0), (EdgeEnds{0, 1}));
    EXPECT_EQ(lat.edge_vertices(6), (EdgeEnds{2, 0}));
}

TEST(LatticeTest, RejectsTooSmall) {
    EXPECT_THROW(Lattice::build(0), std::invalid_argument);
    EXPECT_THROW(Lattice::build(1), std::invalid_argument);
}

class LatticePropertyTest : public TestWithParam<size_t> {};

TEST_P(LatticePropertyTest, EachEdgeInTwoStarsAndTwoPlaquettes) {
    const Lattice lat = Lattice::build(GetParam());
    std::vector<int> in_star(lat.n_edges()), in_plaq(lat.n_edges());
    for (size_t s = 0; s < lat.n_vertices(); ++s) {
        std::set<size_t> distinct(lat.star_edges(s).begin(), lat.star_edges(s).end());
        EXPECT_EQ(distinct.size(), 4u);
        for (size_t e : lat.star_edges(s)) ++in_star[e];
        for (size_t e : lat.plaquette_edges(s)) ++in_plaq[e];
    }
    for (size_t i = 0; i < lat.n_edges(); ++i) {
        EXPECT_EQ(in_star[i], 2);
        EXPECT_EQ(in_plaq[i], 2);
    }
}

TEST_P(LatticePropertyTest, EdgeMapsAgreeWithStarsAndPlaquettes) {
    const Lattice lat = Lattice::build(GetParam());
    auto contains = [](const Lattice::Quad &q, size_t e) { return std::find(q.begin(), q.end(), e) != q.end(); };
    for (size_t i = 0; i < lat.n_edges(); ++i) {
        const EdgeEnds v = lat.edge_vertices(i);
        const EdgeEnds p = lat.edge_plaquettes(i);
        EXPECT_NE(v.first, v.second);
        EXPECT_TRUE(contains(lat.star_edges(v.first), i));
        EXPECT_TRUE(contains(lat.star_edges(v.second), i));
        EXPECT_TRUE(contains(lat.plaquette_edges(p.first), i));
        EXPECT_TRUE(contains(lat.plaquette_edges(p.second), i));
    }
}

TEST_P(LatticePropertyTest, StarsAndPlaquettesCommute) {
    const Lattice lat = Lattice::build(GetParam());
    for (size_t s = 0; s < lat.n_vertices(); ++s) {
        for (size_t p = 0; p < lat.n_plaquettes(); ++p) {
            int overlap = 0;
            for (size_t e : lat.star_edges(s)) {
                const auto &q = lat.plaquette_edges(p);
                overlap += static_cast<int>(std::count(q.begin(), q.end(), e));
            }
            EXPECT_EQ(overlap % 2, 0) << "star " << s << " plaquette " << p;
        }
    }
}

TEST_P(LatticePropertyTest, DualIsInvolutionAndSwapsRoles) {
    const Lattice lat = Lattice::build(GetParam());
    const Lattice d = lat.dual();
    EXPECT_TRUE(d.is_dual());
    EXPECT_EQ(d.dual(), lat);
    for (size_t s = 0; s < lat.n_vertices(); ++s) EXPECT_EQ(d.star_edges(s), lat.plaquette_edges(s));
    for (size_t i = 0; i < lat.n_edges(); ++i) {
        EXPECT_EQ(d.edge_vertices(i), lat.edge_plaquettes(i));
        EXPECT_NE(d.orientation(i), lat.orientation(i));
    }
}

TEST_P(LatticePropertyTest, AdjacentStarPairSymmetricDifference) {
    const Lattice lat = Lattice::build(GetParam());
    const size_t expected = GetParam() == 2 ? 4 : 6;  // k = 2 stars share two edges
    for (size_t i = 0; i < lat.n_edges(); ++i) {
        const StarPair pair = lat.adjacent_star_pair(i);
        EXPECT_EQ(pair.symmetric_difference.size(), expected);
        EXPECT_TRUE(std::is_sorted(pair.symmetric_difference.begin(), pair.symmetric_difference.end()));
        EXPECT_EQ(std::count(pair.symmetric_difference.begin(), pair.symmetric_difference.end(), i), 0);
    }
    EXPECT_THROW(lat.adjacent_star_pair(lat.n_edges()), std::out_of_range);
}

TEST_P(LatticePropertyTest, TranslationMapsStarsToStars) {
    const Lattice lat = Lattice::build(GetParam());
    const size_t k = GetParam();
    for (size_t dr = 0; dr < k; ++dr) {
        for (size_t dc = 0; dc < k; ++dc) {
            for (size_t s = 0; s < lat.n_vertices(); ++s) {
                std::multiset<size_t> image;
                for (size_t e : lat.star_edges(s)) image.insert(lat.translate_edge(e, dr, dc));
                const auto &t = lat.star_edges(lat.translate_site(s, dr, dc));
                EXPECT_EQ(image, std::multiset<size_t>(t.begin(), t.end()));
            }
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Sizes, LatticePropertyTest, ::testing::Values(2, 3, 4, 8));

}  // namespace
}  // namespace toric
