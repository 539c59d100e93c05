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

#include "toric/phase_analysis.hpp"

#include <cmath>

#include "gtest/gtest.h"

namespace toric {
namespace {

ScanParams quick_params() {
    ScanParams p;
    p.mc = MCParams{.burn_in = 300, .n_samples = 3000, .thinning = 1, .n_batches = 10};
    p.n_realizations = 4;
    return p;
}

TEST(GenerateLambda, UniformIsAllOnes) {
    const Lattice lat = Lattice::build(4);
    for (double l : generate_lambda(lat, DisorderModel::uniform())) EXPECT_EQ(l, 1.0);
}

TEST(GenerateLambda, FullDilutionIsAllZero) {
    const Lattice lat = Lattice::build(4);
    for (double l : generate_lambda(lat, DisorderModel::dilution(1.0))) EXPECT_EQ(l, 0.0);
}

TEST(GenerateLambda, NegatedModel) {
    DisorderModel m = DisorderModel::uniform();
    m.sign = -1;
    for (double l : generate_lambda(Lattice::build(3), m)) EXPECT_EQ(l, -1.0);
}

TEST(GenerateLambda, SignFlipFractionWithinBinomialBound) {
    // n = 2 * 24^2 = 1152 edges; the 99% interval at p = 0.5 is +-0.038.
    const Lattice lat = Lattice::build(24);
    for (uint64_t r = 0; r < 5; ++r) {
        const auto lambda = generate_lambda(lat, DisorderModel::sign_flip(0.5, 9), r);
        double neg = 0;
        for (double l : lambda) {
            EXPECT_TRUE(l == 1.0 || l == -1.0);
            neg += l < 0;
        }
        const double frac = neg / static_cast<double>(lambda.size());
        EXPECT_GE(frac, 0.44);
        EXPECT_LE(frac, 0.56);
    }
}

TEST(GenerateLambda, DilutionFrequencies) {
    const Lattice lat = Lattice::build(24);
    const auto lambda = generate_lambda(lat, DisorderModel::dilution(0.3, 2));
    double zeros = 0;
    for (double l : lambda) {
        EXPECT_TRUE(l == 0.0 || l == 1.0);
        zeros += l == 0.0;
    }
    const double n = static_cast<double>(lambda.size());
    const double se = std::sqrt(0.3 * 0.7 / n);
    EXPECT_NEAR(zeros / n, 0.3, 2.6 * se);
}

TEST(GenerateLambda, RealizationsDifferAndRepeat) {
    const Lattice lat = Lattice::build(6);
    const DisorderModel m = DisorderModel::sign_flip(0.3, 4);
    EXPECT_EQ(generate_lambda(lat, m, 1), generate_lambda(lat, m, 1));
    EXPECT_NE(generate_lambda(lat, m, 1), generate_lambda(lat, m, 2));
}

TEST(GenerateLambda, RejectsParameterOutsideUnitInterval) {
    EXPECT_THROW(generate_lambda(Lattice::build(2), DisorderModel::dilution(1.5)), ConfigError);
    EXPECT_THROW(generate_lambda(Lattice::build(2), DisorderModel::sign_flip(-0.1)), ConfigError);
}

TEST(FindPeak, QuadraticVertex) {
    ScanCurve c;
    for (int i = 0; i < 9; ++i) {
        const double beta = 0.1 * i;
        c.points.push_back({beta, 5.0 - 20.0 * (beta - 0.43) * (beta - 0.43), 0.01, 0, 0, 0});
    }
    const PeakEstimate p = find_peak(c);
    EXPECT_TRUE(p.detected);
    EXPECT_NEAR(p.beta, 0.43, 1e-12);
    EXPECT_NEAR(p.cv, 5.0, 1e-12);
}

TEST(FindPeak, MonotoneCurveHasNoPeak) {
    ScanCurve c;
    for (int i = 0; i < 6; ++i) c.points.push_back({0.1 * i, 1.0 + i, 0.1, 0, 0, 0});
    EXPECT_FALSE(find_peak(c).detected);
}

TEST(FindPeak, NoisyBumpBelowThreshold) {
    ScanCurve c;
    const double cv[] = {1.0, 1.1, 1.2, 1.1, 1.0};
    for (int i = 0; i < 5; ++i) c.points.push_back({0.1 * i, cv[i], 0.1, 0, 0, 0});
    EXPECT_FALSE(find_peak(c).detected);
}

TEST(ScanTransition, CurveShapeAndCsv) {
    const Lattice lat = Lattice::build(4);
    const ScanCurve c = scan_transition(lat, DisorderModel::uniform(), linear_grid(0.2, 0.6, 5), quick_params(), 3);
    ASSERT_EQ(c.points.size(), 5u);
    EXPECT_EQ(c.realizations.size(), 20u);
    for (const auto &p : c.points) {
        EXPECT_NEAR(p.cv, 4 * p.beta * p.beta * p.chi_f, 1e-9 * p.cv);
        EXPECT_GT(p.cv_std_error, 0);
    }
    const CsvTable t = c.to_csv();
    EXPECT_EQ(t.header, (std::vector<std::string>{"beta", "cv", "cv_stderr", "chi_f", "realization"}));
    EXPECT_EQ(t.rows.size(), 25u);
    EXPECT_EQ(t.rows.back()[4], -1.0);
}

TEST(ScanTransition, IndependentOfThreadCount) {
    const Lattice lat = Lattice::build(4);
    ScanParams p = quick_params();
    const ScanCurve a = scan_transition(lat, DisorderModel::sign_flip(0.2), linear_grid(0.2, 0.8, 4), p, 5);
    p.threads = 3;
    const ScanCurve b = scan_transition(lat, DisorderModel::sign_flip(0.2), linear_grid(0.2, 0.8, 4), p, 5);
    for (size_t i = 0; i < a.points.size(); ++i) EXPECT_EQ(a.points[i].cv, b.points[i].cv);
}

TEST(ScanTransition, RejectsUnsortedGrid) {
    const Lattice lat = Lattice::build(4);
    EXPECT_THROW(scan_transition(lat, DisorderModel::uniform(), {0.3, 0.2, 0.4}, quick_params(), 1), ConfigError);
}

TEST(ScanTransition, ZeroCouplingsHaveNoHeatCapacity) {
    const Lattice lat = Lattice::build(4);
    const ScanCurve c = scan_transition(lat, DisorderModel::dilution(1.0), linear_grid(0.1, 1.0, 4), quick_params(), 1);
    for (const auto &p : c.points) EXPECT_EQ(p.cv, 0.0);
    EXPECT_FALSE(find_peak(c).detected);
}

// Heat capacity of the k = 2 Ising model by summing all 16 configurations.
double exact_cv_k2(double beta, const std::vector<double> &lambda) {
    const Lattice lat = Lattice::build(2);
    double z = 0, m1 = 0, m2 = 0;
    for (unsigned cfg = 0; cfg < 16; ++cfg) {
        double m = 0;
        for (size_t i = 0; i < lat.n_edges(); ++i) {
            const EdgeEnds e = lat.edge_vertices(i);
            const double si = ((cfg >> e.first) & 1) ? -1 : 1, sj = ((cfg >> e.second) & 1) ? -1 : 1;
            m += lambda[i] * si * sj;
        }
        const double w = std::exp(beta * m);
        z += w;
        m1 += w * m;
        m2 += w * m * m;
    }
    m1 /= z;
    m2 /= z;
    return beta * beta * (m2 - m1 * m1);
}

TEST(ScanTransition, MatchesEnumerationAtSmallSize) {
    const Lattice lat = Lattice::build(2);
    const DisorderModel model = DisorderModel::sign_flip(0.4, 6);
    const ScanCurve c = scan_transition(lat, model, {0.2, 0.5, 0.9}, quick_params(), 2);
    for (const auto &p : c.points) {
        double exact = 0;
        for (size_t r = 0; r < 4; ++r) exact += exact_cv_k2(p.beta, generate_lambda(lat, model, r)) / 4.0;
        EXPECT_NEAR(p.cv, exact, 4 * p.cv_std_error + 0.02 * exact) << "beta " << p.beta;
    }
}

TEST(Symmetry, NegatedCouplingsMatchOnEvenLattice) {
    const Lattice lat = Lattice::build(6);
    DisorderModel neg = DisorderModel::uniform();
    neg.sign = -1;
    const auto grid = linear_grid(0.2, 0.7, 6);
    const ScanCurve a = scan_transition(lat, DisorderModel::uniform(), grid, quick_params(), 1);
    const ScanCurve b = scan_transition(lat, neg, grid, quick_params(), 2);
    for (double z : curve_z_scores(a, b)) EXPECT_LT(std::abs(z), 4.0);
}

TEST(AnchorModels, FiveFamilies) {
    const auto models = anchor_models();
    ASSERT_EQ(models.size(), 5u);
    EXPECT_EQ(models[0].kind, DisorderKind::Uniform);
    EXPECT_DOUBLE_EQ(models[1].parameter, 0.5);
    EXPECT_DOUBLE_EQ(models[2].parameter, 1.0);
    EXPECT_DOUBLE_EQ(models[3].parameter, 0.12);
    EXPECT_EQ(models[4].sign, -1.0);
}

}  // namespace
}  // namespace toric
