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

#include "toric/neural_regressor.hpp"

#include <filesystem>
#include <fstream>
#include <random>

#include "gtest/gtest.h"

namespace toric {
namespace {

namespace fs = std::filesystem;

Eigen::MatrixXd random_inputs(size_t n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-0.95, 0.95);
    Eigen::MatrixXd X(3, static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = unif(rng);
    return X;
}

fs::path temp_dir(const std::string &name) {
    const fs::path d = fs::temp_directory_path() / ("toric_nn_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

class GradientCheck : public ::testing::TestWithParam<InputTransform> {};

TEST_P(GradientCheck, MatchesCentralDifferences) {
    RegressorModel model = RegressorModel::init(3);
    model.set_input_transform(GetParam());
    const Eigen::MatrixXd X = random_inputs(16, 11);
    Eigen::RowVectorXd y(16);
    for (Eigen::Index i = 0; i < 16; ++i) y(i) = 0.1 * static_cast<double>(i);
    Gradients g;
    model.loss_and_gradients(X, y, g);

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<size_t> pick(0, model.n_parameters() - 1);
    const double eps = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        const size_t idx = pick(rng);
        double &p = model.parameter(idx);
        const double saved = p;
        p = saved + eps;
        const double up = model.loss(X, y);
        p = saved - eps;
        const double down = model.loss(X, y);
        p = saved;
        const double numeric = (up - down) / (2 * eps);
        const double analytic = RegressorModel::gradient_entry(g, idx);
        const double scale = std::max(std::abs(numeric), std::abs(analytic));
        EXPECT_LE(std::abs(numeric - analytic), 1e-4 * scale + 1e-9) << "parameter " << idx;
    }
}

INSTANTIATE_TEST_SUITE_P(Transforms, GradientCheck,
                         ::testing::Values(InputTransform::Identity, InputTransform::SqrtDeficit));

TEST(Regressor, DefaultShape) {
    const RegressorModel m = RegressorModel::init(1);
    EXPECT_EQ(m.layer_sizes(), (std::vector<size_t>{3, 128, 150, 128, 1}));
    EXPECT_EQ(m.n_parameters(), 3u * 128 + 128 + 128 * 150 + 150 + 150 * 128 + 128 + 128 + 1);
}

TEST(Regressor, SameSeedSameWeights) {
    const RegressorModel a = RegressorModel::init(42), b = RegressorModel::init(42), c = RegressorModel::init(43);
    for (size_t l = 0; l < a.n_layers(); ++l) EXPECT_EQ(a.weight(l), b.weight(l));
    EXPECT_NE(a.weight(0), c.weight(0));
}

TEST(Regressor, RejectsNonFiniteInput) {
    const RegressorModel m = RegressorModel::init(1);
    EXPECT_THROW(m.forward({0.1, std::nan(""), 0.2}), std::invalid_argument);
}

TEST(Regressor, LearnsConstantLabel) {
    Dataset data;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-1, 1);
    for (int i = 0; i < 400; ++i) data.push_back({unif(rng), unif(rng), unif(rng)}, 0.7);
    TrainParams hp;
    hp.steps = 2000;
    hp.eval_size = 50;
    const TrainResult r = train(RegressorModel::init(9), data, hp);
    EXPECT_LT(r.model.metadata().final_train_loss, 1e-4);
    EXPECT_NEAR(r.model.forward({0.2, -0.3, 0.5}), 0.7, 0.02);
}

TEST(Regressor, TrainingIsDeterministic) {
    Dataset data;
    for (int i = 0; i < 200; ++i) {
        const double x = -1.0 + 0.01 * i;
        data.push_back({x, x * x, -x}, std::abs(x));
    }
    TrainParams hp;
    hp.steps = 200;
    const TrainResult a = train(RegressorModel::init(4), data, hp);
    const TrainResult b = train(RegressorModel::init(4), data, hp);
    EXPECT_EQ(a.trace.train, b.trace.train);
    EXPECT_EQ(a.model.weight(2), b.model.weight(2));
    EXPECT_EQ(a.eval_rows, b.eval_rows);
}

TEST(Regressor, SplitIsDisjoint) {
    Dataset data;
    for (int i = 0; i < 120; ++i) data.push_back({0, 0, 0}, 0.0);
    TrainParams hp;
    hp.steps = 10;
    const TrainResult r = train(RegressorModel::init(1), data, hp);
    EXPECT_EQ(r.eval_rows.size(), 50u);
    EXPECT_EQ(r.train_rows.size(), 70u);
    std::vector<size_t> all = r.eval_rows;
    all.insert(all.end(), r.train_rows.begin(), r.train_rows.end());
    std::sort(all.begin(), all.end());
    for (size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
}

TEST(Regressor, RejectsBadHyperparameters) {
    Dataset data;
    for (int i = 0; i < 40; ++i) data.push_back({0, 0, 0}, 0.0);
    TrainParams hp;
    EXPECT_THROW(train(RegressorModel::init(1), data, hp), ConfigError);  // eval split >= dataset
    hp.eval_size = 10;
    hp.learning_rate = 0;
    EXPECT_THROW(train(RegressorModel::init(1), data, hp), ConfigError);
}

TEST(Regressor, SaveLoadIsBitExact) {
    const fs::path dir = temp_dir("roundtrip");
    RegressorModel m = RegressorModel::init(17);
    m.set_input_transform(InputTransform::Identity);
    m.metadata().k = 3;
    m.metadata().b_max = 1.7;
    m.save(dir / "model.json");
    const RegressorModel back = RegressorModel::load(dir / "model.json");
    EXPECT_EQ(back.layer_sizes(), m.layer_sizes());
    EXPECT_EQ(back.input_transform(), InputTransform::Identity);
    for (size_t l = 0; l < m.n_layers(); ++l) {
        EXPECT_EQ(back.weight(l), m.weight(l));
        EXPECT_EQ(back.bias(l), m.bias(l));
    }
    EXPECT_EQ(back.metadata().k, 3u);
    EXPECT_EQ(back.forward({0.3, 0.2, 0.1}), m.forward({0.3, 0.2, 0.1}));
    fs::remove_all(dir);
}

TEST(Regressor, TruncatedFileIsIoError) {
    const fs::path dir = temp_dir("truncated");
    RegressorModel::init(2).save(dir / "model.json");
    std::string text = read_file(dir / "model.json");
    std::ofstream(dir / "cut.json") << text.substr(0, text.size() / 2);
    EXPECT_THROW(RegressorModel::load(dir / "cut.json"), IoError);
    EXPECT_THROW(RegressorModel::load(dir / "missing.json"), IoError);
    fs::remove_all(dir);
}

TEST(Regressor, WrongShapeIsIoError) {
    nlohmann::json j = RegressorModel::init(2).to_json();
    j["layer_sizes"] = std::vector<size_t>{3, 4, 1};
    EXPECT_THROW(RegressorModel::from_json(j), IoError);
}

TEST(DatasetIo, CsvRoundTrip) {
    const fs::path dir = temp_dir("dataset");
    Dataset d;
    d.push_back({0.1, -0.2, 1.0 / 3.0}, 0.25);
    d.push_back({1.0, 1.0, 1.0}, 0.0);
    d.provenance = {{"k", 3}};
    d.save(dir / "train.csv");
    const Dataset back = Dataset::load(dir / "train.csv");
    EXPECT_EQ(back.inputs, d.inputs);
    EXPECT_EQ(back.labels, d.labels);
    EXPECT_EQ(back.provenance.at("k"), 3);
    fs::remove_all(dir);
}

TEST(LossTrace, RelativeChange) {
    LossTrace t;
    for (size_t s = 10; s <= 4000; s += 10) {
        t.eval_steps.push_back(s);
        t.eval.push_back(s <= 2000 ? 2.0 : 1.0);
    }
    EXPECT_NEAR(t.eval_relative_change(4000), 0.5, 1e-12);
    EXPECT_NEAR(t.eval_window_mean(1500, 500), 2.0, 1e-12);
    EXPECT_THROW(t.eval_relative_change(1000), std::invalid_argument);
}

}  // namespace
}  // namespace toric
