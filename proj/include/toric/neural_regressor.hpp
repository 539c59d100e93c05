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

#ifndef TORIC_NEURAL_REGRESSOR_HPP
#define TORIC_NEURAL_REGRESSOR_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "toric/common.hpp"
#include "toric/io.hpp"

namespace toric {

using Triple = std::array<double, 3>;

inline const std::vector<size_t> &default_layer_sizes() {
    static const std::vector<size_t> sizes{3, 128, 150, 128, 1};
    return sizes;
}

inline constexpr int kModelFormatVersion = 1;

/// Fixed map applied to the raw expectation values before the first layer.
/// SqrtDeficit sends x to sqrt((1 - x) / 2), which is 0 for a stabilizer
/// at +1 and grows linearly with the fields for weak fields.
enum class InputTransform { Identity, SqrtDeficit };

inline std::string transform_name(InputTransform t) {
    return t == InputTransform::Identity ? "identity" : "sqrt_deficit";
}

inline InputTransform parse_transform(const std::string &name) {
    if (name == "identity") return InputTransform::Identity;
    if (name == "sqrt_deficit") return InputTransform::SqrtDeficit;
    throw ConfigError("unknown input transform '" + name + "'");
}

struct ModelMetadata {
    uint64_t seed = 0;
    size_t k = 0;
    size_t steps = 0;
    size_t best_step = 0;
    double final_train_loss = 0;  // mean minibatch loss over the last 100 steps
    double final_eval_loss = 0;
    double best_eval_loss = 0;
    double learning_rate = 0;
    size_t batch_size = 0;
    double b_max = 0;
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/// Dense feed-forward regressor with ReLU hidden layers and a linear output.
class RegressorModel {
   public:
    RegressorModel() = default;

    /// He-uniform weights U(-sqrt(6 / fan_in), sqrt(6 / fan_in)), zero biases.
    static RegressorModel init(uint64_t seed, const std::vector<size_t> &sizes = default_layer_sizes()) {
        validate_sizes(sizes);
        RegressorModel m;
        m.sizes_ = sizes;
        m.meta_.seed = seed;
        Rng rng = make_rng(seed);
        for (size_t l = 0; l + 1 < sizes.size(); ++l) {
            const double limit = std::sqrt(6.0 / static_cast<double>(sizes[l]));
            std::uniform_real_distribution<double> unif(-limit, limit);
            Eigen::MatrixXd w(static_cast<Eigen::Index>(sizes[l + 1]), static_cast<Eigen::Index>(sizes[l]));
            for (Eigen::Index i = 0; i < w.rows(); ++i) {
                for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = unif(rng);
            }
            m.weights_.push_back(std::move(w));
            m.biases_.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sizes[l + 1])));
        }
        return m;
    }

    /// Same shapes with every weight and bias zero.
    static RegressorModel zeros(const std::vector<size_t> &sizes = default_layer_sizes()) {
        RegressorModel m = init(0, sizes);
        for (auto &w : m.weights_) w.setZero();
        return m;
    }

    const std::vector<size_t> &layer_sizes() const { return sizes_; }
    InputTransform input_transform() const { return transform_; }
    void set_input_transform(InputTransform t) { transform_ = t; }
    size_t n_layers() const { return weights_.size(); }
    const Eigen::MatrixXd &weight(size_t l) const { return weights_.at(l); }
    const Eigen::VectorXd &bias(size_t l) const { return biases_.at(l); }
    Eigen::MatrixXd &weight(size_t l) { return weights_.at(l); }
    Eigen::VectorXd &bias(size_t l) { return biases_.at(l); }
    ModelMetadata &metadata() { return meta_; }
    const ModelMetadata &metadata() const { return meta_; }

    size_t n_parameters() const {
        size_t n = 0;
        for (size_t l = 0; l < weights_.size(); ++l) n += static_cast<size_t>(weights_[l].size() + biases_[l].size());
        return n;
    }

    /// Parameter by flat index: layer by layer, weights (column-major) then biases.
    double &parameter(size_t idx) {
        for (size_t l = 0; l < weights_.size(); ++l) {
            const size_t nw = static_cast<size_t>(weights_[l].size());
            if (idx < nw) return weights_[l].data()[idx];
            idx -= nw;
            const size_t nb = static_cast<size_t>(biases_[l].size());
            if (idx < nb) return biases_[l].data()[idx];
            idx -= nb;
        }
        throw std::out_of_range("parameter index out of range");
    }

    static double gradient_entry(const Gradients &g, size_t idx) {
        for (size_t l = 0; l < g.weights.size(); ++l) {
            const size_t nw = static_cast<size_t>(g.weights[l].size());
            if (idx < nw) return g.weights[l].data()[idx];
            idx -= nw;
            const size_t nb = static_cast<size_t>(g.biases[l].size());
            if (idx < nb) return g.biases[l].data()[idx];
            idx -= nb;
        }
        throw std::out_of_range("parameter index out of range");
    }

    /// Outputs for the columns of X (input_dim x n).
    Eigen::RowVectorXd forward_batch(const Eigen::MatrixXd &X) const {
        check_input(X);
        Eigen::MatrixXd a = transform_input(X);
        for (size_t l = 0; l < weights_.size(); ++l) {
            Eigen::MatrixXd z = weights_[l] * a;
            z.colwise() += biases_[l];
            a = l + 1 < weights_.size() ? z.cwiseMax(0.0) : z;
        }
        return a.row(0);
    }

    double forward(const Triple &x) const {
        Eigen::MatrixXd X(3, 1);
        X << x[0], x[1], x[2];
        return forward_batch(X)(0);
    }

    /// Mean squared error over the columns of X and its gradient.
    double loss_and_gradients(const Eigen::MatrixXd &X, const Eigen::RowVectorXd &y, Gradients &g) const {
        check_input(X);
        const size_t L = weights_.size();
        const double n = static_cast<double>(X.cols());
        std::vector<Eigen::MatrixXd> acts(L + 1);
        std::vector<Eigen::MatrixXd> pre(L);
        acts[0] = transform_input(X);
        for (size_t l = 0; l < L; ++l) {
            pre[l] = weights_[l] * acts[l];
            pre[l].colwise() += biases_[l];
            acts[l + 1] = l + 1 < L ? pre[l].cwiseMax(0.0) : pre[l];
        }
        const Eigen::RowVectorXd diff = acts[L].row(0) - y;
        const double loss = diff.squaredNorm() / n;
        g.weights.resize(L);
        g.biases.resize(L);
        Eigen::MatrixXd delta = (2.0 / n) * diff;
        for (size_t l = L; l-- > 0;) {
            if (l + 1 < L) delta = delta.cwiseProduct((pre[l].array() > 0.0).cast<double>().matrix());
            g.weights[l].noalias() = delta * acts[l].transpose();
            g.biases[l] = delta.rowwise().sum();
            if (l > 0) delta = weights_[l].transpose() * delta;
        }
        return loss;
    }

    double loss(const Eigen::MatrixXd &X, const Eigen::RowVectorXd &y) const {
        return (forward_batch(X) - y).squaredNorm() / static_cast<double>(X.cols());
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["version"] = kModelFormatVersion;
        j["layer_sizes"] = sizes_;
        j["activation"] = "relu";
        j["input_transform"] = transform_name(transform_);
        j["weights"] = nlohmann::json::array();
        j["biases"] = nlohmann::json::array();
        for (size_t l = 0; l < weights_.size(); ++l) {
            std::vector<double> w;
            w.reserve(static_cast<size_t>(weights_[l].size()));
            for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
                for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) w.push_back(weights_[l](r, c));
            }
            j["weights"].push_back(w);
            j["biases"].push_back(std::vector<double>(biases_[l].data(), biases_[l].data() + biases_[l].size()));
        }
        j["metadata"] = {{"seed", meta_.seed},
                         {"k", meta_.k},
                         {"steps", meta_.steps},
                         {"best_step", meta_.best_step},
                         {"final_train_loss", meta_.final_train_loss},
                         {"final_eval_loss", meta_.final_eval_loss},
                         {"best_eval_loss", meta_.best_eval_loss},
                         {"learning_rate", meta_.learning_rate},
                         {"batch_size", meta_.batch_size},
                         {"b_max", meta_.b_max}};
        return j;
    }

    static RegressorModel from_json(const nlohmann::json &j) {
        try {
            if (j.at("version").get<int>() != kModelFormatVersion) {
                throw IoError("unsupported model version " + j.at("version").dump());
            }
            if (j.at("activation").get<std::string>() != "relu") throw IoError("unsupported activation");
            RegressorModel m;
            m.sizes_ = j.at("layer_sizes").get<std::vector<size_t>>();
            m.transform_ = parse_transform(j.at("input_transform").get<std::string>());
            validate_sizes(m.sizes_);
            const auto &ws = j.at("weights");
            const auto &bs = j.at("biases");
            if (ws.size() + 1 != m.sizes_.size() || bs.size() + 1 != m.sizes_.size()) {
                throw IoError("layer count does not match layer_sizes");
            }
            for (size_t l = 0; l + 1 < m.sizes_.size(); ++l) {
                const auto w = ws[l].get<std::vector<double>>();
                const auto b = bs[l].get<std::vector<double>>();
                const size_t rows = m.sizes_[l + 1], cols = m.sizes_[l];
                if (w.size() != rows * cols || b.size() != rows) throw IoError("layer " + std::to_string(l) + " has wrong shape");
                Eigen::MatrixXd wm(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
                for (size_t r = 0; r < rows; ++r) {
                    for (size_t c = 0; c < cols; ++c) wm(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = w[r * cols + c];
                }
                m.weights_.push_back(std::move(wm));
                m.biases_.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
            }
            const auto &md = j.at("metadata");
            m.meta_.seed = md.at("seed").get<uint64_t>();
            m.meta_.k = md.at("k").get<size_t>();
            m.meta_.steps = md.at("steps").get<size_t>();
            m.meta_.best_step = md.at("best_step").get<size_t>();
            m.meta_.final_train_loss = md.at("final_train_loss").get<double>();
            m.meta_.final_eval_loss = md.at("final_eval_loss").get<double>();
            m.meta_.best_eval_loss = md.at("best_eval_loss").get<double>();
            m.meta_.learning_rate = md.at("learning_rate").get<double>();
            m.meta_.batch_size = md.at("batch_size").get<size_t>();
            m.meta_.b_max = md.at("b_max").get<double>();
            return m;
        } catch (const nlohmann::json::exception &e) {
            throw IoError(std::string("malformed model file: ") + e.what());
        } catch (const ConfigError &e) {
            throw IoError(std::string("malformed model file: ") + e.what());
        }
    }

    void save(const std::filesystem::path &path) const { atomic_write(path, to_json().dump(1) + "\n"); }

    static RegressorModel load(const std::filesystem::path &path) {
        const std::string text = read_file(path);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception &e) {
            throw IoError("malformed model file " + path.string() + ": " + e.what());
        }
        return from_json(j);
    }

   private:
    Eigen::MatrixXd transform_input(const Eigen::MatrixXd &X) const {
        if (transform_ == InputTransform::Identity) return X;
        return ((1.0 - X.array()).max(0.0) * 0.5).sqrt().matrix();
    }

    static void validate_sizes(const std::vector<size_t> &sizes) {
        if (sizes.size() < 2 || sizes.front() != 3 || sizes.back() != 1) {
            throw ConfigError("layer sizes must start with 3 inputs and end with 1 output");
        }
        for (size_t s : sizes) {
            if (s == 0) throw ConfigError("layer sizes must be positive");
        }
    }

    void check_input(const Eigen::MatrixXd &X) const {
        if (X.rows() != static_cast<Eigen::Index>(sizes_.front())) throw std::invalid_argument("input dimension mismatch");
        if (!X.allFinite()) throw std::invalid_argument("network input is not finite");
    }

    std::vector<size_t> sizes_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
    ModelMetadata meta_;
    InputTransform transform_ = InputTransform::SqrtDeficit;
};

/// Rows of (<A_s>, <A_s'>, <A_s A_s'>) with label |b| at the reference edge.
struct Dataset {
    std::vector<Triple> inputs;
    std::vector<double> labels;
    nlohmann::json provenance = nlohmann::json::object();

    size_t size() const { return labels.size(); }

    void push_back(const Triple &x, double label) {
        inputs.push_back(x);
        labels.push_back(label);
    }

    /// Inputs within [-1, 1] and labels within [0, b_max].
    void validate(double b_max) const {
        if (inputs.size() != labels.size()) throw ConfigError("dataset inputs and labels differ in length");
        for (size_t i = 0; i < size(); ++i) {
            for (double v : inputs[i]) {
                if (!(v >= -1.0 && v <= 1.0)) throw ConfigError("dataset input outside [-1, 1] in row " + std::to_string(i));
            }
            if (!(labels[i] >= 0.0 && labels[i] <= b_max)) {
                throw ConfigError("dataset label outside [0, b_max] in row " + std::to_string(i));
            }
        }
    }

    Eigen::MatrixXd input_matrix(std::span<const size_t> rows) const {
        Eigen::MatrixXd X(3, static_cast<Eigen::Index>(rows.size()));
        for (size_t c = 0; c < rows.size(); ++c) {
            for (Eigen::Index r = 0; r < 3; ++r) X(r, static_cast<Eigen::Index>(c)) = inputs[rows[c]][static_cast<size_t>(r)];
        }
        return X;
    }

    Eigen::RowVectorXd label_vector(std::span<const size_t> rows) const {
        Eigen::RowVectorXd y(static_cast<Eigen::Index>(rows.size()));
        for (size_t c = 0; c < rows.size(); ++c) y(static_cast<Eigen::Index>(c)) = labels[rows[c]];
        return y;
    }

    /// CSV `a_s,a_sp,a_corr,label` next to a `.json` provenance sidecar.
    void save(const std::filesystem::path &csv_path) const {
        CsvTable t;
        t.header = csv_header();
        for (size_t i = 0; i < size(); ++i) t.rows.push_back({inputs[i][0], inputs[i][1], inputs[i][2], labels[i]});
        atomic_write(csv_path, t.to_string());
        atomic_write(sidecar_path(csv_path), provenance.dump(1) + "\n");
    }

    static Dataset load(const std::filesystem::path &csv_path) {
        const CsvTable t = CsvTable::parse(read_file(csv_path), csv_header());
        Dataset d;
        for (const auto &row : t.rows) d.push_back({row[0], row[1], row[2]}, row[3]);
        const auto side = sidecar_path(csv_path);
        if (std::filesystem::exists(side)) {
            try {
                d.provenance = nlohmann::json::parse(read_file(side));
            } catch (const nlohmann::json::exception &e) {
                throw IoError("malformed dataset sidecar " + side.string() + ": " + e.what());
            }
        }
        return d;
    }

    static std::vector<std::string> csv_header() { return {"a_s", "a_sp", "a_corr", "label"}; }

    static std::filesystem::path sidecar_path(const std::filesystem::path &csv_path) {
        std::filesystem::path p = csv_path;
        p.replace_extension(".json");
        return p;
    }
};

struct TrainParams {
    size_t steps = 10000;
    size_t batch_size = 32;
    double learning_rate = 1e-3;
    // Learning rate decays geometrically to learning_rate * final_lr_fraction
    // at the last step; 1 keeps it constant.
    double final_lr_fraction = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    size_t eval_size = 50;
    size_t eval_every = 10;
    uint64_t seed = 1;

    void validate(size_t dataset_size) const {
        if (steps == 0 || batch_size == 0 || eval_every == 0) throw ConfigError("training steps, batch and eval interval must be positive");
        if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
        if (!(final_lr_fraction > 0 && final_lr_fraction <= 1)) throw ConfigError("final_lr_fraction must lie in (0, 1]");
        if (eval_size == 0 || eval_size >= dataset_size) {
            throw ConfigError("eval split of " + std::to_string(eval_size) + " rows needs a larger dataset (" +
                              std::to_string(dataset_size) + " rows)");
        }
    }
};

struct LossTrace {
    std::vector<double> train;  // minibatch loss at every step
    std::vector<size_t> eval_steps;
    std::vector<double> eval;

    /// Mean eval loss over steps in (end - window, end].
    double eval_window_mean(size_t end, size_t window) const {
        double sum = 0;
        size_t n = 0;
        for (size_t i = 0; i < eval.size(); ++i) {
            if (eval_steps[i] <= end && eval_steps[i] + window > end) {
                sum += eval[i];
                ++n;
            }
        }
        if (n == 0) throw std::invalid_argument("no eval records in window ending at step " + std::to_string(end));
        return sum / static_cast<double>(n);
    }

    /// Relative change of the windowed eval loss between end - span and end.
    double eval_relative_change(size_t end, size_t span = 2000, size_t window = 500) const {
        if (end < span) throw std::invalid_argument("trace shorter than the comparison span");
        const double now = eval_window_mean(end, window);
        const double then = eval_window_mean(end - span, window);
        return std::abs(now - then) / std::max(then, 1e-300);
    }
};

struct TrainResult {
    RegressorModel model;  // best-eval checkpoint
    LossTrace trace;
    std::vector<size_t> train_rows;
    std::vector<size_t> eval_rows;
};

/// Adam on the mean squared error; evaluates every `eval_every` steps on a
/// held-out split and returns the parameters with the lowest eval loss.
inline TrainResult train(RegressorModel model, const Dataset &data, const TrainParams &hp) {
    hp.validate(data.size());
    TrainResult out;
    Rng rng = make_rng(derive_seed(hp.seed, 0x7EA1));
    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    out.eval_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(hp.eval_size));
    out.train_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(hp.eval_size), order.end());
    const Eigen::MatrixXd X_eval = data.input_matrix(out.eval_rows);
    const Eigen::RowVectorXd y_eval = data.label_vector(out.eval_rows);

    const size_t L = model.n_layers();
    Gradients g, m, v;
    for (size_t l = 0; l < L; ++l) {
        m.weights.push_back(Eigen::MatrixXd::Zero(model.weight(l).rows(), model.weight(l).cols()));
        m.biases.push_back(Eigen::VectorXd::Zero(model.bias(l).size()));
    }
    v = m;

    RegressorModel best = model;
    double best_eval = std::numeric_limits<double>::infinity();
    size_t best_step = 0;
    std::vector<size_t> batch(std::min(hp.batch_size, out.train_rows.size()));
    std::uniform_int_distribution<size_t> pick(0, out.train_rows.size() - 1);
    double b1t = 1.0, b2t = 1.0;
    for (size_t step = 1; step <= hp.steps; ++step) {
        for (auto &r : batch) r = out.train_rows[pick(rng)];
        const double loss = model.loss_and_gradients(data.input_matrix(batch), data.label_vector(batch), g);
        if (!std::isfinite(loss)) {
            throw NumericalError("training diverged at step " + std::to_string(step) + " (loss " + std::to_string(loss) +
                                 "); lower the learning rate");
        }
        out.trace.train.push_back(loss);
        b1t *= hp.beta1;
        b2t *= hp.beta2;
        const double progress = static_cast<double>(step - 1) / static_cast<double>(std::max<size_t>(1, hp.steps - 1));
        const double lr = hp.learning_rate * std::pow(hp.final_lr_fraction, progress) * std::sqrt(1.0 - b2t) / (1.0 - b1t);
        for (size_t l = 0; l < L; ++l) {
            m.weights[l] = hp.beta1 * m.weights[l] + (1 - hp.beta1) * g.weights[l];
            v.weights[l] = hp.beta2 * v.weights[l] + (1 - hp.beta2) * g.weights[l].cwiseAbs2();
            model.weight(l).array() -= lr * m.weights[l].array() / (v.weights[l].array().sqrt() + hp.epsilon);
            m.biases[l] = hp.beta1 * m.biases[l] + (1 - hp.beta1) * g.biases[l];
            v.biases[l] = hp.beta2 * v.biases[l] + (1 - hp.beta2) * g.biases[l].cwiseAbs2();
            model.bias(l).array() -= lr * m.biases[l].array() / (v.biases[l].array().sqrt() + hp.epsilon);
        }
        if (step % hp.eval_every == 0 || step == hp.steps) {
            const double ev = model.loss(X_eval, y_eval);
            if (!std::isfinite(ev)) throw NumericalError("eval loss is not finite at step " + std::to_string(step));
            out.trace.eval_steps.push_back(step);
            out.trace.eval.push_back(ev);
            if (ev < best_eval) {
                best_eval = ev;
                best = model;
                best_step = step;
            }
        }
    }
    out.model = std::move(best);
    ModelMetadata &md = out.model.metadata();
    md.steps = hp.steps;
    md.best_step = best_step;
    md.best_eval_loss = best_eval;
    md.final_eval_loss = out.trace.eval.back();
    const size_t tail = std::min<size_t>(100, out.trace.train.size());
    md.final_train_loss =
        std::accumulate(out.trace.train.end() - static_cast<std::ptrdiff_t>(tail), out.trace.train.end(), 0.0) /
        static_cast<double>(tail);
    md.learning_rate = hp.learning_rate;
    md.batch_size = hp.batch_size;
    return out;
}

}  // namespace toric

#endif  // TORIC_NEURAL_REGRESSOR_HPP
