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

#ifndef TORIC_TOOLS_RUN_CONFIG_HPP
#define TORIC_TOOLS_RUN_CONFIG_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "toric/toric.hpp"

namespace toric::cli {

/// Everything a command needs. Defaults, then the JSON file, then flags.
struct RunConfig {
    size_t k = 3;
    std::string distribution = "uniform";
    double b_max = 1.7;
    size_t n_examples = 7450;
    // "sampler" (Metropolis) or "enumeration" (exact, k <= 4).
    std::string triple_source = "sampler";
    MCParams mc{};
    TrainParams train{};
    std::string input_transform = "sqrt_deficit";
    size_t n_iter = 5;
    double deadband = 0.02;
    // Apply a model trained on another lattice size.
    bool allow_k_mismatch = false;
    double damping = 1.0;
    double noise_sigma = 0.0;
    std::vector<double> sigma_grid{0.0, 0.005, 0.01, 0.02};
    uint64_t seed = 1;
    size_t n_seeds = 1;
    std::vector<size_t> scaling_k{3, 4, 8, 12, 16, 20, 24};
    size_t er_k = 8;
    size_t er_points = 21;
    size_t er_trials = 4000;
    std::string disorder = "anchors";
    double disorder_parameter = 0.0;
    size_t phase_k = 16;
    double beta_min = 0.3;
    double beta_max = 0.6;
    size_t n_beta = 16;
    size_t realizations = 10;
    // Metropolis samples per (beta, realization) point of a phase scan.
    size_t phase_samples = 20000;
    size_t threads = 1;
    std::string output_dir;

    void validate() const {
        if (k < 2) throw ConfigError("k: must be at least 2");
        parse_distribution(distribution);
        if (triple_source != "sampler" && triple_source != "enumeration") {
            throw ConfigError("triple_source: expected 'sampler' or 'enumeration', got '" + triple_source + "'");
        }
        if (!(b_max > 0 && b_max <= kDefaultFieldCap)) throw ConfigError("b_max: must lie in (0, 5]");
        if (n_examples == 0) throw ConfigError("n_examples: must be positive");
        try {
            mc.validate();
        } catch (const ConfigError &e) {
            throw ConfigError(std::string("mc: ") + e.what());
        }
        try {
            train.validate(n_examples);
        } catch (const ConfigError &e) {
            throw ConfigError(std::string("train: ") + e.what());
        }
        parse_transform(input_transform);
        if (n_iter == 0) throw ConfigError("n_iter: must be at least 1");
        if (!(deadband >= 0)) throw ConfigError("deadband: must be non-negative");
        if (!(damping > 0 && damping <= 1)) throw ConfigError("damping: must lie in (0, 1]");
        if (!(noise_sigma >= 0)) throw ConfigError("noise_sigma: must be non-negative");
        for (double s : sigma_grid) {
            if (!(s >= 0)) throw ConfigError("sigma_grid: entries must be non-negative");
        }
        if (n_seeds == 0) throw ConfigError("n_seeds: must be positive");
        for (size_t kk : scaling_k) {
            if (kk < 2) throw ConfigError("scaling_k: entries must be at least 2");
        }
        if (er_points < 10) throw ConfigError("er_points: the quartic fit needs at least 10 points");
        if (er_trials < 2) throw ConfigError("er_trials: must be at least 2");
        if (disorder != "anchors") parse_disorder(disorder);
        if (!(disorder_parameter >= 0 && disorder_parameter <= 1)) {
            throw ConfigError("disorder_parameter: must lie in [0, 1]");
        }
        if (phase_k < 4) throw ConfigError("phase_k: must be at least 4");
        if (!(beta_min >= 0 && beta_max > beta_min)) throw ConfigError("beta_min/beta_max: need 0 <= beta_min < beta_max");
        if (n_beta < 3) throw ConfigError("n_beta: must be at least 3");
        if (phase_samples < 100) throw ConfigError("phase_samples: must be at least 100");
        if (realizations < 2) throw ConfigError("realizations: must be at least 2");
        if (threads == 0) throw ConfigError("threads: must be positive");
    }
};

inline nlohmann::json to_json(const RunConfig &c) {
    return {{"k", c.k},
            {"distribution", c.distribution},
            {"b_max", c.b_max},
            {"n_examples", c.n_examples},
            {"triple_source", c.triple_source},
            {"mc",
             {{"burn_in", c.mc.burn_in},
              {"n_samples", c.mc.n_samples},
              {"thinning", c.mc.thinning},
              {"n_batches", c.mc.n_batches},
              {"n_chains", c.mc.n_chains}}},
            {"train",
             {{"steps", c.train.steps},
              {"batch_size", c.train.batch_size},
              {"learning_rate", c.train.learning_rate},
              {"final_lr_fraction", c.train.final_lr_fraction},
              {"eval_size", c.train.eval_size},
              {"eval_every", c.train.eval_every},
              {"input_transform", c.input_transform}}},
            {"n_iter", c.n_iter},
            {"deadband", c.deadband},
            {"allow_k_mismatch", c.allow_k_mismatch},
            {"damping", c.damping},
            {"noise_sigma", c.noise_sigma},
            {"sigma_grid", c.sigma_grid},
            {"seed", c.seed},
            {"n_seeds", c.n_seeds},
            {"scaling_k", c.scaling_k},
            {"er_k", c.er_k},
            {"er_points", c.er_points},
            {"er_trials", c.er_trials},
            {"disorder", c.disorder},
            {"disorder_parameter", c.disorder_parameter},
            {"phase_k", c.phase_k},
            {"beta_min", c.beta_min},
            {"beta_max", c.beta_max},
            {"n_beta", c.n_beta},
            {"realizations", c.realizations},
            {"phase_samples", c.phase_samples}};
}

namespace detail {

template <typename T>
void read_field(const nlohmann::json &j, const char *key, T &out, const std::string &path) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception &) {
        throw ConfigError(path + key + ": wrong type (" + j.at(key).dump() + ")");
    }
}

inline void check_keys(const nlohmann::json &j, const std::set<std::string> &known, const std::string &path) {
    if (!j.is_object()) throw ConfigError((path.empty() ? std::string("config") : path) + ": expected a JSON object");
    for (const auto &item : j.items()) {
        if (!known.count(item.key())) throw ConfigError(path + item.key() + ": unknown configuration field");
    }
}

}  // namespace detail

/// Overrides fields of `c` present in `j`. Unknown keys are errors.
inline void apply_json(const nlohmann::json &j, RunConfig &c) {
    using detail::read_field;
    detail::check_keys(j,
                       {"k", "distribution", "b_max", "n_examples", "triple_source", "mc", "train", "n_iter",
                        "deadband", "allow_k_mismatch", "damping", "noise_sigma", "sigma_grid", "seed", "n_seeds",
                        "scaling_k", "er_k", "er_points", "er_trials", "disorder", "disorder_parameter", "phase_k",
                        "beta_min", "beta_max", "n_beta", "realizations", "phase_samples", "threads", "output_dir"},
                       "");
    read_field(j, "k", c.k, "");
    read_field(j, "distribution", c.distribution, "");
    read_field(j, "b_max", c.b_max, "");
    read_field(j, "n_examples", c.n_examples, "");
    read_field(j, "triple_source", c.triple_source, "");
    if (j.contains("mc")) {
        const auto &m = j.at("mc");
        detail::check_keys(m, {"burn_in", "n_samples", "thinning", "n_batches", "n_chains"}, "mc.");
        read_field(m, "burn_in", c.mc.burn_in, "mc.");
        read_field(m, "n_samples", c.mc.n_samples, "mc.");
        read_field(m, "thinning", c.mc.thinning, "mc.");
        read_field(m, "n_batches", c.mc.n_batches, "mc.");
        read_field(m, "n_chains", c.mc.n_chains, "mc.");
    }
    if (j.contains("train")) {
        const auto &t = j.at("train");
        detail::check_keys(t,
                           {"steps", "batch_size", "learning_rate", "final_lr_fraction", "eval_size", "eval_every",
                            "input_transform"},
                           "train.");
        read_field(t, "steps", c.train.steps, "train.");
        read_field(t, "batch_size", c.train.batch_size, "train.");
        read_field(t, "learning_rate", c.train.learning_rate, "train.");
        read_field(t, "final_lr_fraction", c.train.final_lr_fraction, "train.");
        read_field(t, "eval_size", c.train.eval_size, "train.");
        read_field(t, "eval_every", c.train.eval_every, "train.");
        read_field(t, "input_transform", c.input_transform, "train.");
    }
    read_field(j, "n_iter", c.n_iter, "");
    read_field(j, "deadband", c.deadband, "");
    read_field(j, "allow_k_mismatch", c.allow_k_mismatch, "");
    read_field(j, "damping", c.damping, "");
    read_field(j, "noise_sigma", c.noise_sigma, "");
    read_field(j, "sigma_grid", c.sigma_grid, "");
    read_field(j, "seed", c.seed, "");
    read_field(j, "n_seeds", c.n_seeds, "");
    read_field(j, "scaling_k", c.scaling_k, "");
    read_field(j, "er_k", c.er_k, "");
    read_field(j, "er_points", c.er_points, "");
    read_field(j, "er_trials", c.er_trials, "");
    read_field(j, "disorder", c.disorder, "");
    read_field(j, "disorder_parameter", c.disorder_parameter, "");
    read_field(j, "phase_k", c.phase_k, "");
    read_field(j, "beta_min", c.beta_min, "");
    read_field(j, "beta_max", c.beta_max, "");
    read_field(j, "n_beta", c.n_beta, "");
    read_field(j, "realizations", c.realizations, "");
    read_field(j, "phase_samples", c.phase_samples, "");
    read_field(j, "threads", c.threads, "");
    read_field(j, "output_dir", c.output_dir, "");
}

}  // namespace toric::cli

#endif  // TORIC_TOOLS_RUN_CONFIG_HPP
