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

#ifndef TORIC_TOOLS_MANIFEST_HPP
#define TORIC_TOOLS_MANIFEST_HPP

#include <openssl/evp.h>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "toric/toric.hpp"

namespace toric::cli {

inline constexpr const char *kToolVersion = "1.0.0";

inline std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
        throw IoError("SHA-256 computation failed");
    }
    static const char *hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

inline std::string sha256_file(const std::filesystem::path &p) { return sha256_hex(read_file(p)); }

/// Run record written last into the output directory. Paths of outputs are
/// relative to that directory; inputs keep the path they were given with.
/// Nothing time-dependent is stored, so reruns produce identical bytes.
class Manifest {
   public:
    Manifest(std::string command, nlohmann::json config) : command_(std::move(command)), config_(std::move(config)) {}

    void add_input(const std::filesystem::path &p) { inputs_.push_back({p.string(), sha256_file(p)}); }

    void add_output(const std::filesystem::path &dir, const std::string &relative) {
        outputs_.push_back({relative, sha256_file(dir / relative)});
    }

    void write(const std::filesystem::path &dir) const {
        nlohmann::json j;
        j["command"] = command_;
        j["config"] = config_;
        j["versions"] = {{"tool", kToolVersion},
                         {"model_format", kModelFormatVersion},
                         {"coefficient_basis", kCoefficientBasisVersion}};
        auto list = [](const std::vector<std::pair<std::string, std::string>> &v) {
            nlohmann::json a = nlohmann::json::array();
            for (const auto &[path, hash] : v) a.push_back({{"path", path}, {"sha256", hash}});
            return a;
        };
        j["inputs"] = list(inputs_);
        j["outputs"] = list(outputs_);
        atomic_write(dir / "manifest.json", j.dump(1) + "\n");
    }

   private:
    std::string command_;
    nlohmann::json config_;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<std::pair<std::string, std::string>> outputs_;
};

struct VerifyResult {
    bool ok = true;
    std::vector<std::string> problems;
};

inline VerifyResult verify_manifest(const std::filesystem::path &dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(dir / "manifest.json"));
    } catch (const nlohmann::json::exception &e) {
        throw IoError(std::string("malformed manifest: ") + e.what());
    }
    VerifyResult r;
    auto check = [&](const std::filesystem::path &p, const std::string &expected, const std::string &label) {
        if (!std::filesystem::exists(p)) {
            r.ok = false;
            r.problems.push_back(label + " missing: " + p.string());
        } else if (sha256_file(p) != expected) {
            r.ok = false;
            r.problems.push_back(label + " changed: " + p.string());
        }
    };
    try {
        for (const auto &e : j.at("inputs")) check(e.at("path").get<std::string>(), e.at("sha256"), "input");
        for (const auto &e : j.at("outputs")) check(dir / e.at("path").get<std::string>(), e.at("sha256"), "output");
    } catch (const nlohmann::json::exception &e) {
        throw IoError(std::string("malformed manifest: ") + e.what());
    }
    return r;
}

}  // namespace toric::cli

#endif  // TORIC_TOOLS_MANIFEST_HPP
