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

#ifndef TORIC_COMMON_HPP
#define TORIC_COMMON_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace toric {

/// Invalid user configuration (bad sizes, ranges, missing fields).
class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to converge or produced non-finite values.
class NumericalError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Reading or writing a file failed, or a file was malformed.
class IoError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Child seed for stream `stream` of `master`. Streams never depend on
/// thread scheduling, which is what keeps runs bit-identical across thread
/// counts.
inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream * 0xD6E8FEB86659FD93ULL + 1));
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t sub) {
    return derive_seed(derive_seed(master, stream), sub);
}

inline Rng make_rng(uint64_t seed) { return Rng(splitmix64(seed)); }

/// Runs body(i) for i in [0, n). Results must be written to per-index slots;
/// the first exception thrown by any worker is rethrown here.
template <typename Body>
void parallel_for(size_t n, size_t threads, Body &&body) {
    threads = std::max<size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        });
    }
    for (auto &th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// Mean and standard error of equally sized batch means.
struct BatchStats {
    double mean = 0;
    double std_error = 0;
};

inline BatchStats batch_stats(const std::vector<double> &batch_means) {
    BatchStats out;
    const size_t n = batch_means.size();
    if (n == 0) return out;
    double sum = 0;
    for (double x : batch_means) sum += x;
    out.mean = sum / static_cast<double>(n);
    if (n < 2) return out;
    double ss = 0;
    for (double x : batch_means) ss += (x - out.mean) * (x - out.mean);
    out.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    return out;
}

}  // namespace toric

#endif  // TORIC_COMMON_HPP
