// cpcaug/core/rng.hpp

// Copyright 2026  The cpcaug Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <vector>

#include "cpcaug/core/error.hpp"

namespace cpcaug {

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based random stream addressed by (root seed, derivation path).
///
/// The stream key is a hash of the seed and every path element; draws are
/// mix64(key + n * golden) for n = 1, 2, ... . A stream therefore depends only
/// on its address, never on which thread created it or what other streams
/// consumed. Distributions are implemented here (not via <random>) so the
/// value sequence is identical across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t root_seed,
                     std::vector<std::uint64_t> path = {})
      : root_seed_(root_seed), path_(std::move(path)) {
    key_ = detail::mix64(root_seed_ ^ 0x6A09E667F3BCC908ULL);
    for (std::uint64_t p : path_) {
      key_ = detail::mix64(key_ ^ detail::mix64(p + detail::kGolden));
    }
  }

  RngStream(std::uint64_t root_seed, std::initializer_list<std::uint64_t> path)
      : RngStream(root_seed, std::vector<std::uint64_t>(path)) {}

  /// Fresh stream at path + [index]; independent of this stream's position.
  RngStream child(std::uint64_t index) const {
    std::vector<std::uint64_t> p = path_;
    p.push_back(index);
    return RngStream(root_seed_, std::move(p));
  }

  std::uint64_t root_seed() const { return root_seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }
  std::uint64_t draws() const { return counter_; }

  std::uint64_t next_u64() {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi]; returns lo when the interval is degenerate.
  double uniform(double lo, double hi) {
    if (!(hi > lo)) return lo;
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer on the closed interval [lo, hi] (rejection, unbiased).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    require(lo <= hi, "uniform_int: empty interval");
    const std::uint64_t span =
        static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == UINT64_MAX) return static_cast<std::int64_t>(next_u64());
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return lo + static_cast<std::int64_t>(v % range);
  }

  std::size_t index(std::size_t n) {
    require(n > 0, "index: empty range");
    return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1));
  }

  /// Standard normal via Box-Muller (one draw pair per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k) {
    require(k <= n, "sample_without_replacement: k > n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + index(n - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::uint64_t root_seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace cpcaug
