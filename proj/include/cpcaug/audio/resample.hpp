// cpcaug/audio/resample.hpp

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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "cpcaug/audio/buffer.hpp"

namespace cpcaug {

/// Kaiser-windowed sinc interpolation kernel, tabulated once.
///
/// The kernel spans +-kZeroCrossings samples at the lower of the two rates
/// (128 taps when upsampling, more when decimating). The cutoff sits at
/// kRolloff of the lower Nyquist frequency so the passband stays flat up to
/// 0.45 * min(rates).
class SincKernel {
 public:
  static constexpr int kZeroCrossings = 64;
  static constexpr int kSamplesPerCrossing = 256;
  static constexpr double kRolloff = 0.96;
  static constexpr double kKaiserBeta = 7.86;  // ~80 dB stopband

  static const SincKernel& instance() {
    static const SincKernel kernel;
    return kernel;
  }

  /// Kernel at distance u (in low-rate samples); zero for |u| >= crossings.
  double operator()(double u) const {
    u = std::abs(u) * kSamplesPerCrossing;
    const auto i = static_cast<std::size_t>(u);
    if (i + 1 >= table_.size()) return 0.0;
    const double frac = u - static_cast<double>(i);
    return table_[i] + frac * (table_[i + 1] - table_[i]);
  }

 private:
  SincKernel() {
    const std::size_t n = kZeroCrossings * kSamplesPerCrossing + 2;
    table_.resize(n);
    const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = static_cast<double>(i) / kSamplesPerCrossing;
      const double r = u / kZeroCrossings;
      if (r >= 1.0) {
        table_[i] = 0.0;
        continue;
      }
      const double x = kRolloff * u;
      const double sinc =
          x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      const double window =
          std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
      table_[i] = kRolloff * sinc * window;
    }
  }

  std::vector<double> table_;
};

/// Band-limited interpolation of x at positions n * num / den, n < out_len.
///
/// num / den is the input step per output sample, so den / num is the rate
/// ratio. Each output is normalized by its kernel weight sum; constant inputs
/// stay exactly constant, including at the edges.
inline std::vector<float> resample_positions(std::span<const float> x,
                                             std::size_t out_len,
                                             std::uint64_t num,
                                             std::uint64_t den) {
  std::vector<float> out(out_len, 0.0f);
  if (x.empty() || out_len == 0) return out;
  const SincKernel& kernel = SincKernel::instance();
  const double step = static_cast<double>(num) / static_cast<double>(den);
  const double scale = std::min(1.0, 1.0 / step);
  const double half = SincKernel::kZeroCrossings / scale;
  const auto len = static_cast<std::int64_t>(x.size());
  for (std::size_t n = 0; n < out_len; ++n) {
    // Exact rational position, then split into integer and fractional part.
    const std::uint64_t whole = (n * num) / den;
    const double frac =
        static_cast<double>((n * num) % den) / static_cast<double>(den);
    const double p = static_cast<double>(whole) + frac;
    const auto lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(p - half)));
    const auto hi =
        std::min<std::int64_t>(len - 1, static_cast<std::int64_t>(std::floor(p + half)));
    double acc = 0.0, wsum = 0.0;
    for (std::int64_t k = lo; k <= hi; ++k) {
      const double w = kernel((p - static_cast<double>(k)) * scale);
      acc += w * x[static_cast<std::size_t>(k)];
      wsum += w;
    }
    out[n] = wsum != 0.0 ? static_cast<float>(acc / wsum) : 0.0f;
  }
  return out;
}

/// Resamples to an exact output length (the rate ratio is out_len / len).
inline std::vector<float> resample_to_length(std::span<const float> x,
                                             std::size_t out_len) {
  if (out_len == x.size()) return {x.begin(), x.end()};
  return resample_positions(x, out_len, x.size(), out_len);
}

/// Output length for a rate change, round(len * target / source).
inline std::size_t resampled_length(std::size_t len, int source, int target) {
  const auto num = static_cast<std::uint64_t>(len) * 2 * static_cast<std::uint64_t>(target) +
                   static_cast<std::uint64_t>(source);
  return static_cast<std::size_t>(num / (2 * static_cast<std::uint64_t>(source)));
}

inline AudioBuffer resample(const AudioBuffer& buf, int target_rate) {
  require(target_rate > 0, "resample: target rate must be positive");
  if (target_rate == buf.sample_rate()) return buf;
  const std::size_t out_len =
      resampled_length(buf.size(), buf.sample_rate(), target_rate);
  auto out = resample_positions(buf.samples(), out_len,
                                static_cast<std::uint64_t>(buf.sample_rate()),
                                static_cast<std::uint64_t>(target_rate));
  return AudioBuffer(std::move(out), target_rate);
}

}  // namespace cpcaug
