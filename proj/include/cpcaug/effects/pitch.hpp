// cpcaug/effects/pitch.hpp

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
#include "cpcaug/audio/resample.hpp"

namespace cpcaug {

struct WsolaConfig {
  double window_ms = 25.0;  // analysis/synthesis frame
  double search_ms = 10.0;  // +- tolerance around the nominal input position
};

/// Waveform-similarity overlap-add: changes duration to `out_len` samples
/// while keeping local periodicity (hence pitch).
///
/// Frames of window_ms are laid down every half window in the output; each
/// one is read from the input near its nominal position, shifted within
/// +-search_ms to best match (by correlation) the natural continuation of the
/// previously copied frame. A periodic Hann window at 50% overlap sums to one,
/// so steady-state gain is exact.
inline std::vector<float> time_stretch(std::span<const float> x,
                                       std::size_t out_len, int sample_rate,
                                       const WsolaConfig& cfg = {}) {
  if (out_len == x.size()) return {x.begin(), x.end()};
  std::vector<float> out(out_len, 0.0f);
  if (x.empty() || out_len == 0) return out;

  std::size_t window = static_cast<std::size_t>(
      std::lround(cfg.window_ms * sample_rate / 1000.0));
  window = std::max<std::size_t>(window + (window & 1), 4);
  const std::size_t hop = window / 2;
  const auto tolerance = static_cast<std::int64_t>(
      std::lround(cfg.search_ms * sample_rate / 1000.0));
  const auto in_len = static_cast<std::int64_t>(x.size());
  const double in_per_out =
      static_cast<double>(x.size()) / static_cast<double>(out_len);

  std::vector<double> hann(window);
  for (std::size_t n = 0; n < window; ++n) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(n) /
                              static_cast<double>(window));
    hann[n] = s * s;
  }
  // Zero-padded copy so the inner loops need no bounds checks; every index
  // below stays within [-pad, in_len + pad).
  const auto pad = static_cast<std::int64_t>(2 * window);
  std::vector<double> padded(x.size() + 2 * static_cast<std::size_t>(pad), 0.0);
  std::copy(x.begin(), x.end(), padded.begin() + pad);
  const double* xp = padded.data() + pad;

  std::vector<double> acc(out_len + window, 0.0);
  std::vector<double> norm(out_len + window, 0.0);
  std::int64_t prev = 0;
  for (std::size_t m = 0; m * hop < out_len; ++m) {
    const auto nominal = static_cast<std::int64_t>(
        std::llround(static_cast<double>(m * hop) * in_per_out));
    std::int64_t chosen = nominal;
    if (m > 0) {
      const std::int64_t target = prev + static_cast<std::int64_t>(hop);
      double best = -HUGE_VAL;
      for (std::int64_t d = -tolerance; d <= tolerance; ++d) {
        const std::int64_t cand = nominal + d;
        if (cand < 0 || cand >= in_len) continue;
        const double* a = xp + target;
        const double* b = xp + cand;
        double corr = 0.0;
        for (std::size_t n = 0; n < window; ++n) corr += a[n] * b[n];
        if (corr > best) {
          best = corr;
          chosen = cand;
        }
      }
      if (best == -HUGE_VAL) chosen = std::clamp<std::int64_t>(nominal, 0, in_len - 1);
    }
    const std::size_t base = m * hop;
    for (std::size_t n = 0; n < window; ++n) {
      acc[base + n] += hann[n] * xp[chosen + static_cast<std::int64_t>(n)];
      norm[base + n] += hann[n];
    }
    prev = chosen;
  }
  for (std::size_t i = 0; i < out_len; ++i) {
    out[i] = norm[i] > 1e-9 ? static_cast<float>(acc[i] / norm[i]) : 0.0f;
  }
  return out;
}

/// Shifts pitch by `cents` (1/100 semitone) keeping the length: resample by
/// 2^(-cents/1200), then time-stretch back to the original length.
inline AudioBuffer pitch_shift(const AudioBuffer& buf, int cents,
                               const WsolaConfig& cfg = {}) {
  require(std::abs(cents) <= 1200, "pitch_shift: |cents| must be <= 1200");
  if (cents == 0 || buf.empty()) return buf;
  const double factor = std::exp2(cents / 1200.0);
  const auto squeezed_len = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(static_cast<double>(buf.size()) / factor)));
  auto squeezed = resample_to_length(buf.samples(), squeezed_len);
  auto out = time_stretch(squeezed, buf.size(), buf.sample_rate(), cfg);
  return AudioBuffer(std::move(out), buf.sample_rate());
}

}  // namespace cpcaug
