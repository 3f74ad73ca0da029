// cpcaug/effects/basic.hpp

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
#include <limits>
#include <string>
#include <vector>

#include "cpcaug/audio/buffer.hpp"
#include "cpcaug/effects/filters.hpp"

namespace cpcaug {

/// Order of each Butterworth edge used by band_pass (so the full band-pass is
/// twice this order when both edges are active).
inline constexpr int kBandPassEdgeOrder = 8;

inline std::size_t drop_length(double duration_ms, int sample_rate) {
  return static_cast<std::size_t>(std::lround(duration_ms * sample_rate / 1000.0));
}

/// Zeroes [start, start + duration) and leaves every other sample untouched.
inline AudioBuffer time_drop(const AudioBuffer& buf, std::size_t start,
                             double duration_ms = 50.0) {
  require(duration_ms >= 0.0, "time_drop: negative duration");
  const std::size_t len = drop_length(duration_ms, buf.sample_rate());
  if (len == 0) return buf;
  if (start > buf.size() || len > buf.size() - start) {
    fail(ErrorKind::kRange, "time_drop: window [" + std::to_string(start) +
                                ", " + std::to_string(start + len) +
                                ") exceeds buffer of " +
                                std::to_string(buf.size()) + " samples");
  }
  std::vector<float> out(buf.samples().begin(), buf.samples().end());
  std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(start), len, 0.0f);
  return AudioBuffer(std::move(out), buf.sample_rate());
}

/// `noise` repeated from `offset` (wrapping) to fill `length` samples.
inline std::vector<float> loop_crop(std::span<const float> noise,
                                    std::size_t offset, std::size_t length) {
  require(!noise.empty(), "loop_crop: empty noise", ErrorKind::kEmpty);
  std::vector<float> out(length);
  std::size_t pos = offset % noise.size();
  for (std::size_t i = 0; i < length; ++i) {
    out[i] = noise[pos];
    if (++pos == noise.size()) pos = 0;
  }
  return out;
}

/// Adds `noise` (looped or cropped to the signal length) scaled so that
/// rms_db(signal) - rms_db(scaled noise) == snr_db. +inf SNR adds nothing.
/// No clipping is applied.
inline AudioBuffer add_noise(const AudioBuffer& buf, const AudioBuffer& noise,
                             double snr_db) {
  require(noise.sample_rate() == buf.sample_rate(),
          "add_noise: sample rate mismatch (" +
              std::to_string(noise.sample_rate()) + " vs " +
              std::to_string(buf.sample_rate()) + ")");
  require(!std::isnan(snr_db), "add_noise: SNR is NaN");
  if (snr_db == std::numeric_limits<double>::infinity() || buf.empty()) {
    return buf;
  }
  require(!noise.empty(), "add_noise: empty noise", ErrorKind::kEmpty);
  const auto tiled = loop_crop(noise.samples(), 0, buf.size());
  const double noise_db = rms_db(tiled);
  if (!std::isfinite(noise_db)) {
    fail(ErrorKind::kEmpty, "add_noise: noise segment is silent");
  }
  const double signal_db = rms_db(buf);
  if (!std::isfinite(signal_db)) return buf;
  const double gain = std::pow(10.0, (signal_db - snr_db - noise_db) / 20.0);
  std::vector<float> out(buf.size());
  const auto x = buf.samples();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(x[i] + gain * tiled[i]);
  }
  return AudioBuffer(std::move(out), buf.sample_rate());
}

/// Notch removing the band [center - width/2, center + width/2]. Width 0 is
/// the identity.
inline AudioBuffer band_reject(const AudioBuffer& buf, double center_hz,
                               double width_hz) {
  require(width_hz >= 0.0, "band_reject: negative width");
  if (width_hz == 0.0) return buf;
  const double nyquist = buf.sample_rate() / 2.0;
  if (!(center_hz - width_hz / 2 >= 0.0) || !(center_hz + width_hz / 2 <= nyquist) ||
      !(center_hz > 0.0) || !(center_hz < nyquist)) {
    fail(ErrorKind::kRange, "band_reject: band around " +
                                std::to_string(center_hz) +
                                " Hz does not fit in (0, Nyquist)");
  }
  SosFilter f({filter_design::notch(center_hz, width_hz, buf.sample_rate())});
  return AudioBuffer(f.apply(buf.samples()), buf.sample_rate());
}

/// Butterworth band-pass built from a high-pass at low_hz and a low-pass at
/// high_hz. low_hz == 0 drops the high-pass, high_hz == Nyquist drops the
/// low-pass, so [0, Nyquist] is the identity.
inline SosFilter design_band_pass(double low_hz, double high_hz, int sample_rate,
                                  int edge_order = kBandPassEdgeOrder) {
  const double nyquist = sample_rate / 2.0;
  if (!(low_hz >= 0.0 && low_hz < high_hz && high_hz <= nyquist)) {
    fail(ErrorKind::kInvalidArgument,
         "band_pass: need 0 <= low < high <= Nyquist, got [" +
             std::to_string(low_hz) + ", " + std::to_string(high_hz) + "]");
  }
  SosFilter f;
  if (low_hz > 0.0) {
    f.append(filter_design::butterworth(edge_order, low_hz, sample_rate, true));
  }
  if (high_hz < nyquist) {
    f.append(filter_design::butterworth(edge_order, high_hz, sample_rate, false));
  }
  return f;
}

inline AudioBuffer band_pass(const AudioBuffer& buf, double low_hz,
                             double high_hz) {
  const SosFilter f = design_band_pass(low_hz, high_hz, buf.sample_rate());
  if (f.empty()) return buf;
  return AudioBuffer(f.apply(buf.samples()), buf.sample_rate());
}

}  // namespace cpcaug
