// cpcaug/audio/buffer.hpp

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
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpcaug/core/error.hpp"

namespace cpcaug {

/// Mono waveform in normalized full scale, plus its sample rate.
///
/// Samples are stored as float; values outside [-1, 1] are legal inside an
/// effect chain and only clamped when written as int16.
class AudioBuffer {
 public:
  AudioBuffer() = default;

  AudioBuffer(std::vector<float> samples, int sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    require(sample_rate_ > 0, "AudioBuffer: sample rate must be positive");
  }

  std::span<const float> samples() const { return samples_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  float operator[](std::size_t i) const { return samples_[i]; }

  double duration_seconds() const {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  /// Moves the samples out, leaving this buffer empty.
  std::vector<float> release() && { return std::move(samples_); }

  bool all_finite() const {
    for (float s : samples_) {
      if (!std::isfinite(s)) return false;
    }
    return true;
  }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  std::vector<float> samples_;
  int sample_rate_ = 16000;
};

inline void ensure_finite(const AudioBuffer& buf, const char* where) {
  if (!buf.all_finite()) {
    fail(ErrorKind::kNumeric, std::string(where) + ": non-finite sample");
  }
}

inline double mean_square(std::span<const float> x) {
  double acc = 0.0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

/// 20*log10(RMS). Silence gives -infinity.
inline double rms_db(std::span<const float> x) {
  require(!x.empty(), "rms_db: empty buffer", ErrorKind::kEmpty);
  const double ms = mean_square(x);
  if (ms <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ms);
}

inline double rms_db(const AudioBuffer& buf) { return rms_db(buf.samples()); }

/// Copy of `x` cut or zero-padded to exactly `length` samples.
inline std::vector<float> fit_length(std::span<const float> x,
                                     std::size_t length) {
  std::vector<float> out(length, 0.0f);
  const std::size_t n = std::min(length, x.size());
  std::copy_n(x.begin(), n, out.begin());
  return out;
}

}  // namespace cpcaug
