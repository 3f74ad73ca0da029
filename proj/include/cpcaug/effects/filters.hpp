// cpcaug/effects/filters.hpp

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
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "cpcaug/core/error.hpp"

namespace cpcaug {

/// Normalized second-order section (a0 == 1).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  std::complex<double> response(double freq_hz, double sample_rate) const {
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
  }
};

/// Cascade of biquads run in transposed direct form II with double state.
class SosFilter {
 public:
  SosFilter() = default;
  explicit SosFilter(std::vector<Biquad> sections)
      : sections_(std::move(sections)) {}

  void append(const SosFilter& other) {
    sections_.insert(sections_.end(), other.sections_.begin(),
                     other.sections_.end());
  }

  bool empty() const { return sections_.empty(); }
  const std::vector<Biquad>& sections() const { return sections_; }

  double magnitude(double freq_hz, double sample_rate) const {
    std::complex<double> h = 1.0;
    for (const auto& s : sections_) h *= s.response(freq_hz, sample_rate);
    return std::abs(h);
  }

  std::vector<float> apply(std::span<const float> x) const {
    std::vector<double> y(x.begin(), x.end());
    for (const auto& s : sections_) {
      double z1 = 0.0, z2 = 0.0;
      for (double& v : y) {
        const double in = v;
        const double out = s.b0 * in + z1;
        z1 = s.b1 * in - s.a1 * out + z2;
        z2 = s.b2 * in - s.a2 * out;
        v = out;
      }
    }
    return {y.begin(), y.end()};
  }

 private:
  std::vector<Biquad> sections_;
};

namespace filter_design {

inline double prewarp(double freq_hz, double sample_rate) {
  return std::tan(std::numbers::pi * freq_hz / sample_rate);
}

/// Butterworth low- or high-pass of the given order via the bilinear
/// transform with the cutoff prewarped.
inline SosFilter butterworth(int order, double cutoff_hz, double sample_rate,
                             bool highpass) {
  require(order >= 1, "butterworth: order must be >= 1");
  require(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2,
          "butterworth: cutoff outside (0, Nyquist)");
  const double k = prewarp(cutoff_hz, sample_rate);
  const double k2 = k * k;
  std::vector<Biquad> sections;
  for (int i = 0; i < order / 2; ++i) {
    const double q =
        1.0 / (2.0 * std::cos(std::numbers::pi * (2 * i + 1) / (2.0 * order)));
    const double norm = 1.0 / (1.0 + k / q + k2);
    Biquad s;
    if (highpass) {
      s.b0 = norm;
      s.b1 = -2.0 * norm;
    } else {
      s.b0 = k2 * norm;
      s.b1 = 2.0 * s.b0;
    }
    s.b2 = s.b0;
    s.a1 = 2.0 * (k2 - 1.0) * norm;
    s.a2 = (1.0 - k / q + k2) * norm;
    sections.push_back(s);
  }
  if (order % 2 == 1) {
    Biquad s;
    s.b0 = highpass ? 1.0 / (k + 1.0) : k / (k + 1.0);
    s.b1 = highpass ? -s.b0 : s.b0;
    s.a1 = (k - 1.0) / (k + 1.0);
    sections.push_back(s);
  }
  return SosFilter(std::move(sections));
}

/// Second-order notch at center_hz whose -3 dB bandwidth is width_hz.
inline Biquad notch(double center_hz, double width_hz, double sample_rate) {
  const double w0 = 2.0 * std::numbers::pi * center_hz / sample_rate;
  const double q = center_hz / width_hz;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Biquad s;
  s.b0 = 1.0 / a0;
  s.b1 = -2.0 * std::cos(w0) / a0;
  s.b2 = 1.0 / a0;
  s.a1 = s.b1;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

}  // namespace filter_design

}  // namespace cpcaug
