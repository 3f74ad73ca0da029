// tests/support/oracles.hpp

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

// Test-only measurement helpers. Nothing here calls into the library's DSP,
// so these act as independent oracles for spectral contracts.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace cpcaug::oracle {

inline std::vector<float> sine(double freq_hz, int rate, std::size_t n,
                               double amplitude = 1.0, double phase = 0.0) {
  std::vector<float> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<float>(
        amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * i / rate + phase));
  }
  return x;
}

inline std::vector<float> white_noise(std::size_t n, std::uint32_t seed,
                                      double amplitude = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  std::vector<float> x(n);
  for (auto& v : x) v = static_cast<float>(dist(gen));
  return x;
}

inline double rms(std::span<const float> x) {
  double acc = 0.0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

inline double db_ratio(std::span<const float> num, std::span<const float> den) {
  return 20.0 * std::log10(rms(num) / rms(den));
}

/// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const auto u = a[i + j];
        const auto v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

/// One-sided power spectrum of x zero-padded to a power of two >= pad * n.
struct Spectrum {
  std::vector<double> power;
  double bin_hz = 0.0;
};

inline Spectrum power_spectrum(std::span<const float> x, int rate,
                               bool hann = false, std::size_t pad = 1) {
  std::size_t n = 1;
  while (n < x.size() * pad) n <<= 1;
  std::vector<std::complex<double>> a(n);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double w = 1.0;
    if (hann) w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (x.size() - 1));
    a[i] = x[i] * w;
  }
  fft(a);
  Spectrum s;
  s.bin_hz = static_cast<double>(rate) / static_cast<double>(n);
  s.power.resize(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) s.power[k] = std::norm(a[k]);
  return s;
}

/// Frequency of the strongest spectral peak above min_hz, refined by
/// parabolic interpolation of the log magnitude.
inline double peak_frequency(std::span<const float> x, int rate, double min_hz = 20.0) {
  const Spectrum s = power_spectrum(x, rate, true, 4);
  std::size_t best = static_cast<std::size_t>(min_hz / s.bin_hz) + 1;
  for (std::size_t k = best; k + 1 < s.power.size(); ++k) {
    if (s.power[k] > s.power[best]) best = k;
  }
  double delta = 0.0;
  if (best > 0 && best + 1 < s.power.size()) {
    const double a = std::log(s.power[best - 1] + 1e-300);
    const double b = std::log(s.power[best] + 1e-300);
    const double c = std::log(s.power[best + 1] + 1e-300);
    const double denom = a - 2 * b + c;
    if (denom != 0.0) delta = 0.5 * (a - c) / denom;
  }
  return (static_cast<double>(best) + delta) * s.bin_hz;
}

/// Energy of the spectrum within [lo_hz, hi_hz].
inline double band_energy(const Spectrum& s, double lo_hz, double hi_hz) {
  double e = 0.0;
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    const double f = k * s.bin_hz;
    if (f >= lo_hz && f <= hi_hz) e += s.power[k];
  }
  return e;
}

}  // namespace cpcaug::oracle
