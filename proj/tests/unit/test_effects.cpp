// tests/unit/test_effects.cpp

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

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>

#include "cpcaug/core/rng.hpp"
#include "cpcaug/effects/basic.hpp"
#include "cpcaug/effects/pitch.hpp"
#include "cpcaug/effects/reverb.hpp"
#include "cpcaug/noise/bank.hpp"
#include "support/oracles.hpp"

using namespace cpcaug;

namespace {

constexpr int kRate = 16000;

AudioBuffer tone(double hz, double seconds = 1.0, double amp = 0.5) {
  return AudioBuffer(oracle::sine(hz, kRate, static_cast<std::size_t>(seconds * kRate), amp),
                     kRate);
}

// Steady-state level change in dB, skipping `skip` leading samples so filter
// start-up transients do not count.
double gain_db(const AudioBuffer& in, const AudioBuffer& out, std::size_t skip = 0) {
  std::span<const float> a(in.samples().data() + skip, in.size() - skip);
  std::span<const float> b(out.samples().data() + skip, out.size() - skip);
  return oracle::db_ratio(b, a);
}

bool bit_equal(const AudioBuffer& a, const AudioBuffer& b) {
  if (a.size() != b.size() || a.sample_rate() != b.sample_rate()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint32_t>(a[i]) != std::bit_cast<std::uint32_t>(b[i])) return false;
  }
  return true;
}

}  // namespace

// --- pitch -----------------------------------------------------------------

TEST(PitchShift, ZeroCentsIsIdentity) {
  const AudioBuffer x(oracle::white_noise(8000, 1, 0.3), kRate);
  const AudioBuffer y = pitch_shift(x, 0);
  ASSERT_EQ(y.size(), x.size());
  std::vector<float> diff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) diff[i] = y[i] - x[i];
  const double r = oracle::rms(diff);
  EXPECT_TRUE(r == 0.0 || 20 * std::log10(r / oracle::rms(x.samples())) < -60.0);
}

TEST(PitchShift, OctaveUpAndDown) {
  const AudioBuffer x = tone(440.0);
  const AudioBuffer up = pitch_shift(x, 1200);
  const AudioBuffer down = pitch_shift(x, -1200);
  EXPECT_EQ(up.size(), x.size());
  EXPECT_EQ(down.size(), x.size());
  EXPECT_NEAR(oracle::peak_frequency(up.samples(), kRate), 880.0, 0.02 * 880.0);
  EXPECT_NEAR(oracle::peak_frequency(down.samples(), kRate), 220.0, 0.02 * 220.0);
}

TEST(PitchShift, IntermediateShiftsScaleFrequency) {
  RngStream rng(77);
  for (int trial = 0; trial < 6; ++trial) {
    const int cents = static_cast<int>(rng.uniform_int(-700, 700));
    const double f0 = rng.uniform(200.0, 900.0);
    const AudioBuffer y = pitch_shift(tone(f0), cents);
    const double expected = f0 * std::pow(2.0, cents / 1200.0);
    EXPECT_NEAR(oracle::peak_frequency(y.samples(), kRate), expected, 0.02 * expected)
        << cents << " cents from " << f0 << " Hz";
  }
}

TEST(PitchShift, RejectsBeyondOneOctave) {
  EXPECT_THROW(pitch_shift(tone(440.0, 0.1), 1201), Error);
  EXPECT_THROW(pitch_shift(tone(440.0, 0.1), -1201), Error);
}

TEST(PitchShift, ShortBuffersKeepLength) {
  for (std::size_t n : {1u, 7u, 100u, 399u, 401u, 1000u}) {
    const AudioBuffer x(oracle::white_noise(n, 9), kRate);
    for (int c : {-1200, -300, 1, 300, 1200}) {
      const AudioBuffer y = pitch_shift(x, c);
      ASSERT_EQ(y.size(), n);
      ASSERT_TRUE(y.all_finite());
    }
  }
}

// --- reverb ----------------------------------------------------------------

namespace {

// Samples until the Schroeder backward-integrated energy of the wet tail
// falls 60 dB below its start.
std::size_t decay_time_60db(const AudioBuffer& y) {
  std::vector<double> edc(y.size() + 1, 0.0);
  for (std::size_t i = y.size(); i-- > 1;) edc[i] = edc[i + 1] + double(y[i]) * y[i];
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (edc[i] < 1e-6 * edc[1]) return i;
  }
  return y.size();
}

}  // namespace

TEST(Reverb, SilenceInSilenceOut) {
  const AudioBuffer z(std::vector<float>(4000, 0.0f), kRate);
  for (double room : {0.0, 50.0, 100.0}) {
    const AudioBuffer y = reverb(z, room);
    ASSERT_EQ(y.size(), z.size());
    for (float v : y.samples()) ASSERT_EQ(v, 0.0f);
  }
}

TEST(Reverb, LargerRoomDecaysLonger) {
  std::vector<float> imp(16 * kRate, 0.0f);
  imp[0] = 1.0f;
  const AudioBuffer x(imp, kRate);
  const std::size_t t100 = decay_time_60db(reverb(x, 100.0));
  const std::size_t t20 = decay_time_60db(reverb(x, 20.0));
  EXPECT_LT(t100, x.size()) << "buffer too short to observe decay";
  EXPECT_GT(t100, t20);
}

TEST(Reverb, BoundedOnWhiteNoise) {
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    const AudioBuffer x(oracle::white_noise(2 * kRate, seed), kRate);
    const AudioBuffer y = reverb(x, 100.0);
    ASSERT_TRUE(y.all_finite());
    float peak = 0.0f;
    for (float v : y.samples()) peak = std::max(peak, std::abs(v));
    EXPECT_LT(peak, 4.0f) << "seed " << seed;
  }
}

TEST(Reverb, FeedbackMapAndRange) {
  EXPECT_DOUBLE_EQ(reverb_feedback(0.0), 0.7);
  EXPECT_DOUBLE_EQ(reverb_feedback(100.0), 0.98);
  EXPECT_DOUBLE_EQ(reverb_feedback(50.0), 0.84);
  EXPECT_THROW(reverb(tone(100.0, 0.01), 100.5), Error);
  EXPECT_THROW(reverb(tone(100.0, 0.01), -1.0), Error);
}

TEST(Reverb, HalfDryAtTimeZero) {
  std::vector<float> imp(100, 0.0f);
  imp[0] = 1.0f;
  // Every comb delay exceeds 100 samples, so only the dry path appears.
  const AudioBuffer y = reverb(AudioBuffer(imp, kRate), 60.0);
  EXPECT_FLOAT_EQ(y[0], 0.5f);
  for (std::size_t i = 1; i < y.size(); ++i) EXPECT_EQ(y[i], 0.0f);
}

// --- band reject -------------------------------------------------------------

TEST(BandReject, ZeroWidthIsBitIdentical) {
  const AudioBuffer x(oracle::white_noise(1000, 4), kRate);
  EXPECT_TRUE(bit_equal(band_reject(x, 1000.0, 0.0), x));
}

TEST(BandReject, CenterAndOffBand) {
  const AudioBuffer x = tone(1000.0);
  EXPECT_LE(gain_db(x, band_reject(x, 1000.0, 150.0)), -20.0);
  EXPECT_NEAR(gain_db(x, band_reject(x, 3000.0, 150.0)), 0.0, 1.0);
}

TEST(BandReject, RandomCentersAndWidths) {
  RngStream rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const double width = rng.uniform(20.0, 150.0);
    const double center = rng.uniform(width / 2 + 150.0, kRate / 2.0 - width / 2 - 300.0);
    const std::size_t skip = kRate / 4;
    const AudioBuffer at = tone(center, 1.5);
    EXPECT_LE(gain_db(at, band_reject(at, center, width), skip), -20.0)
        << "center " << center << " width " << width;
    // One width outside either band edge.
    for (double f : {center - 1.5 * width, center + 1.5 * width}) {
      if (f <= 20.0 || f >= kRate / 2.0 - 20.0) continue;
      const AudioBuffer probe = tone(f, 1.5);
      EXPECT_NEAR(gain_db(probe, band_reject(probe, center, width), skip), 0.0, 1.0)
          << "probe " << f << " center " << center << " width " << width;
    }
  }
}

TEST(BandReject, BandOutsideNyquistIsRangeError) {
  const AudioBuffer x = tone(1000.0, 0.1);
  try {
    band_reject(x, 7990.0, 150.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kRange);
  }
  EXPECT_THROW(band_reject(x, 1000.0, -1.0), Error);
}

// --- band pass ---------------------------------------------------------------

TEST(BandPass, CanonicalLowBand) {
  const std::size_t skip = kRate / 2;
  const AudioBuffer in150 = tone(150.0, 2.0);
  const AudioBuffer in1k = tone(1000.0, 2.0);
  EXPECT_GE(gain_db(in150, band_pass(in150, 80.0, 240.0), skip), -3.0);
  EXPECT_LE(gain_db(in1k, band_pass(in1k, 80.0, 240.0), skip), -20.0);
}

TEST(BandPass, FullRangeIsTransparent) {
  for (double f = 100.0; f <= 0.4 * kRate; f *= 1.7) {
    const AudioBuffer x = tone(f);
    EXPECT_NEAR(gain_db(x, band_pass(x, 0.0, kRate / 2.0)), 0.0, 1.0) << f;
  }
}

TEST(BandPass, LowZeroIsLowPass) {
  const AudioBuffer dc(std::vector<float>(kRate, 0.5f), kRate);
  const AudioBuffer y = band_pass(dc, 0.0, 500.0);
  EXPECT_NEAR(y[y.size() - 1], 0.5f, 1e-3f);
  const AudioBuffer hi = tone(2000.0);
  EXPECT_LE(gain_db(hi, band_pass(hi, 0.0, 500.0), kRate / 4), -20.0);
}

// Passband flat within 1 dB a quarter octave inside the edges; stopband at
// least 20 dB down one octave outside, for every canonical band.
TEST(BandPass, PassbandAndStopbandAcrossCanonicalBands) {
  const std::size_t skip = kRate / 2;
  const double nyquist = kRate / 2.0;
  const double q = std::pow(2.0, 0.25);
  for (const BandSpec& b : kCanonicalBands) {
    const double lo = b.low_hz, hi = std::min(b.high_hz, nyquist);
    std::vector<double> pass;
    if (lo > 0) pass.push_back(lo * q);
    if (hi < nyquist) pass.push_back(hi / q);
    pass.push_back(lo > 0 ? std::sqrt(lo * hi) : hi / 4);
    for (double f : pass) {
      if (f >= 0.45 * kRate) continue;
      const AudioBuffer x = tone(f, 2.0);
      EXPECT_NEAR(gain_db(x, band_pass(x, lo, hi), skip), 0.0, 1.0)
          << "band [" << lo << "," << hi << "] at " << f;
    }
    std::vector<double> stop;
    if (lo > 0 && lo / 2 >= 20.0) stop.push_back(lo / 2);
    if (hi < nyquist && 2 * hi < nyquist) stop.push_back(2 * hi);
    for (double f : stop) {
      const AudioBuffer x = tone(f, 2.0);
      EXPECT_LE(gain_db(x, band_pass(x, lo, hi), skip), -20.0)
          << "band [" << lo << "," << hi << "] at " << f;
    }
  }
}

TEST(BandPass, InvertedBandIsError) {
  EXPECT_THROW(band_pass(tone(100.0, 0.1), 240.0, 80.0), Error);
  EXPECT_THROW(band_pass(tone(100.0, 0.1), 80.0, 9000.0), Error);
}

// --- time drop -------------------------------------------------------------

TEST(TimeDrop, ZeroesExactlyOneWindow) {
  const AudioBuffer x(std::vector<float>(kRate, 1.0f), kRate);
  const AudioBuffer y = time_drop(x, 1600);
  for (std::size_t i = 0; i < y.size(); ++i) {
    ASSERT_EQ(y[i], (i >= 1600 && i < 2400) ? 0.0f : 1.0f) << i;
  }
}

TEST(TimeDrop, ZeroDurationIsIdentity) {
  const AudioBuffer x(oracle::white_noise(500, 2), kRate);
  EXPECT_TRUE(bit_equal(time_drop(x, 100, 0.0), x));
}

TEST(TimeDrop, OverrunIsRangeError) {
  const AudioBuffer x(std::vector<float>(kRate, 1.0f), kRate);
  try {
    time_drop(x, x.size() - 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kRange);
  }
  EXPECT_NO_THROW(time_drop(x, x.size() - 800));
}

// --- add noise ---------------------------------------------------------------

TEST(AddNoise, InfiniteSnrIsIdentity) {
  const AudioBuffer x = tone(300.0, 0.2);
  const AudioBuffer n(oracle::white_noise(x.size(), 5), kRate);
  EXPECT_TRUE(bit_equal(add_noise(x, n, std::numeric_limits<double>::infinity()), x));
}

TEST(AddNoise, HitsTargetSnr) {
  const AudioBuffer x = tone(440.0, 1.0, 0.5);
  // White noise rescaled to the sine's RMS so the 0 dB case starts equal.
  auto w = oracle::white_noise(x.size(), 8);
  const double g = oracle::rms(x.samples()) / oracle::rms(w);
  for (auto& v : w) v = static_cast<float>(v * g);
  const AudioBuffer n(w, kRate);
  for (double snr : {0.0, -5.0, 5.0, 12.5, 30.0}) {
    const AudioBuffer y = add_noise(x, n, snr);
    std::vector<float> added(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) added[i] = y[i] - x[i];
    const double measured = 20 * std::log10(oracle::rms(x.samples()) / oracle::rms(added));
    EXPECT_NEAR(measured, snr, snr == 0.0 ? 0.1 : 0.5);
  }
}

TEST(AddNoise, ShortNoiseIsTiled) {
  const std::size_t L = 3000;
  const AudioBuffer x = tone(200.0, L / double(kRate));
  const AudioBuffer n(oracle::white_noise(L / 3, 6), kRate);
  const AudioBuffer y = add_noise(x, n, 10.0);
  const double gain = (y[0] - x[0]) / n[0];
  for (std::size_t i = 0; i < L; ++i) {
    ASSERT_NEAR(y[i] - x[i], gain * n[i % (L / 3)], 1e-6) << i;
  }
}

TEST(AddNoise, ErrorsOnSilentNoiseAndRateMismatch) {
  const AudioBuffer x = tone(200.0, 0.1);
  try {
    add_noise(x, AudioBuffer(std::vector<float>(100, 0.0f), kRate), 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmpty);
  }
  EXPECT_THROW(add_noise(x, AudioBuffer(oracle::white_noise(100, 1), 8000), 10.0), Error);
}

TEST(AddNoise, NoClipping) {
  const AudioBuffer x(std::vector<float>(1000, 0.9f), kRate);
  const AudioBuffer n(std::vector<float>(1000, 1.0f), kRate);
  const AudioBuffer y = add_noise(x, n, 0.0);
  EXPECT_NEAR(y[0], 1.8f, 1e-5f);
}
