// tests/unit/test_audio.cpp

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
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "cpcaug/audio/buffer.hpp"
#include "cpcaug/audio/resample.hpp"
#include "cpcaug/audio/wav.hpp"
#include "cpcaug/core/rng.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace cpcaug;
namespace fs = std::filesystem;

namespace {

// Raw RIFF writer used to build fixtures the library itself would never emit.
std::vector<unsigned char> make_wav(std::uint16_t format, std::uint16_t channels,
                                    std::uint32_t rate, std::uint16_t bits,
                                    const std::vector<unsigned char>& data,
                                    std::uint32_t declared_data_size) {
  std::vector<unsigned char> out;
  auto u16 = [&](std::uint16_t v) {
    out.push_back(v & 0xFF);
    out.push_back(v >> 8);
  };
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
  };
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  tag("RIFF");
  u32(36 + declared_data_size);
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(channels * bits / 8);
  u16(bits);
  tag("data");
  u32(declared_data_size);
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

void dump(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected cpcaug::Error";
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST(AudioBuffer, RejectsNonPositiveRate) {
  EXPECT_THROW(AudioBuffer({0.f}, 0), Error);
  AudioBuffer b({0.f, 1.f}, 8000);
  EXPECT_DOUBLE_EQ(b.duration_seconds(), 2.0 / 8000.0);
}

TEST(RmsDb, ReferenceLevels) {
  EXPECT_DOUBLE_EQ(rms_db(AudioBuffer(std::vector<float>(1000, 1.0f), 16000)), 0.0);
  const auto s = oracle::sine(1000.0, 16000, 16000);
  EXPECT_NEAR(rms_db(AudioBuffer(s, 16000)), -3.0103, 0.01);
  EXPECT_EQ(rms_db(AudioBuffer(std::vector<float>(10, 0.0f), 16000)),
            -std::numeric_limits<double>::infinity());
  EXPECT_EQ(kind_of([] { rms_db(AudioBuffer({}, 16000)); }), ErrorKind::kEmpty);
}

TEST(Wav, Int16MonoHeaderDefinesLength) {
  oracle::TempDir dir;
  std::vector<unsigned char> data(16000 * 2, 0);
  dump(dir / "a.wav", make_wav(1, 1, 16000, 16, data, data.size()));
  const AudioBuffer b = read_wav(dir / "a.wav");
  EXPECT_EQ(b.size(), 16000u);
  EXPECT_EQ(b.sample_rate(), 16000);
}

TEST(Wav, StereoOppositeChannelsDownmixToSilence) {
  oracle::TempDir dir;
  std::vector<unsigned char> data;
  const auto s = oracle::sine(300.0, 8000, 800, 0.5);
  for (float v : s) {
    const auto l = static_cast<std::int16_t>(std::lround(v * 32767));
    const auto r = static_cast<std::int16_t>(-l);
    for (std::int16_t c : {l, r}) {
      data.push_back(static_cast<std::uint16_t>(c) & 0xFF);
      data.push_back(static_cast<std::uint16_t>(c) >> 8);
    }
  }
  dump(dir / "st.wav", make_wav(1, 2, 8000, 16, data, data.size()));
  const AudioBuffer b = read_wav(dir / "st.wav");
  ASSERT_EQ(b.size(), 800u);
  for (float v : b.samples()) EXPECT_EQ(v, 0.0f);
}

TEST(Wav, ErrorsAreDistinct) {
  oracle::TempDir dir;
  EXPECT_EQ(kind_of([&] { read_wav(dir / "missing.wav"); }), ErrorKind::kNotFound);

  std::vector<unsigned char> ulaw(100, 0x7F);
  dump(dir / "mulaw.wav", make_wav(7, 1, 8000, 8, ulaw, ulaw.size()));
  EXPECT_EQ(kind_of([&] { read_wav(dir / "mulaw.wav"); }), ErrorKind::kUnsupported);

  std::vector<unsigned char> short_data(100, 0);
  dump(dir / "trunc.wav", make_wav(1, 1, 8000, 16, short_data, 4000));
  EXPECT_EQ(kind_of([&] { read_wav(dir / "trunc.wav"); }), ErrorKind::kTruncated);

  dump(dir / "junk.wav", {'n', 'o', 'p', 'e'});
  EXPECT_EQ(kind_of([&] { read_wav(dir / "junk.wav"); }), ErrorKind::kFormat);

  EXPECT_EQ(kind_of([&] {
              write_wav(dir / "no_such_dir" / "x.wav", AudioBuffer({0.f}, 8000));
            }),
            ErrorKind::kIo);
}

TEST(Wav, Int16ClampsOverRange) {
  oracle::TempDir dir;
  write_wav(dir / "c.wav", AudioBuffer({1.5f, -1.5f, 1.0f}, 16000), WavFormat::kInt16);
  const AudioBuffer b = read_wav(dir / "c.wav");
  EXPECT_EQ(b[0], 32767.0f / 32768.0f);
  EXPECT_EQ(b[1], -1.0f);
  EXPECT_EQ(b[2], 32767.0f / 32768.0f);
}

// Round-trip property over random buffers at the common corpus rates.
TEST(Wav, RoundTripProperty) {
  oracle::TempDir dir;
  RngStream rng(1234);
  for (int rate : {8000, 16000, 44100, 48000}) {
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t n = 1 + rng.index(5000);
      std::vector<float> x(n);
      for (auto& v : x) v = static_cast<float>(rng.uniform(-1.2, 1.2));
      const AudioBuffer buf(x, rate);

      write_wav(dir / "f.wav", buf, WavFormat::kFloat32);
      const AudioBuffer f = read_wav(dir / "f.wav");
      ASSERT_EQ(f.sample_rate(), rate);
      ASSERT_EQ(f.size(), n);
      for (std::size_t i = 0; i < n; ++i) {
        ASSERT_EQ(std::bit_cast<std::uint32_t>(f[i]), std::bit_cast<std::uint32_t>(x[i]));
      }

      write_wav(dir / "i.wav", buf, WavFormat::kInt16);
      const AudioBuffer q = read_wav(dir / "i.wav");
      ASSERT_EQ(q.size(), n);
      for (std::size_t i = 0; i < n; ++i) {
        const double clamped = std::clamp<double>(x[i], -1.0, 1.0);
        ASSERT_LE(std::abs(q[i] - clamped), std::ldexp(1.0, -15)) << "rate " << rate;
      }
    }
  }
}

TEST(Resample, SameRateIsBitIdentical) {
  const AudioBuffer b(oracle::white_noise(1000, 3), 16000);
  EXPECT_EQ(resample(b, 16000), b);
}

TEST(Resample, LengthRule) {
  const AudioBuffer b(std::vector<float>(1001, 0.1f), 44100);
  EXPECT_EQ(resample(b, 16000).size(), 363u);  // round(1001 * 16000 / 44100) = 363.17
  EXPECT_EQ(resample(AudioBuffer(std::vector<float>(3, 0.f), 2), 3).size(), 5u);  // 4.5 -> 5
}

TEST(Resample, DcIsPreserved) {
  const AudioBuffer b(std::vector<float>(4800, 0.25f), 48000);
  for (int target : {16000, 22050, 96000}) {
    const AudioBuffer r = resample(b, target);
    for (float v : r.samples()) ASSERT_NEAR(v, 0.25f, 1e-6f);
  }
}

TEST(Resample, SinePeakSurvivesDecimation) {
  const AudioBuffer b(oracle::sine(440.0, 48000, 48000), 48000);
  const AudioBuffer r = resample(b, 16000);
  EXPECT_EQ(r.size(), 16000u);
  EXPECT_NEAR(oracle::peak_frequency(r.samples(), 16000), 440.0, 1.0);
}

// Passband flatness: tones below 0.45 * min(rates) keep their level within
// 0.5 dB, one way and round trip through twice the rate.
TEST(Resample, PassbandWithinHalfDecibel) {
  const int r = 16000;
  for (double f : {100.0, 1000.0, 3000.0, 5500.0, 7000.0, 0.45 * r}) {
    const AudioBuffer x(oracle::sine(f, r, r), r);
    const AudioBuffer up = resample(x, 2 * r);
    const AudioBuffer back = resample(up, r);
    ASSERT_EQ(back.size(), x.size());
    // Compare away from the edges where the kernel is truncated.
    const std::size_t m = 400;
    std::span<const float> a(x.samples().data() + m, x.size() - 2 * m);
    std::span<const float> b(back.samples().data() + m, back.size() - 2 * m);
    std::span<const float> u(up.samples().data() + 2 * m, up.size() - 4 * m);
    EXPECT_NEAR(oracle::db_ratio(b, a), 0.0, 0.5) << f << " Hz round trip";
    EXPECT_NEAR(oracle::db_ratio(u, a), 0.0, 0.5) << f << " Hz upsampled";
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) err += std::pow(a[i] - b[i], 2);
    err = std::sqrt(err / a.size());
    EXPECT_LT(20 * std::log10(err / oracle::rms(a)), -20.0) << f << " Hz waveform error";
  }
}

TEST(Resample, RemovesContentAboveTargetNyquist) {
  // 7 kHz at 48 kHz is above the 4 kHz Nyquist of an 8 kHz target.
  const AudioBuffer x(oracle::sine(7000.0, 48000, 48000), 48000);
  const AudioBuffer y = resample(x, 8000);
  std::span<const float> mid(y.samples().data() + 400, y.size() - 800);
  EXPECT_LT(20 * std::log10(oracle::rms(mid) / oracle::rms(x.samples())), -60.0);
}

TEST(RngStream, ReplayIsIdentical) {
  RngStream probe(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> path(probe.index(5));
    for (auto& p : path) p = probe.next_u64();
    const std::uint64_t seed = probe.next_u64();
    RngStream a(seed, path), b(seed, path);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
    EXPECT_EQ(a.child(3).uniform(), b.child(3).uniform());
  }
}

TEST(RngStream, DistinctPathsDiffer) {
  std::set<std::uint64_t> first_draws;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    first_draws.insert(RngStream(7, {i}).next_u64());
    first_draws.insert(RngStream(7, {i, 0}).next_u64());
  }
  EXPECT_EQ(first_draws.size(), 2000u);

  // Crude independence check: correlation of two sibling streams.
  RngStream a(5, {1}), b(5, {2});
  double sab = 0, sa = 0, sb = 0, saa = 0, sbb = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform(), y = b.uniform();
    sab += x * y;
    sa += x;
    sb += y;
    saa += x * x;
    sbb += y * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double var_a = saa / n - std::pow(sa / n, 2), var_b = sbb / n - std::pow(sb / n, 2);
  const double corr = cov / std::sqrt(var_a * var_b);
  EXPECT_LT(std::abs(corr), 0.03);
}

TEST(RngStream, UniformIntCoversClosedRange) {
  RngStream r(11);
  int lo = 0, hi = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto v = r.uniform_int(-3, 3);
    ASSERT_GE(v, -3);
    ASSERT_LE(v, 3);
    lo = std::min<int>(lo, v);
    hi = std::max<int>(hi, v);
  }
  EXPECT_EQ(lo, -3);
  EXPECT_EQ(hi, 3);
  EXPECT_EQ(r.uniform(42.0, 42.0), 42.0);
}
