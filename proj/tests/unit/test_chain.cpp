// tests/unit/test_chain.cpp

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
#include <fstream>

#include "cpcaug/core/parallel.hpp"
#include "cpcaug/effects/chain.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace cpcaug;

namespace {

constexpr int kRate = 16000;

std::shared_ptr<const NoiseBank> small_bank() {
  std::vector<NoiseBank::Segment> segs;
  segs.push_back({"a.wav", AudioBuffer(oracle::white_noise(5000, 1, 0.05), kRate)});
  segs.push_back({"b.wav", AudioBuffer(oracle::white_noise(20000, 2, 0.05), kRate)});
  return std::make_shared<const NoiseBank>(std::move(segs), std::nullopt, kRate, "mem");
}

EffectChainSpec full_spec(std::shared_ptr<const NoiseBank> bank) {
  EffectChainSpec s = default_training_chain(std::move(bank), kRate);
  s.bandrej = BandRejectSpec{};
  s.tdrop = TimeDropSpec{};
  return s;
}

bool bit_equal(const AudioBuffer& a, const AudioBuffer& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint32_t>(a[i]) != std::bit_cast<std::uint32_t>(b[i])) return false;
  }
  return true;
}

}  // namespace

TEST(SampleChain, PitchRangeStatistics) {
  EffectChainSpec spec;
  spec.pitch = PitchSpec{};
  int lo = 0, hi = 0;
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto c = sample_chain(spec, 16000, RngStream(3, {std::uint64_t(i)}));
    const int cents = std::get<PitchParams>(c.effects.at(0)).cents;
    lo = std::min(lo, cents);
    hi = std::max(hi, cents);
    sum += cents;
  }
  EXPECT_EQ(lo, -300);
  EXPECT_EQ(hi, 300);
  EXPECT_NEAR(sum / n, 0.0, 10.0);
}

TEST(SampleChain, HundredthToneUnitDoublesCents) {
  EffectChainSpec spec;
  spec.pitch = PitchSpec{-300, 300, 2};
  for (int i = 0; i < 200; ++i) {
    const int c = std::get<PitchParams>(
                      sample_chain(spec, 100, RngStream(4, {std::uint64_t(i)})).effects[0])
                      .cents;
    ASSERT_EQ(c % 2, 0);
    ASSERT_LE(std::abs(c), 600);
  }
}

TEST(SampleChain, DegenerateIntervalAndDeterminism) {
  EffectChainSpec spec;
  spec.reverb = ReverbSpec{42.0, 42.0};
  const auto c = sample_chain(spec, 100, RngStream(1));
  EXPECT_EQ(std::get<ReverbParams>(c.effects.at(0)).room_scale, 42.0);

  const EffectChainSpec full = full_spec(small_bank());
  EXPECT_EQ(sample_chain(full, 16000, RngStream(9, {1, 2})),
            sample_chain(full, 16000, RngStream(9, {1, 2})));
  EXPECT_NE(sample_chain(full, 16000, RngStream(9, {1, 2})),
            sample_chain(full, 16000, RngStream(9, {1, 3})));
}

TEST(SampleChain, ParametersStayInsideSpec) {
  const EffectChainSpec spec = full_spec(small_bank());
  for (std::uint64_t i = 0; i < 500; ++i) {
    const std::size_t len = 800 + i * 37;
    const auto c = sample_chain(spec, len, RngStream(5, {i}));
    ASSERT_EQ(c.effects.size(), 5u);
    const auto& p = std::get<PitchParams>(c.effects[0]);
    EXPECT_LE(std::abs(p.cents), 300);
    const auto& a = std::get<AddNoiseParams>(c.effects[1]);
    EXPECT_GE(a.snr_db, 5.0);
    EXPECT_LE(a.snr_db, 15.0);
    EXPECT_LT(a.pick.segment, 2u);
    const auto& r = std::get<ReverbParams>(c.effects[2]);
    EXPECT_GE(r.room_scale, 0.0);
    EXPECT_LE(r.room_scale, 100.0);
    const auto& b = std::get<BandRejectParams>(c.effects[3]);
    EXPECT_GE(b.width_hz, 0.0);
    EXPECT_LE(b.width_hz, 150.0);
    EXPECT_GE(b.center_hz - b.width_hz / 2, 0.0);
    EXPECT_LE(b.center_hz + b.width_hz / 2, kRate / 2.0);
    const auto& t = std::get<TimeDropParams>(c.effects[4]);
    EXPECT_LE(t.start + 800, len);
  }
}

TEST(SampleChain, TooShortForDropIsRangeError) {
  EffectChainSpec spec;
  spec.tdrop = TimeDropSpec{};
  try {
    sample_chain(spec, 799, RngStream(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kRange);
  }
  EXPECT_NO_THROW(sample_chain(spec, 800, RngStream(1)));
}

TEST(SampleChain, InvalidSpecsRejected) {
  EffectChainSpec s;
  s.reverb = ReverbSpec{50.0, 10.0};
  EXPECT_THROW(s.validate(), Error);
  s = {};
  s.bandrej = BandRejectSpec{9000.0, std::nullopt};
  EXPECT_THROW(s.validate(), Error);
  s = {};
  s.pitch = PitchSpec{-700, 700, 2};
  EXPECT_THROW(s.validate(), Error);
}

TEST(ApplyChain, EmptyChainIsBitIdentical) {
  const AudioBuffer x(oracle::white_noise(1000, 3), kRate);
  EXPECT_TRUE(bit_equal(apply_chain(x, ConcreteChain{}), x));
}

TEST(ApplyChain, SingletonDropMatchesTimeDrop) {
  const AudioBuffer x(oracle::white_noise(4000, 3), kRate);
  ConcreteChain c;
  c.effects.emplace_back(TimeDropParams{1234, 50.0});
  EXPECT_TRUE(bit_equal(apply_chain(x, c), time_drop(x, 1234)));
}

TEST(ApplyChain, MatchesManualSequentialApplication) {
  const AudioBuffer x(oracle::white_noise(8000, 3, 0.5), kRate);
  ConcreteChain c;
  c.effects.emplace_back(PitchParams{100});
  c.effects.emplace_back(TimeDropParams{2000, 50.0});
  const AudioBuffer manual = time_drop(pitch_shift(x, 100), 2000);
  EXPECT_TRUE(bit_equal(apply_chain(x, c), manual));

  // Listing order is irrelevant: composition order is canonical.
  ConcreteChain reversed;
  reversed.effects.emplace_back(TimeDropParams{2000, 50.0});
  reversed.effects.emplace_back(PitchParams{100});
  EXPECT_TRUE(bit_equal(apply_chain(x, reversed), manual));
}

TEST(ApplyChain, FullCompositionOrder) {
  const auto bank = small_bank();
  const AudioBuffer x(oracle::white_noise(6000, 11, 0.4), kRate);
  const ConcreteChain c = sample_chain(full_spec(bank), x.size(), RngStream(21));
  AudioBuffer manual = x;
  manual = pitch_shift(manual, std::get<PitchParams>(c.effects[0]).cents);
  const auto& a = std::get<AddNoiseParams>(c.effects[1]);
  manual = add_noise(manual, bank->window(a.pick, x.size()), a.snr_db);
  manual = reverb(manual, std::get<ReverbParams>(c.effects[2]).room_scale);
  const auto& b = std::get<BandRejectParams>(c.effects[3]);
  manual = band_reject(manual, b.center_hz, b.width_hz);
  manual = time_drop(manual, std::get<TimeDropParams>(c.effects[4]).start);
  EXPECT_TRUE(bit_equal(apply_chain(x, c), manual));
}

// Random buffers through random valid chains stay finite and keep length.
TEST(ApplyChain, FinitenessAndLengthProperty) {
  const auto bank = small_bank();
  RngStream gen(31337);
  for (std::uint64_t trial = 0; trial < 25; ++trial) {
    EffectChainSpec spec;
    spec.sample_rate = kRate;
    if (gen.uniform() < 0.6) spec.pitch = PitchSpec{-1200, 1200, 1};
    if (gen.uniform() < 0.6) {
      AddNoiseSpec a;
      a.bank = bank;
      a.min_snr_db = -10.0;
      a.max_snr_db = 30.0;
      spec.add = a;
    }
    if (gen.uniform() < 0.6) spec.reverb = ReverbSpec{};
    if (gen.uniform() < 0.6) spec.bandrej = BandRejectSpec{};
    if (gen.uniform() < 0.6) spec.tdrop = TimeDropSpec{};
    const std::size_t len = 800 + gen.index(12000);
    std::vector<float> x(len);
    const double amp = gen.uniform(0.0, 1.0);
    for (auto& v : x) v = static_cast<float>(gen.uniform(-amp, amp));
    const AudioBuffer in(x, kRate);
    const AudioBuffer out = apply_chain(in, sample_chain(spec, len, RngStream(8, {trial})));
    ASSERT_EQ(out.size(), len);
    ASSERT_TRUE(out.all_finite());
  }
}

TEST(ApplyChain, DeterministicAcrossThreadCounts) {
  const auto bank = small_bank();
  const EffectChainSpec spec = full_spec(bank);
  const std::size_t items = 12;
  std::vector<AudioBuffer> inputs;
  for (std::size_t i = 0; i < items; ++i) {
    inputs.emplace_back(oracle::white_noise(4000, 100 + i, 0.3), kRate);
  }
  auto run = [&](int threads) {
    std::vector<AudioBuffer> out(items);
    parallel_for(items, threads, [&](std::size_t i) {
      out[i] = apply_chain(inputs[i], sample_chain(spec, 4000, RngStream(77, {i})));
    });
    return out;
  };
  const auto ref = run(1);
  for (int t : {4, 8}) {
    const auto other = run(t);
    for (std::size_t i = 0; i < items; ++i) EXPECT_TRUE(bit_equal(ref[i], other[i]));
  }
}

TEST(ChainJson, RoundTripAndRelativeBank) {
  oracle::TempDir dir;
  std::filesystem::create_directories(dir / "noise");
  write_wav(dir / "noise" / "n1.wav", AudioBuffer(oracle::white_noise(8000, 1, 0.1), kRate));
  {
    std::ofstream out(dir / "chain.json");
    out << R"({"sample_rate": 16000, "chain": [
      {"effect": "tdrop", "duration_ms": 40},
      {"effect": "pitch", "range": [-200, 100], "unit": "hundredth_tone"},
      {"effect": "add", "bank": "noise", "band": [80, 240], "snr": [0, 10]},
      {"effect": "reverb", "room_scale": [10, 20]},
      {"effect": "bandrej", "max_width": 100}
    ]})";
  }
  const EffectChainSpec spec = load_chain_spec(dir / "chain.json");
  ASSERT_TRUE(spec.pitch && spec.add && spec.reverb && spec.bandrej && spec.tdrop);
  EXPECT_EQ(spec.pitch->min_units, -200);
  EXPECT_EQ(spec.pitch->cents_per_unit, 2);
  EXPECT_EQ(spec.add->bank->size(), 1u);
  EXPECT_EQ(spec.add->bank->band(), (BandSpec{80, 240}));
  EXPECT_EQ(spec.reverb->max_room_scale, 20.0);
  EXPECT_EQ(spec.bandrej->max_width_hz, 100.0);
  EXPECT_EQ(spec.tdrop->duration_ms, 40.0);

  const nlohmann::json j = to_json(spec);
  const EffectChainSpec again = chain_spec_from_json(j, {dir.path(), 1});
  EXPECT_EQ(to_json(again), j);
  EXPECT_EQ(j["chain"][0]["effect"], "pitch");
}

TEST(ChainJson, FormatErrors) {
  auto kind = [](const char* text) {
    try {
      chain_spec_from_json(nlohmann::json::parse(text));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kNumeric;
  };
  EXPECT_EQ(kind(R"({"chain": [{"effect": "flanger"}]})"), ErrorKind::kFormat);
  EXPECT_EQ(kind(R"({"chain": [{"effect": "pitch"}, {"effect": "pitch"}]})"),
            ErrorKind::kFormat);
  EXPECT_EQ(kind(R"({"chain": [{"effect": "pitch", "range": [1, 2, 3]}]})"),
            ErrorKind::kFormat);
  EXPECT_EQ(kind(R"({"nope": 1})"), ErrorKind::kFormat);
  EXPECT_EQ(kind(R"({"chain": [{"effect": "reverb", "room_scale": [0, 200]}]})"),
            ErrorKind::kInvalidArgument);
}
