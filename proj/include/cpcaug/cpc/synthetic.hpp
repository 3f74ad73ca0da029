// cpcaug/cpc/synthetic.hpp

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

// Tone corpus for desk-scale experiments. A "phone" is a pair of sinusoids;
// a "speaker" scales every phone frequency by one factor. Utterances are
// phone strings with no immediate repeats.

#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <numbers>
#include <string>
#include <vector>

#include "cpcaug/abx/items.hpp"
#include "cpcaug/audio/buffer.hpp"
#include "cpcaug/core/rng.hpp"
#include "cpcaug/noise/bank.hpp"

namespace cpcaug {

struct SyntheticCorpusConfig {
  int sample_rate = 16000;
  int speakers = 2;
  int phones = 4;
  int train_utterances = 24;  // per speaker
  int test_utterances = 6;    // per speaker
  int segments_per_utterance = 20;
  double min_segment_seconds = 0.06;
  double max_segment_seconds = 0.14;
  double freq_jitter = 0.02;  // relative, uniform
  double ramp_seconds = 0.005;
  double noise_floor_db = -40.0;
  std::uint64_t seed = 0;
};

struct SyntheticUtterance {
  std::string id;
  std::string speaker;
  AudioBuffer audio;
  std::vector<ItemRecord> segments;  // every segment, boundary ones included
};

struct SyntheticCorpus {
  std::vector<SyntheticUtterance> train;
  std::vector<SyntheticUtterance> test;
  std::vector<ItemRecord> test_items;  // interior test segments

  std::vector<AudioBuffer> train_audio() const {
    std::vector<AudioBuffer> out;
    for (const auto& u : train) out.push_back(u.audio);
    return out;
  }
};

namespace synthetic_detail {

// Two formant-like tones per phone, in Hz, before speaker scaling.
inline constexpr double kPhoneTones[8][2] = {{300, 2300}, {700, 1200}, {450, 1800}, {850, 2600},
                                             {550, 950},  {350, 1500}, {650, 2000}, {900, 3000}};
inline constexpr double kSpeakerScale[4] = {1.0, 1.25, 0.85, 1.4};

inline SyntheticUtterance make_utterance(const SyntheticCorpusConfig& cfg, int speaker,
                                         const std::string& id, RngStream rng) {
  const double rate = cfg.sample_rate;
  const double scale = kSpeakerScale[speaker];
  SyntheticUtterance u;
  u.id = id;
  u.speaker = "s" + std::to_string(speaker);
  std::vector<float> wave;
  std::vector<int> phones;
  int prev = -1;
  for (int s = 0; s < cfg.segments_per_utterance; ++s) {
    int p;
    if (prev < 0) {
      p = static_cast<int>(rng.index(static_cast<std::size_t>(cfg.phones)));
    } else {
      p = static_cast<int>(rng.index(static_cast<std::size_t>(cfg.phones - 1)));
      if (p >= prev) ++p;
    }
    phones.push_back(p);
    prev = p;
  }
  std::vector<std::pair<double, double>> spans;
  for (int p : phones) {
    const double dur = rng.uniform(cfg.min_segment_seconds, cfg.max_segment_seconds);
    const auto n = static_cast<std::size_t>(std::lround(dur * rate));
    const double amp = 0.3 * std::pow(10.0, rng.uniform(-3.0, 3.0) / 20.0);
    double f[2], phase[2];
    for (int k = 0; k < 2; ++k) {
      f[k] = kPhoneTones[p][k] * scale * (1.0 + rng.uniform(-cfg.freq_jitter, cfg.freq_jitter));
      phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    const double ramp = cfg.ramp_seconds * rate;
    const std::size_t start = wave.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      double env = 1.0;
      const double edge = std::min<double>(static_cast<double>(i), static_cast<double>(n - 1 - i));
      if (edge < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * edge / ramp);
      const double v = std::sin(2 * std::numbers::pi * f[0] * t + phase[0]) +
                       0.6 * std::sin(2 * std::numbers::pi * f[1] * t + phase[1]);
      wave.push_back(static_cast<float>(amp * env * v / 1.6));
    }
    spans.emplace_back(static_cast<double>(start) / rate, static_cast<double>(wave.size()) / rate);
  }
  const double floor = std::pow(10.0, cfg.noise_floor_db / 20.0) * std::sqrt(3.0);
  for (auto& v : wave) v += static_cast<float>(rng.uniform(-floor, floor));
  for (std::size_t s = 0; s < phones.size(); ++s) {
    const auto name = [](int p) { return "p" + std::to_string(p); };
    u.segments.push_back({id, spans[s].first, spans[s].second, name(phones[s]),
                          s > 0 ? name(phones[s - 1]) : "#",
                          s + 1 < phones.size() ? name(phones[s + 1]) : "#", u.speaker});
  }
  u.audio = AudioBuffer(std::move(wave), cfg.sample_rate);
  return u;
}

}  // namespace synthetic_detail

inline SyntheticCorpus make_synthetic_corpus(const SyntheticCorpusConfig& cfg) {
  require(cfg.speakers >= 1 && cfg.speakers <= 4, "synthetic: 1..4 speakers");
  require(cfg.phones >= 2 && cfg.phones <= 8, "synthetic: 2..8 phones");
  require(cfg.segments_per_utterance >= 3, "synthetic: need at least 3 segments per utterance");
  require(cfg.min_segment_seconds > 0 && cfg.min_segment_seconds <= cfg.max_segment_seconds,
          "synthetic: bad segment durations");
  const RngStream root(cfg.seed, {0x73796e});
  SyntheticCorpus c;
  for (int s = 0; s < cfg.speakers; ++s) {
    for (int i = 0; i < cfg.train_utterances; ++i) {
      c.train.push_back(synthetic_detail::make_utterance(
          cfg, s, "s" + std::to_string(s) + "_train_" + std::to_string(i),
          root.child(0).child(static_cast<std::uint64_t>(s)).child(static_cast<std::uint64_t>(i))));
    }
    for (int i = 0; i < cfg.test_utterances; ++i) {
      c.test.push_back(synthetic_detail::make_utterance(
          cfg, s, "s" + std::to_string(s) + "_test_" + std::to_string(i),
          root.child(1).child(static_cast<std::uint64_t>(s)).child(static_cast<std::uint64_t>(i))));
    }
  }
  for (const auto& u : c.test) {
    for (std::size_t k = 1; k + 1 < u.segments.size(); ++k) c.test_items.push_back(u.segments[k]);
  }
  return c;
}

/// Three raw noise sources (white, brown, tone cluster), 2 s each.
inline std::vector<NoiseBank::Segment> synthetic_noise_sources(int sample_rate,
                                                               std::uint64_t seed) {
  const RngStream root(seed, {0x6e6f6973});
  const auto n = static_cast<std::size_t>(2 * sample_rate);
  std::vector<NoiseBank::Segment> raw;

  RngStream r = root.child(0);
  std::vector<float> white(n);
  for (auto& v : white) v = static_cast<float>(r.uniform(-1.0, 1.0));
  raw.push_back({"white", AudioBuffer(white, sample_rate)});

  r = root.child(1);
  std::vector<float> brown(n);
  double acc = 0.0;
  for (auto& v : brown) {
    acc = 0.995 * acc + r.uniform(-1.0, 1.0);
    v = static_cast<float>(acc * 0.05);
  }
  raw.push_back({"brown", AudioBuffer(brown, sample_rate)});

  r = root.child(2);
  std::vector<float> cluster(n, 0.0f);
  for (int k = 0; k < 12; ++k) {
    const double f = r.uniform(100.0, 3000.0), ph = r.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < n; ++i) {
      cluster[i] += static_cast<float>(
          0.1 * std::sin(2 * std::numbers::pi * f * static_cast<double>(i) / sample_rate + ph));
    }
  }
  raw.push_back({"cluster", AudioBuffer(cluster, sample_rate)});
  return raw;
}

/// The synthetic sources ingested through the regular bank pipeline,
/// optionally band-filtered.
inline std::shared_ptr<const NoiseBank> make_synthetic_noise_bank(
    int sample_rate, std::uint64_t seed, std::optional<BandSpec> band = std::nullopt) {
  return std::make_shared<const NoiseBank>(NoiseBank::from_buffers(
      synthetic_noise_sources(sample_rate, seed), band, sample_rate, 1, "synthetic"));
}

}  // namespace cpcaug
