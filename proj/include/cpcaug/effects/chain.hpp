// cpcaug/effects/chain.hpp

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
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpcaug/audio/buffer.hpp"
#include "cpcaug/core/rng.hpp"
#include "cpcaug/effects/basic.hpp"
#include "cpcaug/effects/pitch.hpp"
#include "cpcaug/effects/reverb.hpp"
#include "cpcaug/noise/bank.hpp"

namespace cpcaug {

// Effect kinds in their fixed composition order. The numeric value doubles as
// the RNG child index, so adding an effect never shifts another one's draws.
enum class EffectKind : int { kPitch = 0, kAdd = 1, kReverb = 2, kBandReject = 3, kTimeDrop = 4 };

inline const char* effect_name(EffectKind k) {
  switch (k) {
    case EffectKind::kPitch: return "pitch";
    case EffectKind::kAdd: return "add";
    case EffectKind::kReverb: return "reverb";
    case EffectKind::kBandReject: return "bandrej";
    case EffectKind::kTimeDrop: return "tdrop";
  }
  return "?";
}

struct PitchSpec {
  int min_units = -300;
  int max_units = 300;
  // 1: a unit is one cent (1/100 semitone). 2: a unit is 1/100 of a tone.
  int cents_per_unit = 1;
};

struct AddNoiseSpec {
  std::shared_ptr<const NoiseBank> bank;
  double min_snr_db = 5.0;
  double max_snr_db = 15.0;
  std::string bank_path;  // as given in the chain document
  std::optional<BandSpec> band;
};

struct ReverbSpec {
  double min_room_scale = 0.0;
  double max_room_scale = 100.0;
};

struct BandRejectSpec {
  double max_width_hz = 150.0;
  // Center range; unset means [width/2, Nyquist - width/2].
  std::optional<std::pair<double, double>> center_hz;
};

struct TimeDropSpec {
  double duration_ms = 50.0;
};

/// Stochastic augmentation recipe. Holding at most one slot per effect makes
/// the composition order structural: pitch, add, reverb, bandrej, tdrop.
struct EffectChainSpec {
  int sample_rate = 16000;
  std::optional<PitchSpec> pitch;
  std::optional<AddNoiseSpec> add;
  std::optional<ReverbSpec> reverb;
  std::optional<BandRejectSpec> bandrej;
  std::optional<TimeDropSpec> tdrop;

  bool empty() const { return !pitch && !add && !reverb && !bandrej && !tdrop; }

  void validate() const {
    require(sample_rate > 0, "chain: sample rate must be positive");
    const double nyquist = sample_rate / 2.0;
    if (pitch) {
      require(pitch->min_units <= pitch->max_units, "pitch: empty range");
      require(pitch->cents_per_unit == 1 || pitch->cents_per_unit == 2,
              "pitch: unit scale must be 1 or 2");
      require(std::max(std::abs(pitch->min_units), std::abs(pitch->max_units)) *
                      pitch->cents_per_unit <= 1200,
              "pitch: shift beyond +-1200 cents");
    }
    if (add) {
      require(add->bank != nullptr, "add: no noise bank");
      require(add->min_snr_db <= add->max_snr_db, "add: empty SNR range");
      require(add->bank->sample_rate() == sample_rate,
              "add: noise bank rate differs from chain rate");
    }
    if (reverb) {
      require(reverb->min_room_scale <= reverb->max_room_scale &&
                  reverb->min_room_scale >= 0.0 && reverb->max_room_scale <= 100.0,
              "reverb: room_scale range must be non-empty within [0, 100]");
    }
    if (bandrej) {
      require(bandrej->max_width_hz >= 0.0 && bandrej->max_width_hz <= nyquist,
              "bandrej: max width must lie in [0, Nyquist]");
      if (bandrej->center_hz) {
        require(bandrej->center_hz->first <= bandrej->center_hz->second,
                "bandrej: empty center range");
      }
    }
    if (tdrop) require(tdrop->duration_ms >= 0.0, "tdrop: negative duration");
  }
};

struct PitchParams {
  int cents = 0;
  friend bool operator==(const PitchParams&, const PitchParams&) = default;
};
struct AddNoiseParams {
  std::shared_ptr<const NoiseBank> bank;
  NoisePick pick;
  double snr_db = 0.0;
  friend bool operator==(const AddNoiseParams&, const AddNoiseParams&) = default;
};
struct ReverbParams {
  double room_scale = 0.0;
  friend bool operator==(const ReverbParams&, const ReverbParams&) = default;
};
struct BandRejectParams {
  double center_hz = 0.0;
  double width_hz = 0.0;
  friend bool operator==(const BandRejectParams&, const BandRejectParams&) = default;
};
struct TimeDropParams {
  std::size_t start = 0;
  double duration_ms = 50.0;
  friend bool operator==(const TimeDropParams&, const TimeDropParams&) = default;
};

// Alternative index == EffectKind value.
using EffectParams = std::variant<PitchParams, AddNoiseParams, ReverbParams,
                                  BandRejectParams, TimeDropParams>;

/// One sampled realization of a chain; applying it involves no randomness.
struct ConcreteChain {
  std::vector<EffectParams> effects;

  bool empty() const { return effects.empty(); }
  friend bool operator==(const ConcreteChain&, const ConcreteChain&) = default;
};

inline ConcreteChain sample_chain(const EffectChainSpec& spec,
                                  std::size_t seq_len, const RngStream& rng) {
  spec.validate();
  require(seq_len > 0, "sample_chain: sequence length must be positive");
  const double nyquist = spec.sample_rate / 2.0;
  ConcreteChain chain;
  auto stream = [&](EffectKind k) { return rng.child(static_cast<std::uint64_t>(k)); };

  if (spec.pitch) {
    auto r = stream(EffectKind::kPitch);
    const auto units = r.uniform_int(spec.pitch->min_units, spec.pitch->max_units);
    chain.effects.emplace_back(
        PitchParams{static_cast<int>(units) * spec.pitch->cents_per_unit});
  }
  if (spec.add) {
    auto r = stream(EffectKind::kAdd);
    AddNoiseParams p;
    p.bank = spec.add->bank;
    p.pick = spec.add->bank->pick(seq_len, r);
    p.snr_db = r.uniform(spec.add->min_snr_db, spec.add->max_snr_db);
    chain.effects.emplace_back(std::move(p));
  }
  if (spec.reverb) {
    auto r = stream(EffectKind::kReverb);
    chain.effects.emplace_back(
        ReverbParams{r.uniform(spec.reverb->min_room_scale, spec.reverb->max_room_scale)});
  }
  if (spec.bandrej) {
    auto r = stream(EffectKind::kBandReject);
    BandRejectParams p;
    p.width_hz = r.uniform(0.0, spec.bandrej->max_width_hz);
    if (spec.bandrej->center_hz) {
      p.center_hz = r.uniform(spec.bandrej->center_hz->first, spec.bandrej->center_hz->second);
    } else {
      p.center_hz = r.uniform(p.width_hz / 2, nyquist - p.width_hz / 2);
    }
    chain.effects.emplace_back(p);
  }
  if (spec.tdrop) {
    auto r = stream(EffectKind::kTimeDrop);
    const std::size_t len = drop_length(spec.tdrop->duration_ms, spec.sample_rate);
    if (len > seq_len) {
      fail(ErrorKind::kRange, "sample_chain: sequence of " + std::to_string(seq_len) +
                                  " samples is shorter than the drop window");
    }
    chain.effects.emplace_back(TimeDropParams{r.index(seq_len - len + 1),
                                              spec.tdrop->duration_ms});
  }
  return chain;
}

inline AudioBuffer apply_effect(const AudioBuffer& buf, const EffectParams& params) {
  return std::visit(
      [&](const auto& p) -> AudioBuffer {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PitchParams>) {
          return pitch_shift(buf, p.cents);
        } else if constexpr (std::is_same_v<T, AddNoiseParams>) {
          require(p.bank != nullptr, "add: no noise bank");
          return add_noise(buf, p.bank->window(p.pick, buf.size()), p.snr_db);
        } else if constexpr (std::is_same_v<T, ReverbParams>) {
          return reverb(buf, p.room_scale);
        } else if constexpr (std::is_same_v<T, BandRejectParams>) {
          return band_reject(buf, p.center_hz, p.width_hz);
        } else {
          return time_drop(buf, p.start, p.duration_ms);
        }
      },
      params);
}

/// Applies every effect in composition order; the result has exactly the
/// input length.
inline AudioBuffer apply_chain(const AudioBuffer& buf, const ConcreteChain& chain) {
  if (chain.empty()) return buf;
  std::vector<const EffectParams*> ordered;
  for (const auto& e : chain.effects) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const EffectParams* a, const EffectParams* b) {
                     return a->index() < b->index();
                   });
  AudioBuffer out = buf;
  for (const EffectParams* e : ordered) {
    out = apply_effect(out, *e);
    if (out.size() != buf.size()) {
      out = AudioBuffer(fit_length(out.samples(), buf.size()), out.sample_rate());
    }
  }
  ensure_finite(out, "apply_chain");
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

struct ChainLoadOptions {
  std::filesystem::path base_dir;  // relative bank paths resolve against this
  int threads = 1;
};

namespace chain_detail {

inline std::pair<double, double> interval(const nlohmann::json& j, const char* key,
                                          std::pair<double, double> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_number()) return {v.get<double>(), v.get<double>()};
  require(v.is_array() && v.size() == 2,
          std::string("chain: '") + key + "' must be [lo, hi]", ErrorKind::kFormat);
  return {v.at(0).get<double>(), v.at(1).get<double>()};
}

inline std::shared_ptr<const NoiseBank> open_bank(const std::filesystem::path& path,
                                                  std::optional<BandSpec> band,
                                                  int rate, int threads) {
  if (NoiseBank::is_prepared(path)) {
    auto bank = std::make_shared<const NoiseBank>(NoiseBank::load(path));
    if (band && bank->band() != band) {
      fail(ErrorKind::kInvalidArgument,
           path.string() + ": prepared bank band differs from the chain's band");
    }
    require(bank->sample_rate() == rate,
            path.string() + ": prepared bank rate differs from the chain's rate");
    return bank;
  }
  return std::make_shared<const NoiseBank>(NoiseBank::build(path, band, rate, threads));
}

}  // namespace chain_detail

/// Parses {"chain": [{"effect": "pitch", ...}, ...], "sample_rate": 16000}.
/// Effects may be listed in any order; each may appear once.
inline EffectChainSpec chain_spec_from_json(const nlohmann::json& doc,
                                            const ChainLoadOptions& opts = {}) {
  using chain_detail::interval;
  EffectChainSpec spec;
  try {
    if (doc.contains("sample_rate")) spec.sample_rate = doc.at("sample_rate").get<int>();
    require(doc.contains("chain") && doc.at("chain").is_array(),
            "chain: document needs a 'chain' array", ErrorKind::kFormat);
    for (const auto& e : doc.at("chain")) {
      const std::string name = e.at("effect").get<std::string>();
      auto once = [&](bool present) {
        require(!present, "chain: effect '" + name + "' listed twice", ErrorKind::kFormat);
      };
      if (name == "pitch") {
        once(spec.pitch.has_value());
        PitchSpec p;
        const auto r = interval(e, "range", {-300, 300});
        p.min_units = static_cast<int>(std::lround(r.first));
        p.max_units = static_cast<int>(std::lround(r.second));
        const std::string unit = e.value("unit", std::string("cent"));
        if (unit == "cent") {
          p.cents_per_unit = 1;
        } else if (unit == "hundredth_tone") {
          p.cents_per_unit = 2;
        } else {
          fail(ErrorKind::kFormat, "pitch: unit must be 'cent' or 'hundredth_tone'");
        }
        spec.pitch = p;
      } else if (name == "add") {
        once(spec.add.has_value());
        AddNoiseSpec a;
        a.bank_path = e.at("bank").get<std::string>();
        if (e.contains("band") && !e.at("band").is_null()) {
          const auto b = interval(e, "band", {0, 0});
          a.band = BandSpec{b.first, b.second};
        }
        const auto snr = interval(e, "snr", {5.0, 15.0});
        a.min_snr_db = snr.first;
        a.max_snr_db = snr.second;
        std::filesystem::path p(a.bank_path);
        if (p.is_relative() && !opts.base_dir.empty()) p = opts.base_dir / p;
        a.bank = chain_detail::open_bank(p, a.band, spec.sample_rate, opts.threads);
        spec.add = std::move(a);
      } else if (name == "reverb") {
        once(spec.reverb.has_value());
        const auto r = interval(e, "room_scale", {0, 100});
        spec.reverb = ReverbSpec{r.first, r.second};
      } else if (name == "bandrej") {
        once(spec.bandrej.has_value());
        BandRejectSpec b;
        b.max_width_hz = e.value("max_width", 150.0);
        if (e.contains("center")) b.center_hz = interval(e, "center", {0, 0});
        spec.bandrej = b;
      } else if (name == "tdrop") {
        once(spec.tdrop.has_value());
        spec.tdrop = TimeDropSpec{e.value("duration_ms", 50.0)};
      } else {
        fail(ErrorKind::kFormat, "chain: unknown effect '" + name + "'");
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::kFormat, std::string("chain: ") + ex.what());
  }
  spec.validate();
  return spec;
}

inline EffectChainSpec load_chain_spec(const std::filesystem::path& path, int threads = 1) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kNotFound, path.string() + ": cannot open chain file");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::kFormat, path.string() + ": " + ex.what());
  }
  return chain_spec_from_json(doc, {path.parent_path(), threads});
}

inline nlohmann::json to_json(const EffectChainSpec& spec) {
  nlohmann::json chain = nlohmann::json::array();
  if (spec.pitch) {
    chain.push_back({{"effect", "pitch"},
                     {"range", {spec.pitch->min_units, spec.pitch->max_units}},
                     {"unit", spec.pitch->cents_per_unit == 1 ? "cent" : "hundredth_tone"}});
  }
  if (spec.add) {
    nlohmann::json a = {{"effect", "add"},
                        {"bank", spec.add->bank_path},
                        {"snr", {spec.add->min_snr_db, spec.add->max_snr_db}}};
    a["band"] = spec.add->band
                    ? nlohmann::json::array({spec.add->band->low_hz, spec.add->band->high_hz})
                    : nlohmann::json(nullptr);
    chain.push_back(a);
  }
  if (spec.reverb) {
    chain.push_back({{"effect", "reverb"},
                     {"room_scale", {spec.reverb->min_room_scale, spec.reverb->max_room_scale}}});
  }
  if (spec.bandrej) {
    nlohmann::json b = {{"effect", "bandrej"}, {"max_width", spec.bandrej->max_width_hz}};
    if (spec.bandrej->center_hz) {
      b["center"] = {spec.bandrej->center_hz->first, spec.bandrej->center_hz->second};
    }
    chain.push_back(b);
  }
  if (spec.tdrop) {
    chain.push_back({{"effect", "tdrop"}, {"duration_ms", spec.tdrop->duration_ms}});
  }
  return {{"sample_rate", spec.sample_rate}, {"chain", chain}};
}

inline nlohmann::json to_json(const ConcreteChain& chain) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : chain.effects) {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, PitchParams>) {
            out.push_back({{"effect", "pitch"}, {"cents", p.cents}});
          } else if constexpr (std::is_same_v<T, AddNoiseParams>) {
            out.push_back({{"effect", "add"},
                           {"segment", p.pick.segment},
                           {"offset", p.pick.offset},
                           {"snr_db", p.snr_db}});
          } else if constexpr (std::is_same_v<T, ReverbParams>) {
            out.push_back({{"effect", "reverb"}, {"room_scale", p.room_scale}});
          } else if constexpr (std::is_same_v<T, BandRejectParams>) {
            out.push_back({{"effect", "bandrej"},
                           {"center_hz", p.center_hz},
                           {"width_hz", p.width_hz}});
          } else {
            out.push_back({{"effect", "tdrop"},
                           {"start", p.start},
                           {"duration_ms", p.duration_ms}});
          }
        },
        e);
  }
  return out;
}

/// The default training augmentation: pitch + add + reverb.
inline EffectChainSpec default_training_chain(std::shared_ptr<const NoiseBank> bank,
                                              int sample_rate = 16000) {
  EffectChainSpec spec;
  spec.sample_rate = sample_rate;
  spec.pitch = PitchSpec{};
  if (bank) {
    AddNoiseSpec a;
    a.band = bank->band();
    a.bank_path = bank->origin();
    a.bank = std::move(bank);
    spec.add = std::move(a);
  }
  spec.reverb = ReverbSpec{};
  return spec;
}

}  // namespace cpcaug
