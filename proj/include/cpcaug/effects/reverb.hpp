// cpcaug/effects/reverb.hpp

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

#include <array>
#include <cmath>
#include <vector>

#include "cpcaug/audio/buffer.hpp"

namespace cpcaug {

/// Fixed reverb parameters; only room_scale is sampled per chain.
struct ReverbConfig {
  double hf_damping = 0.5;
  double wet_mix = 0.5;      // output = (1 - wet_mix) * dry + wet_mix * wet
  double wet_gain_db = 0.0;
  double input_gain = 0.015;  // Freeverb's fixed comb input gain
};

/// Comb feedback as a function of room scale in [0, 100].
inline double reverb_feedback(double room_scale) {
  return 0.7 + 0.28 * (room_scale / 100.0);
}

namespace reverb_detail {

// Freeverb tunings at 44.1 kHz, rescaled to the buffer's rate.
constexpr std::array<int, 8> kCombTuning = {1116, 1188, 1277, 1356,
                                            1422, 1491, 1557, 1617};
constexpr std::array<int, 4> kAllpassTuning = {556, 441, 341, 225};
constexpr double kAllpassFeedback = 0.5;

inline std::size_t scaled_delay(int tuning, int sample_rate) {
  const long d = std::lround(static_cast<double>(tuning) * sample_rate / 44100.0);
  return static_cast<std::size_t>(d < 1 ? 1 : d);
}

}  // namespace reverb_detail

/// Schroeder-Moorer reverberator (Freeverb topology, mono): eight damped
/// feedback combs in parallel followed by four allpasses in series. Feedback
/// stays below one for every valid room scale, so the filter is stable. The
/// tail is truncated to the input length.
inline AudioBuffer reverb(const AudioBuffer& buf, double room_scale,
                          const ReverbConfig& cfg = {}) {
  using namespace reverb_detail;
  require(room_scale >= 0.0 && room_scale <= 100.0,
          "reverb: room_scale must lie in [0, 100]");
  const double feedback = reverb_feedback(room_scale);
  const double damp = cfg.hf_damping;
  const double wet_gain = std::pow(10.0, cfg.wet_gain_db / 20.0);
  const int rate = buf.sample_rate();

  struct Comb {
    std::vector<double> line;
    std::size_t pos = 0;
    double store = 0.0;
  };
  struct Allpass {
    std::vector<double> line;
    std::size_t pos = 0;
  };
  std::array<Comb, 8> combs;
  std::array<Allpass, 4> allpasses;
  for (std::size_t i = 0; i < combs.size(); ++i) {
    combs[i].line.assign(scaled_delay(kCombTuning[i], rate), 0.0);
  }
  for (std::size_t i = 0; i < allpasses.size(); ++i) {
    allpasses[i].line.assign(scaled_delay(kAllpassTuning[i], rate), 0.0);
  }

  std::vector<float> out(buf.size());
  const auto in = buf.samples();
  for (std::size_t n = 0; n < in.size(); ++n) {
    const double dry = in[n];
    const double x = dry * cfg.input_gain;
    double wet = 0.0;
    for (auto& c : combs) {
      const double y = c.line[c.pos];
      c.store = y * (1.0 - damp) + c.store * damp;
      c.line[c.pos] = x + c.store * feedback;
      if (++c.pos == c.line.size()) c.pos = 0;
      wet += y;
    }
    for (auto& a : allpasses) {
      const double delayed = a.line[a.pos];
      const double y = delayed - wet;
      a.line[a.pos] = wet + delayed * kAllpassFeedback;
      if (++a.pos == a.line.size()) a.pos = 0;
      wet = y;
    }
    out[n] = static_cast<float>((1.0 - cfg.wet_mix) * dry +
                                cfg.wet_mix * wet_gain * wet);
  }
  return AudioBuffer(std::move(out), rate);
}

}  // namespace cpcaug
