// cpcaug/cpc/config.hpp

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
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpcaug/core/error.hpp"

namespace cpcaug {

enum class PredictorMode { kMultiHead, kPerStep };

inline const char* to_string(PredictorMode m) {
  return m == PredictorMode::kMultiHead ? "multi_head" : "per_step";
}

inline PredictorMode parse_predictor_mode(const std::string& s) {
  if (s == "multi_head") return PredictorMode::kMultiHead;
  if (s == "per_step") return PredictorMode::kPerStep;
  fail(ErrorKind::kInvalidArgument, "predictor mode must be multi_head or per_step");
}

struct CpcConfig {
  int sample_rate = 16000;
  std::vector<int> kernels{10, 8, 4, 4, 4};
  std::vector<int> strides{5, 4, 2, 2, 2};
  int encoder_dim = 256;
  int context_layers = 2;
  int context_dim = 256;
  int prediction_steps = 12;  // K
  int negatives = 128;        // N
  PredictorMode predictor_mode = PredictorMode::kMultiHead;
  int predictor_heads = 8;
  int predictor_ff_mult = 2;
  double norm_eps = 1e-5;

  double window_seconds = 1.0;
  int batch_size = 8;

  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int ramp_epochs = 10;
  int steps_per_epoch = 100;

  /// Desk-scale profile for CI and the synthetic trend study.
  static CpcConfig tiny() {
    CpcConfig c;
    c.encoder_dim = 32;
    c.context_dim = 32;
    c.prediction_steps = 4;
    c.negatives = 16;
    return c;
  }

  /// Smallest profile accepted by grad_check.
  static CpcConfig grad_check_profile() {
    CpcConfig c;
    c.encoder_dim = 8;
    c.context_dim = 8;
    c.prediction_steps = 2;
    c.negatives = 4;
    c.predictor_heads = 2;
    c.batch_size = 2;
    c.window_seconds = 0.16;  // 16 frames
    return c;
  }

  int hop() const {
    int h = 1;
    for (int s : strides) h *= s;
    return h;
  }

  static int padding(int kernel, int stride) { return (kernel - stride + 1) / 2; }

  /// Encoder output frames for `samples` input samples (0 if too short).
  std::size_t frames_for(std::size_t samples) const {
    long long n = static_cast<long long>(samples);
    for (std::size_t l = 0; l < kernels.size(); ++l) {
      const long long span = n + 2LL * padding(kernels[l], strides[l]) - kernels[l];
      if (span < 0) return 0;
      n = span / strides[l] + 1;
    }
    return static_cast<std::size_t>(n);
  }

  /// Input samples seen by one encoder frame.
  std::size_t receptive_field() const {
    std::size_t r = 1, jump = 1;
    for (std::size_t l = 0; l < kernels.size(); ++l) {
      r += static_cast<std::size_t>(kernels[l] - 1) * jump;
      jump *= static_cast<std::size_t>(strides[l]);
    }
    return r;
  }

  /// Frames [first, last) of a `samples`-long input whose receptive field
  /// lies inside the input, so no zero padding reaches them; {0, 0} if none.
  std::pair<std::size_t, std::size_t> interior_frames(std::size_t samples) const {
    std::size_t lead = 0, jump = 1;
    for (std::size_t l = 0; l < kernels.size(); ++l) {
      lead += static_cast<std::size_t>(padding(kernels[l], strides[l])) * jump;
      jump *= static_cast<std::size_t>(strides[l]);
    }
    const std::size_t r = receptive_field();
    if (samples + lead < r) return {0, 0};
    const std::size_t first = (lead + jump - 1) / jump;
    const std::size_t last = std::min(frames_for(samples), (samples + lead - r) / jump + 1);
    if (last <= first) return {0, 0};
    return {first, last};
  }

  double frame_rate() const { return static_cast<double>(sample_rate) / hop(); }

  std::size_t window_samples() const {
    return static_cast<std::size_t>(std::lround(window_seconds * sample_rate));
  }

  double lr_at(std::uint64_t step) const {
    const double epoch = static_cast<double>(step / static_cast<std::uint64_t>(steps_per_epoch));
    return learning_rate * std::min(1.0, (epoch + 1.0) / ramp_epochs);
  }

  void validate() const {
    require(sample_rate > 0, "config: sample_rate must be positive");
    require(!kernels.empty() && kernels.size() == strides.size(),
            "config: kernels and strides must be non-empty and equally long");
    for (std::size_t l = 0; l < kernels.size(); ++l) {
      require(kernels[l] >= 1 && strides[l] >= 1 && kernels[l] >= strides[l],
              "config: each kernel must be >= its stride >= 1");
    }
    require(encoder_dim > 0 && context_dim > 0, "config: dims must be positive");
    require(context_layers >= 1 && context_layers <= 3, "config: context_layers must be 1..3");
    require(prediction_steps > 0, "config: prediction_steps must be positive");
    require(negatives > 0, "config: negatives must be positive");
    require(predictor_heads > 0 && context_dim % predictor_heads == 0,
            "config: predictor_heads must divide context_dim");
    require(predictor_ff_mult > 0, "config: predictor_ff_mult must be positive");
    require(norm_eps > 0, "config: norm_eps must be positive");
    require(window_seconds > 0 && batch_size > 0, "config: window and batch must be positive");
    require(learning_rate > 0 && beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 &&
                adam_eps > 0,
            "config: bad optimizer settings");
    require(ramp_epochs > 0 && steps_per_epoch > 0, "config: ramp settings must be positive");
    const std::size_t t = frames_for(window_samples());
    require(t > static_cast<std::size_t>(prediction_steps),
            "config: window yields " + std::to_string(t) + " frames, need more than K");
    require(static_cast<std::size_t>(negatives) < t * static_cast<std::size_t>(batch_size),
            "config: negatives must be fewer than the batch frame count");
  }
};

inline void to_json(nlohmann::json& j, const CpcConfig& c) {
  j = {{"sample_rate", c.sample_rate},
       {"kernels", c.kernels},
       {"strides", c.strides},
       {"encoder_dim", c.encoder_dim},
       {"context_layers", c.context_layers},
       {"context_dim", c.context_dim},
       {"prediction_steps", c.prediction_steps},
       {"negatives", c.negatives},
       {"predictor_mode", to_string(c.predictor_mode)},
       {"predictor_heads", c.predictor_heads},
       {"predictor_ff_mult", c.predictor_ff_mult},
       {"norm_eps", c.norm_eps},
       {"window_seconds", c.window_seconds},
       {"batch_size", c.batch_size},
       {"learning_rate", c.learning_rate},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"adam_eps", c.adam_eps},
       {"ramp_epochs", c.ramp_epochs},
       {"steps_per_epoch", c.steps_per_epoch}};
}

/// Missing keys keep the values already in `c`, so a partial document
/// overlays a base profile. Unknown keys are rejected.
inline void merge_json(CpcConfig& c, const nlohmann::json& j) {
  require(j.is_object(), "config: expected a JSON object", ErrorKind::kFormat);
  const nlohmann::json known = c;
  for (const auto& [key, value] : j.items()) {
    require(known.contains(key), "config: unknown key '" + key + "'", ErrorKind::kFormat);
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("sample_rate", c.sample_rate);
    get("kernels", c.kernels);
    get("strides", c.strides);
    get("encoder_dim", c.encoder_dim);
    get("context_layers", c.context_layers);
    get("context_dim", c.context_dim);
    get("prediction_steps", c.prediction_steps);
    get("negatives", c.negatives);
    if (j.contains("predictor_mode")) {
      c.predictor_mode = parse_predictor_mode(j.at("predictor_mode").get<std::string>());
    }
    get("predictor_heads", c.predictor_heads);
    get("predictor_ff_mult", c.predictor_ff_mult);
    get("norm_eps", c.norm_eps);
    get("window_seconds", c.window_seconds);
    get("batch_size", c.batch_size);
    get("learning_rate", c.learning_rate);
    get("beta1", c.beta1);
    get("beta2", c.beta2);
    get("adam_eps", c.adam_eps);
    get("ramp_epochs", c.ramp_epochs);
    get("steps_per_epoch", c.steps_per_epoch);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("config: ") + e.what());
  }
}

inline void from_json(const nlohmann::json& j, CpcConfig& c) {
  c = CpcConfig{};
  merge_json(c, j);
}

}  // namespace cpcaug
