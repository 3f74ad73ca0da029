// cpcaug/cpc/trainer.hpp

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
#include <cstdint>
#include <memory>
#include <vector>

#include "cpcaug/cpc/model.hpp"
#include "cpcaug/cpc/views.hpp"

namespace cpcaug {

struct AdamState {
  std::vector<float> m, v;
  std::uint64_t t = 0;
};

inline void adam_update(std::vector<float>& params, const std::vector<float>& grads,
                        AdamState& state, const CpcConfig& cfg, double lr) {
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0f);
    state.v.assign(params.size(), 0.0f);
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  const float b1 = static_cast<float>(cfg.beta1), b2 = static_cast<float>(cfg.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0f - b1) * grads[i];
    state.v[i] = b2 * state.v[i] + (1.0f - b2) * grads[i] * grads[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + cfg.adam_eps));
  }
}

/// Draws fixed-length windows: a uniform utterance among those long enough,
/// then a uniform offset.
class WindowSampler {
 public:
  WindowSampler(std::shared_ptr<const std::vector<AudioBuffer>> corpus, std::size_t window)
      : corpus_(std::move(corpus)), window_(window) {
    require(corpus_ != nullptr, "WindowSampler: no corpus");
    for (std::size_t i = 0; i < corpus_->size(); ++i) {
      if ((*corpus_)[i].size() >= window_) eligible_.push_back(i);
    }
    if (eligible_.empty()) {
      fail(ErrorKind::kEmpty, "WindowSampler: no utterance holds a " + std::to_string(window_) +
                                  "-sample window");
    }
  }

  std::vector<AudioBuffer> sample(std::size_t batch, RngStream& rng) const {
    std::vector<AudioBuffer> out;
    out.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      const AudioBuffer& u = (*corpus_)[eligible_[rng.index(eligible_.size())]];
      const std::size_t off = rng.index(u.size() - window_ + 1);
      const auto s = u.samples().subspan(off, window_);
      out.emplace_back(std::vector<float>(s.begin(), s.end()), u.sample_rate());
    }
    return out;
  }

  std::size_t window() const { return window_; }

 private:
  std::shared_ptr<const std::vector<AudioBuffer>> corpus_;
  std::size_t window_;
  std::vector<std::size_t> eligible_;
};

/// One optimization step. View chains come from RngStream(seed, {kViewStream,
/// step}) and negatives from RngStream(seed, {kNegativeStream, step}). Aborts
/// with kNumeric before touching the parameters if the loss or any gradient
/// is non-finite.
inline LossReport train_step(CpcModel<float>& model, AdamState& opt,
                             const std::vector<AudioBuffer>& batch, AugPlacement placement,
                             const EffectChainSpec& spec, std::uint64_t seed, std::uint64_t step,
                             int threads) {
  const auto views = make_views(batch, placement, spec, RngStream(seed, {kViewStream, step}),
                                threads);
  std::vector<AudioBuffer> past, future;
  for (const auto& v : views) {
    past.push_back(v.past);
    future.push_back(v.future);
  }
  auto result = batch_objective(model, past, future, RngStream(seed, {kNegativeStream, step}),
                                threads, true);
  for (float g : result.grads) {
    if (!std::isfinite(g)) fail(ErrorKind::kNumeric, "train_step: non-finite gradient");
  }
  adam_update(model.params(), result.grads, opt, model.config(), model.config().lr_at(step));
  return result.report;
}

/// Training loop state: model, optimizer, corpus sampler, augmentation.
class Trainer {
 public:
  Trainer(const CpcConfig& config, std::uint64_t seed,
          std::shared_ptr<const std::vector<AudioBuffer>> corpus, EffectChainSpec spec,
          AugPlacement placement, int threads = 1)
      : model_(CpcModel<float>::random(config, seed)),
        seed_(seed),
        sampler_(std::move(corpus), config.window_samples()),
        spec_(std::move(spec)),
        placement_(placement),
        threads_(threads) {
    if (!spec_.empty()) {
      require(spec_.sample_rate == config.sample_rate,
              "Trainer: chain rate differs from the model rate");
    }
  }

  LossReport step() {
    RngStream data(seed_, {kDataStream, step_});
    const auto batch = sampler_.sample(static_cast<std::size_t>(model_.config().batch_size), data);
    LossReport r = train_step(model_, opt_, batch, placement_, spec_, seed_, step_, threads_);
    ++step_;
    return r;
  }

  const CpcModel<float>& model() const { return model_; }
  CpcModel<float>& model() { return model_; }
  std::uint64_t steps_done() const { return step_; }
  std::uint64_t seed() const { return seed_; }

 private:
  CpcModel<float> model_;
  AdamState opt_;
  std::uint64_t seed_;
  std::uint64_t step_ = 0;
  WindowSampler sampler_;
  EffectChainSpec spec_;
  AugPlacement placement_;
  int threads_;
};

}  // namespace cpcaug
