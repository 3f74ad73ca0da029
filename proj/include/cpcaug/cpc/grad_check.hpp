// cpcaug/cpc/grad_check.hpp

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
#include <functional>
#include <string>
#include <vector>

#include "cpcaug/cpc/model.hpp"

namespace cpcaug {

enum class Stencil { kThreePoint, kFivePoint };

struct GradCheckOptions {
  double eps = 1e-4;
  /// Five-point central differences have O(eps^4) truncation error; the
  /// three-point form is kept for comparison.
  Stencil stencil = Stencil::kFivePoint;
  double sample_fraction = 0.01;
  std::size_t min_per_tensor = 3;  // every tensor contributes at least this many
  std::uint64_t seed = 0;          // parameter sample
  /// A stencil that flips any ReLU is retried with the step divided by 10,
  /// up to this many times, before the draw is skipped.
  int max_shrinks = 2;
  /// Denominator floor for the relative error, so parameters whose true
  /// gradient is near zero compare on an absolute scale.
  double abs_floor = 1e-5;
  /// Test hook applied to the analytic gradient before comparison.
  std::function<void(std::vector<double>&)> corrupt;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_analytic = 0.0;
  double max_abs_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t shrunk = 0;   // needed a smaller step to clear a ReLU kink
  std::size_t skipped = 0;  // stencil straddled a ReLU kink at every step
  std::vector<std::string> unchecked;  // tensors with no kink-free draw
  std::string worst;        // tensor[index] with the largest error
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares analytic gradients of the batch objective with central
/// differences in double precision, over a random sample of parameters.
inline GradCheckResult grad_check(const CpcModel<double>& model,
                                  const std::vector<AudioBuffer>& past,
                                  const std::vector<AudioBuffer>& future,
                                  const RngStream& negatives, const GradCheckOptions& opt = {}) {
  const auto& cfg = model.config();
  require(cfg.encoder_dim <= 8 && cfg.context_dim <= 8 && cfg.prediction_steps <= 2 &&
              cfg.negatives <= 4 && cfg.frames_for(past.at(0).size()) <= 20,
          "grad_check: needs a tiny config (dims <= 8, K <= 2, N <= 4, T <= 20)");

  std::vector<std::uint8_t> base_signs;
  auto analytic = batch_objective(model, past, future, negatives, 1, true, &base_signs).grads;
  if (opt.corrupt) opt.corrupt(analytic);

  CpcModel<double> probe = model;
  GradCheckResult res;
  const RngStream pick(opt.seed, {0x67726164});
  const auto& tensors = model.layout().tensors();
  std::vector<std::uint8_t> signs;
  for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
    const auto& t = tensors[ti];
    const std::size_t want = std::min(
        t.size(), std::max(opt.min_per_tensor,
                           static_cast<std::size_t>(std::ceil(opt.sample_fraction * t.size()))));
    RngStream r = pick.child(ti);
    // Kink-straddling draws are replaced by further draws from the tensor.
    std::size_t done = 0;
    for (std::size_t local : r.sample_without_replacement(t.size(), t.size())) {
      if (done == want) break;
      const std::size_t i = t.offset + local;
      const double orig = probe.params()[i];
      bool kink = false;
      auto loss_at = [&](double offset) {
        probe.params()[i] = orig + offset;
        const double l =
            batch_objective(probe, past, future, negatives, 1, false, &signs).report.loss;
        kink = kink || signs != base_signs;
        return l;
      };
      double numeric = 0.0;
      for (int shrink = 0; shrink <= opt.max_shrinks; ++shrink) {
        const double h = opt.eps * std::pow(0.1, shrink);
        kink = false;
        if (opt.stencil == Stencil::kThreePoint) {
          numeric = (loss_at(h) - loss_at(-h)) / (2.0 * h);
        } else {
          numeric = (8.0 * (loss_at(h) - loss_at(-h)) - (loss_at(2 * h) - loss_at(-2 * h))) /
                    (12.0 * h);
        }
        if (!kink) {
          if (shrink > 0) ++res.shrunk;
          break;
        }
      }
      probe.params()[i] = orig;
      if (kink) {
        ++res.skipped;
        continue;
      }
      ++done;
      const double a = analytic[i];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), opt.abs_floor});
      ++res.checked;
      res.max_abs_analytic = std::max(res.max_abs_analytic, std::abs(a));
      res.max_abs_numeric = std::max(res.max_abs_numeric, std::abs(numeric));
      if (rel >= res.max_rel_error) {
        res.max_rel_error = rel;
        res.worst = t.name + "[" + std::to_string(local) + "]";
        res.worst_analytic = a;
        res.worst_numeric = numeric;
      }
    }
    if (done == 0) res.unchecked.push_back(t.name);
  }
  return res;
}

/// Tiny random batch for grad_check: `batch` noise windows of the config's
/// window length, used unaugmented as both views.
inline std::vector<AudioBuffer> grad_check_batch(const CpcConfig& cfg, std::uint64_t seed) {
  std::vector<AudioBuffer> out;
  RngStream r(seed, {0x626174});
  for (int b = 0; b < cfg.batch_size; ++b) {
    std::vector<float> x(cfg.window_samples());
    for (auto& v : x) v = static_cast<float>(r.uniform(-0.5, 0.5));
    out.emplace_back(std::move(x), cfg.sample_rate);
  }
  return out;
}

}  // namespace cpcaug
