// cpcaug/cpc/model.hpp

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
#include <span>
#include <string>
#include <vector>

#include "cpcaug/audio/buffer.hpp"
#include "cpcaug/core/features.hpp"
#include "cpcaug/core/parallel.hpp"
#include "cpcaug/core/rng.hpp"
#include "cpcaug/cpc/config.hpp"
#include "cpcaug/cpc/layers.hpp"
#include "cpcaug/cpc/loss.hpp"

namespace cpcaug {

// Root-path tags that keep the model's random streams apart.
inline constexpr std::uint64_t kInitStream = 1;
inline constexpr std::uint64_t kDataStream = 2;
inline constexpr std::uint64_t kViewStream = 3;
inline constexpr std::uint64_t kNegativeStream = 4;

/// CPC network: strided conv encoder (conv, channel norm, ReLU per layer),
/// LSTM context, transformer predictor with K linear heads. Parameters live in
/// one flat vector; S is float for training and double for gradient checks.
template <class S>
class CpcModel {
 public:
  using Mat = nn::Mat<S>;

  enum class Init { kFanIn, kRecurrent, kHead, kZero, kOne };

  /// Prediction heads start at this fraction of the fan-in range, so initial
  /// logits are small and the loss starts near ln(N + 1). At full scale the
  /// large random logits push the encoder toward constant output.
  static constexpr double kHeadInitScale = 0.1;

  struct EncoderLayer {
    std::size_t w, b, gamma, beta;
    nn::ConvGeometry geometry;
  };
  struct LstmLayer {
    std::size_t wx, wh, b;
  };
  struct Head {
    std::size_t w, b;
  };

  struct EncoderCache {
    std::vector<Mat> cols;  // im2col of each conv layer input
    std::vector<Eigen::Index> in_rows;
    std::vector<nn::NormCache<S>> norms;
    Mat output;  // z, post-ReLU of the last layer
    std::vector<Mat> relu_out;  // post-ReLU output of each layer
  };
  struct ContextCache {
    std::vector<nn::LstmCache<S>> layers;
  };
  struct PredictorCache {
    std::vector<nn::TransformerCache<S>> layers;
    std::vector<Mat> hidden;  // transformer output feeding each head group
  };

  explicit CpcModel(CpcConfig config) : config_(std::move(config)) {
    config_.validate();
    build_layout();
    params_.assign(layout_.total(), S(0));
  }

  /// Uniform fan-in initialization fixed by `seed` (scaled down for the
  /// prediction heads); biases 0, norm gains 1.
  static CpcModel random(const CpcConfig& config, std::uint64_t seed) {
    CpcModel m(config);
    const RngStream root(seed, {kInitStream});
    for (std::size_t i = 0; i < m.layout_.tensors().size(); ++i) {
      const auto& t = m.layout_[i];
      auto w = nn::view(m.params_, t);
      switch (m.init_[i]) {
        case Init::kZero: w.setZero(); break;
        case Init::kOne: w.setOnes(); break;
        case Init::kFanIn:
        case Init::kHead:
        case Init::kRecurrent: {
          const double fan = m.init_[i] == Init::kRecurrent
                                 ? static_cast<double>(t.cols / 4)
                                 : static_cast<double>(t.rows);
          const double a = (m.init_[i] == Init::kHead ? kHeadInitScale : 1.0) / std::sqrt(fan);
          RngStream r = root.child(i);
          for (Eigen::Index k = 0; k < w.size(); ++k) {
            w.data()[k] = static_cast<S>(r.uniform(-a, a));
          }
          break;
        }
      }
    }
    return m;
  }

  template <class T>
  CpcModel<T> cast() const {
    CpcModel<T> out(config_);
    for (std::size_t i = 0; i < params_.size(); ++i) out.params()[i] = static_cast<T>(params_[i]);
    return out;
  }

  const CpcConfig& config() const { return config_; }
  const nn::ParamLayout& layout() const { return layout_; }
  std::vector<S>& params() { return params_; }
  const std::vector<S>& params() const { return params_; }
  std::size_t num_params() const { return params_.size(); }
  const std::vector<EncoderLayer>& encoder_layers() const { return encoder_; }

  // --- encoder --------------------------------------------------------------

  Mat encode(std::span<const float> wave, EncoderCache& cache) const {
    if (wave.size() < config_.receptive_field()) {
      fail(ErrorKind::kRange, "encode: " + std::to_string(wave.size()) +
                                  " samples is shorter than the receptive field of " +
                                  std::to_string(config_.receptive_field()));
    }
    Mat x(static_cast<Eigen::Index>(wave.size()), 1);
    for (std::size_t i = 0; i < wave.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = wave[i];
    cache.cols.clear();
    cache.in_rows.clear();
    cache.norms.assign(encoder_.size(), {});
    cache.relu_out.clear();
    for (std::size_t l = 0; l < encoder_.size(); ++l) {
      const auto& L = encoder_[l];
      cache.in_rows.push_back(x.rows());
      cache.cols.push_back(nn::im2col<S>(x, L.geometry));
      const Mat y = nn::conv_forward_col<S>(cache.cols.back(), P(L.w), P(L.b));
      const Mat n = nn::norm_forward<S>(y, P(L.gamma), P(L.beta), config_.norm_eps,
                                        cache.norms[l]);
      x = n.cwiseMax(S(0));
      cache.relu_out.push_back(x);
    }
    cache.output = x;
    return x;
  }

  Mat encode(std::span<const float> wave) const {
    EncoderCache cache;
    return encode(wave, cache);
  }

  void encoder_backward(const Mat& dz, const EncoderCache& cache, std::vector<S>& grads) const {
    Mat d = dz;
    for (std::size_t l = encoder_.size(); l-- > 0;) {
      const auto& L = encoder_[l];
      d = (cache.relu_out[l].array() > S(0)).select(d, S(0));
      const Mat dy = nn::norm_backward<S>(d, cache.norms[l], P(L.gamma), G(grads, L.gamma),
                                          G(grads, L.beta));
      d = nn::conv_backward_col<S>(cache.cols[l], cache.in_rows[l], dy, L.geometry, P(L.w),
                                   G(grads, L.w), G(grads, L.b), l > 0);
    }
  }

  // --- context --------------------------------------------------------------

  Mat contextualize(const Mat& z, ContextCache& cache) const {
    cache.layers.assign(lstm_.size(), {});
    Mat h = z;
    for (std::size_t l = 0; l < lstm_.size(); ++l) {
      h = nn::lstm_forward<S>(h, P(lstm_[l].wx), P(lstm_[l].wh), P(lstm_[l].b), cache.layers[l]);
    }
    return h;
  }

  Mat contextualize(const Mat& z) const {
    ContextCache cache;
    return contextualize(z, cache);
  }

  Mat context_backward(const Mat& dc, const ContextCache& cache, std::vector<S>& grads) const {
    Mat d = dc;
    for (std::size_t l = lstm_.size(); l-- > 0;) {
      const auto& L = lstm_[l];
      d = nn::lstm_backward<S>(d, cache.layers[l], P(L.wx), P(L.wh), G(grads, L.wx),
                               G(grads, L.wh), G(grads, L.b));
    }
    return d;
  }

  // --- predictor ------------------------------------------------------------

  /// K predictions per frame: result[k] row t predicts z_{t+k+1}.
  std::vector<Mat> predict(const Mat& c, PredictorCache& cache) const {
    const int K = config_.prediction_steps;
    cache.layers.assign(transformers_.size(), {});
    cache.hidden.clear();
    for (std::size_t i = 0; i < transformers_.size(); ++i) {
      cache.hidden.push_back(nn::transformer_forward<S>(c, params_, layout_, transformers_[i],
                                                        config_.predictor_heads,
                                                        config_.norm_eps, cache.layers[i]));
    }
    std::vector<Mat> out;
    for (int k = 0; k < K; ++k) {
      const Mat& h = cache.hidden[shared_predictor() ? 0 : static_cast<std::size_t>(k)];
      out.push_back(nn::linear_forward<S>(h, P(heads_[k].w), P(heads_[k].b)));
    }
    return out;
  }

  std::vector<Mat> predict(const Mat& c) const {
    PredictorCache cache;
    return predict(c, cache);
  }

  Mat predictor_backward(const std::vector<Mat>& dpred, const PredictorCache& cache,
                         std::vector<S>& grads) const {
    std::vector<Mat> dhidden(cache.hidden.size());
    for (std::size_t i = 0; i < cache.hidden.size(); ++i) {
      dhidden[i] = Mat::Zero(cache.hidden[i].rows(), cache.hidden[i].cols());
    }
    for (std::size_t k = 0; k < heads_.size(); ++k) {
      const std::size_t i = shared_predictor() ? 0 : k;
      dhidden[i] += nn::linear_backward<S>(cache.hidden[i], dpred[k], P(heads_[k].w),
                                           G(grads, heads_[k].w), G(grads, heads_[k].b));
    }
    Mat dc;
    for (std::size_t i = 0; i < transformers_.size(); ++i) {
      Mat d = nn::transformer_backward<S>(dhidden[i], params_, grads, layout_, transformers_[i],
                                          config_.predictor_heads, cache.layers[i]);
      if (i == 0) {
        dc = std::move(d);
      } else {
        dc += d;
      }
    }
    return dc;
  }

  bool shared_predictor() const {
    return config_.predictor_mode == PredictorMode::kMultiHead;
  }

 private:
  nn::CMatMap<S> P(std::size_t i) const { return nn::view(params_, layout_[i]); }
  nn::MatMap<S> G(std::vector<S>& g, std::size_t i) const { return nn::view(g, layout_[i]); }

  std::size_t add(const std::string& name, Eigen::Index r, Eigen::Index c, Init init) {
    init_.push_back(init);
    return layout_.add(name, r, c);
  }

  void build_layout() {
    const Eigen::Index D = config_.encoder_dim, H = config_.context_dim;
    Eigen::Index in = 1;
    for (std::size_t l = 0; l < config_.kernels.size(); ++l) {
      const std::string p = "encoder." + std::to_string(l);
      EncoderLayer L;
      L.geometry = {config_.kernels[l], config_.strides[l],
                    CpcConfig::padding(config_.kernels[l], config_.strides[l])};
      L.w = add(p + ".w", config_.kernels[l] * in, D, Init::kFanIn);
      L.b = add(p + ".b", 1, D, Init::kZero);
      L.gamma = add(p + ".norm.gamma", 1, D, Init::kOne);
      L.beta = add(p + ".norm.beta", 1, D, Init::kZero);
      encoder_.push_back(L);
      in = D;
    }
    for (int l = 0; l < config_.context_layers; ++l) {
      const std::string p = "context." + std::to_string(l);
      LstmLayer L;
      L.wx = add(p + ".wx", l == 0 ? D : H, 4 * H, Init::kRecurrent);
      L.wh = add(p + ".wh", H, 4 * H, Init::kRecurrent);
      L.b = add(p + ".b", 1, 4 * H, Init::kZero);
      lstm_.push_back(L);
    }
    const int n_tf = shared_predictor() ? 1 : config_.prediction_steps;
    for (int i = 0; i < n_tf; ++i) {
      const std::size_t first = layout_.tensors().size();
      transformers_.push_back(nn::TransformerParams::add(
          layout_, "predictor.transformer." + std::to_string(i), H,
          H * config_.predictor_ff_mult));
      for (std::size_t t = first; t < layout_.tensors().size(); ++t) {
        const std::string& name = layout_[t].name;
        const auto ends = [&](const char* s) {
          const std::string suf(s);
          return name.size() >= suf.size() &&
                 name.compare(name.size() - suf.size(), suf.size(), suf) == 0;
        };
        if (ends(".gamma")) {
          init_.push_back(Init::kOne);
        } else if (ends(".beta") || layout_[t].rows == 1) {
          init_.push_back(Init::kZero);
        } else {
          init_.push_back(Init::kFanIn);
        }
      }
    }
    for (int k = 0; k < config_.prediction_steps; ++k) {
      const std::string p = "predictor.head." + std::to_string(k);
      heads_.push_back({add(p + ".w", H, D, Init::kHead), add(p + ".b", 1, D, Init::kZero)});
    }
  }

  CpcConfig config_;
  nn::ParamLayout layout_;
  std::vector<Init> init_;
  std::vector<S> params_;
  std::vector<EncoderLayer> encoder_;
  std::vector<LstmLayer> lstm_;
  std::vector<nn::TransformerParams> transformers_;
  std::vector<Head> heads_;
};

// ---------------------------------------------------------------------------
// Batch objective shared by training and gradient checking
// ---------------------------------------------------------------------------

template <class S>
struct BatchResult {
  LossReport report;
  std::vector<S> grads;  // empty unless requested
};

/// InfoNCE over a batch of view pairs. Past views feed the context network;
/// future-view encoder frames of the whole batch are the candidate pool.
/// Only the T interior frames (receptive field inside the window) take part:
/// padded edge frames are easy to tell apart and would give the predictor a
/// positional shortcut. Queries cover t in [0, T - K) for every k; negatives for query (b, k, t)
/// come from `negatives.child(b).child(k).child(t)`. Work is split per item and
/// reduced in item order, so results do not depend on `threads`. When
/// `relu_signs` is given it receives the on/off state of every ReLU unit.
template <class S>
BatchResult<S> batch_objective(const CpcModel<S>& model, const std::vector<AudioBuffer>& past,
                               const std::vector<AudioBuffer>& future,
                               const RngStream& negatives, int threads, bool want_grad,
                               std::vector<std::uint8_t>* relu_signs = nullptr) {
  using Mat = nn::Mat<S>;
  const auto& cfg = model.config();
  const std::size_t B = past.size();
  require(B > 0 && future.size() == B, "batch_objective: need equal, non-empty view lists");
  const std::size_t len = past[0].size();
  for (std::size_t b = 0; b < B; ++b) {
    require(past[b].size() == len && future[b].size() == len,
            "batch_objective: views must share one length");
  }
  const std::size_t K = static_cast<std::size_t>(cfg.prediction_steps);
  const std::size_t N = static_cast<std::size_t>(cfg.negatives);

  struct Item {
    typename CpcModel<S>::EncoderCache past_enc, future_enc;
    typename CpcModel<S>::ContextCache ctx;
    typename CpcModel<S>::PredictorCache pred;
    std::vector<Mat> predictions;
    Mat z_future;
    double loss_sum = 0.0;
    std::vector<std::size_t> correct;
    std::vector<Mat> dpred;
    Mat dz_pool;
  };
  std::vector<Item> items(B);
  const auto [first, last] = cfg.interior_frames(len);
  const auto f0 = static_cast<Eigen::Index>(first);
  const auto T = static_cast<Eigen::Index>(last - first);
  require(static_cast<std::size_t>(T) > K,
          "batch_objective: window has " + std::to_string(T) + " interior frames, need more than K");

  parallel_for(B, threads, [&](std::size_t b) {
    Item& it = items[b];
    const Mat z = model.encode(past[b].samples(), it.past_enc).middleRows(f0, T);
    const Mat c = model.contextualize(z, it.ctx);
    it.predictions = model.predict(c, it.pred);
    it.z_future = model.encode(future[b].samples(), it.future_enc).middleRows(f0, T);
  });

  if (relu_signs) {
    relu_signs->clear();
    auto push = [&](const Mat& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) relu_signs->push_back(m.data()[i] > S(0));
    };
    for (const Item& it : items) {
      for (const auto& m : it.past_enc.relu_out) push(m);
      for (const auto& m : it.future_enc.relu_out) push(m);
      for (const auto& l : it.pred.layers) push(l.f1);
    }
  }

  const Eigen::Index D = items[0].z_future.cols();
  const std::size_t queries_per_step =
      B * static_cast<std::size_t>(T - static_cast<Eigen::Index>(K));
  const double scale = 1.0 / static_cast<double>(queries_per_step * K);

  Mat pool(static_cast<Eigen::Index>(B) * T, D);
  for (std::size_t b = 0; b < B; ++b) {
    pool.middleRows(static_cast<Eigen::Index>(b) * T, T) = items[b].z_future;
  }

  parallel_for(B, threads, [&](std::size_t b) {
    Item& it = items[b];
    it.correct.assign(K, 0);
    if (want_grad) {
      it.dpred.assign(K, Mat::Zero(T, D));
      it.dz_pool = Mat::Zero(pool.rows(), D);
    }
    const RngStream item_rng = negatives.child(b);
    std::vector<double> logits(N + 1);
    std::vector<std::size_t> rows(N + 1);
    for (std::size_t k = 0; k < K; ++k) {
      const RngStream step_rng = item_rng.child(k);
      for (Eigen::Index t = 0; t + static_cast<Eigen::Index>(K) < T; ++t) {
        const std::size_t positive =
            b * static_cast<std::size_t>(T) + static_cast<std::size_t>(t) + k + 1;
        RngStream r = step_rng.child(static_cast<std::uint64_t>(t));
        const auto neg = sample_negatives(static_cast<std::size_t>(pool.rows()), positive, N, r);
        rows[0] = positive;
        std::copy(neg.begin(), neg.end(), rows.begin() + 1);
        const auto p = it.predictions[k].row(t);
        for (std::size_t j = 0; j <= N; ++j) {
          logits[j] = static_cast<double>(p.dot(pool.row(static_cast<Eigen::Index>(rows[j]))));
        }
        const QueryLoss q = info_nce_query(logits);
        it.loss_sum += q.loss;
        it.correct[k] += q.correct ? 1 : 0;
        if (!want_grad) continue;
        for (std::size_t j = 0; j <= N; ++j) {
          const S g = static_cast<S>(q.dlogits[j] * scale);
          const auto row = static_cast<Eigen::Index>(rows[j]);
          it.dpred[k].row(t) += g * pool.row(row);
          it.dz_pool.row(row) += g * p;
        }
      }
    }
  });

  BatchResult<S> result;
  double loss_sum = 0.0;
  std::vector<std::size_t> correct(K, 0);
  for (const Item& it : items) {
    loss_sum += it.loss_sum;
    for (std::size_t k = 0; k < K; ++k) correct[k] += it.correct[k];
  }
  result.report.loss = loss_sum * scale;
  for (std::size_t k = 0; k < K; ++k) {
    result.report.per_step_accuracy.push_back(static_cast<double>(correct[k]) /
                                              static_cast<double>(queries_per_step));
  }
  if (!std::isfinite(result.report.loss)) {
    fail(ErrorKind::kNumeric, "batch_objective: non-finite loss");
  }
  if (!want_grad) return result;

  Mat dz_pool = Mat::Zero(pool.rows(), D);
  for (const Item& it : items) dz_pool += it.dz_pool;

  std::vector<std::vector<S>> item_grads(B);
  parallel_for(B, threads, [&](std::size_t b) {
    Item& it = items[b];
    auto& g = item_grads[b];
    g.assign(model.num_params(), S(0));
    const Mat dc = model.predictor_backward(it.dpred, it.pred, g);
    const Eigen::Index full = it.past_enc.output.rows();
    Mat dz = Mat::Zero(full, D);
    dz.middleRows(f0, T) = model.context_backward(dc, it.ctx, g);
    model.encoder_backward(dz, it.past_enc, g);
    dz.setZero();
    dz.middleRows(f0, T) = dz_pool.middleRows(static_cast<Eigen::Index>(b) * T, T);
    model.encoder_backward(dz, it.future_enc, g);
  });
  result.grads.assign(model.num_params(), S(0));
  for (const auto& g : item_grads) {
    for (std::size_t i = 0; i < g.size(); ++i) result.grads[i] += g[i];
  }
  return result;
}

/// Deterministic inference pass without augmentation.
inline FeatureSequence extract_features(const CpcModel<float>& model, const AudioBuffer& wave,
                                        FeatureLevel level) {
  require(wave.sample_rate() == model.config().sample_rate,
          "extract_features: wave rate differs from the model rate");
  FeatureSequence f;
  f.level = level;
  f.frame_rate = model.config().frame_rate();
  const auto z = model.encode(wave.samples());
  f.frames = level == FeatureLevel::kZ ? z : model.contextualize(z);
  return f;
}

}  // namespace cpcaug
