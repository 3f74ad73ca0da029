// cpcaug/cpc/loss.hpp

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
#include <span>
#include <vector>

#include "cpcaug/core/error.hpp"
#include "cpcaug/core/rng.hpp"
#include "cpcaug/cpc/layers.hpp"

namespace cpcaug {

struct LossReport {
  double loss = 0.0;
  std::vector<double> per_step_accuracy;  // one entry per prediction step k
};

/// InfoNCE for one query. logits[0] scores the positive, the rest score the
/// negatives.
struct QueryLoss {
  double loss = 0.0;
  bool correct = false;           // positive strictly above every negative
  std::vector<double> dlogits;    // d loss / d logits
};

inline QueryLoss info_nce_query(std::span<const double> logits) {
  require(!logits.empty(), "info_nce: no logits");
  double m = logits[0];
  double best_negative = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (!std::isfinite(logits[j])) fail(ErrorKind::kNumeric, "info_nce: non-finite logit");
    m = std::max(m, logits[j]);
    if (j > 0) best_negative = std::max(best_negative, logits[j]);
  }
  QueryLoss q;
  q.dlogits.resize(logits.size());
  double z = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    q.dlogits[j] = std::exp(logits[j] - m);
    z += q.dlogits[j];
  }
  for (auto& g : q.dlogits) g /= z;
  q.dlogits[0] -= 1.0;
  q.loss = std::log(z) + m - logits[0];
  q.correct = logits[0] > best_negative;
  return q;
}

/// Loss over logit tables, one per prediction step: row q is a query, column
/// 0 its positive and columns 1..N its negatives.
inline LossReport cpc_loss(const std::vector<nn::Mat<double>>& logits_per_step) {
  require(!logits_per_step.empty(), "cpc_loss: no prediction steps");
  LossReport r;
  double total = 0.0;
  for (const auto& table : logits_per_step) {
    require(table.rows() > 0 && table.cols() >= 2, "cpc_loss: empty logit table");
    double sum = 0.0;
    std::size_t correct = 0;
    std::vector<double> row(static_cast<std::size_t>(table.cols()));
    for (Eigen::Index q = 0; q < table.rows(); ++q) {
      for (Eigen::Index j = 0; j < table.cols(); ++j) row[j] = table(q, j);
      const QueryLoss ql = info_nce_query(row);
      sum += ql.loss;
      correct += ql.correct ? 1 : 0;
    }
    total += sum / static_cast<double>(table.rows());
    r.per_step_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(table.rows()));
  }
  r.loss = total / static_cast<double>(logits_per_step.size());
  return r;
}

/// Loss from vectors: predictions[k] and positives[k] are Q x D,
/// negatives[k][q] is N x D.
inline LossReport cpc_loss(const std::vector<nn::Mat<double>>& predictions,
                           const std::vector<nn::Mat<double>>& positives,
                           const std::vector<std::vector<nn::Mat<double>>>& negatives) {
  require(predictions.size() == positives.size() && predictions.size() == negatives.size(),
          "cpc_loss: step counts differ");
  std::vector<nn::Mat<double>> tables;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    const auto& p = predictions[k];
    require(positives[k].rows() == p.rows() && positives[k].cols() == p.cols() &&
                negatives[k].size() == static_cast<std::size_t>(p.rows()),
            "cpc_loss: shape mismatch");
    const Eigen::Index n = p.rows() > 0 ? negatives[k][0].rows() : 0;
    nn::Mat<double> t(p.rows(), n + 1);
    for (Eigen::Index q = 0; q < p.rows(); ++q) {
      const auto& neg = negatives[k][static_cast<std::size_t>(q)];
      require(neg.rows() == n && neg.cols() == p.cols(), "cpc_loss: shape mismatch");
      t(q, 0) = p.row(q).dot(positives[k].row(q));
      t.row(q).tail(n) = (neg * p.row(q).transpose()).transpose();
    }
    tables.push_back(std::move(t));
  }
  return cpc_loss(tables);
}

/// N distinct frame indices drawn uniformly from [0, total_frames) minus the
/// positive.
inline std::vector<std::size_t> sample_negatives(std::size_t total_frames, std::size_t positive,
                                                 std::size_t n, RngStream& rng) {
  require(positive < total_frames, "sample_negatives: positive out of range");
  if (total_frames - 1 < n) {
    fail(ErrorKind::kRange, "sample_negatives: " + std::to_string(total_frames - 1) +
                                " candidates for " + std::to_string(n) + " negatives");
  }
  auto idx = rng.sample_without_replacement(total_frames - 1, n);
  for (auto& i : idx) {
    if (i >= positive) ++i;
  }
  return idx;
}

/// Gathers the sampled rows of `frames` (all future-view frames of a batch).
template <class S>
nn::Mat<S> sample_negatives(const nn::Mat<S>& frames, std::size_t positive, std::size_t n,
                            RngStream& rng) {
  const auto idx = sample_negatives(static_cast<std::size_t>(frames.rows()), positive, n, rng);
  nn::Mat<S> out(static_cast<Eigen::Index>(n), frames.cols());
  for (std::size_t i = 0; i < n; ++i) out.row(static_cast<Eigen::Index>(i)) = frames.row(idx[i]);
  return out;
}

}  // namespace cpcaug
