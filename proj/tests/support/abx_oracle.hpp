// tests/support/abx_oracle.hpp

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

// Brute-force references for DTW and ABX scoring, plus random fixtures.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cpcaug/abx/score.hpp"

namespace cpcaug::oracle {

inline double angle_oracle(const FrameMatrix& x, Eigen::Index i, const FrameMatrix& y,
                           Eigen::Index j) {
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (Eigen::Index d = 0; d < x.cols(); ++d) {
    dot += double(x(i, d)) * y(j, d);
    nx += double(x(i, d)) * x(i, d);
    ny += double(y(j, d)) * y(j, d);
  }
  if (nx == 0.0 || ny == 0.0) return std::numbers::pi / 2;
  return std::acos(std::max(-1.0, std::min(1.0, dot / std::sqrt(nx * ny))));
}

// Enumerates every monotone path from (0,0) to (n-1,m-1); returns the
// cheapest total and the number of cells on that path.
inline void enumerate_paths(const Eigen::MatrixXd& c, Eigen::Index i, Eigen::Index j, double acc,
                     int cells, double& best, int& best_cells) {
  acc += c(i, j);
  ++cells;
  if (i == c.rows() - 1 && j == c.cols() - 1) {
    if (acc < best) {
      best = acc;
      best_cells = cells;
    }
    return;
  }
  if (i + 1 < c.rows()) enumerate_paths(c, i + 1, j, acc, cells, best, best_cells);
  if (j + 1 < c.cols()) enumerate_paths(c, i, j + 1, acc, cells, best, best_cells);
  if (i + 1 < c.rows() && j + 1 < c.cols()) {
    enumerate_paths(c, i + 1, j + 1, acc, cells, best, best_cells);
  }
}

inline double dtw_oracle(const FrameMatrix& x, const FrameMatrix& y, DtwNorm norm) {
  Eigen::MatrixXd c(x.rows(), y.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.rows(); ++j) c(i, j) = angle_oracle(x, i, y, j);
  }
  double best = std::numeric_limits<double>::infinity();
  int cells = 0;
  enumerate_paths(c, 0, 0, 0.0, 0, best, cells);
  if (norm == DtwNorm::kMaxLength) return best / double(std::max(x.rows(), y.rows()));
  return best / cells;
}

// Loops over every ordered (A, B, X) of the whole item list and averages
// over contexts, speaker cells, then phone pairs.
inline double abx_oracle(const std::vector<ItemRecord>& items,
                         const std::vector<FrameMatrix>& feats,
                  AbxMode mode, std::uint64_t* triples_out = nullptr) {
  const std::size_t n = items.size();
  std::map<std::vector<std::string>, std::pair<double, double>> cells;
  std::uint64_t triples = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t x = 0; x < n; ++x) {
        const auto &A = items[a], &B = items[b], &X = items[x];
        if (a == x || A.phone != X.phone || B.phone == X.phone) continue;
        if (A.prev != X.prev || A.next != X.next || B.prev != X.prev || B.next != X.next) continue;
        if (A.speaker != B.speaker) continue;
        const bool same = A.speaker == X.speaker;
        if (same != (mode == AbxMode::kWithin)) continue;
        const double dxa = dtw_oracle(feats[x], feats[a], DtwNorm::kPathLength);
        const double dxb = dtw_oracle(feats[x], feats[b], DtwNorm::kPathLength);
        const double credit = dxa < dxb ? 1.0 : (dxa == dxb ? 0.5 : 0.0);
        auto& cell = cells[{A.phone, B.phone, A.speaker, X.speaker, X.prev, X.next}];
        cell.first += credit;
        cell.second += 1.0;
        ++triples;
      }
    }
  }
  if (triples_out) *triples_out = triples;
  std::map<std::vector<std::string>, std::map<std::vector<std::string>, std::vector<double>>> nest;
  for (const auto& [k, v] : cells) {
    nest[{k[0], k[1]}][{k[2], k[3]}].push_back(v.first / v.second);
  }
  double total = 0.0;
  for (const auto& [pair, spk] : nest) {
    double s = 0.0;
    for (const auto& [key, ctx] : spk) {
      double m = 0.0;
      for (double v : ctx) m += v;
      s += m / double(ctx.size());
    }
    total += s / double(spk.size());
  }
  return total / double(nest.size());
}

inline FrameMatrix random_frames(std::mt19937& gen, int rows, int dim) {
  std::normal_distribution<float> nd;
  FrameMatrix f(rows, dim);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = nd(gen);
  return f;
}

// Segments with random phone, context and speaker labels drawn from small
// alphabets so that many triples exist.
inline void random_fixture(std::mt19937& gen, std::size_t n, std::vector<ItemRecord>& items,
                    std::vector<FrameMatrix>& feats) {
  std::uniform_int_distribution<int> phone(0, 2), ctx(0, 1), spk(0, 1), len(1, 5);
  items.clear();
  feats.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const int p = phone(gen);
    items.push_back({"f" + std::to_string(i), 0.0, 0.1, "p" + std::to_string(p),
                     "c" + std::to_string(ctx(gen)), "d", "s" + std::to_string(spk(gen))});
    // Phone-dependent mean keeps scores away from 0.5.
    FrameMatrix f = random_frames(gen, len(gen), 4);
    f.col(p).array() += 1.5f;
    feats.push_back(f);
  }
}

// Twelve segments: two speakers, two phones, one context, three tokens each.
// Separable frames give ABX error 0; constant frames tie everywhere (0.5).
struct Fixture12 {
  std::vector<ItemRecord> items;
  std::vector<FrameMatrix> feats;
};

inline Fixture12 fixture12(bool separable) {
  Fixture12 f;
  std::mt19937 gen(5);
  for (int s = 0; s < 2; ++s) {
    for (int p = 0; p < 2; ++p) {
      for (int k = 0; k < 3; ++k) {
        f.items.push_back({"u", 0.0, 1.0, p ? "b" : "a", "x", "y", s ? "t" : "s"});
        FrameMatrix m(2 + k, 3);
        if (separable) {
          std::uniform_real_distribution<float> jitter(0.0f, 0.05f);
          for (Eigen::Index i = 0; i < m.rows(); ++i) {
            m.row(i) << (p ? 0.0f : 1.0f) + jitter(gen), (p ? 1.0f : 0.0f) + jitter(gen), 0.0f;
          }
        } else {
          m.setConstant(1.0f);
        }
        f.feats.push_back(m);
      }
    }
  }
  return f;
}

}  // namespace cpcaug::oracle
