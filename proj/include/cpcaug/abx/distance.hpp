// cpcaug/abx/distance.hpp

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
#include <numbers>
#include <string>
#include <vector>

#include "cpcaug/core/features.hpp"

namespace cpcaug {

/// DTW cost normalization: optimal path length, or max(Tx, Ty).
enum class DtwNorm { kPathLength, kMaxLength };

inline const char* to_string(DtwNorm n) {
  return n == DtwNorm::kPathLength ? "path_length" : "max_length";
}

inline DtwNorm parse_dtw_norm(const std::string& s) {
  if (s == "path_length") return DtwNorm::kPathLength;
  if (s == "max_length") return DtwNorm::kMaxLength;
  fail(ErrorKind::kInvalidArgument, "dtw norm must be path_length or max_length, got '" + s + "'");
}

/// Angle between two frames in [0, pi]; pi/2 when either is the zero vector.
template <class U, class V>
double frame_angle(const Eigen::MatrixBase<U>& u, const Eigen::MatrixBase<V>& v) {
  const double uu = u.template cast<double>().squaredNorm();
  const double vv = v.template cast<double>().squaredNorm();
  if (uu == 0.0 || vv == 0.0) return std::numbers::pi / 2;
  const double dot = u.template cast<double>().dot(v.template cast<double>());
  return std::acos(std::clamp(dot / std::sqrt(uu * vv), -1.0, 1.0));
}

/// Pairwise frame_angle costs, Tx x Ty.
inline Eigen::MatrixXd angle_costs(const FrameMatrix& x, const FrameMatrix& y) {
  require(x.cols() == y.cols(), "dtw: feature dims differ");
  Eigen::MatrixXd c(x.rows(), y.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.rows(); ++j) c(i, j) = frame_angle(x.row(i), y.row(j));
  }
  return c;
}

/// Average cost of the cheapest monotone alignment over a precomputed cost
/// grid, steps (1,0), (0,1), (1,1). Ties on the way back prefer the diagonal,
/// then (0,1), then (1,0).
inline double dtw_from_costs(const Eigen::MatrixXd& c, DtwNorm norm = DtwNorm::kPathLength) {
  const Eigen::Index n = c.rows(), m = c.cols();
  if (n == 0 || m == 0) fail(ErrorKind::kEmpty, "dtw: empty sequence");
  Eigen::MatrixXd acc(n, m);
  acc(0, 0) = c(0, 0);
  for (Eigen::Index i = 1; i < n; ++i) acc(i, 0) = acc(i - 1, 0) + c(i, 0);
  for (Eigen::Index j = 1; j < m; ++j) acc(0, j) = acc(0, j - 1) + c(0, j);
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = 1; j < m; ++j) {
      acc(i, j) = std::min({acc(i - 1, j - 1), acc(i, j - 1), acc(i - 1, j)}) + c(i, j);
    }
  }
  const double total = acc(n - 1, m - 1);
  if (norm == DtwNorm::kMaxLength) return total / static_cast<double>(std::max(n, m));

  Eigen::Index i = n - 1, j = m - 1, cells = 1;
  while (i > 0 && j > 0) {
    const double diag = acc(i - 1, j - 1), left = acc(i, j - 1), up = acc(i - 1, j);
    if (diag <= left && diag <= up) {
      --i;
      --j;
    } else if (left <= up) {
      --j;
    } else {
      --i;
    }
    ++cells;
  }
  cells += i + j;
  return total / static_cast<double>(cells);
}

inline double dtw_distance(const FrameMatrix& x, const FrameMatrix& y,
                           DtwNorm norm = DtwNorm::kPathLength) {
  if (x.rows() == 0 || y.rows() == 0) fail(ErrorKind::kEmpty, "dtw: empty sequence");
  return dtw_from_costs(angle_costs(x, y), norm);
}

}  // namespace cpcaug
