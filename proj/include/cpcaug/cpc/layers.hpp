// cpcaug/cpc/layers.hpp

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

// Forward and backward kernels for the CPC network. Activations are time-major
// row-major matrices (one row per frame). Every backward function accumulates
// into parameter gradients and returns the input gradient.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cpcaug/core/error.hpp"

namespace cpcaug::nn {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;
template <class S>
using MatMap = Eigen::Map<Mat<S>>;
template <class S>
using CMatMap = Eigen::Map<const Mat<S>>;

// ---------------------------------------------------------------------------
// Flat parameter storage
// ---------------------------------------------------------------------------

struct TensorSpec {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

/// Names and offsets of every parameter tensor in one flat vector.
class ParamLayout {
 public:
  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    tensors_.push_back({std::move(name), rows, cols, total_});
    total_ += static_cast<std::size_t>(rows * cols);
    return tensors_.size() - 1;
  }
  const TensorSpec& operator[](std::size_t i) const { return tensors_[i]; }
  const std::vector<TensorSpec>& tensors() const { return tensors_; }
  std::size_t total() const { return total_; }

 private:
  std::vector<TensorSpec> tensors_;
  std::size_t total_ = 0;
};

template <class S>
MatMap<S> view(std::vector<S>& buf, const TensorSpec& t) {
  return MatMap<S>(buf.data() + t.offset, t.rows, t.cols);
}
template <class S>
CMatMap<S> view(const std::vector<S>& buf, const TensorSpec& t) {
  return CMatMap<S>(buf.data() + t.offset, t.rows, t.cols);
}

// ---------------------------------------------------------------------------
// Row normalization (channel norm in the encoder, layer norm in the predictor)
// ---------------------------------------------------------------------------

template <class S>
struct NormCache {
  Mat<S> xhat;
  RowVec<S> rstd;  // 1 / sqrt(var + eps), one per row
};

/// y = (x - mean_row) / sqrt(var_row + eps) * gamma + beta; population variance
/// over the columns of each row.
template <class S>
Mat<S> norm_forward(const Mat<S>& x, const CMatMap<S>& gamma, const CMatMap<S>& beta,
                    double eps, NormCache<S>& cache) {
  using Col = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  const Col mean = x.rowwise().mean();
  cache.xhat = x.colwise() - mean;
  const Col var = cache.xhat.array().square().rowwise().mean();
  const Col r = (var.array() + static_cast<S>(eps)).rsqrt();
  cache.xhat.array().colwise() *= r.array();
  cache.rstd = r.transpose();
  Mat<S> y = cache.xhat.array().rowwise() * gamma.row(0).array();
  y.array().rowwise() += beta.row(0).array();
  return y;
}

template <class S>
Mat<S> norm_backward(const Mat<S>& dy, const NormCache<S>& cache, const CMatMap<S>& gamma,
                     MatMap<S> dgamma, MatMap<S> dbeta) {
  using Col = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  dgamma.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  dbeta.row(0) += dy.colwise().sum();
  const Mat<S> dxhat = dy.array().rowwise() * gamma.row(0).array();
  const Col m1 = dxhat.rowwise().mean();
  const Col m2 = (dxhat.array() * cache.xhat.array()).rowwise().mean();
  Mat<S> dx = dxhat.colwise() - m1;
  dx.array() -= cache.xhat.array().colwise() * m2.array();
  dx.array().colwise() *= cache.rstd.transpose().array();
  return dx;
}

// ---------------------------------------------------------------------------
// Strided 1-D convolution via im2col
// ---------------------------------------------------------------------------

struct ConvGeometry {
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  Eigen::Index out_len(Eigen::Index in_len) const {
    const Eigen::Index span = in_len + 2 * padding - kernel;
    return span < 0 ? 0 : span / stride + 1;
  }
};

/// col(t, j*C + c) = x(t*stride - padding + j, c), zero outside the input.
/// With row-major storage each col row is a contiguous run of x.
template <class S>
Mat<S> im2col(const Mat<S>& x, const ConvGeometry& g) {
  const Eigen::Index c = x.cols(), rows = x.rows();
  const Eigen::Index n = g.out_len(rows);
  const Eigen::Index width = g.kernel * c;
  Mat<S> col(n, width);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index base = t * g.stride - g.padding;
    S* dst = col.data() + t * width;
    if (base >= 0 && base + g.kernel <= rows) {
      std::copy_n(x.data() + base * c, width, dst);
      continue;
    }
    for (int j = 0; j < g.kernel; ++j) {
      const Eigen::Index src = base + j;
      if (src < 0 || src >= rows) {
        std::fill_n(dst + j * c, c, S(0));
      } else {
        std::copy_n(x.data() + src * c, c, dst + j * c);
      }
    }
  }
  return col;
}

template <class S>
void col2im_add(const Mat<S>& dcol, const ConvGeometry& g, Mat<S>& dx) {
  const Eigen::Index c = dx.cols(), rows = dx.rows();
  const Eigen::Index width = g.kernel * c;
  for (Eigen::Index t = 0; t < dcol.rows(); ++t) {
    const Eigen::Index base = t * g.stride - g.padding;
    const S* src = dcol.data() + t * width;
    for (int j = 0; j < g.kernel; ++j) {
      const Eigen::Index r = base + j;
      if (r < 0 || r >= rows) continue;
      S* dst = dx.data() + r * c;
      for (Eigen::Index i = 0; i < c; ++i) dst[i] += src[j * c + i];
    }
  }
}

/// W is (kernel * C_in) x C_out, b is 1 x C_out; col comes from im2col.
template <class S>
Mat<S> conv_forward_col(const Mat<S>& col, const CMatMap<S>& w, const CMatMap<S>& b) {
  Mat<S> y(col.rows(), w.cols());
  y.noalias() = col * w;
  y.rowwise() += b.row(0);
  return y;
}

template <class S>
Mat<S> conv_forward(const Mat<S>& x, const ConvGeometry& g, const CMatMap<S>& w,
                    const CMatMap<S>& b) {
  return conv_forward_col<S>(im2col(x, g), w, b);
}

/// Gradient of a conv layer given its im2col input. Returns the in_rows x
/// C_in input gradient only when want_dx; the input layer skips it.
template <class S>
Mat<S> conv_backward_col(const Mat<S>& col, Eigen::Index in_rows, const Mat<S>& dy,
                         const ConvGeometry& g, const CMatMap<S>& w, MatMap<S> dw, MatMap<S> db,
                         bool want_dx) {
  dw.noalias() += col.transpose() * dy;
  db.row(0) += dy.colwise().sum();
  if (!want_dx) return {};
  Mat<S> dcol(dy.rows(), w.rows());
  dcol.noalias() = dy * w.transpose();
  Mat<S> dx = Mat<S>::Zero(in_rows, w.rows() / g.kernel);
  col2im_add(dcol, g, dx);
  return dx;
}

template <class S>
Mat<S> conv_backward(const Mat<S>& x, const Mat<S>& dy, const ConvGeometry& g,
                     const CMatMap<S>& w, MatMap<S> dw, MatMap<S> db, bool want_dx) {
  return conv_backward_col<S>(im2col(x, g), x.rows(), dy, g, w, dw, db, want_dx);
}

// ---------------------------------------------------------------------------
// LSTM (gate order i, f, g, o)
// ---------------------------------------------------------------------------

template <class S>
struct LstmCache {
  Mat<S> x;      // T x I input
  Mat<S> gates;  // T x 4H post-activation
  Mat<S> cell;   // T x H
  Mat<S> tanh_cell;
  Mat<S> h;      // T x H output
};

template <class S>
S sigmoid(S v) {
  return S(1) / (S(1) + std::exp(-v));
}

/// wx is I x 4H, wh is H x 4H, b is 1 x 4H. Zero initial state.
template <class S>
Mat<S> lstm_forward(const Mat<S>& x, const CMatMap<S>& wx, const CMatMap<S>& wh,
                    const CMatMap<S>& b, LstmCache<S>& cache) {
  const Eigen::Index n = x.rows(), hd = wh.rows();
  cache.x = x;
  Mat<S> pre = x * wx;
  pre.rowwise() += b.row(0);
  cache.gates.resize(n, 4 * hd);
  cache.cell.resize(n, hd);
  cache.tanh_cell.resize(n, hd);
  cache.h.resize(n, hd);
  RowVec<S> h_prev = RowVec<S>::Zero(hd), c_prev = RowVec<S>::Zero(hd);
  RowVec<S> a(4 * hd);
  for (Eigen::Index t = 0; t < n; ++t) {
    a.noalias() = pre.row(t) + h_prev * wh;
    for (Eigen::Index j = 0; j < hd; ++j) {
      const S i = sigmoid(a(j));
      const S f = sigmoid(a(hd + j));
      const S g = std::tanh(a(2 * hd + j));
      const S o = sigmoid(a(3 * hd + j));
      const S c = f * c_prev(j) + i * g;
      const S tc = std::tanh(c);
      cache.gates(t, j) = i;
      cache.gates(t, hd + j) = f;
      cache.gates(t, 2 * hd + j) = g;
      cache.gates(t, 3 * hd + j) = o;
      cache.cell(t, j) = c;
      cache.tanh_cell(t, j) = tc;
      cache.h(t, j) = o * tc;
    }
    h_prev = cache.h.row(t);
    c_prev = cache.cell.row(t);
  }
  return cache.h;
}

template <class S>
Mat<S> lstm_backward(const Mat<S>& dh_out, const LstmCache<S>& cache, const CMatMap<S>& wx,
                     const CMatMap<S>& wh, MatMap<S> dwx, MatMap<S> dwh, MatMap<S> db) {
  const Eigen::Index n = dh_out.rows(), hd = wh.rows();
  Mat<S> da(n, 4 * hd);
  RowVec<S> dh_next = RowVec<S>::Zero(hd), dc_next = RowVec<S>::Zero(hd);
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    for (Eigen::Index j = 0; j < hd; ++j) {
      const S i = cache.gates(t, j);
      const S f = cache.gates(t, hd + j);
      const S g = cache.gates(t, 2 * hd + j);
      const S o = cache.gates(t, 3 * hd + j);
      const S tc = cache.tanh_cell(t, j);
      const S c_prev = t > 0 ? cache.cell(t - 1, j) : S(0);
      const S dh = dh_out(t, j) + dh_next(j);
      const S dc = dh * o * (S(1) - tc * tc) + dc_next(j);
      da(t, j) = dc * g * i * (S(1) - i);
      da(t, hd + j) = dc * c_prev * f * (S(1) - f);
      da(t, 2 * hd + j) = dc * i * (S(1) - g * g);
      da(t, 3 * hd + j) = dh * tc * o * (S(1) - o);
      dc_next(j) = dc * f;
    }
    dh_next.noalias() = da.row(t) * wh.transpose();
  }
  if (n > 1) dwh.noalias() += cache.h.topRows(n - 1).transpose() * da.bottomRows(n - 1);
  dwx.noalias() += cache.x.transpose() * da;
  db.row(0) += da.colwise().sum();
  return da * wx.transpose();
}

// ---------------------------------------------------------------------------
// Linear map
// ---------------------------------------------------------------------------

template <class S>
Mat<S> linear_forward(const Mat<S>& x, const CMatMap<S>& w, const CMatMap<S>& b) {
  Mat<S> y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

template <class S>
Mat<S> linear_backward(const Mat<S>& x, const Mat<S>& dy, const CMatMap<S>& w, MatMap<S> dw,
                       MatMap<S> db) {
  dw.noalias() += x.transpose() * dy;
  db.row(0) += dy.colwise().sum();
  return dy * w.transpose();
}

// ---------------------------------------------------------------------------
// Causal post-norm transformer layer
// ---------------------------------------------------------------------------

/// Tensor indices of one transformer layer inside a ParamLayout.
struct TransformerParams {
  std::size_t wq, bq, wk, bk, wv, bv, wo, bo, ln1_g, ln1_b, w1, b1, w2, b2, ln2_g, ln2_b;

  static TransformerParams add(ParamLayout& layout, const std::string& prefix,
                               Eigen::Index dim, Eigen::Index ff) {
    TransformerParams p;
    p.wq = layout.add(prefix + ".wq", dim, dim);
    p.bq = layout.add(prefix + ".bq", 1, dim);
    p.wk = layout.add(prefix + ".wk", dim, dim);
    p.bk = layout.add(prefix + ".bk", 1, dim);
    p.wv = layout.add(prefix + ".wv", dim, dim);
    p.bv = layout.add(prefix + ".bv", 1, dim);
    p.wo = layout.add(prefix + ".wo", dim, dim);
    p.bo = layout.add(prefix + ".bo", 1, dim);
    p.ln1_g = layout.add(prefix + ".ln1.gamma", 1, dim);
    p.ln1_b = layout.add(prefix + ".ln1.beta", 1, dim);
    p.w1 = layout.add(prefix + ".ff.w1", dim, ff);
    p.b1 = layout.add(prefix + ".ff.b1", 1, ff);
    p.w2 = layout.add(prefix + ".ff.w2", ff, dim);
    p.b2 = layout.add(prefix + ".ff.b2", 1, dim);
    p.ln2_g = layout.add(prefix + ".ln2.gamma", 1, dim);
    p.ln2_b = layout.add(prefix + ".ln2.beta", 1, dim);
    return p;
  }
};

template <class S>
struct TransformerCache {
  Mat<S> x, q, k, v, o;
  std::vector<Mat<S>> attn;  // per head, T x T
  NormCache<S> ln1, ln2;
  Mat<S> y1, f1, hid;
};

template <class S>
Mat<S> transformer_forward(const Mat<S>& x, const std::vector<S>& params,
                           const ParamLayout& layout, const TransformerParams& p, int heads,
                           double eps, TransformerCache<S>& cache) {
  auto P = [&](std::size_t i) { return view(params, layout[i]); };
  const Eigen::Index n = x.rows(), d = x.cols(), dh = d / heads;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  cache.x = x;
  cache.q = linear_forward<S>(x, P(p.wq), P(p.bq));
  cache.k = linear_forward<S>(x, P(p.wk), P(p.bk));
  cache.v = linear_forward<S>(x, P(p.wv), P(p.bv));
  cache.o.resize(n, d);
  cache.attn.assign(static_cast<std::size_t>(heads), Mat<S>());
  for (int h = 0; h < heads; ++h) {
    Mat<S> s = cache.q.middleCols(h * dh, dh) * cache.k.middleCols(h * dh, dh).transpose();
    Mat<S>& a = cache.attn[static_cast<std::size_t>(h)];
    a = Mat<S>::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      // Causal: frame i attends to frames 0..i only.
      const S m = (s.row(i).head(i + 1) * scale).maxCoeff();
      S z = 0;
      for (Eigen::Index j = 0; j <= i; ++j) {
        a(i, j) = std::exp(s(i, j) * scale - m);
        z += a(i, j);
      }
      a.row(i).head(i + 1) /= z;
    }
    cache.o.middleCols(h * dh, dh) = a * cache.v.middleCols(h * dh, dh);
  }
  const Mat<S> r1 = x + linear_forward<S>(cache.o, P(p.wo), P(p.bo));
  cache.y1 = norm_forward<S>(r1, P(p.ln1_g), P(p.ln1_b), eps, cache.ln1);
  cache.f1 = linear_forward<S>(cache.y1, P(p.w1), P(p.b1));
  cache.hid = cache.f1.cwiseMax(S(0));
  const Mat<S> r2 = cache.y1 + linear_forward<S>(cache.hid, P(p.w2), P(p.b2));
  return norm_forward<S>(r2, P(p.ln2_g), P(p.ln2_b), eps, cache.ln2);
}

template <class S>
Mat<S> transformer_backward(const Mat<S>& dy, const std::vector<S>& params,
                            std::vector<S>& grads, const ParamLayout& layout,
                            const TransformerParams& p, int heads,
                            const TransformerCache<S>& cache) {
  auto P = [&](std::size_t i) { return view(params, layout[i]); };
  auto G = [&](std::size_t i) { return view(grads, layout[i]); };
  const Eigen::Index n = dy.rows(), d = dy.cols(), dh = d / heads;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));

  const Mat<S> dr2 = norm_backward<S>(dy, cache.ln2, P(p.ln2_g), G(p.ln2_g), G(p.ln2_b));
  Mat<S> dhid = linear_backward<S>(cache.hid, dr2, P(p.w2), G(p.w2), G(p.b2));
  dhid = (cache.f1.array() > S(0)).select(dhid, S(0));
  Mat<S> dy1 = dr2 + linear_backward<S>(cache.y1, dhid, P(p.w1), G(p.w1), G(p.b1));
  const Mat<S> dr1 = norm_backward<S>(dy1, cache.ln1, P(p.ln1_g), G(p.ln1_g), G(p.ln1_b));
  const Mat<S> dout = linear_backward<S>(cache.o, dr1, P(p.wo), G(p.wo), G(p.bo));

  Mat<S> dq(n, d), dk(n, d), dv(n, d);
  for (int h = 0; h < heads; ++h) {
    const Mat<S>& a = cache.attn[static_cast<std::size_t>(h)];
    const auto doh = dout.middleCols(h * dh, dh);
    dv.middleCols(h * dh, dh) = a.transpose() * doh;
    const Mat<S> da = doh * cache.v.middleCols(h * dh, dh).transpose();
    Mat<S> ds = Mat<S>::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const S dot = (da.row(i).head(i + 1).array() * a.row(i).head(i + 1).array()).sum();
      ds.row(i).head(i + 1) =
          (a.row(i).head(i + 1).array() * (da.row(i).head(i + 1).array() - dot)).matrix();
    }
    ds *= scale;
    dq.middleCols(h * dh, dh) = ds * cache.k.middleCols(h * dh, dh);
    dk.middleCols(h * dh, dh) = ds.transpose() * cache.q.middleCols(h * dh, dh);
  }
  Mat<S> dx = dr1;
  dx += linear_backward<S>(cache.x, dq, P(p.wq), G(p.wq), G(p.bq));
  dx += linear_backward<S>(cache.x, dk, P(p.wk), G(p.wk), G(p.bk));
  dx += linear_backward<S>(cache.x, dv, P(p.wv), G(p.wv), G(p.bv));
  return dx;
}

}  // namespace cpcaug::nn
