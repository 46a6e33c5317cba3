// Copyright 2026 The whisqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>
#include <numbers>

#include "whisqa/errors.hpp"
#include "whisqa/kernels.hpp"
#include "whisqa/model.hpp"
#include "whisqa/rng.hpp"

namespace whisqa {

namespace {

constexpr double kNormEps = 1e-5;

template <class Real>
using CSpan = std::span<const Real>;

// out[rows, out_dim] = x[rows, in] * W[out_dim, in]^T + b
template <class Real>
void linear(CSpan<Real> x, std::size_t rows, std::size_t in, CSpan<Real> w, CSpan<Real> b, std::size_t out_dim,
            std::vector<Real>& out) {
  out.resize(rows * out_dim);
  kernels::gemm_nt<Real>(rows, out_dim, in, x, w, out, false);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < out_dim; ++j) out[r * out_dim + j] += b[j];
  }
}

// dW += dy^T x, db += colsum(dy), dx (+)= dy W
template <class Real>
void linear_backward(CSpan<Real> dy, CSpan<Real> x, std::size_t rows, std::size_t in, std::size_t out_dim,
                     CSpan<Real> w, std::span<Real> dw, std::span<Real> db, std::span<Real> dx, bool accumulate_dx) {
  kernels::gemm_tn<Real>(out_dim, in, rows, dy, x, dw, true);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < out_dim; ++j) db[j] += dy[r * out_dim + j];
  }
  if (!dx.empty()) kernels::gemm_nn<Real>(rows, in, out_dim, dy, w, dx, accumulate_dx);
}

template <class Real>
void layer_norm(CSpan<Real> x, std::size_t rows, std::size_t dim, CSpan<Real> gain, CSpan<Real> bias,
                std::vector<Real>& out, std::vector<Real>& xhat, std::vector<Real>& rstd) {
  out.resize(rows * dim);
  xhat.resize(rows * dim);
  rstd.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* row = x.data() + r * dim;
    Real mean = 0;
    for (std::size_t j = 0; j < dim; ++j) mean += row[j];
    mean /= static_cast<Real>(dim);
    Real var = 0;
    for (std::size_t j = 0; j < dim; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<Real>(dim);
    const Real inv = Real(1) / std::sqrt(var + static_cast<Real>(kNormEps));
    rstd[r] = inv;
    for (std::size_t j = 0; j < dim; ++j) {
      const Real h = (row[j] - mean) * inv;
      xhat[r * dim + j] = h;
      out[r * dim + j] = h * gain[j] + bias[j];
    }
  }
}

// dx += LN'(dy); dgain, dbias accumulate.
template <class Real>
void layer_norm_backward(CSpan<Real> dy, CSpan<Real> xhat, CSpan<Real> rstd, CSpan<Real> gain, std::size_t rows,
                         std::size_t dim, std::span<Real> dx, std::span<Real> dgain, std::span<Real> dbias) {
  std::vector<Real> dh(dim);
  const Real n = static_cast<Real>(dim);
  for (std::size_t r = 0; r < rows; ++r) {
    Real sum_dh = 0;
    Real sum_dh_h = 0;
    for (std::size_t j = 0; j < dim; ++j) {
      const std::size_t i = r * dim + j;
      dgain[j] += dy[i] * xhat[i];
      dbias[j] += dy[i];
      dh[j] = dy[i] * gain[j];
      sum_dh += dh[j];
      sum_dh_h += dh[j] * xhat[i];
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const std::size_t i = r * dim + j;
      dx[i] += rstd[r] / n * (n * dh[j] - sum_dh - xhat[i] * sum_dh_h);
    }
  }
}

template <class Real>
void softmax_inplace(std::span<Real> v) {
  Real peak = v[0];
  for (Real x : v) peak = std::max(peak, x);
  Real total = 0;
  for (Real& x : v) {
    x = std::exp(x - peak);
    total += x;
  }
  for (Real& x : v) x /= total;
}

// Softmax Jacobian-vector product: ds = a * (da - <a, da>).
template <class Real>
void softmax_backward(CSpan<Real> a, CSpan<Real> da, std::span<Real> ds) {
  Real dot = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * da[i];
  for (std::size_t i = 0; i < a.size(); ++i) ds[i] = a[i] * (da[i] - dot);
}

template <class Real>
Real gelu(Real x) {
  return Real(0.5) * x * (Real(1) + std::erf(x / std::numbers::sqrt2_v<Real>));
}

template <class Real>
Real gelu_grad(Real x) {
  const Real cdf = Real(0.5) * (Real(1) + std::erf(x / std::numbers::sqrt2_v<Real>));
  const Real pdf = std::exp(Real(-0.5) * x * x) * std::numbers::inv_sqrtpi_v<Real> / std::numbers::sqrt2_v<Real>;
  return cdf + x * pdf;
}

// Sigmoid kept strictly inside (0, 1) even where it would round to an endpoint.
template <class Real>
Real bounded_sigmoid(Real y) {
  const Real q = y >= 0 ? Real(1) / (Real(1) + std::exp(-y)) : std::exp(y) / (Real(1) + std::exp(y));
  constexpr Real lo = std::numeric_limits<Real>::min();
  constexpr Real hi = Real(1) - std::numeric_limits<Real>::epsilon() / 2;
  return std::clamp(q, lo, hi);
}

void copy_columns_out(auto src, std::size_t rows, std::size_t stride, std::size_t col0, std::size_t width, auto& dst) {
  dst.resize(rows * width);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < width; ++c) dst[r * width + c] = src[r * stride + col0 + c];
  }
}

void add_columns_in(const auto& src, std::size_t rows, std::size_t stride, std::size_t col0, std::size_t width,
                    auto dst) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < width; ++c) dst[r * stride + col0 + c] += src[r * width + c];
  }
}

}  // namespace

template <class Real>
std::vector<Real> fuse_layers(const FeatureStack& stack, std::span<const Real> alpha) {
  if (alpha.size() != stack.layer_count()) {
    throw ShapeError("fuse_layers: " + std::to_string(alpha.size()) + " layer weights for a stack of " +
                     std::to_string(stack.layer_count()) + " layers");
  }
  const std::size_t plane = stack.frame_count() * stack.feature_dim();
  std::vector<Real> out(plane);
  kernels::fuse_layers<Real, float>(stack.layer_count(), plane, stack.data(), alpha, out);
  return out;
}

template <class Real>
PooledOutput<Real> attention_pool(std::span<const Real> h, std::size_t frames, std::size_t dim,
                                  std::span<const Real> w1, std::span<const Real> b1, std::span<const Real> w2,
                                  std::size_t pool_dim) {
  if (h.size() != frames * dim || w1.size() != pool_dim * dim || b1.size() != pool_dim || w2.size() != pool_dim) {
    throw ShapeError("attention_pool: inconsistent shapes");
  }
  if (frames == 0) throw ShapeError("attention_pool: no frames");
  std::vector<Real> hidden;
  linear<Real>(h, frames, dim, w1, b1, pool_dim, hidden);
  PooledOutput<Real> out;
  out.weights.resize(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    Real s = 0;
    for (std::size_t j = 0; j < pool_dim; ++j) s += w2[j] * std::tanh(hidden[t * pool_dim + j]);
    out.weights[t] = s;
  }
  softmax_inplace<Real>(out.weights);
  out.pooled.assign(dim, Real(0));
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t j = 0; j < dim; ++j) out.pooled[j] += out.weights[t] * h[t * dim + j];
  }
  return out;
}

template <class Real>
Model<Real>::Model(ArchConfig cfg) : cfg_(std::move(cfg)), layout_(cfg_) {
  const std::size_t T = cfg_.frame_count;
  const std::size_t d = cfg_.model_dim;
  positions_.resize(T * d);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < d; i += 2) {
      const double rate = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
      const double angle = static_cast<double>(t) * rate;
      positions_[t * d + i] = static_cast<Real>(std::sin(angle));
      if (i + 1 < d) positions_[t * d + i + 1] = static_cast<Real>(std::cos(angle));
    }
  }
}

template <class Real>
Model<Real>::~Model() = default;
template <class Real>
Model<Real>::Model(const Model&) = default;
template <class Real>
Model<Real>& Model<Real>::operator=(const Model&) = default;
template <class Real>
Model<Real>::Model(Model&&) noexcept = default;
template <class Real>
Model<Real>& Model<Real>::operator=(Model&&) noexcept = default;

template <class Real>
ModelParams<Real> Model<Real>::init_params(std::uint64_t seed) const {
  ModelParams<Real> p;
  p.values.assign(layout_.total(), Real(0));
  Rng rng(mix_seed(seed, 0x696e6974));
  for (const ParamTensor& t : layout_.tensors()) {
    auto v = p.view(t.offset, t.size());
    if (t.group == ParamGroup::alpha) {
      std::fill(v.begin(), v.end(), static_cast<Real>(1.0 / static_cast<double>(cfg_.layer_count)));
    } else if (t.name.ends_with(".gain")) {
      std::fill(v.begin(), v.end(), Real(1));
    } else if (t.name.ends_with(".weight")) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(t.cols));
      for (Real& x : v) x = static_cast<Real>(rng.uniform(-bound, bound));
    }
  }
  return p;
}

template <class Real>
void Model<Real>::check_inputs(const FeatureStack& stack, const ModelParams<Real>& params) const {
  if (!(stack.dims() == cfg_.stack_dims())) {
    const StackDims& s = stack.dims();
    throw ShapeError("model: stack is [" + std::to_string(s.layers) + "," + std::to_string(s.frames) + "," +
                     std::to_string(s.features) + "], model expects [" + std::to_string(cfg_.layer_count) + "," +
                     std::to_string(cfg_.frame_count) + "," + std::to_string(cfg_.feature_dim) + "]");
  }
  if (params.values.size() != layout_.total()) {
    throw ShapeError("model: " + std::to_string(params.values.size()) + " parameters, layout needs " +
                     std::to_string(layout_.total()));
  }
}

template <class Real>
Prediction Model<Real>::forward(const FeatureStack& stack, const ModelParams<Real>& params) const {
  Activations cache;
  const std::vector<Real> scores = forward(stack, params, cache);
  Prediction p;
  p.heads = cfg_.head_names;
  p.scores.assign(scores.begin(), scores.end());
  return p;
}

template <class Real>
std::vector<Real> Model<Real>::forward(const FeatureStack& stack, const ModelParams<Real>& params,
                                       Activations& c) const {
  check_inputs(stack, params);
  const std::size_t T = cfg_.frame_count;
  const std::size_t F = cfg_.feature_dim;
  const std::size_t d = cfg_.model_dim;
  const std::size_t nh = cfg_.attention_heads;
  const std::size_t dh = d / nh;
  const std::size_t ff = cfg_.ff_dim();
  const std::size_t da = cfg_.pool_dim();
  const ParamLayout& L = layout_;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(dh));
  auto P = [&](std::size_t off, std::size_t n) { return params.view(off, n); };

  c.stack = &stack;
  c.fused = fuse_layers<Real>(stack, P(L.alpha, cfg_.layer_count));

  std::vector<Real> h;
  linear<Real>(c.fused, T, F, P(L.proj_weight, d * F), P(L.proj_bias, d), d, h);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] += positions_[i];

  c.blocks.resize(cfg_.transformer_layers);
  std::vector<Real> qh, kh, vh, oh;
  for (std::size_t b = 0; b < cfg_.transformer_layers; ++b) {
    const BlockLayout& bl = L.blocks[b];
    auto& a = c.blocks[b];
    a.input = h;
    layer_norm<Real>(a.input, T, d, P(bl.ln1_gain, d), P(bl.ln1_bias, d), a.ln1, a.ln1_hat, a.ln1_rstd);
    linear<Real>(a.ln1, T, d, P(bl.q_weight, d * d), P(bl.q_bias, d), d, a.q);
    linear<Real>(a.ln1, T, d, P(bl.k_weight, d * d), P(bl.k_bias, d), d, a.k);
    linear<Real>(a.ln1, T, d, P(bl.v_weight, d * d), P(bl.v_bias, d), d, a.v);

    a.probs.resize(nh * T * T);
    a.attn.assign(T * d, Real(0));
    for (std::size_t head = 0; head < nh; ++head) {
      copy_columns_out(std::span<const Real>(a.q), T, d, head * dh, dh, qh);
      copy_columns_out(std::span<const Real>(a.k), T, d, head * dh, dh, kh);
      copy_columns_out(std::span<const Real>(a.v), T, d, head * dh, dh, vh);
      std::span<Real> probs(a.probs.data() + head * T * T, T * T);
      kernels::gemm_nt<Real>(T, T, dh, qh, kh, probs, false);
      for (std::size_t t = 0; t < T; ++t) {
        auto row = probs.subspan(t * T, T);
        for (Real& x : row) x *= scale;
        softmax_inplace<Real>(row);
      }
      oh.resize(T * dh);
      kernels::gemm_nn<Real>(T, dh, T, probs, vh, oh, false);
      add_columns_in(oh, T, d, head * dh, dh, std::span<Real>(a.attn));
    }

    std::vector<Real> proj;
    linear<Real>(a.attn, T, d, P(bl.o_weight, d * d), P(bl.o_bias, d), d, proj);
    a.mid.resize(T * d);
    for (std::size_t i = 0; i < a.mid.size(); ++i) a.mid[i] = a.input[i] + proj[i];

    layer_norm<Real>(a.mid, T, d, P(bl.ln2_gain, d), P(bl.ln2_bias, d), a.ln2, a.ln2_hat, a.ln2_rstd);
    linear<Real>(a.ln2, T, d, P(bl.ff1_weight, ff * d), P(bl.ff1_bias, ff), ff, a.ff_pre);
    a.ff_act.resize(a.ff_pre.size());
    for (std::size_t i = 0; i < a.ff_pre.size(); ++i) a.ff_act[i] = gelu(a.ff_pre[i]);
    std::vector<Real> ff_out;
    linear<Real>(a.ff_act, T, ff, P(bl.ff2_weight, d * ff), P(bl.ff2_bias, d), d, ff_out);
    h.resize(T * d);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = a.mid[i] + ff_out[i];
  }
  c.trunk = h;
  layer_norm<Real>(c.trunk, T, d, P(L.final_gain, d), P(L.final_bias, d), c.final_out, c.final_hat, c.final_rstd);

  c.heads.resize(cfg_.head_names.size());
  std::vector<Real> scores(cfg_.head_names.size());
  for (std::size_t k = 0; k < c.heads.size(); ++k) {
    const HeadLayout& hl = L.heads[k];
    auto& hc = c.heads[k];
    linear<Real>(c.final_out, T, d, P(hl.pool1_weight, da * d), P(hl.pool1_bias, da), da, hc.hidden);
    for (Real& x : hc.hidden) x = std::tanh(x);
    const auto w2 = P(hl.pool2_weight, da);
    hc.weights.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
      Real s = 0;
      for (std::size_t j = 0; j < da; ++j) s += w2[j] * hc.hidden[t * da + j];
      hc.weights[t] = s;
    }
    softmax_inplace<Real>(hc.weights);
    hc.pooled.assign(d, Real(0));
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < d; ++j) hc.pooled[j] += hc.weights[t] * c.final_out[t * d + j];
    }
    const auto wo = P(hl.out_weight, d);
    Real y = P(hl.out_bias, 1)[0];
    for (std::size_t j = 0; j < d; ++j) y += wo[j] * hc.pooled[j];
    hc.score = bounded_sigmoid(y);
    scores[k] = hc.score;
  }
  return scores;
}

template <class Real>
void Model<Real>::backward(const Activations& c, const ModelParams<Real>& params, std::span<const Real> score_grads,
                           std::span<Real> grads) const {
  if (c.stack == nullptr || c.heads.size() != cfg_.head_names.size()) {
    throw ShapeError("backward: cache does not hold a forward pass of this model");
  }
  if (score_grads.size() != cfg_.head_names.size()) {
    throw ShapeError("backward: expected " + std::to_string(cfg_.head_names.size()) + " score gradients, got " +
                     std::to_string(score_grads.size()));
  }
  if (grads.size() != layout_.total() || params.values.size() != layout_.total()) {
    throw ShapeError("backward: gradient/parameter size does not match the layout");
  }
  const std::size_t T = cfg_.frame_count;
  const std::size_t F = cfg_.feature_dim;
  const std::size_t d = cfg_.model_dim;
  const std::size_t nh = cfg_.attention_heads;
  const std::size_t dh = d / nh;
  const std::size_t ff = cfg_.ff_dim();
  const std::size_t da = cfg_.pool_dim();
  const ParamLayout& L = layout_;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(dh));
  auto P = [&](std::size_t off, std::size_t n) { return params.view(off, n); };
  auto G = [&](std::size_t off, std::size_t n) { return grads.subspan(off, n); };

  // Heads.
  std::vector<Real> d_final(T * d, Real(0));
  std::vector<Real> d_hidden(T * da), d_weights(T), d_scores(T);
  for (std::size_t k = 0; k < c.heads.size(); ++k) {
    const HeadLayout& hl = L.heads[k];
    const auto& hc = c.heads[k];
    const Real dy = score_grads[k] * hc.score * (Real(1) - hc.score);
    const auto wo = P(hl.out_weight, d);
    auto dwo = G(hl.out_weight, d);
    G(hl.out_bias, 1)[0] += dy;
    std::vector<Real> d_pooled(d);
    for (std::size_t j = 0; j < d; ++j) {
      dwo[j] += dy * hc.pooled[j];
      d_pooled[j] = dy * wo[j];
    }
    for (std::size_t t = 0; t < T; ++t) {
      Real dot = 0;
      for (std::size_t j = 0; j < d; ++j) {
        d_final[t * d + j] += hc.weights[t] * d_pooled[j];
        dot += d_pooled[j] * c.final_out[t * d + j];
      }
      d_weights[t] = dot;
    }
    softmax_backward<Real>(hc.weights, d_weights, d_scores);
    const auto w2 = P(hl.pool2_weight, da);
    auto dw2 = G(hl.pool2_weight, da);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < da; ++j) {
        const Real hv = hc.hidden[t * da + j];
        dw2[j] += d_scores[t] * hv;
        d_hidden[t * da + j] = d_scores[t] * w2[j] * (Real(1) - hv * hv);
      }
    }
    linear_backward<Real>(d_hidden, c.final_out, T, d, da, P(hl.pool1_weight, da * d), G(hl.pool1_weight, da * d),
                          G(hl.pool1_bias, da), d_final, true);
  }

  std::vector<Real> dh_cur(T * d, Real(0));
  layer_norm_backward<Real>(d_final, c.final_hat, c.final_rstd, P(L.final_gain, d), T, d, dh_cur,
                            G(L.final_gain, d), G(L.final_bias, d));

  std::vector<Real> d_act, d_pre, d_ln2, d_attn, dq, dk, dv, d_ln1;
  std::vector<Real> qh, kh, vh, doh, dprobs, dqh, dkh, dvh;
  for (std::size_t bi = cfg_.transformer_layers; bi-- > 0;) {
    const BlockLayout& bl = L.blocks[bi];
    const auto& a = c.blocks[bi];

    // h_out = mid + FF(LN2(mid)); dh_cur holds d h_out and becomes d mid.
    d_act.resize(T * ff);
    linear_backward<Real>(dh_cur, a.ff_act, T, ff, d, P(bl.ff2_weight, d * ff), G(bl.ff2_weight, d * ff),
                          G(bl.ff2_bias, d), d_act, false);
    d_pre.resize(T * ff);
    for (std::size_t i = 0; i < d_pre.size(); ++i) d_pre[i] = d_act[i] * gelu_grad(a.ff_pre[i]);
    d_ln2.resize(T * d);
    linear_backward<Real>(d_pre, a.ln2, T, d, ff, P(bl.ff1_weight, ff * d), G(bl.ff1_weight, ff * d),
                          G(bl.ff1_bias, ff), d_ln2, false);
    layer_norm_backward<Real>(d_ln2, a.ln2_hat, a.ln2_rstd, P(bl.ln2_gain, d), T, d, dh_cur, G(bl.ln2_gain, d),
                              G(bl.ln2_bias, d));

    // mid = input + Wo attn + bo; dh_cur becomes d input.
    d_attn.resize(T * d);
    linear_backward<Real>(dh_cur, a.attn, T, d, d, P(bl.o_weight, d * d), G(bl.o_weight, d * d), G(bl.o_bias, d),
                          d_attn, false);
    dq.assign(T * d, Real(0));
    dk.assign(T * d, Real(0));
    dv.assign(T * d, Real(0));
    dprobs.resize(T * T);
    dqh.resize(T * dh);
    dkh.resize(T * dh);
    dvh.resize(T * dh);
    for (std::size_t head = 0; head < nh; ++head) {
      copy_columns_out(std::span<const Real>(a.q), T, d, head * dh, dh, qh);
      copy_columns_out(std::span<const Real>(a.k), T, d, head * dh, dh, kh);
      copy_columns_out(std::span<const Real>(a.v), T, d, head * dh, dh, vh);
      copy_columns_out(std::span<const Real>(d_attn), T, d, head * dh, dh, doh);
      std::span<const Real> probs(a.probs.data() + head * T * T, T * T);
      kernels::gemm_nt<Real>(T, T, dh, doh, vh, dprobs, false);
      kernels::gemm_tn<Real>(T, dh, T, probs, doh, dvh, false);
      for (std::size_t t = 0; t < T; ++t) {
        std::span<Real> row(dprobs.data() + t * T, T);
        softmax_backward<Real>(probs.subspan(t * T, T), row, row);
        for (Real& x : row) x *= scale;
      }
      kernels::gemm_nn<Real>(T, dh, T, dprobs, kh, dqh, false);
      kernels::gemm_tn<Real>(T, dh, T, dprobs, qh, dkh, false);
      add_columns_in(dqh, T, d, head * dh, dh, std::span<Real>(dq));
      add_columns_in(dkh, T, d, head * dh, dh, std::span<Real>(dk));
      add_columns_in(dvh, T, d, head * dh, dh, std::span<Real>(dv));
    }
    d_ln1.resize(T * d);
    linear_backward<Real>(dq, a.ln1, T, d, d, P(bl.q_weight, d * d), G(bl.q_weight, d * d), G(bl.q_bias, d), d_ln1,
                          false);
    linear_backward<Real>(dk, a.ln1, T, d, d, P(bl.k_weight, d * d), G(bl.k_weight, d * d), G(bl.k_bias, d), d_ln1,
                          true);
    linear_backward<Real>(dv, a.ln1, T, d, d, P(bl.v_weight, d * d), G(bl.v_weight, d * d), G(bl.v_bias, d), d_ln1,
                          true);
    layer_norm_backward<Real>(d_ln1, a.ln1_hat, a.ln1_rstd, P(bl.ln1_gain, d), T, d, dh_cur, G(bl.ln1_gain, d),
                              G(bl.ln1_bias, d));
  }

  // Projection and layer fusion.
  std::vector<Real> d_fused(T * F);
  linear_backward<Real>(dh_cur, c.fused, T, F, d, P(L.proj_weight, d * F), G(L.proj_weight, d * F),
                        G(L.proj_bias, d), d_fused, false);
  auto dalpha = G(L.alpha, cfg_.layer_count);
  const std::size_t plane = T * F;
  for (std::size_t l = 0; l < cfg_.layer_count; ++l) {
    const auto layer = c.stack->layer(l);
    Real acc = 0;
    for (std::size_t i = 0; i < plane; ++i) acc += d_fused[i] * static_cast<Real>(layer[i]);
    dalpha[l] += acc;
  }
}

template <class Real>
std::vector<Real> Model<Real>::gradients(const FeatureStack& stack, const ModelParams<Real>& params,
                                         std::span<const Real> score_grads) const {
  Activations cache;
  forward(stack, params, cache);
  std::vector<Real> g(layout_.total(), Real(0));
  backward(cache, params, score_grads, g);
  return g;
}

template std::vector<float> fuse_layers<float>(const FeatureStack&, std::span<const float>);
template std::vector<double> fuse_layers<double>(const FeatureStack&, std::span<const double>);
template PooledOutput<float> attention_pool<float>(std::span<const float>, std::size_t, std::size_t,
                                                   std::span<const float>, std::span<const float>,
                                                   std::span<const float>, std::size_t);
template PooledOutput<double> attention_pool<double>(std::span<const double>, std::size_t, std::size_t,
                                                     std::span<const double>, std::span<const double>,
                                                     std::span<const double>, std::size_t);
template class Model<float>;
template class Model<double>;

}  // namespace whisqa
