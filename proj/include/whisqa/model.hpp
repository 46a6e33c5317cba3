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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "whisqa/features.hpp"

namespace whisqa {

/// Shape of the predictor. The defaults are the reference configuration:
/// 13 encoder layers of 1500 x 768 features, 4 transformer layers of width
/// 256 and a single MOS head.
struct ArchConfig {
  std::size_t layer_count = 13;
  std::size_t frame_count = 1500;
  std::size_t feature_dim = 768;
  std::size_t model_dim = 256;
  std::size_t transformer_layers = 4;
  std::size_t attention_heads = 4;
  std::vector<std::string> head_names = single_head_names();

  std::size_t ff_dim() const { return 4 * model_dim; }
  std::size_t pool_dim() const { return model_dim; }
  StackDims stack_dims() const { return {layer_count, frame_count, feature_dim}; }

  /// Throws ConfigError when any invariant is broken.
  void validate() const;

  bool operator==(const ArchConfig&) const = default;

  static std::vector<std::string> single_head_names() { return {"MOS"}; }
  static std::vector<std::string> multi_head_names() { return {"MOS", "NOI", "COL", "DIS", "LOUD"}; }
};

enum class ParamGroup { alpha, projection, attention, feed_forward, norm, pooling, output };

const char* to_string(ParamGroup g);

struct ParamTensor {
  std::string name;
  ParamGroup group;
  std::size_t rows;
  std::size_t cols;
  std::size_t offset;

  std::size_t size() const { return rows * cols; }
};

struct BlockLayout {
  std::size_t ln1_gain, ln1_bias;
  std::size_t q_weight, q_bias, k_weight, k_bias, v_weight, v_bias, o_weight, o_bias;
  std::size_t ln2_gain, ln2_bias;
  std::size_t ff1_weight, ff1_bias, ff2_weight, ff2_bias;
};

struct HeadLayout {
  std::size_t pool1_weight, pool1_bias, pool2_weight;
  std::size_t out_weight, out_bias;
};

/// Placement of every learnable tensor inside one flat parameter vector.
/// Matrices are row-major [out, in].
class ParamLayout {
 public:
  explicit ParamLayout(const ArchConfig& cfg);

  std::size_t total() const { return total_; }
  const std::vector<ParamTensor>& tensors() const { return tensors_; }
  const ParamTensor& find(const std::string& name) const;

  std::size_t alpha = 0;
  std::size_t proj_weight = 0;
  std::size_t proj_bias = 0;
  std::vector<BlockLayout> blocks;
  std::size_t final_gain = 0;
  std::size_t final_bias = 0;
  std::vector<HeadLayout> heads;

 private:
  std::size_t add(std::string name, ParamGroup group, std::size_t rows, std::size_t cols);

  std::vector<ParamTensor> tensors_;
  std::size_t total_ = 0;
};

template <class Real>
struct ModelParams {
  std::vector<Real> values;

  std::span<const Real> view(std::size_t offset, std::size_t n) const { return {values.data() + offset, n}; }
  std::span<Real> view(std::size_t offset, std::size_t n) { return {values.data() + offset, n}; }
  bool operator==(const ModelParams&) const = default;
};

/// Normalized quality scores in (0, 1), one per head, in head order.
struct Prediction {
  std::vector<std::string> heads;
  std::vector<double> scores;

  double operator[](const std::string& head) const;
};

/// out[t, f] = sum_l alpha[l] * stack[l, t, f]. Throws ShapeError when
/// alpha.size() != L.
template <class Real>
std::vector<Real> fuse_layers(const FeatureStack& stack, std::span<const Real> alpha);

template <class Real>
struct PooledOutput {
  std::vector<Real> pooled;   // [d]
  std::vector<Real> weights;  // [T], softmax over frames
};

/// Attention pooling over frames of h [T, d]:
///   s_t = w2 . tanh(W1 h_t + b1),  a = softmax(s),  out = sum_t a_t h_t
/// with W1 [da, d], b1 [da], w2 [da].
template <class Real>
PooledOutput<Real> attention_pool(std::span<const Real> h, std::size_t frames, std::size_t dim,
                                  std::span<const Real> w1, std::span<const Real> b1,
                                  std::span<const Real> w2, std::size_t pool_dim);

/// The quality predictor: weighted layer fusion, input projection with
/// sinusoidal positions, pre-norm transformer blocks, final norm, and one
/// attention-pool + linear + sigmoid stack per head.
///
/// forward/backward are const and keep no state between calls; one Model
/// may be shared by concurrent callers.
template <class Real>
class Model {
 public:
  /// Intermediate values of one forward pass, consumed by backward. Holds a
  /// pointer to the input stack, which must outlive it.
  struct Activations {
    struct Block {
      std::vector<Real> input, ln1, ln1_hat, ln1_rstd;
      std::vector<Real> q, k, v, probs, attn;
      std::vector<Real> mid, ln2, ln2_hat, ln2_rstd;
      std::vector<Real> ff_pre, ff_act;
    };
    struct Head {
      std::vector<Real> hidden;   // tanh(W1 h + b1), [T, da]
      std::vector<Real> weights;  // softmax over frames, [T]
      std::vector<Real> pooled;   // [d]
      Real score = 0;
    };

    const FeatureStack* stack = nullptr;
    std::vector<Real> fused;
    std::vector<Block> blocks;
    std::vector<Real> trunk, final_hat, final_rstd, final_out;
    std::vector<Head> heads;
  };

  explicit Model(ArchConfig cfg);
  ~Model();
  Model(const Model&);
  Model& operator=(const Model&);
  Model(Model&&) noexcept;
  Model& operator=(Model&&) noexcept;

  const ArchConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  std::size_t param_count() const { return layout_.total(); }

  /// alpha = 1/L, weight matrices uniform in +-1/sqrt(fan_in), biases 0,
  /// norm gains 1. Deterministic in (config, seed).
  ModelParams<Real> init_params(std::uint64_t seed) const;

  Prediction forward(const FeatureStack& stack, const ModelParams<Real>& params) const;

  /// Forward pass that keeps what backward needs. Returns head scores.
  std::vector<Real> forward(const FeatureStack& stack, const ModelParams<Real>& params,
                            Activations& cache) const;

  /// Adds dLoss/dparams to `grads` given dLoss/dscores for the pass recorded
  /// in `cache`.
  void backward(const Activations& cache, const ModelParams<Real>& params,
                std::span<const Real> score_grads, std::span<Real> grads) const;

  /// forward + backward into a fresh zeroed gradient vector.
  std::vector<Real> gradients(const FeatureStack& stack, const ModelParams<Real>& params,
                              std::span<const Real> score_grads) const;

 private:
  void check_inputs(const FeatureStack& stack, const ModelParams<Real>& params) const;

  ArchConfig cfg_;
  ParamLayout layout_;
  std::vector<Real> positions_;  // [T, d]
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace whisqa
