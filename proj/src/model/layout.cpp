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

#include <algorithm>
#include <set>

#include "whisqa/errors.hpp"
#include "whisqa/model.hpp"

namespace whisqa {

void ArchConfig::validate() const {
  if (layer_count == 0 || frame_count == 0 || feature_dim == 0) {
    throw ConfigError("arch: layer_count, frame_count and feature_dim must be positive");
  }
  if (model_dim == 0 || attention_heads == 0 || model_dim % attention_heads != 0) {
    throw ConfigError("arch: model_dim " + std::to_string(model_dim) + " must be a positive multiple of attention_heads " +
                      std::to_string(attention_heads));
  }
  if (transformer_layers == 0) throw ConfigError("arch: transformer_layers must be >= 1");
  if (head_names.empty()) throw ConfigError("arch: at least one output head is required");
  const std::set<std::string> unique(head_names.begin(), head_names.end());
  if (unique.size() != head_names.size()) throw ConfigError("arch: duplicate head names");
}

const char* to_string(ParamGroup g) {
  switch (g) {
    case ParamGroup::alpha: return "alpha";
    case ParamGroup::projection: return "projection";
    case ParamGroup::attention: return "attention";
    case ParamGroup::feed_forward: return "feed_forward";
    case ParamGroup::norm: return "norm";
    case ParamGroup::pooling: return "pooling";
    case ParamGroup::output: return "output";
  }
  return "?";
}

std::size_t ParamLayout::add(std::string name, ParamGroup group, std::size_t rows, std::size_t cols) {
  const std::size_t offset = total_;
  tensors_.push_back({std::move(name), group, rows, cols, offset});
  total_ += rows * cols;
  return offset;
}

ParamLayout::ParamLayout(const ArchConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.model_dim;
  alpha = add("alpha", ParamGroup::alpha, 1, cfg.layer_count);
  proj_weight = add("proj.weight", ParamGroup::projection, d, cfg.feature_dim);
  proj_bias = add("proj.bias", ParamGroup::projection, 1, d);
  for (std::size_t b = 0; b < cfg.transformer_layers; ++b) {
    const std::string p = "block" + std::to_string(b) + ".";
    BlockLayout bl{};
    bl.ln1_gain = add(p + "ln1.gain", ParamGroup::norm, 1, d);
    bl.ln1_bias = add(p + "ln1.bias", ParamGroup::norm, 1, d);
    bl.q_weight = add(p + "attn.q.weight", ParamGroup::attention, d, d);
    bl.q_bias = add(p + "attn.q.bias", ParamGroup::attention, 1, d);
    bl.k_weight = add(p + "attn.k.weight", ParamGroup::attention, d, d);
    bl.k_bias = add(p + "attn.k.bias", ParamGroup::attention, 1, d);
    bl.v_weight = add(p + "attn.v.weight", ParamGroup::attention, d, d);
    bl.v_bias = add(p + "attn.v.bias", ParamGroup::attention, 1, d);
    bl.o_weight = add(p + "attn.out.weight", ParamGroup::attention, d, d);
    bl.o_bias = add(p + "attn.out.bias", ParamGroup::attention, 1, d);
    bl.ln2_gain = add(p + "ln2.gain", ParamGroup::norm, 1, d);
    bl.ln2_bias = add(p + "ln2.bias", ParamGroup::norm, 1, d);
    bl.ff1_weight = add(p + "ff1.weight", ParamGroup::feed_forward, cfg.ff_dim(), d);
    bl.ff1_bias = add(p + "ff1.bias", ParamGroup::feed_forward, 1, cfg.ff_dim());
    bl.ff2_weight = add(p + "ff2.weight", ParamGroup::feed_forward, d, cfg.ff_dim());
    bl.ff2_bias = add(p + "ff2.bias", ParamGroup::feed_forward, 1, d);
    blocks.push_back(bl);
  }
  final_gain = add("final_norm.gain", ParamGroup::norm, 1, d);
  final_bias = add("final_norm.bias", ParamGroup::norm, 1, d);
  for (const std::string& h : cfg.head_names) {
    const std::string p = "head." + h + ".";
    HeadLayout hl{};
    hl.pool1_weight = add(p + "pool1.weight", ParamGroup::pooling, cfg.pool_dim(), d);
    hl.pool1_bias = add(p + "pool1.bias", ParamGroup::pooling, 1, cfg.pool_dim());
    hl.pool2_weight = add(p + "pool2.weight", ParamGroup::pooling, 1, cfg.pool_dim());
    hl.out_weight = add(p + "out.weight", ParamGroup::output, 1, d);
    hl.out_bias = add(p + "out.bias", ParamGroup::output, 1, 1);
    heads.push_back(hl);
  }
}

const ParamTensor& ParamLayout::find(const std::string& name) const {
  auto it = std::find_if(tensors_.begin(), tensors_.end(), [&](const ParamTensor& t) { return t.name == name; });
  if (it == tensors_.end()) throw Error("no parameter tensor named " + name);
  return *it;
}

double Prediction::operator[](const std::string& head) const {
  for (std::size_t i = 0; i < heads.size(); ++i) {
    if (heads[i] == head) return scores[i];
  }
  throw Error("prediction has no head named " + head);
}

}  // namespace whisqa
