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

#include <string>

#include "whisqa/errors.hpp"
#include "whisqa/objectives.hpp"

namespace whisqa {

template <class Real>
Real weighted_squared_error(std::span<const Real> prediction, std::span<const Real> target, Real weight, Real count,
                            std::span<Real> grad) {
  Real total = 0;
  for (std::size_t h = 0; h < prediction.size(); ++h) {
    const Real err = prediction[h] - target[h];
    total += weight * (err * err);
    grad[h] = Real(2) * weight * err / count;
  }
  return total;
}

template <class Real>
LossResult<Real> weighted_mse_loss(std::span<const Real> predictions, std::span<const Real> targets,
                                   std::size_t heads, std::span<const Real> weights) {
  if (heads == 0 || predictions.empty()) throw ShapeError("loss: empty batch");
  if (predictions.size() != targets.size() || predictions.size() % heads != 0) {
    throw ShapeError("loss: " + std::to_string(predictions.size()) + " predictions vs " +
                     std::to_string(targets.size()) + " targets for " + std::to_string(heads) + " heads");
  }
  const std::size_t n = predictions.size() / heads;
  if (weights.size() != n) throw ShapeError("loss: expected one weight per sample");

  const Real count = static_cast<Real>(predictions.size());
  LossResult<Real> out;
  out.grad.resize(predictions.size());
  Real total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += weighted_squared_error<Real>(predictions.subspan(i * heads, heads), targets.subspan(i * heads, heads),
                                          weights[i], count, std::span<Real>(out.grad).subspan(i * heads, heads));
  }
  out.value = total / count;
  return out;
}

template <class Real>
LossResult<Real> mse_loss(std::span<const Real> predictions, std::span<const Real> targets, std::size_t heads) {
  const std::size_t n = heads == 0 ? 0 : predictions.size() / heads;
  const std::vector<Real> ones(n, Real(1));
  return weighted_mse_loss<Real>(predictions, targets, heads, ones);
}

template <class Real>
std::vector<Real> bias_aware_weights(std::span<const std::string> tags, const DatasetSizes& sizes) {
  if (sizes.empty()) throw DataError("bias-aware loss: no dataset sizes recorded");
  std::size_t total = 0;
  for (const auto& [tag, size] : sizes) {
    if (size == 0) throw DataError("bias-aware loss: dataset " + tag + " has size 0");
    total += size;
  }
  const double datasets = static_cast<double>(sizes.size());
  std::vector<double> raw(tags.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto it = sizes.find(tags[i]);
    if (it == sizes.end()) throw DataError("bias-aware loss: unknown dataset tag '" + tags[i] + "'");
    raw[i] = static_cast<double>(total) / (datasets * static_cast<double>(it->second));
    sum += raw[i];
  }
  const double mean = tags.empty() ? 1.0 : sum / static_cast<double>(tags.size());
  std::vector<Real> w(tags.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<Real>(raw[i] / mean);
  return w;
}

template <class Real>
LossResult<Real> bias_aware_loss(std::span<const Real> predictions, std::span<const Real> targets, std::size_t heads,
                                  std::span<const std::string> tags, const DatasetSizes& sizes) {
  const std::vector<Real> w = bias_aware_weights<Real>(tags, sizes);
  return weighted_mse_loss<Real>(predictions, targets, heads, w);
}

#define WHISQA_INSTANTIATE_LOSSES(Real)                                                                              \
  template Real weighted_squared_error<Real>(std::span<const Real>, std::span<const Real>, Real, Real,               \
                                             std::span<Real>);                                                      \
  template LossResult<Real> weighted_mse_loss<Real>(std::span<const Real>, std::span<const Real>, std::size_t,      \
                                                    std::span<const Real>);                                         \
  template LossResult<Real> mse_loss<Real>(std::span<const Real>, std::span<const Real>, std::size_t);              \
  template std::vector<Real> bias_aware_weights<Real>(std::span<const std::string>, const DatasetSizes&);           \
  template LossResult<Real> bias_aware_loss<Real>(std::span<const Real>, std::span<const Real>, std::size_t,        \
                                                  std::span<const std::string>, const DatasetSizes&);

WHISQA_INSTANTIATE_LOSSES(float)
WHISQA_INSTANTIATE_LOSSES(double)

#undef WHISQA_INSTANTIATE_LOSSES

}  // namespace whisqa
