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

#include "whisqa/errors.hpp"
#include "whisqa/trainer.hpp"

namespace whisqa {

template <class Real>
void adam_update(std::span<Real> params, std::span<const Real> grads, AdamState<Real>& state, double lr,
                 const AdamConfig& cfg) {
  if (params.size() != grads.size()) {
    throw ShapeError("adam: " + std::to_string(params.size()) + " parameters but " + std::to_string(grads.size()) +
                     " gradients");
  }
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), Real(0));
    state.v.assign(params.size(), Real(0));
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adam: optimizer moments do not match the parameter count");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const auto b1 = static_cast<Real>(cfg.beta1);
  const auto b2 = static_cast<Real>(cfg.beta2);
  const auto step_size = static_cast<Real>(lr / (1.0 - std::pow(cfg.beta1, t)));
  const auto v_scale = static_cast<Real>(1.0 / std::sqrt(1.0 - std::pow(cfg.beta2, t)));
  const auto eps = static_cast<Real>(cfg.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Real g = grads[i];
    state.m[i] = b1 * state.m[i] + (Real(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (Real(1) - b2) * g * g;
    params[i] -= step_size * state.m[i] / (std::sqrt(state.v[i]) * v_scale + eps);
  }
}

template void adam_update<float>(std::span<float>, std::span<const float>, AdamState<float>&, double,
                                 const AdamConfig&);
template void adam_update<double>(std::span<double>, std::span<const double>, AdamState<double>&, double,
                                  const AdamConfig&);

}  // namespace whisqa
