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
#include <string>

#include "whisqa/errors.hpp"
#include "whisqa/features.hpp"

namespace whisqa {

void Waveform::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw RangeError("waveform: sample rate must be positive, got " + std::to_string(sample_rate));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw RangeError("waveform: non-finite sample at index " + std::to_string(i));
    }
  }
}

Waveform pad_or_trim(const Waveform& w, double target_s) {
  if (!(target_s > 0.0) || !std::isfinite(target_s)) {
    throw RangeError("pad_or_trim: target length must be positive, got " + std::to_string(target_s));
  }
  w.validate();
  const auto target = static_cast<std::size_t>(std::llround(target_s * w.sample_rate));
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(target, 0.0);
  const std::size_t keep = std::min(target, w.samples.size());
  std::copy_n(w.samples.begin(), keep, out.samples.begin());
  return out;
}

FeatureStack::FeatureStack(StackDims dims, std::vector<float> data, std::size_t valid_frames)
    : dims_(dims), valid_frames_(valid_frames), data_(std::move(data)) {
  if (dims_.layers == 0 || dims_.frames == 0 || dims_.features == 0) {
    throw ShapeError("feature stack: every dimension must be nonzero");
  }
  if (data_.size() != dims_.size()) {
    throw ShapeError("feature stack: expected " + std::to_string(dims_.size()) + " values, got " +
                     std::to_string(data_.size()));
  }
  if (valid_frames_ > dims_.frames) {
    throw RangeError("feature stack: valid_frames " + std::to_string(valid_frames_) +
                     " exceeds frame count " + std::to_string(dims_.frames));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw RangeError("feature stack: non-finite value at flat index " + std::to_string(i));
    }
  }
}

}  // namespace whisqa
