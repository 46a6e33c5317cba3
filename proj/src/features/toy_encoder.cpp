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
#include <cmath>

#include "whisqa/errors.hpp"
#include "whisqa/features.hpp"
#include "whisqa/kernels.hpp"
#include "whisqa/rng.hpp"

namespace whisqa {

namespace {

// Log-mel values sit roughly in [-23, 5]; bring them near unit scale.
constexpr double kMelScale = 0.1;

std::vector<double> gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  std::vector<double> m(rows * cols);
  for (double& v : m) v = rng.normal() * scale;
  return m;
}

}  // namespace

FeatureStack toy_encode(const MelSpectrogram& mel, std::uint64_t seed, StackDims dims) {
  if (dims.layers == 0 || dims.frames == 0 || dims.features == 0) {
    throw ShapeError("toy_encode: every dimension must be nonzero");
  }
  if (mel.frame_count == 0 || mel.n_mels == 0) throw ShapeError("toy_encode: empty mel spectrogram");

  const std::size_t T = dims.frames;
  const std::size_t F = dims.features;
  const std::size_t M = mel.n_mels;
  const std::size_t Tm = mel.frame_count;

  // Block-average mel frames onto the output time grid.
  std::vector<double> pooled(T * M, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t begin = t * Tm / T;
    std::size_t end = std::max(begin + 1, (t + 1) * Tm / T);
    end = std::min(end, Tm);
    begin = std::min(begin, Tm - 1);
    for (std::size_t s = begin; s < end; ++s) {
      for (std::size_t m = 0; m < M; ++m) pooled[t * M + m] += mel.at(s, m);
    }
    const double inv = kMelScale / static_cast<double>(end - begin);
    for (std::size_t m = 0; m < M; ++m) pooled[t * M + m] *= inv;
  }

  Rng rng(mix_seed(seed, 0x746f79));
  const std::vector<double> input_proj = gaussian_matrix(rng, F, M, 1.0 / std::sqrt(static_cast<double>(M)));

  std::vector<float> out(dims.size());
  std::vector<double> prev(T * F);
  kernels::gemm_nt<double>(T, F, M, pooled, input_proj, prev, false);
  for (double& v : prev) v = std::tanh(v);
  std::copy(prev.begin(), prev.end(), out.begin());

  std::vector<double> context(T * F), mixed(T * F);
  for (std::size_t l = 1; l < dims.layers; ++l) {
    const std::vector<double> transform = gaussian_matrix(rng, F, F, 1.0 / std::sqrt(static_cast<double>(F)));
    const double weight = static_cast<double>(l) / static_cast<double>(dims.layers);
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t before = t == 0 ? 0 : t - 1;
      const std::size_t after = t + 1 == T ? t : t + 1;
      for (std::size_t f = 0; f < F; ++f) {
        context[t * F + f] = 0.5 * prev[t * F + f] + 0.25 * prev[before * F + f] + 0.25 * prev[after * F + f];
      }
    }
    kernels::gemm_nt<double>(T, F, F, context, transform, mixed, false);
    for (std::size_t i = 0; i < prev.size(); ++i) {
      prev[i] = (1.0 - weight) * prev[i] + weight * std::tanh(mixed[i]);
    }
    std::transform(prev.begin(), prev.end(), out.begin() + static_cast<std::ptrdiff_t>(l * T * F),
                   [](double v) { return static_cast<float>(v); });
  }

  const std::size_t valid = std::min(T, (mel.valid_frames * T + Tm - 1) / Tm);
  return FeatureStack(dims, std::move(out), valid);
}

FeatureStack featurize(const Waveform& w, std::uint64_t seed, StackDims dims, const MelConfig& cfg) {
  const Waveform padded = pad_or_trim(w, cfg.pad_s);
  const MelSpectrogram mel = compute_log_mel(padded, cfg, w.samples.size());
  return toy_encode(mel, seed, dims);
}

}  // namespace whisqa
