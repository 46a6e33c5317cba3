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
#include <cstdio>
#include <fstream>
#include <numbers>

#include "whisqa/data.hpp"
#include "whisqa/errors.hpp"
#include "whisqa/rng.hpp"

namespace whisqa {

double planted_quality(double level) { return 0.2 + 0.8 / (1.0 + std::exp(-level)); }

SynthDataset synth_dataset(const SynthSpec& spec) {
  if (spec.n == 0) throw DataError("synth: n must be >= 1");
  const StackDims dims = spec.dims;
  if (dims.layers == 0 || dims.frames == 0 || dims.features == 0) throw ShapeError("synth: every dimension must be nonzero");
  if (!(spec.noise_sd >= 0.0) || !(spec.label_correlation >= -1.0 && spec.label_correlation <= 1.0)) {
    throw RangeError("synth: noise_sd must be >= 0 and label_correlation in [-1, 1]");
  }
  const std::size_t L = dims.layers;
  const std::size_t T = dims.frames;
  const std::size_t F = dims.features;

  // Ground-truth geometry shared by every set drawn with this pattern_seed.
  Rng pattern(spec.pattern_seed);
  std::vector<double> directions(kLabelDims * F);
  for (double& v : directions) v = pattern.normal() / std::sqrt(static_cast<double>(kLabelDims));
  std::vector<double> nuisance(F);
  for (double& v : nuisance) v = pattern.normal();
  std::vector<double> signal_gain(L), nuisance_gain(L);
  for (std::size_t l = 0; l < L; ++l) {
    signal_gain[l] = 0.25 + 0.75 * std::sin(std::numbers::pi * (static_cast<double>(l) + 0.5) / static_cast<double>(L));
    nuisance_gain[l] = 1.2 - signal_gain[l];
  }

  const double rho = spec.label_correlation;
  const double rest = std::sqrt(std::max(0.0, 1.0 - rho * rho));

  SynthDataset ds;
  Rng rng(mix_seed(spec.seed, 0x73796e74));
  for (std::size_t i = 0; i < spec.n; ++i) {
    std::array<double, kLabelDims> level{};
    level[0] = rng.uniform(-spec.level_range, spec.level_range);
    for (std::size_t k = 1; k < kLabelDims; ++k) {
      level[k] = rho * level[0] + rest * rng.uniform(-spec.level_range, spec.level_range);
    }
    const double nuisance_level = rng.normal();
    const std::size_t valid = (T + 1) / 2 + static_cast<std::size_t>(rng.below(T - (T + 1) / 2 + 1));
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

    std::vector<double> content(F, 0.0);
    for (std::size_t k = 0; k < kLabelDims; ++k) {
      for (std::size_t f = 0; f < F; ++f) content[f] += level[k] * directions[k * F + f];
    }

    std::vector<float> data(dims.size());
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t t = 0; t < T; ++t) {
        const double envelope =
            t < valid ? 1.0 + 0.3 * std::sin(phase + 2.0 * std::numbers::pi * static_cast<double>(t) / 7.0) : 0.0;
        for (std::size_t f = 0; f < F; ++f) {
          const double v = envelope * (signal_gain[l] * content[f] + nuisance_gain[l] * nuisance_level * nuisance[f]) +
                           spec.feature_noise * rng.normal();
          data[(l * T + t) * F + f] = static_cast<float>(v);
        }
      }
    }

    DatasetRecord r;
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "_%06zu", i);
    r.id = spec.id_prefix + suffix;
    r.feature_path = r.id + ".wsqf";
    r.scale = LabelScale::normalized;
    r.dataset = spec.dataset;
    r.subset = spec.subset;
    for (std::size_t k = 0; k < kLabelDims; ++k) {
      double q = planted_quality(level[k]);
      if (spec.noise_sd > 0.0) q += spec.noise_sd * rng.normal();
      r.labels[k] = std::clamp(q, 0.2, 1.0);
    }

    ds.records.push_back(std::move(r));
    ds.stacks.push_back(std::make_shared<const FeatureStack>(dims, std::move(data), valid));
    ds.levels.push_back(level);
  }
  return ds;
}

std::vector<Example> SynthDataset::examples(const std::vector<std::string>& heads) const {
  std::vector<std::size_t> dims;
  for (const std::string& h : heads) dims.push_back(label_index(h));
  std::vector<Example> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    Example ex;
    ex.id = records[i].id;
    ex.dataset = records[i].dataset;
    ex.features = stacks[i];
    for (std::size_t dim : dims) ex.targets.push_back(records[i].normalized(dim));
    out.push_back(std::move(ex));
  }
  return out;
}

std::filesystem::path write_synth_dataset(SynthDataset& ds, const std::filesystem::path& dir,
                                          const std::string& manifest_name) {
  std::filesystem::create_directories(dir);
  std::vector<DatasetRecord> relative = ds.records;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const std::filesystem::path file = ds.records[i].id + ".wsqf";
    save_feature_stack(*ds.stacks[i], dir / file);
    relative[i].feature_path = file;
    ds.records[i].feature_path = dir / file;
  }
  const std::filesystem::path manifest = dir / manifest_name;
  std::ofstream out(manifest);
  if (!out) throw Error("cannot write " + manifest.string());
  write_manifest(out, relative);
  return manifest;
}

}  // namespace whisqa
