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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "whisqa/features.hpp"
#include "whisqa/objectives.hpp"

namespace whisqa {

enum class LabelScale { mos_1_5, mushra_0_10, normalized };
enum class Subset { train, val, test };

LabelScale parse_scale(const std::string& s);
const char* to_string(LabelScale s);
Subset parse_subset(const std::string& s);
const char* to_string(Subset s);

/// Quality dimensions in manifest column order. Head names are the upper-case
/// forms (MOS, NOI, COL, DIS, LOUD).
inline constexpr std::size_t kLabelDims = 5;
inline constexpr std::array<const char*, kLabelDims> kLabelColumns = {"mos", "noi", "col", "dis", "loud"};
inline constexpr std::array<const char*, kLabelDims> kLabelHeads = {"MOS", "NOI", "COL", "DIS", "LOUD"};

/// Index into kLabelHeads; throws DataError for an unknown head name.
std::size_t label_index(const std::string& head);

struct DatasetRecord {
  std::string id;
  std::filesystem::path feature_path;
  std::array<std::optional<double>, kLabelDims> labels;  // raw, on `scale`
  LabelScale scale = LabelScale::mos_1_5;
  std::string dataset;
  Subset subset = Subset::train;

  /// Normalized value of label `dim`; throws DataError if absent.
  double normalized(std::size_t dim) const;
};

/// Bounds of a scale, inclusive.
std::pair<double, double> scale_bounds(LabelScale s);

/// mos_1_5: v / 5. mushra_0_10: (1 + 0.4 v) / 5. normalized: v.
/// Throws RangeError outside the scale's bounds.
double normalize_label(double v, LabelScale s);

/// 5 q, for q in [0.2, 1]; throws RangeError otherwise.
double denormalize(double q);

/// Header must name id, feature_path, mos, scale, dataset, subset; noi, col,
/// dis, loud are optional. Relative feature paths resolve against the
/// manifest's directory. Errors carry `file:line`.
std::vector<DatasetRecord> parse_manifest(const std::filesystem::path& path);
std::vector<DatasetRecord> parse_manifest(std::istream& in, const std::string& source,
                                          const std::filesystem::path& base_dir);

/// Writes all ten columns; feature paths are written as given.
void write_manifest(std::ostream& out, std::span<const DatasetRecord> records);

/// Records grouped for training: the selected tags' train subsets (plus any
/// predefined val records), with per-tag training sizes N_d.
struct CombinedDataset {
  std::vector<std::string> selection;
  std::vector<DatasetRecord> train;
  std::vector<DatasetRecord> val;
  DatasetSizes sizes;
  std::size_t total = 0;
};

/// Throws DataError on an empty selection or a tag absent from `all`.
CombinedDataset combine_datasets(std::span<const DatasetRecord> all, const std::vector<std::string>& selection);

/// Distinct dataset tags in first-seen order.
std::vector<std::string> dataset_tags(std::span<const DatasetRecord> records);

/// Moves round(fraction * n_d) seeded-random train records of each tag into
/// val, except for tags that already have val records. Throws DataError when
/// a tag to be split has fewer than 10 records. Sizes are recomputed from the
/// remaining train records.
CombinedDataset split_validation(const CombinedDataset& ds, double fraction, std::uint64_t seed);

/// Shuffled index batches of size `batch` (last may be short). The order
/// depends only on (n, batch, seed, epoch).
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch, std::uint64_t seed,
                                                   std::size_t epoch);

/// In-memory training example: features plus normalized targets per head.
struct Example {
  std::string id;
  std::shared_ptr<const FeatureStack> features;
  std::vector<double> targets;
  std::string dataset;
};

/// Loads each distinct feature file once. Throws DataError when a record
/// lacks a label one of `heads` needs.
std::vector<Example> load_examples(std::span<const DatasetRecord> records, const std::vector<std::string>& heads);

// Synthetic data -----------------------------------------------------------

/// Desk-scale stand-in for a rated corpus. Each utterance has a planted
/// quality level z ~ U(-level_range, level_range); its MOS label is
/// q = 0.2 + 0.8 sigmoid(z) (+ N(0, noise_sd), clipped to [0.2, 1]). The
/// other four dimensions use levels correlated with z at `label_correlation`.
/// Levels are written into the feature stack along fixed directions drawn
/// from `pattern_seed`, so sets generated with different `seed`s share the
/// same ground-truth mapping.
struct SynthSpec {
  std::size_t n = 64;
  StackDims dims{4, 16, 8};
  double noise_sd = 0.0;
  std::uint64_t seed = 1;
  std::uint64_t pattern_seed = 0x5eedf00d;
  std::string dataset = "SYNTH";
  Subset subset = Subset::train;
  double feature_noise = 0.1;
  double level_range = 2.5;
  double label_correlation = 0.6;
  std::string id_prefix = "synth";
};

struct SynthDataset {
  std::vector<DatasetRecord> records;  // normalized scale, all five labels
  std::vector<std::shared_ptr<const FeatureStack>> stacks;
  std::vector<std::array<double, kLabelDims>> levels;  // planted z per dimension

  std::vector<Example> examples(const std::vector<std::string>& heads) const;
};

/// Noise-free label for a planted level.
double planted_quality(double level);

/// Throws ShapeError for zero dims, DataError for n == 0.
SynthDataset synth_dataset(const SynthSpec& spec);

/// Writes <dir>/<id>.wsqf for every record plus <dir>/<manifest_name>,
/// rewriting feature paths relative to `dir`. Returns the manifest path.
std::filesystem::path write_synth_dataset(SynthDataset& ds, const std::filesystem::path& dir,
                                          const std::string& manifest_name = "manifest.csv");

// Distribution summary -----------------------------------------------------

inline constexpr std::size_t kHistogramBins = 20;

struct DistributionRow {
  std::string tag;
  std::size_t count = 0;
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  std::array<std::size_t, kHistogramBins> histogram{};  // over [0.2, 1]
};

/// One row per tag (first-seen order) plus a final COMBINED row, from the
/// normalized MOS labels. Throws DataError on empty input.
std::vector<DistributionRow> distribution_summary(std::span<const DatasetRecord> records);

/// Header: tag,count,min,mean,max,bin00..bin19
void write_distribution_csv(std::ostream& out, std::span<const DistributionRow> rows);

}  // namespace whisqa
