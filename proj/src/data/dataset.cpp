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
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "whisqa/data.hpp"
#include "whisqa/errors.hpp"
#include "whisqa/rng.hpp"

namespace whisqa {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::vector<std::string> dataset_tags(std::span<const DatasetRecord> records) {
  std::vector<std::string> tags;
  for (const DatasetRecord& r : records) {
    if (std::find(tags.begin(), tags.end(), r.dataset) == tags.end()) tags.push_back(r.dataset);
  }
  return tags;
}

CombinedDataset combine_datasets(std::span<const DatasetRecord> all, const std::vector<std::string>& selection) {
  if (selection.empty()) throw DataError("combine: empty dataset selection");
  const std::vector<std::string> present = dataset_tags(all);
  std::set<std::string> chosen;
  for (const std::string& tag : selection) {
    if (std::find(present.begin(), present.end(), tag) == present.end()) {
      throw DataError("combine: unknown dataset tag '" + tag + "'");
    }
    if (!chosen.insert(tag).second) throw DataError("combine: dataset tag '" + tag + "' selected twice");
  }

  CombinedDataset ds;
  ds.selection = selection;
  for (const DatasetRecord& r : all) {
    if (!chosen.contains(r.dataset)) continue;
    if (r.subset == Subset::train) {
      ds.train.push_back(r);
      ++ds.sizes[r.dataset];
    } else if (r.subset == Subset::val) {
      ds.val.push_back(r);
    }
  }
  for (const std::string& tag : selection) {
    if (!ds.sizes.contains(tag)) throw DataError("combine: dataset '" + tag + "' has no train records");
  }
  ds.total = ds.train.size();
  return ds;
}

CombinedDataset split_validation(const CombinedDataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw RangeError("split: fraction must be in (0, 1)");
  std::set<std::string> has_val;
  for (const DatasetRecord& r : ds.val) has_val.insert(r.dataset);

  std::map<std::string, std::vector<std::size_t>> by_tag;
  for (std::size_t i = 0; i < ds.train.size(); ++i) by_tag[ds.train[i].dataset].push_back(i);

  std::vector<bool> to_val(ds.train.size(), false);
  for (auto& [tag, idx] : by_tag) {
    if (has_val.contains(tag)) continue;
    if (idx.size() < 10) {
      throw DataError("split: dataset '" + tag + "' has " + std::to_string(idx.size()) +
                      " train records, need at least 10 to carve out validation data");
    }
    const auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    Rng rng(mix_seed(seed, fnv1a(tag)));
    rng.shuffle(idx);
    for (std::size_t k = 0; k < n_val; ++k) to_val[idx[k]] = true;
  }

  CombinedDataset out;
  out.selection = ds.selection;
  out.val = ds.val;
  for (std::size_t i = 0; i < ds.train.size(); ++i) {
    if (to_val[i]) {
      out.val.push_back(ds.train[i]);
    } else {
      out.train.push_back(ds.train[i]);
      ++out.sizes[ds.train[i].dataset];
    }
  }
  out.total = out.train.size();
  return out;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch, std::uint64_t seed,
                                                   std::size_t epoch) {
  if (n == 0) throw DataError("make_batches: empty dataset");
  if (batch == 0) throw RangeError("make_batches: batch size must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0xba7c4000ull + epoch));
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch) {
    const std::size_t end = std::min(n, start + batch);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::vector<Example> load_examples(std::span<const DatasetRecord> records, const std::vector<std::string>& heads) {
  std::vector<std::size_t> dims;
  for (const std::string& h : heads) dims.push_back(label_index(h));
  std::map<std::filesystem::path, std::shared_ptr<const FeatureStack>> cache;
  std::vector<Example> out;
  out.reserve(records.size());
  for (const DatasetRecord& r : records) {
    Example ex;
    ex.id = r.id;
    ex.dataset = r.dataset;
    for (std::size_t dim : dims) ex.targets.push_back(r.normalized(dim));
    auto& slot = cache[r.feature_path];
    if (!slot) slot = std::make_shared<const FeatureStack>(load_feature_stack(r.feature_path));
    ex.features = slot;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<DistributionRow> distribution_summary(std::span<const DatasetRecord> records) {
  if (records.empty()) throw DataError("distribution summary: no records");
  auto accumulate = [](DistributionRow& row, double q) {
    if (row.count == 0) {
      row.min = row.max = q;
    } else {
      row.min = std::min(row.min, q);
      row.max = std::max(row.max, q);
    }
    row.mean += q;
    ++row.count;
    const double pos = (q - 0.2) / 0.8 * static_cast<double>(kHistogramBins);
    const auto bin = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, double(kHistogramBins - 1)));
    ++row.histogram[bin];
  };

  std::vector<DistributionRow> rows;
  for (const std::string& tag : dataset_tags(records)) rows.push_back({tag});
  DistributionRow combined{"COMBINED"};
  for (const DatasetRecord& r : records) {
    const double q = r.normalized(0);
    auto it = std::find_if(rows.begin(), rows.end(), [&](const DistributionRow& row) { return row.tag == r.dataset; });
    accumulate(*it, q);
    accumulate(combined, q);
  }
  rows.push_back(combined);
  for (DistributionRow& row : rows) row.mean /= static_cast<double>(row.count);
  return rows;
}

void write_distribution_csv(std::ostream& out, std::span<const DistributionRow> rows) {
  out << "tag,count,min,mean,max";
  for (std::size_t b = 0; b < kHistogramBins; ++b) out << ",bin" << (b < 10 ? "0" : "") << b;
  out << '\n';
  for (const DistributionRow& row : rows) {
    out << row.tag << ',' << row.count << ',' << format_number(row.min) << ',' << format_number(row.mean) << ','
        << format_number(row.max);
    for (std::size_t c : row.histogram) out << ',' << c;
    out << '\n';
  }
}

}  // namespace whisqa
