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

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "whisqa/csv.hpp"
#include "whisqa/data.hpp"
#include "whisqa/errors.hpp"

namespace whisqa {

namespace {

constexpr std::array<const char*, 6> kRequiredColumns = {"id", "feature_path", "mos", "scale", "dataset", "subset"};

std::optional<double> parse_number(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_label(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace

LabelScale parse_scale(const std::string& s) {
  if (s == "mos_1_5") return LabelScale::mos_1_5;
  if (s == "mushra_0_10") return LabelScale::mushra_0_10;
  if (s == "normalized") return LabelScale::normalized;
  throw DataError("unknown label scale '" + s + "' (expected mos_1_5, mushra_0_10 or normalized)");
}

const char* to_string(LabelScale s) {
  switch (s) {
    case LabelScale::mos_1_5: return "mos_1_5";
    case LabelScale::mushra_0_10: return "mushra_0_10";
    case LabelScale::normalized: return "normalized";
  }
  return "?";
}

Subset parse_subset(const std::string& s) {
  if (s == "train") return Subset::train;
  if (s == "val") return Subset::val;
  if (s == "test") return Subset::test;
  throw DataError("unknown subset '" + s + "' (expected train, val or test)");
}

const char* to_string(Subset s) {
  switch (s) {
    case Subset::train: return "train";
    case Subset::val: return "val";
    case Subset::test: return "test";
  }
  return "?";
}

std::size_t label_index(const std::string& head) {
  for (std::size_t i = 0; i < kLabelHeads.size(); ++i) {
    if (head == kLabelHeads[i]) return i;
  }
  throw DataError("no label column for head '" + head + "'");
}

std::pair<double, double> scale_bounds(LabelScale s) {
  switch (s) {
    case LabelScale::mos_1_5: return {1.0, 5.0};
    case LabelScale::mushra_0_10: return {0.0, 10.0};
    case LabelScale::normalized: return {0.2, 1.0};
  }
  return {0.0, 0.0};
}

double normalize_label(double v, LabelScale s) {
  const auto [lo, hi] = scale_bounds(s);
  if (!(v >= lo && v <= hi)) {
    throw RangeError("label " + format_number(v) + " outside [" + format_number(lo) + ", " + format_number(hi) +
                     "] for scale " + to_string(s));
  }
  switch (s) {
    case LabelScale::mos_1_5: return v / 5.0;
    case LabelScale::mushra_0_10: return (1.0 + 0.4 * v) / 5.0;
    case LabelScale::normalized: return v;
  }
  return v;
}

double denormalize(double q) {
  if (!(q >= 0.2 && q <= 1.0)) throw RangeError("normalized score " + format_number(q) + " outside [0.2, 1]");
  return 5.0 * q;
}

double DatasetRecord::normalized(std::size_t dim) const {
  if (!labels.at(dim)) throw DataError("record '" + id + "' has no " + kLabelColumns[dim] + " label");
  return normalize_label(*labels[dim], scale);
}

std::vector<DatasetRecord> parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  return parse_manifest(in, path.string(), path.parent_path());
}

std::vector<DatasetRecord> parse_manifest(std::istream& in, const std::string& source,
                                          const std::filesystem::path& base_dir) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty manifest");
  const std::vector<std::string> header = csv::split_line(line);
  std::map<std::string, std::size_t> column;
  const std::set<std::string> known = {"id",  "feature_path", "mos",   "noi",     "col",
                                       "dis", "loud",         "scale", "dataset", "subset"};
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = csv::trim(header[i]);
    if (!known.contains(name)) throw DataError(source + ":1: unknown column '" + name + "'");
    if (!column.emplace(name, i).second) throw DataError(source + ":1: duplicate column '" + name + "'");
  }
  for (const char* req : kRequiredColumns) {
    if (!column.contains(req)) throw DataError(source + ":1: missing required column '" + std::string(req) + "'");
  }

  std::vector<DatasetRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const std::vector<std::string> cells = csv::split_line(line);
    const std::string where = source + ":" + std::to_string(line_no);
    if (cells.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    }
    auto cell = [&](const char* name) { return csv::trim(cells[column.at(name)]); };

    DatasetRecord r;
    r.id = cell("id");
    if (r.id.empty()) throw DataError(where + ": empty id");
    const std::string feature = cell("feature_path");
    if (feature.empty()) throw DataError(where + ": empty feature_path");
    r.feature_path = std::filesystem::path(feature);
    if (r.feature_path.is_relative() && !base_dir.empty()) r.feature_path = base_dir / r.feature_path;
    try {
      r.scale = parse_scale(cell("scale"));
      r.subset = parse_subset(cell("subset"));
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    r.dataset = cell("dataset");
    if (r.dataset.empty()) throw DataError(where + ": empty dataset tag");

    for (std::size_t dim = 0; dim < kLabelDims; ++dim) {
      auto it = column.find(kLabelColumns[dim]);
      if (it == column.end()) continue;
      const std::string text = csv::trim(cells[it->second]);
      if (text.empty()) continue;
      const auto value = parse_number(text);
      if (!value) throw DataError(where + ": column '" + kLabelColumns[dim] + "': not a number: '" + text + "'");
      const auto [lo, hi] = scale_bounds(r.scale);
      if (*value < lo || *value > hi) {
        throw RangeError(where + ": column '" + kLabelColumns[dim] + "': value " + text + " outside [" +
                         format_number(lo) + ", " + format_number(hi) + "] for scale " + to_string(r.scale));
      }
      r.labels[dim] = *value;
    }
    if (!r.labels[0]) throw DataError(where + ": missing mos label");
    records.push_back(std::move(r));
  }
  return records;
}

void write_manifest(std::ostream& out, std::span<const DatasetRecord> records) {
  out << "id,feature_path,mos,noi,col,dis,loud,scale,dataset,subset\n";
  for (const DatasetRecord& r : records) {
    out << csv::escape(r.id) << ',' << csv::escape(r.feature_path.generic_string());
    for (const auto& label : r.labels) out << ',' << format_label(label);
    out << ',' << to_string(r.scale) << ',' << csv::escape(r.dataset) << ',' << to_string(r.subset) << '\n';
  }
}

}  // namespace whisqa
