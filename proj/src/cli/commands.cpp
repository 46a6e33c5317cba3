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
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "whisqa/commands.hpp"
#include "whisqa/binary_io.hpp"
#include "whisqa/csv.hpp"
#include "whisqa/errors.hpp"
#include "whisqa/features.hpp"

namespace whisqa::cli {

namespace fs = std::filesystem;

namespace {

std::vector<DatasetRecord> read_manifests(const std::vector<fs::path>& paths) {
  if (paths.empty()) throw ConfigError("at least one manifest is required");
  std::vector<DatasetRecord> all;
  for (const auto& p : paths) {
    auto recs = parse_manifest(p);
    all.insert(all.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
  }
  return all;
}

std::vector<std::string> train_tags(std::span<const DatasetRecord> records) {
  std::vector<DatasetRecord> train;
  for (const auto& r : records) {
    if (r.subset == Subset::train) train.push_back(r);
  }
  return dataset_tags(train);
}

void write_text(const fs::path& path, const std::string& text) {
  io::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

template <class Real>
struct TrainedRun {
  Checkpoint<Real> checkpoint;
  std::size_t train_points = 0;
};

/// Combine, split, train, and write checkpoint.wsqc and train_report.csv
/// into `dir`.
template <class Real>
TrainedRun<Real> train_run(const RunConfig& cfg, std::span<const DatasetRecord> records,
                           const std::vector<std::string>& selection, const fs::path& dir) {
  const CombinedDataset combined = combine_datasets(records, selection);
  const CombinedDataset split = split_validation(combined, cfg.train.val_fraction, cfg.train.seed);
  const auto train_set = load_examples(split.train, cfg.arch.head_names);
  const auto val_set = load_examples(split.val, cfg.arch.head_names);

  ArchConfig arch = cfg.arch;
  const StackDims dims = train_set.front().features->dims();
  arch.layer_count = dims.layers;
  arch.frame_count = dims.frames;
  arch.feature_dim = dims.features;

  TrainedRun<Real> run{train<Real>(arch, cfg.train, train_set, val_set), combined.total};
  save_checkpoint(run.checkpoint, dir / "checkpoint.wsqc");
  std::ostringstream report;
  write_train_report(report, run.checkpoint.history);
  write_text(dir / "train_report.csv", report.str());
  return run;
}

struct LoadedTestset {
  std::string name;
  std::vector<Example> examples;
};

std::vector<LoadedTestset> load_testsets(const std::vector<fs::path>& manifests) {
  if (manifests.empty()) throw ConfigError("at least one test manifest is required");
  std::vector<LoadedTestset> sets;
  for (const auto& path : manifests) {
    const auto records = parse_manifest(path);
    std::vector<DatasetRecord> test;
    for (const auto& r : records) {
      if (r.subset == Subset::test) test.push_back(r);
    }
    if (test.empty()) test = records;
    if (test.empty()) throw DataError(path.string() + ": test manifest has no records");
    sets.push_back({path.stem().string(), load_examples(test, {"MOS"})});
  }
  return sets;
}

std::size_t mos_head(const ArchConfig& arch) {
  const auto& names = arch.head_names;
  const auto it = std::find(names.begin(), names.end(), "MOS");
  if (it == names.end()) throw ConfigError("checkpoint has no MOS head");
  return static_cast<std::size_t>(it - names.begin());
}

template <class Real>
std::vector<NamedEval> evaluate_checkpoint(const Checkpoint<Real>& ckpt, const std::vector<LoadedTestset>& sets) {
  const Model<Real> model(ckpt.arch);
  const std::size_t heads = ckpt.arch.head_names.size();
  const std::size_t mos = mos_head(ckpt.arch);
  std::vector<TestsetScores> scores;
  for (const auto& set : sets) {
    const auto raw = predict_all(model, ckpt.best_params(), std::span<const Example>(set.examples));
    TestsetScores s{set.name, {}, {}};
    for (std::size_t i = 0; i < set.examples.size(); ++i) {
      s.predicted_mos.push_back(score_to_mos(raw[i * heads + mos]));
      s.true_mos.push_back(denormalize(set.examples[i].targets[0]));
    }
    scores.push_back(std::move(s));
  }
  return evaluation_table(scores);
}

template <class Real>
int predict_with(const PredictArgs& args, std::ostream& out) {
  const auto ckpt = load_checkpoint<Real>(args.checkpoint);
  const Model<Real> model(ckpt.arch);
  const std::size_t mos = mos_head(ckpt.arch);

  std::vector<Example> examples;
  for (const auto& path : args.features) {
    examples.push_back({path.stem().string(), std::make_shared<const FeatureStack>(load_feature_stack(path)), {}, {}});
  }
  const auto raw = predict_all(model, ckpt.best_params(), std::span<const Example>(examples));
  const std::size_t heads = ckpt.arch.head_names.size();

  std::ostringstream csv;
  csv << "id";
  for (const auto& h : ckpt.arch.head_names) csv << ',' << h;
  csv << ",MOS_1_5\n";
  for (std::size_t i = 0; i < examples.size(); ++i) {
    csv << csv::escape(examples[i].id);
    for (std::size_t h = 0; h < heads; ++h) csv << ',' << format_number(raw[i * heads + h]);
    csv << ',' << format_number(score_to_mos(raw[i * heads + mos])) << '\n';
  }
  out << csv.str();
  if (args.out_dir) write_text(*args.out_dir / "predictions.csv", csv.str());
  return 0;
}

template <class Real>
int evaluate_with(const EvaluateArgs& args, std::ostream& out) {
  const auto ckpt = load_checkpoint<Real>(args.checkpoint);
  const auto rows = evaluate_checkpoint(ckpt, load_testsets(args.test_manifests));
  std::ostringstream csv;
  write_eval_csv(csv, rows);
  out << csv.str();
  if (args.out_dir) write_text(*args.out_dir / "evaluation.csv", csv.str());
  return 0;
}

template <class Real>
int ablate_with(const AblateArgs& args, const RunConfig& cfg, std::ostream& out) {
  const auto records = read_manifests(args.manifests);
  const auto testsets = load_testsets(args.test_manifests);
  const auto tags = train_tags(records);
  if (tags.empty()) throw DataError("no train records to ablate over");

  std::vector<AblationRow> rows;
  for (const auto& selection : enumerate_selections(tags)) {
    const std::string label = selection_label(selection);
    const auto run = train_run<Real>(cfg, records, selection, args.out_dir / "runs" / label);
    rows.push_back({selection, run.train_points, evaluate_checkpoint(run.checkpoint, testsets)});
    out << label << ": " << run.train_points << " train points, " << run.checkpoint.history.size()
        << " epochs\n";
  }
  sort_ablation(rows);
  std::ostringstream csv;
  write_ablation_csv(csv, rows);
  write_text(args.out_dir / "ablation.csv", csv.str());
  out << csv.str();
  return 0;
}

}  // namespace

double score_to_mos(double q) { return denormalize(std::clamp(q, 0.2, 1.0)); }

std::vector<std::vector<std::string>> enumerate_selections(const std::vector<std::string>& tags) {
  if (tags.size() >= 63) throw ConfigError("too many dataset tags to enumerate");
  std::vector<std::vector<std::string>> out;
  const std::uint64_t count = (std::uint64_t{1} << tags.size()) - 1;
  for (std::uint64_t mask = 1; mask <= count; ++mask) {
    std::vector<std::string> sel;
    for (std::size_t i = 0; i < tags.size(); ++i) {
      if (mask & (std::uint64_t{1} << i)) sel.push_back(tags[i]);
    }
    out.push_back(std::move(sel));
  }
  return out;
}

std::string selection_label(const std::vector<std::string>& selection) {
  std::string label;
  for (const auto& tag : selection) {
    if (!label.empty()) label += '+';
    label += tag;
  }
  return label;
}

std::vector<NamedEval> evaluation_table(const std::vector<TestsetScores>& sets) {
  std::vector<NamedEval> rows;
  for (const auto& s : sets) {
    if (s.true_mos.empty()) throw DataError("test set '" + s.name + "' is empty");
    rows.push_back({s.name, evaluate_mos(s.predicted_mos, s.true_mos)});
  }
  return with_average(std::move(rows));
}

void sort_ablation(std::vector<AblationRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const AblationRow& a, const AblationRow& b) {
    if (a.train_points != b.train_points) return a.train_points < b.train_points;
    return selection_label(a.selection) < selection_label(b.selection);
  });
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
  out << "selection,train_points";
  if (!rows.empty()) {
    for (const auto& r : rows.front().results) out << ',' << csv::escape(r.name + "_r") << ',' << csv::escape(r.name + "_e");
  }
  out << '\n';
  for (const auto& row : rows) {
    out << csv::escape(selection_label(row.selection)) << ',' << row.train_points;
    for (const auto& r : row.results) out << ',' << format_number(r.result.r) << ',' << format_number(r.result.e);
    out << '\n';
  }
}

std::vector<NamedColumn> read_score_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open score table " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty score table");
  const auto header = csv::split_line(line);
  std::vector<NamedColumn> cols;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = csv::trim(header[i]);
    if (name == "id") continue;
    cols.push_back({name, {}});
    index.push_back(i);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != header.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields");
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::string text = csv::trim(fields[index[c]]);
      try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        cols[c].second.push_back(v);
      } catch (const std::logic_error&) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": column '" + cols[c].first +
                        "' is not numeric: '" + text + "'");
      }
    }
  }
  return cols;
}

int cmd_train(const TrainArgs& args, std::ostream& out) {
  const RunConfig cfg = resolve_config(args.config, args.overrides);
  const auto records = read_manifests(args.manifests);
  const auto selection = args.datasets.empty() ? train_tags(records) : args.datasets;
  const auto report = [&](const auto& run) {
    const auto& st = run.checkpoint.state;
    out << "trained on " << selection_label(selection) << " (" << run.train_points << " points), "
        << run.checkpoint.history.size() << " epochs, best val loss " << format_number(st.best_val_loss)
        << " at epoch " << st.best_epoch << '\n'
        << "wrote " << (args.out_dir / "checkpoint.wsqc").string() << '\n';
  };
  if (cfg.train.precision == Precision::f32) {
    report(train_run<float>(cfg, records, selection, args.out_dir));
  } else {
    report(train_run<double>(cfg, records, selection, args.out_dir));
  }
  return 0;
}

int cmd_predict(const PredictArgs& args, std::ostream& out) {
  if (args.features.empty()) throw ConfigError("no feature files given");
  return checkpoint_precision(args.checkpoint) == Precision::f32 ? predict_with<float>(args, out)
                                                                 : predict_with<double>(args, out);
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
  return checkpoint_precision(args.checkpoint) == Precision::f32 ? evaluate_with<float>(args, out)
                                                                 : evaluate_with<double>(args, out);
}

int cmd_ablate(const AblateArgs& args, std::ostream& out) {
  const RunConfig cfg = resolve_config(args.config, args.overrides);
  return cfg.train.precision == Precision::f32 ? ablate_with<float>(args, cfg, out)
                                               : ablate_with<double>(args, cfg, out);
}

int cmd_report(const ReportArgs& args, std::ostream& out) {
  const auto records = read_manifests(args.manifests);
  const auto dist = distribution_summary(records);
  std::ostringstream dist_csv;
  write_distribution_csv(dist_csv, dist);
  write_text(args.out_dir / "distribution.csv", dist_csv.str());
  out << "wrote " << (args.out_dir / "distribution.csv").string() << '\n';
  if (args.svg) {
    write_text(args.out_dir / "distribution.svg", distribution_svg(dist));
    out << "wrote " << (args.out_dir / "distribution.svg").string() << '\n';
  }

  if (!args.score_tables.empty()) {
    std::vector<NamedColumn> columns;
    for (const auto& table : args.score_tables) {
      auto cols = read_score_table(table);
      columns.insert(columns.end(), cols.begin(), cols.end());
    }
    const auto matrix = correlation_matrix(columns);
    std::ostringstream corr_csv;
    write_correlation_csv(corr_csv, matrix);
    write_text(args.out_dir / "correlation.csv", corr_csv.str());
    out << "wrote " << (args.out_dir / "correlation.csv").string() << '\n';
    if (args.svg) {
      write_text(args.out_dir / "correlation.svg", correlation_svg(matrix));
      out << "wrote " << (args.out_dir / "correlation.svg").string() << '\n';
    }
  }
  return 0;
}

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  SynthDataset ds = synth_dataset(args.spec);
  const fs::path manifest = write_synth_dataset(ds, args.out_dir, args.manifest_name);
  out << "wrote " << ds.records.size() << " records to " << manifest.string() << '\n';
  return 0;
}

}  // namespace whisqa::cli
