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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "whisqa/data.hpp"
#include "whisqa/model.hpp"
#include "whisqa/objectives.hpp"
#include "whisqa/trainer.hpp"

namespace whisqa::cli {

/// Settings shared by the training commands. Built from defaults, then an
/// optional INI-style file with [train] and [arch] sections, then flags.
struct RunConfig {
  ArchConfig arch;
  TrainConfig train;
};

/// Applies `key = value` lines from [train] / [arch] sections. Unknown
/// sections or keys and unparsable values raise ConfigError.
void apply_config(RunConfig& cfg, std::istream& in, const std::string& source);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Flag values that override the file. Unset fields leave it alone.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> loss;
  std::optional<std::string> heads;  // single | multi
  std::optional<std::string> precision;
  std::optional<std::size_t> max_epochs;
  std::optional<std::size_t> batch;
  std::optional<double> lr;
};

RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const Overrides& flags);

/// "single" -> [MOS]; "multi" -> [MOS, NOI, COL, DIS, LOUD].
std::vector<std::string> heads_for(const std::string& mode);

struct TrainArgs {
  std::vector<std::filesystem::path> manifests;
  std::vector<std::string> datasets;  // empty: every tag with train records
  std::optional<std::filesystem::path> config;
  Overrides overrides;
  std::filesystem::path out_dir = ".";
};

struct PredictArgs {
  std::filesystem::path checkpoint;
  std::vector<std::filesystem::path> features;
  std::optional<std::filesystem::path> out_dir;
};

struct EvaluateArgs {
  std::filesystem::path checkpoint;
  std::vector<std::filesystem::path> test_manifests;
  std::optional<std::filesystem::path> out_dir;
};

struct AblateArgs {
  std::vector<std::filesystem::path> manifests;
  std::vector<std::filesystem::path> test_manifests;
  std::optional<std::filesystem::path> config;
  Overrides overrides;
  std::filesystem::path out_dir = ".";
};

struct ReportArgs {
  std::vector<std::filesystem::path> manifests;
  std::vector<std::filesystem::path> score_tables;
  std::filesystem::path out_dir = ".";
  bool svg = false;
};

struct SynthArgs {
  SynthSpec spec;
  std::filesystem::path out_dir = ".";
  std::string manifest_name = "manifest.csv";
};

// Each command returns 0 on success. Errors propagate as exceptions;
// run_guarded turns them into a message on `err` and exit code 1.
int cmd_train(const TrainArgs& args, std::ostream& out);
int cmd_predict(const PredictArgs& args, std::ostream& out);
int cmd_evaluate(const EvaluateArgs& args, std::ostream& out);
int cmd_ablate(const AblateArgs& args, std::ostream& out);
int cmd_report(const ReportArgs& args, std::ostream& out);
int cmd_synth(const SynthArgs& args, std::ostream& out);

template <class Fn>
int run_guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

// Pieces of the commands exposed for direct testing ------------------------

/// Every nonempty subset of `tags`, tags kept in input order; 2^k - 1 entries.
std::vector<std::vector<std::string>> enumerate_selections(const std::vector<std::string>& tags);

/// "NISQA+TENCENT"
std::string selection_label(const std::vector<std::string>& selection);

struct TestsetScores {
  std::string name;
  std::vector<double> predicted_mos;  // 1-5
  std::vector<double> true_mos;       // 1-5
};

/// One EvalResult per test set plus the AVERAGE row. Throws DataError for an
/// empty test set.
std::vector<NamedEval> evaluation_table(const std::vector<TestsetScores>& sets);

struct AblationRow {
  std::vector<std::string> selection;
  std::size_t train_points = 0;
  std::vector<NamedEval> results;  // per test set, then AVERAGE
};

/// Ascending train_points, ties broken by selection label.
void sort_ablation(std::vector<AblationRow>& rows);

/// Header: selection,train_points,<set>_r,<set>_e,...,AVERAGE_r,AVERAGE_e
void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);

/// Model score in (0, 1) mapped onto 1-5, clamped to the label range first.
double score_to_mos(double q);

/// Numeric columns of a CSV score table; a column named `id` is skipped.
std::vector<NamedColumn> read_score_table(const std::filesystem::path& path);

std::string distribution_svg(const std::vector<DistributionRow>& rows);
std::string correlation_svg(const CorrelationMatrix& m);

}  // namespace whisqa::cli
