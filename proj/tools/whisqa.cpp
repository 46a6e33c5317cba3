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

#include <CLI11.hpp>

#include <iostream>

#include "whisqa/commands.hpp"

namespace {

using namespace whisqa::cli;

struct RunFlags {
  std::string config;
  std::uint64_t seed = 0;
  std::string loss;
  std::string heads;
  std::string precision;
  std::size_t max_epochs = 0;
  std::size_t batch = 0;
  double lr = 0.0;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "INI file with [train] and [arch] sections")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--loss", f.loss, "Training loss")->check(CLI::IsMember({"mse", "bias_aware"}));
  cmd->add_option("--heads", f.heads, "Output heads")->check(CLI::IsMember({"single", "multi"}));
  cmd->add_option("--precision", f.precision, "Parameter precision")->check(CLI::IsMember({"f64", "f32"}));
  cmd->add_option("--max-epochs", f.max_epochs, "Epoch limit")->check(CLI::PositiveNumber);
  cmd->add_option("--batch", f.batch, "Batch size")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", f.lr, "Initial learning rate")->check(CLI::PositiveNumber);
}

Overrides to_overrides(const CLI::App* cmd, const RunFlags& f) {
  Overrides o;
  if (cmd->count("--seed")) o.seed = f.seed;
  if (cmd->count("--loss")) o.loss = f.loss;
  if (cmd->count("--heads")) o.heads = f.heads;
  if (cmd->count("--precision")) o.precision = f.precision;
  if (cmd->count("--max-epochs")) o.max_epochs = f.max_epochs;
  if (cmd->count("--batch")) o.batch = f.batch;
  if (cmd->count("--lr")) o.lr = f.lr;
  return o;
}

std::optional<std::filesystem::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"whisqa: non-intrusive speech quality prediction from encoder feature stacks"};
  app.require_subcommand(1);

  TrainArgs train_args;
  RunFlags train_flags;
  std::vector<std::string> train_manifests;
  auto* train = app.add_subcommand("train", "Train a model on one or more manifests");
  train->add_option("manifests", train_manifests, "Manifest CSV files")->required()->check(CLI::ExistingFile);
  train->add_option("--datasets", train_args.datasets, "Dataset tags to train on (default: all)");
  train->add_option("--out", train_args.out_dir, "Output directory");
  add_run_flags(train, train_flags);

  PredictArgs predict_args;
  std::string predict_ckpt, predict_out;
  std::vector<std::string> predict_files;
  auto* predict = app.add_subcommand("predict", "Score feature files with a trained checkpoint");
  predict->add_option("--checkpoint", predict_ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  predict->add_option("features", predict_files, "WSQF feature files")->required()->check(CLI::ExistingFile);
  predict->add_option("--out", predict_out, "Also write predictions.csv here");

  EvaluateArgs eval_args;
  std::string eval_ckpt, eval_out;
  std::vector<std::string> eval_tests;
  auto* evaluate = app.add_subcommand("evaluate", "Spearman r and MSE e per test manifest");
  evaluate->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("tests", eval_tests, "Test manifests")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", eval_out, "Also write evaluation.csv here");

  AblateArgs ablate_args;
  RunFlags ablate_flags;
  std::vector<std::string> ablate_manifests, ablate_tests;
  auto* ablate = app.add_subcommand("ablate", "Train on every nonempty combination of dataset tags");
  ablate->add_option("manifests", ablate_manifests, "Training manifests")->required()->check(CLI::ExistingFile);
  ablate->add_option("--test", ablate_tests, "Test manifests")->required()->check(CLI::ExistingFile);
  ablate->add_option("--out", ablate_args.out_dir, "Output directory");
  add_run_flags(ablate, ablate_flags);

  ReportArgs report_args;
  std::vector<std::string> report_manifests, report_scores;
  auto* report = app.add_subcommand("report", "Label distribution and score correlation tables");
  report->add_option("manifests", report_manifests, "Manifests")->required()->check(CLI::ExistingFile);
  report->add_option("--scores", report_scores, "Score tables (CSV, numeric columns)")->check(CLI::ExistingFile);
  report->add_option("--out", report_args.out_dir, "Output directory");
  report->add_flag("--svg", report_args.svg, "Also render SVG figures");

  SynthArgs synth_args;
  std::string synth_subset = "train";
  auto* synth = app.add_subcommand("synth", "Write a synthetic rated feature corpus");
  synth->add_option("--out", synth_args.out_dir, "Output directory")->required();
  synth->add_option("--manifest", synth_args.manifest_name, "Manifest file name");
  synth->add_option("--n", synth_args.spec.n, "Number of records")->check(CLI::PositiveNumber);
  synth->add_option("--layers", synth_args.spec.dims.layers, "Stack layers")->check(CLI::PositiveNumber);
  synth->add_option("--frames", synth_args.spec.dims.frames, "Stack frames")->check(CLI::PositiveNumber);
  synth->add_option("--features", synth_args.spec.dims.features, "Feature width")->check(CLI::PositiveNumber);
  synth->add_option("--noise", synth_args.spec.noise_sd, "Label noise standard deviation")->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", synth_args.spec.seed, "Sample seed");
  synth->add_option("--pattern-seed", synth_args.spec.pattern_seed, "Seed of the shared quality directions");
  synth->add_option("--dataset", synth_args.spec.dataset, "Dataset tag");
  synth->add_option("--subset", synth_subset, "Subset")->check(CLI::IsMember({"train", "val", "test"}));
  synth->add_option("--id-prefix", synth_args.spec.id_prefix, "Record id prefix");

  CLI11_PARSE(app, argc, argv);

  const auto paths = [](const std::vector<std::string>& v) {
    return std::vector<std::filesystem::path>(v.begin(), v.end());
  };

  return run_guarded(std::cerr, [&]() -> int {
    if (*train) {
      train_args.manifests = paths(train_manifests);
      train_args.config = optional_path(train_flags.config);
      train_args.overrides = to_overrides(train, train_flags);
      return cmd_train(train_args, std::cout);
    }
    if (*predict) {
      predict_args.checkpoint = predict_ckpt;
      predict_args.features = paths(predict_files);
      predict_args.out_dir = optional_path(predict_out);
      return cmd_predict(predict_args, std::cout);
    }
    if (*evaluate) {
      eval_args.checkpoint = eval_ckpt;
      eval_args.test_manifests = paths(eval_tests);
      eval_args.out_dir = optional_path(eval_out);
      return cmd_evaluate(eval_args, std::cout);
    }
    if (*ablate) {
      ablate_args.manifests = paths(ablate_manifests);
      ablate_args.test_manifests = paths(ablate_tests);
      ablate_args.config = optional_path(ablate_flags.config);
      ablate_args.overrides = to_overrides(ablate, ablate_flags);
      return cmd_ablate(ablate_args, std::cout);
    }
    if (*report) {
      report_args.manifests = paths(report_manifests);
      report_args.score_tables = paths(report_scores);
      return cmd_report(report_args, std::cout);
    }
    synth_args.spec.subset = whisqa::parse_subset(synth_subset);
    return cmd_synth(synth_args, std::cout);
  });
}
