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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "whisqa/data.hpp"
#include "whisqa/model.hpp"

namespace whisqa {

enum class LossKind { mse, bias_aware };
enum class Precision { f64, f32 };

LossKind parse_loss(const std::string& s);
const char* to_string(LossKind k);
Precision parse_precision(const std::string& s);
const char* to_string(Precision p);

struct TrainConfig {
  double lr_init = 1e-5;
  double plateau_factor = 0.1;
  std::size_t plateau_patience = 15;
  std::size_t early_stop_patience = 20;
  std::size_t batch = 128;
  std::size_t max_epochs = 200;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::bias_aware;
  Precision precision = Precision::f64;
  double val_fraction = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  /// Throws ConfigError when any invariant is broken.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// Schedules ----------------------------------------------------------------

/// Learning rate of update `step` (0-based, counted from the start of
/// training): lr_init * (step + 1) / steps_per_epoch during the first epoch,
/// lr_init afterwards. Throws RangeError when steps_per_epoch == 0.
double warmup_lr(std::size_t step, std::size_t steps_per_epoch, double lr_init);

/// Reduce-on-plateau state. `wait` counts epochs since the last strict
/// improvement of `best`, and resets when the rate is decayed.
struct PlateauState {
  double best = std::numeric_limits<double>::infinity();
  std::size_t wait = 0;
  double lr = 0.0;
  std::size_t decays = 0;

  bool operator==(const PlateauState&) const = default;
};

/// Feeds one epoch's validation loss. Returns true when lr was multiplied
/// by `factor` on this call.
bool plateau_step(PlateauState& state, double val_loss, double factor, std::size_t patience);

struct EarlyStopState {
  double best = std::numeric_limits<double>::infinity();
  std::size_t wait = 0;

  bool operator==(const EarlyStopState&) const = default;
};

/// Feeds one epoch's validation loss. Returns true once `patience`
/// consecutive epochs have passed without a strict improvement.
bool early_stop(EarlyStopState& state, double val_loss, std::size_t patience);

// Adam ---------------------------------------------------------------------

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class Real>
struct AdamState {
  std::vector<Real> m;
  std::vector<Real> v;
  std::uint64_t step = 0;

  bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam step. Moments are allocated on first use.
/// Throws ShapeError when params, grads and moments disagree in size.
template <class Real>
void adam_update(std::span<Real> params, std::span<const Real> grads, AdamState<Real>& state, double lr,
                 const AdamConfig& cfg = {});

// Training -----------------------------------------------------------------

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;  // rate of the epoch's last update
  double train_loss = 0.0;
  double val_loss = 0.0;
  bool is_best = false;

  bool operator==(const EpochRecord&) const = default;
};

/// CSV with header `epoch,lr,train_loss,val_loss,is_best`.
void write_train_report(std::ostream& out, std::span<const EpochRecord> history);

template <class Real>
struct TrainState {
  std::size_t epoch = 0;  // completed epochs
  std::uint64_t global_step = 0;
  AdamState<Real> adam;
  PlateauState plateau;
  EarlyStopState early;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  ModelParams<Real> best_params;
  bool stopped = false;

  /// Rate for updates after the warmup epoch.
  double lr() const { return plateau.lr; }
  bool operator==(const TrainState&) const = default;
};

/// Everything needed to predict with, or to resume, a training run. Batch
/// order is a function of (seed, epoch), so no RNG stream is stored.
template <class Real>
struct Checkpoint {
  ArchConfig arch;
  TrainConfig train;
  ModelParams<Real> params;  // latest
  TrainState<Real> state;
  std::vector<EpochRecord> history;

  /// Best-validation snapshot, or the latest parameters before any epoch.
  const ModelParams<Real>& best_params() const {
    return state.best_params.values.empty() ? params : state.best_params;
  }
  bool operator==(const Checkpoint&) const = default;
};

/// Runs the training recipe: a linear warmup epoch, Adam updates on shuffled
/// batches, reduce-on-plateau and early stopping driven by the plain MSE on
/// the validation examples, and best-epoch snapshots.
///
/// Per-sample gradients are computed in parallel and summed in sample order,
/// so results do not depend on the thread count.
template <class Real>
class Trainer {
 public:
  using EpochCallback = std::function<void(const Checkpoint<Real>&)>;

  /// Throws DataError when either example set is empty, ShapeError when an
  /// example does not fit `arch`.
  Trainer(ArchConfig arch, TrainConfig cfg, const std::vector<Example>& train, const std::vector<Example>& val);

  const Model<Real>& model() const { return model_; }

  /// Fresh parameters from cfg.seed and zeroed optimizer state.
  Checkpoint<Real> start() const;

  /// Continues `ckpt` until early stopping or cfg.max_epochs completed
  /// epochs. Throws NumericError on a non-finite loss.
  void run(Checkpoint<Real>& ckpt, const EpochCallback& on_epoch = {}) const;

  /// Mean squared error over examples and heads, on the normalized scale.
  double validation_loss(const ModelParams<Real>& params) const;

  /// Learning rate of every update of the last run() call.
  const std::vector<double>& step_lrs() const { return step_lrs_; }

 private:
  double train_batch(const ModelParams<Real>& params, std::span<const std::size_t> batch,
                     std::vector<Real>& grads) const;

  Model<Real> model_;
  TrainConfig cfg_;
  const std::vector<Example>& train_;
  const std::vector<Example>& val_;
  DatasetSizes sizes_;
  mutable std::vector<double> step_lrs_;
};

/// Convenience: start() then run().
template <class Real>
Checkpoint<Real> train(const ArchConfig& arch, const TrainConfig& cfg, const std::vector<Example>& train_set,
                       const std::vector<Example>& val_set);

/// Head scores for each example, row-major [n, heads], computed in parallel.
template <class Real>
std::vector<double> predict_all(const Model<Real>& model, const ModelParams<Real>& params,
                                std::span<const Example> examples);

// Checkpoint container ("WSQC") ----------------------------------------------

inline constexpr char kCheckpointMagic[4] = {'W', 'S', 'Q', 'C'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

template <class Real>
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint<Real>& c);

/// Throws BadMagicError, VersionMismatchError, TruncatedError (length),
/// ChecksumError, or FormatError when a section is missing or malformed.
template <class Real>
Checkpoint<Real> decode_checkpoint(std::span<const std::uint8_t> bytes);

template <class Real>
void save_checkpoint(const Checkpoint<Real>& c, const std::filesystem::path& path);
template <class Real>
Checkpoint<Real> load_checkpoint(const std::filesystem::path& path);

/// Parameter precision recorded in a checkpoint file.
Precision checkpoint_precision(const std::filesystem::path& path);

}  // namespace whisqa
