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
#include <ostream>

#include "whisqa/errors.hpp"
#include "whisqa/trainer.hpp"

namespace whisqa {

LossKind parse_loss(const std::string& s) {
  if (s == "mse") return LossKind::mse;
  if (s == "bias_aware") return LossKind::bias_aware;
  throw ConfigError("unknown loss '" + s + "' (expected mse or bias_aware)");
}

const char* to_string(LossKind k) { return k == LossKind::mse ? "mse" : "bias_aware"; }

Precision parse_precision(const std::string& s) {
  if (s == "f64" || s == "double") return Precision::f64;
  if (s == "f32" || s == "float") return Precision::f32;
  throw ConfigError("unknown precision '" + s + "' (expected f64 or f32)");
}

const char* to_string(Precision p) { return p == Precision::f64 ? "f64" : "f32"; }

void TrainConfig::validate() const {
  if (!(lr_init > 0.0) || !std::isfinite(lr_init)) throw ConfigError("train: lr_init must be positive");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) throw ConfigError("train: plateau_factor must be in (0, 1)");
  if (plateau_patience == 0 || early_stop_patience == 0) throw ConfigError("train: patience values must be >= 1");
  if (batch == 0) throw ConfigError("train: batch must be >= 1");
  if (max_epochs == 0) throw ConfigError("train: max_epochs must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("train: val_fraction must be in (0, 1)");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_eps > 0.0)) {
    throw ConfigError("train: Adam betas must be in [0, 1) and eps positive");
  }
}

double warmup_lr(std::size_t step, std::size_t steps_per_epoch, double lr_init) {
  if (steps_per_epoch == 0) throw RangeError("warmup_lr: steps_per_epoch must be positive");
  if (step + 1 >= steps_per_epoch) return lr_init;
  return lr_init * static_cast<double>(step + 1) / static_cast<double>(steps_per_epoch);
}

bool plateau_step(PlateauState& state, double val_loss, double factor, std::size_t patience) {
  if (val_loss < state.best) {
    state.best = val_loss;
    state.wait = 0;
    return false;
  }
  if (++state.wait < patience) return false;
  state.lr *= factor;
  ++state.decays;
  state.wait = 0;
  return true;
}

bool early_stop(EarlyStopState& state, double val_loss, std::size_t patience) {
  if (val_loss < state.best) {
    state.best = val_loss;
    state.wait = 0;
    return false;
  }
  if (state.wait < patience) ++state.wait;
  return state.wait >= patience;
}

void write_train_report(std::ostream& out, std::span<const EpochRecord> history) {
  out << "epoch,lr,train_loss,val_loss,is_best\n";
  for (const EpochRecord& r : history) {
    out << r.epoch << ',' << format_number(r.lr) << ',' << format_number(r.train_loss) << ','
        << format_number(r.val_loss) << ',' << (r.is_best ? 1 : 0) << '\n';
  }
}

}  // namespace whisqa
