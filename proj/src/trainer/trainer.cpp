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
#include <sstream>

#include <omp.h>

#include "whisqa/errors.hpp"
#include "whisqa/objectives.hpp"
#include "whisqa/trainer.hpp"

namespace whisqa {

namespace {

void check_examples(const std::vector<Example>& examples, const ArchConfig& arch, const char* what) {
  if (examples.empty()) throw DataError(std::string("trainer: no ") + what + " examples");
  for (const Example& ex : examples) {
    if (!ex.features || !(ex.features->dims() == arch.stack_dims())) {
      throw ShapeError(std::string("trainer: ") + what + " example '" + ex.id + "' does not match the model input shape");
    }
    if (ex.targets.size() != arch.head_names.size()) {
      throw ShapeError(std::string("trainer: ") + what + " example '" + ex.id + "' has " +
                       std::to_string(ex.targets.size()) + " targets for " + std::to_string(arch.head_names.size()) +
                       " heads");
    }
  }
}

std::size_t chunk_size() { return static_cast<std::size_t>(std::max(1, omp_get_max_threads())); }

}  // namespace

template <class Real>
Trainer<Real>::Trainer(ArchConfig arch, TrainConfig cfg, const std::vector<Example>& train,
                       const std::vector<Example>& val)
    : model_(std::move(arch)), cfg_(cfg), train_(train), val_(val) {
  cfg_.validate();
  check_examples(train_, model_.config(), "training");
  check_examples(val_, model_.config(), "validation");
  for (const Example& ex : train_) ++sizes_[ex.dataset];
}

template <class Real>
Checkpoint<Real> Trainer<Real>::start() const {
  Checkpoint<Real> c;
  c.arch = model_.config();
  c.train = cfg_;
  c.params = model_.init_params(cfg_.seed);
  c.state.plateau.lr = cfg_.lr_init;
  return c;
}

template <class Real>
double Trainer<Real>::train_batch(const ModelParams<Real>& params, std::span<const std::size_t> batch,
                                  std::vector<Real>& grads) const {
  const std::size_t heads = model_.config().head_names.size();
  const std::size_t n = batch.size();
  const auto count = static_cast<Real>(n * heads);

  std::vector<Real> weights;
  if (cfg_.loss == LossKind::bias_aware) {
    std::vector<std::string> tags;
    tags.reserve(n);
    for (std::size_t idx : batch) tags.push_back(train_[idx].dataset);
    weights = bias_aware_weights<Real>(tags, sizes_);
  } else {
    weights.assign(n, Real(1));
  }

  std::fill(grads.begin(), grads.end(), Real(0));
  const std::size_t chunk = chunk_size();
  std::vector<std::vector<Real>> sample_grads(std::min(chunk, n), std::vector<Real>(grads.size()));
  std::vector<Real> shares(std::min(chunk, n));
  Real total = 0;

  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t len = std::min(chunk, n - start);
    std::vector<std::string> errors(len);
#pragma omp parallel for schedule(static, 1)
    for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(len); ++jj) {
      const auto j = static_cast<std::size_t>(jj);
      try {
        const Example& ex = train_[batch[start + j]];
        typename Model<Real>::Activations cache;
        const std::vector<Real> scores = model_.forward(*ex.features, params, cache);
        std::vector<Real> target(ex.targets.begin(), ex.targets.end());
        std::vector<Real> dscores(heads);
        shares[j] = weighted_squared_error<Real>(scores, target, weights[start + j], count, dscores);
        std::fill(sample_grads[j].begin(), sample_grads[j].end(), Real(0));
        model_.backward(cache, params, dscores, sample_grads[j]);
      } catch (const std::exception& e) {
        errors[j] = e.what();
      }
    }
    for (std::size_t j = 0; j < len; ++j) {
      if (!errors[j].empty()) throw Error("trainer: " + errors[j]);
      total += shares[j];
      for (std::size_t p = 0; p < grads.size(); ++p) grads[p] += sample_grads[j][p];
    }
  }
  return static_cast<double>(total / count);
}

template <class Real>
double Trainer<Real>::validation_loss(const ModelParams<Real>& params) const {
  const std::size_t heads = model_.config().head_names.size();
  const std::vector<double> preds = predict_all(model_, params, val_);
  std::vector<Real> p(preds.begin(), preds.end());
  std::vector<Real> t;
  t.reserve(p.size());
  for (const Example& ex : val_) t.insert(t.end(), ex.targets.begin(), ex.targets.end());
  return static_cast<double>(mse_loss<Real>(p, t, heads).value);
}

template <class Real>
void Trainer<Real>::run(Checkpoint<Real>& ckpt, const EpochCallback& on_epoch) const {
  if (!(ckpt.arch == model_.config())) throw ConfigError("trainer: checkpoint architecture differs from trainer");
  if (ckpt.params.values.size() != model_.param_count()) throw ShapeError("trainer: checkpoint parameter count mismatch");
  step_lrs_.clear();
  TrainState<Real>& st = ckpt.state;
  const AdamConfig adam{cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_eps};
  std::vector<Real> grads(model_.param_count());

  while (!st.stopped && st.epoch < cfg_.max_epochs) {
    const auto batches = make_batches(train_.size(), cfg_.batch, cfg_.seed, st.epoch);
    double loss_sum = 0.0;
    double lr = st.lr();
    for (std::size_t b = 0; b < batches.size(); ++b) {
      lr = st.epoch == 0 ? warmup_lr(b, batches.size(), cfg_.lr_init) : st.lr();
      const double loss = train_batch(ckpt.params, batches[b], grads);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite training loss at epoch " << st.epoch << ", batch " << b << ", lr " << lr;
        throw NumericError(msg.str());
      }
      adam_update<Real>(ckpt.params.values, grads, st.adam, lr, adam);
      ++st.global_step;
      step_lrs_.push_back(lr);
      loss_sum += loss * static_cast<double>(batches[b].size());
    }

    const double val = validation_loss(ckpt.params);
    if (!std::isfinite(val)) {
      std::ostringstream msg;
      msg << "non-finite validation loss after epoch " << st.epoch << ", lr " << lr;
      throw NumericError(msg.str());
    }
    const bool improved = val < st.best_val_loss;
    if (improved) {
      st.best_val_loss = val;
      st.best_epoch = st.epoch;
      st.best_params = ckpt.params;
    }
    plateau_step(st.plateau, val, cfg_.plateau_factor, cfg_.plateau_patience);
    const bool stop = early_stop(st.early, val, cfg_.early_stop_patience);

    ckpt.history.push_back({st.epoch, lr, loss_sum / static_cast<double>(train_.size()), val, improved});
    ++st.epoch;
    st.stopped = stop;
    if (on_epoch) on_epoch(ckpt);
  }
}

template <class Real>
Checkpoint<Real> train(const ArchConfig& arch, const TrainConfig& cfg, const std::vector<Example>& train_set,
                       const std::vector<Example>& val_set) {
  Trainer<Real> trainer(arch, cfg, train_set, val_set);
  Checkpoint<Real> c = trainer.start();
  trainer.run(c);
  return c;
}

template <class Real>
std::vector<double> predict_all(const Model<Real>& model, const ModelParams<Real>& params,
                                std::span<const Example> examples) {
  const std::size_t heads = model.config().head_names.size();
  std::vector<double> out(examples.size() * heads);
  std::vector<std::string> errors(examples.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(examples.size()); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      typename Model<Real>::Activations cache;
      const std::vector<Real> s = model.forward(*examples[i].features, params, cache);
      std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(i * heads));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw Error("predict '" + examples[i].id + "': " + errors[i]);
  }
  return out;
}

template class Trainer<float>;
template class Trainer<double>;
template Checkpoint<float> train<float>(const ArchConfig&, const TrainConfig&, const std::vector<Example>&,
                                        const std::vector<Example>&);
template Checkpoint<double> train<double>(const ArchConfig&, const TrainConfig&, const std::vector<Example>&,
                                          const std::vector<Example>&);
template std::vector<double> predict_all<float>(const Model<float>&, const ModelParams<float>&,
                                                std::span<const Example>);
template std::vector<double> predict_all<double>(const Model<double>&, const ModelParams<double>&,
                                                 std::span<const Example>);

}  // namespace whisqa
