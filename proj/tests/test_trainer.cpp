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

#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <sstream>

#include "gradcheck.hpp"
#include "test_util.hpp"
#include "whisqa/binary_io.hpp"
#include "whisqa/errors.hpp"
#include "whisqa/trainer.hpp"

namespace whisqa {
namespace {

// Schedules --------------------------------------------------------------------------

TEST(Warmup, RampValues) {
  EXPECT_DOUBLE_EQ(warmup_lr(0, 100, 1e-5), 1e-7);
  EXPECT_DOUBLE_EQ(warmup_lr(49, 100, 1e-5), 5e-6);
  EXPECT_EQ(warmup_lr(99, 100, 1e-5), 1e-5);
  EXPECT_EQ(warmup_lr(100, 100, 1e-5), 1e-5);
  EXPECT_EQ(warmup_lr(12345, 100, 1e-5), 1e-5);
  EXPECT_THROW(warmup_lr(0, 0, 1e-5), RangeError);
}

TEST(Warmup, LastStepExactForManyEpochLengths) {
  for (std::size_t n = 1; n < 2000; ++n) ASSERT_EQ(warmup_lr(n - 1, n, 1e-5), 1e-5) << n;
}

TEST(Warmup, NondecreasingWithinEpoch) {
  for (std::size_t s = 1; s < 87; ++s) EXPECT_LE(warmup_lr(s - 1, 87, 1e-5), warmup_lr(s, 87, 1e-5));
}

TEST(Plateau, FirstDecayAtFifteenthNonImprovingEpoch) {
  PlateauState st{.lr = 1e-5};
  EXPECT_FALSE(plateau_step(st, 1.0, 0.1, 15));
  for (int k = 1; k <= 16; ++k) {
    const bool decayed = plateau_step(st, 1.2, 0.1, 15);
    EXPECT_EQ(decayed, k == 15) << k;
    EXPECT_EQ(st.lr, k < 15 ? 1e-5 : 1e-5 * 0.1) << k;
  }
  EXPECT_DOUBLE_EQ(st.lr, 1e-6);
}

TEST(Plateau, TwoPlateausGiveTwoDecays) {
  PlateauState st{.lr = 1e-5};
  plateau_step(st, 0.5, 0.1, 15);
  std::vector<int> decay_epochs;
  for (int k = 1; k <= 30; ++k) {
    if (plateau_step(st, 0.7, 0.1, 15)) decay_epochs.push_back(k);
  }
  EXPECT_EQ(decay_epochs, (std::vector<int>{15, 30}));
  EXPECT_DOUBLE_EQ(st.lr, 1e-7);
  EXPECT_EQ(st.decays, 2u);
}

TEST(Plateau, ImprovingNeverDecays) {
  PlateauState st{.lr = 1e-5};
  for (int k = 0; k < 200; ++k) EXPECT_FALSE(plateau_step(st, 10.0 - 0.01 * k, 0.1, 15));
  EXPECT_EQ(st.lr, 1e-5);
}

TEST(Plateau, EqualLossIsNotImprovement) {
  PlateauState st{.lr = 1.0};
  plateau_step(st, 0.5, 0.1, 2);
  EXPECT_FALSE(plateau_step(st, 0.5, 0.1, 2));
  EXPECT_TRUE(plateau_step(st, 0.5, 0.1, 2));
}

TEST(EarlyStop, StopsAtTwentiethNonImprovingEpoch) {
  EarlyStopState st;
  EXPECT_FALSE(early_stop(st, 1.0, 20));
  for (int k = 1; k <= 20; ++k) EXPECT_EQ(early_stop(st, 1.1, 20), k == 20) << k;
}

TEST(EarlyStop, DecreasingNeverStops) {
  EarlyStopState st;
  for (int k = 0; k < 500; ++k) EXPECT_FALSE(early_stop(st, 1.0 / (k + 1), 20));
}

TEST(EarlyStop, ImprovementResetsStreak) {
  EarlyStopState st;
  early_stop(st, 1.0, 20);
  for (int k = 1; k <= 18; ++k) EXPECT_FALSE(early_stop(st, 1.5, 20));
  EXPECT_FALSE(early_stop(st, 0.9, 20));  // 19th epoch of the streak improves
  for (int k = 1; k <= 19; ++k) EXPECT_FALSE(early_stop(st, 1.5, 20));
  EXPECT_TRUE(early_stop(st, 1.5, 20));
}

TEST(Schedules, CountersNeverExceedPatience) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    PlateauState p{.lr = 1.0};
    EarlyStopState e;
    const std::size_t pp = 1 + rng.below(10), ep = 1 + rng.below(10);
    double prev_best = INFINITY;
    for (int k = 0; k < 200; ++k) {
      const double v = rng.uniform(0, 1);
      plateau_step(p, v, 0.5, pp);
      early_stop(e, v, ep);
      EXPECT_LT(p.wait, pp);
      EXPECT_LE(e.wait, ep);
      EXPECT_LE(e.best, prev_best);
      prev_best = e.best;
      EXPECT_GT(p.lr, 0.0);
    }
  }
}

TEST(TrainConfigTest, DefaultsAndValidation) {
  TrainConfig c;
  EXPECT_EQ(c.lr_init, 1e-5);
  EXPECT_EQ(c.plateau_factor, 0.1);
  EXPECT_EQ(c.plateau_patience, 15u);
  EXPECT_EQ(c.early_stop_patience, 20u);
  EXPECT_EQ(c.batch, 128u);
  EXPECT_EQ(c.loss, LossKind::bias_aware);
  EXPECT_EQ(c.precision, Precision::f64);
  EXPECT_NO_THROW(c.validate());
  for (double f : {0.0, 1.0, 1.5}) {
    TrainConfig bad;
    bad.plateau_factor = f;
    EXPECT_THROW(bad.validate(), ConfigError);
  }
  TrainConfig bad;
  bad.early_stop_patience = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.plateau_patience = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_EQ(parse_loss("mse"), LossKind::mse);
  EXPECT_THROW(parse_loss("l1"), ConfigError);
}

// Adam ---------------------------------------------------------------------------------

TEST(Adam, ZeroGradientsLeaveParamsUnchanged) {
  std::vector<double> p = {0.5, -2.0, 3.0};
  const auto before = p;
  AdamState<double> st;
  const std::vector<double> g(3, 0.0);
  for (int i = 0; i < 50; ++i) adam_update<double>(p, g, st, 0.1);
  EXPECT_EQ(p, before);
}

TEST(Adam, FirstStepMovesByLrTimesSign) {
  std::vector<double> p = {1.0, 1.0, 1.0};
  const std::vector<double> g = {0.3, -5.0, 1e-3};
  AdamState<double> st;
  adam_update<double>(p, g, st, 1e-3);
  for (std::size_t i = 0; i < 3; ++i) {
    const double expected = -1e-3 * std::abs(g[i]) / (std::abs(g[i]) + 1e-8) * (g[i] > 0 ? 1 : -1);
    EXPECT_NEAR(p[i] - 1.0, expected, 1e-15);
    EXPECT_NEAR(std::abs(p[i] - 1.0), 1e-3, 1e-7);
  }
}

TEST(Adam, QuadraticMatchesRecursionAndConverges) {
  // Oracle: the textbook recursion on f(x) = x^2.
  double x = 1.0, m = 0, v = 0;
  std::vector<double> p = {1.0};
  AdamState<double> st;
  const double lr = 0.01;
  for (int t = 1; t <= 2000; ++t) {
    const double g = 2 * x;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mhat = m / (1 - std::pow(0.9, t));
    const double vhat = v / (1 - std::pow(0.999, t));
    x -= lr * mhat / (std::sqrt(vhat) + 1e-8);
    adam_update<double>(p, std::vector<double>{2 * p[0]}, st, lr);
    ASSERT_NEAR(p[0], x, 1e-12) << t;
  }
  EXPECT_LT(std::abs(p[0]), 5 * lr);
}

TEST(Adam, ShapeMismatch) {
  std::vector<double> p(3);
  AdamState<double> st;
  EXPECT_THROW(adam_update<double>(p, std::vector<double>(2), st, 0.1), ShapeError);
  adam_update<double>(p, std::vector<double>(3), st, 0.1);
  std::vector<double> q(4);
  EXPECT_THROW(adam_update<double>(q, std::vector<double>(4), st, 0.1), ShapeError);
}

// Training loop ---------------------------------------------------------------------------

struct Fixture {
  ArchConfig arch = testing::tiny_arch();
  TrainConfig cfg;
  std::vector<Example> train;
  std::vector<Example> val;

  explicit Fixture(std::size_t n = 48, std::vector<std::string> heads = ArchConfig::single_head_names()) {
    arch.head_names = heads;
    cfg.lr_init = 3e-3;
    cfg.batch = 8;
    cfg.max_epochs = 4;
    cfg.seed = 11;
    SynthSpec spec;
    spec.n = n;
    spec.dims = arch.stack_dims();
    spec.noise_sd = 0.02;
    train = synth_dataset(spec).examples(heads);
    spec.n = 16;
    spec.seed = 2;
    val = synth_dataset(spec).examples(heads);
  }
};

template <class Real>
std::vector<std::uint8_t> bytes_of(const Checkpoint<Real>& c) {
  return encode_checkpoint(c);
}

TEST(Trainer, OneEpochIsTheWarmupRamp) {
  Fixture f;
  f.cfg.max_epochs = 1;
  Trainer<double> t(f.arch, f.cfg, f.train, f.val);
  auto c = t.start();
  t.run(c);
  ASSERT_EQ(c.history.size(), 1u);
  const auto& lrs = t.step_lrs();
  ASSERT_EQ(lrs.size(), 6u);
  for (std::size_t s = 0; s < 6; ++s) EXPECT_EQ(lrs[s], warmup_lr(s, 6, 3e-3));
  EXPECT_EQ(lrs.back(), 3e-3);
  EXPECT_EQ(c.history[0].lr, 3e-3);
  EXPECT_TRUE(c.history[0].is_best);
}

TEST(Trainer, DeterministicAcrossRunsAndThreadCounts) {
  Fixture f;
  omp_set_num_threads(1);
  const auto a = bytes_of(train<double>(f.arch, f.cfg, f.train, f.val));
  omp_set_num_threads(4);
  const auto b = bytes_of(train<double>(f.arch, f.cfg, f.train, f.val));
  const auto c = bytes_of(train<double>(f.arch, f.cfg, f.train, f.val));
  EXPECT_EQ(a, b);
  EXPECT_EQ(b, c);
  f.cfg.seed = 12;
  EXPECT_NE(a, bytes_of(train<double>(f.arch, f.cfg, f.train, f.val)));
}

TEST(Trainer, ResumeEqualsUninterrupted) {
  Fixture f;
  f.cfg.max_epochs = 6;
  Trainer<double> t(f.arch, f.cfg, f.train, f.val);
  std::vector<std::uint8_t> mid;
  auto full = t.start();
  t.run(full, [&](const Checkpoint<double>& c) {
    if (c.state.epoch == 3) mid = encode_checkpoint(c);
  });
  ASSERT_FALSE(mid.empty());
  auto resumed = decode_checkpoint<double>(mid);
  EXPECT_EQ(resumed.history.size(), 3u);
  t.run(resumed);
  EXPECT_EQ(resumed, full);
  EXPECT_EQ(encode_checkpoint(resumed), encode_checkpoint(full));
}

TEST(Trainer, BestSnapshotAttainsBestValidationLoss) {
  Fixture f;
  f.cfg.max_epochs = 8;
  Trainer<double> t(f.arch, f.cfg, f.train, f.val);
  auto c = t.start();
  double prev = INFINITY;
  t.run(c, [&](const Checkpoint<double>& s) {
    EXPECT_LE(s.state.best_val_loss, prev);
    prev = s.state.best_val_loss;
  });
  EXPECT_EQ(t.validation_loss(c.best_params()), c.state.best_val_loss);
  EXPECT_EQ(c.history[c.state.best_epoch].val_loss, c.state.best_val_loss);
  std::size_t best_rows = 0;
  for (const auto& r : c.history) best_rows += r.is_best;
  EXPECT_GE(best_rows, 1u);
}

TEST(Trainer, LrSequenceIsRampThenMultiplicativeDrops) {
  Fixture f(24);
  f.cfg.lr_init = 0.2;  // large enough to stall so the plateau logic fires
  f.cfg.plateau_patience = 2;
  f.cfg.early_stop_patience = 7;
  f.cfg.max_epochs = 30;
  Trainer<double> t(f.arch, f.cfg, f.train, f.val);
  auto c = t.start();
  t.run(c);
  const auto& lrs = t.step_lrs();
  const std::size_t per_epoch = 3;
  for (std::size_t s = 1; s < per_epoch; ++s) EXPECT_LE(lrs[s - 1], lrs[s]);
  for (std::size_t s = per_epoch; s < lrs.size(); ++s) {
    const double ratio = lrs[s] / lrs[s - 1];
    EXPECT_TRUE(ratio == 1.0 || std::abs(ratio - 0.1) < 1e-12) << s << ": " << ratio;
  }
  EXPECT_LT(c.state.plateau.lr, f.cfg.lr_init);
  EXPECT_LE(c.history.size(), 30u);
}

TEST(Trainer, EarlyStopEndsRun) {
  Fixture f(24);
  f.cfg.lr_init = 0.2;
  f.cfg.plateau_patience = 50;
  f.cfg.early_stop_patience = 3;
  f.cfg.max_epochs = 200;
  auto c = train<double>(f.arch, f.cfg, f.train, f.val);
  EXPECT_TRUE(c.state.stopped);
  EXPECT_LT(c.history.size(), 200u);
  EXPECT_EQ(c.history.size(), c.state.best_epoch + 1 + 3);
}

TEST(Trainer, BiasAwareWithOneDatasetMatchesMse) {
  Fixture f;
  f.cfg.loss = LossKind::mse;
  const auto a = train<double>(f.arch, f.cfg, f.train, f.val);
  f.cfg.loss = LossKind::bias_aware;
  const auto b = train<double>(f.arch, f.cfg, f.train, f.val);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.params, b.params);
}

TEST(Trainer, NonFiniteLossReportsContext) {
  Fixture f;
  Trainer<double> t(f.arch, f.cfg, f.train, f.val);
  auto c = t.start();
  c.params.values[c.params.values.size() - 1] = std::nan("");
  try {
    t.run(c);
    FAIL();
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("batch 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("lr"), std::string::npos) << msg;
  }
}

TEST(Trainer, RejectsBadInputs) {
  Fixture f;
  const std::vector<Example> none;
  EXPECT_THROW(Trainer<double>(f.arch, f.cfg, none, f.val), DataError);
  EXPECT_THROW(Trainer<double>(f.arch, f.cfg, f.train, none), DataError);
  auto wide = f.arch;
  wide.feature_dim = 9;
  EXPECT_THROW(Trainer<double>(wide, f.cfg, f.train, f.val), ShapeError);
}

TEST(Trainer, MultiHeadAndFloatPrecisionTrain) {
  Fixture f(32, ArchConfig::multi_head_names());
  const auto d = train<double>(f.arch, f.cfg, f.train, f.val);
  f.cfg.precision = Precision::f32;
  const auto s = train<float>(f.arch, f.cfg, f.train, f.val);
  EXPECT_EQ(d.history.size(), 4u);
  EXPECT_EQ(s.history.size(), 4u);
  EXPECT_LT(d.history.back().train_loss, d.history.front().train_loss);
  EXPECT_NEAR(s.history.front().train_loss, d.history.front().train_loss, 1e-3);
}

TEST(Trainer, PredictAllMatchesForward) {
  Fixture f(10);
  const Model<double> m(f.arch);
  const auto p = m.init_params(3);
  const auto all = predict_all(m, p, std::span<const Example>(f.train));
  for (std::size_t i = 0; i < f.train.size(); ++i) EXPECT_EQ(all[i], m.forward(*f.train[i].features, p).scores[0]);
}

TEST(TrainReport, Csv) {
  const std::vector<EpochRecord> h = {{0, 1e-5, 0.5, 0.25, true}, {1, 1e-6, 0.125, 0.3, false}};
  std::ostringstream os;
  write_train_report(os, h);
  EXPECT_EQ(os.str(), "epoch,lr,train_loss,val_loss,is_best\n0,1e-05,0.5,0.25,1\n1,1e-06,0.125,0.3,0\n");
}

// Checkpoint container ------------------------------------------------------------------------

Checkpoint<double> trained_checkpoint() {
  Fixture f(16);
  f.cfg.max_epochs = 2;
  return train<double>(f.arch, f.cfg, f.train, f.val);
}

TEST(Checkpoint, RoundTripBitExact) {
  const auto c = trained_checkpoint();
  const auto bytes = encode_checkpoint(c);
  const auto back = decode_checkpoint<double>(bytes);
  EXPECT_EQ(back, c);
  EXPECT_EQ(encode_checkpoint(back), bytes);

  Rng rng(5);
  const auto s = testing::random_stack(rng, c.arch.stack_dims());
  const Model<double> m(c.arch);
  EXPECT_EQ(m.forward(s, back.best_params()).scores, m.forward(s, c.best_params()).scores);
}

TEST(Checkpoint, FileRoundTripAndPrecision) {
  const auto dir = testing::scratch_dir("ckpt_file");
  const auto c = trained_checkpoint();
  save_checkpoint(c, dir / "a.wsqc");
  EXPECT_EQ(load_checkpoint<double>(dir / "a.wsqc"), c);
  EXPECT_EQ(checkpoint_precision(dir / "a.wsqc"), Precision::f64);
  EXPECT_THROW(load_checkpoint<float>(dir / "a.wsqc"), FormatError);

  Fixture f(16);
  f.cfg.max_epochs = 1;
  f.cfg.precision = Precision::f32;
  const auto cf = train<float>(f.arch, f.cfg, f.train, f.val);
  save_checkpoint(cf, dir / "b.wsqc");
  EXPECT_EQ(checkpoint_precision(dir / "b.wsqc"), Precision::f32);
  EXPECT_EQ(load_checkpoint<float>(dir / "b.wsqc"), cf);
}

TEST(Checkpoint, HeaderLayout) {
  const auto bytes = encode_checkpoint(trained_checkpoint());
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "WSQC");
  io::ByteReader r(bytes, "test");
  r.raw(4);
  EXPECT_EQ(r.u16(), kCheckpointVersion);
  EXPECT_EQ(r.u64(), bytes.size());
}

TEST(Checkpoint, CorruptionErrors) {
  const auto good = encode_checkpoint(trained_checkpoint());

  auto b = good;
  b[4] = 7;
  EXPECT_THROW(decode_checkpoint<double>(b), VersionMismatchError);

  b = good;
  b[0] = 'X';
  EXPECT_THROW(decode_checkpoint<double>(b), BadMagicError);

  b = good;
  b.resize(b.size() - 10);
  EXPECT_THROW(decode_checkpoint<double>(b), TruncatedError);

  b = good;
  b[b.size() / 2] ^= 0x01;
  EXPECT_THROW(decode_checkpoint<double>(b), ChecksumError);

  b = good;
  b.push_back(0);
  EXPECT_THROW(decode_checkpoint<double>(b), FormatError);
}

}  // namespace
}  // namespace whisqa
