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

#include <cmath>
#include <cstring>
#include <numbers>

#include "test_util.hpp"
#include "whisqa/binary_io.hpp"
#include "whisqa/errors.hpp"
#include "whisqa/features.hpp"

namespace whisqa {
namespace {

Waveform ramp(double seconds, double rate = 16000.0) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<std::size_t>(std::llround(seconds * rate)));
  for (std::size_t i = 0; i < w.samples.size(); ++i) w.samples[i] = std::sin(0.001 * static_cast<double>(i)) + 0.5;
  return w;
}

Waveform sine(double hz, double seconds, double rate = 16000.0) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = 0.5 * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  }
  return w;
}

bool same_bits(const FeatureStack& a, const FeatureStack& b) {
  return a.dims() == b.dims() && a.valid_frames() == b.valid_frames() &&
         std::memcmp(a.data().data(), b.data().data(), a.data().size() * sizeof(float)) == 0;
}

// pad_or_trim -----------------------------------------------------------------

TEST(PadOrTrim, ExactLengthUnchanged) {
  const auto w = ramp(30.0);
  EXPECT_EQ(pad_or_trim(w, 30.0).samples, w.samples);
}

TEST(PadOrTrim, ShortInputZeroPaddedAtEnd) {
  const auto w = ramp(10.0);
  const auto p = pad_or_trim(w, 30.0);
  ASSERT_EQ(p.samples.size(), 480000u);
  EXPECT_TRUE(std::equal(w.samples.begin(), w.samples.end(), p.samples.begin()));
  EXPECT_TRUE(std::all_of(p.samples.begin() + 160000, p.samples.end(), [](double x) { return x == 0.0; }));
  EXPECT_EQ(std::count(p.samples.begin() + 160000, p.samples.end(), 0.0), 320000);
}

TEST(PadOrTrim, LongInputMatchesSliceOracle) {
  const auto w = ramp(45.0);
  const auto p = pad_or_trim(w, 30.0);
  const std::vector<double> slice(w.samples.begin(), w.samples.begin() + 480000);
  EXPECT_EQ(p.samples, slice);
}

TEST(PadOrTrim, Idempotent) {
  for (double len : {0.5, 12.3, 30.0, 41.0}) {
    const auto once = pad_or_trim(ramp(len), 30.0);
    EXPECT_EQ(pad_or_trim(once, 30.0).samples, once.samples) << len;
  }
}

TEST(PadOrTrim, RejectsNonPositiveTarget) {
  EXPECT_THROW(pad_or_trim(ramp(1.0), 0.0), RangeError);
  EXPECT_THROW(pad_or_trim(ramp(1.0), -3.0), RangeError);
}

TEST(Waveform, ValidateRejectsBadInput) {
  Waveform w = ramp(0.1);
  w.samples[3] = std::nan("");
  EXPECT_THROW(w.validate(), RangeError);
  Waveform r = ramp(0.1);
  r.sample_rate = 0;
  EXPECT_THROW(r.validate(), RangeError);
}

// log-mel ---------------------------------------------------------------------

TEST(LogMel, FrameCountIsCeilOfLengthOverHop) {
  for (std::size_t n : {160ul, 161ul, 1000ul, 480000ul}) {
    Waveform w;
    w.samples.assign(n, 0.1);
    const auto m = compute_log_mel(w);
    EXPECT_EQ(m.frame_count, (n + 159) / 160);
    EXPECT_EQ(m.n_mels, 80u);
  }
}

TEST(LogMel, SilenceGivesConstantFloor) {
  Waveform w;
  w.samples.assign(480000, 0.0);
  const auto m = compute_log_mel(w);
  EXPECT_EQ(m.frame_count, 3000u);
  const double floor = std::log(1e-10);
  for (double v : m.values) ASSERT_EQ(v, floor);
}

// Oracle: the mel filter whose center frequency lies nearest 1 kHz, with
// centers placed evenly on the Slaney mel axis between 0 and 8 kHz.
std::size_t nearest_filter_oracle(double hz, std::size_t n_mels, double fmax) {
  const auto to_mel = [](double f) {
    return f < 1000.0 ? 3.0 * f / 200.0 : 15.0 + 27.0 * std::log(f / 1000.0) / std::log(6.4);
  };
  const auto to_hz = [](double m) {
    return m < 15.0 ? 200.0 * m / 3.0 : 1000.0 * std::pow(6.4, (m - 15.0) / 27.0);
  };
  std::size_t best = 0;
  double best_dist = INFINITY;
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double center = to_hz(to_mel(fmax) * static_cast<double>(m + 1) / static_cast<double>(n_mels + 1));
    if (std::abs(center - hz) < best_dist) {
      best_dist = std::abs(center - hz);
      best = m;
    }
  }
  return best;
}

TEST(LogMel, SineArgmaxMatchesMelScaleOracle) {
  const auto m = compute_log_mel(sine(1000.0, 1.0));
  const std::size_t expected = nearest_filter_oracle(1000.0, 80, 8000.0);
  for (std::size_t t = 3; t + 3 < m.frame_count; ++t) {
    const auto f = m.frame(t);
    const auto arg = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
    ASSERT_EQ(arg, expected) << "frame " << t;
  }
}

TEST(LogMel, Deterministic) {
  const auto w = ramp(2.0);
  const auto a = compute_log_mel(w);
  const auto b = compute_log_mel(w);
  ASSERT_EQ(a.values.size(), b.values.size());
  EXPECT_EQ(std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)), 0);
}

TEST(LogMel, FiniteEverywhere) {
  const auto m = compute_log_mel(ramp(3.0));
  for (double v : m.values) ASSERT_TRUE(std::isfinite(v));
}

TEST(LogMel, Errors) {
  EXPECT_THROW(compute_log_mel(Waveform{}), RangeError);
  Waveform w = ramp(0.2, 8000.0);
  EXPECT_THROW(compute_log_mel(w), RangeError);
}

TEST(LogMel, MelScaleRoundTrip) {
  for (double hz : {0.0, 100.0, 999.0, 1000.0, 2500.0, 8000.0}) {
    EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
  }
}

// toy encoder -------------------------------------------------------------------

MelSpectrogram small_mel() { return compute_log_mel(pad_or_trim(ramp(0.3), 0.5)); }

TEST(ToyEncode, ShapeContract) {
  const auto s = toy_encode(small_mel(), 1, {3, 8, 4});
  EXPECT_EQ(s.layer_count(), 3u);
  EXPECT_EQ(s.frame_count(), 8u);
  EXPECT_EQ(s.feature_dim(), 4u);
  EXPECT_EQ(s.data().size(), 96u);
}

TEST(ToyEncode, DeterministicPerSeed) {
  const auto mel = small_mel();
  EXPECT_TRUE(same_bits(toy_encode(mel, 7, {3, 8, 4}), toy_encode(mel, 7, {3, 8, 4})));
}

TEST(ToyEncode, SeedsDiffer) {
  const auto mel = small_mel();
  EXPECT_FALSE(same_bits(toy_encode(mel, 1, {3, 8, 4}), toy_encode(mel, 2, {3, 8, 4})));
}

TEST(ToyEncode, LayersDistinct) {
  const auto s = toy_encode(small_mel(), 3, {4, 8, 6});
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) {
      const auto la = s.layer(a), lb = s.layer(b);
      EXPECT_FALSE(std::equal(la.begin(), la.end(), lb.begin())) << a << " vs " << b;
    }
  }
}

TEST(ToyEncode, ValidFramesTrackSignalLength) {
  const auto w = ramp(0.3);
  const auto mel = compute_log_mel(pad_or_trim(w, 0.6), {}, w.samples.size());
  const auto s = toy_encode(mel, 1, {2, 10, 3});
  EXPECT_EQ(s.valid_frames(), 5u);
}

TEST(ToyEncode, RejectsZeroDims) {
  EXPECT_THROW(toy_encode(small_mel(), 1, {0, 8, 4}), ShapeError);
  EXPECT_THROW(toy_encode(small_mel(), 1, {3, 0, 4}), ShapeError);
  EXPECT_THROW(toy_encode(small_mel(), 1, {3, 8, 0}), ShapeError);
}

TEST(Featurize, ReferenceGeometry) {
  const auto s = featurize(ramp(4.0), 11, {2, 1500, 4});
  EXPECT_EQ(s.frame_count(), 1500u);
  EXPECT_EQ(s.valid_frames(), 200u);
}

// WSQF ----------------------------------------------------------------------------

TEST(Wsqf, RoundTripReferenceLayers) {
  Rng rng(42);
  const auto s = testing::random_stack(rng, {13, 1500, 8});
  const auto dir = testing::scratch_dir("wsqf_rt");
  save_feature_stack(s, dir / "a.wsqf");
  EXPECT_TRUE(same_bits(load_feature_stack(dir / "a.wsqf"), s));
  EXPECT_EQ(std::filesystem::file_size(dir / "a.wsqf"), kFeatureHeaderBytes + 13u * 1500 * 8 * 4);
}

TEST(Wsqf, RoundTripPropertyOverRandomDims) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const StackDims dims{1 + rng.below(6), 1 + rng.below(40), 1 + rng.below(12)};
    std::vector<float> data(dims.size());
    for (auto& x : data) {
      // Arbitrary finite bit patterns, including subnormals and signed zero.
      std::uint32_t bits;
      do {
        bits = static_cast<std::uint32_t>(rng.next());
        std::memcpy(&x, &bits, 4);
      } while (!std::isfinite(x));
    }
    const FeatureStack s(dims, data, 1 + rng.below(dims.frames));
    EXPECT_TRUE(same_bits(decode_feature_stack(encode_feature_stack(s)), s));
  }
}

TEST(Wsqf, HeaderLayoutIsLittleEndian) {
  const FeatureStack s({2, 3, 4}, std::vector<float>(24, 1.0f), 2);
  const auto bytes = encode_feature_stack(s);
  ASSERT_EQ(bytes.size(), kFeatureHeaderBytes + 96);
  const std::vector<std::uint8_t> header(bytes.begin(), bytes.begin() + kFeatureHeaderBytes);
  const std::vector<std::uint8_t> expected = {'W', 'S', 'Q', 'F', 1, 0, 2, 0, 0, 0, 3, 0,
                                              0,   0,   4,   0,   0, 0, 2, 0, 0, 0, 0};
  EXPECT_EQ(header, expected);
  // 1.0f = 0x3f800000
  EXPECT_EQ(bytes[kFeatureHeaderBytes + 3], 0x3f);
  EXPECT_EQ(bytes[kFeatureHeaderBytes + 2], 0x80);
}

std::vector<std::uint8_t> sample_bytes() {
  Rng rng(3);
  return encode_feature_stack(testing::random_stack(rng, {2, 4, 3}));
}

TEST(Wsqf, BadMagic) {
  auto b = sample_bytes();
  std::memcpy(b.data(), "XXXX", 4);
  EXPECT_THROW(decode_feature_stack(b), BadMagicError);
}

TEST(Wsqf, VersionMismatch) {
  auto b = sample_bytes();
  b[4] = 2;
  EXPECT_THROW(decode_feature_stack(b), VersionMismatchError);
}

TEST(Wsqf, PayloadOneByteShort) {
  auto b = sample_bytes();
  b.pop_back();
  EXPECT_THROW(decode_feature_stack(b), TruncatedError);
}

TEST(Wsqf, TruncatedHeader) {
  auto b = sample_bytes();
  b.resize(10);
  EXPECT_THROW(decode_feature_stack(b), TruncatedError);
}

TEST(Wsqf, UnsupportedDtype) {
  auto b = sample_bytes();
  b[kFeatureHeaderBytes - 1] = 1;
  EXPECT_THROW(decode_feature_stack(b), UnsupportedDtypeError);
}

TEST(Wsqf, ErrorsAreDistinctTypes) {
  // Each failure mode maps to its own class; none is a subclass of another.
  auto b = sample_bytes();
  b[4] = 9;
  try {
    decode_feature_stack(b);
    FAIL();
  } catch (const BadMagicError&) {
    FAIL() << "version error reported as bad magic";
  } catch (const TruncatedError&) {
    FAIL() << "version error reported as truncation";
  } catch (const VersionMismatchError&) {
  }
}

TEST(Wsqf, LoadErrorNamesFile) {
  const auto dir = testing::scratch_dir("wsqf_err");
  auto b = sample_bytes();
  std::memcpy(b.data(), "XXXX", 4);
  io::write_file(dir / "bad.wsqf", b);
  try {
    load_feature_stack(dir / "bad.wsqf");
    FAIL();
  } catch (const BadMagicError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.wsqf"), std::string::npos);
  }
}

TEST(FeatureStackTest, ConstructorValidates) {
  EXPECT_THROW(FeatureStack({2, 2, 2}, std::vector<float>(7), 2), ShapeError);
  EXPECT_THROW(FeatureStack({2, 2, 2}, std::vector<float>(8), 3), RangeError);
  std::vector<float> bad(8, 0.0f);
  bad[5] = INFINITY;
  EXPECT_THROW(FeatureStack({2, 2, 2}, bad, 2), RangeError);
}

}  // namespace
}  // namespace whisqa
