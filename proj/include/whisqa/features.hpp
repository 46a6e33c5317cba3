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
#include <filesystem>
#include <span>
#include <vector>

namespace whisqa {

/// Mono audio at a fixed sample rate. The frontend expects 16 kHz input and
/// does not resample.
struct Waveform {
  std::vector<double> samples;
  double sample_rate = 16000.0;

  /// Throws RangeError on a non-positive rate or non-finite samples.
  void validate() const;
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Zero-pads at the end or truncates to exactly round(target_s * rate) samples.
Waveform pad_or_trim(const Waveform& w, double target_s);

struct MelConfig {
  double sample_rate = 16000.0;
  std::size_t n_fft = 400;   // 25 ms
  std::size_t hop = 160;     // 10 ms
  std::size_t n_mels = 80;
  double f_min = 0.0;
  double f_max = 8000.0;
  double log_floor = 1e-10;
  double pad_s = 30.0;
};

/// Log-mel energies, row-major [frame_count, n_mels].
struct MelSpectrogram {
  std::size_t frame_count = 0;
  std::size_t n_mels = 0;
  std::size_t valid_frames = 0;
  double hop_s = 0.0;
  double win_s = 0.0;
  std::vector<double> values;

  double at(std::size_t t, std::size_t m) const { return values[t * n_mels + m]; }
  std::span<const double> frame(std::size_t t) const {
    return {values.data() + t * n_mels, n_mels};
  }
};

/// Slaney-style mel filterbank, row-major [n_mels, n_fft/2 + 1].
std::vector<double> mel_filterbank(const MelConfig& cfg);

/// Slaney mel scale (linear below 1 kHz, logarithmic above).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Log-mel spectrogram with centered, zero-padded, periodic-Hann frames.
/// Produces ceil(len / hop) frames. `valid_samples` marks how much of the
/// input is real audio (the rest being padding); it defaults to all of it.
MelSpectrogram compute_log_mel(const Waveform& w, const MelConfig& cfg = {});
MelSpectrogram compute_log_mel(const Waveform& w, const MelConfig& cfg,
                               std::size_t valid_samples);

struct StackDims {
  std::size_t layers = 0;
  std::size_t frames = 0;
  std::size_t features = 0;

  std::size_t size() const { return layers * frames * features; }
  bool operator==(const StackDims&) const = default;
};

/// Per-layer encoder outputs of one utterance, row-major [L, T, F].
/// Immutable once constructed.
class FeatureStack {
 public:
  FeatureStack() = default;
  /// Throws ShapeError on zero dims or a size mismatch, RangeError on
  /// non-finite values or valid_frames > frames.
  FeatureStack(StackDims dims, std::vector<float> data, std::size_t valid_frames);

  const StackDims& dims() const { return dims_; }
  std::size_t layer_count() const { return dims_.layers; }
  std::size_t frame_count() const { return dims_.frames; }
  std::size_t feature_dim() const { return dims_.features; }
  std::size_t valid_frames() const { return valid_frames_; }

  std::span<const float> data() const { return data_; }
  std::span<const float> layer(std::size_t l) const {
    return {data_.data() + l * dims_.frames * dims_.features, dims_.frames * dims_.features};
  }
  float at(std::size_t l, std::size_t t, std::size_t f) const {
    return data_[(l * dims_.frames + t) * dims_.features + f];
  }

 private:
  StackDims dims_{};
  std::size_t valid_frames_ = 0;
  std::vector<float> data_;
};

/// Reference geometry of the upstream encoder: 13 layer outputs of 1500 x 768.
inline constexpr StackDims kReferenceDims{13, 1500, 768};

/// Deterministic stand-in for a pretrained encoder. Time is resampled from
/// the mel frame rate to `dims.frames` by block averaging (halving for the
/// reference geometry), layer 0 is a seeded random projection of the mel
/// frame, and each further layer mixes a seeded transform of its
/// predecessor (with one frame of temporal context) in at weight l / L.
FeatureStack toy_encode(const MelSpectrogram& mel, std::uint64_t seed, StackDims dims);

/// Waveform -> pad to cfg.pad_s -> log-mel -> toy_encode with `dims`.
FeatureStack featurize(const Waveform& w, std::uint64_t seed, StackDims dims,
                       const MelConfig& cfg = {});

// WSQF container ----------------------------------------------------------

inline constexpr char kFeatureMagic[4] = {'W', 'S', 'Q', 'F'};
inline constexpr std::uint16_t kFeatureVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 0;
inline constexpr std::size_t kFeatureHeaderBytes = 4 + 2 + 4 * 3 + 4 + 1;

std::vector<std::uint8_t> encode_feature_stack(const FeatureStack& s);
/// Throws BadMagicError, VersionMismatchError, TruncatedError or
/// UnsupportedDtypeError; trailing bytes are a FormatError.
FeatureStack decode_feature_stack(std::span<const std::uint8_t> bytes);

void save_feature_stack(const FeatureStack& s, const std::filesystem::path& path);
FeatureStack load_feature_stack(const std::filesystem::path& path);

}  // namespace whisqa
