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
#include <numbers>

#include "whisqa/errors.hpp"
#include "whisqa/features.hpp"
#include "whisqa/kernels.hpp"

namespace whisqa {

namespace {

constexpr double kLinearStepHz = 200.0 / 3.0;
constexpr double kBreakHz = 1000.0;
constexpr double kBreakMel = kBreakHz / kLinearStepHz;  // 15
const double kLogStep = std::log(6.4) / 27.0;

// Real DFT as two basis matrices [n_bins, n_fft] so the per-frame transform
// becomes a pair of gemm_nt calls.
void dft_basis(std::size_t n_fft, std::vector<double>& cos_basis, std::vector<double>& sin_basis) {
  const std::size_t n_bins = n_fft / 2 + 1;
  cos_basis.resize(n_bins * n_fft);
  sin_basis.resize(n_bins * n_fft);
  for (std::size_t k = 0; k < n_bins; ++k) {
    for (std::size_t n = 0; n < n_fft; ++n) {
      // Reduce k*n modulo n_fft first so large products keep full precision.
      const double phase = 2.0 * std::numbers::pi * static_cast<double>((k * n) % n_fft) /
                           static_cast<double>(n_fft);
      cos_basis[k * n_fft + n] = std::cos(phase);
      sin_basis[k * n_fft + n] = std::sin(phase);
    }
  }
}

}  // namespace

double hz_to_mel(double hz) {
  if (hz < kBreakHz) return hz / kLinearStepHz;
  return kBreakMel + std::log(hz / kBreakHz) / kLogStep;
}

double mel_to_hz(double mel) {
  if (mel < kBreakMel) return mel * kLinearStepHz;
  return kBreakHz * std::exp(kLogStep * (mel - kBreakMel));
}

std::vector<double> mel_filterbank(const MelConfig& cfg) {
  const std::size_t n_bins = cfg.n_fft / 2 + 1;
  std::vector<double> centers(cfg.n_mels + 2);
  const double lo = hz_to_mel(cfg.f_min);
  const double hi = hz_to_mel(cfg.f_max);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    centers[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.n_mels + 1));
  }
  std::vector<double> bank(cfg.n_mels * n_bins, 0.0);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double left = centers[m];
    const double mid = centers[m + 1];
    const double right = centers[m + 2];
    const double norm = 2.0 / (right - left);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / static_cast<double>(cfg.n_fft);
      const double rise = (f - left) / (mid - left);
      const double fall = (right - f) / (right - mid);
      bank[m * n_bins + k] = std::max(0.0, std::min(rise, fall)) * norm;
    }
  }
  return bank;
}

MelSpectrogram compute_log_mel(const Waveform& w, const MelConfig& cfg) {
  return compute_log_mel(w, cfg, w.samples.size());
}

MelSpectrogram compute_log_mel(const Waveform& w, const MelConfig& cfg, std::size_t valid_samples) {
  w.validate();
  if (w.samples.empty()) throw RangeError("compute_log_mel: empty waveform");
  if (cfg.n_fft == 0 || cfg.hop == 0 || cfg.n_mels == 0) {
    throw RangeError("compute_log_mel: n_fft, hop and n_mels must be positive");
  }
  if (std::abs(w.sample_rate - cfg.sample_rate) > 1e-9) {
    throw RangeError("compute_log_mel: waveform is " + std::to_string(w.sample_rate) +
                     " Hz, frontend expects " + std::to_string(cfg.sample_rate) + " Hz");
  }

  const std::size_t len = w.samples.size();
  const std::size_t n_fft = cfg.n_fft;
  const std::size_t n_bins = n_fft / 2 + 1;
  const std::size_t frames = (len + cfg.hop - 1) / cfg.hop;
  const auto half = static_cast<std::ptrdiff_t>(n_fft / 2);

  std::vector<double> window(n_fft);
  for (std::size_t n = 0; n < n_fft; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(n_fft));
  }

  std::vector<double> framed(frames * n_fft, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(t * cfg.hop) - half;
    for (std::size_t n = 0; n < n_fft; ++n) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(n);
      if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(len)) {
        framed[t * n_fft + n] = w.samples[static_cast<std::size_t>(idx)] * window[n];
      }
    }
  }

  std::vector<double> cos_basis, sin_basis;
  dft_basis(n_fft, cos_basis, sin_basis);
  std::vector<double> re(frames * n_bins), im(frames * n_bins);
  kernels::gemm_nt<double>(frames, n_bins, n_fft, framed, cos_basis, re, false);
  kernels::gemm_nt<double>(frames, n_bins, n_fft, framed, sin_basis, im, false);
  for (std::size_t i = 0; i < re.size(); ++i) re[i] = re[i] * re[i] + im[i] * im[i];

  const std::vector<double> bank = mel_filterbank(cfg);
  MelSpectrogram out;
  out.frame_count = frames;
  out.n_mels = cfg.n_mels;
  out.hop_s = static_cast<double>(cfg.hop) / cfg.sample_rate;
  out.win_s = static_cast<double>(n_fft) / cfg.sample_rate;
  out.valid_frames = std::min(frames, (std::min(valid_samples, len) + cfg.hop - 1) / cfg.hop);
  out.values.resize(frames * cfg.n_mels);
  kernels::gemm_nt<double>(frames, cfg.n_mels, n_bins, re, bank, out.values, false);
  for (double& v : out.values) v = std::log(std::max(v, cfg.log_floor));
  return out;
}

}  // namespace whisqa
