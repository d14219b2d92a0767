/*
 * Copyright 2026 The aec-toolkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef AEC_MEL_HPP_
#define AEC_MEL_HPP_

#include <vector>

#include "aec/stft.hpp"

namespace aec {

struct MelConfig {
  int num_mels = 80;
  double f_min = 125.0;
  double f_max = 7600.0;
  // Applied as log(max(x, log_floor)); keeps silence finite and well-defined.
  double log_floor = 1e-5;

  void validate(int sample_rate) const;
  bool operator==(const MelConfig&) const = default;
};

// T x M matrix of natural-log mel energies.
struct LogMelFrames {
  std::vector<float> data;  // row-major [num_frames x num_mels]
  int num_frames = 0;
  int num_mels = 0;
  MelConfig config;

  float& at(int t, int m) { return data[static_cast<std::size_t>(t) * num_mels + m]; }
  float at(int t, int m) const { return data[static_cast<std::size_t>(t) * num_mels + m]; }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters spaced uniformly in mel, applied to the magnitude
// spectrum.  Weights are sampled at FFT bin centers; no area normalization.
class MelFilterbank {
 public:
  MelFilterbank(const MelConfig& mel, const StftConfig& stft, int sample_rate);

  int num_mels() const { return num_mels_; }
  int num_bins() const { return num_bins_; }
  // Row-major [num_mels x num_bins].
  const std::vector<float>& weights() const { return weights_; }
  float weight(int m, int f) const {
    return weights_[static_cast<std::size_t>(m) * num_bins_ + f];
  }
  // Regularized pseudo-inverse, row-major [num_bins x num_mels]; built
  // lazily on first use.
  const std::vector<float>& pseudo_inverse() const;
  // Center frequency of channel m in Hz.
  double center_frequency(int m) const;

 private:
  int num_mels_;
  int num_bins_;
  double mel_lo_, mel_hi_;
  std::vector<float> weights_;
  mutable std::vector<float> pinv_;
};

// Magnitude -> mel -> natural log with floor.
LogMelFrames log_mel(const Spectrogram& spec, const MelConfig& mel);

// exp(frames) through the filterbank pseudo-inverse, clamped at zero.
// Returns a row-major [T x num_bins] nonnegative magnitude matrix.
std::vector<float> mel_pseudo_inverse(const LogMelFrames& frames,
                                      const StftConfig& stft,
                                      int sample_rate);

}  // namespace aec

#endif  // AEC_MEL_HPP_
