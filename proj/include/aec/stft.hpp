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

#ifndef AEC_STFT_HPP_
#define AEC_STFT_HPP_

#include <complex>
#include <vector>

#include "aec/wave.hpp"

namespace aec {

enum class WindowKind { kHann, kRectangular };

// 25 ms / 10 ms / 512-point analysis at 16 kHz by default.  fft_size must be
// a power of two (the transform is radix-2).
struct StftConfig {
  int window_len = 400;
  int hop = 160;
  int fft_size = 512;
  WindowKind window = WindowKind::kHann;

  int num_bins() const { return fft_size / 2 + 1; }
  void validate() const;
  bool operator==(const StftConfig&) const = default;
};

// Periodic window of length n.
std::vector<float> make_window(WindowKind kind, int n);

struct Spectrogram {
  // Row-major [num_frames x num_bins], one-sided.
  std::vector<std::complex<float>> data;
  int num_frames = 0;
  int num_bins = 0;
  StftConfig config;
  int sample_rate = 16000;

  std::complex<float>& at(int t, int f) { return data[static_cast<std::size_t>(t) * num_bins + f]; }
  const std::complex<float>& at(int t, int f) const {
    return data[static_cast<std::size_t>(t) * num_bins + f];
  }

  // |S| as a row-major [num_frames x num_bins] matrix.
  std::vector<float> magnitude() const;
};

// Frames start at t*hop; no centering or padding, so T =
// 1 + floor((len - window_len) / hop).  Throws ShortInput if the signal is
// shorter than one window.
Spectrogram stft(const Waveform& wave, const StftConfig& cfg);

// Weighted overlap-add inverse with synthesis window equal to the analysis
// window, normalized by the accumulated squared window (floored at 1e-8).
// Output length (T-1)*hop + window_len.
Waveform istft(const Spectrogram& spec);

// Rebuild a complex spectrogram from magnitude and phase-donor spectrogram.
// Used by mask-based erasure: |M| from the mask path, phase from the probe.
Spectrogram with_magnitude(const Spectrogram& phase_source,
                           const std::vector<float>& magnitude);

}  // namespace aec

#endif  // AEC_STFT_HPP_
