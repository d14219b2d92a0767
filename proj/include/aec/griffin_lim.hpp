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

#ifndef AEC_GRIFFIN_LIM_HPP_
#define AEC_GRIFFIN_LIM_HPP_

#include <vector>

#include "aec/stft.hpp"

namespace aec {

struct GriffinLimResult {
  Waveform wave;
  // Spectral-convergence error per iteration:
  // ||   |STFT(x_i)| - M ||_F / || M ||_F.  Non-increasing by construction
  // of the alternating projections.
  std::vector<double> convergence;
};

// Alternating-projection phase recovery from a nonnegative magnitude matrix
// (row-major [T x num_bins]).  Starts from zero phase; returns the ISTFT
// after `iters` projection rounds.  An all-zero magnitude yields silence
// with convergence error defined as zero.
GriffinLimResult griffin_lim(const std::vector<float>& magnitude,
                             int num_frames, const StftConfig& cfg,
                             int sample_rate, int iters = 60);

}  // namespace aec

#endif  // AEC_GRIFFIN_LIM_HPP_
