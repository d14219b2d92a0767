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

// Comparison systems: subband normalized-LMS echo cancellation and
// ideal-ratio-mask erasure (oracle mask plus a small learned predictor).

#ifndef AEC_BASELINES_HPP_
#define AEC_BASELINES_HPP_

#include <complex>
#include <cstdint>
#include <vector>

#include "aec/data_pipeline.hpp"
#include "aec/nn.hpp"
#include "aec/stft.hpp"
#include "aec/wave.hpp"

namespace aec {

struct NlmsConfig {
  // Filter length per frequency band, in frame lags; 8 lags at a 10 ms hop
  // span 80 ms of echo tail.
  int taps_per_band = 8;
  double step_size = 0.5;       // mu, stable on (0, 2)
  double regularization = 1e-6; // added to the reference energy in the update
  StftConfig stft;

  void validate() const;
};

// Per-band adaptive cancellation on spectrograms.  For every band f a
// complex filter over the last taps_per_band reference frames predicts the
// echo; the returned spectrogram holds the prediction error.  If
// `final_weights` is non-null it receives the converged filters, row-major
// [num_bins x taps].
Spectrogram subband_nlms_cancel(const Spectrogram& probe_spec,
                                const Spectrogram& reference_spec,
                                const NlmsConfig& cfg,
                                std::vector<std::complex<float>>* final_weights = nullptr);

// STFT -> per-band NLMS -> ISTFT.  Inputs must share a sample rate and be
// already aligned (synth_example stores the reference aligned).
Waveform subband_nlms_erase(const Waveform& probe, const Waveform& reference,
                            const NlmsConfig& cfg);

struct IrmConfig {
  double exponent = 0.5;  // beta: mask = (|R|^2 / (|R|^2 + |E|^2 + floor))^beta
  double floor = 1e-8;

  void validate() const;
};

// Oracle mask from the residual (reverberant target + noise) and echoed
// reference spectrograms; row-major [T x F], values in [0, 1].
std::vector<float> ideal_ratio_mask(const Spectrogram& residual_spec,
                                    const Spectrogram& echo_spec,
                                    const IrmConfig& cfg);

// Masked probe magnitude with the probe's own phase, inverted to time.
Waveform apply_mask_erase(const Waveform& probe,
                          const std::vector<float>& mask,
                          const StftConfig& cfg);

// Per-frame mask regressor: stacked probe+reference log-mel context
// (content frames +-`context`) through two hidden layers to per-bin sigmoid
// mask values, trained with MSE against the oracle mask.
struct IrmPredictorConfig {
  int context = 2;
  int hidden = 48;
  int steps = 300;
  int batch_frames = 64;
  StftConfig stft;  // defines the mask's bin count
  MelConfig mel;    // defines the input feature width
  nn::AdamConfig adam;

  void validate() const;
};

struct IrmPredictor {
  IrmPredictorConfig config;
  nn::ParamMap<float> params;

  // [T x F] mask for one utterance's features.
  std::vector<float> predict(const LogMelFrames& probe,
                             const LogMelFrames& reference) const;
};

// Examples must carry stems (residual and echoed reference) so oracle masks
// can be computed; throws MissingStems otherwise.
IrmPredictor train_irm_predictor(const std::vector<UtteranceExample>& examples,
                                 const IrmPredictorConfig& cfg,
                                 std::uint64_t seed);

// Mean squared error of predicted masks against oracle masks over a set of
// examples (the all-ones "do nothing" baseline is `constant_mask_mse` with
// value 1).
double irm_predictor_mse(const IrmPredictor& predictor,
                         const std::vector<UtteranceExample>& examples);
double constant_mask_mse(float value,
                         const std::vector<UtteranceExample>& examples,
                         const IrmConfig& cfg = IrmConfig{},
                         const StftConfig& stft_cfg = StftConfig{});

}  // namespace aec

#endif  // AEC_BASELINES_HPP_
