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

#ifndef AEC_ALIGN_HPP_
#define AEC_ALIGN_HPP_

#include "aec/wave.hpp"

namespace aec {

// Lag of the cross-correlation peak over [-max_lag, max_lag].  A positive
// lag means the reference must be delayed by that many samples to line up
// with the probe.  Throws NoSignal if either input is silent (RMS <= 1e-6)
// and BadLag if max_lag reaches either signal's length.
int xcorr_align(const Waveform& probe, const Waveform& reference, int max_lag);

// Gain g such that after scaling the interference by g, the power ratio
// signal
//   10*log10(P_signal / (g^2 * P_interference)) equals snr_db.
// Closed form: g = 10^(-snr_db/20) * sqrt(P_signal / P_interference).
double gain_for_snr(const Waveform& signal, const Waveform& interference,
                    double snr_db);

// Reference shifted onto the probe's time base: out[n] = wave[n - lag],
// zero outside the source.  Used after xcorr_align so every stream shares
// one clock.
Waveform apply_lag(const Waveform& wave, int lag, std::size_t out_len);

}  // namespace aec

#endif  // AEC_ALIGN_HPP_
