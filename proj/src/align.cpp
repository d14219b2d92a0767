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

#include "aec/align.hpp"

#include <cmath>
#include <cstddef>

#include "aec/errors.hpp"
#include "aec/fft.hpp"

namespace aec {

int xcorr_align(const Waveform& probe, const Waveform& reference,
                int max_lag) {
  if (probe.sample_rate != reference.sample_rate) {
    throw RateMismatch("xcorr_align: sample rates differ (" +
                       std::to_string(probe.sample_rate) + " vs " +
                       std::to_string(reference.sample_rate) + ")");
  }
  if (max_lag < 0) throw BadLag("xcorr_align: negative max_lag");
  const std::size_t shortest = std::min(probe.size(), reference.size());
  if (static_cast<std::size_t>(max_lag) >= shortest) {
    throw BadLag("xcorr_align: max_lag " + std::to_string(max_lag) +
                 " >= signal length " + std::to_string(shortest));
  }
  if (probe.rms() <= 1e-6) throw NoSignal("xcorr_align: probe is silent");
  if (reference.rms() <= 1e-6) {
    throw NoSignal("xcorr_align: reference is silent");
  }

  // r[k] = sum_n probe[n] * reference[n - k]; peak offset in samples.
  const std::vector<double> r = fft_xcorr(probe.samples, reference.samples,
                                          max_lag);
  int best = 0;
  double best_val = r[0];
  for (int k = 1; k < static_cast<int>(r.size()); ++k) {
    if (r[k] > best_val) {
      best_val = r[k];
      best = k;
    }
  }
  return best - max_lag;
}

double gain_for_snr(const Waveform& signal, const Waveform& interference,
                    double snr_db) {
  if (signal.rms() <= 1e-8) throw NoSignal("gain_for_snr: signal is silent");
  if (interference.rms() <= 1e-8) {
    throw NoSignal("gain_for_snr: interference is silent");
  }
  return std::pow(10.0, -snr_db / 20.0) *
         std::sqrt(signal.power() / interference.power());
}

Waveform apply_lag(const Waveform& wave, int lag, std::size_t out_len) {
  Waveform out;
  out.sample_rate = wave.sample_rate;
  out.role = wave.role;
  out.samples.assign(out_len, 0.0f);
  for (std::size_t n = 0; n < out_len; ++n) {
    const long long src = static_cast<long long>(n) - lag;
    if (src >= 0 && src < static_cast<long long>(wave.size())) {
      out.samples[n] = wave.samples[static_cast<std::size_t>(src)];
    }
  }
  return out;
}

}  // namespace aec
