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

#ifndef AEC_TESTS_TEST_UTIL_HPP_
#define AEC_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "aec/rng.hpp"
#include "aec/wave.hpp"

namespace aec::testing {

inline Waveform make_sine(double freq_hz, double dur_s, int sample_rate = 16000,
                          double amp = 0.5) {
  Waveform w;
  w.sample_rate = sample_rate;
  const std::size_t n = static_cast<std::size_t>(dur_s * sample_rate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = static_cast<float>(
        amp * std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) /
                       sample_rate));
  }
  return w;
}

inline Waveform make_noise(std::size_t n, std::uint64_t seed,
                           int sample_rate = 16000, double amp = 0.25) {
  Rng rng(seed);
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = static_cast<float>(amp * rng.normal());
  }
  return w;
}

// Harmonic stack with a slow amplitude envelope and a pitch glide; close
// enough to voiced speech for round-trip and convergence checks.
inline Waveform make_voiced(std::size_t n, std::uint64_t seed,
                            int sample_rate = 16000) {
  Rng rng(seed);
  const double f0 = rng.uniform(110.0, 220.0);
  const double glide = rng.uniform(-0.2, 0.2);
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(n);
  double phase[6] = {0, 0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double momentary = f0 * (1.0 + glide * t);
    const double env = 0.55 + 0.45 * std::sin(2.0 * M_PI * 2.7 * t);
    double s = 0.0;
    for (int h = 0; h < 6; ++h) {
      phase[h] += 2.0 * M_PI * momentary * (h + 1) / sample_rate;
      s += env * std::sin(phase[h]) / (1.0 + h);
    }
    s += 0.02 * rng.normal();
    w.samples[i] = static_cast<float>(0.25 * s);
  }
  return w;
}

inline double snr_db(const std::vector<float>& ref,
                     const std::vector<float>& est, std::size_t begin,
                     std::size_t end) {
  double sig = 0.0, err = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double d = static_cast<double>(ref[i]) - est[i];
    sig += static_cast<double>(ref[i]) * ref[i];
    err += d * d;
  }
  if (err == 0.0) return 300.0;
  return 10.0 * std::log10(sig / err);
}

}  // namespace aec::testing

#endif  // AEC_TESTS_TEST_UTIL_HPP_
