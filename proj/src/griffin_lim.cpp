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

#include "aec/griffin_lim.hpp"

#include <cmath>

#include "aec/errors.hpp"

namespace aec {

namespace {

double frob_norm(const std::vector<float>& m) {
  double acc = 0.0;
  for (float v : m) acc += static_cast<double>(v) * v;
  return std::sqrt(acc);
}

}  // namespace

GriffinLimResult griffin_lim(const std::vector<float>& magnitude,
                             int num_frames, const StftConfig& cfg,
                             int sample_rate, int iters) {
  cfg.validate();
  if (iters < 1) throw ConfigError("griffin_lim iters must be >= 1");
  const int num_bins = cfg.num_bins();
  if (magnitude.size() != static_cast<std::size_t>(num_frames) * num_bins)
    throw ShapeMismatch("magnitude size does not match frame count");
  for (float v : magnitude) {
    if (v < 0.0f) throw ConfigError("griffin_lim magnitude must be nonnegative");
  }

  const double mag_norm = frob_norm(magnitude);

  Spectrogram spec;
  spec.num_frames = num_frames;
  spec.num_bins = num_bins;
  spec.config = cfg;
  spec.sample_rate = sample_rate;
  spec.data.resize(magnitude.size());

  GriffinLimResult result;
  if (mag_norm == 0.0) {
    // Degenerate input: silence, convergence identically zero.
    for (auto& c : spec.data) c = 0.0f;
    result.wave = istft(spec);
    result.convergence.assign(static_cast<std::size_t>(iters), 0.0);
    return result;
  }

  // Zero-phase initialization.
  for (std::size_t i = 0; i < magnitude.size(); ++i) {
    spec.data[i] = std::complex<float>(magnitude[i], 0.0f);
  }

  Waveform x;
  for (int it = 0; it < iters; ++it) {
    x = istft(spec);
    Spectrogram consistent = stft(x, cfg);
    // Measure how far the consistent magnitude is from the requested one.
    double err = 0.0;
    for (std::size_t i = 0; i < magnitude.size(); ++i) {
      const double d = std::abs(consistent.data[i]) - magnitude[i];
      err += d * d;
    }
    result.convergence.push_back(std::sqrt(err) / mag_norm);
    if (it + 1 < iters) {
      // Keep the phase, replace the magnitude.
      for (std::size_t i = 0; i < magnitude.size(); ++i) {
        const float m = std::abs(consistent.data[i]);
        if (m > 0.0f) {
          spec.data[i] = consistent.data[i] * (magnitude[i] / m);
        } else {
          spec.data[i] = std::complex<float>(magnitude[i], 0.0f);
        }
      }
    }
  }
  result.wave = std::move(x);
  result.wave.sample_rate = sample_rate;
  return result;
}

}  // namespace aec
