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

#include "aec/stft.hpp"

#include <cmath>

#include "aec/errors.hpp"
#include "aec/fft.hpp"

namespace aec {

void StftConfig::validate() const {
  if (window_len <= 0 || hop <= 0 || fft_size <= 0)
    throw ConfigError("STFT sizes must be positive");
  if (hop > window_len) throw ConfigError("hop must not exceed window_len");
  if (window_len > fft_size)
    throw ConfigError("window_len must not exceed fft_size");
  if (!is_power_of_two(static_cast<std::size_t>(fft_size)))
    throw ConfigError("fft_size must be a power of two");
}

std::vector<float> make_window(WindowKind kind, int n) {
  std::vector<float> w(static_cast<std::size_t>(n), 1.0f);
  if (kind == WindowKind::kHann) {
    for (int i = 0; i < n; ++i) {
      w[static_cast<std::size_t>(i)] = static_cast<float>(
          0.5 - 0.5 * std::cos(2.0 * 3.14159265358979323846 * i / n));
    }
  }
  return w;
}

std::vector<float> Spectrogram::magnitude() const {
  std::vector<float> mag(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) mag[i] = std::abs(data[i]);
  return mag;
}

Spectrogram stft(const Waveform& wave, const StftConfig& cfg) {
  cfg.validate();
  const int len = static_cast<int>(wave.samples.size());
  if (len < cfg.window_len)
    throw ShortInput("signal shorter than one analysis window");

  const int num_frames = 1 + (len - cfg.window_len) / cfg.hop;
  const int num_bins = cfg.num_bins();
  const std::vector<float> window = make_window(cfg.window, cfg.window_len);

  Spectrogram spec;
  spec.num_frames = num_frames;
  spec.num_bins = num_bins;
  spec.config = cfg;
  spec.sample_rate = wave.sample_rate;
  spec.data.resize(static_cast<std::size_t>(num_frames) * num_bins);

  std::vector<std::complex<float>> buf(static_cast<std::size_t>(cfg.fft_size));
  for (int t = 0; t < num_frames; ++t) {
    const float* src = wave.samples.data() + static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < cfg.window_len; ++i) {
      buf[static_cast<std::size_t>(i)] = src[i] * window[static_cast<std::size_t>(i)];
    }
    for (int i = cfg.window_len; i < cfg.fft_size; ++i) {
      buf[static_cast<std::size_t>(i)] = 0.0f;
    }
    fft_inplace(buf.data(), static_cast<std::size_t>(cfg.fft_size), false);
    for (int f = 0; f < num_bins; ++f) spec.at(t, f) = buf[static_cast<std::size_t>(f)];
  }
  return spec;
}

Waveform istft(const Spectrogram& spec) {
  const StftConfig& cfg = spec.config;
  cfg.validate();
  const int num_frames = spec.num_frames;
  const int out_len = (num_frames - 1) * cfg.hop + cfg.window_len;
  const std::vector<float> window = make_window(cfg.window, cfg.window_len);

  std::vector<double> acc(static_cast<std::size_t>(out_len), 0.0);
  std::vector<double> norm(static_cast<std::size_t>(out_len), 0.0);
  std::vector<std::complex<float>> buf(static_cast<std::size_t>(cfg.fft_size));

  for (int t = 0; t < num_frames; ++t) {
    // Restore the two-sided spectrum by conjugate symmetry.
    for (int f = 0; f < spec.num_bins; ++f) buf[static_cast<std::size_t>(f)] = spec.at(t, f);
    for (int f = spec.num_bins; f < cfg.fft_size; ++f) {
      buf[static_cast<std::size_t>(f)] = std::conj(spec.at(t, cfg.fft_size - f));
    }
    fft_inplace(buf.data(), static_cast<std::size_t>(cfg.fft_size), true);
    const int base = t * cfg.hop;
    for (int i = 0; i < cfg.window_len; ++i) {
      const double w = window[static_cast<std::size_t>(i)];
      acc[static_cast<std::size_t>(base + i)] += buf[static_cast<std::size_t>(i)].real() * w;
      norm[static_cast<std::size_t>(base + i)] += w * w;
    }
  }

  Waveform out;
  out.sample_rate = spec.sample_rate;
  out.samples.resize(static_cast<std::size_t>(out_len));
  for (int i = 0; i < out_len; ++i) {
    const double d = norm[static_cast<std::size_t>(i)];
    out.samples[static_cast<std::size_t>(i)] =
        static_cast<float>(acc[static_cast<std::size_t>(i)] / (d > 1e-8 ? d : 1e-8));
  }
  return out;
}

Spectrogram with_magnitude(const Spectrogram& phase_source,
                           const std::vector<float>& magnitude) {
  if (magnitude.size() != phase_source.data.size())
    throw ShapeMismatch("magnitude size does not match spectrogram");
  Spectrogram out = phase_source;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const float m = std::abs(phase_source.data[i]);
    if (m > 0.0f) {
      out.data[i] = phase_source.data[i] * (magnitude[i] / m);
    } else {
      out.data[i] = std::complex<float>(magnitude[i], 0.0f);
    }
  }
  return out;
}

}  // namespace aec
