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

#include "aec/mel.hpp"

#include <cmath>

#include "aec/errors.hpp"
#include "aec/kernels.hpp"

namespace aec {

void MelConfig::validate(int sample_rate) const {
  if (num_mels < 1) throw ConfigError("num_mels must be >= 1");
  if (f_min < 0.0 || f_min >= f_max)
    throw ConfigError("mel frequency range must satisfy 0 <= f_min < f_max");
  if (f_max > sample_rate / 2.0)
    throw ConfigError("mel f_max exceeds Nyquist");
  if (log_floor <= 0.0) throw ConfigError("log_floor must be positive");
}

double hz_to_mel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

MelFilterbank::MelFilterbank(const MelConfig& mel, const StftConfig& stft,
                             int sample_rate)
    : num_mels_(mel.num_mels), num_bins_(stft.num_bins()) {
  mel.validate(sample_rate);
  stft.validate();
  mel_lo_ = hz_to_mel(mel.f_min);
  mel_hi_ = hz_to_mel(mel.f_max);
  const double mel_step = (mel_hi_ - mel_lo_) / (num_mels_ + 1);
  const double hz_per_bin =
      static_cast<double>(sample_rate) / stft.fft_size;

  weights_.assign(static_cast<std::size_t>(num_mels_) * num_bins_, 0.0f);
  for (int m = 0; m < num_mels_; ++m) {
    const double left = mel_lo_ + m * mel_step;
    const double center = left + mel_step;
    const double right = center + mel_step;
    for (int f = 0; f < num_bins_; ++f) {
      const double bin_mel = hz_to_mel(f * hz_per_bin);
      double w = 0.0;
      if (bin_mel > left && bin_mel < right) {
        w = bin_mel <= center ? (bin_mel - left) / (center - left)
                              : (right - bin_mel) / (right - center);
      }
      weights_[static_cast<std::size_t>(m) * num_bins_ + f] = static_cast<float>(w);
    }
  }
}

double MelFilterbank::center_frequency(int m) const {
  const double mel_step = (mel_hi_ - mel_lo_) / (num_mels_ + 1);
  return mel_to_hz(mel_lo_ + (m + 1) * mel_step);
}

const std::vector<float>& MelFilterbank::pseudo_inverse() const {
  if (!pinv_.empty()) return pinv_;
  // P = W^T (W W^T + eps I)^{-1}, computed in double via Gauss-Jordan on the
  // small M x M Gram matrix.
  const int m = num_mels_, f = num_bins_;
  std::vector<double> gram(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      double acc = 0.0;
      for (int k = 0; k < f; ++k) {
        acc += static_cast<double>(weight(i, k)) * weight(j, k);
      }
      gram[static_cast<std::size_t>(i) * m + j] = acc;
      gram[static_cast<std::size_t>(j) * m + i] = acc;
    }
  }
  double trace = 0.0;
  for (int i = 0; i < m; ++i) trace += gram[static_cast<std::size_t>(i) * m + i];
  const double eps = 1e-8 * trace / m;
  for (int i = 0; i < m; ++i) gram[static_cast<std::size_t>(i) * m + i] += eps;

  // Invert the Gram matrix.
  std::vector<double> inv(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) inv[static_cast<std::size_t>(i) * m + i] = 1.0;
  for (int col = 0; col < m; ++col) {
    int pivot = col;
    for (int r = col + 1; r < m; ++r) {
      if (std::abs(gram[static_cast<std::size_t>(r) * m + col]) >
          std::abs(gram[static_cast<std::size_t>(pivot) * m + col]))
        pivot = r;
    }
    for (int c = 0; c < m; ++c) {
      std::swap(gram[static_cast<std::size_t>(col) * m + c], gram[static_cast<std::size_t>(pivot) * m + c]);
      std::swap(inv[static_cast<std::size_t>(col) * m + c], inv[static_cast<std::size_t>(pivot) * m + c]);
    }
    const double d = gram[static_cast<std::size_t>(col) * m + col];
    for (int c = 0; c < m; ++c) {
      gram[static_cast<std::size_t>(col) * m + c] /= d;
      inv[static_cast<std::size_t>(col) * m + c] /= d;
    }
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const double factor = gram[static_cast<std::size_t>(r) * m + col];
      if (factor == 0.0) continue;
      for (int c = 0; c < m; ++c) {
        gram[static_cast<std::size_t>(r) * m + c] -= factor * gram[static_cast<std::size_t>(col) * m + c];
        inv[static_cast<std::size_t>(r) * m + c] -= factor * inv[static_cast<std::size_t>(col) * m + c];
      }
    }
  }

  pinv_.assign(static_cast<std::size_t>(f) * m, 0.0f);
  for (int b = 0; b < f; ++b) {
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int k = 0; k < m; ++k) {
        acc += static_cast<double>(weight(k, b)) * inv[static_cast<std::size_t>(k) * m + j];
      }
      pinv_[static_cast<std::size_t>(b) * m + j] = static_cast<float>(acc);
    }
  }
  return pinv_;
}

LogMelFrames log_mel(const Spectrogram& spec, const MelConfig& mel) {
  MelFilterbank fb(mel, spec.config, spec.sample_rate);
  LogMelFrames out;
  out.num_frames = spec.num_frames;
  out.num_mels = mel.num_mels;
  out.config = mel;
  out.data.resize(static_cast<std::size_t>(spec.num_frames) * mel.num_mels);

  std::vector<float> mag(static_cast<std::size_t>(spec.num_bins));
  std::vector<float> energies(static_cast<std::size_t>(mel.num_mels));
  const float floor = static_cast<float>(mel.log_floor);
  for (int t = 0; t < spec.num_frames; ++t) {
    for (int f = 0; f < spec.num_bins; ++f) mag[static_cast<std::size_t>(f)] = std::abs(spec.at(t, f));
    kernels::matvec(fb.weights().data(), mag.data(), energies.data(),
                    static_cast<std::size_t>(mel.num_mels),
                    static_cast<std::size_t>(spec.num_bins));
    for (int m = 0; m < mel.num_mels; ++m) {
      out.at(t, m) = std::log(std::max(energies[static_cast<std::size_t>(m)], floor));
    }
  }
  return out;
}

std::vector<float> mel_pseudo_inverse(const LogMelFrames& frames,
                                      const StftConfig& stft,
                                      int sample_rate) {
  MelFilterbank fb(frames.config, stft, sample_rate);
  if (frames.num_mels != fb.num_mels())
    throw ShapeMismatch("mel frame width does not match filterbank");
  const int t_n = frames.num_frames, m_n = frames.num_mels, f_n = fb.num_bins();
  const std::vector<float>& pinv = fb.pseudo_inverse();

  std::vector<float> out(static_cast<std::size_t>(t_n) * f_n, 0.0f);
  std::vector<float> mel_lin(static_cast<std::size_t>(m_n));
  for (int t = 0; t < t_n; ++t) {
    for (int m = 0; m < m_n; ++m) mel_lin[static_cast<std::size_t>(m)] = std::exp(frames.at(t, m));
    float* row = out.data() + static_cast<std::size_t>(t) * f_n;
    kernels::matvec(pinv.data(), mel_lin.data(), row,
                    static_cast<std::size_t>(f_n), static_cast<std::size_t>(m_n));
    for (int f = 0; f < f_n; ++f) {
      if (row[f] < 0.0f) row[f] = 0.0f;
    }
  }
  return out;
}

}  // namespace aec
