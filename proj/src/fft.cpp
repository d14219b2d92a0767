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

#include "aec/fft.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>

#include "aec/errors.hpp"

namespace aec {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace {

// Per-size tables, built once and shared: tw[j] = exp(-2*pi*i*j/n) for
// j < n/2 (conjugated for the inverse transform), plus the bit-reversal
// permutation.
struct FftPlan {
  std::vector<double> tw_re, tw_im;
  std::vector<std::uint32_t> rev;
};

const FftPlan& plan_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, FftPlan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  FftPlan p;
  p.tw_re.resize(n / 2);
  p.tw_im.resize(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j) {
    const double ang =
        -2.0 * 3.14159265358979323846 * static_cast<double>(j) / static_cast<double>(n);
    p.tw_re[j] = std::cos(ang);
    p.tw_im[j] = std::sin(ang);
  }
  p.rev.resize(n);
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    p.rev[i] = static_cast<std::uint32_t>(j);
  }
  return plans.emplace(n, std::move(p)).first->second;
}

// Butterflies are evaluated in double regardless of the working precision.
template <typename Real>
void fft_impl(std::complex<Real>* x, std::size_t n, bool inverse) {
  if (!is_power_of_two(n)) throw ConfigError("FFT size must be a power of two");
  if (n <= 1) return;
  const FftPlan& plan = plan_for(n);
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t j = plan.rev[i];
    if (i < j) std::swap(x[i], x[j]);
  }
  const double im_sign = inverse ? -1.0 : 1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const double wr = plan.tw_re[k * stride];
        const double wi = im_sign * plan.tw_im[k * stride];
        const std::size_t a = i + k, b = i + k + half;
        const double ur = x[a].real(), ui = x[a].imag();
        const double xr = x[b].real(), xi = x[b].imag();
        const double vr = xr * wr - xi * wi;
        const double vi = xr * wi + xi * wr;
        x[a] = std::complex<Real>(static_cast<Real>(ur + vr),
                                  static_cast<Real>(ui + vi));
        x[b] = std::complex<Real>(static_cast<Real>(ur - vr),
                                  static_cast<Real>(ui - vi));
      }
    }
  }
  if (inverse) {
    const Real inv_n = static_cast<Real>(1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) x[i] *= inv_n;
  }
}

}  // namespace

void fft_inplace(std::complex<float>* x, std::size_t n, bool inverse) {
  fft_impl(x, n, inverse);
}

void fft_inplace(std::complex<double>* x, std::size_t n, bool inverse) {
  fft_impl(x, n, inverse);
}

std::vector<float> fft_convolve(const std::vector<float>& a,
                                const std::vector<float>& b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_power_of_two(out_len);
  std::vector<std::complex<double>> fa(n), fb(n);
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  fft_inplace(fa.data(), n, false);
  fft_inplace(fb.data(), n, false);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft_inplace(fa.data(), n, true);
  std::vector<float> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    out[i] = static_cast<float>(fa[i].real());
  }
  return out;
}

std::vector<double> fft_xcorr(const std::vector<float>& a,
                              const std::vector<float>& b, int max_lag) {
  // r[k] = sum_n a[n] b[n-k] is a convolved with time-reversed b, read out
  // around the zero-lag index.
  const std::size_t la = a.size(), lb = b.size();
  const std::size_t n = next_power_of_two(la + lb - 1);
  std::vector<std::complex<double>> fa(n), fb(n);
  for (std::size_t i = 0; i < la; ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < lb; ++i) fb[i] = b[lb - 1 - i];
  fft_inplace(fa.data(), n, false);
  fft_inplace(fb.data(), n, false);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft_inplace(fa.data(), n, true);
  // Full correlation index for lag k is (lb - 1 + k).
  std::vector<double> out(2 * static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int k = -max_lag; k <= max_lag; ++k) {
    long idx = static_cast<long>(lb) - 1 + k;
    if (idx >= 0 && idx < static_cast<long>(la + lb - 1)) {
      out[static_cast<std::size_t>(k + max_lag)] = fa[static_cast<std::size_t>(idx)].real();
    }
  }
  return out;
}

}  // namespace aec
