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

#ifndef AEC_FFT_HPP_
#define AEC_FFT_HPP_

#include <complex>
#include <cstddef>
#include <vector>

namespace aec {

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

// In-place iterative radix-2 transform; n must be a power of two.
// The inverse applies the 1/n normalization.
void fft_inplace(std::complex<float>* x, std::size_t n, bool inverse);
void fft_inplace(std::complex<double>* x, std::size_t n, bool inverse);

// Full linear convolution via zero-padded FFT; output length a.size() +
// b.size() - 1.  Equivalent to direct convolution within float rounding.
std::vector<float> fft_convolve(const std::vector<float>& a,
                                const std::vector<float>& b);

// Cross-correlation r[k] = sum_n a[n] * b[n - k] for k in
// [-max_lag, max_lag]; result index 0 corresponds to k = -max_lag.
std::vector<double> fft_xcorr(const std::vector<float>& a,
                              const std::vector<float>& b, int max_lag);

}  // namespace aec

#endif  // AEC_FFT_HPP_
