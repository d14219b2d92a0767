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

// Scalar reference kernels.  These define semantics; SIMD variants must
// agree with them to the tolerance pinned in test_kernels.cpp.

#include "aec/kernels.hpp"

namespace aec {
namespace kernels {
namespace detail {

float dot_scalar(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(float alpha, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_scalar(const float* a, const float* b, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar(const float* a, const float* b, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_scalar(const float* a, const float* b, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_scalar(float alpha, float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

float sum_sq_scalar(const float* x, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void matvec_scalar(const float* w, const float* x, float* y, std::size_t m,
                   std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) y[r] = dot_scalar(w + r * n, x, n);
}

void matvec_t_accum_scalar(const float* w, const float* g, float* y,
                           std::size_t m, std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) axpy_scalar(g[r], w + r * n, y, n);
}

void outer_accum_scalar(const float* g, const float* x, float* w,
                        std::size_t m, std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) axpy_scalar(g[r], x, w + r * n, n);
}

}  // namespace detail

// f64 overloads: scalar only.

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double sum_sq(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void matvec(const double* w, const double* x, double* y, std::size_t m,
            std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) y[r] = dot(w + r * n, x, n);
}

void matvec_t_accum(const double* w, const double* g, double* y, std::size_t m,
                    std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) axpy(g[r], w + r * n, y, n);
}

void outer_accum(const double* g, const double* x, double* w, std::size_t m,
                 std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) axpy(g[r], x, w + r * n, n);
}

}  // namespace kernels
}  // namespace aec
