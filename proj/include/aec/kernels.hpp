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

// Data-parallel inner loops used by the DSP and training code.  Scalar
// reference kernels always exist; an AVX2+FMA variant is selected at runtime
// when the CPU supports it.  SIMD variants reorder reductions, so results
// match the scalar reference to a tolerance, not bitwise; the equivalence
// tests in test_kernels.cpp pin that tolerance.
//
// Double-precision overloads are provided for the gradient-check path and
// always run the scalar reference.

#ifndef AEC_KERNELS_HPP_
#define AEC_KERNELS_HPP_

#include <cstddef>

namespace aec {
namespace kernels {

enum class Backend { kScalar, kAvx2 };

// Backend chosen at startup from cpuid; override with set_backend (tests) or
// the AEC_KERNELS=scalar|avx2 environment variable.
Backend active_backend();
void set_backend(Backend b);
const char* backend_name(Backend b);
bool cpu_supports_avx2();

// ---- f32 primitives (dispatched) ----

// sum(a[i] * b[i])
float dot(const float* a, const float* b, std::size_t n);
// y[i] += alpha * x[i]
void axpy(float alpha, const float* x, float* y, std::size_t n);
// out[i] = a[i] + b[i]
void add(const float* a, const float* b, float* out, std::size_t n);
// out[i] = a[i] - b[i]
void sub(const float* a, const float* b, float* out, std::size_t n);
// out[i] = a[i] * b[i]
void mul(const float* a, const float* b, float* out, std::size_t n);
// x[i] *= alpha
void scale(float alpha, float* x, std::size_t n);
// sum(x[i]^2)
float sum_sq(const float* x, std::size_t n);
// y = W x, W row-major [m x n]
void matvec(const float* w, const float* x, float* y, std::size_t m,
            std::size_t n);
// y += W^T g, W row-major [m x n], g length m, y length n
void matvec_t_accum(const float* w, const float* g, float* y, std::size_t m,
                    std::size_t n);
// W += g x^T, W row-major [m x n], g length m, x length n
void outer_accum(const float* g, const float* x, float* w, std::size_t m,
                 std::size_t n);

// ---- f64 reference (scalar only; gradient-check precision) ----

double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void add(const double* a, const double* b, double* out, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
double sum_sq(const double* x, std::size_t n);
void matvec(const double* w, const double* x, double* y, std::size_t m,
            std::size_t n);
void matvec_t_accum(const double* w, const double* g, double* y, std::size_t m,
                    std::size_t n);
void outer_accum(const double* g, const double* x, double* w, std::size_t m,
                 std::size_t n);

namespace detail {

// Scalar reference implementations, exposed for equivalence tests.
float dot_scalar(const float* a, const float* b, std::size_t n);
void axpy_scalar(float alpha, const float* x, float* y, std::size_t n);
void add_scalar(const float* a, const float* b, float* out, std::size_t n);
void sub_scalar(const float* a, const float* b, float* out, std::size_t n);
void mul_scalar(const float* a, const float* b, float* out, std::size_t n);
void scale_scalar(float alpha, float* x, std::size_t n);
float sum_sq_scalar(const float* x, std::size_t n);
void matvec_scalar(const float* w, const float* x, float* y, std::size_t m,
                   std::size_t n);
void matvec_t_accum_scalar(const float* w, const float* g, float* y,
                           std::size_t m, std::size_t n);
void outer_accum_scalar(const float* g, const float* x, float* w,
                        std::size_t m, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
float dot_avx2(const float* a, const float* b, std::size_t n);
void axpy_avx2(float alpha, const float* x, float* y, std::size_t n);
void add_avx2(const float* a, const float* b, float* out, std::size_t n);
void sub_avx2(const float* a, const float* b, float* out, std::size_t n);
void mul_avx2(const float* a, const float* b, float* out, std::size_t n);
void scale_avx2(float alpha, float* x, std::size_t n);
float sum_sq_avx2(const float* x, std::size_t n);
void matvec_avx2(const float* w, const float* x, float* y, std::size_t m,
                 std::size_t n);
void matvec_t_accum_avx2(const float* w, const float* g, float* y,
                         std::size_t m, std::size_t n);
void outer_accum_avx2(const float* g, const float* x, float* w, std::size_t m,
                      std::size_t n);
#endif

}  // namespace detail

// Templated front door so numeric code can be generic over float/double.
template <typename Real>
struct Ops;

template <>
struct Ops<float> {
  static float dot(const float* a, const float* b, std::size_t n) {
    return kernels::dot(a, b, n);
  }
  static void axpy(float alpha, const float* x, float* y, std::size_t n) {
    kernels::axpy(alpha, x, y, n);
  }
  static void add(const float* a, const float* b, float* o, std::size_t n) {
    kernels::add(a, b, o, n);
  }
  static void sub(const float* a, const float* b, float* o, std::size_t n) {
    kernels::sub(a, b, o, n);
  }
  static void mul(const float* a, const float* b, float* o, std::size_t n) {
    kernels::mul(a, b, o, n);
  }
  static void scale(float alpha, float* x, std::size_t n) {
    kernels::scale(alpha, x, n);
  }
  static float sum_sq(const float* x, std::size_t n) {
    return kernels::sum_sq(x, n);
  }
  static void matvec(const float* w, const float* x, float* y, std::size_t m,
                     std::size_t n) {
    kernels::matvec(w, x, y, m, n);
  }
  static void matvec_t_accum(const float* w, const float* g, float* y,
                             std::size_t m, std::size_t n) {
    kernels::matvec_t_accum(w, g, y, m, n);
  }
  static void outer_accum(const float* g, const float* x, float* w,
                          std::size_t m, std::size_t n) {
    kernels::outer_accum(g, x, w, m, n);
  }
};

template <>
struct Ops<double> {
  static double dot(const double* a, const double* b, std::size_t n) {
    return kernels::dot(a, b, n);
  }
  static void axpy(double alpha, const double* x, double* y, std::size_t n) {
    kernels::axpy(alpha, x, y, n);
  }
  static void add(const double* a, const double* b, double* o, std::size_t n) {
    kernels::add(a, b, o, n);
  }
  static void sub(const double* a, const double* b, double* o, std::size_t n) {
    kernels::sub(a, b, o, n);
  }
  static void mul(const double* a, const double* b, double* o, std::size_t n) {
    kernels::mul(a, b, o, n);
  }
  static void scale(double alpha, double* x, std::size_t n) {
    kernels::scale(alpha, x, n);
  }
  static double sum_sq(const double* x, std::size_t n) {
    return kernels::sum_sq(x, n);
  }
  static void matvec(const double* w, const double* x, double* y,
                     std::size_t m, std::size_t n) {
    kernels::matvec(w, x, y, m, n);
  }
  static void matvec_t_accum(const double* w, const double* g, double* y,
                             std::size_t m, std::size_t n) {
    kernels::matvec_t_accum(w, g, y, m, n);
  }
  static void outer_accum(const double* g, const double* x, double* w,
                          std::size_t m, std::size_t n) {
    kernels::outer_accum(g, x, w, m, n);
  }
};

}  // namespace kernels
}  // namespace aec

#endif  // AEC_KERNELS_HPP_
