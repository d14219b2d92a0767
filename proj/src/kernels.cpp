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

// Runtime backend selection for the f32 kernels.

#include "aec/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace aec {
namespace kernels {

bool cpu_supports_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend initial_backend() {
  if (const char* env = std::getenv("AEC_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::kScalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_supports_avx2())
      return Backend::kAvx2;
  }
  return cpu_supports_avx2() ? Backend::kAvx2 : Backend::kScalar;
}

Backend g_backend = initial_backend();

}  // namespace

Backend active_backend() { return g_backend; }

void set_backend(Backend b) {
  if (b == Backend::kAvx2 && !cpu_supports_avx2()) b = Backend::kScalar;
  g_backend = b;
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

#if defined(__x86_64__) || defined(_M_X64)
#define AEC_DISPATCH(fn, ...)                          \
  (g_backend == Backend::kAvx2 ? detail::fn##_avx2(__VA_ARGS__) \
                               : detail::fn##_scalar(__VA_ARGS__))
#else
#define AEC_DISPATCH(fn, ...) detail::fn##_scalar(__VA_ARGS__)
#endif

float dot(const float* a, const float* b, std::size_t n) {
  return AEC_DISPATCH(dot, a, b, n);
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
  AEC_DISPATCH(axpy, alpha, x, y, n);
}

void add(const float* a, const float* b, float* out, std::size_t n) {
  AEC_DISPATCH(add, a, b, out, n);
}

void sub(const float* a, const float* b, float* out, std::size_t n) {
  AEC_DISPATCH(sub, a, b, out, n);
}

void mul(const float* a, const float* b, float* out, std::size_t n) {
  AEC_DISPATCH(mul, a, b, out, n);
}

void scale(float alpha, float* x, std::size_t n) {
  AEC_DISPATCH(scale, alpha, x, n);
}

float sum_sq(const float* x, std::size_t n) {
  return AEC_DISPATCH(sum_sq, x, n);
}

void matvec(const float* w, const float* x, float* y, std::size_t m,
            std::size_t n) {
  AEC_DISPATCH(matvec, w, x, y, m, n);
}

void matvec_t_accum(const float* w, const float* g, float* y, std::size_t m,
                    std::size_t n) {
  AEC_DISPATCH(matvec_t_accum, w, g, y, m, n);
}

void outer_accum(const float* g, const float* x, float* w, std::size_t m,
                 std::size_t n) {
  AEC_DISPATCH(outer_accum, g, x, w, m, n);
}

#undef AEC_DISPATCH

}  // namespace kernels
}  // namespace aec
