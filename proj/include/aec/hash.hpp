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

#ifndef AEC_HASH_HPP_
#define AEC_HASH_HPP_

#include <cstdint>
#include <string>

namespace aec {

// FNV-1a, used wherever a stable content fingerprint lands in a manifest or
// report (std::hash is implementation-defined and would break byte-identical
// rerun guarantees).

// Continues a digest from a previous state; start from fnv1a64_basis.
inline constexpr std::uint64_t fnv1a64_basis = 0xcbf29ce484222325ULL;

inline std::uint64_t fnv1a64_fold(std::uint64_t h, const void* data,
                                  std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  return fnv1a64_fold(fnv1a64_basis, data, len);
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace aec

#endif  // AEC_HASH_HPP_
