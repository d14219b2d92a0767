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

// Deterministic random numbers.  Everything downstream of a seed must be
// bit-reproducible across platforms, so distributions are hand-rolled on top
// of std::mt19937_64 (whose output sequence the standard pins down) instead
// of using std::uniform_*_distribution, which is implementation-defined.

#ifndef AEC_RNG_HPP_
#define AEC_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace aec {

// splitmix64; used to derive child seeds and to hash stream ids.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed), lineage_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Child stream keyed by id; derived from this rng's seed, not its draw
  // position, so forks are order-independent.
  Rng fork(uint64_t stream_id) const {
    return Rng(hash_combine(lineage_, stream_id));
  }

  uint64_t lineage() const { return lineage_; }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive range [lo, hi]; Lemire reduction.
  int uniform_int(int lo, int hi) {
    uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * range;
    return lo + static_cast<int>(m >> 64);
  }

  // Standard normal via Box-Muller; the pair's second value is cached so
  // draws stay cheap and the stream deterministic.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  float normal_f() { return static_cast<float>(normal()); }

 private:
  std::mt19937_64 gen_;
  uint64_t lineage_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace aec

#endif  // AEC_RNG_HPP_
