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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "aec/errors.hpp"
#include "aec/room_sim.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace aec;
using namespace aec::testing;

namespace {

RoomConfig fixture_room() {
  RoomConfig r;
  r.dimensions = {4.0, 5.0, 3.0};
  r.mic_position = {1.0, 2.0, 1.5};
  r.loudspeaker_position = {1.05, 2.0, 1.5};
  r.target_position = {2.2, 3.4, 1.1};
  r.absorption = 0.4;
  return r;
}

double tail_energy(const Rir& rir, std::size_t direct_idx) {
  double e = 0.0;
  for (std::size_t i = direct_idx + 1; i < rir.taps.size(); ++i) {
    e += static_cast<double>(rir.taps[i]) * rir.taps[i];
  }
  return e;
}

}  // namespace

TEST_CASE("full absorption leaves only the direct path") {
  RoomConfig room = fixture_room();
  room.absorption = 1.0;
  const Rir rir = compute_rir(room, SourceKind::kTargetPath);
  // Direct distance 1.886796226 m -> sample 88, amplitude 1/d.
  REQUIRE(rir.taps.size() == 89);
  for (std::size_t i = 0; i < 88; ++i) CHECK(rir.taps[i] == 0.0f);
  CHECK(rir.taps[88] == doctest::Approx(1.0 / 1.886796226).epsilon(1e-6));
}

TEST_CASE("first-order images match the hand enumeration") {
  // Frozen reference (tests/oracle_gen note: room 4x5x3, mic (1,2,1.5),
  // source (2.2,3.4,1.1), absorption 0.4): direct tap plus one image per
  // wall, all landing on distinct samples.
  RoomConfig room = fixture_room();
  room.max_image_order = 1;
  const Rir rir = compute_rir(room, SourceKind::kTargetPath);
  struct Tap {
    std::size_t idx;
    double amp;
  };
  const Tap want[7] = {
      {88, 0.529998940},  {149, 0.188236742}, {164, 0.170664037},
      {180, 0.155126307}, {223, 0.125766542}, {234, 0.119617833},
      {259, 0.108182767},
  };
  REQUIRE(rir.taps.size() == 260);
  std::size_t nonzero = 0;
  for (float t : rir.taps) {
    if (t != 0.0f) ++nonzero;
  }
  CHECK(nonzero == 7);
  for (const Tap& t : want) {
    CHECK(rir.taps[t.idx] == doctest::Approx(t.amp).epsilon(1e-6));
  }
}

TEST_CASE("higher absorption strictly reduces reflected energy") {
  RoomConfig room = fixture_room();
  room.absorption = 0.2;
  const Rir soft = compute_rir(room, SourceKind::kTargetPath);
  room.absorption = 0.4;
  const Rir hard = compute_rir(room, SourceKind::kTargetPath);
  CHECK(tail_energy(hard, 88) < tail_energy(soft, 88));
}

TEST_CASE("RIR energy is monotone over an absorption grid") {
  RoomConfig room = fixture_room();
  double prev = 1e300;
  for (double a : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
    room.absorption = a;
    const Rir rir = compute_rir(room, SourceKind::kTargetPath);
    CHECK(rir.energy() <= prev);
    prev = rir.energy();
  }
}

TEST_CASE("direct-path delay matches geometry for 1000 random rooms") {
  const RoomSampling sampling = default_room_sampling();
  for (int i = 0; i < 1000; ++i) {
    const RoomConfig room = sample_room_config(5000 + i, sampling);
    const Rir rir = compute_rir(room, SourceKind::kTargetPath);
    const long want = std::lround(room.target_distance() / 343.0 * 16000.0);
    long first = -1;
    for (std::size_t n = 0; n < rir.taps.size(); ++n) {
      if (rir.taps[n] != 0.0f) {
        first = static_cast<long>(n);
        break;
      }
    }
    REQUIRE(first >= 0);
    CHECK(std::labs(first - want) <= 1);
  }
}

TEST_CASE("sampled rooms satisfy the geometric envelope") {
  const RoomSampling sampling = default_room_sampling();
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const RoomConfig room = sample_room_config(123456 + i, sampling);
    const double d = room.target_distance();
    const double el = room.target_elevation_deg();
    CHECK(d >= 0.25);
    CHECK(d <= 8.0);
    CHECK(el >= 45.0);
    CHECK(el <= 135.0);
    sum += d;
  }
  const double mean = sum / n;
  CHECK(mean >= 2.3);
  CHECK(mean <= 2.7);
}

TEST_CASE("room sampling is deterministic per seed") {
  const RoomSampling sampling = default_room_sampling();
  const RoomConfig a = sample_room_config(42, sampling);
  const RoomConfig b = sample_room_config(42, sampling);
  const RoomConfig c = sample_room_config(43, sampling);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.to_json() != c.to_json());
}

TEST_CASE("infeasible constraints are rejected") {
  RoomSampling sampling = default_room_sampling();
  sampling.min_distance = 50.0;
  CHECK_THROWS_AS(sample_room_config(1, sampling), Infeasible);
  RoomSampling inverted = default_room_sampling();
  inverted.min_elevation_deg = 120.0;
  inverted.max_elevation_deg = 60.0;
  CHECK_THROWS_AS(sample_room_config(1, inverted), Infeasible);
}

TEST_CASE("room config JSON round-trips") {
  const RoomConfig room = fixture_room();
  const RoomConfig back = RoomConfig::from_json(room.to_json());
  CHECK(back.dimensions == room.dimensions);
  CHECK(back.mic_position == room.mic_position);
  CHECK(back.loudspeaker_position == room.loudspeaker_position);
  CHECK(back.target_position == room.target_position);
  CHECK(back.absorption == room.absorption);
  CHECK(back.max_image_order == room.max_image_order);
  CHECK_THROWS_AS(RoomConfig::from_json("{not json"), ConfigError);
}

TEST_CASE("a delta RIR is the identity") {
  const Waveform x = make_noise(4000, 3);
  Rir delta;
  delta.taps = {1.0f};
  const Waveform y = apply_rir(x, delta);
  REQUIRE(y.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(y.samples[i] == doctest::Approx(x.samples[i]).epsilon(1e-6));
  }
}

TEST_CASE("a delayed scaled delta shifts and scales") {
  const Waveform x = make_noise(2000, 4);
  Rir rir;
  rir.taps.assign(11, 0.0f);
  rir.taps[10] = 0.5f;
  const Waveform y = apply_rir(x, rir);
  REQUIRE(y.size() == x.size() + 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(std::fabs(y.samples[i]) <= 1e-6f);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(y.samples[i + 10] ==
          doctest::Approx(0.5f * x.samples[i]).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("FFT convolution matches the direct form") {
  const Waveform x = make_noise(16000, 5);
  Rir rir;
  rir.taps.resize(100);
  Rng rng(77);
  for (auto& t : rir.taps) t = static_cast<float>(rng.uniform(-0.3, 0.3));
  const Waveform y = apply_rir(x, rir);

  // Brute-force O(N*M) reference in double precision.
  std::vector<double> want(x.size() + rir.taps.size() - 1, 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    for (std::size_t k = 0; k < rir.taps.size(); ++k) {
      want[n + k] += static_cast<double>(x.samples[n]) * rir.taps[k];
    }
  }
  REQUIRE(y.size() == want.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    num += (y.samples[i] - want[i]) * (y.samples[i] - want[i]);
    den += want[i] * want[i];
  }
  CHECK(std::sqrt(num / den) <= 1e-5);
}

TEST_CASE("apply_rir is linear in the waveform") {
  const Waveform x = make_noise(3000, 6);
  const Waveform y = make_noise(3000, 7);
  Waveform mix;
  mix.samples.resize(3000);
  for (std::size_t i = 0; i < 3000; ++i) {
    mix.samples[i] = 0.4f * x.samples[i] - 1.1f * y.samples[i];
  }
  const Rir rir = compute_rir(fixture_room(), SourceKind::kTargetPath);
  const Waveform cx = apply_rir(x, rir);
  const Waveform cy = apply_rir(y, rir);
  const Waveform cm = apply_rir(mix, rir);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < cm.size(); ++i) {
    const double want = 0.4 * cx.samples[i] - 1.1 * cy.samples[i];
    num += (cm.samples[i] - want) * (cm.samples[i] - want);
    den += want * want;
  }
  CHECK(std::sqrt(num / den) <= 1e-5);
}

TEST_CASE("apply_rir rejects mismatched rates") {
  Waveform x = make_noise(1000, 8);
  x.sample_rate = 8000;
  Rir rir;
  rir.taps = {1.0f};
  rir.sample_rate = 16000;
  CHECK_THROWS_AS(apply_rir(x, rir), RateMismatch);
}
