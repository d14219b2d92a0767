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

#ifndef AEC_ROOM_SIM_HPP_
#define AEC_ROOM_SIM_HPP_

#include <array>
#include <cstdint>
#include <string>

#include "aec/wave.hpp"

namespace aec {

using Vec3 = std::array<double, 3>;

double distance(const Vec3& a, const Vec3& b);

// Polar angle of (p - origin) against the vertical axis, in degrees:
// 90 means level with the origin, 0 straight above, 180 straight below.
double elevation_deg(const Vec3& origin, const Vec3& p);

enum class SourceKind { kTargetPath, kLoudspeakerPath };

struct RoomConfig {
  Vec3 dimensions{5.0, 4.0, 3.0};
  Vec3 mic_position{2.0, 2.0, 1.2};
  Vec3 loudspeaker_position{2.05, 2.0, 1.2};
  Vec3 target_position{3.5, 2.0, 1.2};
  double absorption = 0.3;
  int max_image_order = 10;
  double speed_of_sound = 343.0;

  double target_distance() const;
  double target_elevation_deg() const;
  void validate() const;
  std::string to_json() const;
  static RoomConfig from_json(const std::string& text);
};

struct Rir {
  std::vector<float> taps;
  int sample_rate = 16000;
  SourceKind source_kind = SourceKind::kTargetPath;

  double energy() const;
};

// Geometry ranges used when drawing rooms.  Distances follow a log-normal
// truncated to [min_distance, max_distance] and clipped to the room; the
// (mu, sigma) pair below was calibrated by Monte-Carlo so the post-rejection
// sample mean lands near 2.5 m.
struct RoomSampling {
  Vec3 dims_min{2.5, 2.5, 2.2};
  Vec3 dims_max{10.0, 10.0, 4.5};
  double wall_margin = 0.3;
  double min_distance = 0.25;
  double max_distance = 8.0;
  double min_elevation_deg = 45.0;
  double max_elevation_deg = 135.0;
  double distance_log_mu = 0.0;     // set in room_sim.cpp defaults
  double distance_log_sigma = 0.0;  // set in room_sim.cpp defaults
  double absorption_min = 0.1;
  double absorption_max = 0.6;
  double loudspeaker_offset = 0.05;
  int max_image_order = 10;

  void validate() const;
};

// Calibrated defaults (see RoomSampling note above).
RoomSampling default_room_sampling();

RoomConfig sample_room_config(std::uint64_t seed, const RoomSampling& sampling);

Rir compute_rir(const RoomConfig& room, SourceKind source,
                int sample_rate = 16000);

// Full linear convolution; output length len(wave) + len(rir) - 1.
Waveform apply_rir(const Waveform& wave, const Rir& rir);

}  // namespace aec

#endif  // AEC_ROOM_SIM_HPP_
