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

#ifndef AEC_WAVE_HPP_
#define AEC_WAVE_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace aec {

// The pipeline tracks which of the named signals a buffer holds.
enum class SignalRole {
  kTarget,            // the user's clean speech
  kReference,         // what the device is playing
  kEchoedReference,   // reference after loudspeaker + room
  kResidual,          // reverberant target + background noise
  kProbe,             // microphone mixture: residual + echoed reference
  kErased,            // canceller output
  kNoise,
  kUnspecified,
};

const char* signal_role_name(SignalRole role);

struct Waveform {
  std::vector<float> samples;
  int sample_rate = 16000;
  SignalRole role = SignalRole::kUnspecified;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }

  // Mean squared amplitude.
  double power() const;
  double rms() const;

  // Throws if samples are non-finite, empty, or the rate is non-positive.
  void validate() const;

  Waveform with_role(SignalRole r) const {
    Waveform w = *this;
    w.role = r;
    return w;
  }
};

// Mono RIFF only.  PCM 16-bit and IEEE float 32-bit are supported; writing
// picks the format requested.  Sample-rate conversion is out of scope: the
// file's rate is returned as-is and mixing code treats mismatches as errors.
enum class WavFormat { kPcm16, kFloat32 };

Waveform read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& wave,
               WavFormat format = WavFormat::kFloat32);

}  // namespace aec

#endif  // AEC_WAVE_HPP_
