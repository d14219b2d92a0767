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

#include "aec/wave.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "aec/errors.hpp"
#include "aec/kernels.hpp"

namespace aec {

const char* signal_role_name(SignalRole role) {
  switch (role) {
    case SignalRole::kTarget: return "target";
    case SignalRole::kReference: return "reference";
    case SignalRole::kEchoedReference: return "echoed_reference";
    case SignalRole::kResidual: return "residual";
    case SignalRole::kProbe: return "probe";
    case SignalRole::kErased: return "erased";
    case SignalRole::kNoise: return "noise";
    case SignalRole::kUnspecified: return "unspecified";
  }
  return "unspecified";
}

double Waveform::power() const {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (float s : samples) acc += static_cast<double>(s) * s;
  return acc / static_cast<double>(samples.size());
}

double Waveform::rms() const { return std::sqrt(power()); }

void Waveform::validate() const {
  if (sample_rate <= 0) throw ConfigError("waveform sample rate must be > 0");
  if (samples.empty()) throw ShortInput("waveform has no samples");
  for (float s : samples) {
    if (!std::isfinite(s)) throw ConfigError("waveform contains non-finite samples");
  }
}

namespace {

struct RiffReader {
  std::ifstream in;
  explicit RiffReader(const std::string& path)
      : in(path, std::ios::binary) {
    if (!in) throw IoError("cannot open " + path);
  }
  template <typename T>
  T read() {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw CorruptCheckpoint("truncated WAV file");
    return v;
  }
  void read_bytes(char* dst, std::size_t n) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (!in) throw CorruptCheckpoint("truncated WAV file");
  }
  void skip(std::size_t n) { in.seekg(static_cast<std::streamoff>(n), std::ios::cur); }
};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

}  // namespace

Waveform read_wav(const std::string& path) {
  RiffReader r(path);
  char tag[4];
  r.read_bytes(tag, 4);
  if (std::memcmp(tag, "RIFF", 4) != 0) throw IoError(path + ": not a RIFF file");
  r.read<uint32_t>();  // riff size, unused
  r.read_bytes(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0) throw IoError(path + ": not a WAVE file");

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  Waveform wave;

  while (true) {
    if (!r.in.read(tag, 4)) break;
    uint32_t chunk_size = r.read<uint32_t>();
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = r.read<uint16_t>();
      channels = r.read<uint16_t>();
      rate = r.read<uint32_t>();
      r.read<uint32_t>();  // byte rate
      r.read<uint16_t>();  // block align
      bits = r.read<uint16_t>();
      if (chunk_size > 16) r.skip(chunk_size - 16);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw IoError(path + ": data chunk before fmt chunk");
      if (channels != 1) throw IoError(path + ": only mono WAV is supported");
      wave.sample_rate = static_cast<int>(rate);
      if (format == 1 && bits == 16) {
        std::size_t n = chunk_size / 2;
        std::vector<int16_t> raw(n);
        if (n > 0) r.read_bytes(reinterpret_cast<char*>(raw.data()), chunk_size);
        wave.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          wave.samples[i] = static_cast<float>(raw[i]) / 32768.0f;
        }
      } else if (format == 3 && bits == 32) {
        std::size_t n = chunk_size / 4;
        wave.samples.resize(n);
        if (n > 0)
          r.read_bytes(reinterpret_cast<char*>(wave.samples.data()), chunk_size);
      } else {
        throw IoError(path + ": unsupported WAV encoding (PCM16 or float32 only)");
      }
      return wave;
    } else {
      r.skip(chunk_size + (chunk_size & 1));
    }
  }
  throw IoError(path + ": no data chunk found");
}

void write_wav(const std::string& path, const Waveform& wave,
               WavFormat format) {
  wave.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);

  const uint32_t n = static_cast<uint32_t>(wave.samples.size());
  const uint16_t bits = (format == WavFormat::kPcm16) ? 16 : 32;
  const uint16_t bytes_per = bits / 8;
  const uint32_t data_size = n * bytes_per;

  out.write("RIFF", 4);
  put<uint32_t>(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put<uint32_t>(out, 16);
  put<uint16_t>(out, format == WavFormat::kPcm16 ? 1 : 3);
  put<uint16_t>(out, 1);  // mono
  put<uint32_t>(out, static_cast<uint32_t>(wave.sample_rate));
  put<uint32_t>(out, static_cast<uint32_t>(wave.sample_rate) * bytes_per);
  put<uint16_t>(out, bytes_per);
  put<uint16_t>(out, bits);
  out.write("data", 4);
  put<uint32_t>(out, data_size);

  if (format == WavFormat::kPcm16) {
    for (float s : wave.samples) {
      float clipped = std::fmin(1.0f, std::fmax(-1.0f, s));
      int v = static_cast<int>(std::lrintf(clipped * 32767.0f));
      put<int16_t>(out, static_cast<int16_t>(v));
    }
  } else {
    out.write(reinterpret_cast<const char*>(wave.samples.data()),
              static_cast<std::streamsize>(data_size));
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace aec
