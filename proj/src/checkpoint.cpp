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

#include "aec/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "aec/errors.hpp"

namespace aec {
namespace {

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::ifstream& in, const std::string& what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw CorruptCheckpoint("truncated while reading " + what);
  return v;
}

}  // namespace

void write_checkpoint(const std::string& path,
                      const std::array<char, 4>& magic, std::uint32_t version,
                      const CheckpointPayload& payload) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(magic.data(), 4);
  put(out, version);
  put(out, static_cast<std::uint64_t>(payload.config_json.size()));
  out.write(payload.config_json.data(),
            static_cast<std::streamsize>(payload.config_json.size()));
  for (const auto& [name, tensor] : payload.tensors) {
    put(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put(out, static_cast<std::uint32_t>(tensor.shape.size()));
    for (int d : tensor.shape) put(out, static_cast<std::uint64_t>(d));
    out.write(reinterpret_cast<const char*>(tensor.data.data()),
              static_cast<std::streamsize>(tensor.data.size() * sizeof(float)));
  }
  if (!out) throw IoError("write failed for " + path);
}

CheckpointPayload read_checkpoint(const std::string& path,
                                  const std::array<char, 4>& magic,
                                  std::uint32_t expected_version) {
  if (!std::filesystem::exists(path)) {
    throw MissingArtifact("no checkpoint at " + path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");

  std::array<char, 4> got{};
  in.read(got.data(), 4);
  if (!in || std::memcmp(got.data(), magic.data(), 4) != 0) {
    throw CorruptCheckpoint("bad magic in " + path);
  }
  const auto version = get<std::uint32_t>(in, "version");
  if (version != expected_version) {
    throw CorruptCheckpoint("unsupported checkpoint version " +
                            std::to_string(version));
  }
  CheckpointPayload payload;
  const auto json_len = get<std::uint64_t>(in, "config length");
  payload.config_json.resize(json_len);
  in.read(payload.config_json.data(), static_cast<std::streamsize>(json_len));
  if (!in) throw CorruptCheckpoint("truncated config block");

  while (true) {
    std::uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    if (in.eof() && in.gcount() == 0) break;  // clean end of the record list
    if (!in) throw CorruptCheckpoint("truncated tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw CorruptCheckpoint("truncated tensor name");
    const auto rank = get<std::uint32_t>(in, "tensor rank");
    nn::Tensor<float> tensor;
    std::size_t numel = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const auto d = get<std::uint64_t>(in, "tensor dimension");
      tensor.shape.push_back(static_cast<int>(d));
      numel *= static_cast<std::size_t>(d);
    }
    tensor.data.resize(numel);
    in.read(reinterpret_cast<char*>(tensor.data.data()),
            static_cast<std::streamsize>(numel * sizeof(float)));
    if (!in) throw CorruptCheckpoint("truncated data for tensor " + name);
    payload.tensors.emplace(std::move(name), std::move(tensor));
  }
  return payload;
}

}  // namespace aec
