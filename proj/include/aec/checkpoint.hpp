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

#ifndef AEC_CHECKPOINT_HPP_
#define AEC_CHECKPOINT_HPP_

#include <array>
#include <cstdint>
#include <string>

#include "aec/nn.hpp"

namespace aec {

// On-disk container shared by every model family in the toolkit; files
// differ only in their four-byte magic.  Layout (little-endian):
//   magic[4] | u32 version | u64 json_len | json bytes |
//   repeated tensor records: u32 name_len | name | u32 rank |
//   u64 dims[rank] | row-major f32 data.
// Tensors are written in name order, so save -> load -> save is
// byte-identical.
struct CheckpointPayload {
  std::string config_json;
  nn::ParamMap<float> tensors;
};

void write_checkpoint(const std::string& path,
                      const std::array<char, 4>& magic, std::uint32_t version,
                      const CheckpointPayload& payload);

// Throws MissingArtifact if the file does not exist, CorruptCheckpoint on a
// magic/version mismatch or any truncation.
CheckpointPayload read_checkpoint(const std::string& path,
                                  const std::array<char, 4>& magic,
                                  std::uint32_t expected_version);

}  // namespace aec

#endif  // AEC_CHECKPOINT_HPP_
