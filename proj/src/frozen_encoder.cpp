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

#include "aec/frozen_encoder.hpp"

#include <cmath>

namespace aec {

FrozenEncoder init_frozen_encoder(ProxyArch arch, int mel_dim, int width,
                                  int layers, int kernel, std::uint64_t seed) {
  if (mel_dim <= 0 || width <= 0 || layers <= 0 || kernel <= 0) {
    throw ConfigError("frozen encoder dimensions must be positive");
  }
  FrozenEncoder enc;
  enc.arch = arch;
  enc.mel_dim = mel_dim;
  enc.width = width;
  enc.layers = layers;
  enc.kernel = kernel;
  for (int l = 1; l <= layers; ++l) {
    const std::string base = "enc.l" + std::to_string(l);
    const int in_dim = l == 1 ? mel_dim : width;
    if (arch == ProxyArch::kConv) {
      enc.params.emplace(
          base + ".w",
          nn::uniform_init<float>({width, kernel, in_dim},
                                  1.0 / std::sqrt(double(kernel) * in_dim),
                                  seed, base + ".w"));
      enc.params.emplace(base + ".b",
                         nn::Tensor<float>::zeros({width}));
    } else {
      enc.params.emplace(
          base + ".w_ih",
          nn::uniform_init<float>({4 * width, in_dim},
                                  1.0 / std::sqrt(double(in_dim)), seed,
                                  base + ".w_ih"));
      enc.params.emplace(
          base + ".w_hh",
          nn::uniform_init<float>({4 * width, width},
                                  1.0 / std::sqrt(double(width)), seed,
                                  base + ".w_hh"));
      enc.params.emplace(base + ".b",
                         nn::Tensor<float>::zeros({4 * width}));
    }
  }
  return enc;
}

}  // namespace aec
