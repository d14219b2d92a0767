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

#ifndef AEC_FROZEN_ENCODER_HPP_
#define AEC_FROZEN_ENCODER_HPP_

#include <cstdint>
#include <string>

#include "aec/errors.hpp"
#include "aec/nn.hpp"

namespace aec {

// The two proxy recognizer encoder families.  kConv is a stack of
// same-padded temporal convolutions; kLstm is a stack of unidirectional
// LSTM layers.  Neither downsamples, so a [T x M] feature matrix maps to a
// [T x width] latent matrix.
enum class ProxyArch { kConv, kLstm };

// A feature encoder whose parameters are held fixed.  It is replayed on a
// gradient tape so that losses computed in its latent space backpropagate
// into the *input* features; its own tensors enter the tape as copies and
// can never be modified through it.
struct FrozenEncoder {
  ProxyArch arch = ProxyArch::kConv;
  int mel_dim = 80;
  int width = 32;
  int layers = 2;
  int kernel = 5;  // conv arch only
  nn::ParamMap<float> params;
};

// Parameter names: conv layers use enc.l{i}.w [W,K,Cin] / enc.l{i}.b [W];
// LSTM layers use enc.l{i}.w_ih [4W,Cin] / enc.l{i}.w_hh [4W,W] /
// enc.l{i}.b [4W].  Layer indices are 1-based.
FrozenEncoder init_frozen_encoder(ProxyArch arch, int mel_dim, int width,
                                  int layers, int kernel, std::uint64_t seed);

namespace frozen_detail {

template <typename Real>
nn::Tensor<Real> cast_tensor(const nn::Tensor<float>& t) {
  nn::Tensor<Real> out;
  out.shape = t.shape;
  out.data.assign(t.data.begin(), t.data.end());
  return out;
}

}  // namespace frozen_detail

// Builds the encoder graph over `features` ([T x M] node) with parameter
// nodes supplied by `node_of(name)`, returning a [T x width] latent node.
// The resolver indirection lets the same graph serve a frozen replay
// (parameters leafed in as copies) and recognizer training (parameters
// bound for gradient harvesting).
template <typename Real, typename Resolver>
int proxy_encoder_graph(nn::Tape<Real>& tape, ProxyArch arch, int layers,
                        int width, int features, Resolver&& node_of) {
  const auto& fs = tape.shape(features);
  if (fs.size() != 2) {
    throw ShapeMismatch("proxy encoder expects rank-2 features");
  }
  if (arch == ProxyArch::kConv) {
    int x = features;
    for (int l = 1; l <= layers; ++l) {
      const std::string base = "enc.l" + std::to_string(l);
      x = tape.relu_op(tape.conv1d_same(x, node_of(base + ".w"),
                                        node_of(base + ".b")));
    }
    return x;
  }

  const int t_len = fs[0];
  std::vector<int> xs(static_cast<std::size_t>(t_len));
  for (int t = 0; t < t_len; ++t) xs[static_cast<std::size_t>(t)] = tape.row(features, t);
  for (int l = 1; l <= layers; ++l) {
    const std::string base = "enc.l" + std::to_string(l);
    const int w_ih = node_of(base + ".w_ih");
    const int w_hh = node_of(base + ".w_hh");
    const int b = node_of(base + ".b");
    int h = tape.zeros({width});
    int c = tape.zeros({width});
    for (int t = 0; t < t_len; ++t) {
      auto out = tape.lstm_cell(xs[static_cast<std::size_t>(t)], h, c, w_ih, w_hh, b);
      h = out.h;
      c = out.c;
      xs[static_cast<std::size_t>(t)] = out.h;
    }
  }
  return tape.stack_rows(xs, width);
}

// Runs the encoder over `features` ([T x mel_dim] node), returning a
// [T x width] latent node.
template <typename Real>
int frozen_encoder_apply(nn::Tape<Real>& tape, const FrozenEncoder& enc,
                         int features) {
  const auto& fs = tape.shape(features);
  if (fs.size() != 2 || fs[1] != enc.mel_dim) {
    throw ShapeMismatch("frozen encoder expects [T x " +
                        std::to_string(enc.mel_dim) + "] features");
  }
  auto leaf_of = [&](const std::string& name) {
    auto it = enc.params.find(name);
    if (it == enc.params.end()) {
      throw MissingArtifact("frozen encoder lacks tensor " + name);
    }
    return tape.leaf(frozen_detail::cast_tensor<Real>(it->second));
  };
  return proxy_encoder_graph(tape, enc.arch, enc.layers, enc.width, features,
                             leaf_of);
}

}  // namespace aec

#endif  // AEC_FROZEN_ENCODER_HPP_
