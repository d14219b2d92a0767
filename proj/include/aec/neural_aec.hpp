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

#ifndef AEC_NEURAL_AEC_HPP_
#define AEC_NEURAL_AEC_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "aec/data_pipeline.hpp"
#include "aec/frozen_encoder.hpp"
#include "aec/mel.hpp"
#include "aec/nn.hpp"
#include "aec/rng.hpp"
#include "aec/stft.hpp"
#include "aec/wave.hpp"

namespace aec {

// Autoregressive echo eraser: a stacked-LSTM encoder reads per-frame
// probe+reference log-mel features, an LSTM decoder predicts the clean
// target spectrogram one frame at a time (each step conditioned on the
// previous output frame through a small prenet), and a convolutional
// postnet adds a residual polish pass over the whole sequence.
struct ModelConfig {
  int mel_dim = 80;       // desk-scale runs typically use 24
  int encoder_layers = 2;
  int encoder_width = 48;
  int decoder_width = 48;
  int prenet_width = 32;
  float prenet_dropout = 0.5f;  // applied in training mode only
  int postnet_layers = 5;
  int postnet_filters = 32;
  int postnet_kernel = 5;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Weight on the latent-space term ramps linearly from zero to
// lambda_final over ramp_steps optimizer steps, then stays flat.
struct LossSchedule {
  double lambda_final = 0.01;
  long ramp_steps = 2000;

  void validate() const;
};

struct TrainConfig {
  int batch_size = 8;
  nn::AdamConfig adam;  // lr 1e-3, betas 0.9/0.999, eps 1e-8
  long max_steps = 200;
  std::uint64_t seed = 0;
  bool scheduled_sampling = true;
  bool use_specaugment = false;
  SpecAugmentConfig specaugment;  // consulted only when use_specaugment
  int threads = 1;  // batch examples processed in parallel; results are
                    // reduced in slot order, so the count never changes
                    // the outcome

  void validate() const;
};

struct ModelParams {
  ModelConfig config;
  nn::ParamMap<float> tensors;
};

ModelParams init_model_params(const ModelConfig& cfg, std::uint64_t seed);

// Decoder LSTM carry between autoregressive steps; plain data so a
// serialized copy restores the exact computation.
struct DecoderState {
  std::vector<float> h, c;
};

struct TrainLogEntry {
  long step = 0;
  double spectral = 0.0;
  double latent = 0.0;
  double lambda = 0.0;
  double total = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<TrainLogEntry> log;
};

// ---------------------------------------------------------------------------
// Pure schedule/bookkeeping helpers.

// Exactly floor(T/2) positions are true; the subset is uniform over all
// such subsets and a fixed function of the seed.
std::vector<bool> sampling_mask(std::uint64_t seed, int num_frames);

// min(1, step / ramp_steps) * lambda_final, for step >= 0.
double lambda_at(long step, const LossSchedule& sched);

double total_loss(double spectral, double latent, double lambda);

// ---------------------------------------------------------------------------
// Eager single-precision entry points (inference semantics: dropout off,
// batch norm uses running statistics).

// stacked: [T x M x 2] row-major, channel 0 probe / 1 reference (the
// stack_inputs layout).  Returns [T x encoder_width] row-major.
std::vector<float> encoder_forward(const std::vector<float>& stacked,
                                   int num_frames, const ModelParams& params);

// One autoregressive step: prenet(prev_frame) joined with the encoder
// frame drives the decoder LSTM; the projection emits the next mel frame.
// Pass a zero vector as prev_frame for the first step and a
// default-constructed state to start from zeros.
std::vector<float> decoder_step(const std::vector<float>& prev_frame,
                                const std::vector<float>& encoder_frame,
                                const ModelParams& params,
                                DecoderState* state);

// Convolutional residual correction over the whole sequence; returns
// input + residual.  pre_frames is [T x mel_dim] row-major.
std::vector<float> postnet_forward(const std::vector<float>& pre_frames,
                                   int num_frames, const ModelParams& params);

struct ForwardOutput {
  std::vector<float> y_pre, y_post;  // each [T x mel_dim] row-major
  int num_frames = 0;
  int mel_dim = 0;
};

// Full sequence pass.  mask[t] chooses the decoder input at step t>0:
// true feeds the model's own previous pre-postnet frame, false feeds the
// previous target frame.  target may be null only if mask is all-true
// (free-running mode).  Step 0 always consumes the zero go-frame.
ForwardOutput model_forward(const std::vector<float>& stacked, int num_frames,
                            const ModelParams& params,
                            const std::vector<bool>& mask,
                            const LogMelFrames* target);

// L1 + L2 on the pre-postnet frames plus L1 + L2 on the post-postnet
// frames, each term a mean over all elements.
double spectral_loss(const std::vector<float>& y_pre,
                     const std::vector<float>& y_post,
                     const std::vector<float>& target);

// Mean squared distance between the frozen encoder's latents for y_post
// and for the target.  Throws LatentMismatch if frame counts differ.
double latent_loss(const std::vector<float>& y_post,
                   const std::vector<float>& target, int num_frames,
                   const FrozenEncoder& encoder);

// ---------------------------------------------------------------------------
// Training / inference drivers.

// Optimizes from scratch (or from *resume, continuing at resume_step) with
// per-step batches, scheduled sampling, optional SpecAugment, and the
// ramped latent term (skipped when frozen is null).  Deterministic for a
// fixed seed; throws Diverged when the loss leaves the finite range.
TrainResult train(const std::vector<UtteranceExample>& dataset,
                  const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                  const LossSchedule& sched, const FrozenEncoder* frozen,
                  const ModelParams* resume = nullptr, long resume_step = 0);

// align -> features -> encoder -> free-running decode -> postnet ->
// mel pseudo-inverse -> phase recovery.  Output duration is within one
// hop of the probe's.
Waveform erase(const Waveform& probe, const Waveform& reference,
               const ModelParams& params, const StftConfig& stft_cfg,
               const MelConfig& mel_cfg, int griffin_lim_iters = 60);

// "NAEC" container (see checkpoint.hpp for the byte layout).  `step`
// records training progress for resumable runs; pass a negative value to
// omit it.
void save_checkpoint(const ModelParams& params, const std::string& path,
                     long step = -1);
ModelParams load_checkpoint(const std::string& path, long* step = nullptr);

// ---------------------------------------------------------------------------
// Tape-level graph builders, shared by the eager wrappers, the trainer,
// and the double-precision gradient checks.

namespace neural_detail {

inline std::string layer_name(const char* stem, int l, const char* part) {
  return std::string(stem) + ".l" + std::to_string(l) + "." + part;
}

// Bound parameter ids plus the raw map (batch-norm running statistics are
// read as plain constants, not tape nodes).
template <typename Real>
struct Graph {
  nn::Tape<Real>* tape;
  const nn::BoundParams<Real>* bound;
  const nn::ParamMap<Real>* raw;
  const ModelConfig* cfg;
};

// [T x 2M] input rows -> per-frame [H] hidden nodes after the stacked
// unidirectional LSTM.
template <typename Real>
std::vector<int> encoder_nodes(const Graph<Real>& g, int input) {
  nn::Tape<Real>& tape = *g.tape;
  const int t_len = tape.shape(input)[0];
  std::vector<int> xs(static_cast<std::size_t>(t_len));
  for (int t = 0; t < t_len; ++t) xs[static_cast<std::size_t>(t)] = tape.row(input, t);
  for (int l = 1; l <= g.cfg->encoder_layers; ++l) {
    const int w_ih = g.bound->id(layer_name("encoder", l, "w_ih"));
    const int w_hh = g.bound->id(layer_name("encoder", l, "w_hh"));
    const int b = g.bound->id(layer_name("encoder", l, "b"));
    int h = tape.zeros({g.cfg->encoder_width});
    int c = tape.zeros({g.cfg->encoder_width});
    for (int t = 0; t < t_len; ++t) {
      auto out = tape.lstm_cell(xs[static_cast<std::size_t>(t)], h, c, w_ih, w_hh, b);
      h = out.h;
      c = out.c;
      xs[static_cast<std::size_t>(t)] = out.h;
    }
  }
  return xs;
}

template <typename Real>
int prenet_nodes(const Graph<Real>& g, int frame, bool training, Rng* rng) {
  nn::Tape<Real>& tape = *g.tape;
  const Real keep = Real(1) - static_cast<Real>(g.cfg->prenet_dropout);
  int u = tape.relu_op(tape.linear(frame, g.bound->id("prenet.l1.w"),
                                   g.bound->id("prenet.l1.b")));
  if (training) u = tape.dropout(u, keep, *rng);
  u = tape.relu_op(tape.linear(u, g.bound->id("prenet.l2.w"),
                               g.bound->id("prenet.l2.b")));
  if (training) u = tape.dropout(u, keep, *rng);
  return u;
}

// Autoregressive decode over the encoder frames.  mask[t] = true feeds
// back the model's own previous projection; false feeds row t-1 of
// `target` (required unless the mask is all-true).  Returns the T
// pre-postnet frame nodes.
template <typename Real>
std::vector<int> decoder_nodes(const Graph<Real>& g,
                               const std::vector<int>& enc_rows, int target,
                               const std::vector<bool>& mask, bool training,
                               Rng* rng) {
  nn::Tape<Real>& tape = *g.tape;
  const int t_len = static_cast<int>(enc_rows.size());
  const int w_ih = g.bound->id("decoder.w_ih");
  const int w_hh = g.bound->id("decoder.w_hh");
  const int b = g.bound->id("decoder.b");
  const int proj_w = g.bound->id("proj.w");
  const int proj_b = g.bound->id("proj.b");
  int h = tape.zeros({g.cfg->decoder_width});
  int c = tape.zeros({g.cfg->decoder_width});
  std::vector<int> pre(static_cast<std::size_t>(t_len));
  for (int t = 0; t < t_len; ++t) {
    int prev;
    if (t == 0) {
      prev = tape.zeros({g.cfg->mel_dim});
    } else if (mask[static_cast<std::size_t>(t)]) {
      prev = pre[static_cast<std::size_t>(t - 1)];
    } else {
      if (target < 0) {
        throw ConfigError("teacher forcing requested without a target");
      }
      prev = tape.row(target, t - 1);
    }
    const int u = prenet_nodes(g, prev, training, rng);
    const int din = tape.concat(u, enc_rows[static_cast<std::size_t>(t)]);
    auto out = tape.lstm_cell(din, h, c, w_ih, w_hh, b);
    h = out.h;
    c = out.c;
    pre[static_cast<std::size_t>(t)] = tape.linear(h, proj_w, proj_b);
  }
  return pre;
}

// Batch-norm statistics harvested from a training-mode postnet pass, in
// layer order; the trainer owns the running-stat update.
template <typename Real>
struct BnBatchStats {
  std::vector<std::vector<Real>> mean, var;
};

inline constexpr double kBnEps = 1e-5;

template <typename Real>
int postnet_nodes(const Graph<Real>& g, int y_pre, bool training,
                  BnBatchStats<Real>* stats) {
  nn::Tape<Real>& tape = *g.tape;
  int x = y_pre;
  for (int l = 1; l <= g.cfg->postnet_layers; ++l) {
    x = tape.conv1d_same(x, g.bound->id(layer_name("postnet", l, "w")),
                         g.bound->id(layer_name("postnet", l, "b")));
    if (l == g.cfg->postnet_layers) break;  // final layer stays linear
    const int gamma = g.bound->id(layer_name("postnet", l, "bn.gamma"));
    const int beta = g.bound->id(layer_name("postnet", l, "bn.beta"));
    if (training) {
      std::vector<Real> mean, var;
      x = tape.batchnorm_train(x, gamma, beta, static_cast<Real>(kBnEps),
                               &mean, &var);
      if (stats) {
        stats->mean.push_back(std::move(mean));
        stats->var.push_back(std::move(var));
      }
    } else {
      x = tape.batchnorm_infer(
          x, gamma, beta,
          g.raw->at(layer_name("postnet", l, "bn.running_mean")).data,
          g.raw->at(layer_name("postnet", l, "bn.running_var")).data,
          static_cast<Real>(kBnEps));
    }
    x = tape.tanh_op(x);
  }
  return tape.add(y_pre, x);
}

template <typename Real>
struct ForwardNodes {
  int y_pre = -1;
  int y_post = -1;
  BnBatchStats<Real> bn;
};

// input: [T x 2M] leaf; target: [T x M] leaf or -1.
template <typename Real>
ForwardNodes<Real> build_forward(const Graph<Real>& g, int input, int target,
                                 const std::vector<bool>& mask, bool training,
                                 Rng* rng) {
  ForwardNodes<Real> out;
  const std::vector<int> enc = encoder_nodes(g, input);
  const std::vector<int> pre =
      decoder_nodes(g, enc, target, mask, training, rng);
  out.y_pre = g.tape->stack_rows(pre, g.cfg->mel_dim);
  out.y_post = postnet_nodes(g, out.y_pre, training, &out.bn);
  return out;
}

template <typename Real>
int spectral_loss_node(nn::Tape<Real>& tape, int y_pre, int y_post,
                       int target) {
  const int d_pre = tape.sub(y_pre, target);
  const int d_post = tape.sub(y_post, target);
  return tape.add(tape.add(tape.mean_abs(d_pre), tape.mean_sq(d_pre)),
                  tape.add(tape.mean_abs(d_post), tape.mean_sq(d_post)));
}

template <typename Real>
int latent_loss_node(nn::Tape<Real>& tape, int y_post, int target,
                     const FrozenEncoder& enc) {
  if (tape.shape(y_post)[0] != tape.shape(target)[0]) {
    throw LatentMismatch("latent sequences have different lengths");
  }
  const int a = frozen_encoder_apply(tape, enc, y_post);
  const int b = frozen_encoder_apply(tape, enc, target);
  return tape.mean_sq(tape.sub(a, b));
}

// Per-parameter initialization used by init_model_params; templated so the
// gradient checks can build an identically-shaped double model.
template <typename Real>
nn::ParamMap<Real> init_param_tensors(const ModelConfig& cfg,
                                      std::uint64_t seed) {
  cfg.validate();
  nn::ParamMap<Real> p;
  auto uinit = [&](const std::string& name, std::vector<int> shape,
                   double fan_in) {
    p.emplace(name, nn::uniform_init<Real>(std::move(shape),
                                           1.0 / std::sqrt(fan_in), seed,
                                           name));
  };
  // LSTM biases start at zero except the forget gate (slot 2 of 4), which
  // starts open at one.
  auto lstm_bias = [&](const std::string& name, int width) {
    nn::Tensor<Real> b = nn::Tensor<Real>::zeros({4 * width});
    for (int i = width; i < 2 * width; ++i) b.data[static_cast<std::size_t>(i)] = Real(1);
    p.emplace(name, std::move(b));
  };

  for (int l = 1; l <= cfg.encoder_layers; ++l) {
    const int in_dim = l == 1 ? 2 * cfg.mel_dim : cfg.encoder_width;
    uinit(layer_name("encoder", l, "w_ih"), {4 * cfg.encoder_width, in_dim},
          in_dim);
    uinit(layer_name("encoder", l, "w_hh"),
          {4 * cfg.encoder_width, cfg.encoder_width}, cfg.encoder_width);
    lstm_bias(layer_name("encoder", l, "b"), cfg.encoder_width);
  }
  uinit("prenet.l1.w", {cfg.prenet_width, cfg.mel_dim}, cfg.mel_dim);
  p.emplace("prenet.l1.b", nn::Tensor<Real>::zeros({cfg.prenet_width}));
  uinit("prenet.l2.w", {cfg.prenet_width, cfg.prenet_width},
        cfg.prenet_width);
  p.emplace("prenet.l2.b", nn::Tensor<Real>::zeros({cfg.prenet_width}));

  const int dec_in = cfg.prenet_width + cfg.encoder_width;
  uinit("decoder.w_ih", {4 * cfg.decoder_width, dec_in}, dec_in);
  uinit("decoder.w_hh", {4 * cfg.decoder_width, cfg.decoder_width},
        cfg.decoder_width);
  lstm_bias("decoder.b", cfg.decoder_width);

  uinit("proj.w", {cfg.mel_dim, cfg.decoder_width}, cfg.decoder_width);
  p.emplace("proj.b", nn::Tensor<Real>::zeros({cfg.mel_dim}));

  for (int l = 1; l <= cfg.postnet_layers; ++l) {
    const int cin = l == 1 ? cfg.mel_dim : cfg.postnet_filters;
    const int cout =
        l == cfg.postnet_layers ? cfg.mel_dim : cfg.postnet_filters;
    uinit(layer_name("postnet", l, "w"), {cout, cfg.postnet_kernel, cin},
          double(cfg.postnet_kernel) * cin);
    p.emplace(layer_name("postnet", l, "b"), nn::Tensor<Real>::zeros({cout}));
    if (l < cfg.postnet_layers) {
      nn::Tensor<Real> ones = nn::Tensor<Real>::zeros({cfg.postnet_filters});
      for (auto& v : ones.data) v = Real(1);
      p.emplace(layer_name("postnet", l, "bn.gamma"), ones);
      p.emplace(layer_name("postnet", l, "bn.beta"),
                nn::Tensor<Real>::zeros({cfg.postnet_filters}));
      p.emplace(layer_name("postnet", l, "bn.running_mean"),
                nn::Tensor<Real>::zeros({cfg.postnet_filters}));
      p.emplace(layer_name("postnet", l, "bn.running_var"), ones);
    }
  }
  return p;
}

}  // namespace neural_detail

}  // namespace aec

#endif  // AEC_NEURAL_AEC_HPP_
