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

#include "aec/neural_aec.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <thread>

#include "aec/align.hpp"
#include "aec/checkpoint.hpp"
#include "aec/errors.hpp"
#include "aec/griffin_lim.hpp"
#include "aec/hash.hpp"
#include "aec/kernels.hpp"
#include "json.hpp"

namespace aec {
namespace {

using neural_detail::Graph;
using nlohmann::json;

constexpr std::array<char, 4> kModelMagic{'N', 'A', 'E', 'C'};
constexpr std::uint32_t kModelVersion = 1;
constexpr double kBnMomentum = 0.1;

// Distinct stream tags so the per-step batch pick, sampling masks, dropout,
// and SpecAugment never share a generator.
constexpr std::uint64_t kBatchStream = 0x6261746368ULL;      // "batch"
constexpr std::uint64_t kMaskStream = 0x6d61736bULL;         // "mask"
constexpr std::uint64_t kDropStream = 0x64726f70ULL;         // "drop"
constexpr std::uint64_t kAugmentStream = 0x617567ULL;        // "aug"

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream,
                          long step, int slot) {
  return hash_combine(hash_combine(seed, stream),
                      hash_combine(static_cast<std::uint64_t>(step),
                                   static_cast<std::uint64_t>(slot)));
}

json config_to_json(const ModelConfig& cfg) {
  return json{{"mel_dim", cfg.mel_dim},
              {"encoder_layers", cfg.encoder_layers},
              {"encoder_width", cfg.encoder_width},
              {"decoder_width", cfg.decoder_width},
              {"prenet_width", cfg.prenet_width},
              {"prenet_dropout", cfg.prenet_dropout},
              {"postnet_layers", cfg.postnet_layers},
              {"postnet_filters", cfg.postnet_filters},
              {"postnet_kernel", cfg.postnet_kernel}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig cfg;
  try {
    cfg.mel_dim = j.at("mel_dim").get<int>();
    cfg.encoder_layers = j.at("encoder_layers").get<int>();
    cfg.encoder_width = j.at("encoder_width").get<int>();
    cfg.decoder_width = j.at("decoder_width").get<int>();
    cfg.prenet_width = j.at("prenet_width").get<int>();
    cfg.prenet_dropout = j.at("prenet_dropout").get<float>();
    cfg.postnet_layers = j.at("postnet_layers").get<int>();
    cfg.postnet_filters = j.at("postnet_filters").get<int>();
    cfg.postnet_kernel = j.at("postnet_kernel").get<int>();
  } catch (const json::exception& e) {
    throw CorruptCheckpoint(std::string("bad model config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

// Binds everything needed for one tape pass over one example.
struct TapeRun {
  nn::Tape<float> tape;
  std::unique_ptr<nn::BoundParams<float>> bound;
  Graph<float> graph{};

  TapeRun(const ModelParams& params) {
    bound = std::make_unique<nn::BoundParams<float>>(tape, params.tensors);
    graph = Graph<float>{&tape, bound.get(), &params.tensors, &params.config};
  }
};

}  // namespace

void ModelConfig::validate() const {
  if (mel_dim <= 0 || encoder_layers <= 0 || encoder_width <= 0 ||
      decoder_width <= 0 || prenet_width <= 0 || postnet_layers <= 0 ||
      postnet_filters <= 0 || postnet_kernel <= 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (prenet_dropout < 0.0f || prenet_dropout >= 1.0f) {
    throw ConfigError("prenet_dropout must lie in [0, 1)");
  }
}

void LossSchedule::validate() const {
  if (lambda_final < 0.0) throw ConfigError("lambda_final must be >= 0");
  if (ramp_steps <= 0) throw ConfigError("ramp_steps must be positive");
}

void TrainConfig::validate() const {
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
  if (threads <= 0) throw ConfigError("threads must be positive");
  if (use_specaugment) specaugment.validate();
}

ModelParams init_model_params(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams params;
  params.config = cfg;
  params.tensors = neural_detail::init_param_tensors<float>(cfg, seed);
  return params;
}

std::vector<bool> sampling_mask(std::uint64_t seed, int num_frames) {
  if (num_frames < 0) throw ConfigError("num_frames must be >= 0");
  std::vector<bool> mask(static_cast<std::size_t>(num_frames), false);
  const int k = num_frames / 2;
  if (k == 0) return mask;
  // Partial Fisher-Yates over the frame indices: the first k slots after
  // shuffling are a uniform k-subset.
  std::vector<int> idx(static_cast<std::size_t>(num_frames));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(hash_combine(seed, kMaskStream));
  for (int i = 0; i < k; ++i) {
    const int j =
        i + static_cast<int>(rng.uniform_int(
                0, static_cast<std::uint64_t>(num_frames - 1 - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  for (int i = 0; i < k; ++i) mask[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = true;
  return mask;
}

double lambda_at(long step, const LossSchedule& sched) {
  sched.validate();
  if (step < 0) throw ConfigError("step must be >= 0");
  const double frac =
      std::min(1.0, static_cast<double>(step) / static_cast<double>(sched.ramp_steps));
  return frac * sched.lambda_final;
}

double total_loss(double spectral, double latent, double lambda) {
  return spectral + lambda * latent;
}

std::vector<float> encoder_forward(const std::vector<float>& stacked,
                                   int num_frames, const ModelParams& params) {
  params.config.validate();
  const int m = params.config.mel_dim;
  if (stacked.size() != static_cast<std::size_t>(num_frames) * m * 2) {
    throw ShapeMismatch("stacked input is not [T x M x 2]");
  }
  TapeRun run(params);
  // A [T x M x 2] row-major block read as rows of 2M values is exactly the
  // per-frame input layout the encoder consumes.
  const int input = run.tape.leaf({num_frames, 2 * m}, stacked);
  const std::vector<int> rows = neural_detail::encoder_nodes(run.graph, input);
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(num_frames) * params.config.encoder_width);
  for (int id : rows) {
    const auto& v = run.tape.val(id);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::vector<float> decoder_step(const std::vector<float>& prev_frame,
                                const std::vector<float>& encoder_frame,
                                const ModelParams& params,
                                DecoderState* state) {
  params.config.validate();
  const ModelConfig& cfg = params.config;
  if (prev_frame.size() != static_cast<std::size_t>(cfg.mel_dim)) {
    throw ShapeMismatch("prev_frame width != mel_dim");
  }
  if (encoder_frame.size() != static_cast<std::size_t>(cfg.encoder_width)) {
    throw ShapeMismatch("encoder_frame width != encoder_width");
  }
  if (state == nullptr) throw ConfigError("decoder_step needs a state");
  if (state->h.empty()) state->h.assign(static_cast<std::size_t>(cfg.decoder_width), 0.0f);
  if (state->c.empty()) state->c.assign(static_cast<std::size_t>(cfg.decoder_width), 0.0f);
  if (state->h.size() != static_cast<std::size_t>(cfg.decoder_width) ||
      state->c.size() != static_cast<std::size_t>(cfg.decoder_width)) {
    throw ShapeMismatch("decoder state width != decoder_width");
  }

  TapeRun run(params);
  nn::Tape<float>& tape = run.tape;
  const int prev = tape.leaf({cfg.mel_dim}, prev_frame);
  const int enc = tape.leaf({cfg.encoder_width}, encoder_frame);
  const int h_in = tape.leaf({cfg.decoder_width}, state->h);
  const int c_in = tape.leaf({cfg.decoder_width}, state->c);
  const int u = neural_detail::prenet_nodes(run.graph, prev, false, nullptr);
  const int din = tape.concat(u, enc);
  auto out = tape.lstm_cell(din, h_in, c_in, run.bound->id("decoder.w_ih"),
                            run.bound->id("decoder.w_hh"),
                            run.bound->id("decoder.b"));
  const int frame =
      tape.linear(out.h, run.bound->id("proj.w"), run.bound->id("proj.b"));
  state->h = tape.val(out.h);
  state->c = tape.val(out.c);
  return tape.val(frame);
}

std::vector<float> postnet_forward(const std::vector<float>& pre_frames,
                                   int num_frames, const ModelParams& params) {
  params.config.validate();
  const int m = params.config.mel_dim;
  if (pre_frames.size() != static_cast<std::size_t>(num_frames) * m) {
    throw ShapeMismatch("pre_frames is not [T x mel_dim]");
  }
  TapeRun run(params);
  const int x = run.tape.leaf({num_frames, m}, pre_frames);
  const int y = neural_detail::postnet_nodes(run.graph, x, false,
                                             static_cast<neural_detail::BnBatchStats<float>*>(nullptr));
  return run.tape.val(y);
}

ForwardOutput model_forward(const std::vector<float>& stacked, int num_frames,
                            const ModelParams& params,
                            const std::vector<bool>& mask,
                            const LogMelFrames* target) {
  params.config.validate();
  const int m = params.config.mel_dim;
  if (stacked.size() != static_cast<std::size_t>(num_frames) * m * 2) {
    throw ShapeMismatch("stacked input is not [T x M x 2]");
  }
  if (mask.size() != static_cast<std::size_t>(num_frames)) {
    throw ShapeMismatch("mask length != num_frames");
  }
  TapeRun run(params);
  const int input = run.tape.leaf({num_frames, 2 * m}, stacked);
  int target_node = -1;
  if (target != nullptr) {
    if (target->num_frames != num_frames || target->num_mels != m) {
      throw ShapeMismatch("target feature shape mismatch");
    }
    target_node = run.tape.leaf({num_frames, m}, target->data);
  }
  auto nodes = neural_detail::build_forward(run.graph, input, target_node,
                                            mask, false, nullptr);
  ForwardOutput out;
  out.y_pre = run.tape.val(nodes.y_pre);
  out.y_post = run.tape.val(nodes.y_post);
  out.num_frames = num_frames;
  out.mel_dim = m;
  return out;
}

double spectral_loss(const std::vector<float>& y_pre,
                     const std::vector<float>& y_post,
                     const std::vector<float>& target) {
  if (y_pre.size() != target.size() || y_post.size() != target.size() ||
      target.empty()) {
    throw ShapeMismatch("spectral_loss operands must share a nonzero size");
  }
  double l1_pre = 0.0, l2_pre = 0.0, l1_post = 0.0, l2_post = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double dp = static_cast<double>(y_pre[i]) - target[i];
    const double dq = static_cast<double>(y_post[i]) - target[i];
    l1_pre += std::abs(dp);
    l2_pre += dp * dp;
    l1_post += std::abs(dq);
    l2_post += dq * dq;
  }
  const double n = static_cast<double>(target.size());
  return (l1_pre + l2_pre + l1_post + l2_post) / n;
}

double latent_loss(const std::vector<float>& y_post,
                   const std::vector<float>& target, int num_frames,
                   const FrozenEncoder& encoder) {
  const std::size_t want =
      static_cast<std::size_t>(num_frames) * encoder.mel_dim;
  if (y_post.size() != want || target.size() != want) {
    throw LatentMismatch("latent sequences have different lengths");
  }
  nn::Tape<float> tape;
  const int a = tape.leaf({num_frames, encoder.mel_dim}, y_post);
  const int b = tape.leaf({num_frames, encoder.mel_dim}, target);
  const int loss = neural_detail::latent_loss_node(tape, a, b, encoder);
  return static_cast<double>(tape.val(loss)[0]);
}

namespace {

// Everything one worker produces for one batch slot.
struct SlotResult {
  nn::ParamMap<float> grads;
  neural_detail::BnBatchStats<float> bn;
  double spectral = 0.0;
  double latent = 0.0;
};

void run_slot(const ModelParams& params, const UtteranceExample& example,
              const TrainConfig& tc, const FrozenEncoder* frozen,
              double lambda, long step, int slot, SlotResult* out) {
  const ModelConfig& cfg = params.config;
  if (example.probe_feats.num_mels != cfg.mel_dim ||
      example.target_feats.num_mels != cfg.mel_dim) {
    throw ShapeMismatch("example mel width != model mel_dim");
  }
  // SpecAugment with a fresh seed each step; target features are never
  // touched, so only the input channels need a copy.
  const LogMelFrames* probe = &example.probe_feats;
  const LogMelFrames* reference = &example.reference_feats;
  UtteranceExample scratch;
  if (tc.use_specaugment) {
    scratch.probe_feats = example.probe_feats;
    scratch.reference_feats = example.reference_feats;
    augment_example(scratch, tc.specaugment,
                    stream_seed(tc.seed, kAugmentStream, step, slot));
    probe = &scratch.probe_feats;
    reference = &scratch.reference_feats;
  }
  const int t_len = probe->num_frames;
  const std::vector<float> stacked = stack_inputs(*probe, *reference);

  std::vector<bool> mask(static_cast<std::size_t>(t_len), false);
  if (tc.scheduled_sampling) {
    mask = sampling_mask(stream_seed(tc.seed, kMaskStream, step, slot), t_len);
  }
  Rng dropout_rng(stream_seed(tc.seed, kDropStream, step, slot));

  TapeRun run(params);
  nn::Tape<float>& tape = run.tape;
  const int input = tape.leaf({t_len, 2 * cfg.mel_dim}, stacked);
  const int target = tape.leaf({t_len, cfg.mel_dim}, example.target_feats.data);
  auto nodes = neural_detail::build_forward(run.graph, input, target, mask,
                                            true, &dropout_rng);
  const int spec_node =
      neural_detail::spectral_loss_node(tape, nodes.y_pre, nodes.y_post, target);
  int loss = spec_node;
  int lat_node = -1;
  if (frozen != nullptr) {
    lat_node = neural_detail::latent_loss_node(tape, nodes.y_post, target,
                                               *frozen);
    loss = tape.add(spec_node,
                    tape.scale(lat_node, static_cast<float>(lambda)));
  }
  tape.backward(loss);
  run.bound->accumulate_grads(out->grads);
  out->bn = std::move(nodes.bn);
  out->spectral = static_cast<double>(tape.val(spec_node)[0]);
  out->latent = lat_node >= 0 ? static_cast<double>(tape.val(lat_node)[0]) : 0.0;
}

// Uniform batch of example indices; a partial shuffle when the pool is
// larger than the batch, the whole pool otherwise.
std::vector<int> pick_batch(std::size_t pool, int batch, std::uint64_t seed) {
  std::vector<int> idx(pool);
  std::iota(idx.begin(), idx.end(), 0);
  if (static_cast<std::size_t>(batch) >= pool) return idx;
  Rng rng(seed);
  for (int i = 0; i < batch; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) +
        static_cast<std::size_t>(rng.uniform_int(
            0, static_cast<std::uint64_t>(pool - 1 - static_cast<std::size_t>(i))));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(batch));
  return idx;
}

}  // namespace

TrainResult train(const std::vector<UtteranceExample>& dataset,
                  const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                  const LossSchedule& sched, const FrozenEncoder* frozen,
                  const ModelParams* resume, long resume_step) {
  model_cfg.validate();
  train_cfg.validate();
  sched.validate();
  if (dataset.empty()) throw ConfigError("training dataset is empty");
  if (frozen != nullptr && frozen->mel_dim != model_cfg.mel_dim) {
    throw ShapeMismatch("frozen encoder mel width != model mel_dim");
  }

  TrainResult result;
  result.params = resume != nullptr
                      ? *resume
                      : init_model_params(model_cfg, train_cfg.seed);
  if (resume != nullptr && !(resume->config == model_cfg)) {
    throw ConfigError("resume parameters disagree with the model config");
  }
  nn::AdamState<float> adam;

  for (long step = resume_step; step < train_cfg.max_steps; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<int> batch =
        pick_batch(dataset.size(), train_cfg.batch_size,
                   stream_seed(train_cfg.seed, kBatchStream, step, 0));
    const int n = static_cast<int>(batch.size());
    const double lambda = frozen != nullptr ? lambda_at(step, sched) : 0.0;

    std::vector<SlotResult> slots(static_cast<std::size_t>(n));
    const int workers = std::min(train_cfg.threads, n);
    if (workers <= 1) {
      for (int i = 0; i < n; ++i) {
        run_slot(result.params, dataset[static_cast<std::size_t>(batch[static_cast<std::size_t>(i)])],
                 train_cfg, frozen, lambda, step, i, &slots[static_cast<std::size_t>(i)]);
      }
    } else {
      std::exception_ptr first_error;
      std::mutex error_mutex;
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (int i = w; i < n; i += workers) {
            try {
              run_slot(result.params,
                       dataset[static_cast<std::size_t>(batch[static_cast<std::size_t>(i)])],
                       train_cfg, frozen, lambda, step, i,
                       &slots[static_cast<std::size_t>(i)]);
            } catch (...) {
              std::lock_guard<std::mutex> lock(error_mutex);
              if (!first_error) first_error = std::current_exception();
              return;
            }
          }
        });
      }
      for (auto& t : pool) t.join();
      if (first_error) std::rethrow_exception(first_error);
    }

    // Fixed slot-order reduction keeps the update bitwise independent of
    // the worker count.
    nn::ParamMap<float> grads;
    double spectral = 0.0, latent = 0.0;
    for (const SlotResult& slot : slots) {
      for (const auto& [name, g] : slot.grads) {
        auto it = grads.find(name);
        if (it == grads.end()) {
          grads.emplace(name, g);
        } else {
          kernels::axpy(1.0f, g.data.data(), it->second.data.data(),
                        g.data.size());
        }
      }
      spectral += slot.spectral;
      latent += slot.latent;
    }
    const float inv_n = 1.0f / static_cast<float>(n);
    for (auto& [name, g] : grads) {
      for (float& v : g.data) v *= inv_n;
    }
    spectral /= n;
    latent /= n;
    const double total = total_loss(spectral, latent, lambda);
    if (!std::isfinite(total)) {
      throw Diverged("loss became non-finite", step);
    }

    // Batch-norm running statistics: average the per-example batch stats,
    // then blend into the stored values.
    if (!slots.empty() && !slots.front().bn.mean.empty()) {
      const std::size_t layers = slots.front().bn.mean.size();
      for (std::size_t l = 0; l < layers; ++l) {
        std::vector<float> mean(slots.front().bn.mean[l].size(), 0.0f);
        std::vector<float> var(mean.size(), 0.0f);
        for (const SlotResult& slot : slots) {
          kernels::axpy(inv_n, slot.bn.mean[l].data(), mean.data(), mean.size());
          kernels::axpy(inv_n, slot.bn.var[l].data(), var.data(), var.size());
        }
        const std::string base =
            neural_detail::layer_name("postnet", static_cast<int>(l) + 1, "bn.");
        auto& rm = result.params.tensors.at(base + "running_mean").data;
        auto& rv = result.params.tensors.at(base + "running_var").data;
        for (std::size_t i = 0; i < rm.size(); ++i) {
          rm[i] = static_cast<float>((1.0 - kBnMomentum) * rm[i] +
                                     kBnMomentum * mean[i]);
          rv[i] = static_cast<float>((1.0 - kBnMomentum) * rv[i] +
                                     kBnMomentum * var[i]);
        }
      }
    }

    nn::adam_step(result.params.tensors, grads, adam, train_cfg.adam);

    const auto t1 = std::chrono::steady_clock::now();
    TrainLogEntry entry;
    entry.step = step;
    entry.spectral = spectral;
    entry.latent = latent;
    entry.lambda = lambda;
    entry.total = total;
    entry.wall_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    result.log.push_back(entry);
  }
  return result;
}

Waveform erase(const Waveform& probe, const Waveform& reference,
               const ModelParams& params, const StftConfig& stft_cfg,
               const MelConfig& mel_cfg, int griffin_lim_iters) {
  params.config.validate();
  stft_cfg.validate();
  mel_cfg.validate(probe.sample_rate);
  if (probe.sample_rate != reference.sample_rate) {
    throw RateMismatch("probe and reference sample rates differ");
  }
  if (mel_cfg.num_mels != params.config.mel_dim) {
    throw ShapeMismatch("mel config width != model mel_dim");
  }
  const std::size_t len = std::min(probe.size(), reference.size());
  if (len < 2) throw ShortInput("inputs too short to align");
  const int max_lag = static_cast<int>(std::min<std::size_t>(2000, len - 1));
  const int lag = xcorr_align(probe, reference, max_lag);
  const Waveform ref_aligned = apply_lag(reference, lag, probe.size());

  const LogMelFrames probe_feats = log_mel(stft(probe, stft_cfg), mel_cfg);
  const LogMelFrames ref_feats = log_mel(stft(ref_aligned, stft_cfg), mel_cfg);
  const std::vector<float> stacked = stack_inputs(probe_feats, ref_feats);
  const std::vector<bool> free_run(static_cast<std::size_t>(probe_feats.num_frames), true);
  const ForwardOutput out = model_forward(stacked, probe_feats.num_frames,
                                          params, free_run, nullptr);

  LogMelFrames mel_out;
  mel_out.data = out.y_post;
  mel_out.num_frames = out.num_frames;
  mel_out.num_mels = out.mel_dim;
  mel_out.config = mel_cfg;
  const std::vector<float> magnitude =
      mel_pseudo_inverse(mel_out, stft_cfg, probe.sample_rate);
  GriffinLimResult gl = griffin_lim(magnitude, out.num_frames, stft_cfg,
                                    probe.sample_rate, griffin_lim_iters);
  gl.wave.role = SignalRole::kErased;
  return gl.wave;
}

void save_checkpoint(const ModelParams& params, const std::string& path,
                     long step) {
  params.config.validate();
  json j;
  j["model"] = config_to_json(params.config);
  if (step >= 0) j["step"] = step;
  CheckpointPayload payload;
  payload.config_json = j.dump();
  payload.tensors = params.tensors;
  write_checkpoint(path, kModelMagic, kModelVersion, payload);
}

ModelParams load_checkpoint(const std::string& path, long* step) {
  const CheckpointPayload payload =
      read_checkpoint(path, kModelMagic, kModelVersion);
  json j;
  try {
    j = json::parse(payload.config_json);
  } catch (const json::exception& e) {
    throw CorruptCheckpoint(std::string("unparseable config: ") + e.what());
  }
  if (!j.contains("model")) {
    throw CorruptCheckpoint("checkpoint config lacks a model block");
  }
  ModelParams params;
  params.config = config_from_json(j["model"]);
  params.tensors = payload.tensors;
  // The config dictates the exact tensor set; anything else (for example a
  // file truncated at a record boundary) is corruption.
  const nn::ParamMap<float> expected =
      neural_detail::init_param_tensors<float>(params.config, 0);
  if (params.tensors.size() != expected.size()) {
    throw CorruptCheckpoint("tensor set does not match the stored config");
  }
  for (const auto& [name, tensor] : expected) {
    auto it = params.tensors.find(name);
    if (it == params.tensors.end() || it->second.shape != tensor.shape) {
      throw CorruptCheckpoint("tensor " + name + " missing or misshapen");
    }
  }
  if (step != nullptr) {
    *step = j.contains("step") ? j["step"].get<long>() : -1;
  }
  return params;
}

}  // namespace aec
