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

#include "aec/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "aec/errors.hpp"

namespace aec {

void NlmsConfig::validate() const {
  if (taps_per_band < 1) throw ConfigError("taps_per_band must be >= 1");
  if (step_size <= 0.0 || step_size >= 2.0) {
    throw ConfigError("step_size must lie in (0, 2)");
  }
  if (regularization <= 0.0) throw ConfigError("regularization must be > 0");
  stft.validate();
}

Spectrogram subband_nlms_cancel(const Spectrogram& probe_spec,
                                const Spectrogram& reference_spec,
                                const NlmsConfig& cfg,
                                std::vector<std::complex<float>>* final_weights) {
  cfg.validate();
  if (probe_spec.num_bins != reference_spec.num_bins) {
    throw ShapeMismatch("subband_nlms_cancel: bin counts differ");
  }
  const int t_len = probe_spec.num_frames;
  const int t_ref = reference_spec.num_frames;
  const int bins = probe_spec.num_bins;
  const int taps = cfg.taps_per_band;
  const double mu = cfg.step_size;
  const double eps = cfg.regularization;

  Spectrogram err = probe_spec;
  // Filters in double: the update's running accumulation benefits from the
  // extra precision even though the spectra are f32.
  std::vector<std::complex<double>> w(
      static_cast<std::size_t>(bins) * taps, {0.0, 0.0});
  std::vector<std::complex<double>> x(static_cast<std::size_t>(taps));

  for (int f = 0; f < bins; ++f) {
    std::complex<double>* wf = w.data() + static_cast<std::size_t>(f) * taps;
    for (int t = 0; t < t_len; ++t) {
      double norm = 0.0;
      for (int k = 0; k < taps; ++k) {
        const int src = t - k;
        std::complex<double> xv{0.0, 0.0};
        if (src >= 0 && src < t_ref) {
          xv = std::complex<double>(reference_spec.at(src, f));
        }
        x[static_cast<std::size_t>(k)] = xv;
        norm += std::norm(xv);
      }
      std::complex<double> y{0.0, 0.0};
      for (int k = 0; k < taps; ++k) {
        y += wf[k] * x[static_cast<std::size_t>(k)];
      }
      const std::complex<double> e =
          std::complex<double>(probe_spec.at(t, f)) - y;
      err.at(t, f) = std::complex<float>(e);
      const double g = mu / (norm + eps);
      for (int k = 0; k < taps; ++k) {
        wf[k] += g * std::conj(x[static_cast<std::size_t>(k)]) * e;
      }
    }
  }
  if (final_weights) {
    final_weights->resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      (*final_weights)[i] = std::complex<float>(w[i]);
    }
  }
  return err;
}

Waveform subband_nlms_erase(const Waveform& probe, const Waveform& reference,
                            const NlmsConfig& cfg) {
  if (probe.sample_rate != reference.sample_rate) {
    throw RateMismatch("subband_nlms_erase: sample rates differ");
  }
  const Spectrogram probe_spec = stft(probe, cfg.stft);
  const Spectrogram ref_spec = stft(reference, cfg.stft);
  Waveform erased = istft(subband_nlms_cancel(probe_spec, ref_spec, cfg));
  erased.role = SignalRole::kErased;
  return erased;
}

void IrmConfig::validate() const {
  if (exponent <= 0.0) throw ConfigError("IRM exponent must be > 0");
  if (floor < 0.0) throw ConfigError("IRM floor must be >= 0");
}

std::vector<float> ideal_ratio_mask(const Spectrogram& residual_spec,
                                    const Spectrogram& echo_spec,
                                    const IrmConfig& cfg) {
  cfg.validate();
  if (residual_spec.num_frames != echo_spec.num_frames ||
      residual_spec.num_bins != echo_spec.num_bins) {
    throw ShapeMismatch("ideal_ratio_mask: spectrogram shapes differ");
  }
  const std::size_t n = residual_spec.data.size();
  std::vector<float> mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r2 = std::norm(std::complex<double>(residual_spec.data[i]));
    const double e2 = std::norm(std::complex<double>(echo_spec.data[i]));
    mask[i] = static_cast<float>(
        std::pow(r2 / (r2 + e2 + cfg.floor), cfg.exponent));
  }
  return mask;
}

Waveform apply_mask_erase(const Waveform& probe,
                          const std::vector<float>& mask,
                          const StftConfig& cfg) {
  const Spectrogram spec = stft(probe, cfg);
  if (mask.size() != spec.data.size()) {
    throw ShapeMismatch("apply_mask_erase: mask does not match probe frames");
  }
  std::vector<float> magnitude = spec.magnitude();
  for (std::size_t i = 0; i < magnitude.size(); ++i) {
    magnitude[i] *= mask[i];
  }
  Waveform erased = istft(with_magnitude(spec, magnitude));
  erased.role = SignalRole::kErased;
  return erased;
}

void IrmPredictorConfig::validate() const {
  if (context < 0) throw ConfigError("context must be >= 0");
  if (hidden < 1) throw ConfigError("hidden width must be >= 1");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (batch_frames < 1) throw ConfigError("batch_frames must be >= 1");
  stft.validate();
}

namespace {

// Stacked probe+reference log-mel rows around frame t, edges clamped.
std::vector<float> context_row(const LogMelFrames& probe,
                               const LogMelFrames& reference, int t,
                               int context) {
  const int m = probe.num_mels;
  std::vector<float> row;
  row.reserve(static_cast<std::size_t>(2 * context + 1) * 2 * m);
  for (int dt = -context; dt <= context; ++dt) {
    const int src = std::clamp(t + dt, 0, probe.num_frames - 1);
    for (int i = 0; i < m; ++i) row.push_back(probe.at(src, i));
    for (int i = 0; i < m; ++i) row.push_back(reference.at(src, i));
  }
  return row;
}

struct FrameRef {
  int example = 0;
  int frame = 0;
};

int predictor_input_dim(const IrmPredictorConfig& cfg) {
  return (2 * cfg.context + 1) * 2 * cfg.mel.num_mels;
}

nn::ParamMap<float> init_predictor_params(const IrmPredictorConfig& cfg,
                                          std::uint64_t seed) {
  const int in = predictor_input_dim(cfg);
  const int h = cfg.hidden;
  const int out = cfg.stft.num_bins();
  nn::ParamMap<float> p;
  auto init = [&](const std::string& name, std::vector<int> shape, int fan_in) {
    p[name] = nn::uniform_init<float>(std::move(shape),
                                      1.0 / std::sqrt(static_cast<double>(fan_in)),
                                      seed, name);
  };
  init("l1.w", {h, in}, in);
  init("l1.b", {h}, in);
  init("l2.w", {h, h}, h);
  init("l2.b", {h}, h);
  init("out.w", {out, h}, h);
  init("out.b", {out}, h);
  return p;
}

int predictor_forward(nn::Tape<float>& tape, const nn::BoundParams<float>& bp,
                      int input) {
  int h1 = tape.relu_op(tape.linear(input, bp.id("l1.w"), bp.id("l1.b")));
  int h2 = tape.relu_op(tape.linear(h1, bp.id("l2.w"), bp.id("l2.b")));
  return tape.sigmoid_op(tape.linear(h2, bp.id("out.w"), bp.id("out.b")));
}

std::vector<float> oracle_mask_for(const UtteranceExample& ex,
                                   const StftConfig& stft_cfg) {
  if (ex.residual.samples.empty() || ex.echoed_reference.samples.empty()) {
    throw MissingStems("IRM training requires residual and echoed stems");
  }
  return ideal_ratio_mask(stft(ex.residual, stft_cfg),
                          stft(ex.echoed_reference, stft_cfg), IrmConfig{});
}

}  // namespace

std::vector<float> IrmPredictor::predict(const LogMelFrames& probe,
                                         const LogMelFrames& reference) const {
  if (probe.num_frames != reference.num_frames ||
      probe.num_mels != reference.num_mels) {
    throw ShapeMismatch("predict: probe and reference shapes differ");
  }
  const int t_len = probe.num_frames;
  const int in = predictor_input_dim(config);
  nn::Tape<float> tape;
  nn::BoundParams<float> bp(tape, params);
  std::vector<float> flat;
  flat.reserve(static_cast<std::size_t>(t_len) * in);
  for (int t = 0; t < t_len; ++t) {
    const std::vector<float> row =
        context_row(probe, reference, t, config.context);
    flat.insert(flat.end(), row.begin(), row.end());
  }
  int input = tape.leaf({t_len, in}, std::move(flat));
  int mask = predictor_forward(tape, bp, input);
  return tape.val(mask);
}

IrmPredictor train_irm_predictor(const std::vector<UtteranceExample>& examples,
                                 const IrmPredictorConfig& cfg,
                                 std::uint64_t seed) {
  cfg.validate();
  if (examples.empty()) throw ConfigError("no training examples");

  // Oracle masks once per example.
  std::vector<std::vector<float>> oracles;
  std::vector<FrameRef> frames;
  oracles.reserve(examples.size());
  for (std::size_t e = 0; e < examples.size(); ++e) {
    const UtteranceExample& ex = examples[e];
    if (ex.probe_feats.num_mels != cfg.mel.num_mels) {
      throw ShapeMismatch("example feature width does not match predictor");
    }
    oracles.push_back(oracle_mask_for(ex, cfg.stft));
    for (int t = 0; t < ex.probe_feats.num_frames; ++t) {
      frames.push_back({static_cast<int>(e), t});
    }
  }

  IrmPredictor predictor;
  predictor.config = cfg;
  predictor.params = init_predictor_params(cfg, seed);

  const int in = predictor_input_dim(cfg);
  const int bins = cfg.stft.num_bins();
  nn::AdamState<float> adam;
  Rng rng(hash_combine(seed, 0xB0B));

  for (int step = 0; step < cfg.steps; ++step) {
    const int batch = std::min<int>(cfg.batch_frames,
                                    static_cast<int>(frames.size()));
    std::vector<float> inputs;
    std::vector<float> targets;
    inputs.reserve(static_cast<std::size_t>(batch) * in);
    targets.reserve(static_cast<std::size_t>(batch) * bins);
    for (int i = 0; i < batch; ++i) {
      const FrameRef& fr = frames[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(frames.size()) - 1))];
      const UtteranceExample& ex = examples[static_cast<std::size_t>(fr.example)];
      const std::vector<float> row = context_row(
          ex.probe_feats, ex.reference_feats, fr.frame, cfg.context);
      inputs.insert(inputs.end(), row.begin(), row.end());
      const float* orc =
          oracles[static_cast<std::size_t>(fr.example)].data() +
          static_cast<std::size_t>(fr.frame) * bins;
      targets.insert(targets.end(), orc, orc + bins);
    }

    nn::Tape<float> tape;
    nn::BoundParams<float> bp(tape, predictor.params);
    int input = tape.leaf({batch, in}, std::move(inputs));
    int target = tape.leaf({batch, bins}, std::move(targets));
    int loss = tape.mean_sq(tape.sub(predictor_forward(tape, bp, input), target));
    tape.backward(loss);
    nn::ParamMap<float> grads;
    bp.accumulate_grads(grads);
    nn::adam_step(predictor.params, grads, adam, cfg.adam);
  }
  return predictor;
}

double irm_predictor_mse(const IrmPredictor& predictor,
                         const std::vector<UtteranceExample>& examples) {
  double acc = 0.0;
  std::size_t count = 0;
  for (const UtteranceExample& ex : examples) {
    const std::vector<float> oracle = oracle_mask_for(ex, predictor.config.stft);
    const std::vector<float> pred =
        predictor.predict(ex.probe_feats, ex.reference_feats);
    const std::size_t n = std::min(oracle.size(), pred.size());
    for (std::size_t i = 0; i < n; ++i) {
      const double d = static_cast<double>(pred[i]) - oracle[i];
      acc += d * d;
    }
    count += n;
  }
  return count == 0 ? 0.0 : acc / static_cast<double>(count);
}

double constant_mask_mse(float value,
                         const std::vector<UtteranceExample>& examples,
                         const IrmConfig& cfg, const StftConfig& stft_cfg) {
  double acc = 0.0;
  std::size_t count = 0;
  for (const UtteranceExample& ex : examples) {
    if (ex.residual.samples.empty() || ex.echoed_reference.samples.empty()) {
      throw MissingStems("constant_mask_mse requires stems");
    }
    const std::vector<float> oracle = ideal_ratio_mask(
        stft(ex.residual, stft_cfg), stft(ex.echoed_reference, stft_cfg), cfg);
    for (float o : oracle) {
      const double d = static_cast<double>(value) - o;
      acc += d * d;
    }
    count += oracle.size();
  }
  return count == 0 ? 0.0 : acc / static_cast<double>(count);
}

}  // namespace aec
