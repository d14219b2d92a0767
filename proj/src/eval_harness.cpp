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

#include "aec/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <set>
#include <thread>
#include <utility>

#include "aec/errors.hpp"
#include "aec/hash.hpp"
#include "aec/rng.hpp"

#include "json.hpp"

namespace aec {
namespace {

constexpr double kDbCap = 100.0;
constexpr double kLnToDb = 8.685889638065035;  // 20 / ln(10)

double dot(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

std::uint64_t fold_str(std::uint64_t h, const std::string& s) {
  return fnv1a64_fold(h, s.data(), s.size());
}

template <typename T>
std::uint64_t fold_value(std::uint64_t h, const T& v) {
  return fnv1a64_fold(h, &v, sizeof(v));
}

std::uint64_t fold_stft(std::uint64_t h, const StftConfig& cfg) {
  h = fold_value(h, cfg.window_len);
  h = fold_value(h, cfg.hop);
  h = fold_value(h, cfg.fft_size);
  h = fold_value(h, static_cast<int>(cfg.window));
  return h;
}

std::uint64_t fold_mel(std::uint64_t h, const MelConfig& cfg) {
  h = fold_value(h, cfg.num_mels);
  h = fold_value(h, cfg.f_min);
  h = fold_value(h, cfg.f_max);
  h = fold_value(h, cfg.log_floor);
  return h;
}

std::uint64_t hash_model(const ModelParams& model) {
  std::uint64_t h = fnv1a64_basis;
  h = fold_value(h, model.config.mel_dim);
  h = fold_value(h, model.config.encoder_layers);
  h = fold_value(h, model.config.encoder_width);
  h = fold_value(h, model.config.decoder_width);
  h = fold_value(h, model.config.prenet_width);
  h = fold_value(h, model.config.prenet_dropout);
  h = fold_value(h, model.config.postnet_layers);
  h = fold_value(h, model.config.postnet_filters);
  h = fold_value(h, model.config.postnet_kernel);
  for (const auto& [name, t] : model.tensors) {
    h = fold_str(h, name);
    for (int d : t.shape) h = fold_value(h, d);
    h = fnv1a64_fold(h, t.data.data(), t.data.size() * sizeof(float));
  }
  return h;
}

std::uint64_t hash_predictor(const IrmPredictor& predictor) {
  std::uint64_t h = fnv1a64_basis;
  h = fold_value(h, predictor.config.context);
  h = fold_value(h, predictor.config.hidden);
  h = fold_stft(h, predictor.config.stft);
  h = fold_mel(h, predictor.config.mel);
  for (const auto& [name, t] : predictor.params) {
    h = fold_str(h, name);
    for (int d : t.shape) h = fold_value(h, d);
    h = fnv1a64_fold(h, t.data.data(), t.data.size() * sizeof(float));
  }
  return h;
}

std::uint64_t hash_system(const SystemSpec& spec) {
  std::uint64_t h = fnv1a64_basis;
  h = fold_str(h, spec.name);
  h = fold_value(h, static_cast<int>(spec.kind));
  switch (spec.kind) {
    case SystemKind::kProbePassthrough:
      break;
    case SystemKind::kSubbandNlms:
      h = fold_value(h, spec.nlms.taps_per_band);
      h = fold_value(h, spec.nlms.step_size);
      h = fold_value(h, spec.nlms.regularization);
      h = fold_stft(h, spec.nlms.stft);
      break;
    case SystemKind::kIrmOracle:
      h = fold_value(h, spec.irm.exponent);
      h = fold_value(h, spec.irm.floor);
      break;
    case SystemKind::kIrmPredicted:
      h = fold_value(h, hash_predictor(*spec.irm_model));
      break;
    case SystemKind::kNeural:
      h = fold_value(h, spec.griffin_lim_iters);
      h = fold_value(h, hash_model(*spec.model));
      break;
  }
  return h;
}

std::uint64_t hash_dataset(const EvalDataset& dataset) {
  std::uint64_t h = fnv1a64_basis;
  for (double level : dataset.terr_levels) h = fold_value(h, level);
  for (const std::string& id : dataset.ids) h = fold_str(h, id);
  for (int label : dataset.labels) h = fold_value(h, label);
  h = fold_stft(h, dataset.stft_cfg);
  h = fold_mel(h, dataset.mel_cfg);
  return h;
}

Waveform slice(const Waveform& w, std::size_t from, std::size_t to) {
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.role = w.role;
  out.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(from),
                     w.samples.begin() + static_cast<std::ptrdiff_t>(to));
  return out;
}

int frame_count(std::size_t samples, const StftConfig& cfg) {
  if (samples < static_cast<std::size_t>(cfg.window_len)) return 0;
  return 1 + static_cast<int>((samples - cfg.window_len) / cfg.hop);
}

std::string fmt(const char* format, double a, double b) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, a, b);
  return buf;
}

std::string fmt1(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, a);
  return buf;
}

// Erased waveform for one (system, example) pairing.
Waveform run_system(const SystemSpec& spec, const UtteranceExample& ex,
                    const EvalDataset& dataset, const std::string& id) {
  switch (spec.kind) {
    case SystemKind::kProbePassthrough:
      return ex.probe;
    case SystemKind::kSubbandNlms:
      return subband_nlms_erase(ex.probe, ex.reference, spec.nlms);
    case SystemKind::kIrmOracle: {
      if (ex.residual.samples.empty() || ex.echoed_reference.samples.empty()) {
        throw MissingStems("example " + id +
                           " lacks the stems oracle IRM needs");
      }
      const std::vector<float> mask =
          ideal_ratio_mask(stft(ex.residual, dataset.stft_cfg),
                           stft(ex.echoed_reference, dataset.stft_cfg),
                           spec.irm);
      return apply_mask_erase(ex.probe, mask, dataset.stft_cfg);
    }
    case SystemKind::kIrmPredicted: {
      const std::vector<float> mask =
          spec.irm_model->predict(ex.probe_feats, ex.reference_feats);
      return apply_mask_erase(ex.probe, mask, spec.irm_model->config.stft);
    }
    case SystemKind::kNeural:
      return erase(ex.probe, ex.reference, *spec.model, dataset.stft_cfg,
                   dataset.mel_cfg, spec.griffin_lim_iters);
  }
  throw ConfigError("unknown system kind");
}

struct MeanStd {
  double mean = 0.0, std_dev = 0.0;
};

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - out.mean) * (v - out.mean);
  out.std_dev = std::sqrt(std::max(0.0, var / static_cast<double>(values.size())));
  return out;
}

}  // namespace

double sdr(const Waveform& estimate, const Waveform& reference_target) {
  if (estimate.sample_rate != reference_target.sample_rate) {
    throw RateMismatch("sdr: sample rates differ");
  }
  if (estimate.samples.size() != reference_target.samples.size()) {
    throw ShapeMismatch("sdr: lengths differ");
  }
  const double target_power =
      dot(reference_target.samples, reference_target.samples);
  if (target_power <= 0.0) throw NoSignal("sdr: target is silent");
  const double estimate_power = dot(estimate.samples, estimate.samples);
  const double gain =
      estimate_power > 0.0
          ? dot(reference_target.samples, estimate.samples) / estimate_power
          : 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i < estimate.samples.size(); ++i) {
    const double d = static_cast<double>(reference_target.samples[i]) -
                     gain * static_cast<double>(estimate.samples[i]);
    err += d * d;
  }
  if (err <= 0.0) return kDbCap;
  return std::min(kDbCap, 10.0 * std::log10(target_power / err));
}

double lsd(const Waveform& estimate, const Waveform& target,
           const StftConfig& cfg, double floor) {
  if (estimate.sample_rate != target.sample_rate) {
    throw RateMismatch("lsd: sample rates differ");
  }
  const Spectrogram a = stft(estimate, cfg);
  const Spectrogram b = stft(target, cfg);
  if (a.num_frames != b.num_frames) {
    throw ShapeMismatch("lsd: frame counts differ");
  }
  double total = 0.0;
  int counted_frames = 0;
  for (int t = 0; t < a.num_frames; ++t) {
    double sum_sq = 0.0;
    int bins = 0;
    for (int f = 0; f < a.num_bins; ++f) {
      const double ma = std::abs(std::complex<double>(a.at(t, f)));
      const double mb = std::abs(std::complex<double>(b.at(t, f)));
      if (ma <= floor || mb <= floor) continue;
      const double d = 20.0 * std::log10(ma / mb);
      sum_sq += d * d;
      ++bins;
    }
    if (bins == 0) continue;
    total += std::sqrt(sum_sq / bins);
    ++counted_frames;
  }
  return counted_frames == 0 ? 0.0 : total / counted_frames;
}

double lsd(const LogMelFrames& estimate, const LogMelFrames& target) {
  if (estimate.num_frames != target.num_frames ||
      estimate.num_mels != target.num_mels) {
    throw ShapeMismatch("lsd: feature shapes differ");
  }
  if (estimate.num_frames == 0 || estimate.num_mels == 0) return 0.0;
  double total = 0.0;
  for (int t = 0; t < estimate.num_frames; ++t) {
    double sum_sq = 0.0;
    for (int m = 0; m < estimate.num_mels; ++m) {
      const double d =
          (static_cast<double>(estimate.at(t, m)) - target.at(t, m)) * kLnToDb;
      sum_sq += d * d;
    }
    total += std::sqrt(sum_sq / estimate.num_mels);
  }
  return total / estimate.num_frames;
}

std::vector<bool> target_activity_mask(const Waveform& target,
                                       const StftConfig& cfg,
                                       double threshold_db) {
  cfg.validate();
  const int frames = frame_count(target.samples.size(), cfg);
  if (frames == 0) {
    throw ShortInput("target_activity_mask: shorter than one window");
  }
  std::vector<double> rms(static_cast<std::size_t>(frames), 0.0);
  double peak = 0.0;
  for (int t = 0; t < frames; ++t) {
    double energy = 0.0;
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < cfg.window_len; ++i) {
      const double v = target.samples[start + static_cast<std::size_t>(i)];
      energy += v * v;
    }
    rms[static_cast<std::size_t>(t)] = std::sqrt(energy / cfg.window_len);
    peak = std::max(peak, rms[static_cast<std::size_t>(t)]);
  }
  std::vector<bool> mask(static_cast<std::size_t>(frames), false);
  if (peak <= 0.0) return mask;
  const double cut = peak * std::pow(10.0, threshold_db / 20.0);
  for (int t = 0; t < frames; ++t) {
    mask[static_cast<std::size_t>(t)] = rms[static_cast<std::size_t>(t)] > cut;
  }
  return mask;
}

std::optional<double> erle(const Waveform& probe, const Waveform& erased,
                           const std::vector<bool>& target_active_mask,
                           const StftConfig& cfg) {
  if (probe.sample_rate != erased.sample_rate) {
    throw RateMismatch("erle: sample rates differ");
  }
  cfg.validate();
  const std::size_t n = std::min(probe.samples.size(), erased.samples.size());
  double probe_energy = 0.0, erased_energy = 0.0;
  bool any_silent = false;
  for (std::size_t t = 0; t < target_active_mask.size(); ++t) {
    if (target_active_mask[t]) continue;
    any_silent = true;
    const std::size_t start = t * static_cast<std::size_t>(cfg.hop);
    const std::size_t stop =
        std::min(n, start + static_cast<std::size_t>(cfg.hop));
    for (std::size_t i = start; i < stop; ++i) {
      probe_energy +=
          static_cast<double>(probe.samples[i]) * probe.samples[i];
      erased_energy +=
          static_cast<double>(erased.samples[i]) * erased.samples[i];
    }
  }
  if (!any_silent) return std::nullopt;
  if (erased_energy <= 0.0) return kDbCap;
  if (probe_energy <= 0.0) return -kDbCap;
  return std::clamp(10.0 * std::log10(probe_energy / erased_energy), -kDbCap,
                    kDbCap);
}

Waveform trim_edges(const Waveform& wave, int samples) {
  if (samples < 0) throw ConfigError("trim_edges: negative trim");
  const std::size_t cut = static_cast<std::size_t>(samples);
  if (wave.samples.size() <= 2 * cut) {
    throw ShapeMismatch("trim_edges: signal shorter than the trimmed edges");
  }
  return slice(wave, cut, wave.samples.size() - cut);
}

EvalDataset make_eval_dataset(const KeywordCorpus& corpus,
                              const RoomConfig& room,
                              const std::vector<double>& terr_levels,
                              int count, double tnr_db, double hardness,
                              std::uint64_t seed, const StftConfig& stft_cfg,
                              const MelConfig& mel_cfg, double dur_s) {
  if (corpus.held_out.empty()) {
    throw ConfigError("eval dataset needs a held-out keyword split");
  }
  if (count < 1) throw ConfigError("count must be positive");
  if (terr_levels.empty()) throw ConfigError("need at least one TERR level");

  EvalDataset dataset;
  dataset.terr_levels = terr_levels;
  dataset.examples.resize(terr_levels.size());
  dataset.stft_cfg = stft_cfg;
  dataset.mel_cfg = mel_cfg;
  for (std::size_t l = 0; l < terr_levels.size(); ++l) {
    dataset.examples[l].reserve(static_cast<std::size_t>(count));
  }
  for (int i = 0; i < count; ++i) {
    const KeywordExample& kw =
        corpus.held_out[static_cast<std::size_t>(i) % corpus.held_out.size()];
    const std::uint64_t ex_seed =
        hash_combine(seed, static_cast<std::uint64_t>(i));
    const Waveform target = embed_keyword(kw.wave, dur_s, ex_seed);
    const Waveform playback =
        make_speech_like(dur_s, hash_combine(ex_seed, 1), corpus.sample_rate);
    const Waveform noise = make_background_noise(
        dur_s, hash_combine(ex_seed, 2), corpus.sample_rate);
    dataset.ids.push_back("kw" + std::to_string(kw.label) + "-" +
                          hex64(ex_seed));
    dataset.labels.push_back(kw.label);
    for (std::size_t l = 0; l < terr_levels.size(); ++l) {
      MixSpec mix;
      mix.tnr_db = tnr_db;
      mix.terr_db = terr_levels[l];
      dataset.examples[l].push_back(synth_example(target, playback, noise,
                                                  room, mix, hardness, ex_seed,
                                                  stft_cfg, mel_cfg));
    }
  }
  return dataset;
}

ExperimentReport run_experiment(const ExperimentMatrix& matrix,
                                const EvalDataset& dataset,
                                const ExperimentArtifacts& artifacts) {
  if (matrix.systems.empty()) throw ConfigError("no systems to evaluate");
  if (artifacts.threads < 1) throw ConfigError("threads must be positive");
  if (artifacts.trim_samples < 0) throw ConfigError("negative trim");
  if (matrix.terr_levels != dataset.terr_levels) {
    throw ConfigError("matrix TERR levels do not match the dataset's");
  }
  if (dataset.examples.size() != dataset.terr_levels.size()) {
    throw ConfigError("dataset level count does not match its examples");
  }
  const std::size_t per_level = dataset.ids.size();
  if (per_level == 0) throw ConfigError("dataset is empty");
  if (dataset.labels.size() != per_level) {
    throw ConfigError("dataset labels do not pair with its ids");
  }
  for (const auto& level_examples : dataset.examples) {
    if (level_examples.size() != per_level) {
      throw ConfigError("dataset levels hold differing example counts");
    }
  }
  std::set<std::string> names;
  for (const SystemSpec& spec : matrix.systems) {
    if (spec.name.empty()) throw ConfigError("system with an empty name");
    if (!names.insert(spec.name).second) {
      throw ConfigError("duplicate system name " + spec.name);
    }
    if (spec.kind == SystemKind::kIrmPredicted && spec.irm_model == nullptr) {
      throw MissingArtifact("system '" + spec.name +
                            "' needs a mask predictor");
    }
    if (spec.kind == SystemKind::kNeural) {
      if (spec.model == nullptr) {
        throw MissingArtifact("system '" + spec.name + "' needs a model");
      }
      if (spec.model->config.mel_dim != dataset.mel_cfg.num_mels) {
        throw ConfigError("system '" + spec.name +
                          "' model mel width does not match the dataset");
      }
    }
  }

  const std::size_t num_systems = matrix.systems.size();
  const std::size_t num_levels = dataset.terr_levels.size();

  ExperimentReport report;
  for (const SystemSpec& spec : matrix.systems) {
    report.system_names.push_back(spec.name);
  }
  report.terr_levels = dataset.terr_levels;
  report.scores.assign(
      num_systems,
      std::vector<std::vector<ExampleScore>>(
          num_levels, std::vector<ExampleScore>(per_level)));
  report.cells.assign(num_systems,
                      std::vector<CellAggregate>(num_levels));
  {
    std::uint64_t h = fnv1a64_basis;
    for (const std::string& id : dataset.ids) {
      h = fold_str(h, id);
      h = fnv1a64_fold(h, "\n", 1);
    }
    report.id_list_hash = h;
  }

  // One work unit per (system, level) cell; slots are preassigned so any
  // thread count assembles the same report.
  auto eval_cell = [&](std::size_t s, std::size_t l) {
    const SystemSpec& spec = matrix.systems[s];
    std::vector<double> sdr_values, lsd_values, erle_values;
    int labeled = 0, wrong = 0;
    for (std::size_t i = 0; i < per_level; ++i) {
      const UtteranceExample& ex = dataset.examples[l][i];
      const Waveform erased = run_system(spec, ex, dataset, dataset.ids[i]);
      const std::size_t usable =
          std::min(erased.samples.size(),
                   std::min(ex.probe.samples.size(), ex.target.samples.size()));
      const std::size_t cut = static_cast<std::size_t>(artifacts.trim_samples);
      if (usable <= 2 * cut + static_cast<std::size_t>(
                                  dataset.stft_cfg.window_len)) {
        throw ShapeMismatch("example " + dataset.ids[i] +
                            " is too short to trim and score");
      }
      const Waveform est = slice(erased, cut, usable - cut);
      const Waveform tgt = slice(ex.target, cut, usable - cut);
      const Waveform prb = slice(ex.probe, cut, usable - cut);

      ExampleScore& score = report.scores[s][l][i];
      score.id = dataset.ids[i];
      score.sdr_db = sdr(est, tgt);
      score.lsd_db = lsd(log_mel(stft(est, dataset.stft_cfg), dataset.mel_cfg),
                         log_mel(stft(tgt, dataset.stft_cfg), dataset.mel_cfg));
      score.erle_db =
          erle(prb, est, target_activity_mask(tgt, dataset.stft_cfg),
               dataset.stft_cfg);
      if (artifacts.recognizer != nullptr && dataset.labels[i] >= 0) {
        const int predicted = proxy_predict(
            *artifacts.recognizer,
            proxy_features(*artifacts.recognizer, est));
        score.proxy_correct = predicted == dataset.labels[i];
        ++labeled;
        if (!*score.proxy_correct) ++wrong;
      }
      sdr_values.push_back(score.sdr_db);
      lsd_values.push_back(score.lsd_db);
      if (score.erle_db) erle_values.push_back(*score.erle_db);
    }
    CellAggregate& cell = report.cells[s][l];
    cell.count = static_cast<int>(per_level);
    const MeanStd sdr_stats = mean_std(sdr_values);
    cell.sdr_mean = sdr_stats.mean;
    cell.sdr_std = sdr_stats.std_dev;
    const MeanStd lsd_stats = mean_std(lsd_values);
    cell.lsd_mean = lsd_stats.mean;
    cell.lsd_std = lsd_stats.std_dev;
    if (!erle_values.empty()) {
      const MeanStd erle_stats = mean_std(erle_values);
      cell.erle_mean = erle_stats.mean;
      cell.erle_std = erle_stats.std_dev;
    }
    if (labeled > 0) {
      cell.proxy_error = static_cast<double>(wrong) / labeled;
    }
  };

  const std::size_t num_cells = num_systems * num_levels;
  const int workers =
      static_cast<int>(std::min<std::size_t>(artifacts.threads, num_cells));
  if (workers <= 1) {
    for (std::size_t c = 0; c < num_cells; ++c) {
      eval_cell(c / num_levels, c % num_levels);
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(workers));
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t c = static_cast<std::size_t>(w); c < num_cells;
               c += static_cast<std::size_t>(workers)) {
            eval_cell(c / num_levels, c % num_levels);
          }
        } catch (...) {
          errs[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errs) {
      if (e) std::rethrow_exception(e);
    }
  }

  // --- machine-readable report ---
  nlohmann::json j;
  {
    nlohmann::json m;
    m["systems"] = report.system_names;
    m["terr_levels"] = report.terr_levels;
    j["matrix"] = m;
  }
  j["id_list_hash"] = hex64(report.id_list_hash);
  {
    nlohmann::json hashes;
    hashes["dataset"] = hex64(hash_dataset(dataset));
    nlohmann::json sys;
    for (const SystemSpec& spec : matrix.systems) {
      sys[spec.name] = hex64(hash_system(spec));
    }
    hashes["systems"] = sys;
    j["config_hashes"] = hashes;
  }
  {
    nlohmann::json aggregates = nlohmann::json::array();
    for (std::size_t s = 0; s < num_systems; ++s) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t l = 0; l < num_levels; ++l) {
        const CellAggregate& cell = report.cells[s][l];
        nlohmann::json c;
        c["count"] = cell.count;
        c["sdr_mean"] = cell.sdr_mean;
        c["sdr_std"] = cell.sdr_std;
        c["lsd_mean"] = cell.lsd_mean;
        c["lsd_std"] = cell.lsd_std;
        c["erle_mean"] =
            cell.erle_mean ? nlohmann::json(*cell.erle_mean) : nullptr;
        c["erle_std"] =
            cell.erle_std ? nlohmann::json(*cell.erle_std) : nullptr;
        c["proxy_error"] =
            cell.proxy_error ? nlohmann::json(*cell.proxy_error) : nullptr;
        row.push_back(c);
      }
      aggregates.push_back(row);
    }
    j["aggregates"] = aggregates;
  }
  {
    nlohmann::json per_example = nlohmann::json::array();
    for (std::size_t s = 0; s < num_systems; ++s) {
      for (std::size_t l = 0; l < num_levels; ++l) {
        for (std::size_t i = 0; i < per_level; ++i) {
          const ExampleScore& score = report.scores[s][l][i];
          nlohmann::json e;
          e["system"] = report.system_names[s];
          e["terr_db"] = report.terr_levels[l];
          e["id"] = score.id;
          e["sdr_db"] = score.sdr_db;
          e["lsd_db"] = score.lsd_db;
          e["erle_db"] = score.erle_db ? nlohmann::json(*score.erle_db) : nullptr;
          e["proxy_correct"] =
              score.proxy_correct ? nlohmann::json(*score.proxy_correct) : nullptr;
          per_example.push_back(e);
        }
      }
    }
    j["per_example"] = per_example;
  }
  report.json = j.dump(2);

  // --- aligned text table, one block per metric ---
  std::size_t name_width = 8;
  for (const std::string& name : report.system_names) {
    name_width = std::max(name_width, name.size());
  }
  name_width += 2;
  const int cell_width = 16;
  auto pad = [&](const std::string& s, std::size_t width) {
    std::string out = s;
    if (out.size() < width) out.append(width - out.size(), ' ');
    return out;
  };
  std::string table;
  auto block = [&](const std::string& title,
                   const std::function<std::string(const CellAggregate&)>&
                       render) {
    table += "== " + title + " ==\n";
    std::string header = pad("system", name_width);
    for (double level : report.terr_levels) {
      header += pad("TERR " + fmt1("%g", level), cell_width);
    }
    table += header + "\n";
    for (std::size_t s = 0; s < num_systems; ++s) {
      std::string row = pad(report.system_names[s], name_width);
      for (std::size_t l = 0; l < num_levels; ++l) {
        row += pad(render(report.cells[s][l]), cell_width);
      }
      table += row + "\n";
    }
    table += "\n";
  };
  block("SDR (dB), mean +/- std", [&](const CellAggregate& c) {
    return fmt("%.2f +/- %.2f", c.sdr_mean, c.sdr_std);
  });
  block("LSD (dB, mel), mean +/- std", [&](const CellAggregate& c) {
    return fmt("%.2f +/- %.2f", c.lsd_mean, c.lsd_std);
  });
  block("ERLE (dB), mean +/- std", [&](const CellAggregate& c) {
    return c.erle_mean ? fmt("%.2f +/- %.2f", *c.erle_mean, *c.erle_std)
                       : std::string("--");
  });
  block("keyword error rate", [&](const CellAggregate& c) {
    return c.proxy_error ? fmt1("%.3f", *c.proxy_error) : std::string("--");
  });
  report.table = table;

  // --- CSV aggregate rows ---
  std::string csv =
      "system,terr_db,count,sdr_mean,sdr_std,lsd_mean,lsd_std,erle_mean,"
      "erle_std,proxy_error\n";
  for (std::size_t s = 0; s < num_systems; ++s) {
    for (std::size_t l = 0; l < num_levels; ++l) {
      const CellAggregate& cell = report.cells[s][l];
      csv += report.system_names[s];
      csv += "," + fmt1("%g", report.terr_levels[l]);
      csv += "," + std::to_string(cell.count);
      csv += "," + fmt1("%.6f", cell.sdr_mean);
      csv += "," + fmt1("%.6f", cell.sdr_std);
      csv += "," + fmt1("%.6f", cell.lsd_mean);
      csv += "," + fmt1("%.6f", cell.lsd_std);
      csv += ",";
      if (cell.erle_mean) csv += fmt1("%.6f", *cell.erle_mean);
      csv += ",";
      if (cell.erle_std) csv += fmt1("%.6f", *cell.erle_std);
      csv += ",";
      if (cell.proxy_error) csv += fmt1("%.6f", *cell.proxy_error);
      csv += "\n";
    }
  }
  report.csv = csv;
  return report;
}

}  // namespace aec
