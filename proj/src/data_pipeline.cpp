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

#include "aec/data_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "aec/align.hpp"
#include "aec/errors.hpp"
#include "aec/hash.hpp"
#include "aec/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace aec {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Stream ids for per-example derived randomness; regeneration relies on
// these staying fixed.
constexpr std::uint64_t kRoomStream = 1;
constexpr std::uint64_t kSourceStream = 2;
constexpr std::uint64_t kMixStream = 3;
constexpr std::uint64_t kHardnessStream = 4;
constexpr std::uint64_t kAugProbeStream = 10;
constexpr std::uint64_t kAugReferenceStream = 11;

Waveform trimmed(const Waveform& w, std::size_t len, SignalRole role) {
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.role = role;
  out.samples.assign(w.samples.begin(),
                     w.samples.begin() + static_cast<long>(len));
  return out;
}

double derived_hardness(std::uint64_t example_seed, const BuildOptions& opt) {
  Rng rng(hash_combine(example_seed, kHardnessStream));
  return rng.uniform(opt.hardness_min, opt.hardness_max);
}

}  // namespace

void SpecAugmentConfig::validate() const {
  if (num_freq_masks < 0 || num_time_masks < 0) {
    throw ConfigError("mask counts must be nonnegative");
  }
  if (max_total_freq_bins < 0) {
    throw ConfigError("frequency budget must be nonnegative");
  }
  if (max_total_time_fraction < 0.0 || max_total_time_fraction > 1.0) {
    throw ConfigError("time fraction must be in [0, 1]");
  }
}

SpecAugmentConfig spec_augment_defaults(const MelConfig& mel) {
  SpecAugmentConfig cfg;
  cfg.mask_value = std::log(static_cast<float>(mel.log_floor));
  return cfg;
}

Waveform loudspeaker_distort(const Waveform& wave, double hardness) {
  if (hardness < 0.0) throw ConfigError("hardness must be >= 0");
  Waveform out = wave;
  if (hardness == 0.0) return out;
  const float h = static_cast<float>(hardness);
  for (float& s : out.samples) s = std::tanh(h * s) / h;
  return out;
}

Waveform make_speech_like(double dur_s, std::uint64_t seed, int sample_rate) {
  Rng rng(seed);
  const std::size_t n = static_cast<std::size_t>(dur_s * sample_rate);
  // Log-uniform pitch over the full speaking range so two independent draws
  // rarely share a register.
  const double f0 = 85.0 * std::exp(rng.uniform(0.0, std::log(380.0 / 85.0)));
  const int harmonics = static_cast<int>(rng.uniform_int(3, 5));
  const double syllable_rate = rng.uniform(2.0, 8.0);
  const double syllable_phase = rng.uniform(0.0, 2.0 * kPi);
  const double vibrato = rng.uniform(0.003, 0.012);
  // Slow prosodic pitch movement keeps harmonic tracks of two independent
  // sources from parking on top of each other for a whole utterance.
  const double glide_depth = rng.uniform(0.10, 0.22);
  const double glide_rate = rng.uniform(0.25, 0.7);
  const double glide_phase = rng.uniform(0.0, 2.0 * kPi);
  const double glide2_rate = rng.uniform(0.8, 1.6);
  const double glide2_phase = rng.uniform(0.0, 2.0 * kPi);
  const double phrase_rate = rng.uniform(0.4, 1.0);
  const double phrase_phase = rng.uniform(0.0, 2.0 * kPi);
  // Inter-word gate: speech pauses, so two independent utterances overlap in
  // time only part of the while.
  const double gate_rate = rng.uniform(0.8, 2.0);
  const double gate_phase = rng.uniform(0.0, 2.0 * kPi);
  const double gate_duty = rng.uniform(0.55, 0.8);
  const double gate_level = std::cos(kPi * gate_duty);
  const double bw = 250.0;

  // Phone-like schedule: formant targets jump every 80-250 ms, so the
  // spectral envelope moves at speech rate instead of sitting still for the
  // whole utterance. Harmonics near a formant dominate, putting the bulk of
  // the energy well above the fundamental, as in voiced vowels.
  struct Phone {
    double start;
    std::vector<double> amp;
  };
  std::vector<Phone> phones;
  double cursor = 0.0;
  while (cursor < dur_s) {
    const double formant1 = rng.uniform(300.0, 900.0);
    const double formant2 = rng.uniform(1000.0, 2500.0);
    Phone ph;
    ph.start = cursor;
    ph.amp.resize(static_cast<std::size_t>(harmonics));
    for (int h = 0; h < harmonics; ++h) {
      const double f = f0 * (h + 1);
      const double g1 = 1.0 / (1.0 + std::pow((f - formant1) / bw, 2.0));
      const double g2 = 0.7 / (1.0 + std::pow((f - formant2) / bw, 2.0));
      ph.amp[static_cast<std::size_t>(h)] = g1 + g2 + 0.02;
    }
    phones.push_back(std::move(ph));
    cursor += rng.uniform(0.08, 0.25);
  }
  const double transition_s = 0.03;

  Waveform w;
  w.sample_rate = sample_rate;
  w.role = SignalRole::kUnspecified;
  w.samples.resize(n);
  std::vector<double> phase(static_cast<std::size_t>(harmonics), 0.0);
  std::size_t phone_idx = 0;
  double peak = 1e-9;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    while (phone_idx + 1 < phones.size() && t >= phones[phone_idx + 1].start) {
      ++phone_idx;
    }
    const Phone& cur = phones[phone_idx];
    const Phone* prev = phone_idx > 0 ? &phones[phone_idx - 1] : nullptr;
    const double blend =
        prev != nullptr ? std::min(1.0, (t - cur.start) / transition_s) : 1.0;
    const double glide =
        glide_depth * (std::sin(2.0 * kPi * glide_rate * t + glide_phase) +
                       0.4 * std::sin(2.0 * kPi * glide2_rate * t + glide2_phase));
    const double momentary =
        f0 * (1.0 + glide + vibrato * std::sin(2.0 * kPi * 5.3 * t));
    const double syl =
        0.5 + 0.5 * std::sin(2.0 * kPi * syllable_rate * t + syllable_phase);
    const double phrase =
        0.5 + 0.5 * std::sin(2.0 * kPi * phrase_rate * t + phrase_phase);
    const double gate_wave = std::sin(2.0 * kPi * gate_rate * t + gate_phase);
    const double gate =
        0.02 + 0.98 / (1.0 + std::exp(-(gate_wave - gate_level) / 0.08));
    const double env =
        (0.05 + 0.95 * syl * syl) * (0.1 + 0.9 * phrase * phrase) * gate;
    double s = 0.0;
    for (int h = 0; h < harmonics; ++h) {
      const std::size_t hh = static_cast<std::size_t>(h);
      phase[hh] += 2.0 * kPi * momentary * (h + 1) / sample_rate;
      const double a =
          prev != nullptr ? prev->amp[hh] + blend * (cur.amp[hh] - prev->amp[hh])
                          : cur.amp[hh];
      s += a * std::sin(phase[hh]);
    }
    s = env * s + 0.003 * rng.normal();
    w.samples[i] = static_cast<float>(s);
    peak = std::max(peak, std::fabs(s));
  }
  const float norm = static_cast<float>(0.5 / peak);
  for (float& s : w.samples) s *= norm;
  return w;
}

Waveform make_background_noise(double dur_s, std::uint64_t seed,
                               int sample_rate) {
  Rng rng(seed);
  const std::size_t n = static_cast<std::size_t>(dur_s * sample_rate);
  const double pole = rng.uniform(0.9, 0.98);
  const double hum_freq = rng.uniform(90.0, 150.0);
  const double hum_amp = rng.uniform(0.0, 0.15);
  Waveform w;
  w.sample_rate = sample_rate;
  w.role = SignalRole::kNoise;
  w.samples.resize(n);
  double lp = 0.0;
  double sumsq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lp = pole * lp + (1.0 - pole) * rng.normal();
    const double hum =
        hum_amp * std::sin(2.0 * kPi * hum_freq * static_cast<double>(i) /
                           sample_rate);
    const double s = lp + 0.02 * rng.normal() + hum * 0.01;
    w.samples[i] = static_cast<float>(s);
    sumsq += s * s;
  }
  const double rms = std::sqrt(sumsq / static_cast<double>(n));
  const float norm = static_cast<float>(0.1 / std::max(rms, 1e-9));
  for (float& s : w.samples) s *= norm;
  return w;
}

UtteranceExample synth_example(const Waveform& target,
                               const Waveform& reference,
                               const Waveform& noise, const RoomConfig& room,
                               const MixSpec& mix, double hardness,
                               std::uint64_t seed, const StftConfig& stft_cfg,
                               const MelConfig& mel_cfg) {
  if (target.sample_rate != reference.sample_rate ||
      target.sample_rate != noise.sample_rate) {
    throw RateMismatch("synth_example: stems must share one sample rate");
  }
  const int sr = target.sample_rate;
  const std::size_t min_len = static_cast<std::size_t>(sr);  // 1 s
  if (target.size() < min_len || reference.size() < min_len ||
      noise.size() < min_len) {
    throw ShortInput("synth_example: all stems must be at least 1 s");
  }
  room.validate();

  const Rir target_rir = compute_rir(room, SourceKind::kTargetPath, sr);
  const Rir speaker_rir = compute_rir(room, SourceKind::kLoudspeakerPath, sr);

  const Waveform echoed_full =
      apply_rir(loudspeaker_distort(reference, hardness), speaker_rir);
  const Waveform reverb_full = apply_rir(target, target_rir);

  const std::size_t len =
      std::min({target.size(), reference.size(), noise.size()});
  Waveform reverb = trimmed(reverb_full, len, SignalRole::kTarget);
  Waveform echoed = trimmed(echoed_full, len, SignalRole::kEchoedReference);
  Waveform noise_trim = trimmed(noise, len, SignalRole::kNoise);

  const double g_echo = gain_for_snr(reverb, echoed, mix.terr_db);
  const double g_noise = gain_for_snr(reverb, noise_trim, mix.tnr_db);

  UtteranceExample ex;
  ex.mix = mix;
  ex.seed = seed;
  ex.room_id = "room-" + hex64(fnv1a64(room.to_json()));

  ex.echoed_reference = echoed;
  ex.residual = reverb;
  ex.probe = reverb;
  ex.probe.role = SignalRole::kProbe;
  ex.residual.role = SignalRole::kResidual;
  for (std::size_t i = 0; i < len; ++i) {
    const float e = static_cast<float>(g_echo) * echoed.samples[i];
    const float r =
        reverb.samples[i] + static_cast<float>(g_noise) * noise_trim.samples[i];
    ex.echoed_reference.samples[i] = e;
    ex.residual.samples[i] = r;
    ex.probe.samples[i] = r + e;
  }

  const int max_lag = static_cast<int>(std::min<std::size_t>(2000, len - 1));
  const int lag = xcorr_align(ex.probe, reference, max_lag);
  ex.reference = apply_lag(reference, lag, len);
  ex.reference.role = SignalRole::kReference;

  const int target_delay = static_cast<int>(
      std::lround(room.target_distance() / room.speed_of_sound * sr));
  ex.target = apply_lag(target, target_delay, len);
  ex.target.role = SignalRole::kTarget;

  ex.probe_feats = log_mel(stft(ex.probe, stft_cfg), mel_cfg);
  ex.reference_feats = log_mel(stft(ex.reference, stft_cfg), mel_cfg);
  ex.target_feats = log_mel(stft(ex.target, stft_cfg), mel_cfg);
  return ex;
}

LogMelFrames spec_augment(const LogMelFrames& feats,
                          const SpecAugmentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  LogMelFrames out = feats;
  if (out.num_frames == 0 || out.num_mels == 0) return out;
  Rng rng(seed);

  int freq_budget = std::min(cfg.max_total_freq_bins, out.num_mels);
  for (int i = 0; i < cfg.num_freq_masks; ++i) {
    const int width = rng.uniform_int(0, freq_budget);
    if (width > 0) {
      const int start = rng.uniform_int(0, out.num_mels - width);
      for (int t = 0; t < out.num_frames; ++t) {
        for (int m = start; m < start + width; ++m) {
          out.at(t, m) = cfg.mask_value;
        }
      }
      freq_budget -= width;
    }
  }

  int time_budget = static_cast<int>(
      std::floor(cfg.max_total_time_fraction * out.num_frames));
  time_budget = std::min(time_budget, out.num_frames);
  for (int i = 0; i < cfg.num_time_masks; ++i) {
    const int width = rng.uniform_int(0, time_budget);
    if (width > 0) {
      const int start = rng.uniform_int(0, out.num_frames - width);
      for (int t = start; t < start + width; ++t) {
        for (int m = 0; m < out.num_mels; ++m) {
          out.at(t, m) = cfg.mask_value;
        }
      }
      time_budget -= width;
    }
  }
  return out;
}

void augment_example(UtteranceExample& example, const SpecAugmentConfig& cfg,
                     std::uint64_t seed) {
  if (cfg.mask_probe) {
    example.probe_feats = spec_augment(
        example.probe_feats, cfg, hash_combine(seed, kAugProbeStream));
  }
  if (cfg.mask_reference) {
    example.reference_feats = spec_augment(
        example.reference_feats, cfg, hash_combine(seed, kAugReferenceStream));
  }
}

std::vector<float> stack_inputs(const LogMelFrames& probe,
                                const LogMelFrames& reference) {
  if (probe.num_frames != reference.num_frames ||
      probe.num_mels != reference.num_mels) {
    throw ShapeMismatch("stack_inputs: probe and reference shapes differ");
  }
  std::vector<float> out(static_cast<std::size_t>(probe.num_frames) *
                         probe.num_mels * 2);
  std::size_t k = 0;
  for (int t = 0; t < probe.num_frames; ++t) {
    for (int m = 0; m < probe.num_mels; ++m) {
      out[k++] = probe.at(t, m);
      out[k++] = reference.at(t, m);
    }
  }
  return out;
}

void unstack_inputs(const std::vector<float>& stacked, int num_frames,
                    int num_mels, LogMelFrames* probe,
                    LogMelFrames* reference) {
  if (stacked.size() !=
      static_cast<std::size_t>(num_frames) * num_mels * 2) {
    throw ShapeMismatch("unstack_inputs: size does not match T*M*2");
  }
  probe->num_frames = reference->num_frames = num_frames;
  probe->num_mels = reference->num_mels = num_mels;
  probe->data.resize(static_cast<std::size_t>(num_frames) * num_mels);
  reference->data.resize(probe->data.size());
  std::size_t k = 0;
  for (int t = 0; t < num_frames; ++t) {
    for (int m = 0; m < num_mels; ++m) {
      probe->at(t, m) = stacked[k++];
      reference->at(t, m) = stacked[k++];
    }
  }
}

BuildOptions::BuildOptions() : sampling(default_room_sampling()) {}

namespace {

nlohmann::json stft_to_json(const StftConfig& c) {
  return {{"window_len", c.window_len},
          {"hop", c.hop},
          {"fft_size", c.fft_size},
          {"window", c.window == WindowKind::kHann ? "hann" : "rectangular"}};
}

StftConfig stft_from_json(const nlohmann::json& j) {
  StftConfig c;
  c.window_len = j.at("window_len").get<int>();
  c.hop = j.at("hop").get<int>();
  c.fft_size = j.at("fft_size").get<int>();
  c.window = j.at("window").get<std::string>() == "hann"
                 ? WindowKind::kHann
                 : WindowKind::kRectangular;
  return c;
}

nlohmann::json mel_to_json(const MelConfig& c) {
  return {{"num_mels", c.num_mels},
          {"f_min", c.f_min},
          {"f_max", c.f_max},
          {"log_floor", c.log_floor}};
}

MelConfig mel_from_json(const nlohmann::json& j) {
  MelConfig c;
  c.num_mels = j.at("num_mels").get<int>();
  c.f_min = j.at("f_min").get<double>();
  c.f_max = j.at("f_max").get<double>();
  c.log_floor = j.at("log_floor").get<double>();
  return c;
}

nlohmann::json sampling_to_json(const RoomSampling& s) {
  return {{"dims_min", s.dims_min},
          {"dims_max", s.dims_max},
          {"wall_margin", s.wall_margin},
          {"min_distance", s.min_distance},
          {"max_distance", s.max_distance},
          {"min_elevation_deg", s.min_elevation_deg},
          {"max_elevation_deg", s.max_elevation_deg},
          {"distance_log_mu", s.distance_log_mu},
          {"distance_log_sigma", s.distance_log_sigma},
          {"absorption_min", s.absorption_min},
          {"absorption_max", s.absorption_max},
          {"loudspeaker_offset", s.loudspeaker_offset},
          {"max_image_order", s.max_image_order}};
}

RoomSampling sampling_from_json(const nlohmann::json& j) {
  RoomSampling s;
  j.at("dims_min").get_to(s.dims_min);
  j.at("dims_max").get_to(s.dims_max);
  s.wall_margin = j.at("wall_margin").get<double>();
  s.min_distance = j.at("min_distance").get<double>();
  s.max_distance = j.at("max_distance").get<double>();
  s.min_elevation_deg = j.at("min_elevation_deg").get<double>();
  s.max_elevation_deg = j.at("max_elevation_deg").get<double>();
  s.distance_log_mu = j.at("distance_log_mu").get<double>();
  s.distance_log_sigma = j.at("distance_log_sigma").get<double>();
  s.absorption_min = j.at("absorption_min").get<double>();
  s.absorption_max = j.at("absorption_max").get<double>();
  s.loudspeaker_offset = j.at("loudspeaker_offset").get<double>();
  s.max_image_order = j.at("max_image_order").get<int>();
  return s;
}

void write_binary_file(const std::string& path, const void* data,
                       std::size_t len) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
  if (!f) throw IoError("short write: " + path);
}

}  // namespace

void write_feature_shard(const std::string& path,
                         const UtteranceExample& example) {
  const LogMelFrames& p = example.probe_feats;
  const LogMelFrames& r = example.reference_feats;
  const LogMelFrames& g = example.target_feats;
  if (p.num_frames != r.num_frames || p.num_frames != g.num_frames ||
      p.num_mels != r.num_mels || p.num_mels != g.num_mels) {
    throw ShapeMismatch("feature shard requires equal shapes per channel");
  }
  std::string blob;
  blob.reserve(20 + p.data.size() * 12);
  blob.append("AECF", 4);
  const std::uint32_t header[4] = {
      1u, static_cast<std::uint32_t>(p.num_frames),
      static_cast<std::uint32_t>(p.num_mels), 3u};
  blob.append(reinterpret_cast<const char*>(header), sizeof(header));
  // Row-major [T][M][C]; this build targets little-endian hosts (the x86-64
  // CI machines), so raw float bytes are the wire format.
  std::vector<float> interleaved(p.data.size() * 3);
  std::size_t k = 0;
  for (int t = 0; t < p.num_frames; ++t) {
    for (int m = 0; m < p.num_mels; ++m) {
      interleaved[k++] = p.at(t, m);
      interleaved[k++] = r.at(t, m);
      interleaved[k++] = g.at(t, m);
    }
  }
  blob.append(reinterpret_cast<const char*>(interleaved.data()),
              interleaved.size() * sizeof(float));
  write_binary_file(path, blob.data(), blob.size());
}

FeatureShard read_feature_shard(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MissingArtifact("feature shard not found: " + path);
  char magic[4];
  std::uint32_t header[4];
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!f || std::string(magic, 4) != "AECF") {
    throw IoError("bad feature shard header: " + path);
  }
  if (header[0] != 1u) {
    throw IoError("unsupported feature shard version in " + path);
  }
  FeatureShard shard;
  shard.num_frames = static_cast<int>(header[1]);
  shard.num_mels = static_cast<int>(header[2]);
  shard.num_channels = static_cast<int>(header[3]);
  const std::size_t count = static_cast<std::size_t>(shard.num_frames) *
                            shard.num_mels * shard.num_channels;
  shard.data.resize(count);
  f.read(reinterpret_cast<char*>(shard.data.data()),
         static_cast<std::streamsize>(count * sizeof(float)));
  if (!f) throw IoError("truncated feature shard: " + path);
  return shard;
}

std::vector<const ManifestEntry*> DatasetManifest::split(
    const std::string& name) const {
  std::vector<const ManifestEntry*> out;
  for (const ManifestEntry& e : entries) {
    if (e.split == name) out.push_back(&e);
  }
  return out;
}

void DatasetManifest::save(const std::string& dir) const {
  fs::create_directories(dir);
  nlohmann::json meta;
  meta["stft"] = stft_to_json(options.stft);
  meta["mel"] = mel_to_json(options.mel);
  meta["sampling"] = sampling_to_json(options.sampling);
  meta["hardness"] = {options.hardness_min, options.hardness_max};
  meta["tnr"] = {options.tnr_min, options.tnr_max};
  meta["terr"] = {options.terr_min, options.terr_max};
  meta["eval_terr"] = options.eval_terr;
  {
    std::ofstream f(dir + "/manifest.meta.json");
    if (!f) throw IoError("cannot write manifest meta in " + dir);
    f << meta.dump(2) << "\n";
  }
  std::ofstream f(dir + "/manifest.jsonl");
  if (!f) throw IoError("cannot write manifest in " + dir);
  for (const ManifestEntry& e : entries) {
    nlohmann::json j;
    j["id"] = e.id;
    j["split"] = e.split;
    j["paths"] = {{"probe", e.probe_path},
                  {"ref", e.ref_path},
                  {"target", e.target_path},
                  {"feats", e.feats_path}};
    j["terr_db"] = e.terr_db;
    j["tnr_db"] = e.tnr_db;
    j["room_id"] = e.room_id;
    j["seeds"] = {{"example", e.example_seed},
                  {"room", e.room_seed},
                  {"sources", e.source_idx}};
    j["label"] = e.label;
    f << j.dump() << "\n";
  }
  if (!f) throw IoError("short manifest write in " + dir);
}

DatasetManifest DatasetManifest::load(const std::string& dir) {
  std::ifstream meta_file(dir + "/manifest.meta.json");
  if (!meta_file) throw MissingArtifact("no manifest.meta.json in " + dir);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_file);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("manifest meta parse error: ") + e.what());
  }
  DatasetManifest m;
  m.root_dir = dir;
  try {
    m.options.stft = stft_from_json(meta.at("stft"));
    m.options.mel = mel_from_json(meta.at("mel"));
    m.options.sampling = sampling_from_json(meta.at("sampling"));
    m.options.hardness_min = meta.at("hardness")[0].get<double>();
    m.options.hardness_max = meta.at("hardness")[1].get<double>();
    m.options.tnr_min = meta.at("tnr")[0].get<double>();
    m.options.tnr_max = meta.at("tnr")[1].get<double>();
    m.options.terr_min = meta.at("terr")[0].get<double>();
    m.options.terr_max = meta.at("terr")[1].get<double>();
    meta.at("eval_terr").get_to(m.options.eval_terr);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("manifest meta field error: ") + e.what());
  }

  std::ifstream f(dir + "/manifest.jsonl");
  if (!f) throw MissingArtifact("no manifest.jsonl in " + dir);
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError(std::string("manifest record parse error: ") + e.what());
    }
    ManifestEntry e;
    try {
      e.id = j.at("id").get<std::string>();
      e.split = j.at("split").get<std::string>();
      e.probe_path = j.at("paths").at("probe").get<std::string>();
      e.ref_path = j.at("paths").at("ref").get<std::string>();
      e.target_path = j.at("paths").at("target").get<std::string>();
      e.feats_path = j.at("paths").at("feats").get<std::string>();
      e.terr_db = j.at("terr_db").get<double>();
      e.tnr_db = j.at("tnr_db").get<double>();
      e.room_id = j.at("room_id").get<std::string>();
      e.example_seed = j.at("seeds").at("example").get<std::uint64_t>();
      e.room_seed = j.at("seeds").at("room").get<std::uint64_t>();
      j.at("seeds").at("sources").get_to(e.source_idx);
      e.label = j.value("label", -1);
    } catch (const nlohmann::json::exception& ex) {
      throw IoError(std::string("manifest record field error: ") + ex.what());
    }
    m.entries.push_back(std::move(e));
  }

  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    for (std::size_t k = i + 1; k < m.entries.size(); ++k) {
      if (m.entries[i].id == m.entries[k].id) {
        throw IoError("duplicate example id: " + m.entries[i].id);
      }
    }
  }
  for (const ManifestEntry& e : m.entries) {
    for (const std::string* p :
         {&e.probe_path, &e.ref_path, &e.target_path, &e.feats_path}) {
      if (!fs::exists(dir + "/" + *p)) {
        throw MissingArtifact("manifest references missing file: " + *p);
      }
    }
  }
  return m;
}

namespace {

// Disjoint source partition: shuffled indices dealt to splits proportionally
// to the requested example counts, at least one source each.
std::array<std::vector<int>, 3> partition_sources(int n, Rng rng,
                                                  const DatasetCounts& counts) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = rng.uniform_int(0, i);
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(j)]);
  }
  const double total =
      static_cast<double>(counts.train + counts.dev + counts.test);
  int n_train = std::max(
      1, static_cast<int>(std::lround(n * counts.train / total)));
  int n_dev =
      std::max(1, static_cast<int>(std::lround(n * counts.dev / total)));
  while (n_train + n_dev > n - 1) {
    if (n_train > 1) {
      --n_train;
    } else {
      --n_dev;
    }
  }
  std::array<std::vector<int>, 3> out;
  out[0].assign(order.begin(), order.begin() + n_train);
  out[1].assign(order.begin() + n_train, order.begin() + n_train + n_dev);
  out[2].assign(order.begin() + n_train + n_dev, order.end());
  return out;
}

}  // namespace

DatasetManifest build_dataset(const SourcePools& pools,
                              const DatasetCounts& counts, std::uint64_t seed,
                              const std::string& out_dir,
                              const BuildOptions& options) {
  if (pools.targets.size() < 3 || pools.references.size() < 3 ||
      pools.noises.size() < 3) {
    throw ConfigError("build_dataset needs at least 3 sources per role");
  }
  if (!pools.target_labels.empty() &&
      pools.target_labels.size() != pools.targets.size()) {
    throw ConfigError("target_labels must match targets");
  }
  if (counts.train < 0 || counts.dev < 0 || counts.test < 0 ||
      counts.train + counts.dev + counts.test == 0) {
    throw ConfigError("dataset counts must be nonnegative and nonzero");
  }
  fs::create_directories(out_dir);

  Rng master(seed);
  const auto target_split = partition_sources(
      static_cast<int>(pools.targets.size()), master.fork(101), counts);
  const auto ref_split = partition_sources(
      static_cast<int>(pools.references.size()), master.fork(102), counts);
  const auto noise_split = partition_sources(
      static_cast<int>(pools.noises.size()), master.fork(103), counts);

  DatasetManifest manifest;
  manifest.options = options;
  manifest.root_dir = out_dir;

  const char* split_names[3] = {"train", "dev", "test"};
  const int split_counts[3] = {counts.train, counts.dev, counts.test};
  std::uint64_t global_idx = 0;
  for (int s = 0; s < 3; ++s) {
    for (int k = 0; k < split_counts[s]; ++k, ++global_idx) {
      ManifestEntry e;
      char idbuf[32];
      std::snprintf(idbuf, sizeof(idbuf), "%s-%04d", split_names[s], k);
      e.id = idbuf;
      e.split = split_names[s];
      e.example_seed = hash_combine(seed, global_idx);
      e.room_seed = hash_combine(e.example_seed, kRoomStream);

      Rng src_rng(hash_combine(e.example_seed, kSourceStream));
      const std::vector<int>& t_pool = target_split[static_cast<std::size_t>(s)];
      const std::vector<int>& r_pool = ref_split[static_cast<std::size_t>(s)];
      const std::vector<int>& n_pool = noise_split[static_cast<std::size_t>(s)];
      e.source_idx[0] =
          t_pool[static_cast<std::size_t>(src_rng.uniform_int(
              0, static_cast<int>(t_pool.size()) - 1))];
      e.source_idx[1] =
          r_pool[static_cast<std::size_t>(src_rng.uniform_int(
              0, static_cast<int>(r_pool.size()) - 1))];
      e.source_idx[2] =
          n_pool[static_cast<std::size_t>(src_rng.uniform_int(
              0, static_cast<int>(n_pool.size()) - 1))];
      e.label = pools.target_labels.empty()
                    ? -1
                    : pools.target_labels[static_cast<std::size_t>(
                          e.source_idx[0])];

      Rng mix_rng(hash_combine(e.example_seed, kMixStream));
      e.tnr_db = mix_rng.uniform(options.tnr_min, options.tnr_max);
      if (s == 2) {
        e.terr_db = options.eval_terr[static_cast<std::size_t>(k % 3)];
      } else {
        e.terr_db = mix_rng.uniform(options.terr_min, options.terr_max);
      }

      const RoomConfig room =
          sample_room_config(e.room_seed, options.sampling);
      e.room_id = "room-" + hex64(fnv1a64(room.to_json()));
      const double hardness = derived_hardness(e.example_seed, options);

      const UtteranceExample ex = synth_example(
          pools.targets[static_cast<std::size_t>(e.source_idx[0])],
          pools.references[static_cast<std::size_t>(e.source_idx[1])],
          pools.noises[static_cast<std::size_t>(e.source_idx[2])], room,
          MixSpec{e.tnr_db, e.terr_db}, hardness, e.example_seed,
          options.stft, options.mel);

      e.probe_path = e.id + ".probe.wav";
      e.ref_path = e.id + ".ref.wav";
      e.target_path = e.id + ".target.wav";
      e.feats_path = e.id + ".aecf";
      write_wav(out_dir + "/" + e.probe_path, ex.probe, WavFormat::kFloat32);
      write_wav(out_dir + "/" + e.ref_path, ex.reference, WavFormat::kFloat32);
      write_wav(out_dir + "/" + e.target_path, ex.target, WavFormat::kFloat32);
      write_feature_shard(out_dir + "/" + e.feats_path, ex);

      manifest.entries.push_back(std::move(e));
    }
  }
  manifest.save(out_dir);
  return manifest;
}

UtteranceExample regenerate_example(const DatasetManifest& manifest,
                                    const ManifestEntry& entry,
                                    const SourcePools& pools) {
  const RoomConfig room =
      sample_room_config(entry.room_seed, manifest.options.sampling);
  const double hardness =
      derived_hardness(entry.example_seed, manifest.options);
  return synth_example(
      pools.targets[static_cast<std::size_t>(entry.source_idx[0])],
      pools.references[static_cast<std::size_t>(entry.source_idx[1])],
      pools.noises[static_cast<std::size_t>(entry.source_idx[2])], room,
      MixSpec{entry.tnr_db, entry.terr_db}, hardness, entry.example_seed,
      manifest.options.stft, manifest.options.mel);
}

}  // namespace aec
