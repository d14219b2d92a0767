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

#ifndef AEC_DATA_PIPELINE_HPP_
#define AEC_DATA_PIPELINE_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aec/mel.hpp"
#include "aec/room_sim.hpp"
#include "aec/stft.hpp"
#include "aec/wave.hpp"

namespace aec {

struct MixSpec {
  double tnr_db = 10.0;   // target-to-noise ratio
  double terr_db = -5.0;  // target-to-echoed-reference ratio
};

// Masking budgets: total masked width across all frequency masks is capped
// at max_total_freq_bins, and across all time masks at
// floor(max_total_time_fraction * T) frames.  Masks only the channels
// flagged below; the reference-only default is the best configuration found
// for echo-aware augmentation.
struct SpecAugmentConfig {
  int num_freq_masks = 2;
  int max_total_freq_bins = 27;
  int num_time_masks = 10;
  double max_total_time_fraction = 0.05;
  bool mask_probe = false;
  bool mask_reference = true;
  float mask_value = -11.512925f;  // log(1e-5), the feature floor

  void validate() const;
};

SpecAugmentConfig spec_augment_defaults(const MelConfig& mel);

struct UtteranceExample {
  LogMelFrames probe_feats, reference_feats, target_feats;
  // Stems on a common clock (the microphone's), all equal length:
  // probe = residual + echoed_reference, residual = reverberant target +
  // scaled noise.  `target` is the clean source shifted by the direct-path
  // delay; `reference` is the undistorted playback signal shifted by the
  // cross-correlation lag.
  Waveform probe, reference, target, residual, echoed_reference;
  MixSpec mix;
  std::uint64_t seed = 0;
  std::string room_id;
};

// tanh(h*x)/h: transparent for small drive, saturating for large.
Waveform loudspeaker_distort(const Waveform& wave, double hardness);

// Speech-shaped synthetic source: stacked harmonics under formant-style
// band emphasis, amplitude-modulated at a syllable-ish rate.
Waveform make_speech_like(double dur_s, std::uint64_t seed,
                          int sample_rate = 16000);

// Smooth broadband background (one-pole lowpassed noise plus a weak hum).
Waveform make_background_noise(double dur_s, std::uint64_t seed,
                               int sample_rate = 16000);

UtteranceExample synth_example(const Waveform& target,
                               const Waveform& reference,
                               const Waveform& noise, const RoomConfig& room,
                               const MixSpec& mix, double hardness,
                               std::uint64_t seed,
                               const StftConfig& stft_cfg = StftConfig{},
                               const MelConfig& mel_cfg = MelConfig{});

// Masks one feature matrix in place under the config budgets.
LogMelFrames spec_augment(const LogMelFrames& feats,
                          const SpecAugmentConfig& cfg, std::uint64_t seed);

// Applies spec_augment to the channels selected in cfg with independent
// per-channel streams.  Target features are never masked.
void augment_example(UtteranceExample& example, const SpecAugmentConfig& cfg,
                     std::uint64_t seed);

// [T x M x 2] row-major, channel 0 = probe, channel 1 = reference.
std::vector<float> stack_inputs(const LogMelFrames& probe,
                                const LogMelFrames& reference);
void unstack_inputs(const std::vector<float>& stacked, int num_frames,
                    int num_mels, LogMelFrames* probe, LogMelFrames* reference);

struct SourcePools {
  std::vector<Waveform> targets, references, noises;
  // Optional class label per target clip (keyword corpora); empty means
  // unlabeled.
  std::vector<int> target_labels;
};

struct DatasetCounts {
  int train = 64;
  int dev = 16;
  int test = 16;
};

struct BuildOptions {
  StftConfig stft;
  MelConfig mel;
  RoomSampling sampling;  // default_room_sampling() unless overridden
  double hardness_min = 0.5;
  double hardness_max = 3.0;
  double tnr_min = 0.0, tnr_max = 20.0;
  double terr_min = -20.0, terr_max = 0.0;
  std::array<double, 3> eval_terr{0.0, -5.0, -10.0};

  BuildOptions();
};

struct ManifestEntry {
  std::string id, split;
  std::string probe_path, ref_path, target_path, feats_path;  // relative
  double terr_db = 0.0, tnr_db = 0.0;
  std::string room_id;
  std::uint64_t example_seed = 0, room_seed = 0;
  std::array<int, 3> source_idx{0, 0, 0};  // target, reference, noise
  int label = -1;
};

struct DatasetManifest {
  BuildOptions options;  // carries the configs needed to regenerate stems
  std::string root_dir;
  std::vector<ManifestEntry> entries;

  const StftConfig& stft() const { return options.stft; }
  const MelConfig& mel() const { return options.mel; }

  std::vector<const ManifestEntry*> split(const std::string& name) const;
  void save(const std::string& dir) const;
  static DatasetManifest load(const std::string& dir);
};

DatasetManifest build_dataset(const SourcePools& pools,
                              const DatasetCounts& counts, std::uint64_t seed,
                              const std::string& out_dir,
                              const BuildOptions& options);

// Re-synthesizes the stems of a manifest entry bit-identically from its
// recorded seeds (stems are not persisted; mask oracles regenerate them).
UtteranceExample regenerate_example(const DatasetManifest& manifest,
                                    const ManifestEntry& entry,
                                    const SourcePools& pools);

// Feature shard I/O ("AECF"): header magic, version, T, M, channels, then
// row-major [T][M][C] little-endian f32.  Channels: probe, reference, target.
void write_feature_shard(const std::string& path,
                         const UtteranceExample& example);
struct FeatureShard {
  int num_frames = 0, num_mels = 0, num_channels = 0;
  std::vector<float> data;  // [T][M][C]
  float at(int t, int m, int c) const {
    return data[(static_cast<std::size_t>(t) * num_mels + m) * num_channels + c];
  }
};
FeatureShard read_feature_shard(const std::string& path);

}  // namespace aec

#endif  // AEC_DATA_PIPELINE_HPP_
