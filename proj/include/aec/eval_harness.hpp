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

// Evaluation metrics (SDR, log-spectral distance, ERLE, keyword error) and
// the experiment runner that scores every system on the identical example
// set per echo level and renders a machine-readable + human-readable report.

#ifndef AEC_EVAL_HARNESS_HPP_
#define AEC_EVAL_HARNESS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aec/asr_proxy.hpp"
#include "aec/baselines.hpp"
#include "aec/data_pipeline.hpp"
#include "aec/mel.hpp"
#include "aec/neural_aec.hpp"
#include "aec/room_sim.hpp"
#include "aec/stft.hpp"
#include "aec/wave.hpp"

namespace aec {

// ---------------------------------------------------------------------------
// Metrics.

// Scale-invariant signal-to-distortion ratio:
// 10*log10(||s||^2 / ||s - g*e||^2) with g the least-squares gain fitting
// the estimate e to the target s.  Capped at 100 dB; an all-zero target
// throws NoSignal (an all-zero estimate scores 0 dB).
double sdr(const Waveform& estimate, const Waveform& reference_target);

// Log-spectral distance between waveforms: per STFT frame the RMS over bins
// of 20*log10(|A|/|B|), averaged over frames.  Bins where either magnitude
// is at or below `floor` are excluded (both-silent bins carry no evidence);
// frames with no countable bin are skipped.  Scaling one input by g moves
// the result to exactly |20*log10 g|.
double lsd(const Waveform& estimate, const Waveform& target,
           const StftConfig& cfg = {}, double floor = 1e-8);

// The same distance on log-mel features (stored as natural logs of
// filterbank magnitudes; differences scale by 20/ln10 into dB).  This
// flavor is fair to mel-domain systems, whose waveform reconstruction is
// band-limited by the filterbank.
double lsd(const LogMelFrames& estimate, const LogMelFrames& target);

// True where the target has energy within the frame (frame RMS above
// `threshold_db` relative to the loudest frame), on the STFT frame grid of
// `cfg`.  All-silent input yields all-false.
std::vector<bool> target_activity_mask(const Waveform& target,
                                       const StftConfig& cfg = {},
                                       double threshold_db = -40.0);

// Echo reduction measured where the target is silent:
// 10*log10(P_probe / P_erased) accumulated over the hop segments of frames
// whose mask entry is false, clamped to [-100, 100] dB.  Returns nullopt
// when the mask marks no silent frame (absent, not an error).
std::optional<double> erle(const Waveform& probe, const Waveform& erased,
                           const std::vector<bool>& target_active_mask,
                           const StftConfig& cfg = {});

// Drops `samples` from each end.  Overlap-add resynthesis amplifies the
// outermost window of audio, so metrics run on the interior.
Waveform trim_edges(const Waveform& wave, int samples = 512);

// ---------------------------------------------------------------------------
// Experiment runner.

enum class SystemKind {
  kProbePassthrough,
  kSubbandNlms,
  kIrmOracle,
  kIrmPredicted,
  kNeural,
};

// One report row.  Only the members matching `kind` are read.
struct SystemSpec {
  std::string name;
  SystemKind kind = SystemKind::kProbePassthrough;
  NlmsConfig nlms;                          // kSubbandNlms
  IrmConfig irm;                            // kIrmOracle
  const IrmPredictor* irm_model = nullptr;  // kIrmPredicted
  const ModelParams* model = nullptr;       // kNeural
  int griffin_lim_iters = 60;               // kNeural
};

struct ExperimentMatrix {
  std::vector<SystemSpec> systems;
  std::vector<double> terr_levels = {0.0, -5.0, -10.0};
};

// Test examples: examples[level][index].  The same index across levels is
// the same target/reference/noise draw, remixed at that level's TERR, so
// every cell scores the identical material.
struct EvalDataset {
  std::vector<double> terr_levels;
  std::vector<std::vector<UtteranceExample>> examples;
  std::vector<std::string> ids;  // shared across levels
  std::vector<int> labels;       // keyword class per index, -1 if unknown
  StftConfig stft_cfg;
  MelConfig mel_cfg;
};

// Builds a keyword-target test set: held-out corpus tokens embedded in
// `dur_s` seconds of silence, mixed against speech-like playback and
// background noise at each requested TERR with the same per-index seed, so
// levels differ only in echo strength.
EvalDataset make_eval_dataset(const KeywordCorpus& corpus,
                              const RoomConfig& room,
                              const std::vector<double>& terr_levels,
                              int count, double tnr_db, double hardness,
                              std::uint64_t seed,
                              const StftConfig& stft_cfg = {},
                              const MelConfig& mel_cfg = {},
                              double dur_s = 1.2);

struct ExampleScore {
  std::string id;
  double sdr_db = 0.0;
  double lsd_db = 0.0;
  std::optional<double> erle_db;
  std::optional<bool> proxy_correct;
};

struct CellAggregate {
  int count = 0;
  double sdr_mean = 0.0, sdr_std = 0.0;
  double lsd_mean = 0.0, lsd_std = 0.0;
  std::optional<double> erle_mean, erle_std;
  std::optional<double> proxy_error;
};

struct ExperimentArtifacts {
  const ProxyRecognizer* recognizer = nullptr;  // enables the keyword metric
  int trim_samples = 512;
  int threads = 1;
};

struct ExperimentReport {
  std::string json;   // canonical; reruns are byte-identical
  std::string table;  // aligned text, rows = systems, columns = TERR levels
  std::string csv;    // one aggregate row per (system, level)

  std::vector<std::string> system_names;
  std::vector<double> terr_levels;
  std::vector<std::vector<CellAggregate>> cells;              // [system][level]
  std::vector<std::vector<std::vector<ExampleScore>>> scores; // [sys][lvl][i]
  std::uint64_t id_list_hash = 0;
};

// Scores every system on every level's examples.  Missing per-system
// artifacts (a null model or mask predictor) throw MissingArtifact naming
// the system; mismatched level lists throw ConfigError.  Cells evaluate in
// parallel under artifacts.threads with a deterministic assembly order.
ExperimentReport run_experiment(const ExperimentMatrix& matrix,
                                const EvalDataset& dataset,
                                const ExperimentArtifacts& artifacts);

}  // namespace aec

#endif  // AEC_EVAL_HARNESS_HPP_
