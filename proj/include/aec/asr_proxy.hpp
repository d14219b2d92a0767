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

// Keyword recognizers that stand in for full ASR systems: a synthetic
// closed-set keyword corpus, two small trainable recognizers (convolutional
// and recurrent), and a classification-error metric.  A trained recognizer's
// encoder doubles as the frozen feature extractor consumed by the latent
// loss during echo-canceller training.

#ifndef AEC_ASR_PROXY_HPP_
#define AEC_ASR_PROXY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "aec/frozen_encoder.hpp"
#include "aec/mel.hpp"
#include "aec/nn.hpp"
#include "aec/stft.hpp"
#include "aec/wave.hpp"

namespace aec {

struct KeywordExample {
  Waveform wave;
  int label = 0;
  std::uint64_t seed = 0;
};

// Closed-set keyword tokens: each class is a fixed harmonic/formant template,
// each token a randomized rendering of it (pitch, duration, modulation).
// Train and held-out draws come from disjoint per-class seed ranges.
struct KeywordCorpus {
  std::vector<KeywordExample> train;
  std::vector<KeywordExample> held_out;
  int num_classes = 0;
  int sample_rate = 16000;
  std::uint64_t seed = 0;
};

// `per_class` tokens per class in total, split 4:1 into train and held-out.
// Tokens last 0.4-0.8 s.  Deterministic in (seed, num_classes, per_class).
KeywordCorpus make_keyword_corpus(std::uint64_t seed, int num_classes = 10,
                                  int per_class = 50);

// One token.  Exposed so callers can extend a corpus without rebuilding it.
Waveform make_keyword(int label, int num_classes, std::uint64_t seed,
                      int sample_rate = 16000);

// Places a token inside a near-silent buffer of `dur_s` seconds at a seeded
// offset.  Keyword tokens are shorter than the one-second minimum the mixing
// simulator enforces for stems; this brings them up to length.
Waveform embed_keyword(const Waveform& token, double dur_s,
                       std::uint64_t seed);

// Content fingerprint over samples and labels of both splits.
std::uint64_t corpus_checksum(const KeywordCorpus& corpus);

// Encoder (shared with the latent loss) plus a mean-pool linear head.
// `head` holds "head.w" [K x width] and "head.b" [K].
struct ProxyRecognizer {
  FrozenEncoder encoder;
  nn::ParamMap<float> head;
  int num_classes = 0;
  bool frozen = false;
  double held_out_accuracy = 0.0;
  StftConfig stft_cfg;
  MelConfig mel_cfg;
};

struct ProxyTrainConfig {
  int width = 32;
  int layers = 2;
  int kernel = 5;  // conv arch only
  int batch_size = 16;
  long max_steps = 300;
  nn::AdamConfig adam;
  StftConfig stft;
  MelConfig mel{.num_mels = 24};  // desk-scale default
  int threads = 1;

  void validate() const;
};

// Cross-entropy training of encoder + head from scratch; the returned
// recognizer is frozen and carries its held-out accuracy.  Deterministic in
// `seed` regardless of `cfg.threads`.  Requires >= 20 train examples per
// class.  Throws Diverged if the loss leaves the finite range.
ProxyRecognizer train_proxy(const KeywordCorpus& corpus, ProxyArch arch,
                            std::uint64_t seed,
                            const ProxyTrainConfig& cfg = {});

// Class logits for one feature matrix ([T x mel] with T >= 1).  The
// utterance-wide feature mean is subtracted before encoding, so a uniform
// waveform gain (a constant log-mel offset) does not move the logits.
std::vector<float> proxy_logits(const ProxyRecognizer& rec,
                                const LogMelFrames& feats);

// Argmax class (ties break toward the lower index).
int proxy_predict(const ProxyRecognizer& rec, const LogMelFrames& feats);

// Front end matching the recognizer's training features.
LogMelFrames proxy_features(const ProxyRecognizer& rec, const Waveform& wave);

// 1 - classification accuracy, in [0, 1].
double proxy_error_rate(const std::vector<LogMelFrames>& features,
                        const std::vector<int>& labels,
                        const ProxyRecognizer& rec);
double proxy_error_rate(const std::vector<Waveform>& waves,
                        const std::vector<int>& labels,
                        const ProxyRecognizer& rec);

// Checkpoint container with magic "PRXY"; round-trips bit-exactly.
void save_proxy(const ProxyRecognizer& rec, const std::string& path);
ProxyRecognizer load_proxy(const std::string& path);

}  // namespace aec

#endif  // AEC_ASR_PROXY_HPP_
