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

#include "aec/asr_proxy.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <numeric>
#include <thread>
#include <utility>

#include "aec/checkpoint.hpp"
#include "aec/errors.hpp"
#include "aec/hash.hpp"
#include "aec/rng.hpp"

#include "json.hpp"

namespace aec {
namespace {

constexpr std::uint64_t kKeywordStream = 0x6b777264ULL;  // token rendering
constexpr std::uint64_t kEmbedStream = 0x656d6264ULL;    // placement offset
constexpr std::uint64_t kBatchStream = 0x70627463ULL;    // batch draws
constexpr std::uint64_t kInitStream = 0x70696e69ULL;     // parameter init

const std::array<char, 4> kProxyMagic = {'P', 'R', 'X', 'Y'};
constexpr std::uint32_t kProxyVersion = 1;

constexpr double kPi = 3.14159265358979323846;

double frac(double x) { return x - std::floor(x); }

// Per-class voice: three resonances, a spectral tilt, and a pitch band.
// Centers are spread by low-discrepancy strides so any class count yields
// distinct templates; separation is joint across all five attributes.
struct KeywordTemplate {
  double f1, f2, f3;
  double g2, g3;
  double tilt;
  double f0_lo, f0_hi;
};

KeywordTemplate keyword_template(int label) {
  const double u1 = frac(0.6180339887498949 * label + 0.13);
  const double u2 = frac(0.7548776662466927 * label + 0.41);
  const double u3 = frac(0.5698402909980532 * label + 0.77);
  const double u4 = frac(0.3819660112501051 * label + 0.29);
  KeywordTemplate t;
  t.f1 = 320.0 + 500.0 * u1;
  t.f2 = 1150.0 + 1250.0 * u2;
  t.f3 = 2600.0 + 1000.0 * u3;
  t.g2 = 0.55 + 0.40 * u3;
  t.g3 = 0.30 + 0.30 * u1;
  t.tilt = 0.50 + 0.60 * u2;
  t.f0_lo = 95.0 + 70.0 * u4;
  t.f0_hi = t.f0_lo * 1.45;
  return t;
}

double resonance_gain(double f, const KeywordTemplate& t) {
  auto peak = [](double f0, double fc, double bw, double g) {
    const double d = (f0 - fc) / bw;
    return g / (1.0 + d * d);
  };
  return peak(f, t.f1, 170.0, 1.0) + peak(f, t.f2, 200.0, t.g2) +
         peak(f, t.f3, 260.0, t.g3);
}

template <typename T>
std::uint64_t fold_value(std::uint64_t h, const T& v) {
  return fnv1a64_fold(h, &v, sizeof(v));
}

// Subtracts the utterance-wide mean from every entry.  A uniform waveform
// gain g shifts unfloored log-mel entries by ln(g); removing the scalar mean
// cancels that offset while leaving the spectral shape (the class signal)
// untouched, which is what makes classification gain-invariant.
LogMelFrames offset_normalized(const LogMelFrames& feats) {
  LogMelFrames out = feats;
  double mean = 0.0;
  for (float v : out.data) mean += v;
  if (!out.data.empty()) mean /= static_cast<double>(out.data.size());
  const float m = static_cast<float>(mean);
  for (float& v : out.data) v -= m;
  return out;
}

const nn::Tensor<float>& head_tensor(const ProxyRecognizer& rec,
                                     const std::string& name) {
  auto it = rec.head.find(name);
  if (it == rec.head.end()) {
    throw MissingArtifact("recognizer lacks tensor " + name);
  }
  return it->second;
}

std::vector<float> logits_for(const nn::ParamMap<float>& params,
                              ProxyArch arch, int layers, int width,
                              const LogMelFrames& feats) {
  nn::Tape<float> tape;
  nn::BoundParams<float> bound(tape, params);
  nn::Tensor<float> x;
  x.shape = {feats.num_frames, feats.num_mels};
  x.data = feats.data;
  const int xn = tape.leaf(x);
  const int enc = proxy_encoder_graph(
      tape, arch, layers, width, xn,
      [&](const std::string& n) { return bound.id(n); });
  const int pooled = tape.mean_rows(enc);
  const int logits =
      tape.linear(pooled, bound.id("head.w"), bound.id("head.b"));
  return tape.val(logits);
}

int argmax(const std::vector<float>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

struct SlotOut {
  nn::ParamMap<float> grads;
  double loss = 0.0;
};

SlotOut run_proxy_slot(const nn::ParamMap<float>& params, ProxyArch arch,
                       int layers, int width, const LogMelFrames& feats,
                       int label) {
  nn::Tape<float> tape;
  nn::BoundParams<float> bound(tape, params);
  nn::Tensor<float> x;
  x.shape = {feats.num_frames, feats.num_mels};
  x.data = feats.data;
  const int xn = tape.leaf(x);
  const int enc = proxy_encoder_graph(
      tape, arch, layers, width, xn,
      [&](const std::string& n) { return bound.id(n); });
  const int pooled = tape.mean_rows(enc);
  const int logits =
      tape.linear(pooled, bound.id("head.w"), bound.id("head.b"));
  const int loss = tape.softmax_ce(logits, label);
  tape.backward(loss);
  SlotOut out;
  out.loss = static_cast<double>(tape.val(loss)[0]);
  bound.accumulate_grads(out.grads);
  return out;
}

// First `count` entries of a seeded partial shuffle of 0..n-1.
std::vector<int> pick_batch(int n, int count, std::uint64_t seed) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  const int take = std::min(count, n);
  for (int i = 0; i < take; ++i) {
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(rng.uniform_int(i, n - 1))]);
  }
  idx.resize(static_cast<std::size_t>(take));
  return idx;
}

const char* arch_name(ProxyArch arch) {
  return arch == ProxyArch::kConv ? "conv" : "lstm";
}

ProxyArch arch_from_name(const std::string& name) {
  if (name == "conv") return ProxyArch::kConv;
  if (name == "lstm") return ProxyArch::kLstm;
  throw CorruptCheckpoint("unknown encoder architecture " + name);
}

}  // namespace

Waveform make_keyword(int label, int num_classes, std::uint64_t seed,
                      int sample_rate) {
  if (num_classes < 2) throw ConfigError("keyword set needs >= 2 classes");
  if (label < 0 || label >= num_classes) {
    throw ConfigError("keyword label out of range");
  }
  if (sample_rate <= 0) throw ConfigError("sample rate must be positive");

  const KeywordTemplate tpl = keyword_template(label);
  Rng rng(hash_combine(seed, kKeywordStream));

  const double dur = rng.uniform(0.4, 0.8);
  const double f0 = tpl.f0_lo * std::pow(tpl.f0_hi / tpl.f0_lo, rng.uniform());
  const double vib_rate = rng.uniform(4.0, 6.5);
  const double vib_depth = rng.uniform(0.004, 0.012);
  const double am_rate = rng.uniform(2.5, 6.0);
  const double am_depth = rng.uniform(0.10, 0.30);
  const double formant_jitter = rng.uniform(0.97, 1.03);
  const double attack = rng.uniform(0.04, 0.07);
  const double release = rng.uniform(0.05, 0.09);

  const int n = std::max(1, static_cast<int>(std::llround(dur * sample_rate)));
  const int h_max = std::max(
      3, std::min(48, static_cast<int>(std::min(3900.0, sample_rate * 0.45) / f0)));

  KeywordTemplate jtpl = tpl;
  jtpl.f1 *= formant_jitter;
  jtpl.f2 *= formant_jitter;
  jtpl.f3 *= formant_jitter;
  std::vector<double> amp(static_cast<std::size_t>(h_max) + 1, 0.0);
  for (int h = 1; h <= h_max; ++h) {
    amp[static_cast<std::size_t>(h)] =
        (0.04 + resonance_gain(h * f0, jtpl)) / std::pow(h, tpl.tilt);
  }

  Waveform out;
  out.sample_rate = sample_rate;
  out.role = SignalRole::kTarget;
  out.samples.resize(static_cast<std::size_t>(n));

  double phase = rng.uniform(0.0, 2.0 * kPi);
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double inst =
        f0 * (1.0 + vib_depth * std::sin(2.0 * kPi * vib_rate * t));
    phase += 2.0 * kPi * inst / sample_rate;

    // sin(h*phase) by Chebyshev recurrence: one sin/cos per sample total.
    const double s1 = std::sin(phase);
    const double c1 = std::cos(phase);
    double s_prev = 0.0, s_cur = s1;
    double v = 0.0;
    for (int h = 1; h <= h_max; ++h) {
      v += amp[static_cast<std::size_t>(h)] * s_cur;
      const double s_next = 2.0 * c1 * s_cur - s_prev;
      s_prev = s_cur;
      s_cur = s_next;
    }

    double env = 1.0;
    if (t < attack) env = 0.5 - 0.5 * std::cos(kPi * t / attack);
    const double tail = dur - t;
    if (tail < release) {
      env = std::min(env, 0.5 - 0.5 * std::cos(kPi * std::max(0.0, tail) / release));
    }
    const double am =
        1.0 - am_depth * 0.5 * (1.0 - std::cos(2.0 * kPi * am_rate * t));
    v = v * env * am + 0.0015 * rng.normal();
    out.samples[static_cast<std::size_t>(i)] = static_cast<float>(v);
    peak = std::max(peak, std::abs(v));
  }
  if (peak > 0.0) {
    const float gain = static_cast<float>(0.4 / peak);
    for (float& s : out.samples) s *= gain;
  }
  return out;
}

KeywordCorpus make_keyword_corpus(std::uint64_t seed, int num_classes,
                                  int per_class) {
  if (num_classes < 2) throw ConfigError("keyword corpus needs >= 2 classes");
  if (per_class < 1) throw ConfigError("per_class must be positive");

  const int held = per_class / 5;
  KeywordCorpus corpus;
  corpus.num_classes = num_classes;
  corpus.sample_rate = 16000;
  corpus.seed = seed;
  corpus.train.reserve(static_cast<std::size_t>(num_classes) *
                       static_cast<std::size_t>(per_class - held));
  corpus.held_out.reserve(static_cast<std::size_t>(num_classes) *
                          static_cast<std::size_t>(held));
  // Token index ranges [0, per_class-held) and [per_class-held, per_class)
  // keep the two splits' seeds disjoint by construction.
  for (int i = 0; i < per_class; ++i) {
    for (int c = 0; c < num_classes; ++c) {
      KeywordExample ex;
      ex.seed = hash_combine(hash_combine(seed, static_cast<std::uint64_t>(c)),
                             static_cast<std::uint64_t>(i));
      ex.label = c;
      ex.wave = make_keyword(c, num_classes, ex.seed, corpus.sample_rate);
      (i < per_class - held ? corpus.train : corpus.held_out)
          .push_back(std::move(ex));
    }
  }
  return corpus;
}

Waveform embed_keyword(const Waveform& token, double dur_s,
                       std::uint64_t seed) {
  token.validate();
  const int n =
      static_cast<int>(std::llround(dur_s * token.sample_rate));
  if (n < static_cast<int>(token.size())) {
    throw ConfigError("embed_keyword: buffer shorter than the token");
  }
  Waveform out;
  out.sample_rate = token.sample_rate;
  out.role = token.role;
  out.samples.assign(static_cast<std::size_t>(n), 0.0f);
  Rng rng(hash_combine(seed, kEmbedStream));
  const int off = rng.uniform_int(0, n - static_cast<int>(token.size()));
  std::copy(token.samples.begin(), token.samples.end(),
            out.samples.begin() + off);
  return out;
}

std::uint64_t corpus_checksum(const KeywordCorpus& corpus) {
  std::uint64_t h = fnv1a64_basis;
  h = fold_value(h, corpus.num_classes);
  h = fold_value(h, corpus.sample_rate);
  for (const auto* split : {&corpus.train, &corpus.held_out}) {
    const std::uint64_t count = split->size();
    h = fold_value(h, count);
    for (const KeywordExample& ex : *split) {
      h = fold_value(h, ex.label);
      h = fold_value(h, ex.seed);
      const std::uint64_t len = ex.wave.samples.size();
      h = fold_value(h, len);
      h = fnv1a64_fold(h, ex.wave.samples.data(),
                     ex.wave.samples.size() * sizeof(float));
    }
  }
  return h;
}

void ProxyTrainConfig::validate() const {
  if (width <= 0 || layers <= 0) {
    throw ConfigError("proxy encoder dims must be positive");
  }
  if (kernel <= 0 || kernel % 2 == 0) {
    throw ConfigError("proxy conv kernel must be positive and odd");
  }
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (max_steps <= 0) throw ConfigError("max_steps must be positive");
  if (threads <= 0) throw ConfigError("threads must be positive");
  stft.validate();
}

ProxyRecognizer train_proxy(const KeywordCorpus& corpus, ProxyArch arch,
                            std::uint64_t seed, const ProxyTrainConfig& cfg) {
  cfg.validate();
  cfg.mel.validate(corpus.sample_rate);
  if (corpus.num_classes < 2) {
    throw ConfigError("corpus needs >= 2 classes");
  }
  std::vector<int> per_class(static_cast<std::size_t>(corpus.num_classes), 0);
  for (const KeywordExample& ex : corpus.train) {
    if (ex.label < 0 || ex.label >= corpus.num_classes) {
      throw ConfigError("corpus label out of range");
    }
    ++per_class[static_cast<std::size_t>(ex.label)];
  }
  for (int c = 0; c < corpus.num_classes; ++c) {
    if (per_class[static_cast<std::size_t>(c)] < 20) {
      throw ConfigError("training needs >= 20 examples per class");
    }
  }

  const int n = static_cast<int>(corpus.train.size());
  std::vector<LogMelFrames> feats(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    feats[static_cast<std::size_t>(i)] = offset_normalized(
        log_mel(stft(corpus.train[static_cast<std::size_t>(i)].wave, cfg.stft),
                cfg.mel));
  }

  FrozenEncoder enc =
      init_frozen_encoder(arch, cfg.mel.num_mels, cfg.width, cfg.layers,
                          cfg.kernel, hash_combine(seed, kInitStream));
  nn::ParamMap<float> params = enc.params;
  {
    Rng rng(hash_combine(hash_combine(seed, kInitStream), 1));
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.width));
    nn::Tensor<float> w;
    w.shape = {corpus.num_classes, cfg.width};
    w.data.resize(static_cast<std::size_t>(corpus.num_classes) *
                  static_cast<std::size_t>(cfg.width));
    for (float& v : w.data) {
      v = static_cast<float>(rng.uniform(-bound, bound));
    }
    nn::Tensor<float> b;
    b.shape = {corpus.num_classes};
    b.data.assign(static_cast<std::size_t>(corpus.num_classes), 0.0f);
    params.emplace("head.w", std::move(w));
    params.emplace("head.b", std::move(b));
  }

  nn::AdamState<float> adam;
  const int workers = std::min(cfg.threads, cfg.batch_size);
  for (long step = 0; step < cfg.max_steps; ++step) {
    const std::vector<int> batch =
        pick_batch(n, cfg.batch_size,
                   hash_combine(hash_combine(seed, kBatchStream),
                                static_cast<std::uint64_t>(step)));
    const int slots = static_cast<int>(batch.size());
    std::vector<SlotOut> outs(static_cast<std::size_t>(slots));

    auto work = [&](int first) {
      for (int s = first; s < slots; s += workers) {
        const int i = batch[static_cast<std::size_t>(s)];
        outs[static_cast<std::size_t>(s)] = run_proxy_slot(
            params, arch, cfg.layers, cfg.width,
            feats[static_cast<std::size_t>(i)],
            corpus.train[static_cast<std::size_t>(i)].label);
      }
    };
    if (workers <= 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errs(static_cast<std::size_t>(workers));
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            work(w);
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

    // Fixed slot-order reduction keeps the update identical for any thread
    // count.
    nn::ParamMap<float> grads;
    double loss = 0.0;
    for (const SlotOut& out : outs) {
      loss += out.loss;
      for (const auto& [name, g] : out.grads) {
        auto it = grads.find(name);
        if (it == grads.end()) {
          grads.emplace(name, g);
        } else {
          for (std::size_t k = 0; k < g.data.size(); ++k) {
            it->second.data[k] += g.data[k];
          }
        }
      }
    }
    const float scale = 1.0f / static_cast<float>(slots);
    for (auto& [name, g] : grads) {
      for (float& v : g.data) v *= scale;
    }
    loss /= slots;
    if (!std::isfinite(loss)) {
      throw Diverged("proxy training loss became non-finite", step);
    }
    nn::adam_step(params, grads, adam, cfg.adam);
  }

  ProxyRecognizer rec;
  rec.encoder.arch = arch;
  rec.encoder.mel_dim = cfg.mel.num_mels;
  rec.encoder.width = cfg.width;
  rec.encoder.layers = cfg.layers;
  rec.encoder.kernel = cfg.kernel;
  rec.num_classes = corpus.num_classes;
  rec.stft_cfg = cfg.stft;
  rec.mel_cfg = cfg.mel;
  for (auto& [name, tensor] : params) {
    (name.rfind("head.", 0) == 0 ? rec.head : rec.encoder.params)
        .emplace(name, std::move(tensor));
  }

  if (!corpus.held_out.empty()) {
    int correct = 0;
    for (const KeywordExample& ex : corpus.held_out) {
      if (proxy_predict(rec, proxy_features(rec, ex.wave)) == ex.label) {
        ++correct;
      }
    }
    rec.held_out_accuracy =
        static_cast<double>(correct) / static_cast<double>(corpus.held_out.size());
  }
  rec.frozen = true;
  return rec;
}

std::vector<float> proxy_logits(const ProxyRecognizer& rec,
                                const LogMelFrames& feats) {
  if (feats.num_frames < 1 || feats.num_mels != rec.encoder.mel_dim) {
    throw ShapeMismatch("recognizer expects [T x " +
                        std::to_string(rec.encoder.mel_dim) +
                        "] features with T >= 1");
  }
  nn::ParamMap<float> params = rec.encoder.params;
  params.emplace("head.w", head_tensor(rec, "head.w"));
  params.emplace("head.b", head_tensor(rec, "head.b"));
  return logits_for(params, rec.encoder.arch, rec.encoder.layers,
                    rec.encoder.width, offset_normalized(feats));
}

int proxy_predict(const ProxyRecognizer& rec, const LogMelFrames& feats) {
  return argmax(proxy_logits(rec, feats));
}

LogMelFrames proxy_features(const ProxyRecognizer& rec, const Waveform& wave) {
  return log_mel(stft(wave, rec.stft_cfg), rec.mel_cfg);
}

double proxy_error_rate(const std::vector<LogMelFrames>& features,
                        const std::vector<int>& labels,
                        const ProxyRecognizer& rec) {
  if (features.size() != labels.size() || features.empty()) {
    throw ShapeMismatch("need one label per example and >= 1 example");
  }
  int wrong = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (proxy_predict(rec, features[i]) != labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(features.size());
}

double proxy_error_rate(const std::vector<Waveform>& waves,
                        const std::vector<int>& labels,
                        const ProxyRecognizer& rec) {
  if (waves.size() != labels.size() || waves.empty()) {
    throw ShapeMismatch("need one label per example and >= 1 example");
  }
  std::vector<LogMelFrames> feats;
  feats.reserve(waves.size());
  for (const Waveform& w : waves) feats.push_back(proxy_features(rec, w));
  return proxy_error_rate(feats, labels, rec);
}

void save_proxy(const ProxyRecognizer& rec, const std::string& path) {
  nlohmann::json j;
  j["proxy"] = {
      {"arch", arch_name(rec.encoder.arch)},
      {"mel_dim", rec.encoder.mel_dim},
      {"width", rec.encoder.width},
      {"layers", rec.encoder.layers},
      {"kernel", rec.encoder.kernel},
      {"num_classes", rec.num_classes},
      {"frozen", rec.frozen},
      {"held_out_accuracy", rec.held_out_accuracy},
      {"stft",
       {{"window_len", rec.stft_cfg.window_len},
        {"hop", rec.stft_cfg.hop},
        {"fft_size", rec.stft_cfg.fft_size},
        {"window",
         rec.stft_cfg.window == WindowKind::kHann ? "hann" : "rect"}}},
      {"mel",
       {{"num_mels", rec.mel_cfg.num_mels},
        {"f_min", rec.mel_cfg.f_min},
        {"f_max", rec.mel_cfg.f_max},
        {"log_floor", rec.mel_cfg.log_floor}}},
  };
  CheckpointPayload payload;
  payload.config_json = j.dump();
  payload.tensors = rec.encoder.params;
  payload.tensors.emplace("head.w", head_tensor(rec, "head.w"));
  payload.tensors.emplace("head.b", head_tensor(rec, "head.b"));
  write_checkpoint(path, kProxyMagic, kProxyVersion, payload);
}

ProxyRecognizer load_proxy(const std::string& path) {
  CheckpointPayload payload = read_checkpoint(path, kProxyMagic, kProxyVersion);
  ProxyRecognizer rec;
  try {
    const nlohmann::json j = nlohmann::json::parse(payload.config_json);
    const nlohmann::json& p = j.at("proxy");
    rec.encoder.arch = arch_from_name(p.at("arch").get<std::string>());
    rec.encoder.mel_dim = p.at("mel_dim").get<int>();
    rec.encoder.width = p.at("width").get<int>();
    rec.encoder.layers = p.at("layers").get<int>();
    rec.encoder.kernel = p.at("kernel").get<int>();
    rec.num_classes = p.at("num_classes").get<int>();
    rec.frozen = p.at("frozen").get<bool>();
    rec.held_out_accuracy = p.at("held_out_accuracy").get<double>();
    const nlohmann::json& s = p.at("stft");
    rec.stft_cfg.window_len = s.at("window_len").get<int>();
    rec.stft_cfg.hop = s.at("hop").get<int>();
    rec.stft_cfg.fft_size = s.at("fft_size").get<int>();
    rec.stft_cfg.window = s.at("window").get<std::string>() == "hann"
                              ? WindowKind::kHann
                              : WindowKind::kRectangular;
    const nlohmann::json& m = p.at("mel");
    rec.mel_cfg.num_mels = m.at("num_mels").get<int>();
    rec.mel_cfg.f_min = m.at("f_min").get<double>();
    rec.mel_cfg.f_max = m.at("f_max").get<double>();
    rec.mel_cfg.log_floor = m.at("log_floor").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpoint(std::string("bad recognizer config: ") + e.what());
  }
  if (rec.num_classes < 2) {
    throw CorruptCheckpoint("recognizer config has < 2 classes");
  }

  // The stored tensor set must match the architecture in the config exactly.
  nn::ParamMap<float> expected;
  try {
    expected = init_frozen_encoder(rec.encoder.arch, rec.encoder.mel_dim,
                                   rec.encoder.width, rec.encoder.layers,
                                   rec.encoder.kernel, 0)
                   .params;
  } catch (const ConfigError& e) {
    throw CorruptCheckpoint(std::string("bad recognizer config: ") + e.what());
  }
  nn::Tensor<float> hw;
  hw.shape = {rec.num_classes, rec.encoder.width};
  nn::Tensor<float> hb;
  hb.shape = {rec.num_classes};
  expected.emplace("head.w", std::move(hw));
  expected.emplace("head.b", std::move(hb));
  if (payload.tensors.size() != expected.size()) {
    throw CorruptCheckpoint("recognizer tensor count mismatch");
  }
  for (const auto& [name, tensor] : expected) {
    auto it = payload.tensors.find(name);
    if (it == payload.tensors.end()) {
      throw CorruptCheckpoint("recognizer tensor missing: " + name);
    }
    if (it->second.shape != tensor.shape) {
      throw CorruptCheckpoint("recognizer tensor shape mismatch: " + name);
    }
  }
  for (auto& [name, tensor] : payload.tensors) {
    (name.rfind("head.", 0) == 0 ? rec.head : rec.encoder.params)
        .emplace(name, std::move(tensor));
  }
  return rec;
}

}  // namespace aec
