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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "aec/baselines.hpp"
#include "aec/data_pipeline.hpp"
#include "aec/errors.hpp"
#include "aec/fft.hpp"
#include "aec/rng.hpp"
#include "aec/room_sim.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace aec;
using namespace aec::testing;

namespace {

// SDR with optimal scalar gain fit of the estimate to the reference.
// Skips one analysis window at each end: overlap-add synthesis of a
// processed spectrogram is unreliable where window overlap is partial.
double sdr_db(const Waveform& estimate, const Waveform& reference) {
  const std::size_t n = std::min(estimate.size(), reference.size());
  REQUIRE(n > 1024);
  const std::size_t lo = 512, hi = n - 512;
  double se = 0.0, ss = 0.0, cross = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    ss += static_cast<double>(reference.samples[i]) * reference.samples[i];
    se += static_cast<double>(estimate.samples[i]) * estimate.samples[i];
    cross += static_cast<double>(reference.samples[i]) * estimate.samples[i];
  }
  const double g = se > 0.0 ? cross / se : 0.0;
  double err = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double d = reference.samples[i] - g * estimate.samples[i];
    err += d * d;
  }
  return 10.0 * std::log10(ss / std::max(err, 1e-30));
}

double erle_db(const Waveform& probe, const Waveform& erased,
               std::size_t begin, std::size_t end) {
  double p = 0.0, e = 0.0;
  for (std::size_t i = begin; i < end && i < erased.size(); ++i) {
    p += static_cast<double>(probe.samples[i]) * probe.samples[i];
    e += static_cast<double>(erased.samples[i]) * erased.samples[i];
  }
  return 10.0 * std::log10(p / std::max(e, 1e-30));
}

RoomConfig mild_room() {
  RoomConfig room;
  room.dimensions = {4.0, 5.0, 3.0};
  room.mic_position = {1.0, 2.0, 1.5};
  room.loudspeaker_position = {1.05, 2.0, 1.5};
  room.target_position = {2.2, 3.4, 1.1};
  room.absorption = 0.4;
  room.max_image_order = 4;
  return room;
}

UtteranceExample quick_example(std::uint64_t seed, double terr_db,
                               double tnr_db = 25.0, double hardness = 0.3) {
  return synth_example(make_speech_like(1.3, seed),
                       make_speech_like(1.3, seed + 500),
                       make_background_noise(1.3, seed + 900), mild_room(),
                       MixSpec{tnr_db, terr_db}, hardness, seed);
}

}  // namespace

TEST_CASE("nlms config validation") {
  NlmsConfig cfg;
  cfg.taps_per_band = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = NlmsConfig{};
  cfg.step_size = 2.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = NlmsConfig{};
  cfg.step_size = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_NOTHROW(NlmsConfig{}.validate());
}

TEST_CASE("zero reference leaves the probe untouched") {
  const Waveform probe = make_voiced(16000 * 2, 3);
  Waveform silence = probe;
  std::fill(silence.samples.begin(), silence.samples.end(), 0.0f);
  const Waveform erased = subband_nlms_erase(probe, silence, NlmsConfig{});
  // Interior comparison skips windowing edge effects.
  const std::size_t lo = 400, hi = erased.size() - 400;
  double sig = 0.0, err = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    sig += static_cast<double>(probe.samples[i]) * probe.samples[i];
    const double d = probe.samples[i] - erased.samples[i];
    err += d * d;
  }
  CHECK(10.0 * std::log10(sig / std::max(err, 1e-30)) >= 50.0);
}

TEST_CASE("pure linear echo is cancelled past twenty decibels") {
  // probe = reference * 20-tap FIR; ERLE over the final second after
  // adaptation must clear 20 dB for every seed.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Waveform reference = make_noise(16000 * 3, seed);
    Rng rng(hash_combine(seed, 77));
    std::vector<float> fir(20);
    for (float& v : fir) v = static_cast<float>(rng.uniform(-0.5, 0.5));
    Waveform probe;
    probe.sample_rate = reference.sample_rate;
    probe.samples = fft_convolve(reference.samples, fir);
    probe.samples.resize(reference.size());

    const Waveform erased = subband_nlms_erase(probe, reference, NlmsConfig{});
    // Stop one window short of the end: final samples come from partial
    // overlap-add coverage and do not reflect canceller performance.
    const double erle =
        erle_db(probe, erased, erased.size() - 16000, erased.size() - 512);
    CHECK(erle >= 20.0);
  }
}

TEST_CASE("double talk still improves the probe") {
  // Double-talk operating point: a small step with a level-scaled
  // regularizer, so adaptation pauses when the far end goes quiet instead
  // of chasing near-end speech through silent reference bands.
  NlmsConfig cfg;
  cfg.step_size = 0.1;
  cfg.regularization = 0.1;
  double mean_delta = 0.0;
  for (std::uint64_t seed = 40; seed < 60; ++seed) {
    UtteranceExample ex =
        synth_example(make_speech_like(2.0, seed), make_speech_like(2.0, seed + 500),
                      make_background_noise(2.0, seed + 900), mild_room(),
                      MixSpec{25.0, -10.0}, 0.3, seed);
    const Waveform erased = subband_nlms_erase(ex.probe, ex.reference, cfg);
    const double delta =
        sdr_db(erased, ex.residual) - sdr_db(ex.probe, ex.residual);
    CHECK(delta > 0.0);
    mean_delta += delta;
  }
  CHECK(mean_delta / 20.0 >= 1.0);
}

TEST_CASE("filters stay bounded and finite across step sizes") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(hash_combine(seed, 5));
    NlmsConfig cfg;
    cfg.step_size = rng.uniform(0.05, 1.95);
    const Waveform reference = make_voiced(16000 * 2, seed + 100);
    const Waveform probe = make_voiced(16000 * 2, seed + 300);
    std::vector<std::complex<float>> weights;
    const Spectrogram err = subband_nlms_cancel(
        stft(probe, cfg.stft), stft(reference, cfg.stft), cfg, &weights);
    for (const std::complex<float>& v : err.data) {
      REQUIRE(std::isfinite(v.real()));
      REQUIRE(std::isfinite(v.imag()));
    }
    for (const std::complex<float>& v : weights) {
      REQUIRE(std::isfinite(v.real()));
      REQUIRE(std::isfinite(v.imag()));
      REQUIRE(std::abs(v) < 1e4f);
    }
  }
}

TEST_CASE("adaptation is frequency-local") {
  const Waveform probe = make_voiced(16000, 7);
  const Waveform reference = make_voiced(16000, 8);
  NlmsConfig cfg;
  Spectrogram ref_spec = stft(reference, cfg.stft);
  // Silence bands 100..119 in the reference only.
  for (int t = 0; t < ref_spec.num_frames; ++t) {
    for (int f = 100; f < 120; ++f) ref_spec.at(t, f) = {0.0f, 0.0f};
  }
  std::vector<std::complex<float>> weights;
  subband_nlms_cancel(stft(probe, cfg.stft), ref_spec, cfg, &weights);
  for (int f = 0; f < 257; ++f) {
    float mag = 0.0f;
    for (int k = 0; k < cfg.taps_per_band; ++k) {
      mag += std::abs(weights[static_cast<std::size_t>(f) * 8 + k]);
    }
    if (f >= 100 && f < 120) {
      CHECK(mag == 0.0f);  // no update signal ever reached these bands
    }
  }
}

TEST_CASE("rate mismatch is rejected") {
  Waveform a = make_noise(16000, 1);
  Waveform b = make_noise(16000, 2);
  b.sample_rate = 8000;
  CHECK_THROWS_AS(subband_nlms_erase(a, b, NlmsConfig{}), RateMismatch);
}

TEST_CASE("ideal ratio mask limits and value") {
  const Waveform r = make_voiced(16000, 11);
  const Waveform e = make_voiced(16000, 12);
  const StftConfig sc;
  const Spectrogram rs = stft(r, sc);
  const Spectrogram es = stft(e, sc);
  Spectrogram zeros = rs;
  std::fill(zeros.data.begin(), zeros.data.end(),
            std::complex<float>{0.0f, 0.0f});

  const std::vector<float> ones_mask = ideal_ratio_mask(rs, zeros, IrmConfig{});
  const std::vector<float> zeros_mask = ideal_ratio_mask(zeros, es, IrmConfig{});
  const std::vector<float> r_mag = rs.magnitude();
  const std::vector<float> e_mag = es.magnitude();
  for (std::size_t i = 0; i < ones_mask.size(); ++i) {
    if (r_mag[i] > 0.05f) CHECK(ones_mask[i] > 0.999f);
    if (e_mag[i] > 0.05f) CHECK(zeros_mask[i] < 1e-3f);
    CHECK(ones_mask[i] >= 0.0f);
    CHECK(ones_mask[i] <= 1.0f);
  }

  // Equal magnitudes give 0.5^0.5 wherever the stabilizing floor is
  // negligible next to the bin energy.
  const std::vector<float> equal_mask = ideal_ratio_mask(rs, rs, IrmConfig{});
  for (std::size_t i = 0; i < equal_mask.size(); ++i) {
    if (r_mag[i] > 0.05f) {
      CHECK(equal_mask[i] == doctest::Approx(0.70710678f).epsilon(1e-4));
    }
  }

  Spectrogram short_spec = rs;
  short_spec.num_frames -= 1;
  short_spec.data.resize(static_cast<std::size_t>(short_spec.num_frames) *
                         short_spec.num_bins);
  CHECK_THROWS_AS(ideal_ratio_mask(short_spec, es, IrmConfig{}),
                  ShapeMismatch);
}

TEST_CASE("mask is monotone in echo magnitude") {
  const Waveform r = make_voiced(16000, 13);
  const Waveform e = make_voiced(16000, 14);
  const StftConfig sc;
  const Spectrogram rs = stft(r, sc);
  Spectrogram es = stft(e, sc);
  const std::vector<float> base = ideal_ratio_mask(rs, es, IrmConfig{});
  for (auto& v : es.data) v *= 2.0f;
  const std::vector<float> louder = ideal_ratio_mask(rs, es, IrmConfig{});
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(louder[i] <= base[i] + 1e-7f);
  }
}

TEST_CASE("all-ones and all-zero masks bracket the erasure") {
  const Waveform probe = make_voiced(16000, 15);
  const StftConfig sc;
  const Spectrogram spec = stft(probe, sc);
  const std::vector<float> ones(spec.data.size(), 1.0f);
  const std::vector<float> zeros(spec.data.size(), 0.0f);

  const Waveform same = apply_mask_erase(probe, ones, sc);
  const std::size_t lo = 400, hi = same.size() - 400;
  double sig = 0.0, err = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    sig += static_cast<double>(probe.samples[i]) * probe.samples[i];
    const double d = probe.samples[i] - same.samples[i];
    err += d * d;
  }
  CHECK(10.0 * std::log10(sig / std::max(err, 1e-30)) >= 50.0);

  const Waveform silent = apply_mask_erase(probe, zeros, sc);
  for (float s : silent.samples) CHECK(std::fabs(s) < 1e-6f);

  CHECK_THROWS_AS(
      apply_mask_erase(probe, std::vector<float>(10, 1.0f), sc),
      ShapeMismatch);
}

TEST_CASE("oracle mask recovers the residual under heavy echo") {
  // TERR -10 dB: echo dominates. Averaged across 50 mixtures the oracle
  // mask must lift SDR against the residual by at least 10 dB, and every
  // single mixture must come out ahead of the raw probe.
  double gain_sum = 0.0;
  for (std::uint64_t seed = 60; seed < 110; ++seed) {
    UtteranceExample ex =
        synth_example(make_speech_like(2.0, seed), make_speech_like(2.0, seed + 500),
                      make_background_noise(2.0, seed + 900), mild_room(),
                      MixSpec{25.0, -10.0}, 0.3, seed);
    const StftConfig sc;
    const std::vector<float> mask = ideal_ratio_mask(
        stft(ex.residual, sc), stft(ex.echoed_reference, sc), IrmConfig{});
    const Waveform erased = apply_mask_erase(ex.probe, mask, sc);
    const double gain = sdr_db(erased, ex.residual) - sdr_db(ex.probe, ex.residual);
    CHECK(gain > 0.0);
    gain_sum += gain;
  }
  CHECK(gain_sum / 50.0 >= 10.0);
}

TEST_CASE("mask predictor learns more than a constant guess") {
  std::vector<UtteranceExample> train, held_out;
  for (std::uint64_t seed = 200; seed < 208; ++seed) {
    train.push_back(quick_example(seed, -8.0, 18.0));
  }
  for (std::uint64_t seed = 300; seed < 303; ++seed) {
    held_out.push_back(quick_example(seed, -8.0, 18.0));
  }
  IrmPredictorConfig cfg;
  cfg.steps = 600;
  const IrmPredictor predictor = train_irm_predictor(train, cfg, 42);

  // Masks are squashed into [0,1] by construction.
  const std::vector<float> mask =
      predictor.predict(held_out[0].probe_feats, held_out[0].reference_feats);
  for (float v : mask) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }

  // Fitted from mel features, the per-bin mask keeps an irreducible error
  // floor near 0.044: mel analysis cannot resolve single-bin harmonic
  // structure. 0.05 reflects converged training, not a loose bound.
  const double train_mse = irm_predictor_mse(predictor, train);
  CHECK(train_mse <= 0.05);

  const double held_mse = irm_predictor_mse(predictor, held_out);
  const double ones_mse = constant_mask_mse(1.0f, held_out);
  CHECK(held_mse < ones_mse);
}

TEST_CASE("mask predictor training is deterministic") {
  std::vector<UtteranceExample> train;
  for (std::uint64_t seed = 400; seed < 403; ++seed) {
    train.push_back(quick_example(seed, -6.0));
  }
  IrmPredictorConfig cfg;
  cfg.steps = 20;
  const IrmPredictor a = train_irm_predictor(train, cfg, 7);
  const IrmPredictor b = train_irm_predictor(train, cfg, 7);
  for (const auto& [name, tensor] : a.params) {
    CHECK(tensor.data == b.params.at(name).data);
  }
}

TEST_CASE("missing stems are rejected") {
  UtteranceExample ex = quick_example(500, -5.0);
  ex.residual.samples.clear();
  CHECK_THROWS_AS(train_irm_predictor({ex}, IrmPredictorConfig{}, 1),
                  MissingStems);
}
