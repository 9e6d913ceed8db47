// Copyright (c) 2026 speakerkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "spk/error.h"
#include "spk/feat/fbank.h"
#include "spk/feat/fft.h"
#include "spk/feat/pipeline.h"
#include "spk/feat/signal.h"
#include "spk/random.h"
#include "test_util.h"

namespace spk::feat {
namespace {

using spk::testing::gaussian_noise;
using spk::testing::sine;

// Magnitude of the DFT of x at frequency f (Hz), evaluated directly.
double dft_magnitude(std::span<const float> x, double f, double rate) {
  std::complex<double> acc = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    acc += static_cast<double>(x[n]) *
           std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(n) / rate);
  }
  return std::abs(acc) / static_cast<double>(x.size());
}

double snr_db(std::span<const float> clean, std::span<const float> mixed) {
  double ps = 0.0;
  double pn = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    ps += double(clean[i]) * clean[i];
    const double d = double(mixed[i]) - clean[i];
    pn += d * d;
  }
  return 10.0 * std::log10(ps / pn);
}

TEST(Fft, ConvolutionMatchesDirectSum) {
  const std::vector<double> a{1, 2, 3, -1, 0.5};
  const std::vector<double> b{0.5, -2, 1};
  const auto c = fft_convolve(a, b);
  ASSERT_EQ(c.size(), a.size() + b.size() - 1);
  for (std::size_t n = 0; n < c.size(); ++n) {
    double ref = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (n >= k && n - k < a.size()) ref += a[n - k] * b[k];
    }
    EXPECT_NEAR(c[n], ref, 1e-12);
  }
}

TEST(Resample, LengthsFollowTheRateRatio) {
  EXPECT_EQ(resample(std::vector<float>(8000, 0.f), 8000, 16000).size(), 16000u);
  EXPECT_EQ(resample(std::vector<float>(16000, 0.f), 16000, 8000).size(), 8000u);
  EXPECT_EQ(resample(std::vector<float>(16000, 0.f), 16000 * 0.9, 16000).size(), 17778u);
  EXPECT_EQ(resample(std::vector<float>(16000, 0.f), 16000 * 1.1, 16000).size(), 14545u);
  EXPECT_TRUE(resample(std::vector<float>{}, 8000, 16000).empty());
  EXPECT_THROW(resample(std::vector<float>(10, 0.f), 0, 16000), UsageError);
}

TEST(Resample, DcGainIsOneEverywhere) {
  const auto out = resample(std::vector<float>(4000, 0.25f), 8000, 16000);
  for (const float v : out) EXPECT_NEAR(v, 0.25f, 1e-6);
}

TEST(Resample, UpsampledToneMatchesAnalyticSignal) {
  const auto in = sine(1000.0, 8000, 8000);
  const auto out = resample(in, 8000, 16000);
  // Away from the edges the output is the same tone sampled at 16 kHz.
  double max_err = 0.0;
  for (std::size_t n = 200; n + 200 < out.size(); ++n) {
    const double ref = 0.5 * std::sin(2.0 * std::numbers::pi * 1000.0 * n / 16000.0);
    max_err = std::max(max_err, std::abs(out[n] - ref));
  }
  EXPECT_LT(max_err, 5e-3);
  EXPECT_NEAR(dft_magnitude(out, 1000.0, 16000), 0.25, 0.005);
}

TEST(Resample, DownsamplingRejectsContentAboveNyquist) {
  const auto in = sine(6000.0, 16000, 16000);
  const auto out = resample(in, 16000, 8000);
  // A 6 kHz tone would alias to 2 kHz at 8 kHz.
  const double alias = dft_magnitude(std::span(out).subspan(200, 7600), 2000.0, 8000);
  EXPECT_LT(alias, 0.25 * 1e-2);
  const auto pass = resample(sine(1000.0, 16000, 16000), 16000, 8000);
  EXPECT_NEAR(dft_magnitude(std::span(pass).subspan(200, 7600), 1000.0, 8000), 0.25, 0.01);
}

TEST(Speed, LengthAndLabelRemap) {
  const int n = 5;
  SpeedPerturber sp({0.9, 1.0, 1.1}, {1, 1, 1}, n);
  EXPECT_EQ(sp.label_space(), 3 * n);
  Sample s;
  s.key = "u";
  s.sample_rate = 16000;
  s.speaker_id = 3;
  s.payload = Wave(16000, 0.1f);
  const auto slow = speed_perturb(s, 0.9, sp.slot(0.9), n);
  EXPECT_NEAR(static_cast<double>(slow.wave().size()), 17778.0, 1.0);
  EXPECT_EQ(slow.speaker_id, 3 + n);
  const auto fast = speed_perturb(s, 1.1, sp.slot(1.1), n);
  EXPECT_NEAR(static_cast<double>(fast.wave().size()), 14545.0, 1.0);
  EXPECT_EQ(fast.speaker_id, 3 + 2 * n);
  const auto same = speed_perturb(s, 1.0, sp.slot(1.0), n);
  EXPECT_EQ(same.wave(), s.wave());
  EXPECT_EQ(same.speaker_id, 3);
  EXPECT_THROW(sp.slot(1.2), UsageError);
}

TEST(Speed, IdSpaceIsCoveredWithoutCollisions) {
  const int n = 4;
  SpeedPerturber sp({0.9, 1.0, 1.1}, {1, 1, 1}, n);
  auto rng = make_rng(1, 3);
  std::set<int> ids;
  for (int trial = 0; trial < 600; ++trial) {
    Sample s;
    s.sample_rate = 16000;
    s.speaker_id = trial % n;
    s.payload = Wave(400, 0.f);
    const auto out = sp.apply(s, rng);
    EXPECT_EQ(out.speaker_id % n, s.speaker_id);
    ids.insert(out.speaker_id);
  }
  EXPECT_EQ(ids.size(), static_cast<std::size_t>(3 * n));
  EXPECT_EQ(*ids.rbegin(), 3 * n - 1);
}

TEST(Chunk, ExactLengthAndTiling) {
  auto rng = make_rng(2, 4);
  const std::vector<float> shortw{1, 2, 3};
  EXPECT_EQ(random_chunk(shortw, 7, rng), (Wave{1, 2, 3, 1, 2, 3, 1}));
  const std::vector<float> exact{4, 5};
  EXPECT_EQ(random_chunk(exact, 2, rng), exact);
  EXPECT_THROW(random_chunk(std::vector<float>{}, 3, rng), DataError);
}

TEST(Chunk, StartOffsetsAreUniform) {
  const std::size_t positions = 100;
  const std::size_t len = 50;
  std::vector<float> wave(len + positions - 1);
  for (std::size_t i = 0; i < wave.size(); ++i) wave[i] = static_cast<float>(i);
  auto rng = make_rng(3, 4);
  std::vector<double> counts(positions, 0.0);
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) counts[static_cast<std::size_t>(random_chunk(wave, len, rng)[0])] += 1;
  const double expected = static_cast<double>(draws) / positions;
  double chi2 = 0.0;
  for (const double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 99 degrees of freedom: the 0.999 quantile is about 148.
  EXPECT_LT(chi2, 148.0);
}

TEST(Chunk, FbankOfAChunkHasChunkFrames) {
  PipelineConfig cfg;
  EXPECT_EQ(cfg.chunk_samples(), 199u * 160u + 400u);
  FbankComputer fb(FbankOptions::from(cfg));
  EXPECT_EQ(fb.num_frames(cfg.chunk_samples()), 200u);
  EXPECT_EQ(fb.num_frames(cfg.chunk_samples() - 1), 199u);
}

TEST(Noise, MixHitsTargetSnr) {
  auto rng = make_rng(4, 0);
  std::uniform_real_distribution<double> snr_dist(-5.0, 20.0);
  std::uniform_int_distribution<std::size_t> len_dist(2000, 20000);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = len_dist(rng);
    const auto clean = gaussian_noise(n, 100 + trial, 0.05);
    const auto noise = gaussian_noise(n / 2 + 7, 900 + trial, 0.2);
    const double target = snr_dist(rng);
    const auto mixed = add_noise(clean, noise, target, static_cast<std::size_t>(trial));
    ASSERT_EQ(mixed.size(), clean.size());
    EXPECT_NEAR(snr_db(clean, mixed), target, 0.1) << "trial " << trial;
  }
}

TEST(Noise, LoudMixIsRescaledNotClipped) {
  const auto clean = sine(300.0, 16000, 16000, 0.9);
  const auto noise = gaussian_noise(16000, 5, 0.5);
  const auto mixed = add_noise(clean, noise, 0.0);
  EXPECT_LE(peak_amplitude(mixed), 1.0 + 1e-6);
  // A common gain keeps the mixture ratio: mixed = g (clean + k noise).
  double cc = 0.0;
  double cm = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    cc += double(clean[i]) * clean[i];
    cm += double(clean[i]) * mixed[i];
  }
  EXPECT_GT(cm / cc, 0.0);
  EXPECT_LT(cm / cc, 1.0);
}

TEST(Reverb, DeltaImpulseIsIdentity) {
  const auto wave = gaussian_noise(3000, 6, 0.3);
  const auto out = add_reverb(wave, std::vector<float>{1.0f});
  ASSERT_EQ(out.size(), wave.size());
  for (std::size_t i = 0; i < wave.size(); ++i) EXPECT_NEAR(out[i], wave[i], 1e-6);
}

TEST(Reverb, DelayedImpulseShiftsAndKeepsPeak) {
  const auto wave = gaussian_noise(3000, 7, 0.3);
  std::vector<float> rir(11, 0.f);
  rir[10] = 0.5f;
  const auto out = add_reverb(wave, rir);
  ASSERT_EQ(out.size(), wave.size());
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(out[i], 0.0, 1e-6);
  // Output peak is renormalized to the input peak.
  const double gain = peak_amplitude(wave) / peak_amplitude(std::span(wave).first(2990));
  for (std::size_t i = 10; i < wave.size(); ++i) EXPECT_NEAR(out[i], wave[i - 10] * gain, 1e-5);
}

TEST(Augment, ProbabilityAndCategories) {
  AudioBank noise({{"noise", gaussian_noise(5000, 8, 0.1)}});
  AugmentOptions opts{0.6, {{"noise", {0, 15}}}};
  const auto wave = sine(440.0, 16000, 4000, 0.3);
  auto rng = make_rng(9, 5);
  int changed = 0;
  for (int i = 0; i < 2000; ++i) {
    if (augment(wave, noise, {}, opts, rng) != wave) ++changed;
  }
  EXPECT_NEAR(changed / 2000.0, 0.6, 0.04);
  AudioBank music({{"music", gaussian_noise(5000, 8, 0.1)}});
  AugmentOptions always{1.0, {{"noise", {0, 15}}}};
  EXPECT_THROW(augment(wave, music, {}, always, rng), UsageError);
  EXPECT_EQ(augment(wave, {}, {}, always, rng), wave);
}

TEST(Fbank, FrameCountAndShape) {
  FbankOptions o;
  FbankComputer fb(o);
  EXPECT_EQ(fb.frame_length(), 400u);
  EXPECT_EQ(fb.frame_shift(), 160u);
  EXPECT_EQ(fb.fft_size(), 512u);
  const auto f = fb.compute(gaussian_noise(16000, 10));
  EXPECT_EQ(f.rows(), 98);
  EXPECT_EQ(f.cols(), 80);
  EXPECT_THROW(fb.compute(std::vector<float>(399, 0.f)), DataError);
}

TEST(Fbank, SilenceHitsTheLogFloor) {
  const auto f = compute_fbank(std::vector<float>(16000, 0.f), {});
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    EXPECT_FLOAT_EQ(f.data()[i], static_cast<float>(std::log(1e-10)));
  }
}

TEST(Fbank, MelScaleAndCenters) {
  for (double hz : {0.0, 20.0, 700.0, 1000.0, 8000.0}) {
    // Equivalent base-10 form of the same mel scale.
    const double ref = 2595.0 * std::log10(1.0 + hz / 700.0);
    EXPECT_NEAR(hz_to_mel(hz), ref, 1e-4 * ref + 1e-12);
    EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
  }
  FbankComputer fb(FbankOptions{});
  const auto centers = fb.center_frequencies();
  ASSERT_EQ(centers.size(), 80u);
  const double lo = hz_to_mel(20.0);
  const double step = (hz_to_mel(8000.0) - lo) / 81.0;
  for (std::size_t b = 0; b < centers.size(); ++b) {
    EXPECT_NEAR(hz_to_mel(centers[b]), lo + (b + 1) * step, 1e-9);
  }
  // A tone at a filter center excites that filter most.
  for (std::size_t b : {10u, 30u, 55u, 75u}) {
    const auto f = fb.compute(sine(centers[b], 16000, 8000));
    Eigen::Index arg = 0;
    f.colwise().mean().maxCoeff(&arg);
    EXPECT_EQ(static_cast<std::size_t>(arg), b) << "center " << centers[b];
  }
}

TEST(Fbank, DitherNeedsAGenerator) {
  FbankOptions o;
  o.dither = 1.0;
  FbankComputer fb(o);
  EXPECT_THROW(fb.compute(std::vector<float>(1000, 0.f)), UsageError);
  auto a = make_rng(11, 6);
  auto b = make_rng(11, 6);
  EXPECT_EQ(fb.compute(std::vector<float>(1000, 0.f), &a), fb.compute(std::vector<float>(1000, 0.f), &b));
}

TEST(Cmvn, ColumnMeansVanish) {
  auto f = compute_fbank(gaussian_noise(32240, 12), {});
  cmvn(f, false);
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    double m = 0.0;
    for (Eigen::Index r = 0; r < f.rows(); ++r) m += f(r, c);
    EXPECT_LT(std::abs(m / f.rows()), 1e-6);
  }
  auto g = compute_fbank(gaussian_noise(32240, 13), {});
  cmvn(g, true);
  for (Eigen::Index c = 0; c < g.cols(); ++c) {
    double m = 0.0;
    double v = 0.0;
    for (Eigen::Index r = 0; r < g.rows(); ++r) m += g(r, c);
    m /= g.rows();
    for (Eigen::Index r = 0; r < g.rows(); ++r) v += (g(r, c) - m) * (g(r, c) - m);
    EXPECT_NEAR(v / g.rows(), 1.0, 1e-4);
  }
}

TEST(SpecAug, MasksAreBoundedBands) {
  auto rng = make_rng(14, 6);
  for (int trial = 0; trial < 50; ++trial) {
    RowMatrixXf f = RowMatrixXf::Constant(200, 80, 1.0f);
    spec_augment(f, {1, 10, 1, 8}, rng);
    int zero_rows = 0;
    int zero_cols = 0;
    for (Eigen::Index r = 0; r < f.rows(); ++r) zero_rows += (f.row(r).array() == 0).all();
    for (Eigen::Index c = 0; c < f.cols(); ++c) zero_cols += (f.col(c).array() == 0).all();
    EXPECT_GE(zero_rows, 1);
    EXPECT_LE(zero_rows, 10);
    EXPECT_GE(zero_cols, 1);
    EXPECT_LE(zero_cols, 8);
  }
}

std::vector<Sample> numbered_samples(int n) {
  std::vector<Sample> v;
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.key = std::to_string(i);
    s.speaker = "s" + std::to_string(i % 3);
    s.sample_rate = 16000;
    s.payload = Wave(1, 0.f);
    v.push_back(std::move(s));
  }
  return v;
}

TEST(Shuffle, PermutesWithinBufferWindows) {
  const int n = 1000;
  const std::size_t buffer = 64;
  ShuffleStage stage(std::make_unique<VectorStream>(numbered_samples(n)), buffer, 15);
  std::vector<int> order;
  while (auto s = stage.next()) order.push_back(std::stoi(s->key));
  ASSERT_EQ(order.size(), static_cast<std::size_t>(n));
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < n; ++i) EXPECT_EQ(sorted[i], i);
  int moved = 0;
  for (int pos = 0; pos < n; ++pos) {
    EXPECT_LT(std::abs(order[pos] - pos), static_cast<int>(buffer));
    moved += order[pos] != pos;
  }
  EXPECT_GT(moved, n / 2);
}

TEST(SpeakerTable, FirstSeenOrderAndRoundTrip) {
  spk::testing::TempDir dir("spk2id");
  const std::vector<std::string> labels{"b", "a", "b", "c", "a"};
  const auto t = SpeakerTable::build(labels);
  EXPECT_EQ(t.size(), 3);
  EXPECT_EQ(t.id("b"), 0);
  EXPECT_EQ(t.id("a"), 1);
  EXPECT_EQ(t.id("c"), 2);
  EXPECT_THROW(t.id("zzz"), DataError);
  t.save(dir.file("spk2id"));
  EXPECT_EQ(SpeakerTable::load(dir.file("spk2id")).labels(), t.labels());
  std::ofstream(dir.file("gap")) << "a 0\nb 2\n";
  EXPECT_THROW(SpeakerTable::load(dir.file("gap")), FormatError);
}

std::vector<Sample> speech_like_samples(int n, std::uint64_t seed) {
  std::vector<Sample> out;
  auto rng = make_rng(seed, 0);
  std::uniform_int_distribution<std::size_t> len(3000, 60000);
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.key = "u" + std::to_string(i);
    s.speaker = "spk" + std::to_string(i % 4);
    s.sample_rate = (i % 2) ? 16000 : 8000;
    s.payload = gaussian_noise(len(rng), seed * 1000 + i, 0.1);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Batch> run_pipeline(std::uint64_t seed, bool augment_on) {
  PipelineConfig cfg;
  cfg.batch_size = 4;
  cfg.shuffle_buffer = 8;
  cfg.dither = 1e-4;
  cfg.specaug = true;
  std::vector<std::string> labels{"spk0", "spk1", "spk2", "spk3"};
  AudioBank noise;
  AudioBank rir;
  if (augment_on) {
    noise = AudioBank({{"noise", gaussian_noise(40000, 21, 0.1)}, {"babble", gaussian_noise(9000, 22, 0.1)}});
    std::vector<float> impulse(800, 0.f);
    impulse[0] = 1.f;
    impulse[400] = 0.3f;
    rir = AudioBank({{"rir", impulse}});
  }
  Pipeline p(std::make_unique<VectorStream>(speech_like_samples(18, 5)), cfg,
             SpeakerTable::build(labels), noise, rir, seed);
  EXPECT_EQ(p.num_classes(), 12);
  std::vector<Batch> out;
  while (auto b = p.next()) out.push_back(std::move(*b));
  return out;
}

bool same_batches(const std::vector<Batch>& a, const std::vector<Batch>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].keys != b[i].keys || a[i].labels != b[i].labels || a[i].feats != b[i].feats) return false;
  }
  return true;
}

TEST(Pipeline, ChunksAreExactlyTwoHundredFramesWithZeroMeans) {
  const auto batches = run_pipeline(31, true);
  ASSERT_EQ(batches.size(), 4u);  // 18 samples, batch 4, remainder dropped
  for (const auto& b : batches) {
    EXPECT_EQ(b.frames, 200u);
    EXPECT_EQ(b.dims, 80u);
    ASSERT_EQ(b.feats.size(), b.size() * 200 * 80);
    for (const int label : b.labels) {
      EXPECT_GE(label, 0);
      EXPECT_LT(label, 12);
    }
  }
  // Without SpecAug zeroing, every per-utterance column mean vanishes.
  PipelineConfig cfg;
  cfg.batch_size = 3;
  Pipeline p(std::make_unique<VectorStream>(speech_like_samples(9, 6)), cfg,
             SpeakerTable::build(std::vector<std::string>{"spk0", "spk1", "spk2", "spk3"}), {}, {}, 1);
  while (auto b = p.next()) {
    for (std::size_t s = 0; s < b->size(); ++s) {
      for (std::size_t c = 0; c < 80; ++c) {
        double m = 0.0;
        for (std::size_t t = 0; t < 200; ++t) m += b->feats[(s * 200 + t) * 80 + c];
        EXPECT_LT(std::abs(m / 200.0), 1e-6);
      }
    }
  }
}

TEST(Pipeline, SameSeedSameBatchesDifferentSeedDiffers) {
  const auto a = run_pipeline(77, true);
  const auto b = run_pipeline(77, true);
  const auto c = run_pipeline(78, true);
  EXPECT_TRUE(same_batches(a, b));
  EXPECT_FALSE(same_batches(a, c));
}

TEST(Pipeline, EvalFeaturesResampleAndNormalize) {
  PipelineConfig cfg;
  const auto wave = gaussian_noise(8000, 40, 0.1);
  const auto f = eval_features(wave, 8000, cfg);
  EXPECT_EQ(f.rows(), 98);
  auto ref = compute_fbank(resample(wave, 8000, 16000), FbankOptions::from(cfg));
  cmvn(ref, false);
  EXPECT_EQ(f, ref);
}

}  // namespace
}  // namespace spk::feat
