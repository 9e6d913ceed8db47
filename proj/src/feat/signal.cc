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

#include "spk/feat/signal.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "spk/error.h"
#include "spk/feat/fft.h"
#include "spk/wav.h"

namespace spk::feat {

namespace {

constexpr int kNumZeros = 16;
constexpr double kCutoffRatio = 0.99;

}  // namespace

Wave resample(std::span<const float> wave, double from_rate, double to_rate) {
  if (!(from_rate > 0.0) || !(to_rate > 0.0)) {
    throw UsageError("resample: rates must be positive");
  }
  if (from_rate == to_rate) return Wave(wave.begin(), wave.end());
  const auto n_in = static_cast<std::ptrdiff_t>(wave.size());
  const auto n_out = static_cast<std::ptrdiff_t>(
      std::llround(static_cast<double>(n_in) * to_rate / from_rate));
  Wave out(static_cast<std::size_t>(std::max<std::ptrdiff_t>(n_out, 0)));
  if (n_in == 0) return out;

  const double cutoff = 0.5 * std::min(from_rate, to_rate) * kCutoffRatio;
  const double half_width = kNumZeros / (2.0 * cutoff);  // seconds
  const double pi = std::numbers::pi;
  for (std::ptrdiff_t n = 0; n < n_out; ++n) {
    const double t = static_cast<double>(n) / to_rate;
    auto first = static_cast<std::ptrdiff_t>(
        std::ceil((t - half_width) * from_rate));
    auto last = static_cast<std::ptrdiff_t>(
        std::floor((t + half_width) * from_rate));
    first = std::max<std::ptrdiff_t>(first, 0);
    last = std::min<std::ptrdiff_t>(last, n_in - 1);
    double acc = 0.0;
    double norm = 0.0;
    for (std::ptrdiff_t j = first; j <= last; ++j) {
      const double dt = t - static_cast<double>(j) / from_rate;
      if (std::abs(dt) >= half_width) continue;
      const double window =
          0.5 * (1.0 + std::cos(2.0 * pi * cutoff * dt / kNumZeros));
      const double sinc = dt == 0.0
                              ? 2.0 * cutoff
                              : std::sin(2.0 * pi * cutoff * dt) / (pi * dt);
      const double w = window * sinc;
      acc += w * wave[static_cast<std::size_t>(j)];
      norm += w;
    }
    // Normalizing by the tap sum makes DC gain exactly one, edges included.
    out[static_cast<std::size_t>(n)] =
        static_cast<float>(norm != 0.0 ? acc / norm : 0.0);
  }
  return out;
}

SpeedPerturber::SpeedPerturber(std::vector<double> factors,
                               std::vector<double> weights, int num_speakers)
    : factors_(std::move(factors)),
      weights_(std::move(weights)),
      num_speakers_(num_speakers) {
  if (factors_.empty() || factors_.size() != weights_.size()) {
    throw UsageError("speed factors and weights must have equal length");
  }
  if (num_speakers_ < 1) throw UsageError("num_speakers must be >= 1");
}

double SpeedPerturber::draw(std::mt19937_64& rng) const {
  std::discrete_distribution<std::size_t> pick(weights_.begin(),
                                               weights_.end());
  return factors_[pick(rng)];
}

int SpeedPerturber::slot(double factor) const {
  if (factor == 1.0) return 0;
  int s = 0;
  for (const double f : factors_) {
    if (f == 1.0) continue;
    ++s;
    if (f == factor) return s;
  }
  throw UsageError("speed factor " + std::to_string(factor) +
                   " is not configured");
}

int SpeedPerturber::label_space() const {
  const auto perturbed = std::count_if(factors_.begin(), factors_.end(),
                                       [](double f) { return f != 1.0; });
  return num_speakers_ * static_cast<int>(perturbed + 1);
}

Sample SpeedPerturber::apply(Sample sample, std::mt19937_64& rng) const {
  const double factor = draw(rng);
  return speed_perturb(std::move(sample), factor, slot(factor), num_speakers_);
}

Sample speed_perturb(Sample sample, double factor, int slot, int num_speakers) {
  if (!(factor > 0.0)) throw UsageError("speed factor must be positive");
  if (factor == 1.0) return sample;
  const double rate = sample.sample_rate;
  sample.payload = resample(sample.wave(), rate * factor, rate);
  if (sample.speaker_id >= 0) sample.speaker_id += slot * num_speakers;
  return sample;
}

Wave random_chunk(std::span<const float> wave, std::size_t length,
                  std::mt19937_64& rng) {
  if (wave.empty()) throw DataError("random_chunk: empty waveform");
  if (length == 0) throw UsageError("random_chunk: length must be >= 1");
  if (wave.size() >= length) {
    std::uniform_int_distribution<std::size_t> start_dist(0,
                                                          wave.size() - length);
    const auto start = start_dist(rng);
    return Wave(wave.begin() + static_cast<std::ptrdiff_t>(start),
                wave.begin() + static_cast<std::ptrdiff_t>(start + length));
  }
  Wave out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = wave[i % wave.size()];
  return out;
}

AudioBank::AudioBank(std::vector<AudioClip> clips) : clips_(std::move(clips)) {}

AudioBank AudioBank::load(const std::filesystem::path& map_file,
                          int target_rate) {
  std::ifstream in(map_file);
  if (!in) throw IoError("cannot open audio bank map " + map_file.string());
  const auto base = map_file.parent_path();
  std::vector<AudioClip> clips;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(map_file.string() + ":" + std::to_string(lineno) +
                        ": expected path<TAB>category");
    }
    std::filesystem::path path = line.substr(0, tab);
    if (path.is_relative()) path = base / path;
    const auto wav = read_wav(path);
    auto wave = pcm_to_float(wav.samples);
    if (wav.sample_rate != target_rate) {
      wave = resample(wave, wav.sample_rate, target_rate);
    }
    if (wave.empty()) throw DataError(path.string() + ": empty clip");
    clips.push_back({line.substr(tab + 1), std::move(wave)});
  }
  return AudioBank(std::move(clips));
}

double mean_power(std::span<const float> wave) {
  if (wave.empty()) return 0.0;
  double acc = 0.0;
  for (const float x : wave) acc += static_cast<double>(x) * x;
  return acc / static_cast<double>(wave.size());
}

double peak_amplitude(std::span<const float> wave) {
  double peak = 0.0;
  for (const float x : wave) peak = std::max(peak, std::abs(double(x)));
  return peak;
}

Wave add_noise(std::span<const float> wave, std::span<const float> noise,
               double snr_db, std::size_t noise_offset) {
  Wave out(wave.begin(), wave.end());
  if (wave.empty() || noise.empty()) return out;
  std::vector<double> cover(wave.size());
  for (std::size_t i = 0; i < wave.size(); ++i) {
    cover[i] = noise[(noise_offset + i) % noise.size()];
  }
  double noise_power = 0.0;
  for (const double v : cover) noise_power += v * v;
  noise_power /= static_cast<double>(cover.size());
  const double signal_power = mean_power(wave);
  if (noise_power <= 0.0 || signal_power <= 0.0) return out;
  const double gain =
      std::sqrt(signal_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
  std::vector<double> mixed(wave.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < wave.size(); ++i) {
    mixed[i] = wave[i] + gain * cover[i];
    peak = std::max(peak, std::abs(mixed[i]));
  }
  const double scale = peak > 1.0 ? 1.0 / peak : 1.0;
  for (std::size_t i = 0; i < wave.size(); ++i) {
    out[i] = static_cast<float>(mixed[i] * scale);
  }
  return out;
}

Wave add_reverb(std::span<const float> wave, std::span<const float> rir) {
  Wave out(wave.begin(), wave.end());
  if (wave.empty() || rir.empty()) return out;
  const std::vector<double> a(wave.begin(), wave.end());
  const std::vector<double> b(rir.begin(), rir.end());
  const auto full = fft_convolve(a, b);
  double peak_out = 0.0;
  for (std::size_t i = 0; i < wave.size(); ++i) {
    peak_out = std::max(peak_out, std::abs(full[i]));
  }
  const double peak_in = peak_amplitude(wave);
  const double scale = peak_out > 0.0 ? peak_in / peak_out : 0.0;
  for (std::size_t i = 0; i < wave.size(); ++i) {
    out[i] = static_cast<float>(full[i] * scale);
  }
  return out;
}

Wave augment(std::span<const float> wave, const AudioBank& noise_bank,
             const AudioBank& rir_bank, const AugmentOptions& options,
             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (noise_bank.empty() && rir_bank.empty()) return Wave(wave.begin(), wave.end());
  if (!(unit(rng) < options.aug_prob)) return Wave(wave.begin(), wave.end());

  bool use_noise = !noise_bank.empty();
  if (!noise_bank.empty() && !rir_bank.empty()) {
    use_noise = std::bernoulli_distribution(0.5)(rng);
  }
  if (!use_noise) {
    std::uniform_int_distribution<std::size_t> pick(0, rir_bank.size() - 1);
    return add_reverb(wave, rir_bank[pick(rng)].wave);
  }
  std::uniform_int_distribution<std::size_t> pick(0, noise_bank.size() - 1);
  const auto& clip = noise_bank[pick(rng)];
  const auto range = options.snr_ranges.find(clip.category);
  if (range == options.snr_ranges.end()) {
    throw UsageError("no SNR range configured for noise category '" +
                     clip.category + "'");
  }
  const double snr = std::uniform_real_distribution<double>(
      range->second.low_db, range->second.high_db)(rng);
  std::size_t offset = 0;
  if (clip.wave.size() > wave.size()) {
    offset = std::uniform_int_distribution<std::size_t>(
        0, clip.wave.size() - wave.size())(rng);
  }
  return add_noise(wave, clip.wave, snr, offset);
}

}  // namespace spk::feat
