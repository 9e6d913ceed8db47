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

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spk/feat/config.h"
#include "spk/feat/sample.h"

namespace spk::feat {

// Band-limited (Hann-windowed sinc) rate conversion. Output length is
// round(len * to_rate / from_rate). Equal rates return the input unchanged.
// Rates may be fractional, which speed perturbation relies on.
Wave resample(std::span<const float> wave, double from_rate, double to_rate);

// Maps speed factors to speaker-id slots: factor 1.0 keeps slot 0, the other
// factors take slots 1, 2, ... in configuration order. A sample perturbed
// with slot k gets speaker_id + k * num_speakers.
class SpeedPerturber {
 public:
  SpeedPerturber(std::vector<double> factors, std::vector<double> weights,
                 int num_speakers);

  double draw(std::mt19937_64& rng) const;
  int slot(double factor) const;
  // Size of the speaker-id space after perturbation.
  int label_space() const;
  Sample apply(Sample sample, std::mt19937_64& rng) const;

 private:
  std::vector<double> factors_;
  std::vector<double> weights_;
  int num_speakers_;
};

// Tempo+pitch change by resampling; output duration = input / factor.
Sample speed_perturb(Sample sample, double factor, int slot, int num_speakers);

// Uniformly placed window of exactly `length` samples; shorter input is tiled
// by wrap-around repetition first. Throws DataError on empty input.
Wave random_chunk(std::span<const float> wave, std::size_t length,
                  std::mt19937_64& rng);

struct AudioClip {
  std::string category;
  Wave wave;
};

// Noise or RIR clips loaded from a `path<TAB>category` map file. Relative
// paths resolve against the map file's directory. Clips are resampled to the
// pipeline rate on load.
class AudioBank {
 public:
  AudioBank() = default;
  explicit AudioBank(std::vector<AudioClip> clips);
  static AudioBank load(const std::filesystem::path& map_file,
                        int target_rate);

  bool empty() const { return clips_.empty(); }
  std::size_t size() const { return clips_.size(); }
  const AudioClip& operator[](std::size_t i) const { return clips_[i]; }

 private:
  std::vector<AudioClip> clips_;
};

// Mixes `noise` (tiled, then read from `noise_offset` onward) into `wave` so
// that 10 log10(P_wave / P_added) == snr_db. If the mix peaks above 1 the
// whole output is scaled down, which preserves the ratio.
Wave add_noise(std::span<const float> wave, std::span<const float> noise,
               double snr_db, std::size_t noise_offset = 0);

// Full convolution with `rir`, truncated to the input length and rescaled to
// the input's peak amplitude.
Wave add_reverb(std::span<const float> wave, std::span<const float> rir);

struct AugmentOptions {
  double aug_prob = 0.6;
  std::map<std::string, SnrRange> snr_ranges;
};

// With probability aug_prob applies exactly one of noise or reverb (chosen
// uniformly among non-empty banks). Empty banks mean passthrough.
Wave augment(std::span<const float> wave, const AudioBank& noise_bank,
             const AudioBank& rir_bank, const AugmentOptions& options,
             std::mt19937_64& rng);

double mean_power(std::span<const float> wave);
double peak_amplitude(std::span<const float> wave);

}  // namespace spk::feat
