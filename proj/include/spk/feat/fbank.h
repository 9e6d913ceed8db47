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

#include <memory>
#include <random>
#include <span>
#include <vector>

#include "spk/feat/config.h"
#include "spk/feat/fft.h"
#include "spk/tensor_io.h"

namespace spk::feat {

struct FbankOptions {
  int sample_rate = 16000;
  int num_mels = 80;
  double frame_shift_ms = 10.0;
  double frame_len_ms = 25.0;
  double dither = 0.0;
  double preemph = 0.97;
  WindowType window = WindowType::kHamming;
  double low_freq = 20.0;
  // <= 0 means Nyquist.
  double high_freq = 0.0;
  double log_floor = 1e-10;

  static FbankOptions from(const PipelineConfig& cfg);
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Log mel filterbank energies. Frames are taken without edge padding:
// T = 1 + (len - frame_len) / frame_shift. Per frame: optional dither,
// pre-emphasis, window, zero-padded power spectrum (next power of two),
// triangular mel filters, natural log floored at log_floor.
class FbankComputer {
 public:
  explicit FbankComputer(FbankOptions options);

  std::size_t frame_length() const { return frame_length_; }
  std::size_t frame_shift() const { return frame_shift_; }
  std::size_t fft_size() const { return fft_.size(); }
  std::size_t num_frames(std::size_t num_samples) const;
  // Filter centre frequencies in Hz, one per mel bin.
  std::vector<double> center_frequencies() const;

  // `rng` is required when dither > 0.
  RowMatrixXf compute(std::span<const float> wave,
                      std::mt19937_64* rng = nullptr);

 private:
  struct Filter {
    std::size_t first_bin = 0;
    std::vector<double> weights;
  };

  FbankOptions options_;
  std::size_t frame_length_;
  std::size_t frame_shift_;
  RealFft fft_;
  std::vector<double> window_;
  std::vector<Filter> filters_;
  double mel_low_ = 0.0;
  double mel_delta_ = 0.0;
};

RowMatrixXf compute_fbank(std::span<const float> wave,
                          const FbankOptions& options,
                          std::mt19937_64* rng = nullptr);

// Per-utterance mean (and optionally variance) normalization over time.
// Columns with std <= 1e-8 are only mean-normalized.
void cmvn(RowMatrixXf& feats, bool variance_norm);

struct SpecAugOptions {
  int num_t_masks = 1;
  int max_t = 10;
  int num_f_masks = 1;
  int max_f = 8;
};

// Zero rows [start, start + width) / columns [start, start + width).
void time_mask(RowMatrixXf& feats, std::size_t start, std::size_t width);
void freq_mask(RowMatrixXf& feats, std::size_t start, std::size_t width);

// Each mask draws a width uniformly from [1, cap] (clipped to the matrix)
// and a start uniformly from the positions where it fits entirely.
void spec_augment(RowMatrixXf& feats, const SpecAugOptions& options,
                  std::mt19937_64& rng);

}  // namespace spk::feat
