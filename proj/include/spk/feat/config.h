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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spk/config.h"

namespace spk::feat {

enum class WindowType { kHamming, kHann, kPovey, kRectangular };

WindowType parse_window(std::string_view name);
std::string_view window_name(WindowType w);

struct SnrRange {
  double low_db = 0.0;
  double high_db = 0.0;
};

// Every knob of the on-the-fly feature chain. Config keys are the field
// names; see keys().
struct PipelineConfig {
  std::size_t shuffle_buffer = 1500;
  int target_rate = 16000;
  std::vector<double> speed_factors{0.9, 1.0, 1.1};
  std::vector<double> speed_weights{1.0, 1.0, 1.0};
  int chunk_frames = 200;
  double aug_prob = 0.6;
  // Category -> SNR range; key syntax `noise:0:15,music:5:15,babble:13:20`.
  std::map<std::string, SnrRange> snr_ranges{
      {"noise", {0, 15}}, {"music", {5, 15}}, {"babble", {13, 20}}};
  int num_mels = 80;
  double frame_shift_ms = 10.0;
  double frame_len_ms = 25.0;
  double dither = 0.0;
  WindowType window = WindowType::kHamming;
  bool cmvn_variance = false;
  bool specaug = false;
  int specaug_num_t_masks = 1;
  int specaug_max_t = 10;
  int specaug_num_f_masks = 1;
  int specaug_max_f = 8;
  std::size_t batch_size = 128;
  bool drop_remainder = true;

  void validate() const;
  // Samples per analysis frame / hop at target_rate.
  std::size_t frame_length() const;
  std::size_t frame_shift() const;
  // Waveform length that yields exactly chunk_frames frames.
  std::size_t chunk_samples() const;

  static PipelineConfig from(const Config& cfg);
  static std::span<const std::string_view> keys();
};

}  // namespace spk::feat
