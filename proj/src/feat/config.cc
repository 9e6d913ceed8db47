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

#include "spk/feat/config.h"

#include <cmath>

#include "spk/error.h"

namespace spk::feat {

namespace {

constexpr std::string_view kKeys[] = {
    "shuffle_buffer",      "target_rate",        "speed_factors",
    "speed_weights",       "chunk_frames",       "aug_prob",
    "snr_ranges",          "num_mels",           "frame_shift_ms",
    "frame_len_ms",        "dither",             "window",
    "cmvn_variance",       "specaug",            "specaug_num_t_masks",
    "specaug_max_t",       "specaug_num_f_masks", "specaug_max_f",
    "batch_size",          "drop_remainder",
};

std::map<std::string, SnrRange> parse_snr_ranges(std::string_view text) {
  std::map<std::string, SnrRange> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string item(text.substr(pos, comma - pos));
    const auto c1 = item.find(':');
    const auto c2 = item.find(':', c1 == std::string::npos ? 0 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw UsageError("snr_ranges item '" + item +
                       "' is not category:low:high");
    }
    const auto range = parse_double_list(item.substr(c1 + 1, c2 - c1 - 1) +
                                         "," + item.substr(c2 + 1));
    if (range.size() != 2) throw UsageError("bad snr_ranges item " + item);
    out[item.substr(0, c1)] = {range[0], range[1]};
    pos = comma + 1;
  }
  return out;
}

}  // namespace

WindowType parse_window(std::string_view name) {
  if (name == "hamming") return WindowType::kHamming;
  if (name == "hann" || name == "hanning") return WindowType::kHann;
  if (name == "povey") return WindowType::kPovey;
  if (name == "rectangular") return WindowType::kRectangular;
  throw UsageError("unknown window '" + std::string(name) + "'");
}

std::string_view window_name(WindowType w) {
  switch (w) {
    case WindowType::kHamming: return "hamming";
    case WindowType::kHann: return "hann";
    case WindowType::kPovey: return "povey";
    case WindowType::kRectangular: return "rectangular";
  }
  return "hamming";
}

void PipelineConfig::validate() const {
  if (shuffle_buffer < 1) throw UsageError("shuffle_buffer must be >= 1");
  if (target_rate <= 0) throw UsageError("target_rate must be positive");
  if (speed_factors.empty() || speed_factors.size() != speed_weights.size()) {
    throw UsageError("speed_factors and speed_weights must have equal length");
  }
  double wsum = 0.0;
  for (std::size_t i = 0; i < speed_factors.size(); ++i) {
    if (!(speed_factors[i] > 0.0)) throw UsageError("speed factor must be > 0");
    if (speed_weights[i] < 0.0) throw UsageError("speed weight must be >= 0");
    wsum += speed_weights[i];
  }
  if (!(wsum > 0.0)) throw UsageError("speed_weights must not all be zero");
  if (chunk_frames < 1) throw UsageError("chunk_frames must be >= 1");
  if (!(aug_prob >= 0.0 && aug_prob <= 1.0)) {
    throw UsageError("aug_prob must lie in [0, 1]");
  }
  for (const auto& [cat, r] : snr_ranges) {
    if (r.low_db > r.high_db) {
      throw UsageError("snr range for '" + cat + "' has low > high");
    }
  }
  if (num_mels < 1) throw UsageError("num_mels must be >= 1");
  if (!(frame_shift_ms > 0.0 && frame_len_ms > frame_shift_ms)) {
    throw UsageError("need frame_len_ms > frame_shift_ms > 0");
  }
  if (dither < 0.0) throw UsageError("dither must be >= 0");
  if (specaug_num_t_masks < 0 || specaug_num_f_masks < 0 ||
      specaug_max_t < 0 || specaug_max_f < 0) {
    throw UsageError("specaug parameters must be >= 0");
  }
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
}

std::size_t PipelineConfig::frame_length() const {
  return static_cast<std::size_t>(
      std::lround(frame_len_ms * target_rate / 1000.0));
}

std::size_t PipelineConfig::frame_shift() const {
  return static_cast<std::size_t>(
      std::lround(frame_shift_ms * target_rate / 1000.0));
}

std::size_t PipelineConfig::chunk_samples() const {
  return static_cast<std::size_t>(chunk_frames - 1) * frame_shift() +
         frame_length();
}

PipelineConfig PipelineConfig::from(const Config& cfg) {
  PipelineConfig p;
  p.shuffle_buffer = static_cast<std::size_t>(
      cfg.get_int("shuffle_buffer", static_cast<long>(p.shuffle_buffer)));
  p.target_rate = static_cast<int>(cfg.get_int("target_rate", p.target_rate));
  p.speed_factors = cfg.get_doubles("speed_factors", p.speed_factors);
  if (cfg.contains("speed_weights")) {
    p.speed_weights = cfg.get_doubles("speed_weights", {});
  } else if (cfg.contains("speed_factors")) {
    p.speed_weights.assign(p.speed_factors.size(), 1.0);
  }
  p.chunk_frames = static_cast<int>(cfg.get_int("chunk_frames", p.chunk_frames));
  p.aug_prob = cfg.get_double("aug_prob", p.aug_prob);
  if (cfg.contains("snr_ranges")) {
    p.snr_ranges = parse_snr_ranges(cfg.get_string("snr_ranges", ""));
  }
  p.num_mels = static_cast<int>(cfg.get_int("num_mels", p.num_mels));
  p.frame_shift_ms = cfg.get_double("frame_shift_ms", p.frame_shift_ms);
  p.frame_len_ms = cfg.get_double("frame_len_ms", p.frame_len_ms);
  p.dither = cfg.get_double("dither", p.dither);
  p.window = parse_window(cfg.get_string("window", "hamming"));
  p.cmvn_variance = cfg.get_bool("cmvn_variance", p.cmvn_variance);
  p.specaug = cfg.get_bool("specaug", p.specaug);
  p.specaug_num_t_masks =
      static_cast<int>(cfg.get_int("specaug_num_t_masks", p.specaug_num_t_masks));
  p.specaug_max_t = static_cast<int>(cfg.get_int("specaug_max_t", p.specaug_max_t));
  p.specaug_num_f_masks =
      static_cast<int>(cfg.get_int("specaug_num_f_masks", p.specaug_num_f_masks));
  p.specaug_max_f = static_cast<int>(cfg.get_int("specaug_max_f", p.specaug_max_f));
  p.batch_size = static_cast<std::size_t>(
      cfg.get_int("batch_size", static_cast<long>(p.batch_size)));
  p.drop_remainder = cfg.get_bool("drop_remainder", p.drop_remainder);
  p.validate();
  return p;
}

std::span<const std::string_view> PipelineConfig::keys() { return kKeys; }

}  // namespace spk::feat
