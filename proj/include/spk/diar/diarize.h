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

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "spk/config.h"
#include "spk/diar/cluster.h"
#include "spk/diar/segments.h"

namespace spk::diar {

struct DiarizeConfig {
  SubsegmentOptions windows;
  double affinity_p = 0.3;
  SpectralOptions spectral;  // seed comes from the caller
  double collar = 0.25;

  void validate() const;
  // Keys: diar_window, diar_shift, diar_min_len, affinity_p, num_speakers
  // (0 = estimate), max_speakers, kmeans_restarts, collar.
  static DiarizeConfig from(const Config& cfg);
  static std::span<const std::string_view> keys();
};

// Clusters the windows of one recording; row i of `embeddings` belongs to
// windows[i]. Returns merged turns labelled spk0, spk1, ... in order of first
// appearance.
std::vector<LabeledSegment> diarize_recording(std::span<const SpeechSegment> windows,
                                              const Eigen::MatrixXd& embeddings,
                                              const DiarizeConfig& cfg, std::uint64_t seed);

}  // namespace spk::diar
