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

#include "spk/diar/diarize.h"

#include <string>

#include "spk/error.h"

namespace spk::diar {

namespace {

constexpr std::string_view kKeys[] = {"diar_window",  "diar_shift",      "diar_min_len",
                                      "affinity_p",   "num_speakers",    "max_speakers",
                                      "kmeans_restarts", "collar"};

}  // namespace

void DiarizeConfig::validate() const {
  windows.validate();
  if (!(affinity_p > 0.0 && affinity_p <= 1.0)) throw UsageError("affinity_p must lie in (0, 1]");
  if (spectral.max_speakers < 1) throw UsageError("max_speakers must be >= 1");
  if (spectral.num_speakers && *spectral.num_speakers < 1) {
    throw UsageError("num_speakers must be >= 1 (0 estimates it)");
  }
  if (spectral.restarts < 1) throw UsageError("kmeans_restarts must be >= 1");
  if (!(collar >= 0.0)) throw UsageError("collar must be >= 0");
}

DiarizeConfig DiarizeConfig::from(const Config& cfg) {
  DiarizeConfig c;
  c.windows.window = cfg.get_double("diar_window", c.windows.window);
  c.windows.shift = cfg.get_double("diar_shift", c.windows.shift);
  c.windows.min_len = cfg.get_double("diar_min_len", c.windows.min_len);
  c.affinity_p = cfg.get_double("affinity_p", c.affinity_p);
  const long k = cfg.get_int("num_speakers", 0);
  if (k < 0) throw UsageError("num_speakers must be >= 0");
  if (k > 0) c.spectral.num_speakers = static_cast<int>(k);
  c.spectral.max_speakers = static_cast<int>(cfg.get_int("max_speakers", c.spectral.max_speakers));
  c.spectral.restarts = static_cast<int>(cfg.get_int("kmeans_restarts", c.spectral.restarts));
  c.collar = cfg.get_double("collar", c.collar);
  c.validate();
  return c;
}

std::span<const std::string_view> DiarizeConfig::keys() { return kKeys; }

std::vector<LabeledSegment> diarize_recording(std::span<const SpeechSegment> windows,
                                              const Eigen::MatrixXd& embeddings,
                                              const DiarizeConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (static_cast<std::size_t>(embeddings.rows()) != windows.size()) {
    throw UsageError("one embedding per window is required");
  }
  if (windows.empty()) return {};
  SpectralOptions opts = cfg.spectral;
  opts.seed = seed;
  const auto labels = spectral_cluster(affinity(embeddings, cfg.affinity_p), opts);
  std::vector<LabeledSegment> turns;
  turns.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    turns.push_back({windows[i].recording, windows[i].start, windows[i].end,
                     "spk" + std::to_string(labels[i])});
  }
  return merge_segments(std::move(turns));
}

}  // namespace spk::diar
