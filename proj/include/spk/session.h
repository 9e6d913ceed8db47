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
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "spk/backend/plda.h"
#include "spk/embed/tdnn.h"
#include "spk/feat/config.h"

namespace spk {

inline constexpr std::string_view kVersion = "0.1.0";

// Evaluation embedding of one waveform: eval_features then the TDNN forward
// pass. The CLI `extract` path and Session::embed both go through here.
Eigen::VectorXf embed_wave(std::span<const float> wave, int sample_rate,
                           const feat::PipelineConfig& pipeline, const embed::TdnnSpec& spec,
                           const embed::TdnnWeights& weights);

enum class ScoreMethod { kCosine, kPlda };
ScoreMethod parse_score_method(std::string_view name);

// Inference handle: a loaded embedder plus an optional PLDA model. embed and
// score may run concurrently; close waits for them and releases everything.
class Session {
 public:
  // Reads the architecture and front-end keys from `config_path` (may be
  // empty for defaults). A `plda_model` key loads a PLDA model for scoring;
  // `plda_length_norm` controls its length normalization.
  static std::unique_ptr<Session> load(const std::string& weights_path,
                                       const std::string& config_path = "");

  Eigen::VectorXf embed(std::span<const float> wave, int sample_rate) const;
  double score(const Eigen::VectorXf& a, const Eigen::VectorXf& b, ScoreMethod method) const;
  void close();
  bool is_open() const;

  int embed_dim() const;

 private:
  struct State {
    feat::PipelineConfig pipeline;
    embed::TdnnSpec spec;
    embed::TdnnWeights weights;
    std::optional<backend::PldaScorer> plda;
  };

  explicit Session(std::unique_ptr<State> state) : state_(std::move(state)) {}
  const State& state() const;

  mutable std::shared_mutex mutex_;
  std::unique_ptr<State> state_;
};

}  // namespace spk
