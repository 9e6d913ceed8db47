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

#include "spk/session.h"

#include <mutex>

#include "spk/backend/scoring.h"
#include "spk/config.h"
#include "spk/error.h"
#include "spk/feat/pipeline.h"

namespace spk {

Eigen::VectorXf embed_wave(std::span<const float> wave, int sample_rate,
                           const feat::PipelineConfig& pipeline, const embed::TdnnSpec& spec,
                           const embed::TdnnWeights& weights) {
  if (wave.empty()) throw DataError("empty waveform");
  return embed::forward(feat::eval_features(wave, sample_rate, pipeline), spec, weights);
}

ScoreMethod parse_score_method(std::string_view name) {
  if (name == "cosine") return ScoreMethod::kCosine;
  if (name == "plda") return ScoreMethod::kPlda;
  throw UsageError("unknown score method '" + std::string(name) + "' (cosine|plda)");
}

std::unique_ptr<Session> Session::load(const std::string& weights_path,
                                       const std::string& config_path) {
  const Config cfg = config_path.empty() ? Config{} : Config::from_file(config_path);
  auto state = std::make_unique<State>();
  state->pipeline = feat::PipelineConfig::from(cfg);
  state->spec = embed::TdnnSpec::from(cfg);
  state->weights = embed::TdnnWeights::from_bundle(TensorBundle::load(weights_path), state->spec);
  if (cfg.contains("plda_model")) {
    state->plda.emplace(backend::PldaModel::load(cfg.get_string("plda_model", "")),
                        cfg.get_bool("plda_length_norm", true));
  }
  return std::unique_ptr<Session>(new Session(std::move(state)));
}

const Session::State& Session::state() const {
  if (!state_) throw UsageError("session is closed");
  return *state_;
}

Eigen::VectorXf Session::embed(std::span<const float> wave, int sample_rate) const {
  std::shared_lock lock(mutex_);
  const auto& s = state();
  return embed_wave(wave, sample_rate, s.pipeline, s.spec, s.weights);
}

double Session::score(const Eigen::VectorXf& a, const Eigen::VectorXf& b,
                      ScoreMethod method) const {
  std::shared_lock lock(mutex_);
  const auto& s = state();
  const Eigen::VectorXd da = a.cast<double>();
  const Eigen::VectorXd db = b.cast<double>();
  if (method == ScoreMethod::kCosine) return backend::cosine_score(da, db);
  if (!s.plda) throw UsageError("session has no PLDA model (set plda_model in the config)");
  return s.plda->score(da, db);
}

void Session::close() {
  std::unique_lock lock(mutex_);
  state_.reset();
}

bool Session::is_open() const {
  std::shared_lock lock(mutex_);
  return state_ != nullptr;
}

int Session::embed_dim() const {
  std::shared_lock lock(mutex_);
  return state().spec.embed_dim;
}

}  // namespace spk
