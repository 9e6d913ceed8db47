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

#include <string>
#include <vector>

#include <Eigen/Core>

namespace spk::backend {

// Two-covariance model: x = mu + y + e, y ~ N(0, sigma_b), e ~ N(0, sigma_w).
struct PldaModel {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma_b;
  Eigen::MatrixXd sigma_w;

  int dim() const { return static_cast<int>(mu.size()); }
  void validate() const;
  // WSTN tensors `mu`, `sigma_b`, `sigma_w`.
  void save(const std::string& path) const;
  static PldaModel load(const std::string& path);
};

struct PldaOptions {
  int iters = 10;
  double ridge = 0.0;       // added to the diagonal of sigma_w after every M-step
  bool length_norm = true;  // L2-normalize embeddings before training/scoring
};

struct PldaTrainResult {
  PldaModel model;
  // Data log-likelihood of the initial model, then after each EM iteration.
  std::vector<double> log_likelihood;
};

// Rows of each matrix are one speaker's utterance embeddings.
using SpeakerGroups = std::vector<Eigen::MatrixXd>;

// Marginal log-likelihood of all groups under the model.
double plda_log_likelihood(const PldaModel& model, const SpeakerGroups& groups);

PldaTrainResult plda_train(SpeakerGroups groups, const PldaOptions& opts);

// L2-normalize every row in place.
void length_normalize(SpeakerGroups& groups);
Eigen::VectorXd length_normalize(const Eigen::VectorXd& v);

// Log-likelihood ratio of same-speaker vs different-speaker hypotheses for a
// pair of embeddings, from the joint Gaussians of the stacked pair. The
// quadratic forms are precomputed once per model.
class PldaScorer {
 public:
  explicit PldaScorer(PldaModel model, bool length_norm = true);

  double score(const Eigen::VectorXd& enroll, const Eigen::VectorXd& test) const;
  const PldaModel& model() const { return model_; }

 private:
  PldaModel model_;
  bool length_norm_;
  Eigen::MatrixXd q_;  // quadratic weight shared by both sides
  Eigen::MatrixXd p_;  // cross term
  double constant_ = 0.0;
};

}  // namespace spk::backend
