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

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "spk/backend/metrics.h"

namespace spk::backend {

double cosine_score(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Mean of the sessions, then L2-normalized.
Eigen::VectorXd enroll_average(std::span<const Eigen::VectorXd> sessions);

enum class TrialLabel { kTarget, kNontarget, kUnknown };

struct Trial {
  std::string enroll;
  std::string test;
  TrialLabel label = TrialLabel::kUnknown;
};

struct ScoredTrial {
  Trial trial;
  double score = 0.0;
};

// `enroll test [target|nontarget|unknown]` per line; a missing label is unknown.
std::vector<Trial> read_trials(std::istream& in, std::string_view origin = "<stream>");
std::vector<Trial> load_trials(const std::string& path);

// `enroll test score` with the score at 6 decimals.
void write_scores(std::ostream& out, std::span<const ScoredTrial> scores);
// Reads `enroll test score [label]`.
std::vector<ScoredTrial> read_scores(std::istream& in, std::string_view origin = "<stream>");
std::vector<ScoredTrial> load_scores(const std::string& path);

// Copies labels from trials onto scores matched by (enroll, test).
void attach_labels(std::vector<ScoredTrial>& scores, std::span<const Trial> trials);

// Drops unknown-label trials.
std::vector<LabeledScore> labeled(std::span<const ScoredTrial> scores);

using EmbeddingTable = std::map<std::string, Eigen::VectorXd, std::less<>>;

EmbeddingTable load_embedding_table(const std::string& path);
const Eigen::VectorXd& lookup(const EmbeddingTable& table, std::string_view key);

// Adaptive symmetric score normalization against the top_n highest cohort
// scores on each side. Standard deviations are population ones floored at
// kAsNormStdFloor.
inline constexpr double kAsNormStdFloor = 1e-8;

struct CohortStats {
  double mean = 0.0;
  double std = 0.0;
  bool degenerate = false;  // std hit the floor
};

CohortStats top_n_stats(std::span<const double> cohort_scores, int top_n);

double asnorm_score(double raw, const CohortStats& enroll, const CohortStats& test);

// cohort[k] holds the scores of embedding k against every cohort member.
std::vector<ScoredTrial> asnorm(std::span<const ScoredTrial> raw,
                                const std::map<std::string, std::vector<double>, std::less<>>& cohort,
                                int top_n);

}  // namespace spk::backend
