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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spk/loss/margin.h"
#include "spk/loss/scheduler.h"

namespace spk::loss {

struct HeadParams {
  Eigen::MatrixXd W;  // num_classes x embed_dim

  void save(const std::string& path) const;
  static HeadParams load(const std::string& path);
};

struct FitOptions {
  int epochs = 10;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct EpochStats {
  double loss = 0.0;      // mean loss over the epoch's steps, scheduled margin
  double accuracy = 0.0;  // argmax of cosines at the end of the epoch
  double margin = 0.0;    // margin at the epoch's last step
  double lr = 0.0;        // learning rate at the epoch's last step
};

struct FitResult {
  HeadParams head;
  std::vector<EpochStats> trace;
};

// Number of minibatch steps fit_head takes per epoch.
long steps_per_epoch(long num_examples, int batch_size);

// Mini-batch gradient descent on W alone; embeddings stay fixed. Step t uses
// lr_schedule(t) and margin_schedule(t); the schedule must cover every step
// (sched.T >= epochs * steps_per_epoch). Without `init`, W starts from a
// seeded Gaussian.
FitResult fit_head(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels,
                   const MarginLossConfig& loss, const SchedulerConfig& sched,
                   const FitOptions& opts,
                   const std::optional<Eigen::MatrixXd>& init = std::nullopt);

// Fraction of rows whose highest-cosine class is their label.
double head_accuracy(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels,
                     const Eigen::MatrixXd& W);

struct FineTuneConfig {
  SchedulerConfig sched;
  MarginLossConfig loss;
  int chunk_frames = 600;
};

inline constexpr double kFineTuneMargin = 0.5;
inline constexpr int kFineTuneChunkFrames = 600;  // 6 s at a 10 ms shift

// Large-margin fine-tuning stage: margin held at 0.5 from the first step and
// 6 s training chunks.
FineTuneConfig lmf_config(const SchedulerConfig& sched, const MarginLossConfig& loss);

}  // namespace spk::loss
