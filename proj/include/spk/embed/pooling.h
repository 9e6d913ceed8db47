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

#include <Eigen/Core>

#include "spk/tensor_io.h"

namespace spk::embed {

inline constexpr double kVarianceFloor = 1e-10;

// [mean; std] over time (rows) of a T x D matrix; population variance floored
// at kVarianceFloor. Each column is summed in sorted order, so the result is
// exactly invariant to frame permutations.
Eigen::VectorXf stats_pool(const RowMatrixXf& frames);

struct AttentionParams {
  Eigen::MatrixXf weight;  // hidden x D
  Eigen::VectorXf bias;    // hidden
  Eigen::VectorXf v;       // hidden
};

// Attentive statistics pooling: e_t = v' tanh(W h_t + b), alpha = softmax(e),
// weighted mean and weighted std (same floor). `alpha_out` receives the
// attention weights when non-null.
Eigen::VectorXf attentive_stats_pool(const RowMatrixXf& frames,
                                     const AttentionParams& params,
                                     Eigen::VectorXd* alpha_out = nullptr);

}  // namespace spk::embed
