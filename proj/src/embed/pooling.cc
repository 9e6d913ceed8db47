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

#include "spk/embed/pooling.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spk/error.h"

namespace spk::embed {

Eigen::VectorXf stats_pool(const RowMatrixXf& frames) {
  const auto t = frames.rows();
  const auto d = frames.cols();
  if (t < 1) throw DataError("stats_pool: no frames");
  Eigen::VectorXf out(2 * d);
  std::vector<double> col(static_cast<std::size_t>(t));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < t; ++i) col[static_cast<std::size_t>(i)] = frames(i, j);
    std::sort(col.begin(), col.end());
    double sum = 0.0;
    for (const double x : col) sum += x;
    const double mean = sum / static_cast<double>(t);
    double sq = 0.0;
    for (const double x : col) sq += (x - mean) * (x - mean);
    const double var = std::max(sq / static_cast<double>(t), kVarianceFloor);
    out[j] = static_cast<float>(mean);
    out[d + j] = static_cast<float>(std::sqrt(var));
  }
  return out;
}

Eigen::VectorXf attentive_stats_pool(const RowMatrixXf& frames,
                                     const AttentionParams& params,
                                     Eigen::VectorXd* alpha_out) {
  const auto t = frames.rows();
  const auto d = frames.cols();
  if (t < 1) throw DataError("attentive_stats_pool: no frames");
  if (params.weight.cols() != d || params.bias.size() != params.weight.rows() ||
      params.v.size() != params.weight.rows()) {
    throw DataError("attentive_stats_pool: attention parameter shape mismatch");
  }
  const Eigen::MatrixXd h = frames.cast<double>();
  const Eigen::MatrixXd hidden =
      ((h * params.weight.cast<double>().transpose()).rowwise() +
       params.bias.cast<double>().transpose())
          .array()
          .tanh()
          .matrix();
  const Eigen::VectorXd scores = hidden * params.v.cast<double>();
  const double top = scores.maxCoeff();
  Eigen::VectorXd alpha = (scores.array() - top).exp().matrix();
  alpha /= alpha.sum();
  const Eigen::VectorXd mean = h.transpose() * alpha;
  Eigen::VectorXf out(2 * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double var = 0.0;
    for (Eigen::Index i = 0; i < t; ++i) {
      const double dev = h(i, j) - mean[j];
      var += alpha[i] * dev * dev;
    }
    out[j] = static_cast<float>(mean[j]);
    out[d + j] = static_cast<float>(std::sqrt(std::max(var, kVarianceFloor)));
  }
  if (alpha_out) *alpha_out = alpha;
  return out;
}

}  // namespace spk::embed
