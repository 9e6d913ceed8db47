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
#include "spk/loss/scheduler.h"

namespace spk::loss {

enum class LossKind { kSoftmax, kASoftmax, kAmSoftmax, kAamSoftmax };

LossKind parse_loss_kind(std::string_view name);
std::string_view loss_kind_name(LossKind kind);

struct MarginLossConfig {
  LossKind kind = LossKind::kAamSoftmax;
  double scale = 32.0;
  // AM/AAM: additive margin in [0, 1). A-softmax: integer multiplier >= 1.
  double margin = 0.2;
  int num_classes = 0;
  int embed_dim = 0;

  void validate() const;
  // Keys: loss, scale, margin, num_classes, embed_dim.
  static MarginLossConfig from(const Config& cfg);
  static std::span<const std::string_view> keys();
};

// Logits for embedding x against class weights W (num_classes x D). Both x
// and the rows of W are L2-normalized first, so cos_j = w_j' x / (|w_j||x|).
// Non-target logits are s * cos_j for every variant; the target logit is
//   softmax: s * cos_y
//   AM:      s * (cos_y - m)
//   AAM:     s * cos(theta_y + m), or s * (cos_y - m sin m) once
//            theta_y + m > pi
//   A:       s * psi(theta_y), psi(theta) = (-1)^k cos(m theta) - 2k on
//            [k pi / m, (k + 1) pi / m]
// `margin` overrides cfg.margin so schedules can drive it.
Eigen::VectorXd margin_logits(const Eigen::VectorXd& x, int label,
                              const Eigen::MatrixXd& W,
                              const MarginLossConfig& cfg, double margin);

struct LossAndGrad {
  double loss = 0.0;
  Eigen::VectorXd grad_x;
  Eigen::MatrixXd grad_w;
};

// Cross-entropy over margin_logits with exact analytic gradients, including
// the normalization Jacobians of x and of each row of W.
LossAndGrad loss_and_grad(const Eigen::VectorXd& x, int label,
                          const Eigen::MatrixXd& W,
                          const MarginLossConfig& cfg, double margin);

}  // namespace spk::loss
