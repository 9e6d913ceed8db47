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

#include "spk/loss/margin.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spk/error.h"

namespace spk::loss {

namespace {

constexpr std::string_view kKeys[] = {"loss", "scale", "margin", "num_classes",
                                      "embed_dim"};

// Target-logit transform phi(cos) and its derivative d phi / d cos.
struct TargetTransform {
  double value;
  double slope;
};

TargetTransform aam(double c, double m) {
  const double cm = std::cos(m);
  const double sm = std::sin(m);
  // theta + m > pi  <=>  c < cos(pi - m)
  if (c < std::cos(std::numbers::pi - m)) return {c - m * sm, 1.0};
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - c * c));
  const double slope = sin_theta > 0.0 ? cm + sm * c / sin_theta : cm;
  return {c * cm - sin_theta * sm, slope};
}

// psi via Chebyshev polynomials: cos(m theta) = T_m(c) and
// sin(m theta) / sin(theta) = U_{m-1}(c), which stay finite at c = +-1.
TargetTransform a_softmax(double c, int m) {
  double t_prev = 1.0, t_cur = c;    // T_0, T_1
  double u_prev = 0.0, u_cur = 1.0;  // U_{-1}, U_0
  for (int n = 1; n < m; ++n) {
    const double t_next = 2.0 * c * t_cur - t_prev;
    const double u_next = 2.0 * c * u_cur - u_prev;
    t_prev = t_cur;
    t_cur = t_next;
    u_prev = u_cur;
    u_cur = u_next;
  }
  const double theta = std::acos(c);
  int k = static_cast<int>(std::floor(m * theta / std::numbers::pi));
  k = std::clamp(k, 0, m - 1);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return {sign * t_cur - 2.0 * k, sign * m * u_cur};
}

TargetTransform target_transform(double c, const MarginLossConfig& cfg,
                                 double margin) {
  switch (cfg.kind) {
    case LossKind::kSoftmax: return {c, 1.0};
    case LossKind::kAmSoftmax: return {c - margin, 1.0};
    case LossKind::kAamSoftmax: return aam(c, margin);
    case LossKind::kASoftmax: {
      const int m = static_cast<int>(std::lround(margin));
      if (m < 1 || static_cast<double>(m) != margin) {
        throw UsageError("A-softmax margin must be an integer >= 1");
      }
      return a_softmax(c, m);
    }
  }
  return {c, 1.0};
}

struct Normalized {
  Eigen::VectorXd x_hat;
  double x_norm;
  Eigen::MatrixXd w_hat;
  Eigen::VectorXd w_norm;
  Eigen::VectorXd cos;
};

Normalized normalize(const Eigen::VectorXd& x, int label,
                     const Eigen::MatrixXd& W) {
  if (W.rows() < 1) throw UsageError("need at least one class");
  if (W.cols() != x.size()) {
    throw UsageError("embedding dim " + std::to_string(x.size()) +
                     " does not match head dim " + std::to_string(W.cols()));
  }
  if (label < 0 || label >= W.rows()) {
    throw UsageError("label " + std::to_string(label) + " out of range");
  }
  Normalized n;
  n.x_norm = x.norm();
  if (!(n.x_norm > 0.0)) throw DataError("zero-norm embedding");
  n.x_hat = x / n.x_norm;
  n.w_norm = W.rowwise().norm();
  if (!(n.w_norm.minCoeff() > 0.0)) throw DataError("zero-norm class weight row");
  n.w_hat = W.array().colwise() / n.w_norm.array();
  n.cos = (n.w_hat * n.x_hat).cwiseMax(-1.0).cwiseMin(1.0);
  return n;
}

}  // namespace

LossKind parse_loss_kind(std::string_view name) {
  if (name == "softmax") return LossKind::kSoftmax;
  if (name == "a_softmax") return LossKind::kASoftmax;
  if (name == "am_softmax") return LossKind::kAmSoftmax;
  if (name == "aam_softmax") return LossKind::kAamSoftmax;
  throw UsageError("unknown loss '" + std::string(name) +
                   "' (softmax|a_softmax|am_softmax|aam_softmax)");
}

std::string_view loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::kSoftmax: return "softmax";
    case LossKind::kASoftmax: return "a_softmax";
    case LossKind::kAmSoftmax: return "am_softmax";
    case LossKind::kAamSoftmax: return "aam_softmax";
  }
  return "softmax";
}

void MarginLossConfig::validate() const {
  if (!(scale > 0.0)) throw UsageError("loss scale must be > 0");
  if (kind == LossKind::kASoftmax) {
    if (margin < 1.0 || std::floor(margin) != margin) {
      throw UsageError("A-softmax margin must be an integer >= 1");
    }
  } else if (kind != LossKind::kSoftmax && !(margin >= 0.0 && margin < 1.0)) {
    throw UsageError("AM/AAM margin must lie in [0, 1)");
  }
  if (num_classes < 0 || embed_dim < 0) {
    throw UsageError("num_classes and embed_dim must be >= 0");
  }
}

MarginLossConfig MarginLossConfig::from(const Config& cfg) {
  MarginLossConfig c;
  c.kind = parse_loss_kind(cfg.get_string("loss", "aam_softmax"));
  c.scale = cfg.get_double("scale", c.scale);
  c.margin = cfg.get_double("margin", c.kind == LossKind::kASoftmax ? 2.0 : c.margin);
  c.num_classes = static_cast<int>(cfg.get_int("num_classes", 0));
  c.embed_dim = static_cast<int>(cfg.get_int("embed_dim", 0));
  c.validate();
  return c;
}

std::span<const std::string_view> MarginLossConfig::keys() { return kKeys; }

Eigen::VectorXd margin_logits(const Eigen::VectorXd& x, int label,
                              const Eigen::MatrixXd& W,
                              const MarginLossConfig& cfg, double margin) {
  const auto n = normalize(x, label, W);
  Eigen::VectorXd logits = cfg.scale * n.cos;
  logits[label] = cfg.scale * target_transform(n.cos[label], cfg, margin).value;
  return logits;
}

LossAndGrad loss_and_grad(const Eigen::VectorXd& x, int label,
                          const Eigen::MatrixXd& W,
                          const MarginLossConfig& cfg, double margin) {
  const auto n = normalize(x, label, W);
  const auto target = target_transform(n.cos[label], cfg, margin);
  Eigen::VectorXd logits = cfg.scale * n.cos;
  logits[label] = cfg.scale * target.value;

  const double top = logits.maxCoeff();
  const Eigen::VectorXd e = (logits.array() - top).exp().matrix();
  // Non-target mass kept apart so small losses and target gradients do not
  // cancel against 1.
  double rest = 0.0;
  for (Eigen::Index j = 0; j < e.size(); ++j) {
    if (j != label) rest += e[j];
  }
  const double sum = e[label] + rest;
  LossAndGrad out;
  out.loss = logits[label] == top ? std::log1p(rest) : top - logits[label] + std::log(sum);

  // dL/dz = softmax - onehot, then through z = s * phi(cos).
  Eigen::VectorXd g = e / sum;
  g[label] = -rest / sum;
  g *= cfg.scale;
  g[label] *= target.slope;

  // d cos_j / dx = (w_hat_j - cos_j x_hat) / |x|
  out.grad_x = (n.w_hat.transpose() * g - g.dot(n.cos) * n.x_hat) / n.x_norm;
  // d cos_j / dw_j = (x_hat - cos_j w_hat_j) / |w_j|
  out.grad_w.resize(W.rows(), W.cols());
  for (Eigen::Index j = 0; j < W.rows(); ++j) {
    out.grad_w.row(j) =
        (g[j] / n.w_norm[j]) * (n.x_hat.transpose() - n.cos[j] * n.w_hat.row(j));
  }
  return out;
}

}  // namespace spk::loss
