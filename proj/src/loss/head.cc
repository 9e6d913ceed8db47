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

#include "spk/loss/head.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "spk/error.h"
#include "spk/random.h"
#include "spk/tensor_io.h"

namespace spk::loss {

namespace {

constexpr char kHeadTensor[] = "head.weight";
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kInitStream = 2;

}  // namespace

void HeadParams::save(const std::string& path) const {
  TensorBundle bundle;
  bundle.add(kHeadTensor, to_tensor(W));
  bundle.save(path);
}

HeadParams HeadParams::load(const std::string& path) {
  const auto bundle = TensorBundle::load(path);
  const auto& t = bundle.get(kHeadTensor);
  if (t.shape.size() != 2) throw FormatError(path + ": head.weight must be rank 2");
  return HeadParams{to_matrix(t)};
}

long steps_per_epoch(long num_examples, int batch_size) {
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  return (num_examples + batch_size - 1) / batch_size;
}

double head_accuracy(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels,
                     const Eigen::MatrixXd& W) {
  if (embeddings.rows() == 0) return 0.0;
  const Eigen::VectorXd w_norm = W.rowwise().norm();
  long correct = 0;
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
    const Eigen::VectorXd cos = (W * embeddings.row(i).transpose()).cwiseQuotient(w_norm);
    Eigen::Index best = 0;
    cos.maxCoeff(&best);
    if (best == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(embeddings.rows());
}

FitResult fit_head(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels,
                   const MarginLossConfig& loss, const SchedulerConfig& sched,
                   const FitOptions& opts, const std::optional<Eigen::MatrixXd>& init) {
  loss.validate();
  sched.validate();
  if (opts.epochs < 0) throw UsageError("epochs must be >= 0");
  const auto n = embeddings.rows();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw UsageError("embedding and label counts differ");
  }
  if (n == 0 && opts.epochs > 0) throw DataError("no training embeddings");
  const int classes = loss.num_classes > 0
                          ? loss.num_classes
                          : (labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1);
  if (classes < 1) throw UsageError("num_classes must be >= 1");
  for (int y : labels) {
    if (y < 0 || y >= classes) throw DataError("label " + std::to_string(y) + " out of range");
  }
  const long per_epoch = steps_per_epoch(n, opts.batch_size);
  const long total = per_epoch * opts.epochs;
  if (total > sched.T) {
    throw UsageError("schedule T=" + std::to_string(sched.T) + " is shorter than the " +
                     std::to_string(total) + " training steps");
  }

  FitResult out;
  if (init) {
    if (init->rows() != classes || init->cols() != embeddings.cols()) {
      throw UsageError("initial head has the wrong shape");
    }
    out.head.W = *init;
  } else {
    auto rng = make_rng(opts.seed, kInitStream);
    std::normal_distribution<double> gauss(0.0, 1.0);
    out.head.W.resize(classes, embeddings.cols());
    for (Eigen::Index r = 0; r < out.head.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < out.head.W.cols(); ++c) out.head.W(r, c) = gauss(rng);
    }
  }
  Eigen::MatrixXd& W = out.head.W;

  auto rng = make_rng(opts.seed, kShuffleStream);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  long t = 0;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats;
    double loss_sum = 0.0;
    for (long b = 0; b < per_epoch; ++b, ++t) {
      const double lr = lr_schedule(t, sched);
      const double margin = loss.kind == LossKind::kASoftmax ? loss.margin
                                                              : margin_schedule(t, sched);
      const auto begin = static_cast<std::size_t>(b) * static_cast<std::size_t>(opts.batch_size);
      const auto end = std::min(order.size(), begin + static_cast<std::size_t>(opts.batch_size));
      Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(W.rows(), W.cols());
      double batch_loss = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const auto i = order[k];
        const auto lg = loss_and_grad(embeddings.row(i).transpose(),
                                      labels[static_cast<std::size_t>(i)], W, loss, margin);
        batch_loss += lg.loss;
        grad += lg.grad_w;
      }
      const double count = static_cast<double>(end - begin);
      W -= (lr / count) * grad;
      loss_sum += batch_loss / count;
      stats.lr = lr;
      stats.margin = margin;
    }
    stats.loss = per_epoch > 0 ? loss_sum / static_cast<double>(per_epoch) : 0.0;
    stats.accuracy = head_accuracy(embeddings, labels, W);
    out.trace.push_back(stats);
  }
  return out;
}

FineTuneConfig lmf_config(const SchedulerConfig& sched, const MarginLossConfig& loss) {
  FineTuneConfig ft;
  ft.sched = sched;
  ft.loss = loss;
  ft.loss.margin = kFineTuneMargin;
  ft.sched.M = kFineTuneMargin;
  ft.sched.T1 = 0;
  ft.sched.T2 = 0;
  ft.chunk_frames = kFineTuneChunkFrames;
  ft.sched.validate();
  ft.loss.validate();
  return ft;
}

}  // namespace spk::loss
