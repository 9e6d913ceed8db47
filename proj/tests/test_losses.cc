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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.h"
#include "spk/error.h"
#include "spk/loss/head.h"
#include "spk/loss/margin.h"
#include "spk/loss/scheduler.h"
#include "spk/random.h"
#include "test_util.h"

namespace spk::loss {
namespace {

SchedulerConfig example_schedule() {
  SchedulerConfig c;
  c.T = 1000;
  c.T_warm = 100;
  c.eta0 = 0.1;
  c.etaT = 1e-4;
  c.T1 = 200;
  c.T2 = 500;
  c.M = 0.2;
  return c;
}

TEST(Scheduler, LrMatchesHighPrecisionOracle) {
  for (const bool warm : {true, false}) {
    auto c = example_schedule();
    if (!warm) c.T_warm = 0;
    double worst = 0.0;
    for (long t = 0; t < c.T; ++t) {
      const auto exact = oracle::lr_exact(t, c);
      const double got = lr_schedule(t, c);
      if (exact == 0) {
        EXPECT_EQ(got, 0.0);
        continue;
      }
      worst = std::max(worst, static_cast<double>(abs((oracle::Big(got) - exact) / exact)));
    }
    EXPECT_LT(worst, 1e-12);
  }
}

TEST(Scheduler, LrExampleAndContinuityAtWarmup) {
  const auto c = example_schedule();
  EXPECT_EQ(lr_schedule(0, c), 0.0);
  EXPECT_NEAR(lr_schedule(100, c), 0.050119, 5e-7);
  EXPECT_EQ(lr_schedule(100, c), 0.1 * std::exp(100.0 / 1000.0 * std::log(1e-4 / 0.1)));
  EXPECT_THROW(lr_schedule(-1, c), UsageError);
  EXPECT_THROW(lr_schedule(1000, c), UsageError);
}

TEST(Scheduler, MarginBranchesAndBoundaries) {
  for (const Ramp ramp : {Ramp::kLinear, Ramp::kLogarithmic}) {
    auto c = example_schedule();
    c.ramp = ramp;
    EXPECT_EQ(margin_schedule(0, c), 0.0);
    EXPECT_EQ(margin_schedule(199, c), 0.0);
    EXPECT_EQ(margin_schedule(200, c), 0.0);
    EXPECT_EQ(margin_schedule(500, c), 0.2);
    EXPECT_EQ(margin_schedule(999, c), 0.2);
    double prev = 0.0;
    for (long t = 0; t < c.T; ++t) {
      const double m = margin_schedule(t, c);
      EXPECT_NEAR(m, oracle::margin_exact(t, c), 1e-15) << t;
      EXPECT_GE(m, prev);
      prev = m;
    }
    // The ramp approaches M from below just before T2.
    EXPECT_LT(margin_schedule(499, c), 0.2);
    EXPECT_GT(margin_schedule(499, c), 0.19);
  }
  auto c = example_schedule();
  c.T1 = c.T2 = 0;
  EXPECT_EQ(margin_schedule(0, c), 0.2);
}

TEST(Scheduler, ConfigValidation) {
  auto c = example_schedule();
  c.T1 = 600;
  EXPECT_THROW(c.validate(), UsageError);
  c = example_schedule();
  c.M = 1.0;
  EXPECT_THROW(c.validate(), UsageError);
  EXPECT_THROW(SchedulerConfig::from(Config::from_string("ramp = cubic\n")), UsageError);
  const auto parsed = SchedulerConfig::from(Config::from_string("T = 50\nT_warm = 5\nramp = logarithmic\n"));
  EXPECT_EQ(parsed.T, 50);
  EXPECT_EQ(parsed.ramp, Ramp::kLogarithmic);
}

struct Instance {
  Eigen::VectorXd x;
  int label;
  Eigen::MatrixXd W;
};

Instance random_instance(std::mt19937_64& rng, int classes, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Instance in{Eigen::VectorXd(dim), std::uniform_int_distribution<int>(0, classes - 1)(rng),
              Eigen::MatrixXd(classes, dim)};
  for (int i = 0; i < dim; ++i) in.x[i] = g(rng);
  for (Eigen::Index i = 0; i < in.W.size(); ++i) in.W.data()[i] = g(rng);
  return in;
}

MarginLossConfig loss_config(LossKind kind, double margin) {
  MarginLossConfig c;
  c.kind = kind;
  c.margin = margin;
  c.scale = 32.0;
  return c;
}

class Gradients : public ::testing::TestWithParam<std::pair<LossKind, double>> {};

TEST_P(Gradients, MatchCentralDifferences) {
  const auto [kind, margin] = GetParam();
  const auto cfg = loss_config(kind, margin);
  auto rng = make_rng(static_cast<std::uint64_t>(kind) + 100, 0);
  for (int i = 0; i < 100; ++i) {
    const auto in = random_instance(rng, 8, 16);
    const auto r = oracle::finite_difference(in.x, in.label, in.W, cfg, margin);
    EXPECT_LT(r.rel_x, 1e-5) << "instance " << i;
    EXPECT_LT(r.rel_w, 1e-5) << "instance " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Losses, Gradients,
                         ::testing::Values(std::pair{LossKind::kSoftmax, 0.0},
                                           std::pair{LossKind::kASoftmax, 4.0},
                                           std::pair{LossKind::kAmSoftmax, 0.2},
                                           std::pair{LossKind::kAamSoftmax, 0.2}));

TEST(Margin, ZeroMarginIsScaledSoftmaxBitwise) {
  auto rng = make_rng(7, 0);
  const auto soft = loss_config(LossKind::kSoftmax, 0.0);
  for (int i = 0; i < 100; ++i) {
    const auto in = random_instance(rng, 10, 12);
    const auto ref = loss_and_grad(in.x, in.label, in.W, soft, 0.0);
    for (const auto kind : {LossKind::kAmSoftmax, LossKind::kAamSoftmax}) {
      const auto cfg = loss_config(kind, 0.0);
      EXPECT_EQ(margin_logits(in.x, in.label, in.W, cfg, 0.0),
                margin_logits(in.x, in.label, in.W, soft, 0.0));
      const auto got = loss_and_grad(in.x, in.label, in.W, cfg, 0.0);
      EXPECT_EQ(got.loss, ref.loss);
      EXPECT_EQ(got.grad_x, ref.grad_x);
      EXPECT_EQ(got.grad_w, ref.grad_w);
    }
    // A-softmax with multiplier 1 is the plain cosine too.
    EXPECT_EQ(margin_logits(in.x, in.label, in.W, loss_config(LossKind::kASoftmax, 1.0), 1.0),
              margin_logits(in.x, in.label, in.W, soft, 0.0));
  }
}

TEST(Margin, TargetLogitFormulas) {
  // Two classes in 2-D with the target at angle theta from x.
  const double s = 32.0;
  for (const double theta : {0.3, 1.2, 2.0, 3.0}) {
    Eigen::VectorXd x(2);
    x << 2.0, 0.0;
    Eigen::MatrixXd W(2, 2);
    W << 3.0 * std::cos(theta), 3.0 * std::sin(theta), 0.0, 1.0;
    const double c = std::cos(theta);
    const double m = 0.3;
    EXPECT_NEAR(margin_logits(x, 0, W, loss_config(LossKind::kAmSoftmax, m), m)[0], s * (c - m), 1e-12);
    const double aam = theta + m <= std::numbers::pi ? std::cos(theta + m) : c - m * std::sin(m);
    EXPECT_NEAR(margin_logits(x, 0, W, loss_config(LossKind::kAamSoftmax, m), m)[0], s * aam, 1e-12);
    const int mi = 3;
    const int k = static_cast<int>(std::floor(mi * theta / std::numbers::pi));
    const double psi = (k % 2 == 0 ? 1.0 : -1.0) * std::cos(mi * theta) - 2.0 * k;
    EXPECT_NEAR(margin_logits(x, 0, W, loss_config(LossKind::kASoftmax, mi), mi)[0], s * psi, 1e-10);
    EXPECT_NEAR(margin_logits(x, 0, W, loss_config(LossKind::kAamSoftmax, m), m)[1], 0.0, 1e-12);
  }
}

TEST(Margin, LossIsCrossEntropyOfLogits) {
  auto rng = make_rng(8, 0);
  const auto cfg = loss_config(LossKind::kAamSoftmax, 0.2);
  const auto in = random_instance(rng, 6, 5);
  const auto z = margin_logits(in.x, in.label, in.W, cfg, 0.2);
  double lse = 0.0;
  for (int j = 0; j < z.size(); ++j) lse += std::exp(z[j] - z.maxCoeff());
  EXPECT_NEAR(loss_and_grad(in.x, in.label, in.W, cfg, 0.2).loss,
              std::log(lse) + z.maxCoeff() - z[in.label], 1e-10);
}

TEST(Margin, ValidationErrors) {
  EXPECT_THROW(parse_loss_kind("arcface++"), UsageError);
  EXPECT_EQ(parse_loss_kind(loss_kind_name(LossKind::kAmSoftmax)), LossKind::kAmSoftmax);
  auto c = loss_config(LossKind::kASoftmax, 2.5);
  EXPECT_THROW(c.validate(), UsageError);
  c = loss_config(LossKind::kAamSoftmax, 1.2);
  EXPECT_THROW(c.validate(), UsageError);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(loss_and_grad(x, 0, Eigen::MatrixXd::Ones(2, 3), loss_config(LossKind::kSoftmax, 0), 0),
               DataError);
  EXPECT_THROW(loss_and_grad(Eigen::VectorXd::Ones(3), 5, Eigen::MatrixXd::Ones(2, 3),
                             loss_config(LossKind::kSoftmax, 0), 0),
               UsageError);
}

TEST(Head, FitReachesFullAccuracyWithMarginRampThenFineTune) {
  const auto data = oracle::synthetic_speakers(10, 20, 16, 0.1, 3);
  MarginLossConfig loss;
  loss.num_classes = 10;
  FitOptions opts{20, 32, 4};
  SchedulerConfig sched;
  sched.T = steps_per_epoch(200, 32) * 20;
  sched.T_warm = sched.T / 10;
  sched.T1 = sched.T / 5;
  sched.T2 = sched.T / 2;
  sched.eta0 = 1.0;
  sched.etaT = 0.01;
  const auto first = fit_head(data.X, data.labels, loss, sched, opts);
  ASSERT_EQ(first.trace.size(), 20u);
  EXPECT_EQ(first.trace.back().margin, 0.2);
  EXPECT_EQ(first.trace.back().accuracy, 1.0);
  EXPECT_LT(first.trace.back().loss, first.trace.front().loss);
  const auto ft = lmf_config(sched, loss);
  EXPECT_EQ(ft.chunk_frames, 600);
  const auto second = fit_head(data.X, data.labels, ft.loss, ft.sched, {5, 32, 5}, first.head.W);
  for (const auto& e : second.trace) EXPECT_EQ(e.margin, 0.5);
  EXPECT_EQ(second.trace.back().accuracy, 1.0);
  EXPECT_EQ(head_accuracy(data.X, data.labels, second.head.W), 1.0);
}

TEST(Head, DeterministicForASeedAndChecksTheSchedule) {
  const auto data = oracle::synthetic_speakers(4, 5, 6, 0.1, 9);
  MarginLossConfig loss;
  SchedulerConfig sched;
  sched.T = 9;
  const auto a = fit_head(data.X, data.labels, loss, sched, {3, 8, 1});
  const auto b = fit_head(data.X, data.labels, loss, sched, {3, 8, 1});
  EXPECT_EQ(a.head.W, b.head.W);
  EXPECT_NE(a.head.W, fit_head(data.X, data.labels, loss, sched, {3, 8, 2}).head.W);
  EXPECT_THROW(fit_head(data.X, data.labels, loss, sched, {4, 8, 1}), UsageError);
  spk::testing::TempDir dir("head");
  a.head.save(dir.file("head.wstn"));
  // Stored as float32.
  EXPECT_EQ(HeadParams::load(dir.file("head.wstn")).W, Eigen::MatrixXd(a.head.W.cast<float>().cast<double>()));
}

}  // namespace
}  // namespace spk::loss
