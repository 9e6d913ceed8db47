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

#include "spk/backend/plda.h"

#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include "spk/error.h"
#include "spk/tensor_io.h"

namespace spk::backend {

namespace {

constexpr double kLlTolerance = 1e-8;

double log_det_spd(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw DataError(std::string(what) +
                    " is singular; reduce the embedding dimension (e.g. LDA) or set "
                    "plda_ridge > 0");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw DataError(std::string(what) +
                    " is singular; reduce the embedding dimension (e.g. LDA) or set "
                    "plda_ridge > 0");
  }
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// True when the smallest eigenvalue is negligible next to the largest.
bool near_singular(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return !(ev.minCoeff() > 1e-10 * std::max(ev.maxCoeff(), 1e-300));
}

void check_groups(const SpeakerGroups& groups) {
  if (groups.size() < 2) throw DataError("PLDA needs at least 2 speakers");
  const auto dim = groups.front().cols();
  long total = 0;
  for (const auto& g : groups) {
    if (g.rows() < 1) throw DataError("PLDA speaker without utterances");
    if (g.cols() != dim) throw DataError("PLDA embeddings differ in dimension");
    total += g.rows();
  }
  if (dim < 1) throw DataError("PLDA embeddings are empty");
  if (dim > total) {
    throw DataError("PLDA dimension " + std::to_string(dim) + " exceeds the " +
                    std::to_string(total) + " training utterances");
  }
}

}  // namespace

void PldaModel::validate() const {
  const auto d = mu.size();
  if (d < 1 || sigma_b.rows() != d || sigma_b.cols() != d || sigma_w.rows() != d ||
      sigma_w.cols() != d) {
    throw FormatError("PLDA model has inconsistent dimensions");
  }
}

void PldaModel::save(const std::string& path) const {
  validate();
  TensorBundle bundle;
  bundle.add("mu", to_tensor(mu));
  bundle.add("sigma_b", to_tensor(sigma_b));
  bundle.add("sigma_w", to_tensor(sigma_w));
  bundle.save(path);
}

PldaModel PldaModel::load(const std::string& path) {
  const auto bundle = TensorBundle::load(path);
  PldaModel m;
  const auto& mu = bundle.get("mu");
  if (mu.shape.size() != 1) throw FormatError(path + ": tensor 'mu' must be rank 1");
  const auto d = mu.shape[0];
  m.mu = to_vector(mu);
  m.sigma_b = to_matrix(bundle.get("sigma_b", {d, d}));
  m.sigma_w = to_matrix(bundle.get("sigma_w", {d, d}));
  m.validate();
  return m;
}

Eigen::VectorXd length_normalize(const Eigen::VectorXd& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw DataError("cannot length-normalize a zero embedding");
  return v / n;
}

void length_normalize(SpeakerGroups& groups) {
  for (auto& g : groups) {
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      const double n = g.row(r).norm();
      if (!(n > 0.0)) throw DataError("cannot length-normalize a zero embedding");
      g.row(r) /= n;
    }
  }
}

double plda_log_likelihood(const PldaModel& model, const SpeakerGroups& groups) {
  const auto d = model.dim();
  const Eigen::MatrixXd W = spd_inverse(model.sigma_w, "within-speaker covariance");
  const Eigen::MatrixXd B = spd_inverse(model.sigma_b, "between-speaker covariance");
  const double logdet_w = log_det_spd(model.sigma_w, "within-speaker covariance");
  const double logdet_b = log_det_spd(model.sigma_b, "between-speaker covariance");
  // Speakers with equal utterance counts share P = B + nW.
  std::map<long, std::pair<Eigen::LLT<Eigen::MatrixXd>, double>> by_count;
  double total = 0.0;
  for (const auto& g : groups) {
    const long n = g.rows();
    auto it = by_count.find(n);
    if (it == by_count.end()) {
      Eigen::MatrixXd P = B + static_cast<double>(n) * W;
      Eigen::LLT<Eigen::MatrixXd> llt(P);
      const double logdet_p = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      it = by_count.emplace(n, std::make_pair(std::move(llt), logdet_p)).first;
    }
    const Eigen::MatrixXd dev = g.rowwise() - model.mu.transpose();
    const Eigen::VectorXd r = W * dev.colwise().sum().transpose();
    const double quad = (dev * W).cwiseProduct(dev).sum() - r.dot(it->second.first.solve(r));
    total += -0.5 * static_cast<double>(n * d) * std::log(2.0 * std::numbers::pi) -
             0.5 * logdet_b - 0.5 * static_cast<double>(n) * logdet_w -
             0.5 * it->second.second - 0.5 * quad;
  }
  return total;
}

PldaTrainResult plda_train(SpeakerGroups groups, const PldaOptions& opts) {
  if (opts.iters < 0) throw UsageError("plda_iters must be >= 0");
  if (opts.ridge < 0.0) throw UsageError("plda_ridge must be >= 0");
  check_groups(groups);
  if (opts.length_norm) length_normalize(groups);
  const auto d = groups.front().cols();
  const auto S = static_cast<double>(groups.size());
  const Eigen::MatrixXd ridge = opts.ridge * Eigen::MatrixXd::Identity(d, d);

  // Sufficient statistics.
  long N = 0;
  Eigen::VectorXd global_sum = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  std::vector<Eigen::VectorXd> sums;
  for (const auto& g : groups) {
    N += g.rows();
    sums.push_back(g.colwise().sum().transpose());
    global_sum += sums.back();
    scatter += g.transpose() * g;
  }

  // Initial model: moment estimates from speaker means.
  PldaModel model;
  model.mu = global_sum / static_cast<double>(N);
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t s = 0; s < groups.size(); ++s) {
    const Eigen::VectorXd mean = sums[s] / static_cast<double>(groups[s].rows());
    const Eigen::MatrixXd dev = groups[s].rowwise() - mean.transpose();
    within += dev.transpose() * dev;
    const Eigen::VectorXd c = mean - model.mu;
    between += c * c.transpose();
  }
  within /= static_cast<double>(N);
  between /= S;
  if (near_singular(within) || near_singular(between)) {
    const Eigen::MatrixXd total =
        symmetrize(scatter / static_cast<double>(N) - model.mu * model.mu.transpose());
    within = 0.5 * total;
    between = 0.5 * total;
  }
  model.sigma_w = symmetrize(within) + ridge;
  model.sigma_b = symmetrize(between);

  PldaTrainResult result;
  result.log_likelihood.push_back(plda_log_likelihood(model, groups));
  for (int it = 0; it < opts.iters; ++it) {
    const Eigen::MatrixXd W = spd_inverse(model.sigma_w, "within-speaker covariance");
    const Eigen::MatrixXd B = spd_inverse(model.sigma_b, "between-speaker covariance");
    const Eigen::VectorXd b_mu = B * model.mu;
    std::map<long, Eigen::MatrixXd> cov_by_count;
    Eigen::VectorXd sum_y = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd sum_yy = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd weighted_yy = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t s = 0; s < groups.size(); ++s) {
      const long n = groups[s].rows();
      auto cit = cov_by_count.find(n);
      if (cit == cov_by_count.end()) {
        cit = cov_by_count
                  .emplace(n, spd_inverse(B + static_cast<double>(n) * W, "speaker posterior"))
                  .first;
      }
      const Eigen::MatrixXd& cov = cit->second;
      const Eigen::VectorXd y = cov * (b_mu + W * sums[s]);
      const Eigen::MatrixXd yy = cov + y * y.transpose();
      sum_y += y;
      sum_yy += yy;
      cross += sums[s] * y.transpose();
      weighted_yy += static_cast<double>(n) * yy;
    }
    model.mu = sum_y / S;
    model.sigma_b = symmetrize(sum_yy / S - model.mu * model.mu.transpose());
    model.sigma_w =
        symmetrize((scatter - cross - cross.transpose() + weighted_yy) / static_cast<double>(N)) +
        ridge;
    if (near_singular(model.sigma_w)) {
      throw DataError(
          "within-speaker covariance became singular; reduce the embedding dimension "
          "(e.g. LDA) or set plda_ridge > 0");
    }
    const double ll = plda_log_likelihood(model, groups);
    const double prev = result.log_likelihood.back();
    if (ll < prev - kLlTolerance * std::abs(prev) && opts.ridge == 0.0) {
      spdlog::warn("PLDA EM iteration {}: log-likelihood decreased from {} to {}", it + 1,
                   prev, ll);
    }
    result.log_likelihood.push_back(ll);
  }
  result.model = std::move(model);
  return result;
}

PldaScorer::PldaScorer(PldaModel model, bool length_norm)
    : model_(std::move(model)), length_norm_(length_norm) {
  model_.validate();
  const auto d = model_.dim();
  const Eigen::MatrixXd total = model_.sigma_b + model_.sigma_w;
  Eigen::MatrixXd same(2 * d, 2 * d);
  same << total, model_.sigma_b, model_.sigma_b, total;
  const Eigen::MatrixXd same_inv = spd_inverse(same, "same-speaker covariance");
  const Eigen::MatrixXd total_inv = spd_inverse(total, "total covariance");
  // LLR = -1/2 z' (S_same^-1 - S_diff^-1) z - 1/2 log|S_same| + 1/2 log|S_diff|
  q_ = symmetrize(same_inv.topLeftCorner(d, d) - total_inv);
  p_ = same_inv.topRightCorner(d, d);
  constant_ = -0.5 * log_det_spd(same, "same-speaker covariance") +
              log_det_spd(total, "total covariance");
}

double PldaScorer::score(const Eigen::VectorXd& enroll, const Eigen::VectorXd& test) const {
  if (enroll.size() != model_.dim() || test.size() != model_.dim()) {
    throw DataError("embedding dimension " + std::to_string(enroll.size()) + "/" +
                    std::to_string(test.size()) + " does not match PLDA dimension " +
                    std::to_string(model_.dim()));
  }
  const Eigen::VectorXd e = (length_norm_ ? length_normalize(enroll) : enroll) - model_.mu;
  const Eigen::VectorXd t = (length_norm_ ? length_normalize(test) : test) - model_.mu;
  return -0.5 * (e.dot(q_ * e) + t.dot(q_ * t)) - e.dot(p_ * t) + constant_;
}

}  // namespace spk::backend
