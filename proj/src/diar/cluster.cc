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

#include "spk/diar/cluster.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "spk/error.h"
#include "spk/random.h"

namespace spk::diar {

namespace {

constexpr std::uint64_t kKMeansStream = 7;

}  // namespace

Eigen::MatrixXd affinity(const Eigen::MatrixXd& embeddings, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw UsageError("affinity_p must lie in (0, 1]");
  const auto n = embeddings.rows();
  if (n == 0) return {};
  Eigen::MatrixXd unit = embeddings;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = unit.row(i).norm();
    if (!(norm > 0.0)) throw DataError("zero embedding in affinity input");
    unit.row(i) /= norm;
  }
  Eigen::MatrixXd cos = (unit * unit.transpose()).cwiseMax(-1.0).cwiseMin(1.0);
  const auto keep = static_cast<Eigen::Index>(
      n - static_cast<Eigen::Index>(std::floor((1.0 - p) * static_cast<double>(n))));
  Eigen::MatrixXd pruned = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> row(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = cos(i, j);
    std::nth_element(row.begin(), row.begin() + (keep - 1), row.end(), std::greater<>());
    const double cut = row[static_cast<std::size_t>(keep - 1)];
    for (Eigen::Index j = 0; j < n; ++j) {
      if (cos(i, j) >= cut) pruned(i, j) = cos(i, j);
    }
  }
  Eigen::MatrixXd out = pruned.cwiseMax(pruned.transpose());
  out.diagonal().setOnes();
  return out;
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, int restarts, std::uint64_t seed,
                    int max_iters) {
  const auto n = points.rows();
  if (k < 1 || k > n) throw UsageError("k-means needs 1 <= k <= number of points");
  if (restarts < 1) throw UsageError("k-means restarts must be >= 1");
  auto rng = make_rng(seed, kKMeansStream);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    // k-means++ seeding.
    Eigen::MatrixXd centers(k, points.cols());
    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
    centers.row(0) = points.row(first(rng));
    Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
      const double total = d2.sum();
      Eigen::Index pick = 0;
      if (total > 0.0) {
        std::uniform_real_distribution<double> u(0.0, total);
        double target = u(rng);
        for (pick = 0; pick < n - 1; ++pick) {
          target -= d2[pick];
          if (target < 0.0) break;
        }
      } else {
        pick = first(rng);
      }
      centers.row(c) = points.row(pick);
      d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
    // Lloyd iterations.
    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    double inertia = 0.0;
    for (int it = 0; it < max_iters; ++it) {
      bool changed = false;
      inertia = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index c = 0;
        const double d = (centers.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&c);
        inertia += d;
        if (labels[static_cast<std::size_t>(i)] != static_cast<int>(c)) {
          labels[static_cast<std::size_t>(i)] = static_cast<int>(c);
          changed = true;
        }
      }
      if (!changed) break;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
      std::vector<long> counts(static_cast<std::size_t>(k), 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
      }
      for (int c = 0; c < k; ++c) {
        // An emptied cluster keeps its previous center.
        if (counts[static_cast<std::size_t>(c)] > 0) {
          centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        }
      }
    }
    if (inertia < best.inertia) {
      best.inertia = inertia;
      best.labels = labels;
      best.centers = centers;
    }
  }
  return best;
}

int eigengap_k(const Eigen::VectorXd& ev, int max_k) {
  const int limit = std::min<int>(max_k, static_cast<int>(ev.size()) - 1);
  if (limit < 1) return 1;
  int best = 1;
  double gap = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= limit; ++k) {
    const double g = ev[k] - ev[k - 1];
    if (g > gap) {
      gap = g;
      best = k;
    }
  }
  return best;
}

std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    const auto it = remap.emplace(l, static_cast<int>(remap.size())).first;
    out.push_back(it->second);
  }
  return out;
}

std::vector<int> spectral_cluster(const Eigen::MatrixXd& A, const SpectralOptions& opts) {
  if (opts.max_speakers < 1) throw UsageError("max_speakers must be >= 1");
  if (opts.num_speakers && *opts.num_speakers < 1) throw UsageError("num_speakers must be >= 1");
  const auto n = A.rows();
  if (A.cols() != n) throw UsageError("affinity matrix must be square");
  if (n == 0) return {};
  Eigen::MatrixXd W = A.cwiseMax(0.0);
  W.diagonal().setZero();
  if (W.isZero(0.0)) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      labels[static_cast<std::size_t>(i)] =
          static_cast<int>(std::min<Eigen::Index>(i, opts.max_speakers - 1));
    }
    return labels;
  }
  const Eigen::VectorXd degree = W.rowwise().sum();
  Eigen::MatrixXd L = -W;
  L.diagonal() += degree;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  if (es.info() != Eigen::Success) throw DataError("Laplacian eigendecomposition failed");
  int k = opts.num_speakers ? *opts.num_speakers : eigengap_k(es.eigenvalues(), opts.max_speakers);
  k = static_cast<int>(std::min<Eigen::Index>(k, n));
  if (k == 1) return std::vector<int>(static_cast<std::size_t>(n), 0);
  const Eigen::MatrixXd U = es.eigenvectors().leftCols(k);
  return canonical_labels(kmeans(U, k, opts.restarts, opts.seed).labels);
}

std::vector<int> hungarian_max(const Eigen::MatrixXd& weights) {
  const auto rows = static_cast<std::size_t>(weights.rows());
  const auto cols = static_cast<std::size_t>(weights.cols());
  std::vector<int> assign(rows, -1);
  if (rows == 0 || cols == 0) return assign;
  // Square minimization problem; padding costs the same as a zero weight.
  const std::size_t n = std::max(rows, cols);
  const double top = weights.maxCoeff();
  auto cost = [&](std::size_t i, std::size_t j) {
    return (i < rows && j < cols) ? top - weights(static_cast<Eigen::Index>(i),
                                                  static_cast<Eigen::Index>(j))
                                  : top;
  };
  // Kuhn-Munkres with potentials; index 0 is a sentinel, rows/cols are 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] >= 1 && p[j] <= rows && j <= cols) assign[p[j] - 1] = static_cast<int>(j - 1);
  }
  return assign;
}

}  // namespace spk::diar
