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
#include <vector>

#include <Eigen/Core>

namespace spk::diar {

// Cosine affinity of the rows of `embeddings`, pruned per row to entries at
// least as large as the row's ceil-ish(p * N)-th largest value, symmetrized by
// max(A, A') and given a unit diagonal.
Eigen::MatrixXd affinity(const Eigen::MatrixXd& embeddings, double p = 0.3);

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centers;
  double inertia = 0.0;
};

// k-means++ seeding and Lloyd iterations, best of `restarts` by inertia.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, int restarts, std::uint64_t seed,
                    int max_iters = 100);

struct SpectralOptions {
  std::optional<int> num_speakers;
  int max_speakers = 8;
  int restarts = 10;
  std::uint64_t seed = 0;
};

// Number of clusters from the largest gap between consecutive ascending
// eigenvalues, searched over k in [1, min(max_k, N - 1)].
int eigengap_k(const Eigen::VectorXd& ascending_eigenvalues, int max_k);

// Unnormalized Laplacian L = D - A (negative affinities clipped to 0), rows
// embedded into the first k eigenvectors, then k-means. Labels are numbered
// by first appearance.
std::vector<int> spectral_cluster(const Eigen::MatrixXd& A, const SpectralOptions& opts);

// Renumbers labels 0, 1, ... in order of first appearance.
std::vector<int> canonical_labels(const std::vector<int>& labels);

// Maximum-weight assignment of rows to columns of a (possibly rectangular)
// matrix. Returns, per row, the assigned column or -1.
std::vector<int> hungarian_max(const Eigen::MatrixXd& weights);

}  // namespace spk::diar
