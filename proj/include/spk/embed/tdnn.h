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
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "spk/config.h"
#include "spk/embed/pooling.h"
#include "spk/tensor_io.h"

namespace spk::feat {
struct Batch;
}

namespace spk::embed {

enum class PoolingType { kStatistics, kAttentive };

struct FrameLayerSpec {
  int out_dim = 512;
  // Frame offsets relative to the output frame, before dilation.
  std::vector<int> context{0};
  int dilation = 1;
};

// Frame-level TDNN stack, pooling and one affine segment layer. Only the
// "tdnn" architecture tag is implemented.
struct TdnnSpec {
  std::string arch = "tdnn";
  int input_dim = 80;
  std::vector<FrameLayerSpec> layers;
  PoolingType pooling = PoolingType::kStatistics;
  int embed_dim = 512;
  int attention_hidden = 128;

  // The canonical five-layer x-vector configuration.
  static TdnnSpec xvector(int input_dim = 80);
  void validate() const;
  int pooled_dim() const { return 2 * layers.back().out_dim; }

  // Keys: arch, input_dim, tdnn_layers, pooling, embed_dim, attention_hidden.
  // tdnn_layers syntax: `out:c1,c2,...:dilation` joined by ';', e.g.
  // `512:-2,-1,0,1,2:1;512:-2,0,2:1`.
  static TdnnSpec from(const Config& cfg);
  static std::span<const std::string_view> keys();
};

struct FrameLayer {
  Eigen::MatrixXf weight;  // out x (in * context)
  Eigen::VectorXf bias;
  // Inference-mode normalization: (y - mean) / sqrt(var + eps) * gamma + beta.
  Eigen::VectorXf bn_mean, bn_var, bn_gamma, bn_beta;
};

inline constexpr float kBatchNormEps = 1e-5f;

// Parameters of a TdnnSpec. Tensor names in the WSTN bundle:
//   frame{i}.weight [out, in*ctx]  frame{i}.bias [out]
//   frame{i}.bn_mean / bn_var / bn_gamma / bn_beta [out]
//   attention.weight [hidden, D]  attention.bias [hidden]  attention.v [hidden]
//   segment.weight [embed, 2D]  segment.bias [embed]
// Spliced input columns are ordered offset-major: column c * in + d.
struct TdnnWeights {
  std::vector<FrameLayer> frames;
  AttentionParams attention;
  Eigen::MatrixXf segment_weight;
  Eigen::VectorXf segment_bias;

  // Shape errors name the offending tensor.
  static TdnnWeights from_bundle(const TensorBundle& bundle,
                                 const TdnnSpec& spec);
  TensorBundle to_bundle() const;
  static TdnnWeights random(const TdnnSpec& spec, std::uint64_t seed);
};

struct Embedding {
  std::string key;
  Eigen::VectorXf vector;
};

// Forward pass for one T x F feature matrix. Context frames outside [0, T)
// are clamped to the nearest edge frame, so every layer keeps T frames.
Eigen::VectorXf forward(const RowMatrixXf& feats, const TdnnSpec& spec,
                        const TdnnWeights& weights);

// One embedding per batch row, in row order.
std::vector<Embedding> extract(const feat::Batch& batch, const TdnnSpec& spec,
                               const TdnnWeights& weights);

// Embedding text format: `key v1 v2 ... vD` per line.
void write_embeddings(std::ostream& out, std::span<const Embedding> embeddings);
std::vector<Embedding> read_embeddings(std::istream& in,
                                       std::string_view origin = "<stream>");
std::vector<Embedding> load_embeddings(const std::string& path);

}  // namespace spk::embed
