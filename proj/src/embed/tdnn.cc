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

#include "spk/embed/tdnn.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "spk/error.h"
#include "spk/feat/sample.h"

namespace spk::embed {

namespace {

constexpr std::string_view kKeys[] = {"arch",      "input_dim", "tdnn_layers",
                                      "pooling",   "embed_dim", "attention_hidden"};

std::vector<std::uint32_t> dims(std::initializer_list<Eigen::Index> d) {
  std::vector<std::uint32_t> out;
  for (auto x : d) out.push_back(static_cast<std::uint32_t>(x));
  return out;
}

Eigen::MatrixXf matrix_of(const Tensor& t) {
  Eigen::MatrixXf m(t.shape[0], t.shape[1]);
  for (std::uint32_t r = 0; r < t.shape[0]; ++r) {
    for (std::uint32_t c = 0; c < t.shape[1]; ++c) {
      m(r, c) = t.data[std::size_t(r) * t.shape[1] + c];
    }
  }
  return m;
}

Eigen::VectorXf vector_of(const Tensor& t) {
  return Eigen::Map<const Eigen::VectorXf>(t.data.data(),
                                           static_cast<Eigen::Index>(t.data.size()));
}

Tensor tensor_of(const Eigen::MatrixXf& m) {
  Tensor t;
  t.shape = dims({m.rows(), m.cols()});
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.data.push_back(m(r, c));
  }
  return t;
}

Tensor tensor_of(const Eigen::VectorXf& v) {
  Tensor t;
  t.shape = dims({v.size()});
  t.data.assign(v.data(), v.data() + v.size());
  return t;
}

std::vector<FrameLayerSpec> parse_layers(const std::string& text) {
  std::vector<FrameLayerSpec> layers;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      throw UsageError("tdnn_layers item '" + item + "' is not out:ctx[:dilation]");
    }
    const auto c2 = item.find(':', c1 + 1);
    FrameLayerSpec layer;
    try {
      layer.out_dim = std::stoi(item.substr(0, c1));
      const auto ctx = parse_double_list(
          item.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1));
      layer.context.clear();
      for (const double c : ctx) {
        if (c != std::floor(c)) throw std::invalid_argument("context");
        layer.context.push_back(static_cast<int>(c));
      }
      layer.dilation = c2 == std::string::npos ? 1 : std::stoi(item.substr(c2 + 1));
    } catch (const std::exception&) {
      throw UsageError("tdnn_layers item '" + item + "' is not out:ctx[:dilation]");
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

}  // namespace

TdnnSpec TdnnSpec::xvector(int input_dim) {
  TdnnSpec s;
  s.input_dim = input_dim;
  s.layers = {{512, {-2, -1, 0, 1, 2}, 1},
              {512, {-2, 0, 2}, 1},
              {512, {-3, 0, 3}, 1},
              {512, {0}, 1},
              {1500, {0}, 1}};
  s.embed_dim = 512;
  return s;
}

void TdnnSpec::validate() const {
  if (arch != "tdnn") {
    throw UsageError("architecture '" + arch + "' is not implemented (only tdnn)");
  }
  if (input_dim < 1) throw UsageError("input_dim must be >= 1");
  if (layers.empty()) throw UsageError("TDNN needs at least one frame layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].out_dim < 1 || layers[i].context.empty() ||
        layers[i].dilation < 1) {
      throw UsageError("frame layer " + std::to_string(i) +
                       ": need out_dim >= 1, a context and dilation >= 1");
    }
  }
  if (embed_dim < 1) throw UsageError("embed_dim must be >= 1");
  if (pooling == PoolingType::kAttentive && attention_hidden < 1) {
    throw UsageError("attention_hidden must be >= 1");
  }
}

TdnnSpec TdnnSpec::from(const Config& cfg) {
  TdnnSpec s = xvector(static_cast<int>(cfg.get_int("input_dim", 80)));
  s.arch = cfg.get_string("arch", "tdnn");
  if (cfg.contains("tdnn_layers")) {
    s.layers = parse_layers(cfg.get_string("tdnn_layers", ""));
  }
  const auto pooling = cfg.get_string("pooling", "statistics");
  if (pooling == "statistics") {
    s.pooling = PoolingType::kStatistics;
  } else if (pooling == "attentive") {
    s.pooling = PoolingType::kAttentive;
  } else {
    throw UsageError("pooling must be 'statistics' or 'attentive'");
  }
  s.embed_dim = static_cast<int>(cfg.get_int("embed_dim", s.embed_dim));
  s.attention_hidden =
      static_cast<int>(cfg.get_int("attention_hidden", s.attention_hidden));
  s.validate();
  return s;
}

std::span<const std::string_view> TdnnSpec::keys() { return kKeys; }

TdnnWeights TdnnWeights::from_bundle(const TensorBundle& bundle,
                                     const TdnnSpec& spec) {
  spec.validate();
  TdnnWeights w;
  Eigen::Index in = spec.input_dim;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& ls = spec.layers[i];
    const std::string p = "frame" + std::to_string(i) + ".";
    const Eigen::Index out = ls.out_dim;
    const Eigen::Index ctx = static_cast<Eigen::Index>(ls.context.size());
    FrameLayer layer;
    layer.weight = matrix_of(bundle.get(p + "weight", dims({out, in * ctx})));
    layer.bias = vector_of(bundle.get(p + "bias", dims({out})));
    layer.bn_mean = vector_of(bundle.get(p + "bn_mean", dims({out})));
    layer.bn_var = vector_of(bundle.get(p + "bn_var", dims({out})));
    layer.bn_gamma = vector_of(bundle.get(p + "bn_gamma", dims({out})));
    layer.bn_beta = vector_of(bundle.get(p + "bn_beta", dims({out})));
    w.frames.push_back(std::move(layer));
    in = out;
  }
  if (spec.pooling == PoolingType::kAttentive) {
    const Eigen::Index h = spec.attention_hidden;
    w.attention.weight = matrix_of(bundle.get("attention.weight", dims({h, in})));
    w.attention.bias = vector_of(bundle.get("attention.bias", dims({h})));
    w.attention.v = vector_of(bundle.get("attention.v", dims({h})));
  }
  w.segment_weight =
      matrix_of(bundle.get("segment.weight", dims({spec.embed_dim, 2 * in})));
  w.segment_bias = vector_of(bundle.get("segment.bias", dims({spec.embed_dim})));
  return w;
}

TensorBundle TdnnWeights::to_bundle() const {
  TensorBundle b;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string p = "frame" + std::to_string(i) + ".";
    b.add(p + "weight", tensor_of(frames[i].weight));
    b.add(p + "bias", tensor_of(frames[i].bias));
    b.add(p + "bn_mean", tensor_of(frames[i].bn_mean));
    b.add(p + "bn_var", tensor_of(frames[i].bn_var));
    b.add(p + "bn_gamma", tensor_of(frames[i].bn_gamma));
    b.add(p + "bn_beta", tensor_of(frames[i].bn_beta));
  }
  if (attention.weight.size() > 0) {
    b.add("attention.weight", tensor_of(attention.weight));
    b.add("attention.bias", tensor_of(attention.bias));
    b.add("attention.v", tensor_of(attention.v));
  }
  b.add("segment.weight", tensor_of(segment_weight));
  b.add("segment.bias", tensor_of(segment_bias));
  return b;
}

TdnnWeights TdnnWeights::random(const TdnnSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  auto randn = [&](Eigen::Index r, Eigen::Index c, float scale) {
    Eigen::MatrixXf m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = scale * gauss(rng);
    }
    return m;
  };
  auto randv = [&](Eigen::Index n, float lo, float hi) {
    Eigen::VectorXf v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = lo + (hi - lo) * unit(rng);
    return v;
  };
  TdnnWeights w;
  Eigen::Index in = spec.input_dim;
  for (const auto& ls : spec.layers) {
    const Eigen::Index fan_in = in * static_cast<Eigen::Index>(ls.context.size());
    FrameLayer layer;
    layer.weight = randn(ls.out_dim, fan_in, std::sqrt(2.0f / fan_in));
    layer.bias = randv(ls.out_dim, -0.1f, 0.1f);
    layer.bn_mean = randv(ls.out_dim, 0.0f, 0.5f);
    layer.bn_var = randv(ls.out_dim, 0.5f, 1.5f);
    layer.bn_gamma = randv(ls.out_dim, 0.8f, 1.2f);
    layer.bn_beta = randv(ls.out_dim, -0.1f, 0.1f);
    w.frames.push_back(std::move(layer));
    in = ls.out_dim;
  }
  if (spec.pooling == PoolingType::kAttentive) {
    w.attention.weight = randn(spec.attention_hidden, in, std::sqrt(1.0f / in));
    w.attention.bias = randv(spec.attention_hidden, -0.1f, 0.1f);
    w.attention.v = randv(spec.attention_hidden, -1.0f, 1.0f);
  }
  w.segment_weight = randn(spec.embed_dim, 2 * in, std::sqrt(1.0f / (2 * in)));
  w.segment_bias = randv(spec.embed_dim, -0.1f, 0.1f);
  return w;
}

Eigen::VectorXf forward(const RowMatrixXf& feats, const TdnnSpec& spec,
                        const TdnnWeights& weights) {
  const Eigen::Index t = feats.rows();
  if (t < 1) throw DataError("forward: no frames");
  if (feats.cols() != spec.input_dim) {
    throw DataError("forward: input has " + std::to_string(feats.cols()) +
                    " dims, frame0 expects " + std::to_string(spec.input_dim));
  }
  if (weights.frames.size() != spec.layers.size()) {
    throw DataError("forward: weights hold " +
                    std::to_string(weights.frames.size()) +
                    " frame layers, spec has " + std::to_string(spec.layers.size()));
  }
  RowMatrixXf h = feats;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const auto& ls = spec.layers[l];
    const auto& layer = weights.frames[l];
    const Eigen::Index in = h.cols();
    const Eigen::Index ctx = static_cast<Eigen::Index>(ls.context.size());
    if (layer.weight.cols() != in * ctx || layer.weight.rows() != ls.out_dim) {
      throw DataError("forward: frame" + std::to_string(l) +
                      ".weight shape does not match the layer input");
    }
    RowMatrixXf spliced(t, in * ctx);
    for (Eigen::Index i = 0; i < t; ++i) {
      for (Eigen::Index c = 0; c < ctx; ++c) {
        const Eigen::Index src = std::clamp<Eigen::Index>(
            i + static_cast<Eigen::Index>(ls.context[c]) * ls.dilation, 0, t - 1);
        spliced.row(i).segment(c * in, in) = h.row(src);
      }
    }
    RowMatrixXf y = spliced * layer.weight.transpose();
    y.rowwise() += layer.bias.transpose();
    y = y.cwiseMax(0.0f);
    const Eigen::VectorXf scale =
        layer.bn_gamma.array() / (layer.bn_var.array() + kBatchNormEps).sqrt();
    const Eigen::VectorXf shift =
        layer.bn_beta.array() - layer.bn_mean.array() * scale.array();
    for (Eigen::Index i = 0; i < t; ++i) {
      y.row(i) = (y.row(i).array() * scale.transpose().array() +
                  shift.transpose().array())
                     .matrix();
    }
    h = std::move(y);
  }
  const Eigen::VectorXf pooled = spec.pooling == PoolingType::kAttentive
                                     ? attentive_stats_pool(h, weights.attention)
                                     : stats_pool(h);
  if (weights.segment_weight.cols() != pooled.size() ||
      weights.segment_weight.rows() != spec.embed_dim) {
    throw DataError("forward: segment.weight shape does not match pooling output");
  }
  return weights.segment_weight * pooled + weights.segment_bias;
}

std::vector<Embedding> extract(const feat::Batch& batch, const TdnnSpec& spec,
                               const TdnnWeights& weights) {
  std::vector<Embedding> out;
  out.reserve(batch.size());
  const auto stride = batch.frames * batch.dims;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Eigen::Map<const RowMatrixXf> feats(
        batch.feats.data() + b * stride, static_cast<Eigen::Index>(batch.frames),
        static_cast<Eigen::Index>(batch.dims));
    out.push_back({batch.keys[b], forward(feats, spec, weights)});
  }
  return out;
}

void write_embeddings(std::ostream& out, std::span<const Embedding> embeddings) {
  char buf[64];
  for (const auto& e : embeddings) {
    out << e.key;
    for (Eigen::Index i = 0; i < e.vector.size(); ++i) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), e.vector[i]);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

std::vector<Embedding> read_embeddings(std::istream& in, std::string_view origin) {
  std::vector<Embedding> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    std::vector<float> values;
    std::string tok;
    while (ss >> tok) {
      float v = 0.0f;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() ||
          !std::isfinite(v)) {
        throw FormatError(std::string(origin) + ":" + std::to_string(lineno) +
                          ": bad value '" + tok + "'");
      }
      values.push_back(v);
    }
    if (values.empty() || (!out.empty() && values.size() !=
                                               static_cast<std::size_t>(out.front().vector.size()))) {
      throw FormatError(std::string(origin) + ":" + std::to_string(lineno) +
                        ": inconsistent embedding dimension");
    }
    out.push_back({key, Eigen::Map<Eigen::VectorXf>(
                            values.data(), static_cast<Eigen::Index>(values.size()))});
  }
  return out;
}

std::vector<Embedding> load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_embeddings(in, path);
}

}  // namespace spk::embed
