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

#include "spk/tensor_io.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>

#include "spk/error.h"

namespace spk {

namespace {

template <typename T>
void put_le(std::vector<char>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(buf, buf + sizeof(T));
  }
  out.insert(out.end(), buf, buf + sizeof(T));
}

class Cursor {
 public:
  explicit Cursor(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T read() {
    need(sizeof(T));
    char buf[sizeof(T)];
    std::memcpy(buf, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(buf, buf + sizeof(T));
    }
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("WSTN: truncated file");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string shape_str(const std::vector<std::uint32_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace

std::size_t Tensor::numel() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void TensorBundle::add(std::string name, Tensor tensor) {
  if (name.empty() || name.size() > 0xffff) {
    throw UsageError("tensor name must be 1..65535 bytes");
  }
  if (tensor.shape.size() > 0xff) throw UsageError("tensor rank too large");
  if (tensor.numel() != tensor.data.size()) {
    throw UsageError("tensor '" + name + "': payload size does not match shape " +
                     shape_str(tensor.shape));
  }
  if (contains(name)) throw UsageError("duplicate tensor name '" + name + "'");
  entries_.emplace_back(std::move(name), std::move(tensor));
}

bool TensorBundle::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == name; });
}

const Tensor& TensorBundle::get(std::string_view name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw FormatError("missing tensor '" + std::string(name) + "'");
}

const Tensor& TensorBundle::get(
    std::string_view name,
    const std::vector<std::uint32_t>& expected_shape) const {
  const auto& t = get(name);
  if (t.shape != expected_shape) {
    throw FormatError("tensor '" + std::string(name) + "' has shape " +
                      shape_str(t.shape) + ", expected " +
                      shape_str(expected_shape));
  }
  return t;
}

std::vector<char> TensorBundle::serialize() const {
  std::vector<char> out{'W', 'S', 'T', 'N'};
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [name, t] : entries_) {
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.shape.size()));
    for (const auto d : t.shape) put_le<std::uint32_t>(out, d);
    for (const float v : t.data) put_le<float>(out, v);
  }
  return out;
}

TensorBundle TensorBundle::deserialize(std::string_view bytes) {
  Cursor cur(bytes);
  if (cur.take(4) != "WSTN") throw FormatError("WSTN: bad magic");
  const auto version = cur.read<std::uint32_t>();
  if (version != kVersion) {
    throw FormatError("WSTN: unsupported version " + std::to_string(version));
  }
  const auto count = cur.read<std::uint32_t>();
  TensorBundle bundle;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = cur.read<std::uint16_t>();
    std::string name(cur.take(name_len));
    Tensor t;
    const auto rank = cur.read<std::uint8_t>();
    for (int d = 0; d < rank; ++d) t.shape.push_back(cur.read<std::uint32_t>());
    t.data.resize(t.numel());
    for (auto& v : t.data) v = cur.read<float>();
    bundle.add(std::move(name), std::move(t));
  }
  if (!cur.done()) throw FormatError("WSTN: trailing bytes after last tensor");
  return bundle;
}

void TensorBundle::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

TensorBundle TensorBundle::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  try {
    return deserialize(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Tensor to_tensor(const Eigen::MatrixXd& m) {
  Tensor t;
  t.shape = {static_cast<std::uint32_t>(m.rows()),
             static_cast<std::uint32_t>(m.cols())};
  t.data.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      t.data.push_back(static_cast<float>(m(r, c)));
    }
  }
  return t;
}

Tensor to_tensor(const Eigen::VectorXd& v) {
  Tensor t;
  t.shape = {static_cast<std::uint32_t>(v.size())};
  t.data.assign(v.data(), v.data() + v.size());
  return t;
}

Tensor to_tensor(const RowMatrixXf& m) {
  Tensor t;
  t.shape = {static_cast<std::uint32_t>(m.rows()),
             static_cast<std::uint32_t>(m.cols())};
  t.data.assign(m.data(), m.data() + m.size());
  return t;
}

Eigen::MatrixXd to_matrix(const Tensor& t) {
  if (t.shape.size() != 2) throw FormatError("expected a rank-2 tensor");
  Eigen::MatrixXd m(t.shape[0], t.shape[1]);
  for (std::uint32_t r = 0; r < t.shape[0]; ++r) {
    for (std::uint32_t c = 0; c < t.shape[1]; ++c) {
      m(r, c) = t.data[std::size_t(r) * t.shape[1] + c];
    }
  }
  return m;
}

Eigen::VectorXd to_vector(const Tensor& t) {
  if (t.shape.size() != 1) throw FormatError("expected a rank-1 tensor");
  Eigen::VectorXd v(t.shape[0]);
  for (std::uint32_t i = 0; i < t.shape[0]; ++i) v[i] = t.data[i];
  return v;
}

}  // namespace spk
