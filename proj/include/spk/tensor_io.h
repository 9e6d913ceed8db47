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
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace spk {

// A named dense tensor: row-major float32 payload with its shape.
struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> data;

  std::size_t numel() const;
};

// Ordered collection of named tensors persisted in the WSTN container:
//
//   "WSTN" | version u32 | count u32 |
//   per tensor: name_len u16 | name | rank u8 | dims u32 x rank | f32 payload
//
// All integers and floats are little-endian. Tensor order is insertion order.
class TensorBundle {
 public:
  static constexpr std::uint32_t kVersion = 1;

  void add(std::string name, Tensor tensor);
  bool contains(std::string_view name) const;
  const Tensor& get(std::string_view name) const;
  // Like get(), but also checks the shape; the error names the tensor.
  const Tensor& get(std::string_view name,
                    const std::vector<std::uint32_t>& expected_shape) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, Tensor>>& entries() const {
    return entries_;
  }

  void save(const std::filesystem::path& path) const;
  static TensorBundle load(const std::filesystem::path& path);
  std::vector<char> serialize() const;
  static TensorBundle deserialize(std::string_view bytes);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

using RowMatrixXf =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Tensor to_tensor(const Eigen::MatrixXd& m);
Tensor to_tensor(const Eigen::VectorXd& v);
Tensor to_tensor(const RowMatrixXf& m);
Eigen::MatrixXd to_matrix(const Tensor& t);
Eigen::VectorXd to_vector(const Tensor& t);

}  // namespace spk
