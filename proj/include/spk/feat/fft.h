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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace spk::feat {

// Real-input FFT of a fixed size backed by FFTW. Plans are created and
// destroyed under a process-wide lock (the FFTW planner is not thread safe);
// execution is lock free, so one instance per thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  // in.size() == n, out.size() == n/2 + 1.
  void forward(std::span<const double> in,
               std::span<std::complex<double>> out);
  // Unnormalized inverse: forward followed by inverse scales by n.
  void inverse(std::span<const std::complex<double>> in,
               std::span<double> out);

 private:
  std::size_t n_;
  double* real_ = nullptr;
  void* spectrum_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

std::size_t next_pow2(std::size_t n);

// Full linear convolution (length a + b - 1) via FFT.
std::vector<double> fft_convolve(std::span<const double> a,
                                 std::span<const double> b);

}  // namespace spk::feat
