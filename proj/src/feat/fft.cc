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

#include "spk/feat/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "spk/error.h"

namespace spk::feat {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw UsageError("FFT size must be positive");
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(n);
  auto* spec = fftw_alloc_complex(n / 2 + 1);
  spectrum_ = spec;
  forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec,
                                       FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real_,
                                       FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_);
  fftw_free(spectrum_);
}

void RealFft::forward(std::span<const double> in,
                      std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  const auto* spec = static_cast<const fftw_complex*>(spectrum_);
  for (std::size_t k = 0; k < n_ / 2 + 1; ++k) {
    out[k] = {spec[k][0], spec[k][1]};
  }
}

void RealFft::inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) {
  auto* spec = static_cast<fftw_complex*>(spectrum_);
  for (std::size_t k = 0; k < n_ / 2 + 1; ++k) {
    spec[k][0] = in[k].real();
    spec[k][1] = in[k].imag();
  }
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  std::copy(real_, real_ + n_, out.begin());
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> fft_convolve(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  RealFft fft(n);
  std::vector<double> buf(n, 0.0);
  std::vector<std::complex<double>> fa(n / 2 + 1), fb(n / 2 + 1);
  std::copy(a.begin(), a.end(), buf.begin());
  fft.forward(buf, fa);
  std::fill(buf.begin(), buf.end(), 0.0);
  std::copy(b.begin(), b.end(), buf.begin());
  fft.forward(buf, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  fft.inverse(fa, buf);
  const double scale = 1.0 / static_cast<double>(n);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = buf[i] * scale;
  return out;
}

}  // namespace spk::feat
