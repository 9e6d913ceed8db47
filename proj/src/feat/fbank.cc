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

#include "spk/feat/fbank.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "spk/error.h"

namespace spk::feat {

namespace {

std::vector<double> make_window(WindowType type, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  const double a = 2.0 * std::numbers::pi / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(a * static_cast<double>(i));
    switch (type) {
      case WindowType::kHamming: w[i] = 0.54 - 0.46 * c; break;
      case WindowType::kHann: w[i] = 0.5 - 0.5 * c; break;
      case WindowType::kPovey: w[i] = std::pow(0.5 - 0.5 * c, 0.85); break;
      case WindowType::kRectangular: w[i] = 1.0; break;
    }
  }
  return w;
}

}  // namespace

FbankOptions FbankOptions::from(const PipelineConfig& cfg) {
  FbankOptions o;
  o.sample_rate = cfg.target_rate;
  o.num_mels = cfg.num_mels;
  o.frame_shift_ms = cfg.frame_shift_ms;
  o.frame_len_ms = cfg.frame_len_ms;
  o.dither = cfg.dither;
  o.window = cfg.window;
  return o;
}

double hz_to_mel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

FbankComputer::FbankComputer(FbankOptions options)
    : options_(options),
      frame_length_(static_cast<std::size_t>(
          std::lround(options.frame_len_ms * options.sample_rate / 1000.0))),
      frame_shift_(static_cast<std::size_t>(
          std::lround(options.frame_shift_ms * options.sample_rate / 1000.0))),
      fft_(next_pow2(std::max<std::size_t>(frame_length_, 1))),
      window_(make_window(options.window, frame_length_)) {
  if (options_.num_mels < 1) throw UsageError("num_mels must be >= 1");
  if (frame_shift_ < 1 || frame_length_ <= frame_shift_) {
    throw UsageError("need frame length > frame shift > 0 samples");
  }
  const double nyquist = 0.5 * options_.sample_rate;
  const double high = options_.high_freq > 0.0 ? options_.high_freq : nyquist;
  if (!(options_.low_freq >= 0.0 && options_.low_freq < high && high <= nyquist)) {
    throw UsageError("mel range must satisfy 0 <= low < high <= Nyquist");
  }
  mel_low_ = hz_to_mel(options_.low_freq);
  mel_delta_ = (hz_to_mel(high) - mel_low_) / (options_.num_mels + 1);
  const std::size_t n_fft = fft_.size();
  const double bin_hz = static_cast<double>(options_.sample_rate) / n_fft;
  filters_.resize(static_cast<std::size_t>(options_.num_mels));
  for (int b = 0; b < options_.num_mels; ++b) {
    const double left = mel_low_ + b * mel_delta_;
    const double center = left + mel_delta_;
    const double right = center + mel_delta_;
    auto& f = filters_[static_cast<std::size_t>(b)];
    bool started = false;
    for (std::size_t k = 0; k <= n_fft / 2; ++k) {
      const double mel = hz_to_mel(bin_hz * static_cast<double>(k));
      double w = 0.0;
      if (mel > left && mel < right) {
        w = mel <= center ? (mel - left) / (center - left)
                          : (right - mel) / (right - center);
      }
      if (w > 0.0 && !started) {
        started = true;
        f.first_bin = k;
      }
      if (started) f.weights.push_back(w);
    }
    while (!f.weights.empty() && f.weights.back() == 0.0) f.weights.pop_back();
  }
}

std::size_t FbankComputer::num_frames(std::size_t num_samples) const {
  if (num_samples < frame_length_) return 0;
  return 1 + (num_samples - frame_length_) / frame_shift_;
}

std::vector<double> FbankComputer::center_frequencies() const {
  std::vector<double> c(filters_.size());
  for (std::size_t b = 0; b < c.size(); ++b) {
    c[b] = mel_to_hz(mel_low_ + (static_cast<double>(b) + 1.0) * mel_delta_);
  }
  return c;
}

RowMatrixXf FbankComputer::compute(std::span<const float> wave,
                                   std::mt19937_64* rng) {
  const auto frames = num_frames(wave.size());
  if (frames == 0) {
    throw DataError("waveform of " + std::to_string(wave.size()) +
                    " samples is shorter than one frame (" +
                    std::to_string(frame_length_) + ")");
  }
  if (options_.dither > 0.0 && rng == nullptr) {
    throw UsageError("dither requires a random generator");
  }
  const std::size_t n_fft = fft_.size();
  std::vector<double> buf(n_fft, 0.0);
  std::vector<std::complex<double>> spec(n_fft / 2 + 1);
  std::vector<double> power(n_fft / 2 + 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RowMatrixXf feats(static_cast<Eigen::Index>(frames), options_.num_mels);
  const double log_floor = std::log(options_.log_floor);

  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t offset = t * frame_shift_;
    for (std::size_t i = 0; i < frame_length_; ++i) {
      buf[i] = wave[offset + i];
      if (options_.dither > 0.0) buf[i] += options_.dither * gauss(*rng);
    }
    if (options_.preemph != 0.0) {
      for (std::size_t i = frame_length_ - 1; i > 0; --i) {
        buf[i] -= options_.preemph * buf[i - 1];
      }
      buf[0] -= options_.preemph * buf[0];
    }
    for (std::size_t i = 0; i < frame_length_; ++i) buf[i] *= window_[i];
    std::fill(buf.begin() + static_cast<std::ptrdiff_t>(frame_length_),
              buf.end(), 0.0);
    fft_.forward(buf, spec);
    for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(spec[k]);
    for (std::size_t b = 0; b < filters_.size(); ++b) {
      const auto& f = filters_[b];
      double e = 0.0;
      for (std::size_t j = 0; j < f.weights.size(); ++j) {
        e += f.weights[j] * power[f.first_bin + j];
      }
      feats(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(b)) =
          static_cast<float>(e > options_.log_floor ? std::log(e) : log_floor);
    }
  }
  return feats;
}

RowMatrixXf compute_fbank(std::span<const float> wave,
                          const FbankOptions& options, std::mt19937_64* rng) {
  FbankComputer computer(options);
  return computer.compute(wave, rng);
}

void cmvn(RowMatrixXf& feats, bool variance_norm) {
  if (feats.rows() < 1) throw DataError("cmvn: no frames");
  const auto rows = feats.rows();
  for (Eigen::Index c = 0; c < feats.cols(); ++c) {
    double sum = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) sum += feats(r, c);
    const double mean = sum / static_cast<double>(rows);
    double sq = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double d = feats(r, c) - mean;
      sq += d * d;
    }
    const double stddev = std::sqrt(sq / static_cast<double>(rows));
    const double scale = variance_norm && stddev > 1e-8 ? 1.0 / stddev : 1.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      feats(r, c) = static_cast<float>((feats(r, c) - mean) * scale);
    }
  }
}

void time_mask(RowMatrixXf& feats, std::size_t start, std::size_t width) {
  const auto rows = static_cast<std::size_t>(feats.rows());
  const auto end = std::min(rows, start + width);
  for (std::size_t r = std::min(start, rows); r < end; ++r) {
    feats.row(static_cast<Eigen::Index>(r)).setZero();
  }
}

void freq_mask(RowMatrixXf& feats, std::size_t start, std::size_t width) {
  const auto cols = static_cast<std::size_t>(feats.cols());
  const auto end = std::min(cols, start + width);
  for (std::size_t c = std::min(start, cols); c < end; ++c) {
    feats.col(static_cast<Eigen::Index>(c)).setZero();
  }
}

void spec_augment(RowMatrixXf& feats, const SpecAugOptions& options,
                  std::mt19937_64& rng) {
  auto draw = [&rng](std::size_t cap, std::size_t extent) {
    const auto max_width = std::min(cap, extent);
    const auto width =
        std::uniform_int_distribution<std::size_t>(1, max_width)(rng);
    const auto start =
        std::uniform_int_distribution<std::size_t>(0, extent - width)(rng);
    return std::pair{start, width};
  };
  const auto rows = static_cast<std::size_t>(feats.rows());
  const auto cols = static_cast<std::size_t>(feats.cols());
  if (options.max_t > 0 && rows > 0) {
    for (int i = 0; i < options.num_t_masks; ++i) {
      const auto [start, width] = draw(static_cast<std::size_t>(options.max_t), rows);
      time_mask(feats, start, width);
    }
  }
  if (options.max_f > 0 && cols > 0) {
    for (int i = 0; i < options.num_f_masks; ++i) {
      const auto [start, width] = draw(static_cast<std::size_t>(options.max_f), cols);
      freq_mask(feats, start, width);
    }
  }
}

}  // namespace spk::feat
