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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "spk/random.h"
#include "spk/uio/shard.h"

namespace spk::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("spk_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::vector<float> sine(double freq, int rate, std::size_t n, double amp = 0.5) {
  std::vector<float> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = static_cast<float>(amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / rate));
  }
  return w;
}

inline std::vector<float> gaussian_noise(std::size_t n, std::uint64_t seed, double std = 0.1) {
  auto rng = make_rng(seed, 99);
  std::normal_distribution<double> g(0.0, std);
  std::vector<float> w(n);
  for (auto& x : w) x = static_cast<float>(g(rng));
  return w;
}

// Records with random PCM; lengths vary so shard payloads differ.
inline std::vector<uio::UtteranceRecord> synthetic_records(std::size_t n, std::uint64_t seed,
                                                           std::size_t min_len = 200,
                                                           std::size_t max_len = 1200) {
  auto rng = make_rng(seed, 0);
  std::uniform_int_distribution<int> sample(-32768, 32767);
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::vector<uio::UtteranceRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    uio::UtteranceRecord r;
    r.key = "utt" + std::to_string(i);
    r.speaker = "spk" + std::to_string(i % 7);
    r.sample_rate = (i % 3 == 0) ? 8000 : 16000;
    r.pcm.resize(len(rng));
    for (auto& s : r.pcm) s = static_cast<std::int16_t>(sample(rng));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace spk::testing
