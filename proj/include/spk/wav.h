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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace spk {

// Decoded RIFF/WAVE content. Only 16-bit PCM is supported; for multi-channel
// input `samples` holds the first channel and `num_channels` the original
// channel count.
struct WavData {
  int sample_rate = 0;
  int num_channels = 1;
  std::vector<std::int16_t> samples;
};

WavData decode_wav(std::span<const char> bytes);
WavData read_wav(const std::filesystem::path& path);

// Mono PCM16 RIFF/WAVE encoding.
std::vector<char> encode_wav(std::span<const std::int16_t> samples,
                             int sample_rate);
void write_wav(const std::filesystem::path& path,
               std::span<const std::int16_t> samples, int sample_rate);

// PCM16 <-> float in [-1, 1).
std::vector<float> pcm_to_float(std::span<const std::int16_t> pcm);
std::vector<std::int16_t> float_to_pcm(std::span<const float> wave);

}  // namespace spk
