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

#include "spk/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "spk/error.h"

namespace spk {

namespace {

std::uint32_t le32(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return std::uint32_t(u[0]) | std::uint32_t(u[1]) << 8 |
         std::uint32_t(u[2]) << 16 | std::uint32_t(u[3]) << 24;
}

std::uint16_t le16(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return std::uint16_t(u[0] | u[1] << 8);
}

void put32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put16(std::vector<char>& out, std::uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char(v >> 8));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

}  // namespace

WavData decode_wav(std::span<const char> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE stream");
  }
  WavData wav;
  int bits = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = bytes.data() + pos;
    const std::uint32_t size = le32(id + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) {
        throw FormatError("truncated fmt chunk");
      }
      std::uint16_t tag = le16(bytes.data() + body);
      wav.num_channels = le16(bytes.data() + body + 2);
      wav.sample_rate = static_cast<int>(le32(bytes.data() + body + 4));
      bits = le16(bytes.data() + body + 14);
      if (tag == kFormatExtensible && size >= 26) {
        tag = le16(bytes.data() + body + 24);
      }
      if (tag != kFormatPcm) {
        throw FormatError("unsupported WAV encoding (format tag " +
                          std::to_string(tag) + "); only PCM16 is accepted");
      }
      if (bits != 16) {
        throw FormatError("unsupported WAV sample width " +
                          std::to_string(bits) + " bits; only PCM16");
      }
      if (wav.num_channels < 1 || wav.sample_rate <= 0) {
        throw FormatError("invalid WAV channel count or sample rate");
      }
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("data chunk before fmt chunk");
      // Some writers leave the size as 0 or 0xffffffff when streaming.
      std::size_t n = size;
      if (body + n > bytes.size()) n = bytes.size() - body;
      const std::size_t frame = 2u * wav.num_channels;
      const std::size_t frames = n / frame;
      wav.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        wav.samples[i] =
            static_cast<std::int16_t>(le16(bytes.data() + body + i * frame));
      }
      return wav;
    }
    pos = body + size + (size & 1u);
  }
  throw FormatError(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<char> encode_wav(std::span<const std::int16_t> samples,
                             int sample_rate) {
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(sample_rate));
  put32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, data_bytes);
  for (const auto s : samples) put16(out, static_cast<std::uint16_t>(s));
  return out;
}

void write_wav(const std::filesystem::path& path,
               std::span<const std::int16_t> samples, int sample_rate) {
  const auto bytes = encode_wav(samples, sample_rate);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::vector<float> pcm_to_float(std::span<const std::int16_t> pcm) {
  std::vector<float> out(pcm.size());
  std::transform(pcm.begin(), pcm.end(), out.begin(),
                 [](std::int16_t s) { return static_cast<float>(s) / 32768.0f; });
  return out;
}

std::vector<std::int16_t> float_to_pcm(std::span<const float> wave) {
  std::vector<std::int16_t> out(wave.size());
  std::transform(wave.begin(), wave.end(), out.begin(), [](float x) {
    const float v = std::round(x * 32768.0f);
    return static_cast<std::int16_t>(std::clamp(v, -32768.0f, 32767.0f));
  });
  return out;
}

}  // namespace spk
