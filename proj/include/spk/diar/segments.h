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

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spk::diar {

struct SpeechSegment {
  std::string recording;
  double start = 0.0;  // seconds
  double end = 0.0;
};

struct LabeledSegment {
  std::string recording;
  double start = 0.0;
  double end = 0.0;
  std::string speaker;

  double duration() const { return end - start; }
};

struct SubsegmentOptions {
  double window = 1.5;
  double shift = 0.75;
  double min_len = 0.25;

  void validate() const;
};

// Tiles each segment with windows starting every `shift` seconds. Windows are
// clipped to the segment; tiling stops at the first window that reaches the
// segment end, and a clipped window shorter than min_len is dropped.
std::vector<SpeechSegment> subsegment(std::span<const SpeechSegment> segments,
                                      const SubsegmentOptions& opts = {});

// Per recording, in start order: overlapping windows are cut at the middle of
// their overlap, then touching windows with the same label are joined.
std::vector<LabeledSegment> merge_segments(std::vector<LabeledSegment> windows);

// SAD: `rec start end` per line.
std::vector<SpeechSegment> read_sad(std::istream& in, std::string_view origin = "<stream>");
std::vector<SpeechSegment> load_sad(const std::string& path);

// RTTM: `SPEAKER rec 1 tbeg tdur <NA> <NA> spk <NA> <NA>`. Other line types
// are skipped.
std::vector<LabeledSegment> read_rttm(std::istream& in, std::string_view origin = "<stream>");
std::vector<LabeledSegment> load_rttm(const std::string& path);
void write_rttm(std::ostream& out, std::span<const LabeledSegment> segments);

// Speech regions of a reference, one per RTTM turn (oracle SAD).
std::vector<SpeechSegment> speech_regions(std::span<const LabeledSegment> reference);

}  // namespace spk::diar
