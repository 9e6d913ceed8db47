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

#include "spk/diar/segments.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "spk/error.h"

namespace spk::diar {

namespace {

// Boundary comparisons tolerate accumulated rounding of k * shift.
constexpr double kTimeEps = 1e-9;

std::string where(std::string_view origin, int line) {
  return std::string(origin) + ":" + std::to_string(line) + ": ";
}

double parse_time(const std::string& s, std::string_view origin, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(where(origin, line) + "bad time '" + s + "'");
  }
}

std::ifstream open_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

}  // namespace

void SubsegmentOptions::validate() const {
  if (!(window > 0.0)) throw UsageError("diar_window must be > 0");
  if (!(shift > 0.0)) throw UsageError("diar_shift must be > 0");
  if (!(min_len >= 0.0)) throw UsageError("diar_min_len must be >= 0");
}

std::vector<SpeechSegment> subsegment(std::span<const SpeechSegment> segments,
                                      const SubsegmentOptions& opts) {
  opts.validate();
  std::vector<SpeechSegment> out;
  for (const auto& seg : segments) {
    if (!(seg.start >= 0.0 && seg.end > seg.start)) {
      throw DataError("invalid speech segment " + seg.recording);
    }
    for (long k = 0;; ++k) {
      const double start = seg.start + static_cast<double>(k) * opts.shift;
      if (start >= seg.end - kTimeEps) break;
      const bool last = start + opts.window >= seg.end - kTimeEps;
      const double end = last ? seg.end : start + opts.window;
      if (!last || end - start >= opts.min_len - kTimeEps) {
        out.push_back({seg.recording, start, end});
      }
      if (last) break;
    }
  }
  return out;
}

std::vector<LabeledSegment> merge_segments(std::vector<LabeledSegment> windows) {
  std::stable_sort(windows.begin(), windows.end(),
                   [](const LabeledSegment& a, const LabeledSegment& b) {
                     if (a.recording != b.recording) return a.recording < b.recording;
                     return a.start < b.start;
                   });
  for (std::size_t i = 0; i + 1 < windows.size(); ++i) {
    auto& cur = windows[i];
    auto& next = windows[i + 1];
    if (cur.recording != next.recording || next.start >= cur.end) continue;
    const double mid = std::max(cur.start, 0.5 * (next.start + std::min(cur.end, next.end)));
    cur.end = mid;
    next.start = std::max(next.start, mid);
  }
  std::vector<LabeledSegment> out;
  for (auto& w : windows) {
    if (!(w.end > w.start)) continue;
    if (!out.empty() && out.back().recording == w.recording && out.back().speaker == w.speaker &&
        w.start <= out.back().end + kTimeEps) {
      out.back().end = std::max(out.back().end, w.end);
    } else {
      out.push_back(std::move(w));
    }
  }
  return out;
}

std::vector<SpeechSegment> read_sad(std::istream& in, std::string_view origin) {
  std::vector<SpeechSegment> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    SpeechSegment s;
    std::string a, b, extra;
    if (!(ss >> s.recording)) continue;
    if (!(ss >> a >> b) || (ss >> extra)) {
      throw FormatError(where(origin, n) + "expected `rec start end`");
    }
    s.start = parse_time(a, origin, n);
    s.end = parse_time(b, origin, n);
    if (!(s.start >= 0.0 && s.end > s.start)) {
      throw FormatError(where(origin, n) + "segment end must follow its start");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SpeechSegment> load_sad(const std::string& path) {
  auto in = open_text(path);
  return read_sad(in, path);
}

std::vector<LabeledSegment> read_rttm(std::istream& in, std::string_view origin) {
  std::vector<LabeledSegment> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream ss(line);
    std::vector<std::string> f;
    for (std::string tok; ss >> tok;) f.push_back(std::move(tok));
    if (f.empty() || f[0][0] == '#' || f[0] != "SPEAKER") continue;
    if (f.size() < 8) {
      throw FormatError(where(origin, n) + "RTTM SPEAKER line needs at least 8 fields");
    }
    LabeledSegment s;
    s.recording = f[1];
    s.start = parse_time(f[3], origin, n);
    const double dur = parse_time(f[4], origin, n);
    if (!(s.start >= 0.0 && dur > 0.0)) {
      throw FormatError(where(origin, n) + "RTTM turn needs tbeg >= 0 and tdur > 0");
    }
    s.end = s.start + dur;
    s.speaker = f[7];
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<LabeledSegment> load_rttm(const std::string& path) {
  auto in = open_text(path);
  return read_rttm(in, path);
}

void write_rttm(std::ostream& out, std::span<const LabeledSegment> segments) {
  char buf[64];
  for (const auto& s : segments) {
    std::snprintf(buf, sizeof(buf), "%.3f %.3f", s.start, s.end - s.start);
    out << "SPEAKER " << s.recording << " 1 " << buf << " <NA> <NA> " << s.speaker
        << " <NA> <NA>\n";
  }
}

std::vector<SpeechSegment> speech_regions(std::span<const LabeledSegment> reference) {
  std::vector<SpeechSegment> out;
  for (const auto& r : reference) out.push_back({r.recording, r.start, r.end});
  std::sort(out.begin(), out.end(), [](const SpeechSegment& a, const SpeechSegment& b) {
    if (a.recording != b.recording) return a.recording < b.recording;
    return a.start < b.start;
  });
  // Overlapping turns become one region.
  std::vector<SpeechSegment> merged;
  for (auto& s : out) {
    if (!merged.empty() && merged.back().recording == s.recording &&
        s.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(std::move(s));
    }
  }
  return merged;
}

}  // namespace spk::diar
