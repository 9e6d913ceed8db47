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

#include <span>

#include "spk/diar/segments.h"

namespace spk::diar {

// Fractions of scored reference speech time; der = miss + fa + sc.
struct DerReport {
  double miss = 0.0;
  double fa = 0.0;
  double sc = 0.0;
  double der = 0.0;
  double scored_seconds = 0.0;
};

// Diarization error rate with a one-to-one speaker mapping per recording that
// maximizes overlap. Regions within `collar` seconds of any reference turn
// boundary are not scored. Overlapped speech counts every speaker.
DerReport compute_der(std::span<const LabeledSegment> reference,
                      std::span<const LabeledSegment> hypothesis, double collar = 0.25);

}  // namespace spk::diar
