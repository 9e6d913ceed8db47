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
#include <string_view>

#include "spk/config.h"

namespace spk::loss {

enum class Ramp { kLinear, kLogarithmic };

// Iteration-indexed learning-rate and margin schedules.
struct SchedulerConfig {
  long T = 1000;       // total iterations
  long T_warm = 0;     // warm-up iterations
  double eta0 = 0.1;   // initial learning rate
  double etaT = 1e-4;  // final learning rate
  long T1 = 0;         // margin ramp start
  long T2 = 0;         // margin ramp end
  double M = 0.2;      // final margin
  Ramp ramp = Ramp::kLinear;

  void validate() const;
  // Keys are the field names plus `ramp = linear|logarithmic`.
  static SchedulerConfig from(const Config& cfg);
  static std::span<const std::string_view> keys();
};

// g(t) * h(t): linear warm-up g(t) = t / T_warm for t < T_warm, else 1, times
// exponential decay h(t) = eta0 * exp((t / T) * ln(etaT / eta0)).
// Throws UsageError unless 0 <= t < T.
double lr_schedule(long t, const SchedulerConfig& cfg);

// 0 for t < T1, M for T2 <= t, and a ramp from 0 to M in between:
// linear M * u or logarithmic M * ln(1 + (e - 1) u), u = (t - T1) / (T2 - T1).
// Throws UsageError unless 0 <= t < T.
double margin_schedule(long t, const SchedulerConfig& cfg);

}  // namespace spk::loss
