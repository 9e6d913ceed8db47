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

#include "spk/loss/scheduler.h"

#include <cmath>
#include <numbers>
#include <string>

#include "spk/error.h"

namespace spk::loss {

namespace {

constexpr std::string_view kKeys[] = {"T",  "T_warm", "eta0", "etaT",
                                      "T1", "T2",     "M",    "ramp"};

void check_range(long t, const SchedulerConfig& cfg) {
  if (t < 0 || t >= cfg.T) {
    throw UsageError("iteration " + std::to_string(t) + " outside [0, " +
                     std::to_string(cfg.T) + ")");
  }
}

}  // namespace

void SchedulerConfig::validate() const {
  if (T < 1) throw UsageError("scheduler: T must be >= 1");
  if (T_warm < 0 || T_warm > T) throw UsageError("scheduler: need 0 <= T_warm <= T");
  if (T1 < 0 || T1 > T2 || T2 > T) throw UsageError("scheduler: need 0 <= T1 <= T2 <= T");
  if (!(eta0 > 0.0) || !(etaT > 0.0)) throw UsageError("scheduler: learning rates must be > 0");
  if (!(M >= 0.0 && M < 1.0)) throw UsageError("scheduler: need 0 <= M < 1");
}

SchedulerConfig SchedulerConfig::from(const Config& cfg) {
  SchedulerConfig s;
  s.T = cfg.get_int("T", s.T);
  s.T_warm = cfg.get_int("T_warm", s.T_warm);
  s.eta0 = cfg.get_double("eta0", s.eta0);
  s.etaT = cfg.get_double("etaT", s.etaT);
  s.T1 = cfg.get_int("T1", s.T1);
  s.T2 = cfg.get_int("T2", s.T2);
  s.M = cfg.get_double("M", s.M);
  const auto ramp = cfg.get_string("ramp", "linear");
  if (ramp == "linear") {
    s.ramp = Ramp::kLinear;
  } else if (ramp == "logarithmic") {
    s.ramp = Ramp::kLogarithmic;
  } else {
    throw UsageError("ramp must be 'linear' or 'logarithmic'");
  }
  s.validate();
  return s;
}

std::span<const std::string_view> SchedulerConfig::keys() { return kKeys; }

double lr_schedule(long t, const SchedulerConfig& cfg) {
  check_range(t, cfg);
  const double td = static_cast<double>(t);
  const double warm = t < cfg.T_warm ? td / static_cast<double>(cfg.T_warm) : 1.0;
  const double decay =
      cfg.eta0 * std::exp(td / static_cast<double>(cfg.T) * std::log(cfg.etaT / cfg.eta0));
  return warm * decay;
}

double margin_schedule(long t, const SchedulerConfig& cfg) {
  check_range(t, cfg);
  if (t < cfg.T1) return 0.0;
  if (t >= cfg.T2) return cfg.M;
  const double u = static_cast<double>(t - cfg.T1) / static_cast<double>(cfg.T2 - cfg.T1);
  if (cfg.ramp == Ramp::kLinear) return cfg.M * u;
  return cfg.M * std::log(1.0 + (std::numbers::e - 1.0) * u);
}

}  // namespace spk::loss
