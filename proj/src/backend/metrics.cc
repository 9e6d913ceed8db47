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

#include "spk/backend/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spk/error.h"

namespace spk::backend {

namespace {

struct Counts {
  long targets = 0;
  long nontargets = 0;
};

Counts count(std::span<const LabeledScore> scores) {
  Counts c;
  for (const auto& s : scores) {
    if (!std::isfinite(s.score)) throw DataError("non-finite score");
    (s.target ? c.targets : c.nontargets) += 1;
  }
  if (c.targets == 0 || c.nontargets == 0) {
    throw DataError("metrics need at least one target and one nontarget trial (got " +
                    std::to_string(c.targets) + " and " + std::to_string(c.nontargets) + ")");
  }
  return c;
}

// Cross product sign of (b - a) x (c - a) in count space scaled to rates.
// Positive when c lies to the left of a->b.
__int128 cross(const OperatingPoint& a, const OperatingPoint& b, const OperatingPoint& c,
               long nn, long nt) {
  // x = fa / nn, y = miss / nt; scale both axes by nn * nt.
  const __int128 ax = static_cast<__int128>(a.false_alarms) * nt;
  const __int128 ay = static_cast<__int128>(a.misses) * nn;
  const __int128 bx = static_cast<__int128>(b.false_alarms) * nt - ax;
  const __int128 by = static_cast<__int128>(b.misses) * nn - ay;
  const __int128 cx = static_cast<__int128>(c.false_alarms) * nt - ax;
  const __int128 cy = static_cast<__int128>(c.misses) * nn - ay;
  return bx * cy - by * cx;
}

}  // namespace

std::vector<OperatingPoint> operating_points(std::span<const LabeledScore> scores) {
  const Counts c = count(scores);
  std::vector<LabeledScore> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledScore& a, const LabeledScore& b) { return a.score > b.score; });
  std::vector<OperatingPoint> points;
  points.push_back({std::numeric_limits<double>::infinity(), c.targets, 0});
  long misses = c.targets;
  long fas = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      sorted[j].target ? --misses : ++fas;
      ++j;
    }
    const double threshold = j < sorted.size()
                                 ? sorted[i].score / 2.0 + sorted[j].score / 2.0
                                 : -std::numeric_limits<double>::infinity();
    points.push_back({threshold, misses, fas});
    i = j;
  }
  return points;
}

double diagonal_crossing(long fa1, long miss1, long fa2, long miss2, long num_nontarget,
                         long num_target) {
  // With x = fa / Nn and y = miss / Nt, the line through both points meets
  // y = x at (x1 y2 - x2 y1) / ((y2 - y1) - (x2 - x1)).
  const __int128 num = static_cast<__int128>(fa1) * miss2 - static_cast<__int128>(fa2) * miss1;
  const __int128 den = static_cast<__int128>(miss2 - miss1) * num_nontarget -
                       static_cast<__int128>(fa2 - fa1) * num_target;
  return static_cast<double>(num) / static_cast<double>(den);
}

EerResult eer(std::span<const LabeledScore> scores) {
  const Counts c = count(scores);
  const auto points = operating_points(scores);
  // Lower convex hull; points arrive sorted by increasing fa, decreasing miss.
  std::vector<OperatingPoint> hull;
  for (const auto& p : points) {
    while (hull.size() >= 2 &&
           cross(hull[hull.size() - 2], hull.back(), p, c.nontargets, c.targets) <= 0) {
      hull.pop_back();
    }
    hull.push_back(p);
  }
  // First hull vertex with P_fa >= P_miss; the crossing lies on the edge
  // ending there.
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& p = hull[i];
    const __int128 fa = static_cast<__int128>(p.false_alarms) * c.targets;
    const __int128 miss = static_cast<__int128>(p.misses) * c.nontargets;
    if (fa < miss) continue;
    if (fa == miss || i == 0) {
      return {static_cast<double>(p.false_alarms) / static_cast<double>(c.nontargets),
              p.threshold};
    }
    const auto& q = hull[i - 1];
    const double rate = diagonal_crossing(q.false_alarms, q.misses, p.false_alarms, p.misses,
                                          c.nontargets, c.targets);
    const double fq = static_cast<double>(q.false_alarms) / static_cast<double>(c.nontargets);
    const double fp = static_cast<double>(p.false_alarms) / static_cast<double>(c.nontargets);
    const double lambda = fp > fq ? (rate - fq) / (fp - fq) : 0.0;
    double threshold;
    if (std::isinf(q.threshold)) {
      threshold = p.threshold;
    } else if (std::isinf(p.threshold)) {
      threshold = q.threshold;
    } else {
      threshold = q.threshold + lambda * (p.threshold - q.threshold);
    }
    return {rate, threshold};
  }
  return {1.0, -std::numeric_limits<double>::infinity()};
}

double normalized_dcf(long misses, long false_alarms, long num_target, long num_nontarget,
                      const DcfParams& params) {
  const double p_miss = static_cast<double>(misses) / static_cast<double>(num_target);
  const double p_fa = static_cast<double>(false_alarms) / static_cast<double>(num_nontarget);
  const double cost = params.c_miss * p_miss * params.p_target +
                      params.c_fa * p_fa * (1.0 - params.p_target);
  const double norm = std::min(params.c_miss * params.p_target,
                               params.c_fa * (1.0 - params.p_target));
  return cost / norm;
}

DcfResult min_dcf(std::span<const LabeledScore> scores, const DcfParams& params) {
  if (!(params.p_target > 0.0 && params.p_target < 1.0)) {
    throw UsageError("p_target must lie in (0, 1)");
  }
  if (!(params.c_miss > 0.0 && params.c_fa > 0.0)) {
    throw UsageError("c_miss and c_fa must be > 0");
  }
  const Counts c = count(scores);
  DcfResult best{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& p : operating_points(scores)) {
    const double d = normalized_dcf(p.misses, p.false_alarms, c.targets, c.nontargets, params);
    if (d < best.min_dcf) best = {d, p.threshold};
  }
  return best;
}

}  // namespace spk::backend
