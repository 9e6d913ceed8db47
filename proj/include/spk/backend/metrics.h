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
#include <vector>

namespace spk::backend {

struct LabeledScore {
  double score = 0.0;
  bool target = false;
};

// One ROC operating point: accept when score >= threshold.
struct OperatingPoint {
  double threshold = 0.0;
  long misses = 0;        // targets rejected
  long false_alarms = 0;  // nontargets accepted
};

// Operating points at +inf, every midpoint between adjacent distinct scores,
// and -inf, ordered by decreasing threshold.
std::vector<OperatingPoint> operating_points(std::span<const LabeledScore> scores);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Equal error rate on the ROC convex hull: the hull edge that crosses
// P_miss = P_fa is interpolated linearly. Computed from integer counts with a
// single final division so equal crossings give equal doubles.
EerResult eer(std::span<const LabeledScore> scores);

// Diagonal crossing of the segment between two operating points, as a rate.
// Shared by eer() and its tests.
double diagonal_crossing(long fa1, long miss1, long fa2, long miss2,
                         long num_nontarget, long num_target);

struct DcfParams {
  double p_target = 0.01;
  double c_miss = 1.0;
  double c_fa = 1.0;
};

struct DcfResult {
  double min_dcf = 0.0;
  double threshold = 0.0;
};

// Normalized detection cost at one operating point.
double normalized_dcf(long misses, long false_alarms, long num_target,
                      long num_nontarget, const DcfParams& params);

DcfResult min_dcf(std::span<const LabeledScore> scores, const DcfParams& params = {});

}  // namespace spk::backend
