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

#include "spk/diar/der.h"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spk/diar/cluster.h"
#include "spk/error.h"

namespace spk::diar {

namespace {

struct Interval {
  double start;
  double end;
  std::vector<int> ref;  // speaker indices active throughout
  std::vector<int> hyp;
};

struct Totals {
  double scored = 0.0;
  double miss = 0.0;
  double fa = 0.0;
  double sc = 0.0;
};

std::vector<int> active(const std::vector<LabeledSegment>& segs,
                        const std::map<std::string, int>& ids, double a, double b) {
  std::set<int> out;
  for (const auto& s : segs) {
    if (s.start <= a && s.end >= b) out.insert(ids.at(s.speaker));
  }
  return {out.begin(), out.end()};
}

void score_recording(const std::vector<LabeledSegment>& ref,
                     const std::vector<LabeledSegment>& hyp, double collar, Totals& totals) {
  std::map<std::string, int> ref_ids, hyp_ids;
  for (const auto& s : ref) ref_ids.emplace(s.speaker, static_cast<int>(ref_ids.size()));
  for (const auto& s : hyp) hyp_ids.emplace(s.speaker, static_cast<int>(hyp_ids.size()));

  std::vector<std::pair<double, double>> no_score;
  std::vector<double> cuts;
  for (const auto& s : ref) {
    cuts.push_back(s.start);
    cuts.push_back(s.end);
    if (collar > 0.0) {
      for (double b : {s.start, s.end}) {
        no_score.emplace_back(b - collar, b + collar);
        cuts.push_back(b - collar);
        cuts.push_back(b + collar);
      }
    }
  }
  for (const auto& s : hyp) {
    cuts.push_back(s.start);
    cuts.push_back(s.end);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Interval> intervals;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    const bool excluded = std::any_of(no_score.begin(), no_score.end(), [&](const auto& z) {
      return z.first <= a && z.second >= b;
    });
    if (excluded) continue;
    Interval iv{a, b, active(ref, ref_ids, a, b), active(hyp, hyp_ids, a, b)};
    if (iv.ref.empty() && iv.hyp.empty()) continue;
    intervals.push_back(std::move(iv));
  }

  Eigen::MatrixXd overlap =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ref_ids.size()),
                            static_cast<Eigen::Index>(hyp_ids.size()));
  for (const auto& iv : intervals) {
    for (int r : iv.ref) {
      for (int h : iv.hyp) overlap(r, h) += iv.end - iv.start;
    }
  }
  const auto mapping = hungarian_max(overlap);

  for (const auto& iv : intervals) {
    const double d = iv.end - iv.start;
    const auto nref = static_cast<double>(iv.ref.size());
    const auto nhyp = static_cast<double>(iv.hyp.size());
    long correct = 0;
    for (int r : iv.ref) {
      const int h = mapping[static_cast<std::size_t>(r)];
      if (h >= 0 && std::binary_search(iv.hyp.begin(), iv.hyp.end(), h)) ++correct;
    }
    totals.scored += d * nref;
    totals.miss += d * std::max(0.0, nref - nhyp);
    totals.fa += d * std::max(0.0, nhyp - nref);
    totals.sc += d * (std::min(nref, nhyp) - static_cast<double>(correct));
  }
}

}  // namespace

DerReport compute_der(std::span<const LabeledSegment> reference,
                      std::span<const LabeledSegment> hypothesis, double collar) {
  if (!(collar >= 0.0)) throw UsageError("collar must be >= 0");
  std::map<std::string, std::vector<LabeledSegment>> ref, hyp;
  for (const auto& s : reference) ref[s.recording].push_back(s);
  for (const auto& s : hypothesis) hyp[s.recording].push_back(s);
  Totals totals;
  for (const auto& [rec, segs] : ref) {
    const auto it = hyp.find(rec);
    score_recording(segs, it == hyp.end() ? std::vector<LabeledSegment>{} : it->second, collar,
                    totals);
  }
  // Recordings only in the hypothesis are all false alarm.
  for (const auto& [rec, segs] : hyp) {
    if (!ref.count(rec)) score_recording({}, segs, collar, totals);
  }
  if (!(totals.scored > 0.0)) throw DataError("reference has no scored speech");
  DerReport r;
  r.miss = totals.miss / totals.scored;
  r.fa = totals.fa / totals.scored;
  r.sc = totals.sc / totals.scored;
  r.der = r.miss + r.fa + r.sc;
  r.scored_seconds = totals.scored;
  return r;
}

}  // namespace spk::diar
