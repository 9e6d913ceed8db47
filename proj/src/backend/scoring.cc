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

#include "spk/backend/scoring.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "spk/embed/tdnn.h"
#include "spk/error.h"

namespace spk::backend {

double cosine_score(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw DataError("cosine of vectors with different dimensions");
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0.0 && nb > 0.0)) throw DataError("cosine of a zero embedding");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

Eigen::VectorXd enroll_average(std::span<const Eigen::VectorXd> sessions) {
  if (sessions.empty()) throw DataError("no enrollment sessions");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(sessions.front().size());
  for (const auto& s : sessions) {
    if (s.size() != mean.size()) throw DataError("enrollment sessions differ in dimension");
    mean += s;
  }
  mean /= static_cast<double>(sessions.size());
  const double n = mean.norm();
  if (!(n > 1e-12)) throw DataError("enrollment mean is zero; cannot normalize");
  return mean / n;
}

namespace {

TrialLabel parse_label(std::string_view s, std::string_view origin, int line) {
  if (s == "target") return TrialLabel::kTarget;
  if (s == "nontarget") return TrialLabel::kNontarget;
  if (s == "unknown") return TrialLabel::kUnknown;
  throw FormatError(std::string(origin) + ":" + std::to_string(line) + ": bad trial label '" +
                    std::string(s) + "'");
}

std::ifstream open_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

}  // namespace

std::vector<Trial> read_trials(std::istream& in, std::string_view origin) {
  std::vector<Trial> trials;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream ss(line);
    Trial t;
    std::string label, extra;
    if (!(ss >> t.enroll)) continue;
    if (!(ss >> t.test)) {
      throw FormatError(std::string(origin) + ":" + std::to_string(n) + ": missing test key");
    }
    if (ss >> label) t.label = parse_label(label, origin, n);
    if (ss >> extra) {
      throw FormatError(std::string(origin) + ":" + std::to_string(n) + ": trailing fields");
    }
    trials.push_back(std::move(t));
  }
  return trials;
}

std::vector<Trial> load_trials(const std::string& path) {
  auto in = open_text(path);
  return read_trials(in, path);
}

void write_scores(std::ostream& out, std::span<const ScoredTrial> scores) {
  char buf[64];
  for (const auto& s : scores) {
    std::snprintf(buf, sizeof(buf), "%.6f", s.score);
    out << s.trial.enroll << ' ' << s.trial.test << ' ' << buf << '\n';
  }
}

std::vector<ScoredTrial> read_scores(std::istream& in, std::string_view origin) {
  std::vector<ScoredTrial> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream ss(line);
    ScoredTrial s;
    std::string score, label;
    if (!(ss >> s.trial.enroll)) continue;
    if (!(ss >> s.trial.test >> score)) {
      throw FormatError(std::string(origin) + ":" + std::to_string(n) +
                        ": expected `enroll test score`");
    }
    try {
      std::size_t used = 0;
      s.score = std::stod(score, &used);
      if (used != score.size()) throw std::invalid_argument(score);
    } catch (const std::exception&) {
      throw FormatError(std::string(origin) + ":" + std::to_string(n) + ": bad score '" +
                        score + "'");
    }
    if (ss >> label) s.trial.label = parse_label(label, origin, n);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ScoredTrial> load_scores(const std::string& path) {
  auto in = open_text(path);
  return read_scores(in, path);
}

void attach_labels(std::vector<ScoredTrial>& scores, std::span<const Trial> trials) {
  std::map<std::pair<std::string_view, std::string_view>, TrialLabel> index;
  for (const auto& t : trials) index[{t.enroll, t.test}] = t.label;
  for (auto& s : scores) {
    const auto it = index.find({s.trial.enroll, s.trial.test});
    if (it == index.end()) {
      throw DataError("scored pair " + s.trial.enroll + " " + s.trial.test +
                      " is not in the trial list");
    }
    s.trial.label = it->second;
  }
}

std::vector<LabeledScore> labeled(std::span<const ScoredTrial> scores) {
  std::vector<LabeledScore> out;
  for (const auto& s : scores) {
    if (s.trial.label == TrialLabel::kUnknown) continue;
    out.push_back({s.score, s.trial.label == TrialLabel::kTarget});
  }
  return out;
}

EmbeddingTable load_embedding_table(const std::string& path) {
  EmbeddingTable table;
  for (const auto& e : embed::load_embeddings(path)) {
    if (!table.emplace(e.key, e.vector.cast<double>()).second) {
      throw DataError(path + ": duplicate embedding key " + e.key);
    }
  }
  return table;
}

const Eigen::VectorXd& lookup(const EmbeddingTable& table, std::string_view key) {
  const auto it = table.find(key);
  if (it == table.end()) throw DataError("no embedding for key " + std::string(key));
  return it->second;
}

CohortStats top_n_stats(std::span<const double> cohort_scores, int top_n) {
  if (top_n < 1) throw UsageError("asnorm top_n must be >= 1");
  if (static_cast<std::size_t>(top_n) > cohort_scores.size()) {
    throw UsageError("asnorm top_n " + std::to_string(top_n) + " exceeds cohort size " +
                     std::to_string(cohort_scores.size()));
  }
  std::vector<double> top(cohort_scores.begin(), cohort_scores.end());
  std::partial_sort(top.begin(), top.begin() + top_n, top.end(), std::greater<>());
  top.resize(static_cast<std::size_t>(top_n));
  std::sort(top.begin(), top.end());
  double mean = 0.0;
  for (double s : top) mean += s;
  mean /= top_n;
  double var = 0.0;
  for (double s : top) var += (s - mean) * (s - mean);
  var /= top_n;
  CohortStats st{mean, std::sqrt(var), false};
  if (!(st.std >= kAsNormStdFloor)) {
    st.std = kAsNormStdFloor;
    st.degenerate = true;
  }
  return st;
}

double asnorm_score(double raw, const CohortStats& enroll, const CohortStats& test) {
  return 0.5 * ((raw - enroll.mean) / enroll.std + (raw - test.mean) / test.std);
}

std::vector<ScoredTrial> asnorm(std::span<const ScoredTrial> raw,
                                const std::map<std::string, std::vector<double>, std::less<>>& cohort,
                                int top_n) {
  std::map<std::string_view, CohortStats> cache;
  long degenerate = 0;
  auto stats = [&](std::string_view key) -> const CohortStats& {
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const auto c = cohort.find(key);
    if (c == cohort.end()) throw DataError("no cohort scores for key " + std::string(key));
    const auto st = top_n_stats(c->second, top_n);
    if (st.degenerate) ++degenerate;
    return cache.emplace(key, st).first->second;
  };
  std::vector<ScoredTrial> out;
  out.reserve(raw.size());
  for (const auto& s : raw) {
    ScoredTrial n = s;
    n.score = asnorm_score(s.score, stats(s.trial.enroll), stats(s.trial.test));
    out.push_back(std::move(n));
  }
  if (degenerate > 0) {
    spdlog::warn("asnorm: {} cohort(s) have near-constant top-{} scores; std floored at {}",
                 degenerate, top_n, kAsNormStdFloor);
  }
  return out;
}

}  // namespace spk::backend
