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

// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls the code it is used to check, apart
// from the function under test itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "spk/backend/metrics.h"
#include "spk/backend/plda.h"
#include "spk/diar/segments.h"
#include "spk/loss/margin.h"
#include "spk/loss/scheduler.h"
#include "spk/random.h"

namespace spk::oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

// Learning rate evaluated with 50 significant digits.
inline Big lr_exact(long t, const loss::SchedulerConfig& c) {
  const Big tt = t;
  const Big g = (c.T_warm > 0 && t < c.T_warm) ? tt / Big(c.T_warm) : Big(1);
  const Big h = Big(c.eta0) * exp((tt / Big(c.T)) * log(Big(c.etaT) / Big(c.eta0)));
  return g * h;
}

// Margin schedule written out branch by branch.
inline double margin_exact(long t, const loss::SchedulerConfig& c) {
  if (t < c.T1) return 0.0;
  if (t >= c.T2) return c.M;
  const Big u = Big(t - c.T1) / Big(c.T2 - c.T1);
  const Big m = c.ramp == loss::Ramp::kLinear
                    ? Big(c.M) * u
                    : Big(c.M) * log(Big(1) + (exp(Big(1)) - Big(1)) * u);
  return static_cast<double>(m);
}

struct GradCheck {
  double rel_x = 0.0;
  double rel_w = 0.0;
};

// Central finite differences of the loss against loss_and_grad.
inline GradCheck finite_difference(const Eigen::VectorXd& x, int label, const Eigen::MatrixXd& W,
                                   const loss::MarginLossConfig& cfg, double margin,
                                   double h = 1e-4) {
  const auto analytic = loss::loss_and_grad(x, label, W, cfg, margin);
  auto f = [&](const Eigen::VectorXd& xx, const Eigen::MatrixXd& ww) {
    return loss::loss_and_grad(xx, label, ww, cfg, margin).loss;
  };
  Eigen::VectorXd gx(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd p = x;
    Eigen::VectorXd m = x;
    p[i] += h;
    m[i] -= h;
    gx[i] = (f(p, W) - f(m, W)) / (2 * h);
  }
  Eigen::MatrixXd gw(W.rows(), W.cols());
  for (Eigen::Index r = 0; r < W.rows(); ++r) {
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
      Eigen::MatrixXd p = W;
      Eigen::MatrixXd m = W;
      p(r, c) += h;
      m(r, c) -= h;
      gw(r, c) = (f(x, p) - f(x, m)) / (2 * h);
    }
  }
  auto rel = [](double diff, double a, double b) {
    const double scale = std::max({a, b, 1e-12});
    return diff / scale;
  };
  return {rel((analytic.grad_x - gx).norm(), analytic.grad_x.norm(), gx.norm()),
          rel((analytic.grad_w - gw).norm(), analytic.grad_w.norm(), gw.norm())};
}

// Exact rational a / b with b > 0.
struct Ratio {
  __int128 num = 0;
  __int128 den = 1;
  bool operator<(const Ratio& o) const { return num * o.den < o.num * den; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct Counts {
  long misses = 0;
  long false_alarms = 0;
};

// Every threshold a detector can realize: accept when score >= theta, with
// theta at each distinct score and above the maximum.
inline std::vector<Counts> all_thresholds(const std::vector<backend::LabeledScore>& s) {
  std::set<double> thetas;
  for (const auto& x : s) thetas.insert(x.score);
  thetas.insert(std::numeric_limits<double>::infinity());
  std::vector<Counts> out;
  for (const double theta : thetas) {
    Counts c;
    for (const auto& x : s) {
      const bool accept = x.score >= theta;
      if (x.target && !accept) ++c.misses;
      if (!x.target && accept) ++c.false_alarms;
    }
    out.push_back(c);
  }
  return out;
}

// EER as the lowest point where any chord between two achievable operating
// points (or a single point) meets P_miss = P_fa. That is the crossing of the
// lower convex hull of the ROC.
inline double eer_exhaustive(const std::vector<backend::LabeledScore>& s) {
  long nt = 0;
  long nn = 0;
  for (const auto& x : s) (x.target ? nt : nn) += 1;
  const auto pts = all_thresholds(s);
  // d > 0 when P_fa > P_miss, scaled by nt * nn.
  auto d = [&](const Counts& c) {
    return static_cast<__int128>(c.false_alarms) * nt - static_cast<__int128>(c.misses) * nn;
  };
  Ratio best{1, 1};
  for (const auto& p : pts) {
    if (d(p) == 0) best = std::min(best, Ratio{p.false_alarms, nn});
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const auto& a = pts[i];
      const auto& b = pts[j];
      if (!(d(a) < 0 && d(b) > 0)) continue;
      // Solve fa/nn = miss/nt along a + s (b - a).
      __int128 num = static_cast<__int128>(a.false_alarms) * b.misses -
                     static_cast<__int128>(b.false_alarms) * a.misses;
      __int128 den = static_cast<__int128>(b.misses - a.misses) * nn -
                     static_cast<__int128>(b.false_alarms - a.false_alarms) * nt;
      if (den < 0) {
        num = -num;
        den = -den;
      }
      best = std::min(best, Ratio{num, den});
    }
  }
  return best.value();
}

inline double min_dcf_exhaustive(const std::vector<backend::LabeledScore>& s,
                                 const backend::DcfParams& p) {
  long nt = 0;
  long nn = 0;
  for (const auto& x : s) (x.target ? nt : nn) += 1;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : all_thresholds(s)) {
    const double p_miss = static_cast<double>(c.misses) / static_cast<double>(nt);
    const double p_fa = static_cast<double>(c.false_alarms) / static_cast<double>(nn);
    const double cost = p.c_miss * p_miss * p.p_target + p.c_fa * p_fa * (1.0 - p.p_target);
    best = std::min(best, cost / std::min(p.c_miss * p.p_target, p.c_fa * (1.0 - p.p_target)));
  }
  return best;
}

inline std::vector<backend::LabeledScore> random_trials(std::mt19937_64& rng, int n,
                                                        double separation, bool coarse) {
  std::vector<backend::LabeledScore> s;
  std::bernoulli_distribution is_target(0.3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> level(0, 9);
  for (int i = 0; i < n || s.empty(); ++i) {
    const bool t = is_target(rng);
    // Coarse scores force many ties.
    const double v = coarse ? level(rng) + (t ? 2 : 0) : g(rng) + (t ? separation : 0.0);
    s.push_back({v, t});
  }
  if (std::none_of(s.begin(), s.end(), [](const auto& x) { return x.target; })) s[0].target = true;
  if (std::all_of(s.begin(), s.end(), [](const auto& x) { return x.target; })) s[0].target = false;
  return s;
}

struct GridDer {
  double miss = 0.0;
  double fa = 0.0;
  double sc = 0.0;
  double der = 0.0;
};

// DER on a 10 ms grid with collar 0, trying every injective mapping of
// hypothesis speakers to reference speakers. Segment times must be multiples
// of 10 ms; one recording.
inline GridDer der_grid_bruteforce(const std::vector<diar::LabeledSegment>& ref,
                                   const std::vector<diar::LabeledSegment>& hyp) {
  auto ticks = [](double t) { return static_cast<long>(std::llround(t * 100.0)); };
  long end = 0;
  for (const auto& s : ref) end = std::max(end, ticks(s.end));
  for (const auto& s : hyp) end = std::max(end, ticks(s.end));
  std::vector<std::string> ref_names;
  std::vector<std::string> hyp_names;
  for (const auto& s : ref) {
    if (std::find(ref_names.begin(), ref_names.end(), s.speaker) == ref_names.end()) ref_names.push_back(s.speaker);
  }
  for (const auto& s : hyp) {
    if (std::find(hyp_names.begin(), hyp_names.end(), s.speaker) == hyp_names.end()) hyp_names.push_back(s.speaker);
  }
  auto active = [&](const std::vector<diar::LabeledSegment>& segs, const std::vector<std::string>& names) {
    std::vector<std::vector<char>> a(names.size(), std::vector<char>(static_cast<std::size_t>(end), 0));
    for (const auto& s : segs) {
      const auto k = static_cast<std::size_t>(std::find(names.begin(), names.end(), s.speaker) - names.begin());
      for (long t = ticks(s.start); t < ticks(s.end); ++t) a[k][static_cast<std::size_t>(t)] = 1;
    }
    return a;
  };
  const auto ra = active(ref, ref_names);
  const auto ha = active(hyp, hyp_names);
  // Hypothesis speaker h maps to perm[h] when perm[h] < #ref, else unmapped.
  const std::size_t slots = std::max(ref_names.size(), hyp_names.size());
  std::vector<std::size_t> perm(slots);
  std::iota(perm.begin(), perm.end(), 0);
  long best_correct = -1;
  long total_ref = 0;
  long miss = 0;
  long fa = 0;
  long overlap_pairs = 0;
  for (std::size_t t = 0; t < static_cast<std::size_t>(end); ++t) {
    long nr = 0;
    long nh = 0;
    for (const auto& r : ra) nr += r[t];
    for (const auto& h : ha) nh += h[t];
    total_ref += nr;
    miss += std::max(0L, nr - nh);
    fa += std::max(0L, nh - nr);
    overlap_pairs += std::min(nr, nh);
  }
  do {
    long correct = 0;
    for (std::size_t h = 0; h < hyp_names.size(); ++h) {
      if (perm[h] >= ref_names.size()) continue;
      for (std::size_t t = 0; t < static_cast<std::size_t>(end); ++t) {
        correct += ha[h][t] && ra[perm[h]][t];
      }
    }
    best_correct = std::max(best_correct, correct);
  } while (std::next_permutation(perm.begin(), perm.end()));
  GridDer d;
  const double total = static_cast<double>(total_ref);
  d.miss = miss / total;
  d.fa = fa / total;
  d.sc = (overlap_pairs - best_correct) / total;
  d.der = (miss + fa + overlap_pairs - best_correct) / total;
  return d;
}

// Speakers with Gaussian class means (unit spread) and isotropic within-class
// noise of `within` times that spread.
struct SpeakerData {
  Eigen::MatrixXd X;
  std::vector<int> labels;
  Eigen::MatrixXd means;
};

inline SpeakerData synthetic_speakers(int speakers, int per_speaker, int dim, double within,
                                      std::uint64_t seed) {
  auto rng = make_rng(seed, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  SpeakerData d;
  d.means.resize(speakers, dim);
  for (Eigen::Index i = 0; i < d.means.size(); ++i) d.means.data()[i] = g(rng);
  d.X.resize(speakers * per_speaker, dim);
  for (int s = 0; s < speakers; ++s) {
    for (int u = 0; u < per_speaker; ++u) {
      const int row = s * per_speaker + u;
      for (int c = 0; c < dim; ++c) d.X(row, c) = d.means(s, c) + within * g(rng);
      d.labels.push_back(s);
    }
  }
  return d;
}

// A planted recording: reference turns on the 0.375 + 0.75 k grid, the
// default 1.5 s / 0.75 s windows over the whole recording, and one
// embedding per window drawn around its centre speaker's mean.
struct PlantedRecording {
  std::vector<diar::LabeledSegment> reference;
  std::vector<diar::SpeechSegment> windows;
  Eigen::MatrixXd embeddings;
};

inline PlantedRecording planted_recording(int speakers, std::uint64_t seed, int turns = 12) {
  auto rng = make_rng(seed, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> turn_len(3, 8);  // in 0.75 s steps
  const int dim = 32;
  Eigen::MatrixXd means(speakers, dim);
  for (Eigen::Index i = 0; i < means.size(); ++i) means.data()[i] = g(rng);
  PlantedRecording r;
  double t = 0.0;
  for (int k = 0; k < turns; ++k) {
    const double end = k == 0 ? 0.375 + 0.75 * turn_len(rng) : t + 0.75 * turn_len(rng);
    r.reference.push_back({"rec", t, end, "s" + std::to_string(k % speakers)});
    t = end;
  }
  // Final turn closes on a window edge: the last window ends exactly here.
  r.reference.back().end = std::ceil((r.reference.back().end - 1.5) / 0.75) * 0.75 + 1.5;
  const std::vector<diar::SpeechSegment> whole{{"rec", 0.0, r.reference.back().end}};
  r.windows = diar::subsegment(whole);
  r.embeddings.resize(static_cast<Eigen::Index>(r.windows.size()), dim);
  for (std::size_t i = 0; i < r.windows.size(); ++i) {
    const double centre = 0.5 * (r.windows[i].start + r.windows[i].end);
    int who = 0;
    for (const auto& turn : r.reference) {
      if (centre >= turn.start && centre < turn.end) who = std::stoi(turn.speaker.substr(1));
    }
    for (int c = 0; c < dim; ++c) {
      r.embeddings(static_cast<Eigen::Index>(i), c) = means(who, c) + 0.1 * g(rng);
    }
  }
  return r;
}

// Two-covariance data from a known model: Sigma_b = A A' / D and
// Sigma_w = B B' / (4 D) with Gaussian A, B. `offsets` holds the drawn
// speaker offsets y so tests can report the sampling floor of any estimator.
struct PldaData {
  backend::PldaModel truth;
  backend::SpeakerGroups groups;
  Eigen::MatrixXd offsets;
};

inline PldaData plda_synthetic(int speakers, int utts, int dim, std::uint64_t seed) {
  auto rng = make_rng(seed, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  auto gaussian = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return m;
  };
  const Eigen::MatrixXd A = gaussian(dim, dim);
  const Eigen::MatrixXd B = gaussian(dim, dim);
  PldaData d;
  d.truth.sigma_b = A * A.transpose() / dim;
  d.truth.sigma_w = 0.25 * B * B.transpose() / dim;
  d.truth.mu = gaussian(dim, 1);
  const Eigen::MatrixXd lb = Eigen::LLT<Eigen::MatrixXd>(d.truth.sigma_b).matrixL();
  const Eigen::MatrixXd lw = Eigen::LLT<Eigen::MatrixXd>(d.truth.sigma_w).matrixL();
  d.offsets.resize(speakers, dim);
  for (int s = 0; s < speakers; ++s) {
    const Eigen::VectorXd y = lb * gaussian(dim, 1);
    d.offsets.row(s) = y.transpose();
    Eigen::MatrixXd X(utts, dim);
    for (int u = 0; u < utts; ++u) X.row(u) = (d.truth.mu + y + lw * gaussian(dim, 1)).transpose();
    d.groups.push_back(std::move(X));
  }
  return d;
}

inline double frobenius_rel(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth) {
  return (estimate - truth).norm() / truth.norm();
}

// Relative error of the sample covariance of the drawn offsets: what an
// estimator that saw y directly would achieve.
inline double sigma_b_sampling_floor(const PldaData& d) {
  const Eigen::MatrixXd c = d.offsets.rowwise() - d.offsets.colwise().mean();
  return frobenius_rel(c.transpose() * c / static_cast<double>(d.offsets.rows()), d.truth.sigma_b);
}

}  // namespace spk::oracle
