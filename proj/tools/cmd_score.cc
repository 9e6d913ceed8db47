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

#include <iostream>
#include <memory>
#include <optional>

#include "cli_common.h"
#include "spk/backend/metrics.h"
#include "spk/backend/plda.h"
#include "spk/backend/scoring.h"
#include "spk/error.h"

namespace spk::cli {

namespace {

using backend::EmbeddingTable;

// Enrollment models: averaged sessions from --enroll, else the embedding of
// the enroll key itself.
class Enrollment {
 public:
  Enrollment(const EmbeddingTable& table, const std::string& spk2utt) : table_(table) {
    if (spk2utt.empty()) return;
    for (const auto& [model, utts] : load_lists(spk2utt)) {
      std::vector<Eigen::VectorXd> sessions;
      for (const auto& u : utts) sessions.push_back(backend::lookup(table, u));
      models_.emplace(model, backend::enroll_average(sessions));
    }
  }

  const Eigen::VectorXd& get(std::string_view key) const {
    const auto it = models_.find(key);
    return it != models_.end() ? it->second : backend::lookup(table_, key);
  }

 private:
  const EmbeddingTable& table_;
  EmbeddingTable models_;
};

using Scorer = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

Scorer make_scorer(const std::string& method, const std::string& model_path, const Config& cfg) {
  if (method == "cosine") return backend::cosine_score;
  if (method != "plda") throw UsageError("--method must be cosine or plda");
  const std::string path = model_path.empty() ? cfg.get_string("plda_model", "") : model_path;
  if (path.empty()) throw UsageError("PLDA scoring needs --model or plda_model");
  auto scorer = std::make_shared<backend::PldaScorer>(backend::PldaModel::load(path),
                                                      cfg.get_bool("plda_length_norm", true));
  return [scorer](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return scorer->score(a, b);
  };
}

std::vector<backend::ScoredTrial> score_trials(const std::vector<backend::Trial>& trials,
                                               const Enrollment& enroll,
                                               const EmbeddingTable& table, const Scorer& scorer,
                                               int workers) {
  std::vector<backend::ScoredTrial> out(trials.size());
  parallel_for(trials.size(), workers, [&](std::size_t i) {
    const auto& t = trials[i];
    out[i] = {t, scorer(enroll.get(t.enroll), backend::lookup(table, t.test))};
  });
  return out;
}

struct ScoreTrials {
  std::string method;
  std::string embeddings;
  std::string trials;
  std::string enroll;
  std::string model;
  std::string out;

  void run(const GlobalOptions& g) const {
    const Config cfg = load_config(g);
    const auto scorer = make_scorer(method, model, cfg);
    const auto table = backend::load_embedding_table(embeddings);
    const Enrollment models(table, enroll);
    const auto scores = score_trials(backend::load_trials(trials), models, table, scorer, g.workers);
    Output output(out);
    backend::write_scores(output.stream(), scores);
    output.close();
  }
};

struct TrainPlda {
  std::string embeddings;
  std::string utt2spk;
  std::string out;

  void run(const GlobalOptions& g) const {
    const Config cfg = load_config(g);
    backend::PldaOptions opts;
    opts.iters = static_cast<int>(cfg.get_int("plda_iters", opts.iters));
    opts.ridge = cfg.get_double("plda_ridge", opts.ridge);
    opts.length_norm = cfg.get_bool("plda_length_norm", opts.length_norm);
    const auto table = backend::load_embedding_table(embeddings);
    const auto spk_of = load_pairs(utt2spk);
    // Speakers in sorted order, utterances in key order: independent of
    // file order.
    std::map<std::string, std::vector<const Eigen::VectorXd*>> by_speaker;
    for (const auto& [key, vec] : table) {
      const auto it = spk_of.find(key);
      if (it == spk_of.end()) throw DataError("no speaker for utterance " + key);
      by_speaker[it->second].push_back(&vec);
    }
    backend::SpeakerGroups groups;
    for (const auto& [spk, vecs] : by_speaker) {
      Eigen::MatrixXd m(static_cast<Eigen::Index>(vecs.size()), vecs.front()->size());
      for (std::size_t i = 0; i < vecs.size(); ++i) {
        if (vecs[i]->size() != m.cols()) throw DataError("embeddings differ in dimension");
        m.row(static_cast<Eigen::Index>(i)) = vecs[i]->transpose();
      }
      groups.push_back(std::move(m));
    }
    const auto result = backend::plda_train(std::move(groups), opts);
    for (std::size_t i = 0; i < result.log_likelihood.size(); ++i) {
      std::cout << "iter " << i << " loglik " << fixed(result.log_likelihood[i], 6) << '\n';
    }
    result.model.save(out);
  }
};

struct AsNorm {
  std::string method;
  std::string scores;
  std::string embeddings;
  std::string cohort;
  std::string enroll;
  std::string model;
  std::string out;

  void run(const GlobalOptions& g) const {
    const Config cfg = load_config(g);
    const auto top_n = static_cast<int>(cfg.get_int("asnorm_top_n", 100));
    const auto scorer = make_scorer(method, model, cfg);
    const auto table = backend::load_embedding_table(embeddings);
    const auto cohort_table = backend::load_embedding_table(cohort);
    const Enrollment models(table, enroll);
    const auto raw = backend::load_scores(scores);

    // Cohort scores for each enroll model and test utterance in the list.
    std::map<std::string, const Eigen::VectorXd*, std::less<>> sides;
    for (const auto& s : raw) {
      sides.emplace(s.trial.enroll, &models.get(s.trial.enroll));
      sides.emplace(s.trial.test, &backend::lookup(table, s.trial.test));
    }
    std::vector<std::pair<std::string, const Eigen::VectorXd*>> items(sides.begin(), sides.end());
    std::vector<std::vector<double>> rows(items.size());
    parallel_for(items.size(), g.workers, [&](std::size_t i) {
      rows[i].reserve(cohort_table.size());
      for (const auto& [key, vec] : cohort_table) rows[i].push_back(scorer(*items[i].second, vec));
    });
    std::map<std::string, std::vector<double>, std::less<>> cohort_scores;
    for (std::size_t i = 0; i < items.size(); ++i) {
      cohort_scores.emplace(items[i].first, std::move(rows[i]));
    }
    const auto normalized = backend::asnorm(raw, cohort_scores, top_n);
    Output output(out);
    backend::write_scores(output.stream(), normalized);
    output.close();
  }
};

struct Metrics {
  std::string trials;
  std::string scores;

  void run(const GlobalOptions& g) const {
    const Config cfg = load_config(g);
    backend::DcfParams dcf;
    dcf.p_target = cfg.get_double("p_target", dcf.p_target);
    dcf.c_miss = cfg.get_double("c_miss", dcf.c_miss);
    dcf.c_fa = cfg.get_double("c_fa", dcf.c_fa);
    auto scored = backend::load_scores(scores);
    backend::attach_labels(scored, backend::load_trials(trials));
    const auto labeled = backend::labeled(scored);
    const auto e = backend::eer(labeled);
    const auto d = backend::min_dcf(labeled, dcf);
    std::cout << "EER " << fixed(100.0 * e.eer, 2) << '\n'
              << "minDCF " << fixed(d.min_dcf, 4) << '\n';
  }
};

void add_scoring(CLI::App* sub, ScoreTrials& opts) {
  sub->add_option("--embeddings", opts.embeddings, "Embedding text file")->required();
  sub->add_option("--trials", opts.trials, "`enroll test [label]` per line")->required();
  sub->add_option("--enroll", opts.enroll,
                  "`model utt1 utt2 ...`: enroll keys name averaged models");
  sub->add_option("--out", opts.out, "Scores file (default stdout)");
}

}  // namespace

void register_score_commands(CLI::App& app, GlobalOptions& g, std::map<CLI::App*, Handler>& out) {
  {
    auto opts = std::make_shared<ScoreTrials>();
    opts->method = "cosine";
    auto* sub = app.add_subcommand("score-cosine", "Cosine-score a trial list");
    add_scoring(sub, *opts);
    sub->footer("Config keys: none.");
    out[sub] = [opts, &g] { opts->run(g); };
  }
  {
    auto opts = std::make_shared<TrainPlda>();
    auto* sub = app.add_subcommand("train-plda", "Train a two-covariance PLDA model with EM");
    sub->add_option("--embeddings", opts->embeddings, "Embedding text file")->required();
    sub->add_option("--utt2spk", opts->utt2spk, "`utt speaker` per line")->required();
    sub->add_option("--out", opts->out, "Output model (WSTN: mu, sigma_b, sigma_w)")->required();
    sub->footer(keys_footer({{"plda_iters", "plda_ridge", "plda_length_norm"}}));
    out[sub] = [opts, &g] { opts->run(g); };
  }
  {
    auto opts = std::make_shared<ScoreTrials>();
    opts->method = "plda";
    auto* sub = app.add_subcommand("score-plda", "PLDA-score a trial list");
    add_scoring(sub, *opts);
    sub->add_option("--model", opts->model, "PLDA model (else plda_model)");
    sub->footer(keys_footer({{"plda_model", "plda_length_norm"}}));
    out[sub] = [opts, &g] { opts->run(g); };
  }
  {
    auto opts = std::make_shared<AsNorm>();
    opts->method = "cosine";
    auto* sub = app.add_subcommand("asnorm", "Adaptive symmetric score normalization");
    sub->add_option("--scores", opts->scores, "Raw scores file")->required();
    sub->add_option("--embeddings", opts->embeddings, "Embeddings of the scored keys")->required();
    sub->add_option("--cohort", opts->cohort, "Cohort embedding file")->required();
    sub->add_option("--enroll", opts->enroll, "`model utt1 utt2 ...` as used for scoring");
    sub->add_option("--method", opts->method, "Scorer used for the raw scores: cosine|plda")
        ->capture_default_str();
    sub->add_option("--model", opts->model, "PLDA model for --method plda");
    sub->add_option("--out", opts->out, "Normalized scores (default stdout)");
    sub->footer(keys_footer({{"asnorm_top_n", "plda_model", "plda_length_norm"}}));
    out[sub] = [opts, &g] { opts->run(g); };
  }
  {
    auto opts = std::make_shared<Metrics>();
    auto* sub = app.add_subcommand("metrics", "EER (%) and minDCF of scored trials");
    sub->add_option("--trials", opts->trials, "Labelled trial list")->required();
    sub->add_option("--scores", opts->scores, "Scores file")->required();
    sub->footer(keys_footer({{"p_target", "c_miss", "c_fa"}}));
    out[sub] = [opts, &g] { opts->run(g); };
  }
}

}  // namespace spk::cli
