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

#include <spdlog/spdlog.h>

#include "cli_common.h"
#include "spk/embed/tdnn.h"
#include "spk/error.h"
#include "spk/feat/pipeline.h"
#include "spk/loss/head.h"

namespace spk::cli {

namespace {

// Schedule defaults relative to the run length when T is not configured.
loss::SchedulerConfig schedule_for(const Config& cfg, long total_steps) {
  Config c = cfg;
  if (!c.contains("T")) {
    const long T = std::max(1L, total_steps);
    c.set("T", std::to_string(T));
    if (!c.contains("T_warm")) c.set("T_warm", std::to_string(T / 10));
    if (!c.contains("T1")) c.set("T1", std::to_string(T / 5));
    if (!c.contains("T2")) c.set("T2", std::to_string(T / 2));
  }
  return loss::SchedulerConfig::from(c);
}

struct FitHead {
  std::string embeddings;
  std::string utt2spk;
  std::string spk2id;
  std::string init;
  std::string out;
  bool lmf = false;

  void run(const GlobalOptions& g) const {
    const Config cfg = load_config(g);
    const auto embs = embed::load_embeddings(embeddings);
    if (embs.empty()) throw DataError(embeddings + ": no embeddings");
    const auto spk_of = load_pairs(utt2spk);
    std::vector<std::string> speakers;
    for (const auto& e : embs) {
      const auto it = spk_of.find(e.key);
      if (it == spk_of.end()) throw DataError("no speaker for utterance " + e.key);
      speakers.push_back(it->second);
    }
    const auto table = spk2id.empty() ? feat::SpeakerTable::build(speakers)
                                      : feat::SpeakerTable::load(spk2id);
    const auto dim = embs.front().vector.size();
    Eigen::MatrixXd X(static_cast<Eigen::Index>(embs.size()), dim);
    std::vector<int> labels;
    for (std::size_t i = 0; i < embs.size(); ++i) {
      if (embs[i].vector.size() != dim) throw DataError("embeddings differ in dimension");
      X.row(static_cast<Eigen::Index>(i)) = embs[i].vector.cast<double>().transpose();
      labels.push_back(table.id(speakers[i]));
    }

    Config loss_cfg = cfg;
    loss_cfg.set("num_classes", std::to_string(table.size()));
    if (cfg.contains("embed_dim") && cfg.get_int("embed_dim", 0) != dim) {
      throw UsageError("embed_dim does not match the embedding file");
    }
    loss_cfg.set("embed_dim", std::to_string(dim));
    auto loss = loss::MarginLossConfig::from(loss_cfg);

    loss::FitOptions fit;
    fit.epochs = static_cast<int>(cfg.get_int("head_epochs", fit.epochs));
    fit.batch_size = static_cast<int>(cfg.get_int("head_batch_size", fit.batch_size));
    fit.seed = g.seed;
    auto sched = schedule_for(cfg, loss::steps_per_epoch(X.rows(), fit.batch_size) * fit.epochs);
    if (lmf) {
      const auto ft = loss::lmf_config(sched, loss);
      sched = ft.sched;
      loss = ft.loss;
      spdlog::info("large-margin fine-tuning: margin {}, chunk_frames {}", ft.loss.margin,
                   ft.chunk_frames);
    }
    std::optional<Eigen::MatrixXd> start;
    if (!init.empty()) start = loss::HeadParams::load(init).W;

    const auto result = loss::fit_head(X, labels, loss, sched, fit, start);
    for (std::size_t e = 0; e < result.trace.size(); ++e) {
      const auto& s = result.trace[e];
      std::cout << "epoch " << e << " loss " << fixed(s.loss, 6) << " accuracy "
                << fixed(s.accuracy, 6) << " margin " << fixed(s.margin, 6) << " lr "
                << fixed(s.lr, 6) << '\n';
    }
    result.head.save(out);
  }
};

struct ScheduleDump {
  long every = 1;

  void run(const GlobalOptions& g) const {
    const Config cfg = load_config(g);
    const auto sched = loss::SchedulerConfig::from(cfg);
    if (every < 1) throw UsageError("--every must be >= 1");
    for (long t = 0; t < sched.T; t += every) {
      std::cout << t << ' ' << fixed(loss::lr_schedule(t, sched), 6) << ' '
                << fixed(loss::margin_schedule(t, sched), 6) << '\n';
    }
  }
};

}  // namespace

void register_train_commands(CLI::App& app, GlobalOptions& g, std::map<CLI::App*, Handler>& out) {
  {
    auto opts = std::make_shared<FitHead>();
    auto* sub = app.add_subcommand(
        "fit-head", "Train a margin-softmax classification head on fixed embeddings");
    sub->add_option("--embeddings", opts->embeddings, "Embedding text file")->required();
    sub->add_option("--utt2spk", opts->utt2spk, "`utt speaker` per line")->required();
    sub->add_option("--spk2id", opts->spk2id, "Speaker table; first-seen order if absent");
    sub->add_option("--init", opts->init, "Start from this head (WSTN)");
    sub->add_option("--out", opts->out, "Output head (WSTN, tensor head.weight)")->required();
    sub->add_flag("--lmf", opts->lmf, "Large-margin fine-tuning: margin 0.5 from step 0");
    sub->footer(keys_footer({training_keys()}) +
                "\nWithout T the schedule spans the run: T = steps, T_warm = T/10, T1 = T/5, "
                "T2 = T/2.");
    out[sub] = [opts, &g] { opts->run(g); };
  }
  {
    auto opts = std::make_shared<ScheduleDump>();
    auto* sub = app.add_subcommand("schedule-dump", "Print `t lr margin` for every step");
    sub->add_option("--every", opts->every, "Print every n-th step")->capture_default_str();
    sub->footer(keys_footer({std::vector<std::string_view>(
        loss::SchedulerConfig::keys().begin(), loss::SchedulerConfig::keys().end())}));
    out[sub] = [opts, &g] { opts->run(g); };
  }
}

}  // namespace spk::cli
