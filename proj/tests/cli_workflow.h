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

// A small synthetic workspace and the full CLI workflow over it. Used by the
// CLI tests and by the determinism acceptance check.

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "spk/random.h"
#include "spk/uio/shard.h"
#include "spk/wav.h"

namespace spk::testing {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (const char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

// Runs the spk binary in `cwd` with a shell-syntax argument string.
inline CliResult run_spk(const std::filesystem::path& cwd, const std::string& args) {
  const auto out = cwd / ".stdout";
  const auto err = cwd / ".stderr";
  const std::string cmd = "cd " + shell_quote(cwd.string()) + " && " + shell_quote(SPK_CLI_PATH) +
                          " " + args + " > " + shell_quote(out.string()) + " 2> " +
                          shell_quote(err.string());
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  std::filesystem::remove(out);
  std::filesystem::remove(err);
  return r;
}

inline constexpr int kWorkflowSpeakers = 8;
inline constexpr int kWorkflowUtts = 4;

// Voiced-like audio: a speaker-specific harmonic stack with vibrato plus
// noise.
inline std::vector<float> speaker_audio(int speaker, double seconds, int rate, std::uint64_t seed) {
  auto rng = make_rng(seed, 0);
  std::normal_distribution<double> g(0.0, 0.01);
  const double f0 = 90.0 + 27.0 * speaker;
  const auto n = static_cast<std::size_t>(seconds * rate);
  std::vector<float> w(n);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    phase += 2.0 * M_PI * f0 * (1.0 + 0.02 * std::sin(2.0 * M_PI * 3.0 * t)) / rate;
    double v = 0.0;
    for (int h = 1; h <= 8; ++h) {
      if (h * f0 < 0.45 * rate) v += std::sin(h * phase) * (1.0 + ((speaker + h) % 3)) / (h * 6.0);
    }
    w[i] = static_cast<float>(0.3 * v + g(rng));
  }
  return w;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

// Writes audio, lists, trials, maps and a small-model config into `dir`.
inline void write_workspace(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "wav");
  std::vector<uio::DataListEntry> entries;
  std::ostringstream utt2spk;
  std::vector<std::pair<std::string, int>> utts;
  for (int s = 0; s < kWorkflowSpeakers; ++s) {
    for (int u = 0; u < kWorkflowUtts; ++u) {
      const std::string key = "s" + std::to_string(s) + "_u" + std::to_string(u);
      const int rate = (u % 2) ? 8000 : 16000;
      const auto wave = speaker_audio(s, 1.2 + 0.3 * u, rate, 100 * s + u);
      write_wav(dir / "wav" / (key + ".wav"), float_to_pcm(wave), rate);
      entries.push_back({key, "wav/" + key + ".wav", "spk" + std::to_string(s)});
      utt2spk << key << " spk" << s << '\n';
      utts.emplace_back(key, s);
    }
  }
  uio::save_data_list(dir / "data.list", entries);
  write_text(dir / "utt2spk", utt2spk.str());
  std::ostringstream trials;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    for (std::size_t j = i + 1; j < utts.size(); ++j) {
      trials << utts[i].first << ' ' << utts[j].first << ' '
             << (utts[i].second == utts[j].second ? "target" : "nontarget") << '\n';
    }
  }
  write_text(dir / "trials", trials.str());
  std::ostringstream spk2utt;
  for (int s = 0; s < kWorkflowSpeakers; ++s) {
    spk2utt << "s" << s << "_u0 s" << s << "_u0 s" << s << "_u1\n";
  }
  write_text(dir / "spk2utt", spk2utt.str());

  auto rng = make_rng(7, 0);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<float> noise(16000 * 3);
  for (auto& v : noise) v = static_cast<float>(g(rng));
  write_wav(dir / "wav" / "noise.wav", float_to_pcm(noise), 16000);
  std::vector<float> rir(2000, 0.f);
  for (std::size_t i = 0; i < rir.size(); ++i) rir[i] = static_cast<float>(std::exp(-i / 300.0) * g(rng));
  rir[0] = 0.9f;
  write_wav(dir / "wav" / "rir.wav", float_to_pcm(rir), 16000);
  write_text(dir / "noise.map", "wav/noise.wav\tnoise\n");
  write_text(dir / "rir.map", "wav/rir.wav\trir\n");

  // Two-speaker recording: alternating turns.
  std::vector<float> rec;
  std::ostringstream rttm;
  const double turns[][2] = {{0, 3.0}, {1, 2.5}, {0, 2.0}, {1, 3.5}, {0, 2.5}};
  double t = 0.0;
  for (const auto& turn : turns) {
    const auto piece = speaker_audio(static_cast<int>(turn[0]), turn[1], 16000, 900 + rec.size());
    rec.insert(rec.end(), piece.begin(), piece.end());
    rttm << "SPEAKER rec1 1 " << t << ' ' << turn[1] << " <NA> <NA> S" << turn[0] << " <NA> <NA>\n";
    t += turn[1];
  }
  write_wav(dir / "wav" / "rec1.wav", float_to_pcm(rec), 16000);
  write_text(dir / "ref.rttm", rttm.str());
  write_text(dir / "rec.list", "rec1 wav/rec1.wav\n");
  write_text(dir / "rec.sad", "rec1 0.0 6.0\nrec1 6.2 13.5\n");

  write_text(dir / "model.conf",
             "# small embedder for tests\n"
             "tdnn_layers = 32:-2,-1,0,1,2:1;32:-2,0,2:1;64:0:1\n"
             "embed_dim = 8\n"
             "pooling = statistics\n"
             "batch_size = 4\n"
             "shuffle_buffer = 8\n"
             "chunk_frames = 100\n"
             "head_epochs = 4\n"
             "head_batch_size = 8\n"
             "plda_iters = 5\n"
             "asnorm_top_n = 5\n"
             "shard_size = 10\n");
}

struct WorkflowStep {
  std::string subcommand;
  std::string args;
  std::vector<std::string> outputs;  // files the step writes
};

inline std::vector<WorkflowStep> workflow_steps() {
  const std::string c = "--config model.conf ";
  return {
      {"init-weights", c + "init-weights --out weights.wstn", {"weights.wstn"}},
      {"make-shards", c + "make-shards --data-list data.list --out-dir shards",
       {"shards/shards.list", "shards/shard_000000.tar", "shards/shard_000001.tar",
        "shards/shard_000002.tar", "shards/shard_000003.tar"}},
      {"pipeline-dump",
       c + "pipeline-dump --shards shards/shards.list --save-spk2id spk2id --noise noise.map "
           "--rir rir.map --max-batches 3 --out batches.wstn",
       {"spk2id", "batches.wstn"}},
      {"extract", c + "--workers 2 extract --shards shards/shards.list --weights weights.wstn --out emb.txt",
       {"emb.txt"}},
      {"extract", c + "extract --data-list data.list --weights weights.wstn --out emb_raw.txt",
       {"emb_raw.txt"}},
      {"fit-head", c + "fit-head --embeddings emb.txt --utt2spk utt2spk --spk2id spk2id --out head.wstn",
       {"head.wstn"}},
      {"fit-head",
       c + "fit-head --lmf --embeddings emb.txt --utt2spk utt2spk --spk2id spk2id --init head.wstn "
           "--out head_lmf.wstn",
       {"head_lmf.wstn"}},
      {"schedule-dump", c + "--set T=300 --set T_warm=30 --set T1=60 --set T2=150 schedule-dump --every 7", {}},
      {"score-cosine", c + "--workers 3 score-cosine --embeddings emb.txt --trials trials --out cosine.scores",
       {"cosine.scores"}},
      {"score-cosine",
       c + "score-cosine --embeddings emb.txt --trials trials --enroll spk2utt --out cosine_enroll.scores",
       {"cosine_enroll.scores"}},
      {"train-plda", c + "train-plda --embeddings emb.txt --utt2spk utt2spk --out plda.wstn", {"plda.wstn"}},
      {"score-plda",
       c + "score-plda --model plda.wstn --embeddings emb.txt --trials trials --out plda.scores",
       {"plda.scores"}},
      {"asnorm",
       c + "--workers 2 asnorm --scores cosine.scores --embeddings emb.txt --cohort emb_raw.txt "
           "--out asnorm.scores",
       {"asnorm.scores"}},
      {"asnorm",
       c + "asnorm --method plda --model plda.wstn --scores plda.scores --embeddings emb.txt "
           "--cohort emb_raw.txt --out asnorm_plda.scores",
       {"asnorm_plda.scores"}},
      {"metrics", c + "metrics --trials trials --scores cosine.scores", {}},
      {"diarize",
       c + "diarize --wav-list rec.list --oracle-rttm ref.rttm --weights weights.wstn --out hyp.rttm",
       {"hyp.rttm"}},
      {"diarize",
       c + "--set num_speakers=2 diarize --wav-list rec.list --sad rec.sad --weights weights.wstn "
           "--out hyp_sad.rttm",
       {"hyp_sad.rttm"}},
      {"der", c + "der --ref ref.rttm --hyp hyp.rttm --collar 0", {}},
  };
}

struct StepOutcome {
  WorkflowStep step;
  CliResult result;
  std::vector<std::string> files;  // contents of step.outputs, "" if missing
};

inline std::vector<StepOutcome> run_workflow(const std::filesystem::path& dir, std::uint64_t seed) {
  write_workspace(dir);
  std::vector<StepOutcome> out;
  for (const auto& step : workflow_steps()) {
    StepOutcome o{step, run_spk(dir, "--seed " + std::to_string(seed) + " " + step.args), {}};
    for (const auto& f : step.outputs) {
      o.files.push_back(std::filesystem::exists(dir / f) ? read_file(dir / f) : std::string());
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace spk::testing
