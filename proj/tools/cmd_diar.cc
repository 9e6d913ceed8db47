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

#include <cmath>
#include <iostream>
#include <memory>
#include <optional>

#include "cli_common.h"
#include "spk/diar/der.h"
#include "spk/diar/diarize.h"
#include "spk/embed/tdnn.h"
#include "spk/error.h"
#include "spk/feat/signal.h"
#include "spk/session.h"
#include "spk/wav.h"

namespace spk::cli {

namespace {

struct Diarize {
  std::string wav_list;
  std::string sad;
  std::string oracle_rttm;
  std::string weights;
  std::string out;

  void run(const GlobalOptions& g) const {
    const Config cfg = load_config(g);
    const auto dc = diar::DiarizeConfig::from(cfg);
    const auto pc = feat::PipelineConfig::from(cfg);
    const auto spec = embed::TdnnSpec::from(cfg);
    const auto w = embed::TdnnWeights::from_bundle(TensorBundle::load(weights), spec);
    if (sad.empty() == oracle_rttm.empty()) {
      throw UsageError("give exactly one of --sad or --oracle-rttm");
    }
    const auto speech = sad.empty() ? diar::speech_regions(diar::load_rttm(oracle_rttm))
                                    : diar::load_sad(sad);
    const auto wavs = load_pairs(wav_list);
    std::vector<std::string> recs;
    for (const auto& [rec, path] : wavs) recs.push_back(rec);

    std::vector<std::vector<diar::LabeledSegment>> turns(recs.size());
    parallel_for(recs.size(), g.workers, [&](std::size_t r) {
      const auto& rec = recs[r];
      std::vector<diar::SpeechSegment> regions;
      for (const auto& s : speech) {
        if (s.recording == rec) regions.push_back(s);
      }
      const auto windows = diar::subsegment(regions, dc.windows);
      if (windows.empty()) return;
      const auto audio = read_wav(wavs.find(rec)->second);
      const auto wave = feat::resample(pcm_to_float(audio.samples), audio.sample_rate,
                                       pc.target_rate);
      Eigen::MatrixXd embs(static_cast<Eigen::Index>(windows.size()), spec.embed_dim);
      for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto rate = static_cast<double>(pc.target_rate);
        const auto begin = std::min(wave.size(), static_cast<std::size_t>(
                                                     std::llround(windows[i].start * rate)));
        const auto end = std::min(wave.size(),
                                  static_cast<std::size_t>(std::llround(windows[i].end * rate)));
        if (end <= begin) {
          throw DataError(rec + ": speech region at " + fixed(windows[i].start, 3) +
                          " s lies beyond the audio");
        }
        const std::span<const float> slice(wave.data() + begin, end - begin);
        embs.row(static_cast<Eigen::Index>(i)) =
            embed_wave(slice, pc.target_rate, pc, spec, w).cast<double>().transpose();
      }
      turns[r] = diar::diarize_recording(windows, embs, dc, g.seed);
    });
    Output output(out);
    for (const auto& t : turns) diar::write_rttm(output.stream(), t);
    output.close();
  }
};

struct Der {
  std::string ref;
  std::string hyp;
  std::optional<double> collar;

  void run(const GlobalOptions& g) const {
    const Config cfg = load_config(g);
    const double c = collar ? *collar : cfg.get_double("collar", 0.25);
    const auto r = diar::compute_der(diar::load_rttm(ref), diar::load_rttm(hyp), c);
    std::cout << "MISS " << fixed(100.0 * r.miss, 2) << '\n'
              << "FA " << fixed(100.0 * r.fa, 2) << '\n'
              << "SC " << fixed(100.0 * r.sc, 2) << '\n'
              << "DER " << fixed(100.0 * r.der, 2) << '\n';
  }
};

}  // namespace

void register_diar_commands(CLI::App& app, GlobalOptions& g, std::map<CLI::App*, Handler>& out) {
  {
    auto opts = std::make_shared<Diarize>();
    auto* sub = app.add_subcommand("diarize", "Diarize recordings into RTTM");
    sub->add_option("--wav-list", opts->wav_list, "`rec path.wav` per line")->required();
    sub->add_option("--sad", opts->sad, "Speech regions `rec start end`");
    sub->add_option("--oracle-rttm", opts->oracle_rttm, "Take speech regions from this RTTM");
    sub->add_option("--weights", opts->weights, "Embedder weights (WSTN)")->required();
    sub->add_option("--out", opts->out, "Output RTTM (default stdout)");
    sub->footer(keys_footer({diarize_keys(), pipeline_keys(), model_keys()}));
    out[sub] = [opts, &g] { opts->run(g); };
  }
  {
    auto opts = std::make_shared<Der>();
    auto* sub = app.add_subcommand("der", "Diarization error rate with MISS/FA/SC breakdown");
    sub->add_option("--ref", opts->ref, "Reference RTTM")->required();
    sub->add_option("--hyp", opts->hyp, "Hypothesis RTTM")->required();
    sub->add_option("--collar", opts->collar, "Collar in seconds (overrides `collar`)");
    sub->footer(keys_footer({{"collar"}}));
    out[sub] = [opts, &g] { opts->run(g); };
  }
}

}  // namespace spk::cli
