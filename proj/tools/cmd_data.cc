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

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <optional>
#include <set>

#include <spdlog/spdlog.h>

#include "cli_common.h"
#include "spk/embed/tdnn.h"
#include "spk/error.h"
#include "spk/feat/pipeline.h"
#include "spk/feat/signal.h"
#include "spk/session.h"
#include "spk/uio/shard.h"
#include "spk/wav.h"

namespace spk::cli {

namespace {

// Records per extraction chunk; bounds memory while workers share a chunk.
constexpr std::size_t kExtractChunk = 256;

std::unique_ptr<uio::RecordSource> open_records(const std::string& data_list,
                                                const std::string& shards) {
  if (data_list.empty() == shards.empty()) {
    throw UsageError("give exactly one of --data-list or --shards");
  }
  if (!data_list.empty()) return std::make_unique<uio::RawReader>(uio::load_data_list(data_list));
  return std::make_unique<uio::ShardReader>(uio::ShardManifest::load(shards));
}

struct MakeShards {
  std::string data_list;
  std::string out_dir;

  void run(const GlobalOptions& g) const {
    const Config cfg = load_config(g);
    uio::PackOptions opts;
    const long size = cfg.get_int("shard_size", static_cast<long>(opts.shard_size));
    if (size < 1) throw UsageError("shard_size must be >= 1");
    opts.shard_size = static_cast<std::size_t>(size);
    opts.gzip = cfg.get_bool("shard_gzip", false);
    uio::RawReader reader(uio::load_data_list(data_list));
    uio::ShardPacker packer(out_dir, opts);
    while (auto rec = reader.next()) packer.add(*rec);
    const auto manifest = packer.finish();
    manifest.save(std::filesystem::path(out_dir) / "shards.list");
    for (std::size_t i = 0; i < manifest.shard_paths.size(); ++i) {
      std::cout << manifest.shard_paths[i].filename().string() << ' ' << manifest.counts[i]
                << '\n';
    }
  }
};

struct PipelineDump {
  std::string shards;
  std::string spk2id;
  std::string save_spk2id;
  std::string noise;
  std::string rir;
  std::string out;
  int max_batches = 1;

  void run(const GlobalOptions& g) const {
    const Config cfg = load_config(g);
    const auto pc = feat::PipelineConfig::from(cfg);
    const auto manifest = uio::ShardManifest::load(shards);
    feat::SpeakerTable table;
    if (!spk2id.empty()) {
      table = feat::SpeakerTable::load(spk2id);
    } else {
      std::vector<std::string> labels;
      uio::ShardReader scan(manifest);
      while (auto rec = scan.next()) labels.push_back(rec->speaker);
      table = feat::SpeakerTable::build(labels);
    }
    if (!save_spk2id.empty()) table.save(save_spk2id);
    auto noise_bank = noise.empty() ? feat::AudioBank{} : feat::AudioBank::load(noise, pc.target_rate);
    auto rir_bank = rir.empty() ? feat::AudioBank{} : feat::AudioBank::load(rir, pc.target_rate);
    feat::Pipeline pipeline(
        std::make_unique<feat::RecordStream>(std::make_unique<uio::ShardReader>(manifest)), pc,
        table, std::move(noise_bank), std::move(rir_bank), g.seed);
    std::cout << "num_classes " << pipeline.num_classes() << '\n';
    TensorBundle bundle;
    for (int b = 0; b < max_batches; ++b) {
      auto batch = pipeline.next();
      if (!batch) break;
      std::cout << "batch " << b << ' ' << batch->keys.size() << ' ' << batch->frames << ' '
                << batch->dims << '\n';
      const std::size_t per = batch->frames * batch->dims;
      for (std::size_t i = 0; i < batch->keys.size(); ++i) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t j = 0; j < per; ++j) {
          const double v = batch->feats[i * per + j];
          sum += v;
          sq += v * v;
        }
        const double mean = sum / static_cast<double>(per);
        std::cout << batch->keys[i] << ' ' << batch->labels[i] << ' ' << fixed(mean, 6) << ' '
                  << fixed(std::sqrt(std::max(0.0, sq / static_cast<double>(per) - mean * mean)), 6)
                  << '\n';
      }
      if (!out.empty()) {
        Tensor feats;
        feats.shape = {static_cast<std::uint32_t>(batch->keys.size()),
                       static_cast<std::uint32_t>(batch->frames),
                       static_cast<std::uint32_t>(batch->dims)};
        feats.data = batch->feats;
        Tensor labels;
        labels.shape = {static_cast<std::uint32_t>(batch->labels.size())};
        labels.data.assign(batch->labels.begin(), batch->labels.end());
        bundle.add("batch" + std::to_string(b) + ".feats", std::move(feats));
        bundle.add("batch" + std::to_string(b) + ".labels", std::move(labels));
      }
    }
    if (!out.empty()) bundle.save(out);
  }
};

struct Extract {
  std::string data_list;
  std::string shards;
  std::string weights;
  std::string out;

  void run(const GlobalOptions& g) const {
    const Config cfg = load_config(g);
    const auto pc = feat::PipelineConfig::from(cfg);
    const auto spec = embed::TdnnSpec::from(cfg);
    const auto w = embed::TdnnWeights::from_bundle(TensorBundle::load(weights), spec);
    auto source = open_records(data_list, shards);
    Output output(out);
    std::set<std::string> seen;
    bool done = false;
    while (!done) {
      std::vector<uio::UtteranceRecord> chunk;
      while (chunk.size() < kExtractChunk) {
        auto rec = source->next();
        if (!rec) {
          done = true;
          break;
        }
        if (!seen.insert(rec->key).second) throw DataError("duplicate utterance key " + rec->key);
        chunk.push_back(std::move(*rec));
      }
      std::vector<embed::Embedding> embs(chunk.size());
      parallel_for(chunk.size(), g.workers, [&](std::size_t i) {
        const auto wave = pcm_to_float(chunk[i].pcm);
        try {
          embs[i] = {chunk[i].key, embed_wave(wave, chunk[i].sample_rate, pc, spec, w)};
        } catch (const DataError& e) {
          throw DataError(chunk[i].key + ": " + e.what());
        }
      });
      embed::write_embeddings(output.stream(), embs);
    }
    output.close();
  }
};

struct InitWeights {
  std::string out;

  void run(const GlobalOptions& g) const {
    const Config cfg = load_config(g);
    const auto spec = embed::TdnnSpec::from(cfg);
    embed::TdnnWeights::random(spec, g.seed).to_bundle().save(out);
  }
};

}  // namespace

void register_data_commands(CLI::App& app, GlobalOptions& g, std::map<CLI::App*, Handler>& out) {
  {
    auto opts = std::make_shared<MakeShards>();
    auto* sub = app.add_subcommand("make-shards", "Pack a data.list of WAV files into tar shards");
    sub->add_option("--data-list", opts->data_list, "JSON-lines data.list (key, wav, speaker)")
        ->required();
    sub->add_option("--out-dir", opts->out_dir, "Output directory; shards.list is written there")
        ->required();
    sub->footer(keys_footer({shard_keys()}));
    out[sub] = [opts, &g] { opts->run(g); };
  }
  {
    auto opts = std::make_shared<PipelineDump>();
    auto* sub = app.add_subcommand("pipeline-dump",
                                   "Run the training data pipeline and summarize batches");
    sub->add_option("--shards", opts->shards, "shards.list")->required();
    sub->add_option("--spk2id", opts->spk2id, "Speaker table (`label id`); built if absent");
    sub->add_option("--save-spk2id", opts->save_spk2id, "Write the speaker table here");
    sub->add_option("--noise", opts->noise, "Noise map (`path<TAB>noise|music|babble`)");
    sub->add_option("--rir", opts->rir, "Room impulse response map (`path<TAB>rir`)");
    sub->add_option("--max-batches", opts->max_batches, "Batches to dump")->capture_default_str();
    sub->add_option("--out", opts->out, "Also save batch tensors to this WSTN file");
    sub->footer(keys_footer({pipeline_keys()}));
    out[sub] = [opts, &g] { opts->run(g); };
  }
  {
    auto opts = std::make_shared<Extract>();
    auto* sub = app.add_subcommand("extract", "Extract one embedding per utterance");
    sub->add_option("--data-list", opts->data_list, "JSON-lines data.list");
    sub->add_option("--shards", opts->shards, "shards.list");
    sub->add_option("--weights", opts->weights, "Embedder weights (WSTN)")->required();
    sub->add_option("--out", opts->out, "Embedding text file (default stdout)");
    sub->footer(keys_footer({pipeline_keys(), model_keys()}));
    out[sub] = [opts, &g] { opts->run(g); };
  }
  {
    auto opts = std::make_shared<InitWeights>();
    auto* sub = app.add_subcommand("init-weights", "Write seeded random embedder weights");
    sub->add_option("--out", opts->out, "Output WSTN file")->required();
    sub->footer(keys_footer({model_keys()}));
    out[sub] = [opts, &g] { opts->run(g); };
  }
}

}  // namespace spk::cli
