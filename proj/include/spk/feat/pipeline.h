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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spk/feat/config.h"
#include "spk/feat/fbank.h"
#include "spk/feat/sample.h"
#include "spk/feat/signal.h"
#include "spk/uio/shard.h"

namespace spk::feat {

// Single-consumer pull stream; each stage owns its upstream.
class SampleStream {
 public:
  virtual ~SampleStream() = default;
  virtual std::optional<Sample> next() = 0;
};

class RecordStream final : public SampleStream {
 public:
  explicit RecordStream(std::unique_ptr<uio::RecordSource> source);
  std::optional<Sample> next() override;

 private:
  std::unique_ptr<uio::RecordSource> source_;
};

class VectorStream final : public SampleStream {
 public:
  explicit VectorStream(std::vector<Sample> samples);
  std::optional<Sample> next() override;

 private:
  std::vector<Sample> samples_;
  std::size_t index_ = 0;
};

// Fills a buffer of `buffer_size` samples, shuffles it, and drains it
// completely before refilling. The last partial buffer is shuffled at end of
// input. An element therefore moves at most buffer_size - 1 positions.
class ShuffleStage final : public SampleStream {
 public:
  ShuffleStage(std::unique_ptr<SampleStream> upstream, std::size_t buffer_size,
               std::uint64_t seed);
  std::optional<Sample> next() override;

 private:
  std::unique_ptr<SampleStream> upstream_;
  std::size_t buffer_size_;
  std::mt19937_64 rng_;
  std::vector<Sample> buffer_;
  std::size_t drain_ = 0;
};

// Speaker label -> contiguous id, ids assigned in first-seen order.
class SpeakerTable {
 public:
  SpeakerTable() = default;
  static SpeakerTable build(std::span<const std::string> labels);
  // spk2id file: `label id` per line.
  static SpeakerTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  int id(const std::string& label) const;
  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::map<std::string, int> ids_;
  std::vector<std::string> labels_;
};

class Spk2IdStage final : public SampleStream {
 public:
  Spk2IdStage(std::unique_ptr<SampleStream> upstream, SpeakerTable table);
  std::optional<Sample> next() override;

 private:
  std::unique_ptr<SampleStream> upstream_;
  SpeakerTable table_;
};

// Per-sample transform with its own reproducible generator.
class MapStage final : public SampleStream {
 public:
  using Fn = std::function<Sample(Sample, std::mt19937_64&)>;
  MapStage(std::unique_ptr<SampleStream> upstream, Fn fn, std::uint64_t seed,
           std::uint64_t stream_id);
  std::optional<Sample> next() override;

 private:
  std::unique_ptr<SampleStream> upstream_;
  Fn fn_;
  std::mt19937_64 rng_;
};

// Groups feature samples into batches of batch_size. With drop_remainder the
// trailing partial batch is discarded; otherwise it is emitted.
class Batcher {
 public:
  Batcher(std::unique_ptr<SampleStream> upstream, std::size_t batch_size,
          bool drop_remainder);
  std::optional<Batch> next();

 private:
  std::unique_ptr<SampleStream> upstream_;
  std::size_t batch_size_;
  bool drop_remainder_;
};

// Assembles the training chain: shuffle -> spk2id -> resample -> speed
// perturb -> random chunk -> noise/reverb -> fbank -> cmvn -> specaug ->
// batch. The output is a pure function of input order, seed and config.
class Pipeline {
 public:
  Pipeline(std::unique_ptr<SampleStream> source, PipelineConfig config,
           SpeakerTable speakers, AudioBank noise_bank, AudioBank rir_bank,
           std::uint64_t seed);

  std::optional<Batch> next();
  // Number of training classes after speed perturbation.
  int num_classes() const { return num_classes_; }

 private:
  std::unique_ptr<Batcher> batcher_;
  int num_classes_ = 0;
};

// Evaluation features for one waveform: resample to the target rate, fbank
// without dither, cmvn. No randomness.
RowMatrixXf eval_features(std::span<const float> wave, int sample_rate,
                          const PipelineConfig& config);

}  // namespace spk::feat
