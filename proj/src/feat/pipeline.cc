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

#include "spk/feat/pipeline.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "spk/error.h"
#include "spk/random.h"
#include "spk/wav.h"

namespace spk::feat {

const Wave& Sample::wave() const {
  if (!has_wave()) throw UsageError("sample '" + key + "' holds features, not a waveform");
  return std::get<Wave>(payload);
}

Wave& Sample::wave() {
  if (!has_wave()) throw UsageError("sample '" + key + "' holds features, not a waveform");
  return std::get<Wave>(payload);
}

const RowMatrixXf& Sample::feats() const {
  if (!has_feats()) throw UsageError("sample '" + key + "' holds a waveform, not features");
  return std::get<RowMatrixXf>(payload);
}

Sample to_sample(const uio::UtteranceRecord& record) {
  Sample s;
  s.key = record.key;
  s.speaker = record.speaker;
  s.sample_rate = record.sample_rate;
  s.payload = pcm_to_float(record.pcm);
  return s;
}

RecordStream::RecordStream(std::unique_ptr<uio::RecordSource> source)
    : source_(std::move(source)) {}

std::optional<Sample> RecordStream::next() {
  auto rec = source_->next();
  if (!rec) return std::nullopt;
  return to_sample(*rec);
}

VectorStream::VectorStream(std::vector<Sample> samples)
    : samples_(std::move(samples)) {}

std::optional<Sample> VectorStream::next() {
  if (index_ >= samples_.size()) return std::nullopt;
  return std::move(samples_[index_++]);
}

ShuffleStage::ShuffleStage(std::unique_ptr<SampleStream> upstream,
                           std::size_t buffer_size, std::uint64_t seed)
    : upstream_(std::move(upstream)),
      buffer_size_(buffer_size),
      rng_(make_rng(seed, 1)) {
  if (buffer_size_ < 1) throw UsageError("shuffle buffer must be >= 1");
  buffer_.reserve(buffer_size_);
}

std::optional<Sample> ShuffleStage::next() {
  if (drain_ < buffer_.size()) return std::move(buffer_[drain_++]);
  buffer_.clear();
  drain_ = 0;
  while (buffer_.size() < buffer_size_) {
    auto s = upstream_->next();
    if (!s) break;
    buffer_.push_back(std::move(*s));
  }
  if (buffer_.empty()) return std::nullopt;
  std::shuffle(buffer_.begin(), buffer_.end(), rng_);
  return std::move(buffer_[drain_++]);
}

SpeakerTable SpeakerTable::build(std::span<const std::string> labels) {
  SpeakerTable t;
  for (const auto& label : labels) {
    if (t.ids_.emplace(label, t.size()).second) t.labels_.push_back(label);
  }
  return t;
}

SpeakerTable SpeakerTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::pair<int, std::string>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string label;
    int id = 0;
    if (!(ss >> label)) continue;
    if (!(ss >> id)) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": expected 'label id'");
    }
    rows.emplace_back(id, label);
  }
  std::sort(rows.begin(), rows.end());
  SpeakerTable t;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != static_cast<int>(i)) {
      throw FormatError(path.string() + ": speaker ids are not contiguous 0..N-1");
    }
    if (!t.ids_.emplace(rows[i].second, rows[i].first).second) {
      throw FormatError(path.string() + ": duplicate speaker '" +
                        rows[i].second + "'");
    }
    t.labels_.push_back(rows[i].second);
  }
  return t;
}

void SpeakerTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    out << labels_[i] << ' ' << i << '\n';
  }
}

int SpeakerTable::id(const std::string& label) const {
  const auto it = ids_.find(label);
  if (it == ids_.end()) throw DataError("unknown speaker '" + label + "'");
  return it->second;
}

Spk2IdStage::Spk2IdStage(std::unique_ptr<SampleStream> upstream,
                         SpeakerTable table)
    : upstream_(std::move(upstream)), table_(std::move(table)) {}

std::optional<Sample> Spk2IdStage::next() {
  auto s = upstream_->next();
  if (s) s->speaker_id = table_.id(s->speaker);
  return s;
}

MapStage::MapStage(std::unique_ptr<SampleStream> upstream, Fn fn,
                   std::uint64_t seed, std::uint64_t stream_id)
    : upstream_(std::move(upstream)),
      fn_(std::move(fn)),
      rng_(make_rng(seed, stream_id)) {}

std::optional<Sample> MapStage::next() {
  auto s = upstream_->next();
  if (!s) return std::nullopt;
  return fn_(std::move(*s), rng_);
}

Batcher::Batcher(std::unique_ptr<SampleStream> upstream,
                 std::size_t batch_size, bool drop_remainder)
    : upstream_(std::move(upstream)),
      batch_size_(batch_size),
      drop_remainder_(drop_remainder) {
  if (batch_size_ < 1) throw UsageError("batch_size must be >= 1");
}

std::optional<Batch> Batcher::next() {
  Batch batch;
  while (batch.size() < batch_size_) {
    auto s = upstream_->next();
    if (!s) break;
    const auto& f = s->feats();
    const auto frames = static_cast<std::size_t>(f.rows());
    const auto dims = static_cast<std::size_t>(f.cols());
    if (batch.size() == 0) {
      batch.frames = frames;
      batch.dims = dims;
      batch.feats.reserve(batch_size_ * frames * dims);
    } else if (frames != batch.frames || dims != batch.dims) {
      throw DataError("sample '" + s->key +
                      "' has a different feature shape than its batch");
    }
    batch.keys.push_back(s->key);
    batch.labels.push_back(s->speaker_id);
    batch.feats.insert(batch.feats.end(), f.data(), f.data() + f.size());
  }
  if (batch.size() == 0) return std::nullopt;
  if (batch.size() < batch_size_ && drop_remainder_) return std::nullopt;
  return batch;
}

Pipeline::Pipeline(std::unique_ptr<SampleStream> source, PipelineConfig config,
                   SpeakerTable speakers, AudioBank noise_bank,
                   AudioBank rir_bank, std::uint64_t seed) {
  config.validate();
  const auto cfg = std::make_shared<const PipelineConfig>(config);
  const int num_speakers = std::max(speakers.size(), 1);
  auto perturber = std::make_shared<const SpeedPerturber>(
      cfg->speed_factors, cfg->speed_weights, num_speakers);
  num_classes_ = perturber->label_space();

  std::unique_ptr<SampleStream> s = std::move(source);
  s = std::make_unique<ShuffleStage>(std::move(s), cfg->shuffle_buffer, seed);
  s = std::make_unique<Spk2IdStage>(std::move(s), std::move(speakers));
  s = std::make_unique<MapStage>(
      std::move(s),
      [cfg](Sample x, std::mt19937_64&) {
        if (x.sample_rate != cfg->target_rate) {
          x.payload = resample(x.wave(), x.sample_rate, cfg->target_rate);
          x.sample_rate = cfg->target_rate;
        }
        return x;
      },
      seed, 2);
  s = std::make_unique<MapStage>(
      std::move(s),
      [perturber](Sample x, std::mt19937_64& rng) {
        return perturber->apply(std::move(x), rng);
      },
      seed, 3);
  s = std::make_unique<MapStage>(
      std::move(s),
      [cfg](Sample x, std::mt19937_64& rng) {
        x.payload = random_chunk(x.wave(), cfg->chunk_samples(), rng);
        return x;
      },
      seed, 4);
  auto banks = std::make_shared<const std::pair<AudioBank, AudioBank>>(
      std::move(noise_bank), std::move(rir_bank));
  const AugmentOptions aug{cfg->aug_prob, cfg->snr_ranges};
  s = std::make_unique<MapStage>(
      std::move(s),
      [banks, aug](Sample x, std::mt19937_64& rng) {
        x.payload = augment(x.wave(), banks->first, banks->second, aug, rng);
        return x;
      },
      seed, 5);
  auto fbank = std::make_shared<FbankComputer>(FbankOptions::from(*cfg));
  s = std::make_unique<MapStage>(
      std::move(s),
      [fbank, cfg](Sample x, std::mt19937_64& rng) {
        auto feats = fbank->compute(x.wave(), &rng);
        cmvn(feats, cfg->cmvn_variance);
        if (cfg->specaug) {
          spec_augment(feats,
                       {cfg->specaug_num_t_masks, cfg->specaug_max_t,
                        cfg->specaug_num_f_masks, cfg->specaug_max_f},
                       rng);
        }
        x.payload = std::move(feats);
        return x;
      },
      seed, 6);
  batcher_ = std::make_unique<Batcher>(std::move(s), cfg->batch_size,
                                       cfg->drop_remainder);
}

std::optional<Batch> Pipeline::next() { return batcher_->next(); }

RowMatrixXf eval_features(std::span<const float> wave, int sample_rate,
                          const PipelineConfig& config) {
  auto options = FbankOptions::from(config);
  options.dither = 0.0;
  Wave resampled;
  if (sample_rate != config.target_rate) {
    resampled = resample(wave, sample_rate, config.target_rate);
    wave = resampled;
  }
  auto feats = compute_fbank(wave, options);
  cmvn(feats, config.cmvn_variance);
  return feats;
}

}  // namespace spk::feat
