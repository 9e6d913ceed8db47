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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "spk/uio/tar.h"

namespace spk::uio {

// One utterance as stored in a shard: `<key>.spk` holds the speaker label,
// `<key>.wav` the mono PCM16 audio.
struct UtteranceRecord {
  std::string key;
  std::string speaker;
  std::vector<std::int16_t> pcm;
  int sample_rate = 0;

  // Throws DataError if a field violates its invariant.
  void validate() const;
  bool operator==(const UtteranceRecord&) const = default;
};

struct ShardManifest {
  std::vector<std::filesystem::path> shard_paths;
  // Utterances per shard, parallel to shard_paths. Empty when the manifest
  // came from a shards.list file, which carries paths only.
  std::vector<std::size_t> counts;

  // shards.list: one shard path per line.
  static ShardManifest load(const std::filesystem::path& list_path);
  void save(const std::filesystem::path& list_path) const;
};

// Pull-style record stream shared by the shard and raw readers.
class RecordSource {
 public:
  virtual ~RecordSource() = default;
  virtual std::optional<UtteranceRecord> next() = 0;
};

struct PackOptions {
  std::size_t shard_size = 1000;
  bool gzip = false;
  std::string prefix = "shard";
};

// Incremental shard writer: records are appended one at a time and a new
// archive is opened every `shard_size` records.
class ShardPacker {
 public:
  ShardPacker(std::filesystem::path out_dir, PackOptions options);
  ~ShardPacker();

  // Throws DataError on an invalid record or a key already packed.
  void add(const UtteranceRecord& record);
  ShardManifest finish();

 private:
  void open_next();
  void close_current();

  std::filesystem::path out_dir_;
  PackOptions options_;
  std::unique_ptr<TarWriter> writer_;
  std::size_t in_current_ = 0;
  std::unordered_set<std::string> seen_;
  ShardManifest manifest_;
};

ShardManifest pack_shards(std::span<const UtteranceRecord> records,
                          const std::filesystem::path& out_dir,
                          const PackOptions& options);

// Streams records shard by shard in on-disk order. Holds at most one record
// plus fixed IO buffers.
class ShardReader final : public RecordSource {
 public:
  explicit ShardReader(ShardManifest manifest);
  std::optional<UtteranceRecord> next() override;

 private:
  ShardManifest manifest_;
  std::size_t shard_index_ = 0;
  std::unique_ptr<TarReader> reader_;
};

// Round-robin shard assignment for worker `worker` of `num_workers`.
ShardManifest partition(const ShardManifest& manifest, std::size_t worker,
                        std::size_t num_workers);

// data.list: one JSON object per line with `key`, `wav` and `speaker`.
struct DataListEntry {
  std::string key;
  std::filesystem::path wav_path;
  std::string speaker;
};

std::vector<DataListEntry> load_data_list(const std::filesystem::path& path);
void save_data_list(const std::filesystem::path& path,
                    std::span<const DataListEntry> entries);

// Loads raw WAV files listed in a data.list. A bad entry raises a DataError
// prefixed with its key; the reader has already advanced past it, so callers
// may catch and continue.
class RawReader final : public RecordSource {
 public:
  explicit RawReader(std::vector<DataListEntry> entries);
  std::optional<UtteranceRecord> next() override;

 private:
  std::vector<DataListEntry> entries_;
  std::size_t index_ = 0;
};

}  // namespace spk::uio
