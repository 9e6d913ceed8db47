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

#include "spk/uio/shard.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "spk/error.h"
#include "spk/wav.h"

namespace spk::uio {

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

void UtteranceRecord::validate() const {
  if (key.empty()) throw DataError("utterance key is empty");
  if (std::any_of(key.begin(), key.end(),
                  [](unsigned char c) { return std::isspace(c) != 0; })) {
    throw DataError("utterance key '" + key + "' contains whitespace");
  }
  if (sample_rate <= 0) {
    throw DataError("utterance '" + key + "': sample rate must be positive");
  }
  if (pcm.empty()) throw DataError("utterance '" + key + "': empty audio");
}

ShardManifest ShardManifest::load(const std::filesystem::path& list_path) {
  std::ifstream in(list_path);
  if (!in) throw IoError("cannot open shard list " + list_path.string());
  ShardManifest m;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (!line.empty()) m.shard_paths.emplace_back(line);
  }
  return m;
}

void ShardManifest::save(const std::filesystem::path& list_path) const {
  std::ofstream out(list_path);
  if (!out) throw IoError("cannot write " + list_path.string());
  for (const auto& p : shard_paths) out << p.string() << '\n';
  if (!out) throw IoError("short write to " + list_path.string());
}

ShardPacker::ShardPacker(std::filesystem::path out_dir, PackOptions options)
    : out_dir_(std::move(out_dir)), options_(std::move(options)) {
  if (options_.shard_size < 1) throw UsageError("shard_size must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir_, ec);
  if (ec) {
    throw IoError("cannot create output directory " + out_dir_.string() +
                  ": " + ec.message());
  }
}

ShardPacker::~ShardPacker() = default;

void ShardPacker::open_next() {
  char name[64];
  std::snprintf(name, sizeof(name), "%s_%06zu.tar%s", options_.prefix.c_str(),
                manifest_.shard_paths.size(), options_.gzip ? ".gz" : "");
  const auto path = out_dir_ / name;
  writer_ = std::make_unique<TarWriter>(open_sink(path, options_.gzip));
  manifest_.shard_paths.push_back(path);
  manifest_.counts.push_back(0);
  in_current_ = 0;
}

void ShardPacker::close_current() {
  if (writer_) {
    writer_->finish();
    writer_.reset();
  }
}

void ShardPacker::add(const UtteranceRecord& record) {
  record.validate();
  if (!seen_.insert(record.key).second) {
    throw DataError("duplicate utterance key '" + record.key + "'");
  }
  if (!writer_ || in_current_ == options_.shard_size) {
    close_current();
    open_next();
  }
  writer_->add_file(record.key + ".spk", record.speaker);
  writer_->add_file(record.key + ".wav",
                    encode_wav(record.pcm, record.sample_rate));
  ++in_current_;
  ++manifest_.counts.back();
}

ShardManifest ShardPacker::finish() {
  close_current();
  return manifest_;
}

ShardManifest pack_shards(std::span<const UtteranceRecord> records,
                          const std::filesystem::path& out_dir,
                          const PackOptions& options) {
  ShardPacker packer(out_dir, options);
  for (const auto& r : records) packer.add(r);
  return packer.finish();
}

ShardReader::ShardReader(ShardManifest manifest)
    : manifest_(std::move(manifest)) {}

std::optional<UtteranceRecord> ShardReader::next() {
  while (shard_index_ < manifest_.shard_paths.size()) {
    const auto& path = manifest_.shard_paths[shard_index_];
    if (!reader_) {
      reader_ = std::make_unique<TarReader>(open_source(path), path.string());
    }
    auto label = reader_->next();
    if (!label) {
      reader_.reset();
      ++shard_index_;
      continue;
    }
    if (!ends_with(label->name, ".spk")) {
      throw FormatError(path.string() + ": entry '" + label->name +
                        "' where a .spk entry was expected");
    }
    const std::string key = label->name.substr(0, label->name.size() - 4);
    auto audio = reader_->next();
    if (!audio || audio->name != key + ".wav") {
      throw FormatError(path.string() + ": entry '" + label->name +
                        "' is not followed by '" + key + ".wav'");
    }
    WavData wav;
    try {
      wav = decode_wav(audio->content);
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ": entry '" + audio->name +
                        "': " + e.what());
    }
    UtteranceRecord rec;
    rec.key = key;
    rec.speaker.assign(label->content.begin(), label->content.end());
    rec.pcm = std::move(wav.samples);
    rec.sample_rate = wav.sample_rate;
    return rec;
  }
  return std::nullopt;
}

ShardManifest partition(const ShardManifest& manifest, std::size_t worker,
                        std::size_t num_workers) {
  if (num_workers == 0 || worker >= num_workers) {
    throw UsageError("partition: need 0 <= worker < num_workers");
  }
  ShardManifest out;
  const bool has_counts = manifest.counts.size() == manifest.shard_paths.size();
  for (std::size_t i = worker; i < manifest.shard_paths.size();
       i += num_workers) {
    out.shard_paths.push_back(manifest.shard_paths[i]);
    if (has_counts) out.counts.push_back(manifest.counts[i]);
  }
  return out;
}

std::vector<DataListEntry> load_data_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data list " + path.string());
  std::vector<DataListEntry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      entries.push_back({obj.at("key").get<std::string>(),
                         obj.at("wav").get<std::string>(),
                         obj.at("speaker").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  return entries;
}

void save_data_list(const std::filesystem::path& path,
                    std::span<const DataListEntry> entries) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& e : entries) {
    const nlohmann::json obj = {
        {"key", e.key}, {"wav", e.wav_path.string()}, {"speaker", e.speaker}};
    out << obj.dump() << '\n';
  }
}

RawReader::RawReader(std::vector<DataListEntry> entries)
    : entries_(std::move(entries)) {}

std::optional<UtteranceRecord> RawReader::next() {
  if (index_ >= entries_.size()) return std::nullopt;
  const auto& entry = entries_[index_++];
  try {
    auto wav = read_wav(entry.wav_path);
    if (wav.num_channels > 1) {
      spdlog::warn("{}: {} channels, keeping the first", entry.key,
                   wav.num_channels);
    }
    UtteranceRecord rec{entry.key, entry.speaker, std::move(wav.samples),
                        wav.sample_rate};
    rec.validate();
    return rec;
  } catch (const Error& e) {
    throw DataError(entry.key + ": " + e.what());
  }
}

}  // namespace spk::uio
