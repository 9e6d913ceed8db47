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
#include <vector>

namespace spk::uio {

// Sequential byte streams over a plain or gzip-compressed file.
class ByteSink {
 public:
  virtual ~ByteSink() = default;
  virtual void write(std::span<const char> bytes) = 0;
  virtual void close() = 0;
};

class ByteSource {
 public:
  virtual ~ByteSource() = default;
  // Reads up to out.size() bytes; returns the count, 0 at end of stream.
  virtual std::size_t read(std::span<char> out) = 0;
};

std::unique_ptr<ByteSink> open_sink(const std::filesystem::path& path,
                                    bool gzip);
// Gzip input is detected from the magic bytes.
std::unique_ptr<ByteSource> open_source(const std::filesystem::path& path);

// Writes a POSIX ustar archive containing regular files only.
class TarWriter {
 public:
  explicit TarWriter(std::unique_ptr<ByteSink> sink);
  ~TarWriter();
  TarWriter(const TarWriter&) = delete;
  TarWriter& operator=(const TarWriter&) = delete;

  void add_file(const std::string& name, std::span<const char> content);
  // Writes the two zero end-of-archive blocks and closes the sink.
  void finish();

 private:
  std::unique_ptr<ByteSink> sink_;
  bool finished_ = false;
};

struct TarEntry {
  std::string name;
  std::vector<char> content;
};

// Streams regular-file entries out of a ustar archive one at a time. Only the
// current entry is held in memory.
class TarReader {
 public:
  TarReader(std::unique_ptr<ByteSource> source, std::string archive_name);

  // Next regular file, or nullopt at the end of the archive. Directory and
  // pax header entries are skipped.
  std::optional<TarEntry> next();

 private:
  bool read_exact(std::span<char> out);
  void skip(std::uint64_t n);

  std::unique_ptr<ByteSource> source_;
  std::string archive_name_;
  std::string last_entry_ = "<start>";
  bool ended_ = false;
};

}  // namespace spk::uio
