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

#include "spk/uio/tar.h"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>

#include "spk/error.h"

namespace spk::uio {

namespace {

constexpr std::size_t kBlock = 512;

class FileSink final : public ByteSink {
 public:
  explicit FileSink(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot create " + path.string());
  }
  void write(std::span<const char> bytes) override {
    out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out_) throw IoError("write failed on " + path_.string());
  }
  void close() override {
    out_.close();
    if (!out_) throw IoError("close failed on " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class GzipSink final : public ByteSink {
 public:
  explicit GzipSink(const std::filesystem::path& path) : path_(path) {
    file_ = gzopen(path.c_str(), "wb");
    if (!file_) throw IoError("cannot create " + path.string());
  }
  ~GzipSink() override {
    if (file_) gzclose(file_);
  }
  void write(std::span<const char> bytes) override {
    if (bytes.empty()) return;
    if (gzwrite(file_, bytes.data(), static_cast<unsigned>(bytes.size())) !=
        static_cast<int>(bytes.size())) {
      throw IoError("gzip write failed on " + path_.string());
    }
  }
  void close() override {
    const int rc = gzclose(file_);
    file_ = nullptr;
    if (rc != Z_OK) throw IoError("gzip close failed on " + path_.string());
  }

 private:
  std::filesystem::path path_;
  gzFile file_ = nullptr;
};

// gzread transparently passes through uncompressed files, so one source
// covers both cases.
class GzSource final : public ByteSource {
 public:
  explicit GzSource(const std::filesystem::path& path) : path_(path) {
    file_ = gzopen(path.c_str(), "rb");
    if (!file_) throw IoError("cannot open " + path.string());
    gzbuffer(file_, 1 << 16);
  }
  ~GzSource() override {
    if (file_) gzclose(file_);
  }
  std::size_t read(std::span<char> out) override {
    const int n = gzread(file_, out.data(), static_cast<unsigned>(out.size()));
    if (n < 0) {
      int err = 0;
      throw FormatError(path_.string() + ": " + gzerror(file_, &err));
    }
    return static_cast<std::size_t>(n);
  }

 private:
  std::filesystem::path path_;
  gzFile file_ = nullptr;
};

// Zero-padded octal in width - 1 digits followed by a NUL.
void put_octal(char* field, std::size_t width, std::uint64_t value) {
  field[width - 1] = '\0';
  for (std::size_t i = width - 1; i-- > 0;) {
    field[i] = static_cast<char>('0' + (value & 7u));
    value >>= 3;
  }
  if (value != 0) throw UsageError("value does not fit in a tar header field");
}

std::uint64_t parse_octal(const char* field, std::size_t width, bool* ok) {
  std::uint64_t v = 0;
  std::size_t i = 0;
  while (i < width && (field[i] == ' ' || field[i] == '\0')) ++i;
  bool any = false;
  for (; i < width && field[i] >= '0' && field[i] <= '7'; ++i) {
    v = v * 8 + static_cast<std::uint64_t>(field[i] - '0');
    any = true;
  }
  for (; i < width; ++i) {
    if (field[i] != ' ' && field[i] != '\0') *ok = false;
  }
  if (!any) *ok = false;
  return v;
}

std::uint32_t header_checksum(const std::array<char, kBlock>& h) {
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i < kBlock; ++i) {
    const bool in_chksum = i >= 148 && i < 156;
    sum += in_chksum ? ' ' : static_cast<unsigned char>(h[i]);
  }
  return sum;
}

}  // namespace

std::unique_ptr<ByteSink> open_sink(const std::filesystem::path& path,
                                    bool gzip) {
  if (gzip) return std::make_unique<GzipSink>(path);
  return std::make_unique<FileSink>(path);
}

std::unique_ptr<ByteSource> open_source(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError("missing shard " + path.string());
  }
  return std::make_unique<GzSource>(path);
}

TarWriter::TarWriter(std::unique_ptr<ByteSink> sink) : sink_(std::move(sink)) {}

TarWriter::~TarWriter() = default;

void TarWriter::add_file(const std::string& name,
                         std::span<const char> content) {
  if (finished_) throw UsageError("TarWriter: add_file after finish");
  std::array<char, kBlock> h{};
  if (name.empty()) throw UsageError("tar entry name is empty");
  if (name.size() <= 100) {
    std::memcpy(h.data(), name.data(), name.size());
  } else {
    // ustar splits long names at a '/' into prefix (155) + name (100).
    const auto slash = name.rfind('/', 155);
    if (slash == std::string::npos || name.size() - slash - 1 > 100 ||
        name.size() - slash - 1 == 0) {
      throw UsageError("tar entry name too long for ustar: " + name);
    }
    std::memcpy(h.data(), name.data() + slash + 1, name.size() - slash - 1);
    std::memcpy(h.data() + 345, name.data(), slash);
  }
  put_octal(h.data() + 100, 8, 0644);
  put_octal(h.data() + 108, 8, 0);
  put_octal(h.data() + 116, 8, 0);
  put_octal(h.data() + 124, 12, content.size());
  put_octal(h.data() + 136, 12, 0);
  h[156] = '0';
  std::memcpy(h.data() + 257, "ustar", 6);
  h[263] = '0';
  h[264] = '0';
  put_octal(h.data() + 148, 7, header_checksum(h));
  h[155] = ' ';
  sink_->write(h);
  sink_->write(content);
  const std::size_t pad = (kBlock - content.size() % kBlock) % kBlock;
  static const std::array<char, kBlock> zeros{};
  sink_->write(std::span<const char>(zeros.data(), pad));
}

void TarWriter::finish() {
  if (finished_) return;
  static const std::array<char, 2 * kBlock> zeros{};
  sink_->write(zeros);
  sink_->close();
  finished_ = true;
}

TarReader::TarReader(std::unique_ptr<ByteSource> source,
                     std::string archive_name)
    : source_(std::move(source)), archive_name_(std::move(archive_name)) {}

bool TarReader::read_exact(std::span<char> out) {
  std::size_t got = 0;
  while (got < out.size()) {
    const auto n = source_->read(out.subspan(got));
    if (n == 0) break;
    got += n;
  }
  if (got == 0) return false;
  if (got != out.size()) {
    throw FormatError(archive_name_ + ": truncated archive after entry '" +
                      last_entry_ + "'");
  }
  return true;
}

void TarReader::skip(std::uint64_t n) {
  std::array<char, 4096> buf;
  while (n > 0) {
    const auto chunk = static_cast<std::size_t>(
        std::min<std::uint64_t>(n, buf.size()));
    if (!read_exact(std::span<char>(buf.data(), chunk))) {
      throw FormatError(archive_name_ + ": truncated archive in entry '" +
                        last_entry_ + "'");
    }
    n -= chunk;
  }
}

std::optional<TarEntry> TarReader::next() {
  while (!ended_) {
    std::array<char, kBlock> h;
    if (!read_exact(h)) {
      ended_ = true;
      return std::nullopt;
    }
    if (std::all_of(h.begin(), h.end(), [](char c) { return c == '\0'; })) {
      ended_ = true;
      return std::nullopt;
    }
    std::string name(h.data(), strnlen(h.data(), 100));
    if (std::memcmp(h.data() + 257, "ustar", 5) == 0 && h[345] != '\0') {
      name = std::string(h.data() + 345, strnlen(h.data() + 345, 155)) + "/" +
             name;
    }
    bool ok = true;
    const auto size = parse_octal(h.data() + 124, 12, &ok);
    const auto stored_sum = parse_octal(h.data() + 148, 8, &ok);
    if (!ok || stored_sum != header_checksum(h)) {
      throw FormatError(archive_name_ + ": corrupt tar header for entry '" +
                        name + "' (after '" + last_entry_ + "')");
    }
    last_entry_ = name;
    const std::uint64_t padded = (size + kBlock - 1) / kBlock * kBlock;
    const char type = h[156];
    if (type == '0' || type == '\0') {
      TarEntry entry{std::move(name), std::vector<char>(size)};
      if (size > 0 && !read_exact(entry.content)) {
        throw FormatError(archive_name_ + ": truncated archive in entry '" +
                          last_entry_ + "'");
      }
      skip(padded - size);
      return entry;
    }
    if (type == '5' || type == 'x' || type == 'g') {
      skip(padded);
      continue;
    }
    throw FormatError(archive_name_ + ": unsupported tar entry type '" +
                      std::string(1, type) + "' for '" + name + "'");
  }
  return std::nullopt;
}

}  // namespace spk::uio
