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

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spk {

// Flat `key = value` configuration shared by every module. Lines starting
// with '#' are comments. Later assignments override earlier ones.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::filesystem::path& path);
  static Config from_string(std::string_view text,
                            std::string_view origin = "<string>");

  void set(const std::string& key, const std::string& value);
  // Applies `key=value` overrides, e.g. from repeated --set flags.
  void apply_overrides(std::span<const std::string> assignments);

  bool contains(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma separated list of reals, e.g. "0.9,1.0,1.1".
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;

  // Throws UsageError naming every key not present in `allowed`.
  void reject_unknown(std::span<const std::string_view> allowed) const;

 private:
  std::map<std::string, std::string> values_;
};

std::vector<double> parse_double_list(std::string_view text);

}  // namespace spk
