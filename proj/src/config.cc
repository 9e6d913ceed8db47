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

#include "spk/config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "spk/error.h"

namespace spk {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text, std::string_view key) {
  const std::string owned(trim(text));
  try {
    std::size_t used = 0;
    const double v = std::stod(owned, &used);
    if (used != owned.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw UsageError("config key '" + std::string(key) +
                     "': expected a number, got '" + owned + "'");
  }
}

}  // namespace

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const auto item = trim(text.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(parse_double(item, text));
    pos = comma + 1;
  }
  return out;
}

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), path.string());
}

Config Config::from_string(std::string_view text, std::string_view origin) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(std::string(origin) + ":" + std::to_string(lineno) +
                       ": expected 'key = value'");
    }
    const auto key = trim(body.substr(0, eq));
    if (key.empty()) {
      throw UsageError(std::string(origin) + ":" + std::to_string(lineno) +
                       ": empty key");
    }
    cfg.values_[std::string(key)] = std::string(trim(body.substr(eq + 1)));
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

void Config::apply_overrides(std::span<const std::string> assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("override '" + a + "' is not of the form key=value");
    }
    values_[std::string(trim(std::string_view(a).substr(0, eq)))] =
        std::string(trim(std::string_view(a).substr(eq + 1)));
  }
}

bool Config::contains(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(it->second, key);
}

long Config::get_int(const std::string& key, long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  long v = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw UsageError("config key '" + key + "': expected an integer, got '" +
                     s + "'");
  }
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto& s = it->second;
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw UsageError("config key '" + key + "': expected a boolean, got '" + s +
                   "'");
}

std::vector<double> Config::get_doubles(
    const std::string& key, const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double_list(it->second);
}

void Config::reject_unknown(std::span<const std::string_view> allowed) const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      unknown += unknown.empty() ? key : ", " + key;
    }
  }
  if (!unknown.empty()) throw UsageError("unknown config keys: " + unknown);
}

}  // namespace spk
