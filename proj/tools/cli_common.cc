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

#include "cli_common.h"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "spk/diar/diarize.h"
#include "spk/embed/tdnn.h"
#include "spk/error.h"
#include "spk/feat/config.h"
#include "spk/loss/margin.h"
#include "spk/loss/scheduler.h"

namespace spk::cli {

namespace {

std::vector<std::string_view> from_span(std::span<const std::string_view> keys) {
  return {keys.begin(), keys.end()};
}

}  // namespace

std::vector<std::string_view> pipeline_keys() { return from_span(feat::PipelineConfig::keys()); }
std::vector<std::string_view> model_keys() { return from_span(embed::TdnnSpec::keys()); }

std::vector<std::string_view> training_keys() {
  auto keys = from_span(loss::SchedulerConfig::keys());
  for (auto k : loss::MarginLossConfig::keys()) keys.push_back(k);
  keys.push_back("head_epochs");
  keys.push_back("head_batch_size");
  return keys;
}

std::vector<std::string_view> plda_keys() {
  return {"plda_iters", "plda_ridge", "plda_length_norm", "plda_model"};
}

std::vector<std::string_view> scoring_keys() {
  return {"asnorm_top_n", "p_target", "c_miss", "c_fa"};
}

std::vector<std::string_view> diarize_keys() { return from_span(diar::DiarizeConfig::keys()); }
std::vector<std::string_view> shard_keys() { return {"shard_size", "shard_gzip"}; }

std::vector<std::string_view> all_keys() {
  std::vector<std::string_view> keys;
  for (const auto& group : {pipeline_keys(), model_keys(), training_keys(), plda_keys(),
                            scoring_keys(), diarize_keys(), shard_keys()}) {
    keys.insert(keys.end(), group.begin(), group.end());
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

Config load_config(const GlobalOptions& g) {
  Config cfg = g.config_path.empty() ? Config{} : Config::from_file(g.config_path);
  cfg.apply_overrides(g.overrides);
  const auto keys = all_keys();
  cfg.reject_unknown(keys);
  return cfg;
}

std::string keys_footer(std::initializer_list<std::vector<std::string_view>> groups) {
  std::vector<std::string_view> keys;
  for (const auto& g : groups) keys.insert(keys.end(), g.begin(), g.end());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::string out = "Config keys (--config file or --set key=value):\n ";
  std::size_t width = 1;
  for (auto k : keys) {
    if (width + k.size() + 1 > 78) {
      out += "\n ";
      width = 1;
    }
    out += ' ';
    out += k;
    width += k.size() + 1;
  }
  return out;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers < 1) throw UsageError("--workers must be >= 1");
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::exception_ptr> errors(n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Output::Output(const std::string& path) : path_(path) {
  if (!path.empty() && path != "-") {
    auto f = std::make_unique<std::ofstream>(path);
    if (!*f) throw IoError("cannot write " + path);
    file_ = std::move(f);
  }
}

std::ostream& Output::stream() { return file_ ? *file_ : std::cout; }

void Output::close() {
  stream().flush();
  if (!stream()) throw IoError("write failed: " + (file_ ? path_ : std::string("<stdout>")));
  file_.reset();
}

std::map<std::string, std::string, std::less<>> load_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::map<std::string, std::string, std::less<>> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream ss(line);
    std::string k, v, extra;
    if (!(ss >> k)) continue;
    if (!(ss >> v) || (ss >> extra)) {
      throw FormatError(path + ":" + std::to_string(n) + ": expected `key value`");
    }
    if (!out.emplace(k, v).second) {
      throw FormatError(path + ":" + std::to_string(n) + ": duplicate key " + k);
    }
  }
  return out;
}

std::map<std::string, std::vector<std::string>, std::less<>> load_lists(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::map<std::string, std::vector<std::string>, std::less<>> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream ss(line);
    std::string k;
    if (!(ss >> k)) continue;
    std::vector<std::string> items;
    for (std::string v; ss >> v;) items.push_back(v);
    if (items.empty()) {
      throw FormatError(path + ":" + std::to_string(n) + ": expected `key item ...`");
    }
    if (!out.emplace(k, std::move(items)).second) {
      throw FormatError(path + ":" + std::to_string(n) + ": duplicate key " + k);
    }
  }
  return out;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace spk::cli
