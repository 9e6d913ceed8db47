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
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "spk/config.h"

namespace spk::cli {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string config_path;
  std::vector<std::string> overrides;
  int workers = 1;
};

// Flat config from --config plus --set overrides. Keys unknown to every
// subcommand are rejected.
Config load_config(const GlobalOptions& g);

// Every config key the toolkit understands.
std::vector<std::string_view> all_keys();

// Key groups, also listed in each subcommand's --help.
std::vector<std::string_view> pipeline_keys();
std::vector<std::string_view> model_keys();
std::vector<std::string_view> training_keys();
std::vector<std::string_view> plda_keys();
std::vector<std::string_view> scoring_keys();
std::vector<std::string_view> diarize_keys();
std::vector<std::string_view> shard_keys();

std::string keys_footer(std::initializer_list<std::vector<std::string_view>> groups);

// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions are
// rethrown in index order after all threads finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// Output goes to `path`, or stdout when it is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path);
  std::ostream& stream();
  void close();

 private:
  std::unique_ptr<std::ostream> file_;
  std::string path_;
};

// `key label` pairs, e.g. utt2spk.
std::map<std::string, std::string, std::less<>> load_pairs(const std::string& path);
// `spk utt1 utt2 ...`, e.g. spk2utt.
std::map<std::string, std::vector<std::string>, std::less<>> load_lists(const std::string& path);

std::string fixed(double v, int decimals);

using Handler = std::function<void()>;

// Each register function adds its subcommands to `app` and returns, per
// subcommand, the handler that runs after parsing.
void register_data_commands(CLI::App& app, GlobalOptions& g, std::map<CLI::App*, Handler>& out);
void register_train_commands(CLI::App& app, GlobalOptions& g, std::map<CLI::App*, Handler>& out);
void register_score_commands(CLI::App& app, GlobalOptions& g, std::map<CLI::App*, Handler>& out);
void register_diar_commands(CLI::App& app, GlobalOptions& g, std::map<CLI::App*, Handler>& out);

}  // namespace spk::cli
