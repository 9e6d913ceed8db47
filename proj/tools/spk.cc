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

#include <iostream>
#include <map>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cli_common.h"
#include "spk/error.h"
#include "spk/session.h"

namespace {

constexpr int kUsageExit = 1;
constexpr int kDataExit = 2;

int run(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("spk"));
  spdlog::set_pattern("[%l] %v");

  spk::cli::GlobalOptions g;
  CLI::App app("Speaker embedding toolkit", "spk");
  app.set_version_flag("--version", std::string(spk::kVersion));
  app.require_subcommand(1);
  app.add_option("--seed", g.seed, "Seed for every random stage")->capture_default_str();
  app.add_option("--config", g.config_path, "Flat `key = value` config file");
  app.add_option("--set", g.overrides, "Override a config key: --set key=value (repeatable)");
  app.add_option("--workers", g.workers, "Worker threads")->capture_default_str();
  app.add_flag_callback("--quiet", [] { spdlog::set_level(spdlog::level::warn); },
                        "Only log warnings and errors");

  std::map<CLI::App*, spk::cli::Handler> handlers;
  spk::cli::register_data_commands(app, g, handlers);
  spk::cli::register_train_commands(app, g, handlers);
  spk::cli::register_score_commands(app, g, handlers);
  spk::cli::register_diar_commands(app, g, handlers);

  if (argc <= 1) {
    std::cerr << app.help();
    return kUsageExit;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageExit;
  }
  try {
    for (auto* sub : app.get_subcommands()) handlers.at(sub)();
  } catch (const spk::UsageError& e) {
    spdlog::error("{}", e.what());
    return kUsageExit;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kDataExit;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
