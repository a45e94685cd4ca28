// Copyright 2026 The crrlab Authors.
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

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crrlab/commands.hpp"
#include "crrlab/error.hpp"
#include "crrlab/run_config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"crrlab: aspect sentiment robustness experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "Run seed");
  app.add_option("--out", out, "Output directory");
  app.add_option("--set", overrides, "Override a config key, e.g. train.epochs=5");
  for (const char* name : {"augment", "train", "eval", "simulate", "saliency", "report"}) {
    app.add_subcommand(name);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    std::string text = "{}";
    if (!config_path.empty()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) throw crrlab::ConfigError("cannot read config " + config_path);
      std::ostringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    // Flags win over the file.
    if (seed) overrides.push_back("seed=" + std::to_string(*seed));
    if (out) overrides.push_back("out=" + nlohmann::json(*out).dump());
    const crrlab::RunConfig cfg =
        crrlab::run_config_from_json(crrlab::apply_overrides(text, overrides));
    crrlab::run_command(command, cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "crrlab " << command << ": " << e.what() << '\n';
    return crrlab::exit_code_for(e);
  }
  return 0;
}
