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

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "crrlab/run_config.hpp"

namespace crrlab {

// Subcommands. Each writes its artifacts plus config.json and
// metadata.txt into cfg.out and a short human summary to `log`. Only
// metadata.txt carries a timestamp.

void cmd_augment(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_eval(const RunConfig& cfg, std::ostream& log);
void cmd_simulate(const RunConfig& cfg, std::ostream& log);
void cmd_saliency(const RunConfig& cfg, std::ostream& log);
void cmd_report(const RunConfig& cfg, std::ostream& log);

/// Dispatches by name; throws ConfigError for an unknown command.
void run_command(std::string_view name, const RunConfig& cfg, std::ostream& log);

/// Exit status for an exception thrown by a command: 2 config, 3 data,
/// 4 numeric, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace crrlab
