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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crrlab/augment.hpp"
#include "crrlab/causal_sim.hpp"
#include "crrlab/model.hpp"
#include "crrlab/saliency.hpp"
#include "crrlab/trainer.hpp"

namespace crrlab {

enum class AugmentStrategy : std::uint8_t { kAddDiffMix, kRevTgt };

struct DataPaths {
  std::string train;       // original-format JSONL
  std::string dev;         // optional; split from train when empty
  std::string test;        // original or ARTs JSONL
  std::string lexicon;     // empty: bundled word list
  std::string pairs;       // augmented pairs for train
  std::string checkpoint;  // model for eval / saliency
  double dev_fraction = 0.1;
};

struct SaliencyOptions {
  std::vector<std::string> ids;
  RenderMode mode = RenderMode::kHtml;
  SaliencyTarget target = SaliencyTarget::kGold;
};

/// Every knob of every subcommand. Each field has a default, so an empty
/// config file is valid.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out = "out";
  DataPaths data;
  std::size_t bank_window = 5;
  AugmentStrategy augment_strategy = AugmentStrategy::kAddDiffMix;
  AugmentConfig augment;
  ModelConfig model;
  TrainConfig train;
  bool grid = false;
  CausalSpec sim;
  SaliencyOptions saliency;
  std::string report_input;  // eval JSON for `report`

  /// Copies the run seed into the per-module configs.
  void propagate_seed();
  void validate() const;
};

/// Parses a config document; missing keys keep their defaults, unknown keys
/// throw ConfigError.
RunConfig run_config_from_json(const std::string& json_text);
std::string run_config_to_json(const RunConfig& cfg);

/// Applies "dotted.key=value" overrides on top of `json_text`. The value is
/// read as JSON when it parses, as a string otherwise.
std::string apply_overrides(const std::string& json_text,
                            const std::vector<std::string>& overrides);

}  // namespace crrlab
