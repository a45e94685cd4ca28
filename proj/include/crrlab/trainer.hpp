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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crrlab/augment.hpp"
#include "crrlab/corpus.hpp"
#include "crrlab/model.hpp"
#include "crrlab/objective.hpp"

namespace crrlab {

enum class Regime : std::uint8_t {
  kBaseline,     // CE on originals
  kAdversarial,  // CE on originals and augmentations
  kCrr,          // CE on both plus alpha * divergence
  kCad,          // CE on originals and counterfactual (RevTgt) members
};

enum class DevMetric : std::uint8_t { kAccuracy, kMacroF1 };

std::string_view to_string(Regime r);
std::optional<Regime> parse_regime(std::string_view s);
std::string_view to_string(DevMetric m);
std::optional<DevMetric> parse_dev_metric(std::string_view s);

struct TrainConfig {
  Regime regime = Regime::kCrr;
  std::size_t epochs = 40;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  double weight_decay = 0.01;
  double warmup_fraction = 0.05;
  double alpha = 1.0;
  DivergenceKind divergence = DivergenceKind::kKlForward;
  bool freeze_original_in_div = false;
  std::vector<double> alpha_grid = {1.0, 3.0, 5.0};
  std::vector<double> lr_grid = {3e-3, 1e-3, 3e-4};
  std::uint64_t seed = 0;
  DevMetric dev_metric = DevMetric::kAccuracy;

  void validate() const;
  LossConfig loss() const;
};

struct EpochRow {
  std::size_t epoch = 0;      // 1-based
  double mean_ce = 0.0;       // per instance, over the epoch's batches
  double mean_div = 0.0;      // per pair, over the epoch's batches
  double summed_div = 0.0;    // end of epoch, over the whole training set
  double dev_metric = 0.0;
};

struct TrainReport {
  std::vector<EpochRow> epochs;
  std::size_t best_epoch = 0;
  double best_dev = 0.0;
  double alpha = 0.0;
  double lr = 0.0;
  Regime regime = Regime::kCrr;
  DevMetric dev_metric = DevMetric::kAccuracy;
};

struct TrainResult {
  Model model;  // parameters from the best dev epoch
  TrainReport report;
};

/// Trains `init` on `train_pairs` and keeps the parameters of the best dev
/// epoch (the earliest on ties). Deterministic in cfg.seed. Throws
/// NumericError with epoch/batch coordinates on a non-finite loss and
/// ConfigError on an empty dev set.
TrainResult train(const Model& init, const PairedDataset& train_pairs, const Dataset& dev,
                  const TrainConfig& cfg);

/// Dev score of `model` under `metric` on the original dev instances.
double dev_score(const Model& model, const Dataset& dev, DevMetric metric);

/// Divergence between predictions on every (original, augmented) pair,
/// summed over the set, in nats. Dropout off.
double summed_divergence(const Model& model, const PairedDataset& pairs, DivergenceKind kind);

struct GridCell {
  double alpha = 0.0;
  double lr = 0.0;
  double best_dev = 0.0;
  std::size_t best_epoch = 0;
};

struct GridResult {
  TrainConfig best_config;
  std::vector<GridCell> cells;  // alpha-major, in grid order
  TrainResult best;
};

/// Trains every (alpha, lr) cell from the same initial model and keeps the
/// best dev score; ties go to the smaller alpha, then the smaller lr.
/// Regimes without a divergence term use alpha = 0 and a single alpha cell.
GridResult grid_search(const Model& init, const PairedDataset& train_pairs, const Dataset& dev,
                       const TrainConfig& base);

void write_training_log(std::ostream& out, const TrainReport& report);
void write_grid_report(std::ostream& out, const GridResult& grid);

}  // namespace crrlab
