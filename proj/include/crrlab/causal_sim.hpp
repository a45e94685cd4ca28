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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "crrlab/augment.hpp"
#include "crrlab/corpus.hpp"
#include "crrlab/model.hpp"
#include "crrlab/objective.hpp"
#include "crrlab/rng.hpp"
#include "crrlab/trainer.hpp"

namespace crrlab {

// Synthetic sentences built from a core token C that alone decides the
// label and spurious tokens S whose group correlates with the label in
// training data only. The sentence is the template
//
//   the <aspect> was <core> , <filler> <spurious> <filler> <spurious> .
//
// with one <spurious> per spurious slot. Spurious group g is the group that
// correlates with the polarity whose class index is g.

struct CausalSpec {
  std::array<std::vector<std::string>, kNumClasses> core = {
      std::vector<std::string>{"awful", "bland"},
      std::vector<std::string>{"average", "ordinary"},
      std::vector<std::string>{"excellent", "delicious"}};
  std::vector<std::vector<std::string>> spurious_groups = {
      {"rainy", "downtown", "parking", "tuesday"},
      {"crispy", "fries", "patio", "music"},
      {"window", "lunch", "sunday", "friends"}};
  std::vector<std::string> aspects = {"burger", "service", "pasta", "staff", "decor", "wine"};
  std::vector<std::string> fillers = {"with", "near", "after", "plus", "around", "during"};
  double rho = 0.95;
  std::size_t spurious_slots = 8;
  std::size_t n_train = 600;
  std::size_t n_dev = 300;
  std::size_t n_test = 600;

  /// Throws ConfigError: core/spurious sets must be disjoint and non-empty,
  /// at least one group per class, rho in [0, 1].
  void validate() const;
  std::size_t groups() const { return spurious_groups.size(); }
};

CausalSpec causal_spec_from_json(const std::string& json_text);
std::string causal_spec_to_json(const CausalSpec& spec);

enum class TokenRole : std::uint8_t { kFiller, kAspect, kCore, kSpurious };

struct SimAnnotation {
  std::vector<std::string> tokens;
  std::vector<TokenRole> roles;
  std::vector<int> group;  // spurious group per token, -1 elsewhere
  int spurious_group = 0;  // group the instance's spurious tokens came from
  bool operator==(const SimAnnotation&) const = default;
};

struct SimDataset {
  Dataset data;
  std::vector<SimAnnotation> annotations;  // parallel to data.instances
};

/// Label uniform; core token from core[label]; spurious group equal to the
/// label's group with probability rho, otherwise uniform over all groups.
SimDataset generate(const CausalSpec& spec, std::size_t n, Rng& rng,
                    const std::string& id_prefix = "sim");

/// do(S = value): every spurious token becomes `value`, which must belong
/// to group `group`.
struct Intervention {
  std::size_t group = 0;
  std::string value;
};

/// Every (group, token) pair of the spec, group-major.
std::vector<Intervention> all_interventions(const CausalSpec& spec);

/// Throws ConfigError for an unknown group or a value outside it.
SimDataset intervene(const SimDataset& d, const CausalSpec& spec, const Intervention& iv);
Instance intervene_one(const Instance& inst, const SimAnnotation& ann, const CausalSpec& spec,
                       const Intervention& iv, SimAnnotation* out_ann = nullptr);

/// Per instance, moves the spurious tokens into a group chosen uniformly
/// among those correlated with a different label.
SimDataset intervene_adversarial(const SimDataset& d, const CausalSpec& spec, Rng& rng);

/// Intervention by injection: 1..3 two-token spurious phrases from groups
/// correlated with other labels, in front or behind, label unchanged.
/// Substream per (cfg.seed, instance id).
PairedDataset augment_spurious(const SimDataset& d, const CausalSpec& spec,
                               const AugmentConfig& cfg);

/// Plug-in mutual information (nats) between the spurious group and the
/// label.
double spurious_label_mi(const SimDataset& d, const CausalSpec& spec);

struct InvarianceGap {
  double mean_div = 0.0;
  double max_div = 0.0;
  double mean_tv = 0.0;
  double max_tv = 0.0;
  double flip_rate = 0.0;
  std::size_t pairs = 0;
  bool vacuous = false;  // empty intervention list
};

InvarianceGap invariance_gap(const Model& model, const SimDataset& d, const CausalSpec& spec,
                             std::span<const Intervention> interventions, DivergenceKind kind);

/// A coarsening Y^R -> Y_t of the 3-class task.
struct DerivedTask {
  std::string name;
  std::array<std::size_t, kNumClasses> map{};
  std::size_t labels = 0;
};

struct TaskFamily {
  std::vector<DerivedTask> tasks;
  /// Throws ConfigError unless every map is surjective onto 0..labels-1.
  void validate() const;
  static TaskFamily standard();
};

std::vector<double> pushforward(const PredictionDist& p, const DerivedTask& task);

struct TaskTransfer {
  std::string name;
  double mean_tv = 0.0;
  double max_tv = 0.0;
  std::size_t violations = 0;
};

struct TransferReport {
  double reference_mean_tv = 0.0;
  double reference_max_tv = 0.0;
  std::size_t checked = 0;  // (instance, intervention) pairs
  std::vector<TaskTransfer> tasks;
  std::size_t violations() const;
};

/// For every task, instance and intervention checks
/// TV(push p, push q) <= TV(p, q) + tolerance.
TransferReport verify_transfer(const Model& model, const SimDataset& d, const CausalSpec& spec,
                               std::span<const Intervention> interventions,
                               const TaskFamily& family, double tolerance = 1e-12);

void write_annotations(std::ostream& out, const SimDataset& d);

/// One full synthetic run: data, augmentation, training and evaluation.
struct SimRunConfig {
  CausalSpec spec;
  TrainConfig train;
  ModelConfig model;
  AugmentConfig augment;
  std::uint64_t seed = 0;
};

struct SimRunResult {
  TrainResult trained;
  double iid_accuracy = 0.0;
  double adversarial_accuracy = 0.0;
  InvarianceGap gap;
};

struct SimData {
  SimDataset train;
  SimDataset dev;
  SimDataset test_iid;
  SimDataset test_adversarial;
  PairedDataset train_pairs;
};

/// Draws train/dev/IID-test at rho and an adversarially intervened copy of
/// the IID test set, all from substreams of `seed`.
SimData make_sim_data(const CausalSpec& spec, const AugmentConfig& augment, std::uint64_t seed);

SimRunResult run_sim(const SimRunConfig& cfg, const SimData& data);

/// Settings the benchmark uses unless overridden.
SimRunConfig default_sim_config(Regime regime, std::uint64_t seed);

}  // namespace crrlab
