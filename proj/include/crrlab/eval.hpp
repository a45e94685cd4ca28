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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crrlab/corpus.hpp"

namespace crrlab {

struct Model;

struct PredictionRecord {
  std::string id;
  Polarity gold = Polarity::kNeutral;
  Polarity predicted = Polarity::kNeutral;
  bool correct() const { return gold == predicted; }
};

struct MetricsReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::optional<double> ars;
  std::array<std::size_t, kNumClasses> gold_counts{};
  std::size_t n = 0;
};

struct SubsetRow {
  Strategy strategy = Strategy::kAddDiff;
  std::size_t groups = 0;    // originals that have this variant
  std::size_t variants = 0;
  double original_accuracy = 0.0;
  double variant_accuracy = 0.0;
  double diff = 0.0;         // variant - original
};

struct SubsetReport {
  std::vector<SubsetRow> rows;            // strategies with at least one variant
  std::vector<Strategy> omitted;          // strategies with none
};

/// Throws ConfigError on an empty record set.
double accuracy(std::span<const PredictionRecord> records);

/// Unweighted mean of the three per-class F1 scores; 0/0 counts as 0.
double macro_f1(std::span<const PredictionRecord> records);

/// Fraction of groups whose original and every present variant are
/// predicted correctly. Throws DataError naming a member without a record.
double ars(std::span<const VariantGroup> groups, std::span<const PredictionRecord> records);

/// Per strategy: accuracy on the originals that have such a variant, on the
/// variants themselves, and the difference.
SubsetReport subset_analysis(std::span<const VariantGroup> groups,
                             std::span<const PredictionRecord> records);

MetricsReport metrics(std::span<const PredictionRecord> records);

std::vector<PredictionRecord> predict_records(const Model& model,
                                              std::span<const Instance> instances);

/// Every original and variant instance of `d`, originals first.
std::vector<Instance> all_members(const Dataset& d);

std::string metrics_json(const MetricsReport& original, const std::optional<MetricsReport>& arts,
                         const std::optional<SubsetReport>& subsets);
/// Aligned text table: F1 / Acc for the original set, plus F1 / Acc / ARS
/// for the variant set when present.
std::string metrics_table(const std::string& name, const MetricsReport& original,
                          const std::optional<MetricsReport>& arts);
std::string subset_table(const SubsetReport& report);

}  // namespace crrlab
