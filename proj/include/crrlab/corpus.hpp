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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crrlab {

/// Sentiment toward one aspect. The numeric order is the model's class
/// order and the argmax tie-break order.
enum class Polarity : std::uint8_t { kNegative = 0, kNeutral = 1, kPositive = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<Polarity, kNumClasses> kAllPolarities = {
    Polarity::kNegative, Polarity::kNeutral, Polarity::kPositive};

std::string_view to_string(Polarity p);
/// Accepts "positive" | "negative" | "neutral". Returns nullopt otherwise,
/// including for "conflict".
std::optional<Polarity> parse_polarity(std::string_view s);
inline std::size_t index_of(Polarity p) { return static_cast<std::size_t>(p); }

/// ARTs generation strategies.
enum class Strategy : std::uint8_t { kRevTgt = 0, kRevNon = 1, kAddDiff = 2 };

inline constexpr std::array<Strategy, 3> kAllStrategies = {Strategy::kRevTgt, Strategy::kRevNon,
                                                           Strategy::kAddDiff};

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view s);

/// Code-point span [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

struct Instance {
  std::string id;
  std::string text;
  std::string aspect_term;
  Span aspect_span;
  Polarity polarity = Polarity::kNeutral;
  bool operator==(const Instance&) const = default;
};

struct VariantRecord {
  std::string source_id;
  Strategy strategy = Strategy::kAddDiff;
  Instance instance;
  bool operator==(const VariantRecord&) const = default;
};

enum class Split : std::uint8_t { kTrain, kDev, kTest };
std::string_view to_string(Split s);

struct Dataset {
  std::string name;
  Split split = Split::kTrain;
  std::vector<Instance> instances;
  std::optional<std::vector<VariantRecord>> variants;
  bool operator==(const Dataset&) const = default;
};

enum class FileKind : std::uint8_t { kOriginal, kArts };

/// One parsed JSONL line before polarity filtering.
struct RawRecord {
  std::size_t line = 0;
  std::string id;
  std::string text;
  std::string aspect_term;
  std::size_t from = 0;
  std::size_t to = 0;
  std::string polarity;
  std::optional<std::string> source_id;
  std::optional<std::string> strategy;
  bool operator==(const RawRecord&) const = default;
};

struct LoadResult {
  Dataset dataset;
  std::size_t dropped_conflict = 0;
};

/// Throws ValidationError unless `inst` satisfies the span and text
/// invariants.
void validate_instance(const Instance& inst);

std::vector<RawRecord> parse_records(std::istream& in);

/// Drops every record whose polarity is "conflict".
std::vector<RawRecord> remove_conflicts(std::vector<RawRecord> records);

/// Builds and validates a Dataset. `records` must already be conflict-free.
/// Variant records (carrying source_id) are only allowed for kArts.
Dataset build_dataset(const std::vector<RawRecord>& records, FileKind kind, std::string name,
                      Split split);

LoadResult load_dataset(std::istream& in, FileKind kind, std::string name = "",
                        Split split = Split::kTest);
LoadResult load_dataset(const std::filesystem::path& path, FileKind kind,
                        Split split = Split::kTest);

/// Writes originals first, then variants, one JSON object per line.
void save_dataset(std::ostream& out, const Dataset& d);
void save_dataset(const std::filesystem::path& path, const Dataset& d);

std::string instance_to_json_line(const Instance& inst);

/// Seeded split stratified by polarity. Dev receives round(n * fraction)
/// instances, apportioned over classes by largest remainder. Both outputs
/// keep the input order.
std::pair<Dataset, Dataset> split_train_dev(const Dataset& d, double dev_fraction,
                                            std::uint64_t seed);

/// An original test question plus its ARTs variants.
struct VariantGroup {
  std::string source_id;
  Instance original;
  std::vector<VariantRecord> variants;  // dataset order

  std::size_t size() const { return 1 + variants.size(); }
};

/// One group per original instance, in dataset order. A dataset without
/// variants yields singleton groups.
std::vector<VariantGroup> group_variants(const Dataset& d);

}  // namespace crrlab
