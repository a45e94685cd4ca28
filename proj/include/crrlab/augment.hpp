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
#include <string>
#include <vector>

#include "crrlab/aspect_bank.hpp"
#include "crrlab/corpus.hpp"
#include "crrlab/rng.hpp"

namespace crrlab {

enum class PositionPolicy : std::uint8_t { kMixed, kRearOnly };
enum class Position : std::uint8_t { kFront, kRear, kNone };
enum class AugmentKind : std::uint8_t { kAddDiffMix, kAddDiff, kRevTgt, kIdentity };

std::string_view to_string(Position p);
std::string_view to_string(AugmentKind k);
std::string_view to_string(PositionPolicy p);

struct AugmentConfig {
  std::size_t min_phrases = 1;
  std::size_t max_phrases = 3;
  double front_probability = 0.5;
  PositionPolicy position_policy = PositionPolicy::kMixed;
  std::string front_opener = "Although ";
  std::string front_closer = ", ";
  std::string rear_opener = ", but ";
  std::string rear_closer = ".";
  std::string joiner = " and ";
  std::uint64_t seed = 0;

  /// Throws ConfigError on a broken invariant.
  void validate() const;
  double effective_front_probability() const {
    return position_policy == PositionPolicy::kRearOnly ? 0.0 : front_probability;
  }
};

struct AugmentedInstance {
  Instance instance;
  std::string source_id;
  Position position = Position::kNone;
  std::vector<OpinionPhrase> injected;
  AugmentKind kind = AugmentKind::kIdentity;
  /// Polarity of the injected phrases (opposite of the target, or the coin
  /// side for neutral targets). Meaningless for identity/RevTgt.
  Polarity injected_polarity = Polarity::kNeutral;
};

struct PairedDataset {
  std::vector<std::pair<Instance, AugmentedInstance>> pairs;
};

struct AugmentAudit {
  std::size_t total = 0;
  std::size_t identity = 0;
  std::size_t front = 0;
  std::size_t rear = 0;
};

/// Original text with trailing whitespace and a final run of . ! ? removed,
/// provided the aspect span stays intact. Rear injections attach here.
std::string sentence_body(const Instance& x);

/// Injects 1..3 opinion phrases of opposite sentiment about aspects absent
/// from `x`, in front of or behind the sentence. Label is unchanged. Falls
/// back to an identity augmentation when no phrase is eligible.
AugmentedInstance add_diff_mix(const Instance& x, const AspectBank& bank,
                               const AugmentConfig& cfg, Rng& rng);

/// Counterfactual flip of the target's sentiment by inserting or removing a
/// negator next to the first matching polar word within 5 tokens of the
/// aspect. Neutral targets and targets without such a word come back as
/// identity.
AugmentedInstance rev_tgt(const Instance& x, const SentimentLexicon& lex);

/// AddDiffMix (AddDiff under rear_only) over every instance. Each instance
/// draws from a substream keyed by (cfg.seed, instance id).
PairedDataset augment_dataset(const Dataset& d, const AspectBank& bank,
                              const AugmentConfig& cfg, AugmentAudit* audit = nullptr);

PairedDataset rev_tgt_dataset(const Dataset& d, const SentimentLexicon& lex,
                              AugmentAudit* audit = nullptr);

AugmentAudit audit(const PairedDataset& p);

void save_pairs(std::ostream& out, const PairedDataset& p);
/// Reads what save_pairs wrote. Throws ParseError/ValidationError.
PairedDataset load_pairs(std::istream& in);

Polarity opposite(Polarity p);

}  // namespace crrlab
