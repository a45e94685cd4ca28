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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "crrlab/corpus.hpp"
#include "crrlab/rng.hpp"

namespace crrlab {

/// Polar word list plus negators. Keys are lowercased tokens.
class SentimentLexicon {
 public:
  SentimentLexicon() = default;

  /// Parses "token<TAB>positive|negative|negator" lines. Blank lines and
  /// lines starting with '#' are skipped. Throws DataError on a malformed
  /// line or on a token listed under two categories.
  static SentimentLexicon parse(std::istream& in);
  static SentimentLexicon load(const std::filesystem::path& path);
  /// The word list shipped with the library.
  static const SentimentLexicon& bundled();

  void add(std::string token, Polarity polarity);
  void add_negator(std::string token);

  /// kPositive / kNegative for polar tokens, nullopt otherwise.
  std::optional<Polarity> polarity(std::string_view token) const;
  bool is_negator(std::string_view token) const;

  std::size_t positive_count() const { return positive_.size(); }
  std::size_t negative_count() const { return negative_.size(); }
  std::size_t negator_count() const { return negators_.size(); }

 private:
  std::unordered_set<std::string> positive_;
  std::unordered_set<std::string> negative_;
  std::unordered_set<std::string> negators_;
};

/// An aspect-anchored opinion phrase from the training data.
struct OpinionPhrase {
  std::string text;
  std::string aspect_term;
  Polarity polarity = Polarity::kPositive;
  std::string source_id;
  bool operator==(const OpinionPhrase&) const = default;
};

struct BankStats {
  std::size_t considered = 0;      // polar training instances
  std::size_t skipped_no_lexicon = 0;
  std::size_t skipped_length = 0;  // outside 2..20 tokens
  std::size_t duplicates = 0;
};

/// Sampling pool of opinion phrases, indexed by polarity and by normalized
/// aspect term. Insertion order is the stable order.
class AspectBank {
 public:
  /// Adds a phrase; returns false for a duplicate (text, aspect) pair.
  /// Throws ConfigError if the phrase breaks an OpinionPhrase invariant.
  bool add(OpinionPhrase phrase);

  const std::vector<OpinionPhrase>& phrases() const { return phrases_; }
  std::size_t size() const { return phrases_.size(); }
  bool empty() const { return phrases_.empty(); }
  const std::vector<std::size_t>& by_polarity(Polarity p) const;
  /// Distinct normalized aspect terms in first-seen order.
  const std::vector<std::string>& aspects() const { return aspect_order_; }
  std::vector<std::size_t> by_aspect(std::string_view normalized_aspect) const;

  void save_jsonl(std::ostream& out) const;

 private:
  std::vector<OpinionPhrase> phrases_;
  std::set<std::pair<std::string, std::string>> seen_;
  std::vector<std::size_t> positive_;
  std::vector<std::size_t> negative_;
  std::vector<std::size_t> neutral_;  // always empty
  std::map<std::string, std::vector<std::size_t>> aspect_index_;
  std::vector<std::string> aspect_order_;
};

inline constexpr std::size_t kMinPhraseTokens = 2;
inline constexpr std::size_t kMaxPhraseTokens = 20;

/// Extracts a ±window token phrase around each polar instance's aspect,
/// cut at sentence punctuation (. ! ? ;). The phrase takes the instance's
/// gold polarity; neutral instances and windows without any lexicon token
/// are skipped. Throws ConfigError when window < 2.
AspectBank build_bank(const Dataset& d, const SentimentLexicon& lex, std::size_t window,
                      BankStats* stats = nullptr);

enum class SampleStatus { kOk, kPartial, kNoneEligible };

struct PhraseSample {
  std::vector<OpinionPhrase> phrases;
  SampleStatus status = SampleStatus::kNoneEligible;
  explicit operator bool() const { return status != SampleStatus::kNoneEligible; }
};

/// Uniform sample without replacement of min(n, available) phrases with the
/// requested polarity, excluded aspects removed and aspect terms pairwise
/// distinct. Throws ConfigError if want is neutral or n is outside 1..3.
PhraseSample sample_phrases(const AspectBank& bank, Polarity want,
                            const std::unordered_set<std::string>& exclude_aspects,
                            std::size_t n, Rng& rng);

}  // namespace crrlab
