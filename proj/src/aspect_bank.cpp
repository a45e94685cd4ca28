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

#include "crrlab/aspect_bank.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "crrlab/error.hpp"
#include "crrlab/text.hpp"

namespace crrlab {

extern const char* const kBundledLexicon;  // generated from data/lexicon.tsv

SentimentLexicon SentimentLexicon::parse(std::istream& in) {
  SentimentLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (normalize_whitespace(line).empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("lexicon line " + std::to_string(lineno) + ": expected token<TAB>category");
    }
    std::string token = ascii_lower(normalize_whitespace(line.substr(0, tab)));
    const std::string category = normalize_whitespace(line.substr(tab + 1));
    try {
      if (category == "positive") {
        lex.add(std::move(token), Polarity::kPositive);
      } else if (category == "negative") {
        lex.add(std::move(token), Polarity::kNegative);
      } else if (category == "negator") {
        lex.add_negator(std::move(token));
      } else {
        throw DataError("unknown category '" + category + "'");
      }
    } catch (const DataError& e) {
      throw DataError("lexicon line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return lex;
}

SentimentLexicon SentimentLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon " + path.string());
  return parse(in);
}

const SentimentLexicon& SentimentLexicon::bundled() {
  static const SentimentLexicon lex = [] {
    std::istringstream in(kBundledLexicon);
    return parse(in);
  }();
  return lex;
}

void SentimentLexicon::add(std::string token, Polarity polarity) {
  if (polarity == Polarity::kNeutral) throw DataError("lexicon entries must be polar");
  if (negators_.count(token)) throw DataError("'" + token + "' is already a negator");
  auto& mine = polarity == Polarity::kPositive ? positive_ : negative_;
  auto& other = polarity == Polarity::kPositive ? negative_ : positive_;
  if (other.count(token)) throw DataError("'" + token + "' listed as both positive and negative");
  mine.insert(std::move(token));
}

void SentimentLexicon::add_negator(std::string token) {
  if (positive_.count(token) || negative_.count(token)) {
    throw DataError("negator '" + token + "' is also a polar word");
  }
  negators_.insert(std::move(token));
}

std::optional<Polarity> SentimentLexicon::polarity(std::string_view token) const {
  const std::string key(token);
  if (positive_.count(key)) return Polarity::kPositive;
  if (negative_.count(key)) return Polarity::kNegative;
  return std::nullopt;
}

bool SentimentLexicon::is_negator(std::string_view token) const {
  return negators_.count(std::string(token)) > 0;
}

bool AspectBank::add(OpinionPhrase phrase) {
  if (phrase.polarity == Polarity::kNeutral) {
    throw ConfigError("opinion phrases must be positive or negative");
  }
  const auto tokens = tokenize(phrase.text);
  if (tokens.size() < kMinPhraseTokens || tokens.size() > kMaxPhraseTokens) {
    throw ConfigError("opinion phrase must have 2..20 tokens: '" + phrase.text + "'");
  }
  if (!contains_token_sequence(tokens, tokenize(phrase.aspect_term))) {
    throw ConfigError("opinion phrase '" + phrase.text + "' does not contain its aspect '" +
                      phrase.aspect_term + "'");
  }
  const std::string aspect = normalize_term(phrase.aspect_term);
  if (!seen_.emplace(phrase.text, aspect).second) return false;

  const std::size_t idx = phrases_.size();
  (phrase.polarity == Polarity::kPositive ? positive_ : negative_).push_back(idx);
  auto [it, inserted] = aspect_index_.try_emplace(aspect);
  if (inserted) aspect_order_.push_back(aspect);
  it->second.push_back(idx);
  phrases_.push_back(std::move(phrase));
  return true;
}

const std::vector<std::size_t>& AspectBank::by_polarity(Polarity p) const {
  switch (p) {
    case Polarity::kPositive:
      return positive_;
    case Polarity::kNegative:
      return negative_;
    case Polarity::kNeutral:
      break;
  }
  return neutral_;
}

std::vector<std::size_t> AspectBank::by_aspect(std::string_view normalized_aspect) const {
  auto it = aspect_index_.find(std::string(normalized_aspect));
  return it == aspect_index_.end() ? std::vector<std::size_t>{} : it->second;
}

void AspectBank::save_jsonl(std::ostream& out) const {
  for (const auto& p : phrases_) {
    nlohmann::json j{{"text", p.text},
                     {"aspect_term", p.aspect_term},
                     {"polarity", std::string(to_string(p.polarity))},
                     {"source_id", p.source_id}};
    out << j.dump() << '\n';
  }
}

namespace {

bool is_sentence_break(std::string_view tok) {
  return tok == "." || tok == "!" || tok == "?" || tok == ";";
}

}  // namespace

AspectBank build_bank(const Dataset& d, const SentimentLexicon& lex, std::size_t window,
                      BankStats* stats) {
  if (window < 2) throw ConfigError("bank window must be at least 2 tokens");
  BankStats local;
  AspectBank bank;
  for (const auto& inst : d.instances) {
    if (inst.polarity == Polarity::kNeutral) continue;
    ++local.considered;
    const auto tokens = tokenize_with_offsets(inst.text);
    const auto [a0, a1] = token_range(tokens, inst.aspect_span.start, inst.aspect_span.end);
    if (a0 == a1) {
      ++local.skipped_length;
      continue;
    }
    std::size_t left = a0 >= window ? a0 - window : 0;
    std::size_t right = std::min(tokens.size(), a1 + window);
    for (std::size_t i = a0; i > left; --i) {
      if (is_sentence_break(tokens[i - 1].text)) {
        left = i;
        break;
      }
    }
    for (std::size_t i = a1; i < right; ++i) {
      if (is_sentence_break(tokens[i].text)) {
        right = i;
        break;
      }
    }
    while (left < a0 && is_punctuation_token(tokens[left].text)) ++left;
    while (right > a1 && is_punctuation_token(tokens[right - 1].text)) --right;

    bool has_polar = false;
    for (std::size_t i = left; i < right && !has_polar; ++i) {
      has_polar = lex.polarity(tokens[i].text).has_value();
    }
    if (!has_polar) {
      ++local.skipped_no_lexicon;
      continue;
    }
    const std::size_t count = right - left;
    if (count < kMinPhraseTokens || count > kMaxPhraseTokens) {
      ++local.skipped_length;
      continue;
    }
    OpinionPhrase phrase{utf8_substr(inst.text, tokens[left].begin, tokens[right - 1].end),
                         normalize_whitespace(inst.aspect_term), inst.polarity, inst.id};
    if (!bank.add(std::move(phrase))) ++local.duplicates;
  }
  if (stats) *stats = local;
  return bank;
}

PhraseSample sample_phrases(const AspectBank& bank, Polarity want,
                            const std::unordered_set<std::string>& exclude_aspects,
                            std::size_t n, Rng& rng) {
  if (want == Polarity::kNeutral) throw ConfigError("cannot sample neutral phrases");
  if (n < 1 || n > 3) throw ConfigError("phrase count must be 1..3");

  std::vector<std::size_t> eligible;
  for (std::size_t idx : bank.by_polarity(want)) {
    if (!exclude_aspects.count(normalize_term(bank.phrases()[idx].aspect_term))) {
      eligible.push_back(idx);
    }
  }
  PhraseSample out;
  if (eligible.empty()) return out;

  // Partial Fisher-Yates: each accepted draw is uniform over the phrases
  // whose aspect has not been taken yet.
  std::unordered_set<std::string> taken;
  std::size_t live = eligible.size();
  while (out.phrases.size() < n && live > 0) {
    const std::size_t k = uniform_index(rng, live);
    const std::size_t idx = eligible[k];
    eligible[k] = eligible[live - 1];
    --live;
    const auto& phrase = bank.phrases()[idx];
    if (!taken.insert(normalize_term(phrase.aspect_term)).second) continue;
    out.phrases.push_back(phrase);
  }
  out.status = out.phrases.size() == n ? SampleStatus::kOk : SampleStatus::kPartial;
  return out;
}

}  // namespace crrlab
