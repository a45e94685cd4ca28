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

#include "crrlab/augment.hpp"

#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "crrlab/error.hpp"
#include "crrlab/text.hpp"

namespace crrlab {

using nlohmann::json;

std::string_view to_string(Position p) {
  switch (p) {
    case Position::kFront:
      return "front";
    case Position::kRear:
      return "rear";
    case Position::kNone:
      return "none";
  }
  return "?";
}

std::string_view to_string(AugmentKind k) {
  switch (k) {
    case AugmentKind::kAddDiffMix:
      return "AddDiffMix";
    case AugmentKind::kAddDiff:
      return "AddDiff";
    case AugmentKind::kRevTgt:
      return "RevTgt";
    case AugmentKind::kIdentity:
      return "identity";
  }
  return "?";
}

std::string_view to_string(PositionPolicy p) {
  return p == PositionPolicy::kMixed ? "mixed" : "rear_only";
}

Polarity opposite(Polarity p) {
  switch (p) {
    case Polarity::kPositive:
      return Polarity::kNegative;
    case Polarity::kNegative:
      return Polarity::kPositive;
    case Polarity::kNeutral:
      break;
  }
  return Polarity::kNeutral;
}

void AugmentConfig::validate() const {
  if (!(1 <= min_phrases && min_phrases <= max_phrases && max_phrases <= 3)) {
    throw ConfigError("augment phrase counts must satisfy 1 <= min <= max <= 3");
  }
  if (!(front_probability >= 0.0 && front_probability <= 1.0)) {
    throw ConfigError("front_probability must lie in [0, 1]");
  }
}

namespace {

AugmentedInstance identity_of(const Instance& x) {
  AugmentedInstance a;
  a.instance = x;
  a.source_id = x.id;
  a.position = Position::kNone;
  a.kind = AugmentKind::kIdentity;
  return a;
}

// Replaces code points [begin, end) of `text` with `replacement`.
std::string splice(const std::string& text, std::size_t begin, std::size_t end,
                   const std::string& replacement) {
  const std::size_t b = utf8_byte_offset(text, begin);
  const std::size_t e = utf8_byte_offset(text, end);
  return text.substr(0, b) + replacement + text.substr(e);
}

}  // namespace

std::string sentence_body(const Instance& x) {
  const std::size_t keep_bytes = utf8_byte_offset(x.text, x.aspect_span.end);
  std::size_t n = x.text.size();
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  auto is_final = [](char c) { return c == '.' || c == '!' || c == '?'; };
  while (n > keep_bytes && is_space(x.text[n - 1])) --n;
  while (n > keep_bytes && is_final(x.text[n - 1])) --n;
  while (n > keep_bytes && is_space(x.text[n - 1])) --n;
  return x.text.substr(0, n);
}

AugmentedInstance add_diff_mix(const Instance& x, const AspectBank& bank,
                               const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  const Polarity want = x.polarity == Polarity::kNeutral
                            ? (bernoulli(rng, 0.5) ? Polarity::kPositive : Polarity::kNegative)
                            : opposite(x.polarity);
  const std::size_t k =
      cfg.min_phrases + uniform_index(rng, cfg.max_phrases - cfg.min_phrases + 1);

  std::unordered_set<std::string> exclude{normalize_term(x.aspect_term)};
  const auto text_tokens = tokenize(x.text);
  for (const auto& aspect : bank.aspects()) {
    if (contains_token_sequence(text_tokens, tokenize(aspect))) exclude.insert(aspect);
  }
  auto sample = sample_phrases(bank, want, exclude, k, rng);
  if (!sample) return identity_of(x);

  const bool front = bernoulli(rng, cfg.effective_front_probability());

  std::string joined;
  for (std::size_t i = 0; i < sample.phrases.size(); ++i) {
    if (i) joined += cfg.joiner;
    joined += sample.phrases[i].text;
  }

  AugmentedInstance out;
  out.source_id = x.id;
  out.injected = std::move(sample.phrases);
  out.injected_polarity = want;
  out.kind = cfg.position_policy == PositionPolicy::kRearOnly ? AugmentKind::kAddDiff
                                                              : AugmentKind::kAddDiffMix;
  out.instance = x;
  out.instance.id = x.id + "#aug";
  if (front) {
    const std::string prefix = cfg.front_opener + joined + cfg.front_closer;
    const std::size_t shift = utf8_length(prefix);
    out.instance.text = prefix + x.text;
    out.instance.aspect_span = Span{x.aspect_span.start + shift, x.aspect_span.end + shift};
    out.position = Position::kFront;
  } else {
    out.instance.text = sentence_body(x) + cfg.rear_opener + joined + cfg.rear_closer;
    out.position = Position::kRear;
  }
  return out;
}

AugmentedInstance rev_tgt(const Instance& x, const SentimentLexicon& lex) {
  if (x.polarity == Polarity::kNeutral) return identity_of(x);
  constexpr std::size_t kReach = 5;
  const auto tokens = tokenize_with_offsets(x.text);
  const auto [a0, a1] = token_range(tokens, x.aspect_span.start, x.aspect_span.end);
  if (a0 == a1) return identity_of(x);
  const std::size_t lo = a0 >= kReach ? a0 - kReach : 0;
  const std::size_t hi = std::min(tokens.size(), a1 + kReach);

  for (std::size_t i = lo; i < hi; ++i) {
    if (i >= a0 && i < a1) continue;
    const auto lexical = lex.polarity(tokens[i].text);
    if (!lexical) continue;
    const bool negated =
        i > 0 && lex.is_negator(tokens[i - 1].text) && !(i - 1 >= a0 && i - 1 < a1);
    const Polarity effective = negated ? opposite(*lexical) : *lexical;
    if (effective != x.polarity) continue;

    AugmentedInstance out;
    out.source_id = x.id;
    out.kind = AugmentKind::kRevTgt;
    out.position = Position::kNone;
    out.instance = x;
    out.instance.id = x.id + "#revtgt";
    out.instance.polarity = opposite(x.polarity);
    std::size_t at;
    long delta;
    if (negated) {
      at = tokens[i - 1].begin;
      const std::size_t until = tokens[i].begin;
      out.instance.text = splice(x.text, at, until, "");
      delta = -static_cast<long>(until - at);
    } else {
      at = tokens[i].begin;
      out.instance.text = splice(x.text, at, at, "not ");
      delta = 4;
    }
    if (at < x.aspect_span.start) {
      auto shift = [delta](std::size_t v) {
        return static_cast<std::size_t>(static_cast<long>(v) + delta);
      };
      out.instance.aspect_span.start = shift(x.aspect_span.start);
      out.instance.aspect_span.end = shift(x.aspect_span.end);
    }
    return out;
  }
  return identity_of(x);
}

AugmentAudit audit(const PairedDataset& p) {
  AugmentAudit a;
  for (const auto& [orig, aug] : p.pairs) {
    ++a.total;
    if (aug.kind == AugmentKind::kIdentity) ++a.identity;
    if (aug.position == Position::kFront) ++a.front;
    if (aug.position == Position::kRear) ++a.rear;
  }
  return a;
}

PairedDataset augment_dataset(const Dataset& d, const AspectBank& bank,
                              const AugmentConfig& cfg, AugmentAudit* out_audit) {
  cfg.validate();
  PairedDataset out;
  out.pairs.reserve(d.instances.size());
  for (const auto& x : d.instances) {
    Rng rng(substream_seed(cfg.seed, "augment", x.id));
    out.pairs.emplace_back(x, add_diff_mix(x, bank, cfg, rng));
  }
  if (out_audit) *out_audit = audit(out);
  return out;
}

PairedDataset rev_tgt_dataset(const Dataset& d, const SentimentLexicon& lex,
                              AugmentAudit* out_audit) {
  PairedDataset out;
  out.pairs.reserve(d.instances.size());
  for (const auto& x : d.instances) out.pairs.emplace_back(x, rev_tgt(x, lex));
  if (out_audit) *out_audit = audit(out);
  return out;
}

namespace {

json to_json(const Instance& i) {
  return json{{"id", i.id},
              {"text", i.text},
              {"aspect_term", i.aspect_term},
              {"from", i.aspect_span.start},
              {"to", i.aspect_span.end},
              {"polarity", std::string(to_string(i.polarity))}};
}

Instance instance_from_json(const json& j) {
  Instance i;
  i.id = j.at("id").get<std::string>();
  i.text = j.at("text").get<std::string>();
  i.aspect_term = j.at("aspect_term").get<std::string>();
  i.aspect_span = Span{j.at("from").get<std::size_t>(), j.at("to").get<std::size_t>()};
  auto p = parse_polarity(j.at("polarity").get<std::string>());
  if (!p) throw ValidationError(i.id, "bad polarity");
  i.polarity = *p;
  validate_instance(i);
  return i;
}

template <typename E, std::size_t N>
E enum_from(const std::string& s, const std::array<E, N>& all) {
  for (E e : all) {
    if (to_string(e) == s) return e;
  }
  throw DataError("unknown value '" + s + "'");
}

}  // namespace

void save_pairs(std::ostream& out, const PairedDataset& p) {
  for (const auto& [orig, aug] : p.pairs) {
    json injected = json::array();
    for (const auto& ph : aug.injected) {
      injected.push_back(json{{"text", ph.text},
                              {"aspect_term", ph.aspect_term},
                              {"polarity", std::string(to_string(ph.polarity))},
                              {"source_id", ph.source_id}});
    }
    json j{{"source_id", aug.source_id},
           {"kind", std::string(to_string(aug.kind))},
           {"position", std::string(to_string(aug.position))},
           {"injected_polarity", std::string(to_string(aug.injected_polarity))},
           {"injected", injected},
           {"original", to_json(orig)},
           {"augmented", to_json(aug.instance)}};
    out << j.dump() << '\n';
  }
}

PairedDataset load_pairs(std::istream& in) {
  static constexpr std::array kKinds = {AugmentKind::kAddDiffMix, AugmentKind::kAddDiff,
                                        AugmentKind::kRevTgt, AugmentKind::kIdentity};
  static constexpr std::array kPositions = {Position::kFront, Position::kRear, Position::kNone};
  PairedDataset out;
  std::string line;
  std::size_t lineno = 0;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (normalize_whitespace(line).empty()) continue;
    try {
      const json j = json::parse(line);
      Instance orig = instance_from_json(j.at("original"));
      AugmentedInstance aug;
      aug.instance = instance_from_json(j.at("augmented"));
      aug.source_id = j.at("source_id").get<std::string>();
      aug.kind = enum_from(j.at("kind").get<std::string>(), kKinds);
      aug.position = enum_from(j.at("position").get<std::string>(), kPositions);
      aug.injected_polarity = *parse_polarity(j.at("injected_polarity").get<std::string>());
      for (const auto& ph : j.at("injected")) {
        aug.injected.push_back(OpinionPhrase{ph.at("text").get<std::string>(),
                                             ph.at("aspect_term").get<std::string>(),
                                             *parse_polarity(ph.at("polarity").get<std::string>()),
                                             ph.at("source_id").get<std::string>()});
      }
      if (aug.source_id != orig.id) throw ValidationError(orig.id, "pair source_id mismatch");
      if (!seen.insert(orig.id).second) throw ValidationError(orig.id, "original paired twice");
      out.pairs.emplace_back(std::move(orig), std::move(aug));
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

}  // namespace crrlab
