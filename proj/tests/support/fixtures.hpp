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
#include <set>
#include <string>

#include "crrlab/aspect_bank.hpp"
#include "crrlab/augment.hpp"
#include "crrlab/corpus.hpp"
#include "crrlab/text.hpp"

namespace crrlab::testing {

inline std::filesystem::path source_dir() { return CRRLAB_SOURCE_DIR; }

inline Dataset sample_train() {
  return load_dataset(source_dir() / "data/sample/train.jsonl", FileKind::kOriginal,
                      Split::kTrain)
      .dataset;
}

// Empty when `aug` honours the AddDiffMix contract for `x`, else the first
// broken rule.
inline std::string add_diff_mix_violation(const Instance& x, const AugmentedInstance& aug) {
  if (aug.kind == AugmentKind::kIdentity) {
    return aug.instance == x ? "" : "identity result differs from its source";
  }
  if (aug.injected.empty() || aug.injected.size() > 3) return "phrase count outside 1..3";
  if (aug.instance.polarity != x.polarity) return "label changed";
  if (utf8_substr(aug.instance.text, aug.instance.aspect_span.start,
                  aug.instance.aspect_span.end) != x.aspect_term) {
    return "aspect span does not point at the aspect";
  }
  const auto source_tokens = tokenize(x.text);
  std::set<std::string> seen;
  for (const auto& p : aug.injected) {
    if (p.polarity == Polarity::kNeutral) return "neutral phrase injected";
    if (x.polarity != Polarity::kNeutral && p.polarity != opposite(x.polarity)) {
      return "phrase polarity is not opposite";
    }
    if (p.polarity != aug.injected.front().polarity) return "mixed injected polarities";
    const std::string a = normalize_term(p.aspect_term);
    if (a == normalize_term(x.aspect_term)) return "phrase about the target aspect";
    if (contains_token_sequence(source_tokens, tokenize(a))) return "aspect already in text";
    if (!seen.insert(a).second) return "repeated phrase aspect";
    if (aug.instance.text.find(p.text) == std::string::npos) return "phrase missing from text";
  }
  if (aug.position == Position::kFront) {
    if (!aug.instance.text.ends_with(x.text)) return "front result does not end with source";
  } else if (aug.position == Position::kRear) {
    if (!aug.instance.text.starts_with(sentence_body(x))) return "rear result lost its body";
  } else {
    return "non-identity result without a position";
  }
  return "";
}

}  // namespace crrlab::testing
