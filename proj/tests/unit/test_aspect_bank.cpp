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


#include <doctest.h>

#include <map>
#include <sstream>

#include "crrlab/aspect_bank.hpp"
#include "crrlab/error.hpp"
#include "crrlab/text.hpp"

using namespace crrlab;

namespace {

Instance inst(const std::string& id, const std::string& text, const std::string& aspect,
              Polarity p) {
  const std::size_t at = text.find(aspect);
  return {id, text, aspect, {at, at + aspect.size()}, p};
}

// 4 positive, 4 negative, 2 neutral.
Dataset fixture() {
  Dataset d;
  d.instances = {
      inst("p1", "Food at a reasonable price.", "Food", Polarity::kPositive),
      inst("p2", "The staff were friendly and attentive.", "staff", Polarity::kPositive),
      inst("p3", "Great sushi; the rice was sticky.", "sushi", Polarity::kPositive),
      inst("p4", "We came back because the view is lovely, the music too.", "music",
           Polarity::kPositive),
      inst("n1", "The waiter was rude.", "waiter", Polarity::kNegative),
      inst("n2", "Honestly, the soup was cold!", "soup", Polarity::kNegative),
      inst("n3", "The waiter was rude.", "waiter", Polarity::kNegative),
      inst("n4", "The chairs are purple.", "chairs", Polarity::kNegative),
      inst("u1", "The menu changes weekly.", "menu", Polarity::kNeutral),
      inst("u2", "We sat at the counter.", "counter", Polarity::kNeutral),
  };
  return d;
}

}  // namespace

TEST_CASE("lexicon parsing") {
  std::istringstream in("# comment\ngood\tpositive\n\nbad\tnegative\nnot\tnegator\n");
  const auto lex = SentimentLexicon::parse(in);
  CHECK(lex.polarity("good") == Polarity::kPositive);
  CHECK(lex.polarity("bad") == Polarity::kNegative);
  CHECK_FALSE(lex.polarity("food"));
  CHECK(lex.is_negator("not"));

  std::istringstream clash("good\tpositive\ngood\tnegative\n");
  CHECK_THROWS_AS(SentimentLexicon::parse(clash), DataError);
  std::istringstream bad("good\tmaybe\n");
  CHECK_THROWS_AS(SentimentLexicon::parse(bad), DataError);
}

TEST_CASE("bundled lexicon is loaded") {
  const auto& lex = SentimentLexicon::bundled();
  CHECK(lex.positive_count() > 100);
  CHECK(lex.negative_count() > 100);
  CHECK(lex.polarity("reasonable") == Polarity::kPositive);
  CHECK(lex.is_negator("not"));
}

TEST_CASE("bank matches the hand enumeration") {
  BankStats stats;
  const AspectBank bank = build_bank(fixture(), SentimentLexicon::bundled(), 5, &stats);
  // Worked out by hand: sentence breaks cut the window, edge punctuation is
  // trimmed, n3 duplicates n1, n4 has no polar word, neutrals are skipped.
  const std::vector<std::pair<std::string, std::string>> expected = {
      {"Food at a reasonable price", "Food"},
      {"The staff were friendly and attentive", "staff"},
      {"Great sushi", "sushi"},
      {"view is lovely, the music too", "music"},
      {"The waiter was rude", "waiter"},
      {"Honestly, the soup was cold", "soup"},
  };
  REQUIRE(bank.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(bank.phrases()[i].text == expected[i].first);
    CHECK(bank.phrases()[i].aspect_term == expected[i].second);
  }
  CHECK(stats.considered == 8);
  CHECK(stats.duplicates == 1);
  CHECK(stats.skipped_no_lexicon == 1);
  CHECK(stats.skipped_length == 0);
  CHECK(bank.by_polarity(Polarity::kPositive).size() == 4);
  CHECK(bank.by_polarity(Polarity::kNegative).size() == 2);
  CHECK(bank.phrases()[0].polarity == Polarity::kPositive);
  CHECK(bank.aspects().front() == "food");
}

TEST_CASE("bank window must be at least two") {
  CHECK_THROWS_AS(build_bank(fixture(), SentimentLexicon::bundled(), 1), ConfigError);
  CHECK(build_bank(Dataset{}, SentimentLexicon::bundled(), 5).empty());
}

TEST_CASE("sampling respects polarity, exclusions and distinct aspects") {
  AspectBank bank;
  bank.add({"the pasta was great", "pasta", Polarity::kPositive, "a"});
  bank.add({"great pasta again", "pasta", Polarity::kPositive, "b"});
  bank.add({"lovely decor", "decor", Polarity::kPositive, "c"});
  bank.add({"rude waiter", "waiter", Polarity::kNegative, "d"});
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = sample_phrases(bank, Polarity::kPositive, {}, 3, rng);
    REQUIRE(s.status == SampleStatus::kPartial);
    REQUIRE(s.phrases.size() == 2);
    CHECK(normalize_term(s.phrases[0].aspect_term) != normalize_term(s.phrases[1].aspect_term));
    for (const auto& p : s.phrases) CHECK(p.polarity == Polarity::kPositive);
  }
  const auto only = sample_phrases(bank, Polarity::kPositive, {"pasta"}, 1, rng);
  REQUIRE(only.status == SampleStatus::kOk);
  CHECK(only.phrases[0].aspect_term == "decor");
  const auto none = sample_phrases(bank, Polarity::kNegative, {"waiter"}, 1, rng);
  CHECK(none.status == SampleStatus::kNoneEligible);
  CHECK_THROWS_AS(sample_phrases(bank, Polarity::kNeutral, {}, 1, rng), ConfigError);
  CHECK_THROWS_AS(sample_phrases(bank, Polarity::kPositive, {}, 4, rng), ConfigError);
}

TEST_CASE("sampling is uniform over eligible phrases") {
  AspectBank bank;
  const char* aspects[] = {"pasta", "decor", "wine", "bread"};
  for (const char* a : aspects) {
    bank.add({std::string("good ") + a, a, Polarity::kPositive, a});
  }
  Rng rng(11);
  std::map<std::string, int> hits;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    ++hits[sample_phrases(bank, Polarity::kPositive, {}, 1, rng).phrases[0].aspect_term];
  }
  for (const char* a : aspects) CHECK(std::abs(hits[a] / double(trials) - 0.25) < 0.02);
}

TEST_CASE("bank rejects phrases that break invariants") {
  AspectBank bank;
  CHECK_THROWS_AS(bank.add({"okay food", "food", Polarity::kNeutral, "x"}), ConfigError);
  CHECK_THROWS_AS(bank.add({"food", "food", Polarity::kPositive, "x"}), ConfigError);
  CHECK_THROWS_AS(bank.add({"good wine", "food", Polarity::kPositive, "x"}), ConfigError);
  CHECK(bank.add({"good food", "food", Polarity::kPositive, "x"}));
  CHECK_FALSE(bank.add({"good food", "Food", Polarity::kPositive, "y"}));
}
