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

#include <sstream>

#include "crrlab/causal_sim.hpp"
#include "crrlab/error.hpp"
#include "crrlab/trainer.hpp"

using namespace crrlab;

namespace {

struct Fixture {
  CausalSpec spec;
  SimData data;
  Model init;
};

Fixture small_fixture(std::uint64_t seed) {
  Fixture f;
  f.spec.n_train = 150;
  f.spec.n_dev = 60;
  f.spec.n_test = 60;
  AugmentConfig aug;
  aug.seed = seed;
  f.data = make_sim_data(f.spec, aug, seed);
  std::vector<std::string> texts;
  for (const auto& [o, a] : f.data.train_pairs.pairs) {
    texts.push_back(o.text);
    texts.push_back(a.instance.text);
  }
  f.init = make_model(ModelConfig{16, 16, 0.1, 0.1}, texts, seed);
  return f;
}

TrainConfig quick(Regime r) {
  TrainConfig c;
  c.regime = r;
  c.epochs = 4;
  c.batch_size = 32;
  c.lr = 3e-3;
  return c;
}

}  // namespace

TEST_CASE("training is deterministic in the seed") {
  const Fixture f = small_fixture(1);
  const auto a = train(f.init, f.data.train_pairs, f.data.dev.data, quick(Regime::kCrr));
  const auto b = train(f.init, f.data.train_pairs, f.data.dev.data, quick(Regime::kCrr));
  CHECK(a.model.params == b.model.params);
  std::ostringstream la, lb;
  write_training_log(la, a.report);
  write_training_log(lb, b.report);
  CHECK(la.str() == lb.str());
  TrainConfig other = quick(Regime::kCrr);
  other.seed = 99;
  const auto c = train(f.init, f.data.train_pairs, f.data.dev.data, other);
  CHECK_FALSE(c.model.params == a.model.params);
}

TEST_CASE("training log has one row per epoch") {
  const Fixture f = small_fixture(2);
  const auto r = train(f.init, f.data.train_pairs, f.data.dev.data, quick(Regime::kCrr));
  std::ostringstream os;
  write_training_log(os, r.report);
  const std::string log = os.str();
  CHECK(log.starts_with("epoch,mean_ce,mean_div,summed_div,dev_metric\n"));
  CHECK(std::count(log.begin(), log.end(), '\n') == 5);
  CHECK(r.report.epochs.size() == 4);
  CHECK(r.report.best_epoch >= 1);
  for (const auto& e : r.report.epochs) CHECK(e.summed_div >= 0.0);
}

TEST_CASE("learning improves the dev score") {
  const Fixture f = small_fixture(3);
  TrainConfig c = quick(Regime::kBaseline);
  c.epochs = 30;
  c.lr = 1e-2;
  const auto r = train(f.init, f.data.train_pairs, f.data.dev.data, c);
  CHECK(r.report.best_dev > 0.9);
  CHECK(r.report.epochs.back().mean_ce < r.report.epochs.front().mean_ce);
}

TEST_CASE("ties keep the earliest epoch") {
  const Fixture f = small_fixture(4);
  TrainConfig c = quick(Regime::kBaseline);
  c.lr = 0.0;
  const auto r = train(f.init, f.data.train_pairs, f.data.dev.data, c);
  CHECK(r.report.best_epoch == 1);
  CHECK(r.model.params == f.init.params);
}

TEST_CASE("only crr keeps alpha") {
  TrainConfig c;
  c.alpha = 4.0;
  c.regime = Regime::kAdversarial;
  CHECK(c.loss().alpha == 0.0);
  c.regime = Regime::kBaseline;
  CHECK(c.loss().alpha == 0.0);
  c.regime = Regime::kCrr;
  CHECK(c.loss().alpha == 4.0);
}

TEST_CASE("baseline ignores the augmented side") {
  Fixture f = small_fixture(5);
  const auto a = train(f.init, f.data.train_pairs, f.data.dev.data, quick(Regime::kBaseline));
  PairedDataset scrambled = f.data.train_pairs;
  for (auto& [o, aug] : scrambled.pairs) aug.instance = o;
  const auto b = train(f.init, scrambled, f.data.dev.data, quick(Regime::kBaseline));
  CHECK(a.model.params == b.model.params);
}

TEST_CASE("grid search covers every cell and picks the best") {
  const Fixture f = small_fixture(6);
  TrainConfig c = quick(Regime::kCrr);
  c.epochs = 2;
  c.alpha_grid = {1.0, 3.0};
  c.lr_grid = {3e-3, 1e-3};
  const auto g = grid_search(f.init, f.data.train_pairs, f.data.dev.data, c);
  REQUIRE(g.cells.size() == 4);
  CHECK(g.cells[0].alpha == 1.0);
  CHECK(g.cells[1].alpha == 1.0);
  CHECK(g.cells[2].alpha == 3.0);
  double best = 0;
  for (const auto& cell : g.cells) best = std::max(best, cell.best_dev);
  CHECK(g.best.report.best_dev == best);
  std::ostringstream os;
  write_grid_report(os, g);
  const std::string grid = os.str();
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 5);

  c.regime = Regime::kBaseline;
  CHECK(grid_search(f.init, f.data.train_pairs, f.data.dev.data, c).cells.size() == 2);
}

TEST_CASE("grid ties go to the smaller alpha then the smaller lr") {
  const Fixture f = small_fixture(7);
  TrainConfig c = quick(Regime::kCrr);
  c.epochs = 1;
  c.alpha_grid = {3.0, 1.0};
  c.lr_grid = {0.0, 0.0};
  const auto g = grid_search(f.init, f.data.train_pairs, f.data.dev.data, c);
  CHECK(g.best_config.alpha == 1.0);
  CHECK(g.best_config.lr == 0.0);
}

TEST_CASE("non-finite values abort with coordinates") {
  Fixture f = small_fixture(8);
  TrainConfig c = quick(Regime::kCrr);
  c.lr = 1e300;
  c.warmup_fraction = 0.0;
  c.weight_decay = 1e300;
  try {
    train(f.init, f.data.train_pairs, f.data.dev.data, c);
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
}

TEST_CASE("bad configs are rejected") {
  const Fixture f = small_fixture(9);
  TrainConfig c = quick(Regime::kCrr);
  c.epochs = 0;
  CHECK_THROWS_AS(train(f.init, f.data.train_pairs, f.data.dev.data, c), ConfigError);
  CHECK_THROWS_AS(train(f.init, f.data.train_pairs, Dataset{}, quick(Regime::kCrr)), ConfigError);
  CHECK(parse_regime("cad") == Regime::kCad);
  CHECK_FALSE(parse_regime("magic"));
}
