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

#include <cmath>

#include "../support/gradcheck.hpp"
#include "crrlab/error.hpp"
#include "crrlab/objective.hpp"

using namespace crrlab;

namespace {

PredictionDist random_dist(Rng& rng) {
  PredictionDist p;
  double s = 0;
  for (double& v : p) s += (v = uniform(rng, 0.01, 1.0));
  for (double& v : p) v /= s;
  return p;
}

// Independent per-term summation with the same clamp.
double kl_terms(const PredictionDist& p, const PredictionDist& q) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double a = std::min(std::max(p[i], 1e-7), 1 - 1e-7);
    const double b = std::min(std::max(q[i], 1e-7), 1 - 1e-7);
    s += a * (std::log(a) - std::log(b));
  }
  return s;
}

}  // namespace

TEST_CASE("cross-entropy values") {
  const auto [a, b] = cross_entropy_pair({0.25, 0.5, 0.25}, {1.0 / 3, 1.0 / 3, 1.0 / 3},
                                         Polarity::kNeutral);
  CHECK(a == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(b == doctest::Approx(1.098612).epsilon(1e-6));
  const auto [c, d] = cross_entropy_pair({0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}, Polarity::kPositive);
  CHECK(c == -std::log(1 - kProbEpsilon));
  CHECK(d == -std::log(kProbEpsilon));
}

TEST_CASE("KL example against per-term summation") {
  const PredictionDist p{0.5, 0.5, 0.0};
  const PredictionDist q{0.25, 0.5, 0.25};
  const double kl = divergence(DivergenceKind::kKlForward, p, q);
  CHECK(std::abs(kl - kl_terms(p, q)) < 1e-9);
  CHECK(kl == doctest::Approx(0.346574).epsilon(1e-5));
  CHECK(std::abs(divergence(DivergenceKind::kKlReverse, p, q) - kl_terms(q, p)) < 1e-9);
}

TEST_CASE("divergence identities") {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_dist(rng);
    const auto q = random_dist(rng);
    for (auto k : {DivergenceKind::kKlForward, DivergenceKind::kKlReverse, DivergenceKind::kJs}) {
      CHECK(divergence(k, p, p) == 0.0);
      CHECK(divergence(k, p, q) >= 0.0);
    }
    CHECK(std::abs(divergence(DivergenceKind::kJs, p, q) -
                   divergence(DivergenceKind::kJs, q, p)) < 1e-12);
    CHECK(divergence(DivergenceKind::kJs, p, q) <= std::log(2.0) + 1e-12);
  }
}

TEST_CASE("crr_loss adds up") {
  const PredictionDist u{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const PredictionDist a{0.98, 0.01, 0.01};
  LossConfig cfg;
  cfg.alpha = 3.0;
  const auto l = crr_loss(u, a, Polarity::kNegative, cfg);
  const double div = (std::log((1.0 / 3) / 0.98) + 2 * std::log((1.0 / 3) / 0.01)) / 3;
  const double hand = std::log(3.0) - std::log(0.98) + 3.0 * div;
  CHECK(std::abs(l.total - hand) < 1e-9);
  CHECK(l.total == l.ce_orig + l.ce_aug + 3.0 * l.div);

  cfg.alpha = 0.0;
  const auto z = crr_loss(u, a, Polarity::kNegative, cfg);
  CHECK(z.total == z.ce_orig + z.ce_aug);
  const auto same = crr_loss(a, a, Polarity::kNegative, LossConfig{});
  CHECK(same.div == 0.0);
}

TEST_CASE("crr_loss_gradient matches finite differences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CHECK(testing::check_crr_gradient(seed).max_rel_error < 1e-6);
  }
}

TEST_CASE("alpha zero gives softmax minus one-hot on each branch") {
  const Logits lo{0.3, -1.2, 2.0}, la{-0.5, 0.1, 0.4};
  LossConfig cfg;
  cfg.alpha = 0.0;
  const auto g = crr_loss_gradient(lo, la, Polarity::kPositive, cfg);
  const auto po = softmax(lo), pa = softmax(la);
  for (int i = 0; i < 3; ++i) {
    CHECK(g.orig[i] == doctest::Approx(po[i] - (i == 2)).epsilon(1e-12));
    CHECK(g.aug[i] == doctest::Approx(pa[i] - (i == 2)).epsilon(1e-12));
  }
}

TEST_CASE("equal inputs give equal JS gradients") {
  const Logits l{0.3, -1.2, 2.0};
  LossConfig cfg;
  cfg.divergence = DivergenceKind::kJs;
  const auto g = crr_loss_gradient(l, l, Polarity::kNeutral, cfg);
  for (int i = 0; i < 3; ++i) CHECK(g.orig[i] == doctest::Approx(g.aug[i]).epsilon(1e-12));
  cfg.divergence = DivergenceKind::kKlForward;
  const auto k = crr_loss_gradient(l, l, Polarity::kNeutral, cfg);
  cfg.alpha = 0.0;
  const auto base = crr_loss_gradient(l, l, Polarity::kNeutral, cfg);
  for (int i = 0; i < 3; ++i) CHECK(k.orig[i] == doctest::Approx(base.orig[i]).epsilon(1e-9));
}

TEST_CASE("freezing the original branch drops its divergence gradient") {
  const Logits lo{0.3, -1.2, 2.0}, la{-0.5, 0.1, 0.4};
  LossConfig frozen;
  frozen.alpha = 2.0;
  frozen.freeze_original_in_div = true;
  LossConfig ce_only;
  ce_only.alpha = 0.0;
  const auto f = crr_loss_gradient(lo, la, Polarity::kPositive, frozen);
  const auto c = crr_loss_gradient(lo, la, Polarity::kPositive, ce_only);
  const auto full = crr_loss_gradient(lo, la, Polarity::kPositive, LossConfig{2.0});
  for (int i = 0; i < 3; ++i) {
    CHECK(f.orig[i] == doctest::Approx(c.orig[i]).epsilon(1e-12));
    CHECK(f.aug[i] == doctest::Approx(full.aug[i]).epsilon(1e-12));
  }
}

TEST_CASE("total variation and config checks") {
  const std::vector<double> p{0.5, 0.5, 0.0}, q{0.25, 0.5, 0.25};
  CHECK(total_variation(p, q) == doctest::Approx(0.25));
  LossConfig bad;
  bad.alpha = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK(parse_divergence("js") == DivergenceKind::kJs);
  CHECK_FALSE(parse_divergence("hellinger"));
}
