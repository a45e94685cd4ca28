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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "crrlab/model.hpp"
#include "crrlab/objective.hpp"
#include "crrlab/rng.hpp"

namespace crrlab::testing {

inline constexpr double kFdStep = 1e-5;

// Relative error with a floor so that entries whose true gradient is zero
// are judged on absolute error.
inline double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t entries = 0;
};

inline double linear_loss(const Logits& logits, const Logits& c) {
  return c[0] * logits[0] + c[1] * logits[1] + c[2] * logits[2];
}

// L = c . logits on a random model and input, with a fixed dropout mask.
// Checks every parameter entry and every hidden-state entry.
inline GradCheck check_model_gradient(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t vocab = 12, dim = 6, hidden = 5, len = 7;
  ModelParams p = ModelParams::random(vocab, dim, hidden, 0.5, rng);
  for (double& b : p.hidden_b.data) b = uniform(rng, -0.3, 0.3);
  for (double& b : p.out_b.data) b = uniform(rng, -0.3, 0.3);
  EncodedInput in;
  for (std::size_t t = 0; t < len; ++t) in.ids.push_back(uniform_index(rng, vocab));
  in.aspect_begin = 2;
  in.aspect_end = 4;
  std::vector<double> mask(dim);
  for (double& m : mask) m = bernoulli(rng, 0.3) ? 0.0 : 1.0 / 0.7;
  const Logits c{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};

  const ForwardResult f = forward(p, in, mask);
  ModelParams grads = ModelParams::zeros(vocab, dim, hidden);
  const Matrix dh = backward(f.cache, p, c, &grads);

  GradCheck out;
  std::vector<Matrix*> tensors;
  std::vector<const Matrix*> grad_tensors;
  p.for_each([&](std::string_view, Matrix& m) { tensors.push_back(&m); });
  grads.for_each([&](std::string_view, const Matrix& m) { grad_tensors.push_back(&m); });
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    Matrix& m = *tensors[k];
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      const double keep = m.data[i];
      m.data[i] = keep + kFdStep;
      const double up = linear_loss(forward(p, in, mask).cache.logits, c);
      m.data[i] = keep - kFdStep;
      const double down = linear_loss(forward(p, in, mask).cache.logits, c);
      m.data[i] = keep;
      const double numeric = (up - down) / (2 * kFdStep);
      out.max_rel_error = std::max(out.max_rel_error, rel_error(grad_tensors[k]->data[i], numeric));
      ++out.entries;
    }
  }

  Matrix h = f.cache.hidden;
  for (std::size_t i = 0; i < h.data.size(); ++i) {
    const double keep = h.data[i];
    h.data[i] = keep + kFdStep;
    const double up = linear_loss(forward_hidden(p, h, 2, 4, mask).cache.logits, c);
    h.data[i] = keep - kFdStep;
    const double down = linear_loss(forward_hidden(p, h, 2, 4, mask).cache.logits, c);
    h.data[i] = keep;
    out.max_rel_error =
        std::max(out.max_rel_error, rel_error(dh.data[i], (up - down) / (2 * kFdStep)));
    ++out.entries;
  }
  return out;
}

// Checks crr_loss_gradient against the loss it differentiates, for one
// random pair of logit vectors and every divergence kind.
inline GradCheck check_crr_gradient(std::uint64_t seed) {
  Rng rng(seed);
  GradCheck out;
  for (DivergenceKind kind :
       {DivergenceKind::kKlForward, DivergenceKind::kKlReverse, DivergenceKind::kJs}) {
    Logits lo, la;
    for (auto& v : lo) v = uniform(rng, -3, 3);
    for (auto& v : la) v = uniform(rng, -3, 3);
    const Polarity y = kAllPolarities[uniform_index(rng, 3)];
    LossConfig cfg;
    cfg.alpha = uniform(rng, 0.5, 5.0);
    cfg.divergence = kind;
    const LogitGradients g = crr_loss_gradient(lo, la, y, cfg);
    auto loss = [&](const Logits& a, const Logits& b) {
      return crr_loss(softmax(a), softmax(b), y, cfg).total;
    };
    for (std::size_t side = 0; side < 2; ++side) {
      for (std::size_t i = 0; i < kNumClasses; ++i) {
        Logits a = lo, b = la;
        Logits& v = side == 0 ? a : b;
        v[i] += kFdStep;
        const double up = loss(a, b);
        v[i] -= 2 * kFdStep;
        const double down = loss(a, b);
        const double analytic = side == 0 ? g.orig[i] : g.aug[i];
        out.max_rel_error =
            std::max(out.max_rel_error, rel_error(analytic, (up - down) / (2 * kFdStep)));
        ++out.entries;
      }
    }
  }
  return out;
}

}  // namespace crrlab::testing
