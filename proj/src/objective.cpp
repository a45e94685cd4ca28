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

#include "crrlab/objective.hpp"

#include <cmath>

#include "crrlab/error.hpp"

namespace crrlab {

std::string_view to_string(DivergenceKind k) {
  switch (k) {
    case DivergenceKind::kKlForward:
      return "kl_forward";
    case DivergenceKind::kKlReverse:
      return "kl_reverse";
    case DivergenceKind::kJs:
      return "js";
  }
  return "?";
}

std::optional<DivergenceKind> parse_divergence(std::string_view s) {
  if (s == "kl_forward" || s == "kl") return DivergenceKind::kKlForward;
  if (s == "kl_reverse") return DivergenceKind::kKlReverse;
  if (s == "js") return DivergenceKind::kJs;
  return std::nullopt;
}

void LossConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in (0, 0.5)");
}

double clamp_probability(double p, double epsilon) {
  return std::min(std::max(p, epsilon), 1.0 - epsilon);
}

namespace {

bool unclamped(double p, double epsilon) { return p > epsilon && p < 1.0 - epsilon; }

double kl(const PredictionDist& p, const PredictionDist& q, double eps) {
  double s = 0.0;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    const double a = clamp_probability(p[i], eps);
    const double b = clamp_probability(q[i], eps);
    s += a * (std::log(a) - std::log(b));
  }
  return s;
}

// d KL(p||q) / d p~ and d / d q~ on the clamped values.
void kl_partials(const PredictionDist& p, const PredictionDist& q, double eps,
                 PredictionDist& dp, PredictionDist& dq) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    const double a = clamp_probability(p[i], eps);
    const double b = clamp_probability(q[i], eps);
    dp[i] = std::log(a) - std::log(b) + 1.0;
    dq[i] = -a / b;
  }
}

// Pulls a gradient on probabilities back through the clamp and softmax.
Logits through_softmax(const PredictionDist& p, const PredictionDist& dprob, double eps) {
  PredictionDist g{};
  for (std::size_t i = 0; i < kNumClasses; ++i) g[i] = unclamped(p[i], eps) ? dprob[i] : 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < kNumClasses; ++i) mean += p[i] * g[i];
  Logits out{};
  for (std::size_t i = 0; i < kNumClasses; ++i) out[i] = p[i] * (g[i] - mean);
  return out;
}

}  // namespace

std::pair<double, double> cross_entropy_pair(const PredictionDist& p_orig,
                                             const PredictionDist& p_aug, Polarity y,
                                             double epsilon) {
  const std::size_t k = index_of(y);
  return {-std::log(clamp_probability(p_orig[k], epsilon)),
          -std::log(clamp_probability(p_aug[k], epsilon))};
}

double divergence(DivergenceKind kind, const PredictionDist& p, const PredictionDist& q,
                  double epsilon) {
  double v = 0.0;
  switch (kind) {
    case DivergenceKind::kKlForward:
      v = kl(p, q, epsilon);
      break;
    case DivergenceKind::kKlReverse:
      v = kl(q, p, epsilon);
      break;
    case DivergenceKind::kJs: {
      double s = 0.0;
      for (std::size_t i = 0; i < kNumClasses; ++i) {
        const double a = clamp_probability(p[i], epsilon);
        const double b = clamp_probability(q[i], epsilon);
        const double m = 0.5 * (a + b);
        s += 0.5 * a * (std::log(a) - std::log(m)) + 0.5 * b * (std::log(b) - std::log(m));
      }
      v = s;
      break;
    }
  }
  // The clamped vectors need not sum to one, which can leave a residue of
  // order epsilon below zero.
  return std::max(v, 0.0);
}

LossBreakdown crr_loss(const PredictionDist& p_orig, const PredictionDist& p_aug, Polarity y,
                       const LossConfig& cfg) {
  cfg.validate();
  LossBreakdown b;
  std::tie(b.ce_orig, b.ce_aug) = cross_entropy_pair(p_orig, p_aug, y, cfg.epsilon);
  b.div = divergence(cfg.divergence, p_orig, p_aug, cfg.epsilon);
  b.total = b.ce_orig + b.ce_aug + cfg.alpha * b.div;
  return b;
}

Logits cross_entropy_gradient(const Logits& logits, Polarity y, double epsilon) {
  const PredictionDist p = softmax(logits);
  PredictionDist dprob{};
  const std::size_t k = index_of(y);
  dprob[k] = -1.0 / clamp_probability(p[k], epsilon);
  return through_softmax(p, dprob, epsilon);
}

LogitGradients crr_loss_gradient(const Logits& logits_orig, const Logits& logits_aug, Polarity y,
                                 const LossConfig& cfg) {
  cfg.validate();
  const double eps = cfg.epsilon;
  const PredictionDist p = softmax(logits_orig);
  const PredictionDist q = softmax(logits_aug);
  const std::size_t k = index_of(y);

  PredictionDist dp{};
  PredictionDist dq{};
  dp[k] = -1.0 / clamp_probability(p[k], eps);
  dq[k] = -1.0 / clamp_probability(q[k], eps);

  if (cfg.alpha != 0.0) {
    PredictionDist gp{};
    PredictionDist gq{};
    switch (cfg.divergence) {
      case DivergenceKind::kKlForward:
        kl_partials(p, q, eps, gp, gq);
        break;
      case DivergenceKind::kKlReverse:
        kl_partials(q, p, eps, gq, gp);
        break;
      case DivergenceKind::kJs:
        for (std::size_t i = 0; i < kNumClasses; ++i) {
          const double a = clamp_probability(p[i], eps);
          const double b = clamp_probability(q[i], eps);
          const double m = 0.5 * (a + b);
          gp[i] = 0.5 * (std::log(a) - std::log(m));
          gq[i] = 0.5 * (std::log(b) - std::log(m));
        }
        break;
    }
    // divergence() floors at zero; the floor only bites at the clamp, where
    // the gradient is already negligible, so it is not differentiated.
    for (std::size_t i = 0; i < kNumClasses; ++i) {
      if (!cfg.freeze_original_in_div) dp[i] += cfg.alpha * gp[i];
      dq[i] += cfg.alpha * gq[i];
    }
  }
  return LogitGradients{through_softmax(p, dp, eps), through_softmax(q, dq, eps)};
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ConfigError("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

}  // namespace crrlab
