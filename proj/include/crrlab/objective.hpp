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

#include <optional>
#include <string_view>

#include "crrlab/corpus.hpp"
#include "crrlab/model.hpp"

namespace crrlab {

inline constexpr double kProbEpsilon = 1e-7;

enum class DivergenceKind : std::uint8_t { kKlForward, kKlReverse, kJs };

std::string_view to_string(DivergenceKind k);
std::optional<DivergenceKind> parse_divergence(std::string_view s);

struct LossConfig {
  double alpha = 1.0;
  DivergenceKind divergence = DivergenceKind::kKlForward;
  double epsilon = kProbEpsilon;
  /// Treat the original-branch distribution as a constant inside the
  /// divergence term.
  bool freeze_original_in_div = false;

  void validate() const;
};

struct LossBreakdown {
  double ce_orig = 0.0;
  double ce_aug = 0.0;
  double div = 0.0;
  double total = 0.0;
};

/// min(max(p, eps), 1 - eps)
double clamp_probability(double p, double epsilon = kProbEpsilon);

/// (-log p_orig[y], -log p_aug[y]) with clamped probabilities.
std::pair<double, double> cross_entropy_pair(const PredictionDist& p_orig,
                                             const PredictionDist& p_aug, Polarity y,
                                             double epsilon = kProbEpsilon);

/// kl_forward = KL(p || q), kl_reverse = KL(q || p), js = JS(p, q); all on
/// clamped arguments and never negative.
double divergence(DivergenceKind kind, const PredictionDist& p, const PredictionDist& q,
                  double epsilon = kProbEpsilon);

/// ce_orig + ce_aug + alpha * kind(p_orig, p_aug).
LossBreakdown crr_loss(const PredictionDist& p_orig, const PredictionDist& p_aug, Polarity y,
                       const LossConfig& cfg);

struct LogitGradients {
  Logits orig{};
  Logits aug{};
};

/// Exact gradient of crr_loss with respect to the two logit vectors.
LogitGradients crr_loss_gradient(const Logits& logits_orig, const Logits& logits_aug,
                                 Polarity y, const LossConfig& cfg);

/// Gradient of -log softmax(logits)[y] (softmax - onehot away from the clamp).
Logits cross_entropy_gradient(const Logits& logits, Polarity y, double epsilon = kProbEpsilon);

/// Total variation distance, half the L1 norm.
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace crrlab
