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

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crrlab/corpus.hpp"
#include "crrlab/rng.hpp"
#include "crrlab/tensor.hpp"

namespace crrlab {

// Aspect-aware classifier:
//
//   q      = Wq^T mean(h[aspect])
//   s_t    = q . (Wk^T h_t) / sqrt(d)
//   a      = softmax(s)
//   u      = sum_t a_t h_t            (dropout on u while training)
//   g      = tanh(W1^T u + b1)
//   logits = W2^T g + b2
//
// h_t is the embedding of token t; it doubles as the last-layer hidden
// state that saliency differentiates against.

class Vocab {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::size_t kPad = 1;

  Vocab();
  /// Adds every token of every text, in first-seen order.
  static Vocab build(const std::vector<std::string>& texts);

  std::size_t add(const std::string& token);
  std::size_t id(std::string_view token) const;  // kUnk for OOV
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool operator==(const Vocab& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct ModelConfig {
  std::size_t dim = 64;
  std::size_t hidden = 64;
  double dropout = 0.3;
  double init_scale = 0.1;
  bool operator==(const ModelConfig&) const = default;
};

struct ModelParams {
  Matrix embedding;  // |V| x d
  Matrix query;      // d x d
  Matrix key;        // d x d
  Matrix hidden_w;   // d x h
  Matrix hidden_b;   // 1 x h
  Matrix out_w;      // h x 3
  Matrix out_b;      // 1 x 3

  static ModelParams zeros(std::size_t vocab, std::size_t dim, std::size_t hidden);
  /// Weights uniform(-scale, scale), biases zero.
  static ModelParams random(std::size_t vocab, std::size_t dim, std::size_t hidden,
                            double scale, Rng& rng);

  std::size_t dim() const { return query.rows; }
  std::size_t hidden() const { return hidden_w.cols; }
  std::size_t vocab_size() const { return embedding.rows; }

  /// Visits the tensors in a fixed order with their checkpoint names.
  void for_each(const std::function<void(std::string_view, Matrix&)>& fn);
  void for_each(const std::function<void(std::string_view, const Matrix&)>& fn) const;

  void zero();
  bool same_shape(const ModelParams& o) const;
  bool all_finite() const;
  bool operator==(const ModelParams&) const = default;
};

using PredictionDist = std::array<double, kNumClasses>;
using Logits = std::array<double, kNumClasses>;

/// Token ids plus the half-open token range of the aspect.
struct EncodedInput {
  std::vector<std::size_t> ids;
  std::size_t aspect_begin = 0;
  std::size_t aspect_end = 0;
};

EncodedInput encode(const Vocab& vocab, const Instance& inst);

struct ForwardCache {
  std::vector<std::size_t> ids;
  std::size_t aspect_begin = 0;
  std::size_t aspect_end = 0;
  Matrix hidden;                    // T x d, per-token embedded vectors
  std::vector<double> aspect_mean;  // d
  std::vector<double> query;        // d
  Matrix keys;                      // T x d
  std::vector<double> attention;    // T, sums to 1
  std::vector<double> pooled;       // d, before dropout
  std::vector<double> dropout_mask; // d, empty when dropout is off
  std::vector<double> pooled_out;   // d, after dropout
  std::vector<double> hidden_act;   // h, tanh output
  Logits logits{};
  PredictionDist probs{};
};

struct ForwardResult {
  PredictionDist probs{};
  ForwardCache cache;
};

/// Numerically stable softmax over three logits.
PredictionDist softmax(const Logits& logits);

/// `dropout_mask` is either empty or holds one multiplier per pooled
/// dimension (0 or 1/(1-rate)). Throws ConfigError on an empty input or a
/// bad aspect range, NumericError on non-finite parameters.
ForwardResult forward(const ModelParams& p, const EncodedInput& input,
                      std::span<const double> dropout_mask = {});

/// Same as forward() but starting from explicit per-token hidden vectors.
ForwardResult forward_hidden(const ModelParams& p, Matrix hidden, std::size_t aspect_begin,
                             std::size_t aspect_end, std::span<const double> dropout_mask = {});

/// Accumulates parameter gradients into `grads` (same shapes as `p`) and
/// returns d loss / d hidden, one row per token. `grads` may be null when
/// only the hidden-state gradients are needed.
Matrix backward(const ForwardCache& cache, const ModelParams& p, const Logits& upstream,
                ModelParams* grads);

/// Argmax with ties going to the lowest class index.
Polarity argmax(const PredictionDist& dist);

struct Model {
  ModelConfig config;
  Vocab vocab;
  ModelParams params;

  PredictionDist predict_dist(const Instance& inst) const;
  Polarity predict(const Instance& inst) const { return argmax(predict_dist(inst)); }
};

/// Builds a vocabulary from `texts` and seeds parameters from the "init"
/// substream of `seed`.
Model make_model(const ModelConfig& cfg, const std::vector<std::string>& texts,
                 std::uint64_t seed);

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(std::ostream& out, const Model& m);
void save_checkpoint(const std::filesystem::path& path, const Model& m);
Model load_checkpoint(std::istream& in);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace crrlab
