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

#include "crrlab/model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "crrlab/error.hpp"
#include "crrlab/text.hpp"

namespace crrlab {

Vocab::Vocab() {
  add("<unk>");
  add("<pad>");
}

Vocab Vocab::build(const std::vector<std::string>& texts) {
  Vocab v;
  for (const auto& t : texts) {
    for (const auto& tok : tokenize(t)) v.add(tok);
  }
  return v;
}

std::size_t Vocab::add(const std::string& token) {
  auto [it, inserted] = index_.try_emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::size_t Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

ModelParams ModelParams::zeros(std::size_t vocab, std::size_t dim, std::size_t hidden) {
  ModelParams p;
  p.embedding = Matrix(vocab, dim);
  p.query = Matrix(dim, dim);
  p.key = Matrix(dim, dim);
  p.hidden_w = Matrix(dim, hidden);
  p.hidden_b = Matrix(1, hidden);
  p.out_w = Matrix(hidden, kNumClasses);
  p.out_b = Matrix(1, kNumClasses);
  return p;
}

ModelParams ModelParams::random(std::size_t vocab, std::size_t dim, std::size_t hidden,
                                double scale, Rng& rng) {
  ModelParams p = zeros(vocab, dim, hidden);
  for (Matrix* m : {&p.embedding, &p.query, &p.key, &p.hidden_w, &p.out_w}) {
    for (double& x : m->data) x = uniform(rng, -scale, scale);
  }
  return p;
}

void ModelParams::for_each(const std::function<void(std::string_view, Matrix&)>& fn) {
  fn("embedding", embedding);
  fn("query", query);
  fn("key", key);
  fn("hidden_w", hidden_w);
  fn("hidden_b", hidden_b);
  fn("out_w", out_w);
  fn("out_b", out_b);
}

void ModelParams::for_each(const std::function<void(std::string_view, const Matrix&)>& fn) const {
  fn("embedding", embedding);
  fn("query", query);
  fn("key", key);
  fn("hidden_w", hidden_w);
  fn("hidden_b", hidden_b);
  fn("out_w", out_w);
  fn("out_b", out_b);
}

void ModelParams::zero() {
  for_each([](std::string_view, Matrix& m) { m.zero(); });
}

bool ModelParams::same_shape(const ModelParams& o) const {
  return embedding.same_shape(o.embedding) && query.same_shape(o.query) &&
         key.same_shape(o.key) && hidden_w.same_shape(o.hidden_w) &&
         hidden_b.same_shape(o.hidden_b) && out_w.same_shape(o.out_w) &&
         out_b.same_shape(o.out_b);
}

bool ModelParams::all_finite() const {
  bool ok = true;
  for_each([&](std::string_view, const Matrix& m) { ok = ok && crrlab::all_finite(m.data); });
  return ok;
}

EncodedInput encode(const Vocab& vocab, const Instance& inst) {
  const auto tokens = tokenize_with_offsets(inst.text);
  EncodedInput e;
  e.ids.reserve(tokens.size());
  for (const auto& t : tokens) e.ids.push_back(vocab.id(t.text));
  std::tie(e.aspect_begin, e.aspect_end) =
      token_range(tokens, inst.aspect_span.start, inst.aspect_span.end);
  if (e.aspect_begin == e.aspect_end) {
    throw ConfigError(inst.id + ": aspect span covers no token");
  }
  return e;
}

PredictionDist softmax(const Logits& logits) {
  const double mx = std::max({logits[0], logits[1], logits[2]});
  PredictionDist p;
  double z = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    p[k] = std::exp(logits[k] - mx);
    z += p[k];
  }
  for (double& v : p) v /= z;
  return p;
}

ForwardResult forward_hidden(const ModelParams& p, Matrix hidden, std::size_t aspect_begin,
                             std::size_t aspect_end, std::span<const double> dropout_mask) {
  const std::size_t d = p.dim();
  const std::size_t h = p.hidden();
  const std::size_t T = hidden.rows;
  if (T == 0) throw ConfigError("forward on an empty token list");
  if (hidden.cols != d) throw ConfigError("hidden width does not match model dimension");
  if (!(aspect_begin < aspect_end && aspect_end <= T)) {
    throw ConfigError("aspect token range out of bounds");
  }
  if (!dropout_mask.empty() && dropout_mask.size() != d) {
    throw ConfigError("dropout mask size does not match model dimension");
  }

  ForwardResult res;
  ForwardCache& c = res.cache;
  c.aspect_begin = aspect_begin;
  c.aspect_end = aspect_end;
  c.hidden = std::move(hidden);

  c.aspect_mean.assign(d, 0.0);
  const double inv_count = 1.0 / static_cast<double>(aspect_end - aspect_begin);
  for (std::size_t t = aspect_begin; t < aspect_end; ++t) {
    const auto row = c.hidden.row(t);
    for (std::size_t j = 0; j < d; ++j) c.aspect_mean[j] += row[j] * inv_count;
  }
  c.query.assign(d, 0.0);
  vec_mat(c.aspect_mean, p.query, c.query);

  c.keys = Matrix(T, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> scores(T);
  for (std::size_t t = 0; t < T; ++t) {
    vec_mat(c.hidden.row(t), p.key, c.keys.row(t));
    scores[t] = dot(c.query, c.keys.row(t)) * scale;
  }
  const double mx = *std::max_element(scores.begin(), scores.end());
  c.attention.assign(T, 0.0);
  double z = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    c.attention[t] = std::exp(scores[t] - mx);
    z += c.attention[t];
  }
  for (double& a : c.attention) a /= z;

  c.pooled.assign(d, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const auto row = c.hidden.row(t);
    const double a = c.attention[t];
    for (std::size_t j = 0; j < d; ++j) c.pooled[j] += a * row[j];
  }
  c.dropout_mask.assign(dropout_mask.begin(), dropout_mask.end());
  c.pooled_out = c.pooled;
  if (!c.dropout_mask.empty()) {
    for (std::size_t j = 0; j < d; ++j) c.pooled_out[j] *= c.dropout_mask[j];
  }

  c.hidden_act.assign(h, 0.0);
  vec_mat(c.pooled_out, p.hidden_w, c.hidden_act);
  for (std::size_t k = 0; k < h; ++k) {
    c.hidden_act[k] = std::tanh(c.hidden_act[k] + p.hidden_b.data[k]);
  }

  std::array<double, kNumClasses> out{};
  vec_mat(c.hidden_act, p.out_w, out);
  for (std::size_t k = 0; k < kNumClasses; ++k) c.logits[k] = out[k] + p.out_b.data[k];
  if (!all_finite(c.logits) || !std::isfinite(z)) {
    throw NumericError("non-finite logits: parameters or inputs contain NaN/Inf");
  }
  c.probs = softmax(c.logits);
  res.probs = c.probs;
  return res;
}

ForwardResult forward(const ModelParams& p, const EncodedInput& input,
                      std::span<const double> dropout_mask) {
  if (input.ids.empty()) throw ConfigError("forward on an empty token list");
  const std::size_t d = p.dim();
  Matrix hidden(input.ids.size(), d);
  for (std::size_t t = 0; t < input.ids.size(); ++t) {
    const std::size_t id = input.ids[t];
    if (id >= p.vocab_size()) throw ConfigError("token id outside the vocabulary");
    const auto src = p.embedding.row(id);
    std::copy(src.begin(), src.end(), hidden.row(t).begin());
  }
  auto res = forward_hidden(p, std::move(hidden), input.aspect_begin, input.aspect_end,
                            dropout_mask);
  res.cache.ids = input.ids;
  return res;
}

Matrix backward(const ForwardCache& c, const ModelParams& p, const Logits& upstream,
                ModelParams* grads) {
  const std::size_t d = p.dim();
  const std::size_t h = p.hidden();
  const std::size_t T = c.hidden.rows;
  if (c.hidden.cols != d || c.hidden_act.size() != h || c.attention.size() != T) {
    throw ConfigError("forward cache does not match the parameters");
  }
  if (grads && !grads->same_shape(p)) throw ConfigError("gradient buffer shape mismatch");
  if (grads && c.ids.size() != T) throw ConfigError("cache lacks token ids for embedding grads");

  // Output layer.
  std::vector<double> d_act(h, 0.0);
  mat_vec(p.out_w, upstream, d_act);
  if (grads) {
    add_outer(c.hidden_act, upstream, grads->out_w);
    for (std::size_t k = 0; k < kNumClasses; ++k) grads->out_b.data[k] += upstream[k];
  }
  // tanh
  std::vector<double> d_pre(h);
  for (std::size_t k = 0; k < h; ++k) {
    d_pre[k] = d_act[k] * (1.0 - c.hidden_act[k] * c.hidden_act[k]);
  }
  if (grads) {
    add_outer(c.pooled_out, d_pre, grads->hidden_w);
    for (std::size_t k = 0; k < h; ++k) grads->hidden_b.data[k] += d_pre[k];
  }
  std::vector<double> d_pooled(d, 0.0);
  mat_vec(p.hidden_w, d_pre, d_pooled);
  if (!c.dropout_mask.empty()) {
    for (std::size_t j = 0; j < d; ++j) d_pooled[j] *= c.dropout_mask[j];
  }

  // Attention pooling: value path and softmax.
  Matrix d_hidden(T, d);
  std::vector<double> d_att(T);
  double weighted = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double a = c.attention[t];
    auto dh = d_hidden.row(t);
    for (std::size_t j = 0; j < d; ++j) dh[j] = a * d_pooled[j];
    d_att[t] = dot(c.hidden.row(t), d_pooled);
    weighted += a * d_att[t];
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> d_query(d, 0.0);
  std::vector<double> d_key(d);
  for (std::size_t t = 0; t < T; ++t) {
    const double d_score = c.attention[t] * (d_att[t] - weighted) * scale;
    if (d_score == 0.0) continue;
    const auto k = c.keys.row(t);
    for (std::size_t j = 0; j < d; ++j) {
      d_query[j] += d_score * k[j];
      d_key[j] = d_score * c.query[j];
    }
    if (grads) add_outer(c.hidden.row(t), d_key, grads->key);
    std::vector<double> back(d);
    mat_vec(p.key, d_key, back);
    auto dh = d_hidden.row(t);
    for (std::size_t j = 0; j < d; ++j) dh[j] += back[j];
  }

  // Query path through the aspect mean.
  if (grads) add_outer(c.aspect_mean, d_query, grads->query);
  std::vector<double> d_mean(d);
  mat_vec(p.query, d_query, d_mean);
  const double inv_count = 1.0 / static_cast<double>(c.aspect_end - c.aspect_begin);
  for (std::size_t t = c.aspect_begin; t < c.aspect_end; ++t) {
    auto dh = d_hidden.row(t);
    for (std::size_t j = 0; j < d; ++j) dh[j] += d_mean[j] * inv_count;
  }

  if (grads) {
    for (std::size_t t = 0; t < T; ++t) {
      auto g = grads->embedding.row(c.ids[t]);
      const auto dh = d_hidden.row(t);
      for (std::size_t j = 0; j < d; ++j) g[j] += dh[j];
    }
  }
  return d_hidden;
}

Polarity argmax(const PredictionDist& dist) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumClasses; ++k) {
    if (dist[k] > dist[best]) best = k;
  }
  return static_cast<Polarity>(best);
}

PredictionDist Model::predict_dist(const Instance& inst) const {
  return forward(params, encode(vocab, inst)).probs;
}

Model make_model(const ModelConfig& cfg, const std::vector<std::string>& texts,
                 std::uint64_t seed) {
  if (cfg.dim == 0 || cfg.hidden == 0) throw ConfigError("model dimensions must be positive");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  Model m;
  m.config = cfg;
  m.vocab = Vocab::build(texts);
  Rng rng = make_rng(seed, "init");
  m.params = ModelParams::random(m.vocab.size(), cfg.dim, cfg.hidden, cfg.init_scale, rng);
  return m;
}

namespace {

using nlohmann::json;

}  // namespace

void save_checkpoint(std::ostream& out, const Model& m) {
  json tensors = json::object();
  m.params.for_each([&](std::string_view name, const Matrix& t) {
    tensors[std::string(name)] = json{{"shape", {t.rows, t.cols}}, {"data", t.data}};
  });
  json j{{"format", "crrlab-checkpoint"},
         {"version", kCheckpointVersion},
         {"config",
          {{"dim", m.config.dim},
           {"hidden", m.config.hidden},
           {"dropout", m.config.dropout},
           {"init_scale", m.config.init_scale}}},
         {"vocab", m.vocab.tokens()},
         {"tensors", tensors}};
  out << j.dump() << '\n';
}

void save_checkpoint(const std::filesystem::path& path, const Model& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  save_checkpoint(out, m);
}

Model load_checkpoint(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "crrlab-checkpoint") throw DataError("not a crrlab checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw DataError("unsupported checkpoint version " + j.at("version").dump());
    }
    Model m;
    const auto& cfg = j.at("config");
    m.config.dim = cfg.at("dim").get<std::size_t>();
    m.config.hidden = cfg.at("hidden").get<std::size_t>();
    m.config.dropout = cfg.at("dropout").get<double>();
    m.config.init_scale = cfg.at("init_scale").get<double>();
    const auto tokens = j.at("vocab").get<std::vector<std::string>>();
    if (tokens.size() < 2 || tokens[0] != "<unk>" || tokens[1] != "<pad>") {
      throw DataError("checkpoint vocabulary lacks the special tokens");
    }
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      if (m.vocab.add(tokens[i]) != i) throw DataError("duplicate token in checkpoint vocabulary");
    }
    m.params = ModelParams::zeros(m.vocab.size(), m.config.dim, m.config.hidden);
    const auto& tensors = j.at("tensors");
    m.params.for_each([&](std::string_view name, Matrix& t) {
      const auto& e = tensors.at(std::string(name));
      const auto shape = e.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2 || shape[0] != t.rows || shape[1] != t.cols) {
        throw DataError("tensor '" + std::string(name) + "' has the wrong shape");
      }
      t.data = e.at("data").get<std::vector<double>>();
      if (t.data.size() != t.rows * t.cols) {
        throw DataError("tensor '" + std::string(name) + "' has the wrong element count");
      }
    });
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace crrlab
