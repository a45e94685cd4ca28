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

#include "crrlab/causal_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include <json.hpp>

#include "crrlab/error.hpp"
#include "crrlab/eval.hpp"
#include "crrlab/text.hpp"

namespace crrlab {

namespace {

using nlohmann::json;

const char* const kTemplateWords[] = {"the", "was", ",", "."};

void check_token(const std::string& t, std::set<std::string>& seen) {
  const auto toks = tokenize(t);
  if (toks.size() != 1 || toks[0] != t) {
    throw ConfigError("sim token '" + t + "' is not a single lowercase token");
  }
  if (!seen.insert(t).second) throw ConfigError("sim token '" + t + "' is used twice");
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s += ' ';
    s += tokens[i];
  }
  return s;
}

// Groups correlated with a class other than `label`.
std::vector<std::size_t> other_label_groups(Polarity label) {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < kNumClasses; ++g) {
    if (g != index_of(label)) out.push_back(g);
  }
  return out;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[uniform_index(rng, v.size())];
}

}  // namespace

void CausalSpec::validate() const {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0, 1]");
  if (spurious_groups.size() < kNumClasses) {
    throw ConfigError("need at least one spurious group per class");
  }
  if (spurious_slots < 1) throw ConfigError("spurious_slots must be >= 1");
  if (n_train < 1 || n_dev < 1 || n_test < 1) throw ConfigError("sim sizes must be >= 1");
  if (aspects.empty() || fillers.empty()) {
    throw ConfigError("aspects and fillers must be non-empty");
  }
  std::set<std::string> seen(std::begin(kTemplateWords), std::end(kTemplateWords));
  for (const auto& c : core) {
    if (c.empty()) throw ConfigError("every class needs a core token");
    for (const auto& t : c) check_token(t, seen);
  }
  for (const auto& g : spurious_groups) {
    if (g.empty()) throw ConfigError("empty spurious group");
    for (const auto& t : g) check_token(t, seen);
  }
  for (const auto& t : aspects) check_token(t, seen);
  for (const auto& t : fillers) check_token(t, seen);
}

CausalSpec causal_spec_from_json(const std::string& json_text) {
  CausalSpec s;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sim spec: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("sim spec must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "core") {
        for (Polarity p : kAllPolarities) {
          const std::string name(to_string(p));
          if (v.contains(name)) s.core[index_of(p)] = v.at(name).get<std::vector<std::string>>();
        }
      } else if (key == "spurious_groups") {
        s.spurious_groups = v.get<std::vector<std::vector<std::string>>>();
      } else if (key == "aspects") {
        s.aspects = v.get<std::vector<std::string>>();
      } else if (key == "fillers") {
        s.fillers = v.get<std::vector<std::string>>();
      } else if (key == "rho") {
        s.rho = v.get<double>();
      } else if (key == "spurious_slots") {
        s.spurious_slots = v.get<std::size_t>();
      } else if (key == "n_train") {
        s.n_train = v.get<std::size_t>();
      } else if (key == "n_dev") {
        s.n_dev = v.get<std::size_t>();
      } else if (key == "n_test") {
        s.n_test = v.get<std::size_t>();
      } else {
        throw ConfigError("unknown sim spec key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sim spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::string causal_spec_to_json(const CausalSpec& s) {
  json core = json::object();
  for (Polarity p : kAllPolarities) core[std::string(to_string(p))] = s.core[index_of(p)];
  json j{{"core", core},
         {"spurious_groups", s.spurious_groups},
         {"aspects", s.aspects},
         {"fillers", s.fillers},
         {"rho", s.rho},
         {"spurious_slots", s.spurious_slots},
         {"n_train", s.n_train},
         {"n_dev", s.n_dev},
         {"n_test", s.n_test}};
  return j.dump(2);
}

SimDataset generate(const CausalSpec& spec, std::size_t n, Rng& rng,
                    const std::string& id_prefix) {
  spec.validate();
  SimDataset out;
  out.data.name = id_prefix;
  out.data.instances.reserve(n);
  out.annotations.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Polarity label = kAllPolarities[uniform_index(rng, kNumClasses)];
    const std::string& core = pick(spec.core[index_of(label)], rng);
    const std::string& aspect = pick(spec.aspects, rng);
    const std::size_t group =
        bernoulli(rng, spec.rho) ? index_of(label) : uniform_index(rng, spec.groups());

    SimAnnotation ann;
    ann.spurious_group = static_cast<int>(group);
    auto push = [&](const std::string& t, TokenRole role, int g) {
      ann.tokens.push_back(t);
      ann.roles.push_back(role);
      ann.group.push_back(g);
    };
    push("the", TokenRole::kFiller, -1);
    push(aspect, TokenRole::kAspect, -1);
    push("was", TokenRole::kFiller, -1);
    push(core, TokenRole::kCore, -1);
    push(",", TokenRole::kFiller, -1);
    for (std::size_t k = 0; k < spec.spurious_slots; ++k) {
      push(pick(spec.fillers, rng), TokenRole::kFiller, -1);
      push(pick(spec.spurious_groups[group], rng), TokenRole::kSpurious, static_cast<int>(group));
    }
    push(".", TokenRole::kFiller, -1);

    Instance inst;
    inst.id = id_prefix + "-" + std::to_string(i);
    inst.text = join_tokens(ann.tokens);
    inst.aspect_term = aspect;
    inst.aspect_span = Span{4, 4 + utf8_length(aspect)};
    inst.polarity = label;
    out.data.instances.push_back(std::move(inst));
    out.annotations.push_back(std::move(ann));
  }
  return out;
}

std::vector<Intervention> all_interventions(const CausalSpec& spec) {
  std::vector<Intervention> out;
  for (std::size_t g = 0; g < spec.groups(); ++g) {
    for (const auto& t : spec.spurious_groups[g]) out.push_back(Intervention{g, t});
  }
  return out;
}

Instance intervene_one(const Instance& inst, const SimAnnotation& ann, const CausalSpec& spec,
                       const Intervention& iv, SimAnnotation* out_ann) {
  if (iv.group >= spec.groups()) {
    throw ConfigError("intervention on unknown spurious group " + std::to_string(iv.group));
  }
  const auto& dom = spec.spurious_groups[iv.group];
  if (std::find(dom.begin(), dom.end(), iv.value) == dom.end()) {
    throw ConfigError("'" + iv.value + "' is not in spurious group " + std::to_string(iv.group));
  }
  SimAnnotation a = ann;
  for (std::size_t t = 0; t < a.tokens.size(); ++t) {
    if (a.roles[t] != TokenRole::kSpurious) continue;
    a.tokens[t] = iv.value;
    a.group[t] = static_cast<int>(iv.group);
  }
  a.spurious_group = static_cast<int>(iv.group);
  Instance out = inst;
  out.text = join_tokens(a.tokens);
  if (out_ann) *out_ann = std::move(a);
  return out;
}

SimDataset intervene(const SimDataset& d, const CausalSpec& spec, const Intervention& iv) {
  SimDataset out;
  out.data = d.data;
  out.annotations.resize(d.annotations.size());
  for (std::size_t i = 0; i < d.data.instances.size(); ++i) {
    out.data.instances[i] =
        intervene_one(d.data.instances[i], d.annotations.at(i), spec, iv, &out.annotations[i]);
  }
  return out;
}

SimDataset intervene_adversarial(const SimDataset& d, const CausalSpec& spec, Rng& rng) {
  SimDataset out;
  out.data = d.data;
  out.data.name = d.data.name + "-adv";
  out.annotations = d.annotations;
  for (std::size_t i = 0; i < d.data.instances.size(); ++i) {
    Instance& inst = out.data.instances[i];
    SimAnnotation& a = out.annotations[i];
    const std::size_t g = pick(other_label_groups(inst.polarity), rng);
    for (std::size_t t = 0; t < a.tokens.size(); ++t) {
      if (a.roles[t] != TokenRole::kSpurious) continue;
      a.tokens[t] = pick(spec.spurious_groups[g], rng);
      a.group[t] = static_cast<int>(g);
    }
    a.spurious_group = static_cast<int>(g);
    inst.text = join_tokens(a.tokens);
  }
  return out;
}

PairedDataset augment_spurious(const SimDataset& d, const CausalSpec& spec,
                               const AugmentConfig& cfg) {
  cfg.validate();
  PairedDataset out;
  out.pairs.reserve(d.data.instances.size());
  const double p_front = cfg.effective_front_probability();
  for (std::size_t i = 0; i < d.data.instances.size(); ++i) {
    const Instance& x = d.data.instances[i];
    Rng rng(substream_seed(cfg.seed, "augment", x.id));
    const auto others = other_label_groups(x.polarity);
    const std::size_t k =
        cfg.min_phrases + uniform_index(rng, cfg.max_phrases - cfg.min_phrases + 1);

    AugmentedInstance a;
    a.source_id = x.id;
    a.kind = cfg.position_policy == PositionPolicy::kRearOnly ? AugmentKind::kAddDiff
                                                              : AugmentKind::kAddDiffMix;
    std::vector<std::string> phrase_tokens;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t g = pick(others, rng);
      OpinionPhrase ph;
      ph.text = pick(spec.fillers, rng) + " " + pick(spec.spurious_groups[g], rng);
      ph.polarity = kAllPolarities[g];
      ph.source_id = x.id;
      if (j == 0) a.injected_polarity = ph.polarity;
      if (!phrase_tokens.empty()) phrase_tokens.push_back("and");
      phrase_tokens.push_back(ph.text);
      a.injected.push_back(std::move(ph));
    }
    const std::string injected = join_tokens(phrase_tokens);
    a.position = bernoulli(rng, p_front) ? Position::kFront : Position::kRear;

    a.instance = x;
    a.instance.id = x.id + "#aug";
    if (a.position == Position::kFront) {
      const std::string prefix = injected + " , ";
      a.instance.text = prefix + x.text;
      const std::size_t shift = utf8_length(prefix);
      a.instance.aspect_span = Span{x.aspect_span.start + shift, x.aspect_span.end + shift};
    } else {
      std::string body = x.text;
      if (body.size() >= 2 && body.ends_with(" .")) body.resize(body.size() - 2);
      a.instance.text = body + " , " + injected + " .";
    }
    out.pairs.emplace_back(x, std::move(a));
  }
  return out;
}

double spurious_label_mi(const SimDataset& d, const CausalSpec& spec) {
  const std::size_t n = d.annotations.size();
  if (n == 0) return 0.0;
  const std::size_t g_count = spec.groups();
  std::vector<std::size_t> joint(g_count * kNumClasses, 0), gs(g_count, 0), ys(kNumClasses, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = static_cast<std::size_t>(d.annotations[i].spurious_group);
    const std::size_t y = index_of(d.data.instances.at(i).polarity);
    ++joint[g * kNumClasses + y];
    ++gs[g];
    ++ys[y];
  }
  double mi = 0.0;
  const double nn = static_cast<double>(n);
  for (std::size_t g = 0; g < g_count; ++g) {
    for (std::size_t y = 0; y < kNumClasses; ++y) {
      const std::size_t c = joint[g * kNumClasses + y];
      if (c == 0) continue;
      // Integer products keep the constant-S case exactly zero.
      const double ratio = static_cast<double>(c * n) / static_cast<double>(gs[g] * ys[y]);
      mi += static_cast<double>(c) / nn * std::log(ratio);
    }
  }
  return std::max(0.0, mi);
}

InvarianceGap invariance_gap(const Model& model, const SimDataset& d, const CausalSpec& spec,
                             std::span<const Intervention> interventions, DivergenceKind kind) {
  InvarianceGap gap;
  if (interventions.empty()) {
    gap.vacuous = true;
    return gap;
  }
  double div_sum = 0.0, tv_sum = 0.0;
  std::size_t flips = 0;
  for (std::size_t i = 0; i < d.data.instances.size(); ++i) {
    const Instance& x = d.data.instances[i];
    const PredictionDist p = model.predict_dist(x);
    const Polarity yp = argmax(p);
    for (const auto& iv : interventions) {
      const PredictionDist q = model.predict_dist(intervene_one(x, d.annotations.at(i), spec, iv));
      const double dv = divergence(kind, p, q);
      const double tv = total_variation(p, q);
      div_sum += dv;
      tv_sum += tv;
      gap.max_div = std::max(gap.max_div, dv);
      gap.max_tv = std::max(gap.max_tv, tv);
      flips += argmax(q) != yp ? 1 : 0;
      ++gap.pairs;
    }
  }
  if (gap.pairs) {
    const double n = static_cast<double>(gap.pairs);
    gap.mean_div = div_sum / n;
    gap.mean_tv = tv_sum / n;
    gap.flip_rate = static_cast<double>(flips) / n;
  }
  return gap;
}

void TaskFamily::validate() const {
  if (tasks.empty()) throw ConfigError("task family is empty");
  for (const auto& t : tasks) {
    if (t.labels == 0) throw ConfigError("task '" + t.name + "' has no labels");
    std::vector<bool> hit(t.labels, false);
    for (std::size_t m : t.map) {
      if (m >= t.labels) throw ConfigError("task '" + t.name + "' maps outside its label set");
      hit[m] = true;
    }
    if (std::find(hit.begin(), hit.end(), false) != hit.end()) {
      throw ConfigError("task '" + t.name + "' is not surjective");
    }
  }
}

TaskFamily TaskFamily::standard() {
  TaskFamily f;
  f.tasks = {DerivedTask{"identity", {0, 1, 2}, 3},
             DerivedTask{"negative_vs_rest", {0, 1, 1}, 2},
             DerivedTask{"positive_vs_rest", {0, 0, 1}, 2},
             DerivedTask{"polar_vs_neutral", {0, 1, 0}, 2}};
  return f;
}

std::vector<double> pushforward(const PredictionDist& p, const DerivedTask& task) {
  std::vector<double> out(task.labels, 0.0);
  for (std::size_t c = 0; c < kNumClasses; ++c) out.at(task.map[c]) += p[c];
  return out;
}

std::size_t TransferReport::violations() const {
  std::size_t v = 0;
  for (const auto& t : tasks) v += t.violations;
  return v;
}

TransferReport verify_transfer(const Model& model, const SimDataset& d, const CausalSpec& spec,
                               std::span<const Intervention> interventions,
                               const TaskFamily& family, double tolerance) {
  family.validate();
  TransferReport r;
  for (const auto& t : family.tasks) r.tasks.push_back(TaskTransfer{t.name, 0.0, 0.0, 0});
  double ref_sum = 0.0;
  std::vector<double> task_sum(family.tasks.size(), 0.0);
  for (std::size_t i = 0; i < d.data.instances.size(); ++i) {
    const Instance& x = d.data.instances[i];
    const PredictionDist p = model.predict_dist(x);
    for (const auto& iv : interventions) {
      const PredictionDist q = model.predict_dist(intervene_one(x, d.annotations.at(i), spec, iv));
      const double ref = total_variation(p, q);
      ref_sum += ref;
      r.reference_max_tv = std::max(r.reference_max_tv, ref);
      for (std::size_t k = 0; k < family.tasks.size(); ++k) {
        const double tv = total_variation(pushforward(p, family.tasks[k]),
                                          pushforward(q, family.tasks[k]));
        task_sum[k] += tv;
        r.tasks[k].max_tv = std::max(r.tasks[k].max_tv, tv);
        if (tv > ref + tolerance) ++r.tasks[k].violations;
      }
      ++r.checked;
    }
  }
  if (r.checked) {
    const double n = static_cast<double>(r.checked);
    r.reference_mean_tv = ref_sum / n;
    for (std::size_t k = 0; k < family.tasks.size(); ++k) r.tasks[k].mean_tv = task_sum[k] / n;
  }
  return r;
}

void write_annotations(std::ostream& out, const SimDataset& d) {
  for (std::size_t i = 0; i < d.annotations.size(); ++i) {
    const auto& a = d.annotations[i];
    json roles = json::array();
    for (std::size_t t = 0; t < a.tokens.size(); ++t) {
      switch (a.roles[t]) {
        case TokenRole::kFiller:
          roles.push_back("filler");
          break;
        case TokenRole::kAspect:
          roles.push_back("aspect");
          break;
        case TokenRole::kCore:
          roles.push_back("core");
          break;
        case TokenRole::kSpurious:
          roles.push_back("spurious:" + std::to_string(a.group[t]));
          break;
      }
    }
    json j{{"id", d.data.instances.at(i).id},
           {"tokens", a.tokens},
           {"roles", roles},
           {"spurious_group", a.spurious_group}};
    out << j.dump() << '\n';
  }
}

SimData make_sim_data(const CausalSpec& spec, const AugmentConfig& augment, std::uint64_t seed) {
  spec.validate();
  SimData s;
  Rng train_rng(substream_seed(seed, "sim", "train"));
  Rng dev_rng(substream_seed(seed, "sim", "dev"));
  Rng test_rng(substream_seed(seed, "sim", "test"));
  Rng adv_rng(substream_seed(seed, "sim", "adversarial"));
  s.train = generate(spec, spec.n_train, train_rng, "train");
  s.train.data.split = Split::kTrain;
  s.dev = generate(spec, spec.n_dev, dev_rng, "dev");
  s.dev.data.split = Split::kDev;
  s.test_iid = generate(spec, spec.n_test, test_rng, "test");
  s.test_iid.data.split = Split::kTest;
  s.test_adversarial = intervene_adversarial(s.test_iid, spec, adv_rng);
  s.train_pairs = augment_spurious(s.train, spec, augment);
  return s;
}

SimRunResult run_sim(const SimRunConfig& cfg, const SimData& data) {
  std::vector<std::string> texts;
  for (const auto& [orig, aug] : data.train_pairs.pairs) {
    texts.push_back(orig.text);
    texts.push_back(aug.instance.text);
  }
  const Model init = make_model(cfg.model, texts, cfg.seed);
  SimRunResult r{train(init, data.train_pairs, data.dev.data, cfg.train), 0.0, 0.0, {}};
  const Model& m = r.trained.model;
  r.iid_accuracy = accuracy(predict_records(m, data.test_iid.data.instances));
  r.adversarial_accuracy = accuracy(predict_records(m, data.test_adversarial.data.instances));
  const auto ivs = all_interventions(cfg.spec);
  r.gap = invariance_gap(m, data.test_iid, cfg.spec, ivs, cfg.train.divergence);
  return r;
}

SimRunConfig default_sim_config(Regime regime, std::uint64_t seed) {
  SimRunConfig c;
  c.seed = seed;
  c.train.regime = regime;
  c.train.seed = seed;
  c.train.epochs = 20;
  c.train.batch_size = 64;
  c.train.lr = 2e-3;
  c.train.warmup_fraction = 0.0;
  c.train.alpha = 3.0;
  c.augment.seed = seed;
  return c;
}

}  // namespace crrlab
