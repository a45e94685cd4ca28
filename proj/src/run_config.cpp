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

#include "crrlab/run_config.hpp"

#include <algorithm>
#include <optional>

#include <json.hpp>

#include "crrlab/error.hpp"

namespace crrlab {

namespace {

using nlohmann::json;

// Reads the members of one section, rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  template <typename E, typename Parse>
  void get_enum(const char* key, E& out, Parse parse) {
    std::string s;
    get(key, s);
    if (s.empty()) return;
    auto v = parse(s);
    if (!v) throw ConfigError("config key '" + name_ + "." + key + "': bad value '" + s + "'");
    out = *v;
  }

  const json* child(const char* key) {
    seen_.push_back(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) {
        throw ConfigError("unknown config key '" + name_ + "." + k + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::vector<std::string> seen_;
};

std::optional<PositionPolicy> parse_policy(std::string_view s) {
  if (s == "mixed") return PositionPolicy::kMixed;
  if (s == "rear_only") return PositionPolicy::kRearOnly;
  return std::nullopt;
}

std::optional<AugmentStrategy> parse_augment_strategy(std::string_view s) {
  if (s == "add_diff_mix") return AugmentStrategy::kAddDiffMix;
  if (s == "rev_tgt") return AugmentStrategy::kRevTgt;
  return std::nullopt;
}

std::optional<RenderMode> parse_mode(std::string_view s) {
  if (s == "html") return RenderMode::kHtml;
  if (s == "ansi") return RenderMode::kAnsi;
  return std::nullopt;
}

std::optional<SaliencyTarget> parse_target(std::string_view s) {
  if (s == "gold") return SaliencyTarget::kGold;
  if (s == "predicted") return SaliencyTarget::kPredicted;
  return std::nullopt;
}

}  // namespace

void RunConfig::propagate_seed() {
  augment.seed = seed;
  train.seed = seed;
}

void RunConfig::validate() const {
  if (out.empty()) throw ConfigError("output directory must be set");
  if (!(data.dev_fraction > 0.0 && data.dev_fraction < 0.5)) {
    throw ConfigError("data.dev_fraction must lie in (0, 0.5)");
  }
  if (bank_window < 2) throw ConfigError("bank.window must be >= 2");
  if (model.dim < 1 || model.hidden < 1) throw ConfigError("model sizes must be >= 1");
  if (!(model.dropout >= 0.0 && model.dropout < 1.0)) {
    throw ConfigError("model.dropout must lie in [0, 1)");
  }
  augment.validate();
  train.validate();
  sim.validate();
}

RunConfig run_config_from_json(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c;
  Section top(root, "config");
  top.get("seed", c.seed);
  top.get("out", c.out);
  if (const json* j = top.child("data")) {
    Section s(*j, "data");
    s.get("train", c.data.train);
    s.get("dev", c.data.dev);
    s.get("test", c.data.test);
    s.get("lexicon", c.data.lexicon);
    s.get("pairs", c.data.pairs);
    s.get("checkpoint", c.data.checkpoint);
    s.get("dev_fraction", c.data.dev_fraction);
    s.finish();
  }
  if (const json* j = top.child("bank")) {
    Section s(*j, "bank");
    s.get("window", c.bank_window);
    s.finish();
  }
  if (const json* j = top.child("augment")) {
    Section s(*j, "augment");
    s.get_enum("strategy", c.augment_strategy, parse_augment_strategy);
    s.get("min_phrases", c.augment.min_phrases);
    s.get("max_phrases", c.augment.max_phrases);
    s.get("front_probability", c.augment.front_probability);
    s.get_enum("position_policy", c.augment.position_policy, parse_policy);
    s.finish();
  }
  if (const json* j = top.child("model")) {
    Section s(*j, "model");
    s.get("dim", c.model.dim);
    s.get("hidden", c.model.hidden);
    s.get("dropout", c.model.dropout);
    s.get("init_scale", c.model.init_scale);
    s.finish();
  }
  if (const json* j = top.child("train")) {
    Section s(*j, "train");
    s.get_enum("regime", c.train.regime, parse_regime);
    s.get("epochs", c.train.epochs);
    s.get("batch_size", c.train.batch_size);
    s.get("lr", c.train.lr);
    s.get("weight_decay", c.train.weight_decay);
    s.get("warmup_fraction", c.train.warmup_fraction);
    s.get("alpha", c.train.alpha);
    s.get_enum("divergence", c.train.divergence, parse_divergence);
    s.get("freeze_original_in_div", c.train.freeze_original_in_div);
    s.get("alpha_grid", c.train.alpha_grid);
    s.get("lr_grid", c.train.lr_grid);
    s.get_enum("dev_metric", c.train.dev_metric, parse_dev_metric);
    s.get("grid", c.grid);
    s.finish();
  }
  if (const json* j = top.child("sim")) c.sim = causal_spec_from_json(j->dump());
  if (const json* j = top.child("saliency")) {
    Section s(*j, "saliency");
    s.get("ids", c.saliency.ids);
    s.get_enum("mode", c.saliency.mode, parse_mode);
    s.get_enum("target", c.saliency.target, parse_target);
    s.finish();
  }
  if (const json* j = top.child("report")) {
    Section s(*j, "report");
    s.get("input", c.report_input);
    s.finish();
  }
  top.finish();
  c.propagate_seed();
  c.validate();
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["data"] = {{"train", c.data.train},
               {"dev", c.data.dev},
               {"test", c.data.test},
               {"lexicon", c.data.lexicon},
               {"pairs", c.data.pairs},
               {"checkpoint", c.data.checkpoint},
               {"dev_fraction", c.data.dev_fraction}};
  j["bank"] = {{"window", c.bank_window}};
  j["augment"] = {
      {"strategy", c.augment_strategy == AugmentStrategy::kRevTgt ? "rev_tgt" : "add_diff_mix"},
      {"min_phrases", c.augment.min_phrases},
      {"max_phrases", c.augment.max_phrases},
      {"front_probability", c.augment.front_probability},
      {"position_policy", std::string(to_string(c.augment.position_policy))}};
  j["model"] = {{"dim", c.model.dim},
                {"hidden", c.model.hidden},
                {"dropout", c.model.dropout},
                {"init_scale", c.model.init_scale}};
  j["train"] = {{"regime", std::string(to_string(c.train.regime))},
                {"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"lr", c.train.lr},
                {"weight_decay", c.train.weight_decay},
                {"warmup_fraction", c.train.warmup_fraction},
                {"alpha", c.train.alpha},
                {"divergence", std::string(to_string(c.train.divergence))},
                {"freeze_original_in_div", c.train.freeze_original_in_div},
                {"alpha_grid", c.train.alpha_grid},
                {"lr_grid", c.train.lr_grid},
                {"dev_metric", std::string(to_string(c.train.dev_metric))},
                {"grid", c.grid}};
  j["sim"] = json::parse(causal_spec_to_json(c.sim));
  j["saliency"] = {{"ids", c.saliency.ids},
                   {"mode", c.saliency.mode == RenderMode::kHtml ? "html" : "ansi"},
                   {"target", c.saliency.target == SaliencyTarget::kGold ? "gold" : "predicted"}};
  j["report"] = {{"input", c.report_input}};
  return j.dump(2) + "\n";
}

std::string apply_overrides(const std::string& json_text,
                            const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json_text.empty() ? json::object() : json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + o + "' is not key=value");
    }
    const std::string key = o.substr(0, eq);
    const std::string raw = o.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    json* node = &root;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot - start);
      if (part.empty()) throw ConfigError("override key '" + key + "' has an empty part");
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      json& next = (*node)[part];
      if (next.is_null()) next = json::object();
      if (!next.is_object()) throw ConfigError("override key '" + key + "' crosses a value");
      node = &next;
      start = dot + 1;
    }
  }
  return root.dump();
}

}  // namespace crrlab
