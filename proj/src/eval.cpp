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

#include "crrlab/eval.hpp"

#include <cstdio>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "crrlab/error.hpp"
#include "crrlab/model.hpp"

namespace crrlab {

double accuracy(std::span<const PredictionRecord> records) {
  if (records.empty()) throw ConfigError("accuracy of an empty record set");
  std::size_t hit = 0;
  for (const auto& r : records) hit += r.correct() ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(records.size());
}

double macro_f1(std::span<const PredictionRecord> records) {
  if (records.empty()) throw ConfigError("macro F1 of an empty record set");
  std::array<std::size_t, kNumClasses> tp{}, gold{}, pred{};
  for (const auto& r : records) {
    ++gold[index_of(r.gold)];
    ++pred[index_of(r.predicted)];
    if (r.correct()) ++tp[index_of(r.gold)];
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    // F1 = 2PR/(P+R) = 2tp / (gold + pred); both zero gives 0.
    const std::size_t denom = gold[c] + pred[c];
    sum += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
  }
  return sum / static_cast<double>(kNumClasses);
}

namespace {

std::unordered_map<std::string, bool> correctness_by_id(std::span<const PredictionRecord> records) {
  std::unordered_map<std::string, bool> out;
  out.reserve(records.size());
  for (const auto& r : records) out.emplace(r.id, r.correct());
  return out;
}

bool lookup(const std::unordered_map<std::string, bool>& m, const std::string& id) {
  auto it = m.find(id);
  if (it == m.end()) throw DataError("no prediction record for '" + id + "'");
  return it->second;
}

}  // namespace

double ars(std::span<const VariantGroup> groups, std::span<const PredictionRecord> records) {
  if (groups.empty()) throw ConfigError("ARS over zero groups");
  const auto ok = correctness_by_id(records);
  std::size_t robust = 0;
  for (const auto& g : groups) {
    bool all = lookup(ok, g.original.id);
    for (const auto& v : g.variants) all = lookup(ok, v.instance.id) && all;
    robust += all ? 1 : 0;
  }
  return static_cast<double>(robust) / static_cast<double>(groups.size());
}

SubsetReport subset_analysis(std::span<const VariantGroup> groups,
                             std::span<const PredictionRecord> records) {
  const auto ok = correctness_by_id(records);
  SubsetReport report;
  for (Strategy s : kAllStrategies) {
    SubsetRow row;
    row.strategy = s;
    std::size_t orig_hit = 0;
    std::size_t var_hit = 0;
    for (const auto& g : groups) {
      bool has = false;
      for (const auto& v : g.variants) {
        if (v.strategy != s) continue;
        has = true;
        ++row.variants;
        var_hit += lookup(ok, v.instance.id) ? 1 : 0;
      }
      if (has) {
        ++row.groups;
        orig_hit += lookup(ok, g.original.id) ? 1 : 0;
      }
    }
    if (row.variants == 0) {
      report.omitted.push_back(s);
      continue;
    }
    row.original_accuracy = static_cast<double>(orig_hit) / static_cast<double>(row.groups);
    row.variant_accuracy = static_cast<double>(var_hit) / static_cast<double>(row.variants);
    row.diff = row.variant_accuracy - row.original_accuracy;
    report.rows.push_back(row);
  }
  return report;
}

MetricsReport metrics(std::span<const PredictionRecord> records) {
  MetricsReport m;
  m.n = records.size();
  m.accuracy = accuracy(records);
  m.macro_f1 = macro_f1(records);
  for (const auto& r : records) ++m.gold_counts[index_of(r.gold)];
  return m;
}

std::vector<PredictionRecord> predict_records(const Model& model,
                                              std::span<const Instance> instances) {
  std::vector<PredictionRecord> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    out.push_back(PredictionRecord{inst.id, inst.polarity, model.predict(inst)});
  }
  return out;
}

std::vector<Instance> all_members(const Dataset& d) {
  std::vector<Instance> out = d.instances;
  if (d.variants) {
    for (const auto& v : *d.variants) out.push_back(v.instance);
  }
  return out;
}

namespace {

nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json j{{"n", m.n},
                   {"accuracy", m.accuracy},
                   {"macro_f1", m.macro_f1},
                   {"gold_counts",
                    {{"negative", m.gold_counts[0]},
                     {"neutral", m.gold_counts[1]},
                     {"positive", m.gold_counts[2]}}}};
  if (m.ars) j["ars"] = *m.ars;
  return j;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

}  // namespace

std::string metrics_json(const MetricsReport& original, const std::optional<MetricsReport>& arts,
                         const std::optional<SubsetReport>& subsets) {
  nlohmann::json j{{"original", to_json(original)}};
  if (arts) j["arts"] = to_json(*arts);
  if (subsets) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : subsets->rows) {
      rows.push_back({{"strategy", std::string(to_string(r.strategy))},
                      {"groups", r.groups},
                      {"variants", r.variants},
                      {"original_accuracy", r.original_accuracy},
                      {"variant_accuracy", r.variant_accuracy},
                      {"diff", r.diff}});
    }
    nlohmann::json omitted = nlohmann::json::array();
    for (auto s : subsets->omitted) omitted.push_back(std::string(to_string(s)));
    j["subsets"] = {{"rows", rows}, {"omitted", omitted}};
  }
  return j.dump(2) + "\n";
}

std::string metrics_table(const std::string& name, const MetricsReport& original,
                          const std::optional<MetricsReport>& arts) {
  std::ostringstream os;
  os << pad("Model", 14) << pad("Orig F1", 10) << pad("Orig Acc", 10);
  if (arts) os << pad("ARTs F1", 10) << pad("ARTs Acc", 10) << pad("ARS", 10);
  os << '\n';
  os << pad(name, 14) << pad(pct(original.macro_f1), 10) << pad(pct(original.accuracy), 10);
  if (arts) {
    os << pad(pct(arts->macro_f1), 10) << pad(pct(arts->accuracy), 10)
       << pad(arts->ars ? pct(*arts->ars) : "--", 10);
  }
  os << '\n';
  return os.str();
}

std::string subset_table(const SubsetReport& report) {
  std::ostringstream os;
  os << pad("Test Set", 10) << pad("Original", 10) << pad("ARTs", 10) << pad("Diff", 10)
     << pad("Groups", 8) << '\n';
  for (const auto& r : report.rows) {
    const std::string arrow = r.diff < 0 ? "-" : "+";
    os << pad(std::string(to_string(r.strategy)), 10) << pad(pct(r.original_accuracy), 10)
       << pad(pct(r.variant_accuracy), 10)
       << pad(arrow + pct(std::abs(r.diff)), 10) << pad(std::to_string(r.groups), 8) << '\n';
  }
  for (auto s : report.omitted) {
    os << pad(std::string(to_string(s)), 10) << "  (no variants; row omitted)\n";
  }
  return os.str();
}

}  // namespace crrlab
