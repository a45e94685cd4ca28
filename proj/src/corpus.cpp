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

#include "crrlab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "crrlab/error.hpp"
#include "crrlab/rng.hpp"
#include "crrlab/text.hpp"

namespace crrlab {

using nlohmann::json;

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::kNegative:
      return "negative";
    case Polarity::kNeutral:
      return "neutral";
    case Polarity::kPositive:
      return "positive";
  }
  return "?";
}

std::optional<Polarity> parse_polarity(std::string_view s) {
  if (s == "negative") return Polarity::kNegative;
  if (s == "neutral") return Polarity::kNeutral;
  if (s == "positive") return Polarity::kPositive;
  return std::nullopt;
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kRevTgt:
      return "RevTgt";
    case Strategy::kRevNon:
      return "RevNon";
    case Strategy::kAddDiff:
      return "AddDiff";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view s) {
  if (s == "RevTgt") return Strategy::kRevTgt;
  if (s == "RevNon") return Strategy::kRevNon;
  if (s == "AddDiff") return Strategy::kAddDiff;
  return std::nullopt;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "?";
}

void validate_instance(const Instance& inst) {
  if (inst.id.empty()) throw ValidationError("<empty id>", "id must be non-empty");
  if (inst.text.empty()) throw ValidationError(inst.id, "text is empty");
  const std::size_t len = utf8_length(inst.text);
  const Span& sp = inst.aspect_span;
  if (!(sp.start < sp.end && sp.end <= len)) {
    throw ValidationError(inst.id, "aspect span [" + std::to_string(sp.start) + ", " +
                                       std::to_string(sp.end) + ") out of range for text of " +
                                       std::to_string(len) + " code points");
  }
  const std::string covered = utf8_substr(inst.text, sp.start, sp.end);
  if (normalize_whitespace(covered) != normalize_whitespace(inst.aspect_term)) {
    throw ValidationError(inst.id, "span text '" + covered + "' does not match aspect term '" +
                                       inst.aspect_term + "'");
  }
}

namespace {

template <typename T>
T required(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(line, std::string("field '") + key + "' has the wrong type");
  }
}

std::optional<std::string> optional_string(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

json instance_json(const Instance& inst) {
  return json{{"id", inst.id},
              {"text", inst.text},
              {"aspect_term", inst.aspect_term},
              {"from", inst.aspect_span.start},
              {"to", inst.aspect_span.end},
              {"polarity", std::string(to_string(inst.polarity))}};
}

}  // namespace

std::vector<RawRecord> parse_records(std::istream& in) {
  std::vector<RawRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (normalize_whitespace(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(lineno, "record is not a JSON object");
    RawRecord r;
    r.line = lineno;
    r.id = required<std::string>(j, "id", lineno);
    r.text = required<std::string>(j, "text", lineno);
    r.aspect_term = required<std::string>(j, "aspect_term", lineno);
    const auto from = required<long long>(j, "from", lineno);
    const auto to = required<long long>(j, "to", lineno);
    if (from < 0 || to < 0) throw ParseError(lineno, "negative span offset");
    r.from = static_cast<std::size_t>(from);
    r.to = static_cast<std::size_t>(to);
    r.polarity = required<std::string>(j, "polarity", lineno);
    if (r.polarity != "conflict" && !parse_polarity(r.polarity)) {
      throw ParseError(lineno, "unknown polarity '" + r.polarity + "'");
    }
    r.source_id = optional_string(j, "source_id", lineno);
    r.strategy = optional_string(j, "strategy", lineno);
    if (r.source_id.has_value() != r.strategy.has_value()) {
      throw ParseError(lineno, "source_id and strategy must appear together");
    }
    if (r.strategy && !parse_strategy(*r.strategy)) {
      throw ParseError(lineno, "unknown strategy '" + *r.strategy + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RawRecord> remove_conflicts(std::vector<RawRecord> records) {
  std::erase_if(records, [](const RawRecord& r) { return r.polarity == "conflict"; });
  return records;
}

Dataset build_dataset(const std::vector<RawRecord>& records, FileKind kind, std::string name,
                      Split split) {
  Dataset d;
  d.name = std::move(name);
  d.split = split;
  std::unordered_set<std::string> ids;
  std::vector<VariantRecord> variants;
  for (const auto& r : records) {
    auto pol = parse_polarity(r.polarity);
    if (!pol) throw ValidationError(r.id, "polarity '" + r.polarity + "' is not a class");
    Instance inst{r.id, r.text, r.aspect_term, Span{r.from, r.to}, *pol};
    validate_instance(inst);
    if (!ids.insert(inst.id).second) throw ValidationError(inst.id, "duplicate id");
    if (r.source_id) {
      if (kind != FileKind::kArts) {
        throw ValidationError(inst.id, "variant record in a file loaded as original data");
      }
      variants.push_back(VariantRecord{*r.source_id, *parse_strategy(*r.strategy), inst});
    } else {
      d.instances.push_back(std::move(inst));
    }
  }
  if (kind == FileKind::kArts) {
    std::unordered_set<std::string> originals;
    for (const auto& i : d.instances) originals.insert(i.id);
    for (const auto& v : variants) {
      if (!originals.count(v.source_id)) {
        throw ValidationError(v.instance.id, "dangling source_id '" + v.source_id + "'");
      }
    }
    d.variants = std::move(variants);
  }
  return d;
}

LoadResult load_dataset(std::istream& in, FileKind kind, std::string name, Split split) {
  auto records = parse_records(in);
  const std::size_t before = records.size();
  records = remove_conflicts(std::move(records));
  LoadResult res;
  res.dropped_conflict = before - records.size();
  res.dataset = build_dataset(records, kind, std::move(name), split);
  return res;
}

LoadResult load_dataset(const std::filesystem::path& path, FileKind kind, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file " + path.string());
  return load_dataset(in, kind, path.stem().string(), split);
}

std::string instance_to_json_line(const Instance& inst) { return instance_json(inst).dump(); }

void save_dataset(std::ostream& out, const Dataset& d) {
  for (const auto& inst : d.instances) out << instance_json(inst).dump() << '\n';
  if (d.variants) {
    for (const auto& v : *d.variants) {
      json j = instance_json(v.instance);
      j["source_id"] = v.source_id;
      j["strategy"] = std::string(to_string(v.strategy));
      out << j.dump() << '\n';
    }
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset file " + path.string());
  save_dataset(out, d);
}

std::pair<Dataset, Dataset> split_train_dev(const Dataset& d, double dev_fraction,
                                            std::uint64_t seed) {
  if (!(dev_fraction > 0.0 && dev_fraction < 0.5)) {
    throw ConfigError("dev_fraction must lie in (0, 0.5)");
  }
  const std::size_t n = d.instances.size();
  if (n < 10) throw ConfigError("refusing to split a dataset of fewer than 10 instances");

  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[index_of(d.instances[i].polarity)].push_back(i);

  const auto total_dev =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * dev_fraction));
  std::array<std::size_t, kNumClasses> quota{};
  std::array<double, kNumClasses> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double exact = static_cast<double>(by_class[c].size()) * static_cast<double>(total_dev) /
                         static_cast<double>(n);
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  std::array<std::size_t, kNumClasses> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total_dev; k = (k + 1) % kNumClasses) {
    const std::size_t c = order[k];
    if (quota[c] < by_class[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  Rng rng = make_rng(seed, "split");
  std::vector<bool> to_dev(n, false);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto idx = by_class[c];
    shuffle(idx, rng);
    for (std::size_t k = 0; k < quota[c]; ++k) to_dev[idx[k]] = true;
  }

  Dataset train{d.name, Split::kTrain, {}, std::nullopt};
  Dataset dev{d.name, Split::kDev, {}, std::nullopt};
  std::unordered_set<std::string> dev_ids;
  for (std::size_t i = 0; i < n; ++i) {
    if (to_dev[i]) {
      dev.instances.push_back(d.instances[i]);
      dev_ids.insert(d.instances[i].id);
    } else {
      train.instances.push_back(d.instances[i]);
    }
  }
  if (d.variants) {
    train.variants.emplace();
    dev.variants.emplace();
    for (const auto& v : *d.variants) {
      (dev_ids.count(v.source_id) ? *dev.variants : *train.variants).push_back(v);
    }
  }
  return {std::move(train), std::move(dev)};
}

std::vector<VariantGroup> group_variants(const Dataset& d) {
  std::vector<VariantGroup> groups;
  groups.reserve(d.instances.size());
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& inst : d.instances) {
    index.emplace(inst.id, groups.size());
    groups.push_back(VariantGroup{inst.id, inst, {}});
  }
  if (!d.variants) return groups;
  for (const auto& v : *d.variants) {
    auto it = index.find(v.source_id);
    if (it == index.end()) {
      throw ValidationError(v.instance.id, "dangling source_id '" + v.source_id + "'");
    }
    groups[it->second].variants.push_back(v);
  }
  return groups;
}

}  // namespace crrlab
