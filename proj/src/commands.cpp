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

#include "crrlab/commands.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "crrlab/aspect_bank.hpp"
#include "crrlab/error.hpp"
#include "crrlab/eval.hpp"

namespace crrlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path prepare_out(const RunConfig& cfg, std::string_view command) {
  const fs::path out(cfg.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create " + out.string() + ": " + ec.message());
  write_text(out / "config.json", run_config_to_json(cfg));
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream meta;
  meta << "command: " << command << '\n'
       << "seed: " << cfg.seed << '\n'
       << "created: " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << '\n';
  write_text(out / "metadata.txt", meta.str());
  return out;
}

SentimentLexicon lexicon_for(const RunConfig& cfg) {
  if (cfg.data.lexicon.empty()) return SentimentLexicon::bundled();
  return SentimentLexicon::load(cfg.data.lexicon);
}

Dataset load_original(const std::string& path, Split split) {
  return load_dataset(fs::path(path), FileKind::kOriginal, split).dataset;
}

std::pair<Dataset, Dataset> train_and_dev(const RunConfig& cfg) {
  if (cfg.data.train.empty()) throw ConfigError("data.train is not set");
  Dataset train = load_original(cfg.data.train, Split::kTrain);
  if (!cfg.data.dev.empty()) return {std::move(train), load_original(cfg.data.dev, Split::kDev)};
  return split_train_dev(train, cfg.data.dev_fraction, cfg.seed);
}

std::string dataset_text(const Dataset& d) {
  std::ostringstream os;
  save_dataset(os, d);
  return os.str();
}

std::string pairs_text(const PairedDataset& p) {
  std::ostringstream os;
  save_pairs(os, p);
  return os.str();
}

std::string checkpoint_text(const Model& m) {
  std::ostringstream os;
  save_checkpoint(os, m);
  return os.str();
}

PairedDataset identity_pairs(const Dataset& d) {
  PairedDataset p;
  for (const auto& x : d.instances) {
    AugmentedInstance a;
    a.instance = x;
    a.source_id = x.id;
    p.pairs.emplace_back(x, std::move(a));
  }
  return p;
}

json audit_json(const AugmentAudit& a) {
  return {{"total", a.total}, {"identity", a.identity}, {"front", a.front}, {"rear", a.rear}};
}

json report_json(const TrainReport& r) {
  return {{"regime", std::string(to_string(r.regime))},
          {"dev_metric", std::string(to_string(r.dev_metric))},
          {"alpha", r.alpha},
          {"lr", r.lr},
          {"best_epoch", r.best_epoch},
          {"best_dev", r.best_dev},
          {"epochs", r.epochs.size()}};
}

std::string log_text(const TrainReport& r) {
  std::ostringstream os;
  write_training_log(os, r);
  return os.str();
}

json gap_json(const InvarianceGap& g) {
  return {{"mean_div", g.mean_div}, {"max_div", g.max_div},     {"mean_tv", g.mean_tv},
          {"max_tv", g.max_tv},     {"flip_rate", g.flip_rate}, {"pairs", g.pairs},
          {"vacuous", g.vacuous}};
}

Model load_model(const RunConfig& cfg) {
  if (cfg.data.checkpoint.empty()) throw ConfigError("data.checkpoint is not set");
  return load_checkpoint(fs::path(cfg.data.checkpoint));
}

Dataset load_test(const RunConfig& cfg) {
  if (cfg.data.test.empty()) throw ConfigError("data.test is not set");
  Dataset d = load_dataset(fs::path(cfg.data.test), FileKind::kArts, Split::kTest).dataset;
  if (d.variants && d.variants->empty()) d.variants.reset();
  return d;
}

}  // namespace

void cmd_augment(const RunConfig& cfg, std::ostream& log) {
  auto [train, dev] = train_and_dev(cfg);
  const SentimentLexicon lex = lexicon_for(cfg);
  BankStats stats;
  const AspectBank bank = build_bank(train, lex, cfg.bank_window, &stats);
  AugmentAudit a;
  const PairedDataset pairs = cfg.augment_strategy == AugmentStrategy::kRevTgt
                                  ? rev_tgt_dataset(train, lex, &a)
                                  : augment_dataset(train, bank, cfg.augment, &a);

  const fs::path out = prepare_out(cfg, "augment");
  write_text(out / "pairs.jsonl", pairs_text(pairs));
  write_text(out / "train.jsonl", dataset_text(train));
  write_text(out / "dev.jsonl", dataset_text(dev));
  std::ostringstream bank_os;
  bank.save_jsonl(bank_os);
  write_text(out / "bank.jsonl", bank_os.str());
  json audit = audit_json(a);
  audit["bank"] = {{"phrases", bank.size()},
                   {"considered", stats.considered},
                   {"skipped_no_lexicon", stats.skipped_no_lexicon},
                   {"skipped_length", stats.skipped_length},
                   {"duplicates", stats.duplicates}};
  write_text(out / "audit.json", audit.dump(2) + "\n");
  log << "augmented " << a.total << " instances (" << a.front << " front, " << a.rear
      << " rear, " << a.identity << " identity); bank holds " << bank.size() << " phrases\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  PairedDataset pairs;
  Dataset dev;
  const bool needs_pairs = cfg.train.regime != Regime::kBaseline;
  const bool have_pairs = !cfg.data.pairs.empty() && fs::exists(cfg.data.pairs);
  if (needs_pairs && cfg.data.pairs.empty()) {
    throw ConfigError("regime " + std::string(to_string(cfg.train.regime)) +
                      " needs data.pairs");
  }
  if (needs_pairs || have_pairs) {
    std::ifstream in(cfg.data.pairs, std::ios::binary);
    if (!in) throw DataError("cannot read " + cfg.data.pairs);
    pairs = load_pairs(in);
    if (!cfg.data.dev.empty()) {
      dev = load_original(cfg.data.dev, Split::kDev);
    } else {
      dev = train_and_dev(cfg).second;
    }
  } else {
    auto [train, d] = train_and_dev(cfg);
    pairs = identity_pairs(train);
    dev = std::move(d);
  }

  std::vector<std::string> texts;
  for (const auto& [orig, aug] : pairs.pairs) {
    texts.push_back(orig.text);
    texts.push_back(aug.instance.text);
  }
  const Model init = make_model(cfg.model, texts, cfg.seed);

  const fs::path out = prepare_out(cfg, "train");
  TrainResult result;
  if (cfg.grid) {
    GridResult g = grid_search(init, pairs, dev, cfg.train);
    std::ostringstream os;
    write_grid_report(os, g);
    write_text(out / "grid.csv", os.str());
    result = std::move(g.best);
  } else {
    result = train(init, pairs, dev, cfg.train);
  }
  write_text(out / "checkpoint.json", checkpoint_text(result.model));
  write_text(out / "train_log.csv", log_text(result.report));
  write_text(out / "train_report.json", report_json(result.report).dump(2) + "\n");
  log << "trained " << to_string(cfg.train.regime) << " for " << result.report.epochs.size()
      << " epochs; best dev " << to_string(cfg.train.dev_metric) << " "
      << result.report.best_dev << " at epoch " << result.report.best_epoch << '\n';
}

void cmd_eval(const RunConfig& cfg, std::ostream& log) {
  const Model model = load_model(cfg);
  const Dataset test = load_test(cfg);
  const auto orig_records = predict_records(model, test.instances);
  const MetricsReport original = metrics(orig_records);
  std::optional<MetricsReport> arts;
  std::optional<SubsetReport> subsets;
  std::vector<PredictionRecord> all_records = orig_records;
  if (test.variants) {
    const auto members = all_members(test);
    all_records = predict_records(model, members);
    arts = metrics(all_records);
    const auto groups = group_variants(test);
    arts->ars = ars(groups, all_records);
    subsets = subset_analysis(groups, all_records);
  } else {
    log << "no variants in " << cfg.data.test << "; ARS omitted\n";
  }

  const fs::path out = prepare_out(cfg, "eval");
  write_text(out / "metrics.json", metrics_json(original, arts, subsets));
  std::string table = metrics_table("model", original, arts);
  if (subsets) table += "\n" + subset_table(*subsets);
  write_text(out / "metrics.txt", table);
  std::ostringstream preds;
  for (const auto& r : all_records) {
    preds << json{{"id", r.id},
                  {"gold", std::string(to_string(r.gold))},
                  {"predicted", std::string(to_string(r.predicted))}}
                 .dump()
          << '\n';
  }
  write_text(out / "predictions.jsonl", preds.str());
  log << table;
}

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  SimRunConfig run;
  run.spec = cfg.sim;
  run.train = cfg.train;
  run.model = cfg.model;
  run.augment = cfg.augment;
  run.seed = cfg.seed;
  const SimData data = make_sim_data(cfg.sim, cfg.augment, cfg.seed);
  const SimRunResult r = run_sim(run, data);
  const auto ivs = all_interventions(cfg.sim);
  const TransferReport transfer = verify_transfer(r.trained.model, data.test_iid, cfg.sim, ivs,
                                                  TaskFamily::standard());
  const InvarianceGap adv_gap =
      invariance_gap(r.trained.model, data.test_adversarial, cfg.sim, ivs, cfg.train.divergence);

  const fs::path out = prepare_out(cfg, "simulate");
  const std::pair<const char*, const SimDataset*> sets[] = {
      {"train", &data.train},
      {"dev", &data.dev},
      {"test_iid", &data.test_iid},
      {"test_adversarial", &data.test_adversarial}};
  for (const auto& [name, d] : sets) {
    write_text(out / (std::string("sim_") + name + ".jsonl"), dataset_text(d->data));
    std::ostringstream ann;
    write_annotations(ann, *d);
    write_text(out / (std::string("sim_") + name + ".annotations.jsonl"), ann.str());
  }
  write_text(out / "sim_pairs.jsonl", pairs_text(data.train_pairs));
  write_text(out / "checkpoint.json", checkpoint_text(r.trained.model));
  write_text(out / "train_log.csv", log_text(r.trained.report));

  json tasks = json::array();
  for (const auto& t : transfer.tasks) {
    tasks.push_back({{"name", t.name},
                     {"mean_tv", t.mean_tv},
                     {"max_tv", t.max_tv},
                     {"violations", t.violations}});
  }
  json report{{"spurious_label_mi_train", spurious_label_mi(data.train, cfg.sim)},
              {"spurious_label_mi_test_adversarial",
               spurious_label_mi(data.test_adversarial, cfg.sim)},
              {"iid_accuracy", r.iid_accuracy},
              {"adversarial_accuracy", r.adversarial_accuracy},
              {"divergence", std::string(to_string(cfg.train.divergence))},
              {"gap_iid", gap_json(r.gap)},
              {"gap_adversarial", gap_json(adv_gap)},
              {"train", report_json(r.trained.report)},
              {"transfer",
               {{"checked", transfer.checked},
                {"reference_mean_tv", transfer.reference_mean_tv},
                {"reference_max_tv", transfer.reference_max_tv},
                {"violations", transfer.violations()},
                {"tasks", tasks}}}};
  write_text(out / "sim_report.json", report.dump(2) + "\n");
  log << "simulated " << to_string(cfg.train.regime) << ": iid acc " << r.iid_accuracy
      << ", adversarial acc " << r.adversarial_accuracy << ", mean gap " << r.gap.mean_div
      << ", transfer violations " << transfer.violations() << '\n';
}

void cmd_saliency(const RunConfig& cfg, std::ostream& log) {
  if (cfg.saliency.ids.empty()) throw ConfigError("saliency.ids is empty");
  const Model model = load_model(cfg);
  const Dataset test = load_test(cfg);
  std::unordered_map<std::string, Instance> by_id;
  for (const auto& inst : all_members(test)) by_id.emplace(inst.id, inst);
  std::vector<SaliencyMap> maps;
  for (const auto& id : cfg.saliency.ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("unknown instance id '" + id + "'");
    maps.push_back(token_saliency(model, it->second, cfg.saliency.target));
  }

  const fs::path out = prepare_out(cfg, "saliency");
  json j = json::array();
  for (const auto& m : maps) {
    json toks = json::array();
    for (const auto& t : m.tokens) {
      toks.push_back({{"token", t.token},
                      {"norm", t.norm},
                      {"intensity", t.intensity},
                      {"masked", t.masked}});
    }
    j.push_back({{"id", m.id}, {"tokens", toks}});
  }
  write_text(out / "saliency.json", j.dump(2) + "\n");
  if (cfg.saliency.mode == RenderMode::kHtml) {
    write_text(out / "saliency.html", render_html_report(maps));
  } else {
    std::string text;
    for (const auto& m : maps) text += render(m, RenderMode::kAnsi);
    write_text(out / "saliency.txt", text);
  }
  log << "saliency maps for " << maps.size() << " instances\n";
}

namespace {

MetricsReport metrics_from_json(const json& j) {
  MetricsReport m;
  m.n = j.at("n").get<std::size_t>();
  m.accuracy = j.at("accuracy").get<double>();
  m.macro_f1 = j.at("macro_f1").get<double>();
  if (j.contains("ars")) m.ars = j.at("ars").get<double>();
  return m;
}

}  // namespace

void cmd_report(const RunConfig& cfg, std::ostream& log) {
  if (cfg.report_input.empty()) throw ConfigError("report.input is not set");
  std::string table;
  try {
    const json j = json::parse(read_text(cfg.report_input));
    std::optional<MetricsReport> arts;
    if (j.contains("arts")) arts = metrics_from_json(j.at("arts"));
    table = metrics_table("model", metrics_from_json(j.at("original")), arts);
    if (j.contains("subsets")) {
      SubsetReport s;
      for (const auto& r : j.at("subsets").at("rows")) {
        SubsetRow row;
        const auto strat = parse_strategy(r.at("strategy").get<std::string>());
        if (!strat) throw DataError("bad strategy in " + cfg.report_input);
        row.strategy = *strat;
        row.groups = r.at("groups").get<std::size_t>();
        row.variants = r.at("variants").get<std::size_t>();
        row.original_accuracy = r.at("original_accuracy").get<double>();
        row.variant_accuracy = r.at("variant_accuracy").get<double>();
        row.diff = r.at("diff").get<double>();
        s.rows.push_back(row);
      }
      for (const auto& o : j.at("subsets").at("omitted")) {
        const auto strat = parse_strategy(o.get<std::string>());
        if (!strat) throw DataError("bad strategy in " + cfg.report_input);
        s.omitted.push_back(*strat);
      }
      table += "\n" + subset_table(s);
    }
  } catch (const json::exception& e) {
    throw DataError(cfg.report_input + ": " + e.what());
  }
  const fs::path out = prepare_out(cfg, "report");
  write_text(out / "report.txt", table);
  log << table;
}

void run_command(std::string_view name, const RunConfig& cfg, std::ostream& log) {
  if (name == "augment") return cmd_augment(cfg, log);
  if (name == "train") return cmd_train(cfg, log);
  if (name == "eval") return cmd_eval(cfg, log);
  if (name == "simulate") return cmd_simulate(cfg, log);
  if (name == "saliency") return cmd_saliency(cfg, log);
  if (name == "report") return cmd_report(cfg, log);
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  return 1;
}

}  // namespace crrlab
