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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../support/ars_oracle.hpp"
#include "../support/fixtures.hpp"
#include "../support/gradcheck.hpp"
#include "crrlab/aspect_bank.hpp"
#include "crrlab/augment.hpp"
#include "crrlab/causal_sim.hpp"
#include "crrlab/eval.hpp"
#include "crrlab/objective.hpp"
#include "crrlab/rng.hpp"

using namespace crrlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PredictionDist random_dist(Rng& rng) {
  PredictionDist p{};
  double s = 0;
  for (double& v : p) s += (v = -std::log(1.0 - uniform01(rng)));
  for (double& v : p) v /= s;
  return p;
}

// -- 1 ----------------------------------------------------------------------

Outcome gradients() {
  double model = 0, crr = 0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    model = std::max(model, testing::check_model_gradient(s).max_rel_error);
    crr = std::max(crr, testing::check_crr_gradient(s).max_rel_error);
  }
  return {model < 1e-4 && crr < 1e-4, fmt("max rel err model %.2e, crr %.2e", model, crr)};
}

// -- 2 ----------------------------------------------------------------------

double kl_by_terms(const PredictionDist& p, const PredictionDist& q) {
  double s = 0;
  for (int i = 0; i < 3; ++i) {
    const double a = std::max(p[i], kProbEpsilon), b = std::max(q[i], kProbEpsilon);
    s += a * (std::log(a) - std::log(b));
  }
  return s;
}

Outcome divergences() {
  Rng rng(2);
  double self = 0, asym = 0, kl_err = 0;
  const auto kinds = {DivergenceKind::kKlForward, DivergenceKind::kKlReverse, DivergenceKind::kJs};
  for (int i = 0; i < 100; ++i) {
    const auto p = random_dist(rng), q = random_dist(rng);
    for (auto k : kinds) self = std::max(self, std::abs(divergence(k, p, p)));
    asym = std::max(asym, std::abs(divergence(DivergenceKind::kJs, p, q) -
                                   divergence(DivergenceKind::kJs, q, p)));
  }
  const std::vector<std::pair<PredictionDist, PredictionDist>> pairs = {
      {{0.5, 0.5, 0.0}, {0.25, 0.5, 0.25}},
      {{0.5, 0.0, 0.5}, {0.2, 0.3, 0.5}},
      {{0.0, 0.5, 0.5}, {1.0 / 3, 1.0 / 3, 1.0 / 3}},
      {{0.5, 0.25, 0.25}, {0.25, 0.25, 0.5}}};
  for (const auto& [p, q] : pairs) {
    kl_err = std::max(kl_err, std::abs(divergence(DivergenceKind::kKlForward, p, q) -
                                       kl_by_terms(p, q)));
    kl_err = std::max(kl_err, std::abs(divergence(DivergenceKind::kKlReverse, p, q) -
                                       kl_by_terms(q, p)));
  }
  return {self == 0.0 && asym <= 1e-12 && kl_err <= 1e-9,
          fmt("max D(p,p) %.1e, JS asymmetry %.1e, KL term error %.1e", self, asym, kl_err)};
}

// -- 3 ----------------------------------------------------------------------

Outcome ars_oracle() {
  int mismatches = 0;
  for (std::uint64_t s = 1; s <= 200; ++s) {
    const auto f = testing::random_ars_fixture(s);
    if (ars(group_variants(f.data), f.records) != testing::brute_force_ars(f)) ++mismatches;
  }
  return {mismatches == 0, fmt("%d/200 fixtures differ", mismatches)};
}

// -- 4 ----------------------------------------------------------------------

Outcome augmentation_fuzz() {
  const Dataset d = testing::sample_train();
  const AspectBank bank = build_bank(d, SentimentLexicon::bundled(), 5);
  std::size_t generated = 0, bad = 0, front = 0, placed = 0;
  std::string first_bad;
  for (std::uint64_t seed = 0; generated < 1000; ++seed) {
    AugmentConfig cfg;
    cfg.seed = seed;
    for (const auto& [x, a] : augment_dataset(d, bank, cfg).pairs) {
      ++generated;
      const std::string why = testing::add_diff_mix_violation(x, a);
      if (!why.empty() && bad++ == 0) first_bad = x.id + ": " + why;
      placed += a.position != Position::kNone;
      front += a.position == Position::kFront;
    }
  }
  const double frac = static_cast<double>(front) / static_cast<double>(placed);
  std::size_t rear_front = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    AugmentConfig cfg;
    cfg.seed = seed;
    cfg.position_policy = PositionPolicy::kRearOnly;
    AugmentAudit au;
    augment_dataset(d, bank, cfg, &au);
    rear_front += au.front;
  }
  return {bad == 0 && frac >= 0.4 && frac <= 0.6 && rear_front == 0,
          fmt("%zu generations, %zu violations%s%s, front fraction %.3f, rear_only front %zu",
              generated, bad, bad ? " e.g. " : "", first_bad.c_str(), frac, rear_front)};
}

// -- synthetic benchmark runs shared by 5-9 and 11 -------------------------

struct RunKey {
  std::string variant;
  std::uint64_t seed;
  auto operator<=>(const RunKey&) const = default;
};

struct Bench {
  std::map<RunKey, SimRunResult> runs;
  std::map<std::uint64_t, SimData> data;
  double seconds = 0;
};

SimRunConfig bench_config(const std::string& variant, std::uint64_t seed) {
  if (variant == "baseline") return default_sim_config(Regime::kBaseline, seed);
  if (variant == "adversarial") return default_sim_config(Regime::kAdversarial, seed);
  SimRunConfig c = default_sim_config(Regime::kCrr, seed);
  if (variant == "crr_kl_reverse") c.train.divergence = DivergenceKind::kKlReverse;
  if (variant == "crr_js") c.train.divergence = DivergenceKind::kJs;
  return c;
}

const SimData& bench_data(Bench& b, std::uint64_t seed) {
  auto it = b.data.find(seed);
  if (it == b.data.end()) {
    const SimRunConfig c = default_sim_config(Regime::kCrr, seed);
    it = b.data.emplace(seed, make_sim_data(c.spec, c.augment, seed)).first;
  }
  return it->second;
}

const SimRunResult& bench_run(Bench& b, const std::string& variant, std::uint64_t seed) {
  const RunKey key{variant, seed};
  auto it = b.runs.find(key);
  if (it == b.runs.end()) {
    const auto t0 = std::chrono::steady_clock::now();
    it = b.runs.emplace(key, run_sim(bench_config(variant, seed), bench_data(b, seed))).first;
    b.seconds += seconds_since(t0);
  }
  return it->second;
}

constexpr std::uint64_t kSeeds = 5;

struct Means {
  double iid = 0, adv = 0, gap = 0;
};

Means means(Bench& b, const std::string& variant) {
  Means m;
  for (std::uint64_t s = 1; s <= kSeeds; ++s) {
    const auto& r = bench_run(b, variant, s);
    m.iid += r.iid_accuracy / kSeeds;
    m.adv += r.adversarial_accuracy / kSeeds;
    m.gap += r.gap.mean_div / kSeeds;
  }
  return m;
}

// -- 5 ----------------------------------------------------------------------

Outcome divergence_trend(Bench& b) {
  int down = 0;
  std::string trace;
  for (std::uint64_t s = 1; s <= kSeeds; ++s) {
    const auto& ep = bench_run(b, "crr", s).trained.report.epochs;
    down += ep.back().summed_div < ep.front().summed_div;
    trace += fmt(" s%d %.3f->%.4f", static_cast<int>(s), ep.front().summed_div,
                 ep.back().summed_div);
  }
  return {down == static_cast<int>(kSeeds),
          fmt("%d/%d seeds end below epoch 1;", down, static_cast<int>(kSeeds)) + trace};
}

// -- 6 ----------------------------------------------------------------------

Outcome robustness(Bench& b) {
  const Means base = means(b, "baseline"), adv = means(b, "adversarial"), crr = means(b, "crr");
  const bool pass = crr.adv >= adv.adv + 0.02 && crr.adv >= base.adv + 0.05 &&
                    crr.gap <= 0.5 * base.gap;
  std::string per_seed;
  for (const char* v : {"baseline", "adversarial", "crr"}) {
    per_seed += std::string(" ") + v + ":";
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
      per_seed += fmt(" %.1f", 100 * bench_run(b, v, s).adversarial_accuracy);
    }
  }
  return {pass, fmt("intervened-test acc baseline %.2f, adversarial %.2f, crr %.2f; "
                    "gap crr %.4f vs baseline %.4f (%.0f%%); per seed",
                    100 * base.adv, 100 * adv.adv, 100 * crr.adv, crr.gap, base.gap,
                    100 * crr.gap / base.gap) +
                    per_seed};
}

// -- 7 ----------------------------------------------------------------------

Outcome iid(Bench& b) {
  const Means base = means(b, "baseline"), crr = means(b, "crr");
  return {crr.iid >= base.iid - 0.01,
          fmt("IID acc baseline %.2f, crr %.2f", 100 * base.iid, 100 * crr.iid)};
}

// -- 8 ----------------------------------------------------------------------

Outcome alpha_sweep(Bench& b) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> acc;
  std::string trace;
  for (double alpha : {1.0, 2.0, 3.0, 4.0, 5.0}) {
    SimRunConfig c = default_sim_config(Regime::kCrr, 1);
    double a;
    if (alpha == c.train.alpha) {
      a = bench_run(b, "crr", 1).adversarial_accuracy;
    } else {
      c.train.alpha = alpha;
      a = run_sim(c, bench_data(b, 1)).adversarial_accuracy;
    }
    acc.push_back(a);
    trace += fmt(" %g:%.2f", alpha, 100 * a);
  }
  const double spread = *std::max_element(acc.begin(), acc.end()) -
                        *std::min_element(acc.begin(), acc.end());
  return {spread <= 0.05 && seconds_since(t0) < 900,
          fmt("spread %.2f points;", 100 * spread) + trace};
}

// -- 9 ----------------------------------------------------------------------

Outcome transfer(Bench& b) {
  const auto t0 = std::chrono::steady_clock::now();
  const TaskFamily fam = TaskFamily::standard();
  Rng rng(9);
  std::size_t random_violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto p = random_dist(rng), q = random_dist(rng);
    const double ref = total_variation(p, q);
    for (const auto& t : fam.tasks) {
      if (total_variation(pushforward(p, t), pushforward(q, t)) > ref + 1e-12) {
        ++random_violations;
      }
    }
  }
  const SimRunConfig c = default_sim_config(Regime::kCrr, 1);
  const SimData& d = bench_data(b, 1);
  const auto ivs = all_interventions(c.spec);
  const TransferReport rep =
      verify_transfer(bench_run(b, "crr", 1).trained.model, d.test_iid, c.spec, ivs, fam);
  bool means_ok = true;
  for (const auto& t : rep.tasks) means_ok &= t.mean_tv <= rep.reference_mean_tv + 1e-12;
  const double secs = seconds_since(t0);
  return {random_violations == 0 && rep.violations() == 0 && means_ok && secs < 60,
          fmt("random pairs: %zu violations; trained model: %zu pairs x %zu tasks, "
              "%zu violations, reference mean TV %.4f",
              random_violations, rep.checked, rep.tasks.size(), rep.violations(),
              rep.reference_mean_tv)};
}

// -- 10 ---------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string("\"") + CRRLAB_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    if (e.path().filename() == "metadata.txt") {
      std::istringstream lines(text);
      std::string line;
      text.clear();
      while (std::getline(lines, line)) {
        if (!line.starts_with("created:")) text += line + '\n';
      }
    }
    out[e.path().filename().string()] = text;
  }
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "crrlab_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string train = (fs::path(CRRLAB_SOURCE_DIR) / "data/sample/train.jsonl").string();
  const fs::path aug = root / "augment", tr = root / "train", sim = root / "simulate";
  const std::vector<std::pair<fs::path, std::string>> cmds = {
      {aug, "augment --seed 11 --out \"" + aug.string() + "\" --set data.train=\"" + train + "\""},
      {tr, "train --seed 11 --out \"" + tr.string() + "\" --set data.train=\"" + train +
               "\" --set data.pairs=\"" + (aug / "pairs.jsonl").string() +
               "\" --set train.epochs=5"},
      {sim, "simulate --seed 11 --out \"" + sim.string() + "\" --config \"" +
                (fs::path(CRRLAB_SOURCE_DIR) / "configs/sim.json").string() + "\""}};
  std::string detail;
  bool pass = true;
  for (const auto& [dir, args] : cmds) {
    const std::string name = dir.filename().string();
    std::map<std::string, std::string> first;
    for (int round = 0; round < 2; ++round) {
      const int rc = run_cli(args, root / (name + ".log"));
      if (rc != 0) {
        pass = false;
        detail += fmt(" %s exit %d;", name.c_str(), rc);
        break;
      }
      auto snap = snapshot(dir);
      if (round == 0) {
        first = std::move(snap);
        continue;
      }
      std::size_t differ = 0;
      for (const auto& [f, text] : snap) differ += first.count(f) == 0 || first.at(f) != text;
      differ += first.size() != snap.size();
      pass &= differ == 0;
      detail += fmt(" %s %zu files, %zu differ;", name.c_str(), snap.size(), differ);
    }
  }
  return {pass, detail};
}

// -- 11 ---------------------------------------------------------------------

Outcome divergence_variants(Bench& b) {
  const Means base = means(b, "baseline");
  std::string detail = fmt("baseline %.2f;", 100 * base.adv);
  bool pass = true;
  for (const char* v : {"crr", "crr_kl_reverse", "crr_js"}) {
    const Means m = means(b, v);
    pass &= m.adv >= base.adv + 0.05;
    detail += fmt(" %s %.2f", v, 100 * m.adv);
  }
  return {pass, detail};
}

}  // namespace

int main() {
  Bench bench;
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient exactness", 10, gradients},
      {2, "divergence identities", 1, divergences},
      {3, "ARS oracle equivalence", 1, ars_oracle},
      {4, "augmentation contract fuzz", 5, augmentation_fuzz},
      {5, "divergence falls during training", 300, [&] { return divergence_trend(bench); }},
      {6, "robustness ordering", 900, [&] { return robustness(bench); }},
      {7, "IID non-degradation", 900, [&] { return iid(bench); }},
      {8, "alpha insensitivity", 900, [&] { return alpha_sweep(bench); }},
      {9, "transfer inequality", 60, [&] { return transfer(bench); }},
      {10, "determinism", 600, determinism},
      {11, "divergence variants beat baseline", 900,
       [&] { return divergence_variants(bench); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    // Shared benchmark runs are charged to the criterion that first needs them.
    const double secs = seconds_since(t0);
    const bool in_time = secs <= c.limit_s;
    if (!in_time) o.detail += fmt(" [over %.0fs limit]", c.limit_s);
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s %2d %s: %s (%.1fs)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
