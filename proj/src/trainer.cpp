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

#include "crrlab/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "crrlab/error.hpp"
#include "crrlab/eval.hpp"
#include "crrlab/optimizer.hpp"

namespace crrlab {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::kBaseline:
      return "baseline";
    case Regime::kAdversarial:
      return "adversarial";
    case Regime::kCrr:
      return "crr";
    case Regime::kCad:
      return "cad";
  }
  return "?";
}

std::optional<Regime> parse_regime(std::string_view s) {
  if (s == "baseline") return Regime::kBaseline;
  if (s == "adversarial") return Regime::kAdversarial;
  if (s == "crr") return Regime::kCrr;
  if (s == "cad") return Regime::kCad;
  return std::nullopt;
}

std::string_view to_string(DevMetric m) {
  return m == DevMetric::kAccuracy ? "accuracy" : "macro_f1";
}

std::optional<DevMetric> parse_dev_metric(std::string_view s) {
  if (s == "accuracy") return DevMetric::kAccuracy;
  if (s == "macro_f1") return DevMetric::kMacroF1;
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be >= 0");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw ConfigError("warmup_fraction must lie in [0, 1)");
  }
  if (alpha_grid.empty() || lr_grid.empty()) throw ConfigError("grids must be non-empty");
  loss().validate();
}

LossConfig TrainConfig::loss() const {
  LossConfig l;
  l.alpha = regime == Regime::kCrr ? alpha : 0.0;
  l.divergence = divergence;
  l.freeze_original_in_div = freeze_original_in_div;
  return l;
}

namespace {

struct EncodedPair {
  EncodedInput orig;
  EncodedInput aug;
  Polarity orig_label;
  Polarity aug_label;
  bool aug_is_identity;
};

std::vector<double> dropout_mask(std::size_t dim, double rate, Rng& rng) {
  if (rate <= 0.0) return {};
  std::vector<double> mask(dim);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask) m = bernoulli(rng, rate) ? 0.0 : keep_scale;
  return mask;
}

Logits scaled(const Logits& g, double s) {
  return {g[0] * s, g[1] * s, g[2] * s};
}

}  // namespace

double dev_score(const Model& model, const Dataset& dev, DevMetric metric) {
  const auto records = predict_records(model, dev.instances);
  return metric == DevMetric::kAccuracy ? accuracy(records) : macro_f1(records);
}

double summed_divergence(const Model& model, const PairedDataset& pairs, DivergenceKind kind) {
  double s = 0.0;
  for (const auto& [orig, aug] : pairs.pairs) {
    s += divergence(kind, model.predict_dist(orig), model.predict_dist(aug.instance));
  }
  return s;
}

TrainResult train(const Model& init, const PairedDataset& train_pairs, const Dataset& dev,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (dev.instances.empty()) throw ConfigError("dev set is empty");
  if (train_pairs.pairs.empty()) throw ConfigError("training set is empty");
  const LossConfig loss_cfg = cfg.loss();

  std::vector<EncodedPair> data;
  data.reserve(train_pairs.pairs.size());
  for (const auto& [orig, aug] : train_pairs.pairs) {
    data.push_back(EncodedPair{encode(init.vocab, orig), encode(init.vocab, aug.instance),
                               orig.polarity, aug.instance.polarity,
                               aug.kind == AugmentKind::kIdentity});
  }

  const std::size_t n = data.size();
  const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  AdamWConfig opt_cfg;
  opt_cfg.lr = cfg.lr;
  opt_cfg.weight_decay = cfg.weight_decay;
  opt_cfg.warmup_steps = static_cast<std::size_t>(
      std::llround(cfg.warmup_fraction * static_cast<double>(steps_per_epoch * cfg.epochs)));

  Model model = init;
  AdamW opt(model.params, opt_cfg);
  ModelParams grads = model.params;
  const std::size_t dim = model.params.dim();
  const double rate = model.config.dropout;

  TrainResult result{model, {}};
  TrainReport& report = result.report;
  report.regime = cfg.regime;
  report.dev_metric = cfg.dev_metric;
  report.alpha = loss_cfg.alpha;
  report.lr = cfg.lr;
  bool have_best = false;

  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(substream_seed(cfg.seed, "shuffle", epoch));
    shuffle(order, shuffle_rng);

    double ce_sum = 0.0;
    std::size_t ce_terms = 0;
    double div_sum = 0.0;
    std::size_t div_terms = 0;

    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(n, lo + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(hi - lo);
      Rng drop_rng(substream_seed(cfg.seed, "dropout", (epoch - 1) * steps_per_epoch + b));
      grads.zero();
      double batch_loss = 0.0;

      try {
        for (std::size_t k = lo; k < hi; ++k) {
          const EncodedPair& ex = data[order[k]];
          const auto mask_o = dropout_mask(dim, rate, drop_rng);
          auto fo = forward(model.params, ex.orig, mask_o);

          switch (cfg.regime) {
            case Regime::kBaseline: {
              const double ce = -std::log(clamp_probability(fo.probs[index_of(ex.orig_label)]));
              ce_sum += ce;
              ++ce_terms;
              batch_loss += ce;
              backward(fo.cache, model.params,
                       scaled(cross_entropy_gradient(fo.cache.logits, ex.orig_label), inv_batch),
                       &grads);
              break;
            }
            case Regime::kCad: {
              const double ce = -std::log(clamp_probability(fo.probs[index_of(ex.orig_label)]));
              ce_sum += ce;
              ++ce_terms;
              batch_loss += ce;
              backward(fo.cache, model.params,
                       scaled(cross_entropy_gradient(fo.cache.logits, ex.orig_label), inv_batch),
                       &grads);
              if (!ex.aug_is_identity) {
                const auto mask_a = dropout_mask(dim, rate, drop_rng);
                auto fa = forward(model.params, ex.aug, mask_a);
                const double ce_a = -std::log(clamp_probability(fa.probs[index_of(ex.aug_label)]));
                ce_sum += ce_a;
                ++ce_terms;
                batch_loss += ce_a;
                backward(fa.cache, model.params,
                         scaled(cross_entropy_gradient(fa.cache.logits, ex.aug_label), inv_batch),
                         &grads);
              }
              break;
            }
            case Regime::kAdversarial:
            case Regime::kCrr: {
              const auto mask_a = dropout_mask(dim, rate, drop_rng);
              auto fa = forward(model.params, ex.aug, mask_a);
              const LossBreakdown lb = crr_loss(fo.probs, fa.probs, ex.orig_label, loss_cfg);
              ce_sum += lb.ce_orig + lb.ce_aug;
              ce_terms += 2;
              div_sum += lb.div;
              ++div_terms;
              batch_loss += lb.total;
              const auto g = crr_loss_gradient(fo.cache.logits, fa.cache.logits, ex.orig_label,
                                               loss_cfg);
              backward(fo.cache, model.params, scaled(g.orig, inv_batch), &grads);
              backward(fa.cache, model.params, scaled(g.aug, inv_batch), &grads);
              break;
            }
          }
        }
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(b + 1) +
                           ": " + e.what());
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(b + 1));
      }
      opt.step(model.params, grads);
    }
    if (!model.params.all_finite()) {
      throw NumericError("non-finite parameters after epoch " + std::to_string(epoch));
    }

    EpochRow row;
    row.epoch = epoch;
    row.mean_ce = ce_terms ? ce_sum / static_cast<double>(ce_terms) : 0.0;
    row.mean_div = div_terms ? div_sum / static_cast<double>(div_terms) : 0.0;
    row.summed_div = summed_divergence(model, train_pairs, cfg.divergence);
    row.dev_metric = dev_score(model, dev, cfg.dev_metric);
    report.epochs.push_back(row);
    if (!have_best || row.dev_metric > report.best_dev) {
      have_best = true;
      report.best_dev = row.dev_metric;
      report.best_epoch = epoch;
      result.model = model;
    }
  }
  return result;
}

GridResult grid_search(const Model& init, const PairedDataset& train_pairs, const Dataset& dev,
                       const TrainConfig& base) {
  base.validate();
  const std::vector<double> alphas =
      base.regime == Regime::kCrr ? base.alpha_grid : std::vector<double>{0.0};
  GridResult out;
  bool have = false;
  for (double alpha : alphas) {
    for (double lr : base.lr_grid) {
      TrainConfig cfg = base;
      cfg.alpha = alpha;
      cfg.lr = lr;
      TrainResult r = train(init, train_pairs, dev, cfg);
      out.cells.push_back(GridCell{alpha, lr, r.report.best_dev, r.report.best_epoch});
      const bool better =
          !have || r.report.best_dev > out.best.report.best_dev ||
          (r.report.best_dev == out.best.report.best_dev &&
           (alpha < out.best_config.alpha ||
            (alpha == out.best_config.alpha && lr < out.best_config.lr)));
      if (better) {
        have = true;
        out.best_config = cfg;
        out.best = std::move(r);
      }
    }
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void write_training_log(std::ostream& out, const TrainReport& report) {
  out << "epoch,mean_ce,mean_div,summed_div,dev_metric\n";
  for (const auto& r : report.epochs) {
    out << r.epoch << ',' << fmt(r.mean_ce) << ',' << fmt(r.mean_div) << ','
        << fmt(r.summed_div) << ',' << fmt(r.dev_metric) << '\n';
  }
}

void write_grid_report(std::ostream& out, const GridResult& grid) {
  out << "alpha,lr,best_dev,best_epoch,selected\n";
  for (const auto& c : grid.cells) {
    const bool selected = c.alpha == grid.best_config.alpha && c.lr == grid.best_config.lr;
    out << fmt(c.alpha) << ',' << fmt(c.lr) << ',' << fmt(c.best_dev) << ',' << c.best_epoch
        << ',' << (selected ? 1 : 0) << '\n';
  }
}

}  // namespace crrlab
