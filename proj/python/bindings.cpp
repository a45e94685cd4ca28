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

#include <optional>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "crrlab/causal_sim.hpp"
#include "crrlab/commands.hpp"
#include "crrlab/corpus.hpp"
#include "crrlab/error.hpp"
#include "crrlab/eval.hpp"
#include "crrlab/model.hpp"
#include "crrlab/objective.hpp"
#include "crrlab/run_config.hpp"
#include "crrlab/saliency.hpp"
#include "crrlab/text.hpp"

namespace py = pybind11;
using namespace crrlab;

namespace {

Polarity polarity_arg(const std::string& s) {
  auto p = parse_polarity(s);
  if (!p) throw ConfigError("unknown polarity '" + s + "'");
  return *p;
}

DivergenceKind divergence_arg(const std::string& s) {
  auto k = parse_divergence(s);
  if (!k) throw ConfigError("unknown divergence '" + s + "'");
  return *k;
}

Instance make_instance(const std::string& text, const std::string& aspect_term,
                       std::size_t start, std::size_t end, const std::string& polarity,
                       const std::string& id) {
  Instance i{id, text, aspect_term, Span{start, end}, polarity_arg(polarity)};
  validate_instance(i);
  return i;
}

py::dict instance_dict(const Instance& i) {
  py::dict d;
  d["id"] = i.id;
  d["text"] = i.text;
  d["aspect_term"] = i.aspect_term;
  d["from"] = i.aspect_span.start;
  d["to"] = i.aspect_span.end;
  d["polarity"] = std::string(to_string(i.polarity));
  return d;
}

std::vector<PredictionRecord> records_arg(const std::vector<std::string>& gold,
                                          const std::vector<std::string>& pred) {
  if (gold.size() != pred.size()) throw ConfigError("gold and predicted lengths differ");
  std::vector<PredictionRecord> r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    r.push_back({std::to_string(i), polarity_arg(gold[i]), polarity_arg(pred[i])});
  }
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "crrlab core bindings";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  auto data = py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", data.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", data.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def("tokenize", &tokenize, py::arg("text"));

  m.def(
      "load_dataset",
      [](const std::filesystem::path& path, bool arts) {
        const LoadResult r =
            load_dataset(path, arts ? FileKind::kArts : FileKind::kOriginal, Split::kTest);
        py::dict out;
        py::list inst;
        for (const auto& i : r.dataset.instances) inst.append(instance_dict(i));
        out["instances"] = inst;
        py::list vars;
        if (r.dataset.variants) {
          for (const auto& v : *r.dataset.variants) {
            py::dict d = instance_dict(v.instance);
            d["source_id"] = v.source_id;
            d["strategy"] = std::string(to_string(v.strategy));
            vars.append(d);
          }
        }
        out["variants"] = vars;
        out["dropped_conflict"] = r.dropped_conflict;
        return out;
      },
      py::arg("path"), py::arg("arts") = false);

  m.def(
      "divergence",
      [](const std::string& kind, const PredictionDist& p, const PredictionDist& q) {
        return divergence(divergence_arg(kind), p, q);
      },
      py::arg("kind"), py::arg("p"), py::arg("q"));

  m.def(
      "crr_loss",
      [](const PredictionDist& p, const PredictionDist& q, const std::string& y, double alpha,
         const std::string& kind) {
        LossConfig cfg;
        cfg.alpha = alpha;
        cfg.divergence = divergence_arg(kind);
        const LossBreakdown b = crr_loss(p, q, polarity_arg(y), cfg);
        py::dict d;
        d["ce_orig"] = b.ce_orig;
        d["ce_aug"] = b.ce_aug;
        d["div"] = b.div;
        d["total"] = b.total;
        return d;
      },
      py::arg("p_orig"), py::arg("p_aug"), py::arg("label"), py::arg("alpha") = 1.0,
      py::arg("kind") = "kl_forward");

  m.def(
      "accuracy",
      [](const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
        return accuracy(records_arg(gold, pred));
      },
      py::arg("gold"), py::arg("predicted"));
  m.def(
      "macro_f1",
      [](const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
        return macro_f1(records_arg(gold, pred));
      },
      py::arg("gold"), py::arg("predicted"));

  py::class_<Model>(m, "Model")
      .def_static(
          "load", [](const std::filesystem::path& p) { return load_checkpoint(p); },
          py::arg("path"))
      .def_property_readonly("vocab_size", [](const Model& mo) { return mo.vocab.size(); })
      .def(
          "predict_proba",
          [](const Model& mo, const std::string& text, const std::string& aspect,
             std::size_t start, std::size_t end) {
            return mo.predict_dist(make_instance(text, aspect, start, end, "neutral", "x"));
          },
          py::arg("text"), py::arg("aspect_term"), py::arg("start"), py::arg("end"))
      .def(
          "predict",
          [](const Model& mo, const std::string& text, const std::string& aspect,
             std::size_t start, std::size_t end) {
            return std::string(
                to_string(mo.predict(make_instance(text, aspect, start, end, "neutral", "x"))));
          },
          py::arg("text"), py::arg("aspect_term"), py::arg("start"), py::arg("end"))
      .def(
          "saliency",
          [](const Model& mo, const std::string& text, const std::string& aspect,
             std::size_t start, std::size_t end, const std::string& polarity) {
            const SaliencyMap s =
                token_saliency(mo, make_instance(text, aspect, start, end, polarity, "x"));
            py::list out;
            for (const auto& t : s.tokens) {
              py::dict d;
              d["token"] = t.token;
              d["norm"] = t.norm;
              d["intensity"] = t.intensity;
              d["masked"] = t.masked;
              out.append(d);
            }
            return out;
          },
          py::arg("text"), py::arg("aspect_term"), py::arg("start"), py::arg("end"),
          py::arg("polarity"));

  m.def(
      "simulate",
      [](const std::string& regime, std::uint64_t seed, std::optional<std::size_t> epochs,
         std::optional<double> alpha, std::optional<std::size_t> n_train) {
        auto r = parse_regime(regime);
        if (!r) throw ConfigError("unknown regime '" + regime + "'");
        SimRunConfig cfg = default_sim_config(*r, seed);
        if (epochs) cfg.train.epochs = *epochs;
        if (alpha) cfg.train.alpha = *alpha;
        if (n_train) cfg.spec.n_train = *n_train;
        const SimData data = make_sim_data(cfg.spec, cfg.augment, seed);
        const SimRunResult res = run_sim(cfg, data);
        py::dict d;
        d["iid_accuracy"] = res.iid_accuracy;
        d["adversarial_accuracy"] = res.adversarial_accuracy;
        d["mean_gap"] = res.gap.mean_div;
        d["mean_tv"] = res.gap.mean_tv;
        py::list summed;
        for (const auto& e : res.trained.report.epochs) summed.append(e.summed_div);
        d["summed_div"] = summed;
        return d;
      },
      py::arg("regime") = "crr", py::arg("seed") = 0, py::arg("epochs") = py::none(),
      py::arg("alpha") = py::none(), py::arg("n_train") = py::none());

  m.def(
      "run_command",
      [](const std::string& name, const std::string& config_json,
         const std::vector<std::string>& overrides) {
        const RunConfig cfg = run_config_from_json(apply_overrides(config_json, overrides));
        std::ostringstream log;
        run_command(name, cfg, log);
        return log.str();
      },
      py::arg("name"), py::arg("config_json") = "{}",
      py::arg("overrides") = std::vector<std::string>{});
}
