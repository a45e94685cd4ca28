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

#include "crrlab/optimizer.hpp"

#include <cmath>
#include <vector>

#include "crrlab/error.hpp"

namespace crrlab {

AdamW::AdamW(const ModelParams& like, AdamWConfig cfg) : cfg_(cfg), m_(like), v_(like) {
  if (!(cfg_.lr >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (!(cfg_.weight_decay >= 0.0)) throw ConfigError("weight decay must be >= 0");
  if (!(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0 && cfg_.beta2 >= 0.0 && cfg_.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  m_.zero();
  v_.zero();
}

double AdamW::current_lr() const {
  if (cfg_.warmup_steps == 0 || step_ >= cfg_.warmup_steps) return cfg_.lr;
  return cfg_.lr * static_cast<double>(step_) / static_cast<double>(cfg_.warmup_steps);
}

void AdamW::step(ModelParams& params, const ModelParams& grads) {
  if (!params.same_shape(grads) || !params.same_shape(m_)) {
    throw ConfigError("optimizer: parameter/gradient shape mismatch");
  }
  const double lr = current_lr();
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);

  std::vector<Matrix*> ps, ms, vs;
  std::vector<const Matrix*> gs;
  params.for_each([&](std::string_view, Matrix& x) { ps.push_back(&x); });
  m_.for_each([&](std::string_view, Matrix& x) { ms.push_back(&x); });
  v_.for_each([&](std::string_view, Matrix& x) { vs.push_back(&x); });
  grads.for_each([&](std::string_view, const Matrix& x) { gs.push_back(&x); });

  for (std::size_t k = 0; k < ps.size(); ++k) {
    auto& theta = ps[k]->data;
    auto& m = ms[k]->data;
    auto& v = vs[k]->data;
    const auto& g = gs[k]->data;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      if (lr == 0.0) continue;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      theta[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * theta[i]);
    }
  }
}

}  // namespace crrlab
