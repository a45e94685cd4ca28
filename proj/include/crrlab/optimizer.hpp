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

#pragma once

#include <cstddef>

#include "crrlab/model.hpp"

namespace crrlab {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  /// Steps over which the learning rate ramps linearly up from 0.
  std::size_t warmup_steps = 0;
};

/// Decoupled weight decay Adam. Moments mirror the parameter shapes.
class AdamW {
 public:
  AdamW(const ModelParams& like, AdamWConfig cfg);

  /// Learning rate applied by the next step(): lr * min(1, t / warmup)
  /// for the 0-based step index t.
  double current_lr() const;
  std::size_t steps() const { return step_; }
  const AdamWConfig& config() const { return cfg_; }

  /// theta <- theta - lr_t * (m_hat / (sqrt(v_hat) + eps) + wd * theta)
  void step(ModelParams& params, const ModelParams& grads);

 private:
  AdamWConfig cfg_;
  ModelParams m_;
  ModelParams v_;
  std::size_t step_ = 0;
};

}  // namespace crrlab
