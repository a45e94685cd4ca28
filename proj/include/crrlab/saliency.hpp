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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crrlab/corpus.hpp"
#include "crrlab/model.hpp"

namespace crrlab {

struct TokenSaliency {
  std::string token;
  double norm = 0.0;       // L2 norm of d CE / d hidden
  double intensity = 0.0;  // norm / max unmasked norm
  bool masked = false;     // punctuation or aspect token
};

struct SaliencyMap {
  std::string id;
  std::vector<TokenSaliency> tokens;
  bool empty_after_masking() const;
};

enum class SaliencyTarget : std::uint8_t { kGold, kPredicted };
enum class RenderMode : std::uint8_t { kAnsi, kHtml };

/// Gradient of the cross-entropy at the target label with respect to each
/// token's hidden state, dropout off. When every unmasked norm is zero the
/// unmasked tokens all get intensity 1.
SaliencyMap token_saliency(const Model& model, const Instance& inst,
                           SaliencyTarget target = SaliencyTarget::kGold);

enum class Bucket : std::uint8_t { kNone, kLight, kMedium, kDark };
Bucket bucket_of(const TokenSaliency& t);

std::string html_escape(std::string_view s);

std::string render(const SaliencyMap& map, RenderMode mode);

/// Standalone HTML page with one section per map.
std::string render_html_report(std::span<const SaliencyMap> maps);

}  // namespace crrlab
