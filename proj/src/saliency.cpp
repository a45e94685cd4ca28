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

#include "crrlab/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "crrlab/objective.hpp"
#include "crrlab/text.hpp"

namespace crrlab {

bool SaliencyMap::empty_after_masking() const {
  return std::all_of(tokens.begin(), tokens.end(), [](const auto& t) { return t.masked; });
}

SaliencyMap token_saliency(const Model& model, const Instance& inst, SaliencyTarget target) {
  const EncodedInput enc = encode(model.vocab, inst);
  const ForwardResult f = forward(model.params, enc);
  const Polarity y = target == SaliencyTarget::kGold ? inst.polarity : argmax(f.probs);
  const Matrix dh = backward(f.cache, model.params, cross_entropy_gradient(f.cache.logits, y),
                             nullptr);

  const auto toks = tokenize_with_offsets(inst.text);
  SaliencyMap map;
  map.id = inst.id;
  double max_norm = 0.0;
  for (std::size_t t = 0; t < toks.size(); ++t) {
    TokenSaliency s;
    s.token = toks[t].text;
    double sq = 0.0;
    for (double g : dh.row(t)) sq += g * g;
    s.norm = std::sqrt(sq);
    s.masked = is_punctuation_token(s.token) || (t >= enc.aspect_begin && t < enc.aspect_end);
    if (!s.masked) max_norm = std::max(max_norm, s.norm);
    map.tokens.push_back(std::move(s));
  }
  for (auto& s : map.tokens) {
    if (s.masked) continue;
    s.intensity = max_norm > 0.0 ? s.norm / max_norm : 1.0;
  }
  return map;
}

Bucket bucket_of(const TokenSaliency& t) {
  if (t.masked) return Bucket::kNone;
  if (t.intensity >= 0.66) return Bucket::kDark;
  if (t.intensity >= 0.33) return Bucket::kMedium;
  if (t.intensity > 0.0) return Bucket::kLight;
  return Bucket::kNone;
}

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&#39;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

namespace {

const char* ansi_color(Bucket b) {
  switch (b) {
    case Bucket::kDark:
      return "\x1b[48;5;160m";
    case Bucket::kMedium:
      return "\x1b[48;5;210m";
    case Bucket::kLight:
      return "\x1b[48;5;224m";
    case Bucket::kNone:
      break;
  }
  return "";
}

const char* css_class(Bucket b) {
  switch (b) {
    case Bucket::kDark:
      return "sal-dark";
    case Bucket::kMedium:
      return "sal-medium";
    case Bucket::kLight:
      return "sal-light";
    case Bucket::kNone:
      break;
  }
  return "";
}

}  // namespace

std::string render(const SaliencyMap& map, RenderMode mode) {
  std::string out;
  const bool plain = map.empty_after_masking();
  if (mode == RenderMode::kHtml) {
    out += "<section class=\"saliency\" data-id=\"" + html_escape(map.id) + "\">\n";
    out += "<h2>" + html_escape(map.id) + "</h2>\n";
    if (plain) out += "<!-- warning: every token is masked -->\n";
    out += "<p>";
    for (std::size_t i = 0; i < map.tokens.size(); ++i) {
      if (i) out += ' ';
      const auto& t = map.tokens[i];
      const Bucket b = bucket_of(t);
      if (b == Bucket::kNone) {
        out += html_escape(t.token);
      } else {
        out += std::string("<span class=\"") + css_class(b) + "\">" + html_escape(t.token) +
               "</span>";
      }
    }
    out += "</p>\n</section>\n";
    return out;
  }
  if (plain) out += "# warning: every token is masked\n";
  out += map.id + ": ";
  for (std::size_t i = 0; i < map.tokens.size(); ++i) {
    if (i) out += ' ';
    const auto& t = map.tokens[i];
    const Bucket b = bucket_of(t);
    if (b == Bucket::kNone) {
      out += t.token;
    } else {
      out += std::string(ansi_color(b)) + t.token + "\x1b[0m";
    }
  }
  out += '\n';
  return out;
}

std::string render_html_report(std::span<const SaliencyMap> maps) {
  std::string out =
      "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Saliency</title>\n"
      "<style>\n.sal-dark { background: #d7301f; color: #fff; }\n"
      ".sal-medium { background: #fc8d59; }\n.sal-light { background: #fdd49e; }\n</style>\n"
      "</head>\n<body>\n";
  for (const auto& m : maps) out += render(m, RenderMode::kHtml);
  out += "</body>\n</html>\n";
  return out;
}

}  // namespace crrlab
