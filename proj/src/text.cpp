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

#include "crrlab/text.hpp"

#include <stdexcept>

namespace crrlab {
namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

std::size_t sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // stray byte, counted as one scalar
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c >= 0x80;
}

}  // namespace

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if (!is_continuation(c)) ++n;
  }
  return n;
}

std::size_t utf8_byte_offset(std::string_view s, std::size_t cp) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (is_continuation(static_cast<unsigned char>(s[i]))) continue;
    if (seen == cp) return i;
    ++seen;
  }
  if (seen == cp) return s.size();
  throw std::out_of_range("code point offset past end of text");
}

std::string utf8_substr(std::string_view s, std::size_t begin, std::size_t end) {
  const std::size_t b = utf8_byte_offset(s, begin);
  const std::size_t e = utf8_byte_offset(s, end);
  return std::string(s.substr(b, e - b));
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string normalize_term(std::string_view s) { return ascii_lower(normalize_whitespace(s)); }

std::vector<Token> tokenize_with_offsets(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  std::size_t cp = 0;
  Token word;
  bool in_word = false;
  auto flush = [&] {
    if (in_word) {
      word.end = cp;
      out.push_back(std::move(word));
      word = Token{};
      in_word = false;
    }
  };
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    const std::size_t len = std::min(sequence_length(c), text.size() - i);
    if (is_word_byte(c)) {
      if (!in_word) {
        in_word = true;
        word.begin = cp;
      }
      word.text.append(text.substr(i, len));
    } else if (c == '\'' && in_word && i + 1 < text.size() &&
               is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
      word.text.push_back('\'');
    } else {
      flush();
      if (!is_space(c)) {
        out.push_back(Token{std::string(1, static_cast<char>(c)), cp, cp + 1});
      }
    }
    i += len;
    ++cp;
  }
  flush();
  for (auto& t : out) t.text = ascii_lower(t.text);
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize_with_offsets(text)) out.push_back(std::move(t.text));
  return out;
}

std::pair<std::size_t, std::size_t> token_range(const std::vector<Token>& tokens,
                                                std::size_t begin, std::size_t end) {
  std::size_t first = tokens.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].end > begin && tokens[i].begin < end) {
      first = std::min(first, i);
      last = i + 1;
    }
  }
  if (first == tokens.size()) return {0, 0};
  return {first, last};
}

bool contains_token_sequence(const std::vector<std::string>& haystack,
                             const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size() && match; ++j) {
      match = haystack[i + j] == needle[j];
    }
    if (match) return true;
  }
  return false;
}

bool is_punctuation_token(std::string_view token) {
  return token.size() == 1 && !is_word_byte(static_cast<unsigned char>(token[0]));
}

}  // namespace crrlab
