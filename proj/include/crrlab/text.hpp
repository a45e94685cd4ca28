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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crrlab {

// Text is stored as UTF-8; every offset exposed by the library counts
// Unicode scalar values, not bytes.

std::size_t utf8_length(std::string_view s);

/// Byte offset of the code point with index `cp`; `cp == utf8_length(s)`
/// maps to `s.size()`. Throws std::out_of_range past the end.
std::size_t utf8_byte_offset(std::string_view s, std::size_t cp);

/// Code-point range [begin, end) of `s` as a std::string.
std::string utf8_substr(std::string_view s, std::size_t begin, std::size_t end);

/// Trims and collapses every whitespace run to a single space.
std::string normalize_whitespace(std::string_view s);

std::string ascii_lower(std::string_view s);

/// Lowercased, whitespace-normalized form used to compare aspect terms.
std::string normalize_term(std::string_view s);

struct Token {
  std::string text;        // lowercased
  std::size_t begin = 0;   // code point offsets into the source text
  std::size_t end = 0;
};

/// Lowercases and splits on whitespace; each punctuation character becomes
/// its own token. An apostrophe between two word characters stays inside the
/// word ("couldn't").
std::vector<Token> tokenize_with_offsets(std::string_view text);

std::vector<std::string> tokenize(std::string_view text);

/// Tokens covering the code-point span [begin, end): first index and one
/// past the last. Returns {0, 0} when nothing overlaps.
std::pair<std::size_t, std::size_t> token_range(const std::vector<Token>& tokens,
                                                std::size_t begin, std::size_t end);

/// True if the token sequence of `needle` occurs contiguously in `haystack`.
bool contains_token_sequence(const std::vector<std::string>& haystack,
                             const std::vector<std::string>& needle);

bool is_punctuation_token(std::string_view token);

}  // namespace crrlab
