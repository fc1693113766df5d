// Copyright 2026 The Telequery Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace telequery {

/// One word token. `text` keeps the original casing so chunk text can be
/// reconstructed; `folded` is the lowercase form used for scoring. `begin`
/// and `end` are byte offsets into the tokenized string.
struct Token {
  std::string text;
  std::string folded;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

/// Swappable tokenization strategy. Implementations must be deterministic
/// and safe to call concurrently.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<Token> tokenize(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

/// Tokens are maximal runs of Unicode letters and decimal digits. Invalid
/// UTF-8 bytes act as separators.
class WordTokenizer final : public Tokenizer {
 public:
  std::vector<Token> tokenize(std::string_view text) const override;
  std::string name() const override { return "word"; }
};

const Tokenizer& default_tokenizer();

/// Shorthand for default_tokenizer().tokenize(text).
std::vector<Token> tokenize(std::string_view text);

/// Lowercased token strings only.
std::vector<std::string> folded_tokens(std::string_view text);

/// Number of tokens without materializing them.
std::size_t count_tokens(std::string_view text);

std::string trim(std::string_view s);

/// Collapses runs of whitespace to a single space and trims the ends.
std::string normalize_whitespace(std::string_view s);

}  // namespace telequery
