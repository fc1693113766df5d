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

#include "telequery/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <cctype>

namespace telequery {
namespace {

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  U8_APPEND_UNSAFE(buf, len, c);
  out.append(buf, static_cast<std::size_t>(len));
}

bool is_word_char(UChar32 c) {
  if (c < 0) return false;
  if (c < 0x80) return std::isalnum(static_cast<unsigned char>(c)) != 0;
  return u_isalpha(c) || u_charType(c) == U_DECIMAL_DIGIT_NUMBER;
}

template <typename Fn>
void for_each_token(std::string_view text, Fn&& on_token) {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  int32_t start = -1;
  std::string folded;
  while (i < length) {
    const int32_t at = i;
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    if (is_word_char(c)) {
      if (start < 0) {
        start = at;
        folded.clear();
      }
      append_utf8(folded, u_tolower(c));
    } else if (start >= 0) {
      on_token(static_cast<std::size_t>(start), static_cast<std::size_t>(at), folded);
      start = -1;
    }
  }
  if (start >= 0) {
    on_token(static_cast<std::size_t>(start), text.size(), folded);
  }
}

}  // namespace

std::vector<Token> WordTokenizer::tokenize(std::string_view text) const {
  std::vector<Token> tokens;
  for_each_token(text, [&](std::size_t begin, std::size_t end, const std::string& folded) {
    tokens.push_back(Token{std::string(text.substr(begin, end - begin)), folded, begin, end});
  });
  return tokens;
}

const Tokenizer& default_tokenizer() {
  static const WordTokenizer tokenizer;
  return tokenizer;
}

std::vector<Token> tokenize(std::string_view text) { return default_tokenizer().tokenize(text); }

std::vector<std::string> folded_tokens(std::string_view text) {
  std::vector<std::string> out;
  for_each_token(text, [&](std::size_t, std::size_t, const std::string& folded) {
    out.push_back(folded);
  });
  return out;
}

std::size_t count_tokens(std::string_view text) {
  std::size_t n = 0;
  for_each_token(text, [&](std::size_t, std::size_t, const std::string&) { ++n; });
  return n;
}

std::string trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace telequery
