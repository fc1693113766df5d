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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace telequery {

struct Option {
  std::string id;
  std::string text;

  bool operator==(const Option&) const = default;
};

/// A multiple-choice question. Options are kept in option-id order.
struct Question {
  std::string qid;
  std::string stem;
  std::vector<Option> options;
  std::optional<std::string> answer;
  std::optional<std::string> explanation;
  std::optional<std::string> category;

  const Option* find_option(std::string_view id) const;
  std::vector<std::string> option_ids() const;
  std::vector<std::string> option_texts() const;

  /// Throws DataError unless there are >= 2 non-empty options with unique
  /// ids and the answer, when present, names one of them.
  void validate() const;
};

/// Orders option ids numerically when both are integers, else lexically.
bool option_id_less(std::string_view a, std::string_view b);

/// Parses TeleQnA-style JSON: an object mapping qid to
/// {"question", "option 1".."option N", "answer": "option k: <text>",
///  "explanation", "category"}. File order is preserved.
std::vector<Question> parse_questions(std::string_view json_text);
std::vector<Question> load_questions(const std::filesystem::path& path);

/// Extracts k from "option k" or "option k: <text>"; nullopt otherwise.
std::optional<std::string> parse_answer_field(std::string_view answer);

}  // namespace telequery
