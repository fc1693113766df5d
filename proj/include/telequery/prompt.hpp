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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "telequery/question.hpp"

namespace telequery {

enum class PromptMode { mcq, open };

/// Prompt sections in the order they are always rendered.
enum class Section { instructions, context, abbreviations, question, options };

std::string_view to_string(PromptMode mode);
std::string_view to_string(Section section);

struct ContextChunk {
  std::string chunk_id;
  std::string text;
};

struct PromptInput {
  std::string question;
  std::vector<Option> options;
  /// Best-ranked first.
  std::vector<ContextChunk> context;
  /// "SHORT: LONG" lines.
  std::vector<std::string> expansions;
};

/// Instruction text plus a layout with {instructions}, {context},
/// {abbreviations}, {question} and {options} placeholders. Layout
/// paragraphs (blank-line separated) whose placeholders all render empty
/// are dropped, so headers such as "Context:" disappear with their section.
///
/// File form:
///   --- instructions ---
///   <instruction text>
///   --- layout ---
///   <layout>
struct PromptTemplate {
  std::string instructions;
  std::string layout;

  static PromptTemplate default_mcq();
  static PromptTemplate default_open();
  static PromptTemplate parse(std::string_view file_text);
  static PromptTemplate load(const std::filesystem::path& path);
  std::string serialize() const;

  /// Throws ConfigError for unknown or repeated placeholders, or
  /// placeholders out of section order.
  void validate() const;
};

struct PromptBundle {
  std::string text;
  std::size_t word_count = 0;
  /// ceil(word_count * tokens_per_word).
  std::size_t token_estimate = 0;
  PromptMode mode = PromptMode::mcq;
  std::vector<Section> parts;
};

inline constexpr double kDefaultTokensPerWord = 1.3;
inline constexpr std::size_t kDefaultContextWindow = 2048;

PromptBundle build_prompt_mcq(const PromptInput& input, const PromptTemplate& tmpl,
                              double tokens_per_word = kDefaultTokensPerWord);

/// Same assembly without the options section. Throws ConfigError if
/// `input.options` is non-empty.
PromptBundle build_prompt_open(const PromptInput& input, const PromptTemplate& tmpl,
                               double tokens_per_word = kDefaultTokensPerWord);

struct BudgetCheck {
  bool ok = true;
  std::size_t excess = 0;
};

BudgetCheck check_budget(const PromptBundle& bundle, std::size_t max_tokens);

struct BudgetPolicy {
  std::size_t max_tokens = kDefaultContextWindow;
  double tokens_per_word = kDefaultTokensPerWord;
  /// Drop lowest-ranked context chunks until the prompt fits.
  bool drop_chunks = true;
};

struct FittedPrompt {
  PromptBundle bundle;
  std::size_t dropped_chunks = 0;
  /// Still over budget after any dropping.
  bool overflow = false;
};

/// Builds the prompt for `mode` and applies the overflow policy. Overflow
/// is logged as a warning; text is never truncated.
FittedPrompt fit_to_budget(PromptInput input, PromptMode mode, const PromptTemplate& tmpl,
                           const BudgetPolicy& policy);

}  // namespace telequery
