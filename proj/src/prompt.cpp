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

#include "telequery/prompt.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "telequery/error.hpp"
#include "telequery/log.hpp"
#include "telequery/text.hpp"

namespace telequery {
namespace {

constexpr std::array<Section, 5> kSections = {Section::instructions, Section::context,
                                              Section::abbreviations, Section::question,
                                              Section::options};

constexpr std::string_view kInstructionsMarker = "--- instructions ---";
constexpr std::string_view kLayoutMarker = "--- layout ---";

constexpr std::string_view kMcqInstructions =
    "Answer the multiple-choice question about telecommunications standards. Use the context "
    "and abbreviations if they help. Reply with the correct option as \"Answer: option <number>\".";

constexpr std::string_view kOpenInstructions =
    "Answer the question about telecommunications standards in one or two sentences. Use the "
    "context and abbreviations if they help.";

constexpr std::string_view kMcqLayout =
    "{instructions}\n"
    "\n"
    "Context:\n"
    "{context}\n"
    "\n"
    "Abbreviations:\n"
    "{abbreviations}\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "{options}\n"
    "\n"
    "Answer:";

constexpr std::string_view kOpenLayout =
    "{instructions}\n"
    "\n"
    "Context:\n"
    "{context}\n"
    "\n"
    "Abbreviations:\n"
    "{abbreviations}\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Answer:";

std::optional<Section> section_named(std::string_view name) {
  for (Section s : kSections) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

struct Placeholder {
  std::size_t pos;
  std::size_t len;
  Section section;
};

std::vector<Placeholder> find_placeholders(std::string_view text) {
  std::vector<Placeholder> found;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    const std::size_t close = text.find('}', pos);
    if (close == std::string_view::npos) break;
    const auto name = text.substr(pos + 1, close - pos - 1);
    if (auto s = section_named(name)) {
      found.push_back({pos, close - pos + 1, *s});
      pos = close + 1;
    } else {
      ++pos;
    }
  }
  return found;
}

std::vector<std::string> split_paragraphs(std::string_view layout) {
  std::vector<std::string> paragraphs;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = layout.find("\n\n", pos);
    paragraphs.emplace_back(layout.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 2;
  }
  return paragraphs;
}

std::string render_section(Section s, const PromptInput& in, const PromptTemplate& tmpl, PromptMode mode) {
  std::string out;
  switch (s) {
    case Section::instructions:
      return trim(tmpl.instructions);
    case Section::context:
      for (const auto& c : in.context) {
        if (!out.empty()) out += "\n\n";
        out += "[source: " + c.chunk_id + "]\n" + trim(c.text);
      }
      return out;
    case Section::abbreviations:
      for (const auto& line : in.expansions) {
        if (!out.empty()) out += "\n";
        out += line;
      }
      return out;
    case Section::question:
      return trim(in.question);
    case Section::options:
      if (mode == PromptMode::open) return {};
      for (const auto& o : in.options) {
        if (!out.empty()) out += "\n";
        out += "option " + o.id + ": " + trim(o.text);
      }
      return out;
  }
  return out;
}

PromptBundle assemble(const PromptInput& input, const PromptTemplate& tmpl, PromptMode mode,
                      double tokens_per_word) {
  tmpl.validate();
  if (!(tokens_per_word > 0.0)) throw ConfigError("tokens_per_word must be positive");

  std::array<std::string, kSections.size()> rendered;
  for (Section s : kSections) rendered[static_cast<std::size_t>(s)] = render_section(s, input, tmpl, mode);

  PromptBundle bundle;
  bundle.mode = mode;
  std::array<bool, kSections.size()> used{};
  std::vector<std::string> kept;
  for (const auto& paragraph : split_paragraphs(tmpl.layout)) {
    const auto placeholders = find_placeholders(paragraph);
    bool any_content = placeholders.empty();
    for (const auto& p : placeholders) {
      any_content = any_content || !rendered[static_cast<std::size_t>(p.section)].empty();
    }
    if (!any_content) continue;

    std::string text;
    std::size_t cursor = 0;
    for (const auto& p : placeholders) {
      text.append(paragraph, cursor, p.pos - cursor);
      const auto& content = rendered[static_cast<std::size_t>(p.section)];
      text += content;
      if (!content.empty()) used[static_cast<std::size_t>(p.section)] = true;
      cursor = p.pos + p.len;
    }
    text.append(paragraph, cursor);
    kept.push_back(std::move(text));
  }

  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (i > 0) bundle.text += "\n\n";
    bundle.text += kept[i];
  }
  for (Section s : kSections) {
    if (used[static_cast<std::size_t>(s)]) bundle.parts.push_back(s);
  }
  bundle.word_count = count_tokens(bundle.text);
  bundle.token_estimate =
      static_cast<std::size_t>(std::ceil(static_cast<double>(bundle.word_count) * tokens_per_word - 1e-9));
  return bundle;
}

}  // namespace

std::string_view to_string(PromptMode mode) { return mode == PromptMode::mcq ? "mcq" : "open"; }

std::string_view to_string(Section section) {
  switch (section) {
    case Section::instructions:
      return "instructions";
    case Section::context:
      return "context";
    case Section::abbreviations:
      return "abbreviations";
    case Section::question:
      return "question";
    case Section::options:
      return "options";
  }
  return "unknown";
}

PromptTemplate PromptTemplate::default_mcq() {
  return {std::string(kMcqInstructions), std::string(kMcqLayout)};
}

PromptTemplate PromptTemplate::default_open() {
  return {std::string(kOpenInstructions), std::string(kOpenLayout)};
}

PromptTemplate PromptTemplate::parse(std::string_view file_text) {
  const auto ins = file_text.find(kInstructionsMarker);
  const auto lay = file_text.find(kLayoutMarker);
  if (ins == std::string_view::npos || lay == std::string_view::npos || lay < ins) {
    throw ConfigError("template must contain '--- instructions ---' followed by '--- layout ---'");
  }
  PromptTemplate t;
  t.instructions = trim(file_text.substr(ins + kInstructionsMarker.size(), lay - ins - kInstructionsMarker.size()));
  std::string layout(file_text.substr(lay + kLayoutMarker.size()));
  // Drop the newline after the marker and trailing whitespace at the end.
  if (!layout.empty() && layout.front() == '\n') layout.erase(0, 1);
  while (!layout.empty() && std::isspace(static_cast<unsigned char>(layout.back())) != 0) layout.pop_back();
  t.layout = std::move(layout);
  t.validate();
  return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read prompt template: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string PromptTemplate::serialize() const {
  return std::string(kInstructionsMarker) + "\n" + instructions + "\n" + std::string(kLayoutMarker) +
         "\n" + layout + "\n";
}

void PromptTemplate::validate() const {
  const auto placeholders = find_placeholders(layout);
  std::optional<Section> last;
  for (const auto& p : placeholders) {
    if (last && static_cast<int>(p.section) <= static_cast<int>(*last)) {
      throw ConfigError("template placeholder {" + std::string(to_string(p.section)) +
                        "} is repeated or out of order");
    }
    last = p.section;
  }
  bool has_question = false;
  for (const auto& p : placeholders) has_question = has_question || p.section == Section::question;
  if (!has_question) throw ConfigError("template layout needs a {question} placeholder");
}

PromptBundle build_prompt_mcq(const PromptInput& input, const PromptTemplate& tmpl, double tokens_per_word) {
  if (input.options.empty()) throw ConfigError("an mcq prompt needs at least one option");
  return assemble(input, tmpl, PromptMode::mcq, tokens_per_word);
}

PromptBundle build_prompt_open(const PromptInput& input, const PromptTemplate& tmpl, double tokens_per_word) {
  if (!input.options.empty()) throw ConfigError("options must not be passed to an open prompt");
  return assemble(input, tmpl, PromptMode::open, tokens_per_word);
}

BudgetCheck check_budget(const PromptBundle& bundle, std::size_t max_tokens) {
  if (max_tokens == 0) throw ConfigError("max_tokens must be positive");
  if (bundle.token_estimate <= max_tokens) return {true, 0};
  return {false, bundle.token_estimate - max_tokens};
}

FittedPrompt fit_to_budget(PromptInput input, PromptMode mode, const PromptTemplate& tmpl,
                           const BudgetPolicy& policy) {
  auto build = [&](const PromptInput& in) {
    return mode == PromptMode::mcq ? build_prompt_mcq(in, tmpl, policy.tokens_per_word)
                                   : build_prompt_open(in, tmpl, policy.tokens_per_word);
  };
  FittedPrompt fitted;
  fitted.bundle = build(input);
  auto check = check_budget(fitted.bundle, policy.max_tokens);
  if (check.ok) return fitted;

  log_warning("prompt estimate " + std::to_string(fitted.bundle.token_estimate) + " exceeds budget " +
              std::to_string(policy.max_tokens) + " by " + std::to_string(check.excess));
  while (!check.ok && policy.drop_chunks && !input.context.empty()) {
    input.context.pop_back();
    ++fitted.dropped_chunks;
    fitted.bundle = build(input);
    check = check_budget(fitted.bundle, policy.max_tokens);
  }
  if (fitted.dropped_chunks > 0) {
    log_warning("dropped " + std::to_string(fitted.dropped_chunks) + " lowest-ranked context chunk(s)");
  }
  fitted.overflow = !check.ok;
  if (fitted.overflow) log_warning("prompt still over budget; sending it unchanged");
  return fitted;
}

}  // namespace telequery
