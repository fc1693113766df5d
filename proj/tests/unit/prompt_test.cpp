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

#include <gtest/gtest.h>

#include <fstream>

#include "telequery/error.hpp"
#include "telequery/log.hpp"
#include "telequery/prompt.hpp"
#include "telequery/text.hpp"
#include "test_backends.hpp"

namespace telequery {
namespace {

PromptInput sample(std::size_t chunks = 0, bool expansions = false) {
  PromptInput in;
  in.question = "Which node terminates the RRC protocol?";
  in.options = {{"1", "AMF"}, {"2", "gNB"}, {"3", "UPF"}};
  for (std::size_t i = 0; i < chunks; ++i) {
    in.context.push_back({"doc#" + std::to_string(i), "chunk text number " + std::to_string(i)});
  }
  if (expansions) in.expansions = {"RRC: Radio Resource Control"};
  return in;
}

TEST(PromptTest, MinimalMcqParts) {
  const auto b = build_prompt_mcq(sample(), PromptTemplate::default_mcq());
  EXPECT_EQ(b.parts, (std::vector<Section>{Section::instructions, Section::question, Section::options}));
  EXPECT_EQ(b.mode, PromptMode::mcq);
  EXPECT_EQ(b.text.find("Context:"), std::string::npos);
  EXPECT_EQ(b.text.find("Abbreviations:"), std::string::npos);
}

TEST(PromptTest, ExactMcqLayout) {
  PromptTemplate t{"Answer it.", PromptTemplate::default_mcq().layout};
  const auto b = build_prompt_mcq(sample(2, true), t);
  EXPECT_EQ(b.text,
            "Answer it.\n\n"
            "Context:\n[source: doc#0]\nchunk text number 0\n\n[source: doc#1]\nchunk text number 1\n\n"
            "Abbreviations:\nRRC: Radio Resource Control\n\n"
            "Question: Which node terminates the RRC protocol?\n\n"
            "option 1: AMF\noption 2: gNB\noption 3: UPF\n\n"
            "Answer:");
  EXPECT_EQ(b.parts, (std::vector<Section>{Section::instructions, Section::context, Section::abbreviations,
                                           Section::question, Section::options}));
  EXPECT_EQ(b.word_count, count_tokens(b.text));
}

TEST(PromptTest, ThirteenChunksInRankOrder) {
  const auto b = build_prompt_mcq(sample(13), PromptTemplate::default_mcq());
  std::size_t last = 0;
  for (std::size_t i = 0; i < 13; ++i) {
    const std::string tag = "[source: doc#" + std::to_string(i) + "]";
    const auto pos = b.text.find(tag);
    ASSERT_NE(pos, std::string::npos);
    EXPECT_EQ(b.text.find(tag, pos + 1), std::string::npos);
    EXPECT_GT(pos, last);
    last = pos;
  }
}

TEST(PromptTest, DefaultInstructionIsShort) {
  EXPECT_LT(count_tokens(PromptTemplate::default_mcq().instructions), 40u);
  EXPECT_LT(count_tokens(PromptTemplate::default_open().instructions), 40u);
}

TEST(PromptTest, OpenModeHasNoOptions) {
  auto in = sample(3);
  const auto options = in.options;
  in.options.clear();
  const auto b = build_prompt_open(in, PromptTemplate::default_open());
  EXPECT_EQ(b.mode, PromptMode::open);
  for (const auto& o : options) EXPECT_EQ(b.text.find(o.text), std::string::npos);
  EXPECT_EQ(b.text.find("option 1"), std::string::npos);
  std::size_t blocks = 0;
  for (std::size_t pos = 0; (pos = b.text.find("[source: ", pos)) != std::string::npos; ++pos) ++blocks;
  EXPECT_EQ(blocks, 3u);
  EXPECT_EQ(b.text.find("Abbreviations:"), std::string::npos);
  EXPECT_THROW(build_prompt_open(sample(), PromptTemplate::default_open()), ConfigError);
}

TEST(PromptTest, McqNeedsOptions) {
  auto in = sample();
  in.options.clear();
  EXPECT_THROW(build_prompt_mcq(in, PromptTemplate::default_mcq()), ConfigError);
}

TEST(PromptTest, Deterministic) {
  EXPECT_EQ(build_prompt_mcq(sample(4, true), PromptTemplate::default_mcq()).text,
            build_prompt_mcq(sample(4, true), PromptTemplate::default_mcq()).text);
}

TEST(PromptTest, SectionOrderIndependentOfInputOrder) {
  auto in = sample(2, true);
  in.expansions = {"B: Bee", "A: Ay"};
  const auto b = build_prompt_mcq(in, PromptTemplate::default_mcq());
  const auto ctx = b.text.find("Context:");
  const auto abbr = b.text.find("Abbreviations:");
  const auto q = b.text.find("Question:");
  const auto o = b.text.find("option 1:");
  EXPECT_LT(ctx, abbr);
  EXPECT_LT(abbr, q);
  EXPECT_LT(q, o);
  EXPECT_LT(b.text.find("B: Bee"), b.text.find("A: Ay"));
}

TEST(PromptTest, TokenEstimate) {
  PromptTemplate t{"", "{question}"};
  PromptInput in;
  in.question = "one two three four five six seven eight nine ten";
  in.options = {{"1", "x"}};
  const auto b = build_prompt_mcq(in, t);
  EXPECT_EQ(b.word_count, 10u);
  EXPECT_EQ(b.token_estimate, 13u);
  EXPECT_EQ(build_prompt_mcq(in, t, 1.0).token_estimate, 10u);
  in.question = "one two three";
  EXPECT_EQ(build_prompt_mcq(in, t).token_estimate, 4u);
}

TEST(BudgetTest, Examples) {
  PromptBundle b;
  b.token_estimate = 1900;
  EXPECT_TRUE(check_budget(b, 2048).ok);
  b.token_estimate = 2100;
  const auto c = check_budget(b, 2048);
  EXPECT_FALSE(c.ok);
  EXPECT_EQ(c.excess, 52u);
  b.token_estimate = 2048;
  EXPECT_TRUE(check_budget(b, 2048).ok);
  EXPECT_EQ(BudgetPolicy{}.max_tokens, 2048u);
  EXPECT_THROW(check_budget(b, 0), ConfigError);
}

TEST(BudgetTest, DropsLowestRankedChunksWithWarnings) {
  std::vector<std::string> warnings;
  auto old = set_log_sink([&](LogLevel level, std::string_view m) {
    if (level == LogLevel::warning) warnings.emplace_back(m);
  });
  auto in = sample(6);
  for (auto& c : in.context) c.text = std::string(200, 'x') + " " + std::string(50, ' ') + "a b c d e f g h i j";
  const auto full = build_prompt_mcq(in, PromptTemplate::default_mcq());
  BudgetPolicy policy;
  policy.max_tokens = full.token_estimate - 20;
  const auto fitted = fit_to_budget(in, PromptMode::mcq, PromptTemplate::default_mcq(), policy);
  set_log_sink(old);
  EXPECT_GE(fitted.dropped_chunks, 1u);
  EXPECT_FALSE(fitted.overflow);
  EXPECT_LE(fitted.bundle.token_estimate, policy.max_tokens);
  EXPECT_NE(fitted.bundle.text.find("[source: doc#0]"), std::string::npos);
  EXPECT_EQ(fitted.bundle.text.find("[source: doc#5]"), std::string::npos);
  EXPECT_FALSE(warnings.empty());
}

TEST(BudgetTest, OverflowWithoutDropping) {
  auto old = set_log_sink([](LogLevel, std::string_view) {});
  BudgetPolicy policy;
  policy.max_tokens = 5;
  policy.drop_chunks = false;
  const auto fitted = fit_to_budget(sample(2), PromptMode::mcq, PromptTemplate::default_mcq(), policy);
  set_log_sink(old);
  EXPECT_TRUE(fitted.overflow);
  EXPECT_EQ(fitted.dropped_chunks, 0u);
  EXPECT_NE(fitted.bundle.text.find("[source: doc#1]"), std::string::npos);
}

TEST(TemplateTest, ParseSerializeRoundTrip) {
  const auto t = PromptTemplate::default_mcq();
  const auto back = PromptTemplate::parse(t.serialize());
  EXPECT_EQ(back.instructions, t.instructions);
  EXPECT_EQ(back.layout, t.layout);
}

TEST(TemplateTest, ValidationRejectsBadLayouts) {
  EXPECT_THROW((PromptTemplate{"", "{options}\n\n{question}"}.validate()), ConfigError);
  EXPECT_THROW((PromptTemplate{"", "{question} {question}"}.validate()), ConfigError);
  EXPECT_THROW((PromptTemplate{"", "{context}"}.validate()), ConfigError);
  EXPECT_THROW(PromptTemplate::parse("no markers"), ConfigError);
  EXPECT_NO_THROW((PromptTemplate{"", "Q: {question} {unknown}"}.validate()));
}

TEST(TemplateTest, ShippedFilesMatchDefaults) {
  const std::filesystem::path dir = std::filesystem::path(TELEQUERY_SOURCE_DIR) / "templates";
  const auto mcq = PromptTemplate::load(dir / "mcq.txt");
  const auto open = PromptTemplate::load(dir / "open.txt");
  EXPECT_EQ(mcq.instructions, PromptTemplate::default_mcq().instructions);
  EXPECT_EQ(mcq.layout, PromptTemplate::default_mcq().layout);
  EXPECT_EQ(open.instructions, PromptTemplate::default_open().instructions);
  EXPECT_EQ(open.layout, PromptTemplate::default_open().layout);
}

TEST(TemplateTest, CustomTemplateFromFile) {
  testing::TempDir dir;
  std::ofstream(dir / "t.txt") << "--- instructions ---\nBe brief.\n--- layout ---\n{instructions}\n\nQ: {question}\n\n{options}\n";
  const auto t = PromptTemplate::load(dir / "t.txt");
  const auto b = build_prompt_mcq(sample(), t);
  EXPECT_EQ(b.text, "Be brief.\n\nQ: Which node terminates the RRC protocol?\n\noption 1: AMF\noption 2: gNB\noption 3: UPF");
}

}  // namespace
}  // namespace telequery
