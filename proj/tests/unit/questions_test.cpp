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

#include "telequery/error.hpp"
#include "telequery/question.hpp"

namespace telequery {
namespace {

constexpr const char* kTwoQuestions = R"({
  "question 1": {
    "question": "Which entity terminates RRC?",
    "option 1": "AMF",
    "option 2": "gNB",
    "option 3": "UPF",
    "answer": "option 2: gNB",
    "explanation": "RRC terminates in the gNB.",
    "category": "Standards specifications"
  },
  "question 0": {
    "question": "Pick one",
    "option 10": "ten",
    "option 2": "two",
    "answer": "option 10: ten"
  }
})";

TEST(QuestionsTest, ParsesTeleqnaRecords) {
  const auto qs = parse_questions(kTwoQuestions);
  ASSERT_EQ(qs.size(), 2u);
  const auto& q = qs[0];
  EXPECT_EQ(q.qid, "question 1");
  EXPECT_EQ(q.stem, "Which entity terminates RRC?");
  EXPECT_EQ(q.option_ids(), (std::vector<std::string>{"1", "2", "3"}));
  EXPECT_EQ(q.answer, "2");
  EXPECT_EQ(q.explanation, "RRC terminates in the gNB.");
  EXPECT_EQ(q.category, "Standards specifications");
  EXPECT_EQ(q.find_option("3")->text, "UPF");
  EXPECT_EQ(q.find_option("9"), nullptr);
}

TEST(QuestionsTest, OptionsOrderedNumerically) {
  const auto qs = parse_questions(kTwoQuestions);
  EXPECT_EQ(qs[1].option_ids(), (std::vector<std::string>{"2", "10"}));
  EXPECT_EQ(qs[1].answer, "10");
  EXPECT_FALSE(qs[1].explanation.has_value());
}

TEST(QuestionsTest, AnswerField) {
  EXPECT_EQ(parse_answer_field("option 3: something"), "3");
  EXPECT_EQ(parse_answer_field("Option 4"), "4");
  EXPECT_EQ(parse_answer_field("option 12 : x"), "12");
  EXPECT_FALSE(parse_answer_field("3").has_value());
  EXPECT_FALSE(parse_answer_field("option x").has_value());
  EXPECT_FALSE(parse_answer_field("option 3x").has_value());
}

TEST(QuestionsTest, OptionIdOrdering) {
  EXPECT_TRUE(option_id_less("2", "10"));
  EXPECT_FALSE(option_id_less("10", "2"));
  EXPECT_TRUE(option_id_less("9", "a"));
  EXPECT_TRUE(option_id_less("a", "b"));
}

TEST(QuestionsTest, Validation) {
  EXPECT_THROW(parse_questions(R"({"q": {"question": "x", "option 1": "a"}})"), DataError);
  EXPECT_THROW(parse_questions(R"({"q": {"question": "x", "option 1": "a", "option 2": " "}})"), DataError);
  EXPECT_THROW(parse_questions(R"({"q": {"question": "x", "option 1": "a", "option 2": "b", "answer": "option 3: c"}})"),
               DataError);
  EXPECT_THROW(parse_questions(R"({"q": {"question": "x", "option 1": "a", "option 2": "b", "answer": "b"}})"),
               DataError);
  EXPECT_THROW(parse_questions(R"({"q": {"option 1": "a", "option 2": "b"}})"), DataError);
  EXPECT_THROW(parse_questions("[1, 2]"), DataError);
  EXPECT_THROW(parse_questions("{oops"), DataError);
  EXPECT_THROW(load_questions("/nonexistent/questions.json"), DataError);
}

TEST(QuestionsTest, AnswerOptional) {
  const auto qs = parse_questions(R"({"q": {"question": "x", "option 1": "a", "option 2": "b"}})");
  ASSERT_EQ(qs.size(), 1u);
  EXPECT_FALSE(qs[0].answer.has_value());
}

}  // namespace
}  // namespace telequery
