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

#include <set>

#include "telequery/glossary.hpp"
#include "test_backends.hpp"

namespace telequery {
namespace {

std::vector<std::pair<std::string, std::string>> pairs(const std::vector<AbbreviationEntry>& entries) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : entries) out.emplace_back(e.short_form, e.long_form);
  return out;
}

std::vector<std::pair<std::string, std::string>> extract(const std::string& body) {
  return pairs(extract_abbreviations({"d", "", body}));
}

TEST(AbbreviationPatternTest, AcceptsTechnicalForms) {
  for (const char* s : {"UE", "RRC", "5G", "5GC", "IPv6", "eNB", "gNB", "NR", "3GPP", "PDCCH", "F1AP"}) {
    EXPECT_TRUE(is_abbreviation(s)) << s;
  }
}

TEST(AbbreviationPatternTest, RejectsWordsAndBadShapes) {
  for (const char* s : {"U", "the", "Equipment", "ue", "eNb", "ABCDEFGHIJKLM", "12", "A-B", "Ab", "abC"}) {
    EXPECT_FALSE(is_abbreviation(s)) << s;
  }
}

TEST(ExtractTest, TabularLines) {
  EXPECT_EQ(extract("UE\tUser Equipment"), (std::vector<std::pair<std::string, std::string>>{{"UE", "User Equipment"}}));
  EXPECT_EQ(extract("AMF   Access and Mobility Management Function"),
            (std::vector<std::pair<std::string, std::string>>{{"AMF", "Access and Mobility Management Function"}}));
  EXPECT_EQ(extract("SMF: Session Management Function"),
            (std::vector<std::pair<std::string, std::string>>{{"SMF", "Session Management Function"}}));
  EXPECT_EQ(extract("UPF \xE2\x80\x93 User Plane Function"),
            (std::vector<std::pair<std::string, std::string>>{{"UPF", "User Plane Function"}}));
  EXPECT_EQ(extract("NEF\xE2\x80\x94Network Exposure Function"),
            (std::vector<std::pair<std::string, std::string>>{{"NEF", "Network Exposure Function"}}));
}

TEST(ExtractTest, NoPattern) {
  EXPECT_TRUE(extract("the quick brown fox").empty());
  EXPECT_TRUE(extract("UE - User Equipment").empty());
  EXPECT_TRUE(extract("Note: this is prose").empty());
}

TEST(ExtractTest, Parenthetical) {
  EXPECT_EQ(extract("Radio Resource Control (RRC)"),
            (std::vector<std::pair<std::string, std::string>>{{"RRC", "Radio Resource Control"}}));
  EXPECT_EQ(extract("The UE first establishes a Radio Resource Control (RRC) connection."),
            (std::vector<std::pair<std::string, std::string>>{{"RRC", "Radio Resource Control"}}));
  EXPECT_EQ(extract("connected to the evolved Node B (eNB) over the air"),
            (std::vector<std::pair<std::string, std::string>>{{"eNB", "evolved Node B"}}));
}

TEST(ExtractTest, ParentheticalNeedsInitials) {
  EXPECT_TRUE(extract("some unrelated words (RRC)").empty());
  EXPECT_TRUE(extract("(RRC) at the start").empty());
}

TEST(ExtractTest, RecordsSourceDocument) {
  const auto entries = extract_abbreviations({"spec/38.300.txt", "", "UE\tUser Equipment"});
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].source_doc, "spec/38.300.txt");
}

TEST(GlossaryTest, DeduplicatesAcrossDocuments) {
  const auto g = build_glossary({{"a", "", "UE\tUser Equipment"}, {"b", "", "UE\tUser Equipment"}});
  EXPECT_EQ(g.size(), 1u);
  ASSERT_EQ(g.lookup("UE").size(), 1u);
  EXPECT_EQ(g.lookup("UE")[0].source_doc, "a");
}

TEST(GlossaryTest, CollisionsKeepAllLongForms) {
  const auto g = build_glossary({{"a", "", "PC\tPower Control\nPC\tPersonal Computer"}});
  EXPECT_EQ(g.size(), 1u);
  EXPECT_EQ(pairs({g.lookup("PC").begin(), g.lookup("PC").end()}),
            (std::vector<std::pair<std::string, std::string>>{{"PC", "Personal Computer"}, {"PC", "Power Control"}}));
}

TEST(GlossaryTest, EmptyCorpus) {
  const auto g = build_glossary({});
  EXPECT_EQ(g.size(), 0u);
  EXPECT_TRUE(g.entries().empty());
}

TEST(GlossaryTest, CaseSensitiveLookup) {
  const auto g = build_glossary({{"a", "", "UE\tUser Equipment"}});
  EXPECT_TRUE(g.contains("UE"));
  EXPECT_FALSE(g.contains("ue"));
  EXPECT_TRUE(g.lookup("Ue").empty());
}

TEST(GlossaryTest, Idempotent) {
  const std::vector<Document> docs{{"a", "", "UE\tUser Equipment\nRadio Resource Control (RRC)"},
                                   {"b", "", "PC: Power Control"}};
  auto doubled = docs;
  doubled.insert(doubled.end(), docs.begin(), docs.end());
  EXPECT_EQ(build_glossary(doubled), build_glossary(docs));
}

TEST(GlossaryTest, EntriesOrderedByShortThenLong) {
  const auto g = build_glossary({{"a", "", "UE\tUser Equipment\nPC\tPower Control\nAMF\tAccess Function\nPC\tPersonal Computer"}});
  EXPECT_EQ(pairs(g.entries()), (std::vector<std::pair<std::string, std::string>>{
                                     {"AMF", "Access Function"},
                                     {"PC", "Personal Computer"},
                                     {"PC", "Power Control"},
                                     {"UE", "User Equipment"}}));
}

TEST(ExpandQueryTest, Examples) {
  const auto g = build_glossary({{"a", "", "UE\tUser Equipment\nRRC\tRadio Resource Control"}});
  EXPECT_EQ(expand_query("What does the UE send?", {}, g), (std::vector<std::string>{"UE: User Equipment"}));
  EXPECT_TRUE(expand_query("What is XYZQ?", {"none"}, g).empty());
  EXPECT_EQ(expand_query("Which message?", {"An RRC message", "None"}, g),
            (std::vector<std::string>{"RRC: Radio Resource Control"}));
}

TEST(ExpandQueryTest, FirstOccurrenceOrderWithoutDuplicates) {
  const auto g = build_glossary({{"a", "", "UE\tUser Equipment\nRRC\tRadio Resource Control\nPC\tPower Control\nPC\tPersonal Computer"}});
  const auto lines = expand_query("Does RRC reach the UE and the UE again?", {"PC", "RRC"}, g);
  EXPECT_EQ(lines, (std::vector<std::string>{"RRC: Radio Resource Control", "UE: User Equipment",
                                             "PC: Personal Computer", "PC: Power Control"}));
}

TEST(ExpandQueryTest, ShortsAppearAsTokensAndBelongToGlossary) {
  const auto g = build_glossary({{"a", "", "UE\tUser Equipment\nRRC\tRadio Resource Control\nNR\tNew Radio"}});
  const std::string question = "In NR, does the UE use RRC or ue?";
  const std::vector<std::string> options{"RRC only", "neither"};
  std::set<std::string> shorts;
  for (const auto& line : expand_query(question, options, g)) {
    const auto colon = line.find(": ");
    const auto s = line.substr(0, colon);
    const auto l = line.substr(colon + 2);
    EXPECT_TRUE(shorts.insert(s).second) << s;
    bool found = false;
    for (const auto& e : g.lookup(s)) found |= e.long_form == l;
    EXPECT_TRUE(found);
    bool in_text = false;
    for (const auto& t : tokenize(question)) in_text |= t.text == s;
    for (const auto& o : options) {
      for (const auto& t : tokenize(o)) in_text |= t.text == s;
    }
    EXPECT_TRUE(in_text) << s;
  }
  EXPECT_EQ(shorts.size(), 3u);
}

TEST(GlossaryPersistenceTest, RoundTrip) {
  testing::TempDir dir;
  const auto g = build_glossary({{"a", "", "UE\tUser Equipment\nPC\tPower Control"}, {"b", "", "PC\tPersonal Computer"}});
  save_glossary(g, dir / "g.jsonl");
  EXPECT_EQ(load_glossary(dir / "g.jsonl"), g);
}

}  // namespace
}  // namespace telequery
