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

#include "telequery/glossary.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "telequery/error.hpp"

namespace telequery {
namespace {

constexpr std::size_t kMinAbbrevLength = 2;
constexpr std::size_t kMaxAbbrevLength = 12;
constexpr std::size_t kMaxLongFormBytes = 160;

constexpr std::string_view kEnDash = "\xE2\x80\x93";
constexpr std::string_view kEmDash = "\xE2\x80\x94";

bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool plausible_long_form(std::string_view short_form, std::string_view long_form) {
  if (long_form.empty() || long_form.size() > kMaxLongFormBytes) return false;
  if (long_form == short_form) return false;
  return std::any_of(long_form.begin(), long_form.end(),
                     [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; });
}

// "UE<TAB>User Equipment", "UE:  User Equipment", "UE – User Equipment".
// A plain hyphen is not a separator.
bool match_tabular(std::string_view line, AbbreviationEntry& out) {
  std::size_t i = 0;
  while (i < line.size() && is_space(line[i])) ++i;
  const std::size_t abbr_begin = i;
  while (i < line.size() && is_alnum(line[i])) ++i;
  const std::string_view abbr = line.substr(abbr_begin, i - abbr_begin);
  if (!is_abbreviation(abbr)) return false;

  const std::size_t ws_begin = i;
  bool saw_tab = false;
  while (i < line.size() && is_space(line[i])) {
    saw_tab = saw_tab || line[i] == '\t';
    ++i;
  }
  const std::size_t ws_len = i - ws_begin;

  const std::string_view rest = line.substr(i);
  bool separated = false;
  if (!rest.empty() && rest.front() == ':') {
    i += 1;
    separated = true;
  } else if (rest.starts_with(kEnDash) || rest.starts_with(kEmDash)) {
    i += kEnDash.size();
    separated = true;
  } else if (saw_tab || ws_len >= 2) {
    separated = true;
  }
  if (!separated) return false;

  std::string long_form = trim(line.substr(i));
  if (!plausible_long_form(abbr, long_form)) return false;
  out.short_form = std::string(abbr);
  out.long_form = std::move(long_form);
  return true;
}

struct Word {
  std::string_view text;
  char initial = 0;
  bool ends_clause = false;
};

std::vector<Word> split_words(std::string_view s) {
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t b = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i == b) break;
    Word w;
    w.text = s.substr(b, i - b);
    for (char c : w.text) {
      if (is_alnum(c)) {
        w.initial = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        break;
      }
    }
    const char last = w.text.back();
    w.ends_clause = last == ',' || last == '.' || last == ';' || last == ':' || last == ')';
    words.push_back(w);
  }
  return words;
}

// Letters of the abbreviation must appear, in order, among the initials of
// the candidate words; the first word has to start with the first letter.
bool initials_cover(std::span<const Word> words, std::string_view abbr) {
  std::string letters;
  for (char c : abbr) {
    if (std::isalpha(static_cast<unsigned char>(c)) != 0) {
      letters.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (letters.empty() || words.empty() || words.front().initial != letters.front()) return false;
  std::size_t li = 0;
  for (const auto& w : words) {
    if (li < letters.size() && w.initial == letters[li]) ++li;
  }
  return li == letters.size();
}

std::string strip_edge_punct(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && !is_alnum(s[b])) ++b;
  while (e > b && !is_alnum(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

void match_parenthetical(std::string_view line, std::vector<AbbreviationEntry>& out) {
  std::size_t pos = 0;
  while ((pos = line.find('(', pos)) != std::string_view::npos) {
    const std::size_t close = line.find(')', pos + 1);
    if (close == std::string_view::npos) return;
    const std::string_view abbr = line.substr(pos + 1, close - pos - 1);
    if (is_abbreviation(abbr)) {
      const auto words = split_words(line.substr(0, pos));
      // Walk back from the parenthesis; never cross a clause boundary.
      const std::size_t max_words = 2 * abbr.size() + 2;
      for (std::size_t n = 1; n <= words.size() && n <= max_words; ++n) {
        const std::size_t first = words.size() - n;
        if (n > 1 && words[first].ends_clause) break;
        std::span<const Word> suffix(words.data() + first, n);
        if (initials_cover(suffix, abbr)) {
          const char* b = suffix.front().text.data();
          const char* e = suffix.back().text.data() + suffix.back().text.size();
          std::string long_form = strip_edge_punct(std::string_view(b, static_cast<std::size_t>(e - b)));
          if (plausible_long_form(abbr, long_form)) {
            out.push_back(AbbreviationEntry{std::string(abbr), std::move(long_form), {}});
          }
          break;
        }
      }
    }
    pos = close + 1;
  }
}

}  // namespace

bool is_abbreviation(std::string_view s) {
  if (s.size() < kMinAbbrevLength || s.size() > kMaxAbbrevLength) return false;
  bool has_upper = false;
  std::size_t capitals = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (!is_alnum(c)) return false;
    has_upper = has_upper || is_upper(c);
    if (is_upper(c) || is_digit(c)) ++capitals;
    if (i > 0 && is_lower(c) && is_lower(s[i - 1])) return false;
  }
  if (!has_upper || capitals < 2) return false;
  if (is_upper(s[0]) || is_digit(s[0])) return true;
  return is_lower(s[0]) && is_upper(s[1]);
}

std::vector<AbbreviationEntry> extract_abbreviations(const Document& doc) {
  std::vector<AbbreviationEntry> found;
  std::istringstream in(doc.body);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    AbbreviationEntry entry;
    if (match_tabular(line, entry)) {
      found.push_back(std::move(entry));
    } else {
      match_parenthetical(line, found);
    }
  }
  for (auto& e : found) e.source_doc = doc.doc_id;
  return found;
}

void Glossary::add(AbbreviationEntry entry) {
  auto& list = entries_[entry.short_form];
  auto it = std::lower_bound(list.begin(), list.end(), entry.long_form,
                             [](const AbbreviationEntry& e, const std::string& long_form) {
                               return e.long_form < long_form;
                             });
  if (it != list.end() && it->long_form == entry.long_form) return;
  list.insert(it, std::move(entry));
}

std::span<const AbbreviationEntry> Glossary::lookup(std::string_view short_form) const {
  const auto it = entries_.find(short_form);
  if (it == entries_.end()) return {};
  return it->second;
}

bool Glossary::contains(std::string_view short_form) const {
  return entries_.find(short_form) != entries_.end();
}

std::vector<AbbreviationEntry> Glossary::entries() const {
  std::vector<AbbreviationEntry> out;
  for (const auto& [_, list] : entries_) out.insert(out.end(), list.begin(), list.end());
  return out;
}

Glossary build_glossary(const std::vector<Document>& docs) {
  Glossary glossary;
  for (const auto& doc : docs) {
    for (auto& entry : extract_abbreviations(doc)) glossary.add(std::move(entry));
  }
  return glossary;
}

std::vector<std::string> expand_query(std::string_view question,
                                      const std::vector<std::string>& options,
                                      const Glossary& glossary) {
  std::vector<std::string> lines;
  std::set<std::string, std::less<>> emitted;
  auto scan = [&](std::string_view text) {
    for (const auto& token : tokenize(text)) {
      if (!is_abbreviation(token.text) || emitted.contains(token.text)) continue;
      const auto entries = glossary.lookup(token.text);
      if (entries.empty()) continue;
      emitted.insert(token.text);
      for (const auto& e : entries) lines.push_back(e.short_form + ": " + e.long_form);
    }
  };
  scan(question);
  for (const auto& option : options) scan(option);
  return lines;
}

void save_glossary(const Glossary& glossary, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write glossary: " + path.string());
  for (const auto& e : glossary.entries()) {
    nlohmann::ordered_json rec;
    rec["short"] = e.short_form;
    rec["long"] = e.long_form;
    rec["source_doc"] = e.source_doc;
    out << rec.dump() << '\n';
  }
}

Glossary load_glossary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read glossary: " + path.string());
  Glossary glossary;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      glossary.add(AbbreviationEntry{rec.at("short").get<std::string>(),
                                     rec.at("long").get<std::string>(),
                                     rec.value("source_doc", std::string{})});
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return glossary;
}

}  // namespace telequery
