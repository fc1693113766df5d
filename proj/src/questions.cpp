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

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "telequery/error.hpp"
#include "telequery/question.hpp"
#include "telequery/text.hpp"

namespace telequery {
namespace {

std::optional<long> as_integer(std::string_view s) {
  if (s.empty()) return std::nullopt;
  long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// "option 3" -> "3"
std::optional<std::string> option_key_id(std::string_view key) {
  const std::string lower = lowercase(trim(key));
  if (!lower.starts_with("option")) return std::nullopt;
  const std::string id = trim(std::string_view(lower).substr(6));
  if (!as_integer(id)) return std::nullopt;
  return id;
}

}  // namespace

bool option_id_less(std::string_view a, std::string_view b) {
  const auto ia = as_integer(a);
  const auto ib = as_integer(b);
  if (ia && ib && *ia != *ib) return *ia < *ib;
  if (ia && !ib) return true;
  if (!ia && ib) return false;
  return a < b;
}

const Option* Question::find_option(std::string_view id) const {
  for (const auto& o : options) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

std::vector<std::string> Question::option_ids() const {
  std::vector<std::string> ids;
  for (const auto& o : options) ids.push_back(o.id);
  return ids;
}

std::vector<std::string> Question::option_texts() const {
  std::vector<std::string> texts;
  for (const auto& o : options) texts.push_back(o.text);
  return texts;
}

void Question::validate() const {
  if (options.size() < 2) throw DataError("question '" + qid + "' needs at least 2 options");
  std::set<std::string> ids;
  for (const auto& o : options) {
    if (trim(o.text).empty()) throw DataError("question '" + qid + "' option " + o.id + " is empty");
    if (!ids.insert(o.id).second) throw DataError("question '" + qid + "' repeats option id " + o.id);
  }
  if (answer && !ids.contains(*answer)) {
    throw DataError("question '" + qid + "' answer '" + *answer + "' is not an option id");
  }
}

std::optional<std::string> parse_answer_field(std::string_view answer) {
  const std::string lower = lowercase(trim(answer));
  if (!lower.starts_with("option")) return std::nullopt;
  std::size_t i = 6;
  while (i < lower.size() && lower[i] == ' ') ++i;
  const std::size_t b = i;
  while (i < lower.size() && std::isdigit(static_cast<unsigned char>(lower[i])) != 0) ++i;
  if (i == b) return std::nullopt;
  if (i < lower.size() && lower[i] != ':' && lower[i] != ' ') return std::nullopt;
  return lower.substr(b, i - b);
}

std::vector<Question> parse_questions(std::string_view json_text) {
  nlohmann::ordered_json root;
  try {
    root = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("questions file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw DataError("questions file must be a JSON object keyed by qid");

  std::vector<Question> out;
  for (const auto& [qid, rec] : root.items()) {
    if (!rec.is_object()) throw DataError("question '" + qid + "' is not an object");
    Question q;
    q.qid = qid;
    try {
      q.stem = rec.at("question").get<std::string>();
      for (const auto& [key, value] : rec.items()) {
        if (auto id = option_key_id(key)) {
          if (!value.is_string()) continue;
          q.options.push_back(Option{*id, value.get<std::string>()});
        }
      }
      if (rec.contains("answer") && !rec["answer"].is_null()) {
        const auto field = rec["answer"].get<std::string>();
        q.answer = parse_answer_field(field);
        if (!q.answer) throw DataError("question '" + qid + "' has unparseable answer '" + field + "'");
      }
      if (rec.contains("explanation") && rec["explanation"].is_string()) {
        q.explanation = rec["explanation"].get<std::string>();
      }
      if (rec.contains("category") && rec["category"].is_string()) {
        q.category = rec["category"].get<std::string>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("question '" + qid + "': " + e.what());
    }
    std::sort(q.options.begin(), q.options.end(),
              [](const Option& a, const Option& b) { return option_id_less(a.id, b.id); });
    q.validate();
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Question> load_questions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read questions file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_questions(ss.str());
}

}  // namespace telequery
