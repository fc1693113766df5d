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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "telequery/corpus.hpp"

namespace telequery {

struct AbbreviationEntry {
  std::string short_form;
  std::string long_form;
  std::string source_doc;

  bool operator==(const AbbreviationEntry&) const = default;
};

/// True for 2-12 ASCII letters/digits with at least one uppercase letter,
/// at least two uppercase letters or digits in total ("Ab" and "In" fail),
/// no two consecutive lowercase letters, and either an uppercase/digit first
/// character or a single lowercase prefix before an uppercase letter
/// ("UE", "5G", "IPv6", "eNB").
bool is_abbreviation(std::string_view s);

/// Scans each line for "ABBR<sep>Full Form" (sep: tab, two or more spaces,
/// colon, en dash or em dash) and for "Full Form (ABBR)" where the letters
/// of ABBR are a subsequence of the initials of the full form's words.
std::vector<AbbreviationEntry> extract_abbreviations(const Document& doc);

/// Abbreviation -> full forms. Lookup is case-sensitive; colliding long
/// forms are all kept, deduplicated on (short, long).
class Glossary {
 public:
  Glossary() = default;

  /// Adds an entry; a (short, long) pair already present keeps its first
  /// source_doc.
  void add(AbbreviationEntry entry);

  /// Entries for `short_form` ordered by long form, empty when unknown.
  std::span<const AbbreviationEntry> lookup(std::string_view short_form) const;

  bool contains(std::string_view short_form) const;

  /// Number of distinct abbreviations.
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// All entries ordered by short form, then long form.
  std::vector<AbbreviationEntry> entries() const;

  bool operator==(const Glossary&) const = default;

 private:
  std::map<std::string, std::vector<AbbreviationEntry>, std::less<>> entries_;
};

Glossary build_glossary(const std::vector<Document>& docs);

/// "SHORT: LONG" lines for every glossary abbreviation found as a token in
/// the question or an option, ordered by first occurrence; an abbreviation
/// with several long forms yields one line per form.
std::vector<std::string> expand_query(std::string_view question,
                                      const std::vector<std::string>& options,
                                      const Glossary& glossary);

/// JSON-Lines, one {short, long, source_doc} object per line.
void save_glossary(const Glossary& glossary, const std::filesystem::path& path);
Glossary load_glossary(const std::filesystem::path& path);

}  // namespace telequery
