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
#include <vector>

#include "telequery/text.hpp"

namespace telequery {

struct Document {
  std::string doc_id;
  std::string title;
  std::string body;
};

/// Sliding-window parameters. A stride equal to chunk_size means the
/// windows tile the document without overlap.
struct ChunkingConfig {
  std::size_t chunk_size = 150;
  std::size_t stride = 150;

  static ChunkingConfig with_size(std::size_t chunk_size) { return {chunk_size, chunk_size}; }

  /// Throws ConfigError unless 1 <= stride <= chunk_size.
  void validate() const;
};

/// A contiguous token window of one document.
struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  std::size_t ordinal = 0;
  std::vector<Token> tokens;
  /// Source text from the first token's start to the last token's end.
  std::string text;

  std::size_t token_count() const { return tokens.size(); }
};

std::string make_chunk_id(const std::string& doc_id, std::size_t ordinal);

/// max(1, ceil((T - chunk_size) / stride) + 1) for T >= 1, 0 for T == 0.
std::size_t expected_chunk_count(std::size_t token_count, const ChunkingConfig& cfg);

/// Splits a document into windows of cfg.chunk_size tokens starting every
/// cfg.stride tokens; the last window may be short. Throws CorpusError when
/// the body has no tokens.
std::vector<Chunk> chunk_document(const Document& doc, const ChunkingConfig& cfg,
                                  const Tokenizer& tokenizer = default_tokenizer());

/// Chunks every document in order. Documents without tokens are skipped and
/// their ids appended to `skipped` when given.
std::vector<Chunk> chunk_corpus(const std::vector<Document>& docs, const ChunkingConfig& cfg,
                                std::vector<std::string>* skipped = nullptr,
                                const Tokenizer& tokenizer = default_tokenizer());

/// Loads a corpus from a directory of .txt/.md files (doc_id is the path
/// relative to the directory) or from a JSON-Lines manifest with
/// {doc_id, title, body} records. Documents are ordered by doc_id.
std::vector<Document> load_corpus(const std::filesystem::path& path);

}  // namespace telequery
