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

#include "telequery/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "telequery/error.hpp"

namespace telequery {

namespace fs = std::filesystem;

void ChunkingConfig::validate() const {
  if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
  if (stride < 1 || stride > chunk_size) {
    throw ConfigError("stride must be in [1, chunk_size], got stride=" + std::to_string(stride) +
                      " chunk_size=" + std::to_string(chunk_size));
  }
}

std::string make_chunk_id(const std::string& doc_id, std::size_t ordinal) {
  return doc_id + "#" + std::to_string(ordinal);
}

std::size_t expected_chunk_count(std::size_t token_count, const ChunkingConfig& cfg) {
  if (token_count == 0) return 0;
  if (token_count <= cfg.chunk_size) return 1;
  const std::size_t rest = token_count - cfg.chunk_size;
  return (rest + cfg.stride - 1) / cfg.stride + 1;
}

std::vector<Chunk> chunk_document(const Document& doc, const ChunkingConfig& cfg,
                                  const Tokenizer& tokenizer) {
  cfg.validate();
  std::vector<Token> tokens = tokenizer.tokenize(doc.body);
  if (tokens.empty()) {
    throw CorpusError("document '" + doc.doc_id + "' has no tokens (empty or binary input)");
  }

  std::vector<Chunk> chunks;
  chunks.reserve(expected_chunk_count(tokens.size(), cfg));
  for (std::size_t start = 0; start < tokens.size(); start += cfg.stride) {
    const std::size_t end = std::min(start + cfg.chunk_size, tokens.size());
    Chunk chunk;
    chunk.doc_id = doc.doc_id;
    chunk.ordinal = chunks.size();
    chunk.chunk_id = make_chunk_id(doc.doc_id, chunk.ordinal);
    chunk.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                        tokens.begin() + static_cast<std::ptrdiff_t>(end));
    const std::size_t from = chunk.tokens.front().begin;
    chunk.text = doc.body.substr(from, chunk.tokens.back().end - from);
    chunks.push_back(std::move(chunk));
    if (end == tokens.size()) break;
  }
  return chunks;
}

std::vector<Chunk> chunk_corpus(const std::vector<Document>& docs, const ChunkingConfig& cfg,
                                std::vector<std::string>* skipped, const Tokenizer& tokenizer) {
  cfg.validate();
  std::vector<Chunk> all;
  std::set<std::string> seen;
  for (const auto& doc : docs) {
    if (!seen.insert(doc.doc_id).second) {
      throw CorpusError("duplicate doc_id '" + doc.doc_id + "'");
    }
    if (count_tokens(doc.body) == 0) {
      if (skipped != nullptr) skipped->push_back(doc.doc_id);
      continue;
    }
    auto chunks = chunk_document(doc, cfg, tokenizer);
    std::move(chunks.begin(), chunks.end(), std::back_inserter(all));
  }
  return all;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read corpus file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw CorpusError("error reading corpus file: " + path.string());
  return ss.str();
}

std::vector<Document> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot read corpus manifest: " + path.string());
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      Document doc;
      doc.doc_id = rec.at("doc_id").get<std::string>();
      doc.title = rec.value("title", std::string{});
      doc.body = rec.at("body").get<std::string>();
      docs.push_back(std::move(doc));
    } catch (const nlohmann::json::exception& e) {
      throw CorpusError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace

std::vector<Document> load_corpus(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw CorpusError("corpus path does not exist: " + path.string());

  std::vector<Document> docs;
  if (fs::is_directory(path, ec)) {
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (!entry.is_regular_file()) continue;
      const auto ext = entry.path().extension().string();
      if (ext != ".txt" && ext != ".md") continue;
      Document doc;
      doc.doc_id = entry.path().lexically_relative(path).generic_string();
      doc.title = entry.path().stem().string();
      doc.body = read_file(entry.path());
      docs.push_back(std::move(doc));
    }
  } else {
    docs = load_manifest(path);
  }

  if (docs.empty()) throw CorpusError("empty corpus: " + path.string());
  std::sort(docs.begin(), docs.end(),
            [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
  for (std::size_t i = 1; i < docs.size(); ++i) {
    if (docs[i].doc_id == docs[i - 1].doc_id) {
      throw CorpusError("duplicate doc_id '" + docs[i].doc_id + "' in " + path.string());
    }
  }
  return docs;
}

}  // namespace telequery
