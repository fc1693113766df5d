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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "telequery/corpus.hpp"
#include "telequery/embedding.hpp"

namespace telequery {

enum class RetrieverKind { bm25, dense, ensemble };

std::string_view to_string(RetrieverKind kind);
RetrieverKind parse_retriever_kind(std::string_view s);

/// Index of a chunk in the chunk table shared by all indexes of a set.
using ChunkRef = std::size_t;

struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;
};

struct Posting {
  std::uint32_t chunk = 0;
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

/// Okapi BM25 statistics over folded chunk tokens.
struct Bm25Index {
  Bm25Params params;
  std::vector<std::string> chunk_ids;
  std::vector<std::uint32_t> doc_lengths;
  double avg_doc_length = 0.0;
  /// Postings sorted by chunk ref.
  std::unordered_map<std::string, std::vector<Posting>> postings;

  std::size_t chunk_count() const { return chunk_ids.size(); }

  /// ln((N - df + 0.5) / (df + 0.5) + 1); non-negative for every df.
  double idf(std::string_view term) const;

  /// Throws IndexError when the statistics are inconsistent.
  void validate() const;
};

Bm25Index build_bm25(const std::vector<Chunk>& chunks, Bm25Params params = {});

/// Sum over query tokens (repeats count) of idf * tf*(k1+1) / (tf + k1*(1-b+b*len/avg)).
/// Chunks sharing no term with the query are absent.
std::map<ChunkRef, double> bm25_score(const Bm25Index& index,
                                      std::span<const std::string> query_tokens);

/// Per-chunk token embedding matrices with unit-norm rows, stored as one
/// contiguous row-major float buffer.
struct DenseIndex {
  std::size_t dim = 0;
  std::string embedder_id;
  std::vector<std::string> chunk_ids;
  /// rows of chunk i are [row_offsets[i], row_offsets[i + 1]).
  std::vector<std::size_t> row_offsets{0};
  std::vector<float> data;

  std::size_t chunk_count() const { return chunk_ids.size(); }
  std::size_t rows(ChunkRef chunk) const { return row_offsets[chunk + 1] - row_offsets[chunk]; }
  std::span<const float> row(std::size_t global_row) const {
    return {data.data() + global_row * dim, dim};
  }

  /// Appends one chunk; rows are normalized here. Throws IndexError for an
  /// empty matrix, a wrong width or a zero row.
  void add_chunk(std::string chunk_id, const std::vector<std::vector<double>>& token_vectors);

  void validate() const;
};

/// Embeds every chunk text in token mode, `group_size` chunks per request
/// batch. A backend failure aborts the build with the number of chunks done.
DenseIndex build_dense(const std::vector<Chunk>& chunks, Embedder& embedder,
                       std::size_t group_size = 64);

/// Late-interaction score: sum over query rows of the best dot product with
/// any row of the chunk. Query rows must already be unit length.
std::vector<double> maxsim_score(const DenseIndex& index,
                                 const std::vector<std::vector<double>>& query_vectors);

double maxsim_score(const DenseIndex& index, ChunkRef chunk,
                    const std::vector<std::vector<double>>& query_vectors);

struct RetrievalEntry {
  std::string chunk_id;
  double score = 0.0;
  RetrieverKind retriever = RetrieverKind::dense;

  bool operator==(const RetrievalEntry&) const = default;
};

/// Ranked entries, best first; ties by chunk_id ascending.
struct RetrievalResult {
  std::vector<RetrievalEntry> entries;
  std::size_t k = 0;

  std::vector<std::string> chunk_ids() const;
  bool operator==(const RetrievalResult&) const = default;
};

/// Everything needed to answer queries over one chunked corpus.
struct IndexSet {
  ChunkingConfig chunking;
  std::vector<Chunk> chunks;
  std::optional<Bm25Index> bm25;
  std::optional<DenseIndex> dense;

  const Chunk* find_chunk(std::string_view chunk_id) const;
};

struct RetrievalOptions {
  /// Fraction of k taken from the dense ranking in ensemble mode, rounded up.
  double dense_share = 0.5;
};

/// Top-k chunks for `query`. Dense and ensemble modes embed the query in
/// token mode through `embedder`, which must report the index's embedder_id.
/// bm25 and dense results are prefixes of each other across k. Ensemble
/// results list dense picks, then BM25 picks, then dense backfill, with
/// score 1/(rank+1) and the contributing retriever recorded per entry.
RetrievalResult retrieve_topk(std::string_view query, std::size_t k, RetrieverKind mode,
                              const IndexSet& indexes, Embedder* embedder = nullptr,
                              const RetrievalOptions& options = {});

/// Writes manifest.json, chunks.jsonl, bm25.json, dense.meta.json and
/// dense.vecs (the last three only for indexes present).
void save_index(const IndexSet& indexes, const std::filesystem::path& dir);
IndexSet load_index(const std::filesystem::path& dir);

}  // namespace telequery
