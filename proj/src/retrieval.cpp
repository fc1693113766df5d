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

#include "telequery/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "telequery/error.hpp"
#include "telequery/log.hpp"

namespace telequery {

std::string_view to_string(RetrieverKind kind) {
  switch (kind) {
    case RetrieverKind::bm25:
      return "bm25";
    case RetrieverKind::dense:
      return "dense";
    case RetrieverKind::ensemble:
      return "ensemble";
  }
  return "unknown";
}

RetrieverKind parse_retriever_kind(std::string_view s) {
  if (s == "bm25") return RetrieverKind::bm25;
  if (s == "dense") return RetrieverKind::dense;
  if (s == "ensemble") return RetrieverKind::ensemble;
  throw ConfigError("unknown retrieval mode '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// BM25

double Bm25Index::idf(std::string_view term) const {
  const auto it = postings.find(std::string(term));
  const double df = it == postings.end() ? 0.0 : static_cast<double>(it->second.size());
  const double n = static_cast<double>(chunk_count());
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

void Bm25Index::validate() const {
  if (chunk_ids.empty()) throw IndexError("bm25 index has no chunks");
  if (doc_lengths.size() != chunk_ids.size()) {
    throw IndexError("bm25 index: doc_lengths does not match chunk table");
  }
  if (!(avg_doc_length > 0.0)) throw IndexError("bm25 index: avg_doc_length must be > 0");
  for (const auto& [term, list] : postings) {
    for (const auto& p : list) {
      if (p.chunk >= chunk_ids.size() || p.tf == 0) {
        throw IndexError("bm25 index: bad posting for term '" + term + "'");
      }
    }
  }
}

Bm25Index build_bm25(const std::vector<Chunk>& chunks, Bm25Params params) {
  if (chunks.empty()) throw IndexError("cannot build a bm25 index over zero chunks");
  Bm25Index index;
  index.params = params;
  index.chunk_ids.reserve(chunks.size());
  index.doc_lengths.reserve(chunks.size());

  std::uint64_t total = 0;
  for (std::size_t ref = 0; ref < chunks.size(); ++ref) {
    const auto& chunk = chunks[ref];
    index.chunk_ids.push_back(chunk.chunk_id);
    index.doc_lengths.push_back(static_cast<std::uint32_t>(chunk.token_count()));
    total += chunk.token_count();

    std::unordered_map<std::string, std::uint32_t> tf;
    for (const auto& token : chunk.tokens) ++tf[token.folded];
    for (auto& [term, count] : tf) {
      index.postings[term].push_back(Posting{static_cast<std::uint32_t>(ref), count});
    }
  }
  index.avg_doc_length = static_cast<double>(total) / static_cast<double>(chunks.size());
  index.validate();
  return index;
}

std::map<ChunkRef, double> bm25_score(const Bm25Index& index,
                                      std::span<const std::string> query_tokens) {
  std::map<ChunkRef, double> scores;
  const double k1 = index.params.k1;
  const double b = index.params.b;
  for (const auto& term : query_tokens) {
    const auto it = index.postings.find(term);
    if (it == index.postings.end()) continue;
    const double idf = index.idf(term);
    for (const auto& p : it->second) {
      const double tf = p.tf;
      const double len_norm = static_cast<double>(index.doc_lengths[p.chunk]) / index.avg_doc_length;
      scores[p.chunk] += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len_norm));
    }
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Dense late interaction

void DenseIndex::add_chunk(std::string chunk_id, const std::vector<std::vector<double>>& token_vectors) {
  if (token_vectors.empty()) throw IndexError("chunk '" + chunk_id + "' has no token embeddings");
  for (const auto& v : token_vectors) {
    if (v.size() != dim) {
      throw IndexError("chunk '" + chunk_id + "': embedding dim " + std::to_string(v.size()) +
                       " does not match index dim " + std::to_string(dim));
    }
    std::vector<double> unit = v;
    try {
      normalize_in_place(unit);
    } catch (const ConfigError&) {
      throw IndexError("chunk '" + chunk_id + "': backend returned a zero vector");
    }
    for (double x : unit) data.push_back(static_cast<float>(x));
  }
  chunk_ids.push_back(std::move(chunk_id));
  row_offsets.push_back(row_offsets.back() + token_vectors.size());
}

void DenseIndex::validate() const {
  if (dim == 0) throw IndexError("dense index: dim must be positive");
  if (row_offsets.size() != chunk_ids.size() + 1 || row_offsets.front() != 0) {
    throw IndexError("dense index: row offsets do not match chunk table");
  }
  if (data.size() != row_offsets.back() * dim) {
    throw IndexError("dense index: vector buffer holds " + std::to_string(data.size()) +
                     " floats, expected " + std::to_string(row_offsets.back() * dim));
  }
  for (std::size_t i = 0; i < chunk_ids.size(); ++i) {
    if (rows(i) == 0) throw IndexError("dense index: chunk '" + chunk_ids[i] + "' has no rows");
  }
}

DenseIndex build_dense(const std::vector<Chunk>& chunks, Embedder& embedder, std::size_t group_size) {
  if (chunks.empty()) throw IndexError("cannot build a dense index over zero chunks");
  group_size = std::max<std::size_t>(group_size, 1);
  DenseIndex index;
  for (std::size_t start = 0; start < chunks.size(); start += group_size) {
    const std::size_t end = std::min(start + group_size, chunks.size());
    std::vector<std::string> texts;
    for (std::size_t i = start; i < end; ++i) texts.push_back(chunks[i].text);

    std::vector<EmbeddingResult> results;
    try {
      results = embedder.embed(texts, EmbeddingMode::token);
    } catch (const Error& e) {
      throw IndexError("dense build aborted after " + std::to_string(start) + " of " +
                       std::to_string(chunks.size()) + " chunks (next: '" + chunks[start].chunk_id +
                       "'): " + e.what());
    }
    if (results.size() != texts.size()) {
      throw IndexError("embedding backend returned " + std::to_string(results.size()) +
                       " results for " + std::to_string(texts.size()) + " texts");
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      if (index.dim == 0) {
        index.dim = r.dim;
        index.embedder_id = r.model_id;
      } else if (r.dim != index.dim) {
        throw IndexError("embedding dim changed from " + std::to_string(index.dim) + " to " +
                         std::to_string(r.dim) + " at chunk '" + chunks[start + i].chunk_id + "'");
      } else if (r.model_id != index.embedder_id) {
        throw IndexError("embedding model changed from '" + index.embedder_id + "' to '" +
                         r.model_id + "' during build");
      }
      index.add_chunk(chunks[start + i].chunk_id, r.vectors);
    }
  }
  index.validate();
  return index;
}

namespace {

void check_query_dim(const DenseIndex& index, const std::vector<std::vector<double>>& query) {
  for (const auto& q : query) {
    if (q.size() != index.dim) {
      throw IndexError("query embedding dim " + std::to_string(q.size()) +
                       " does not match index dim " + std::to_string(index.dim));
    }
  }
}

double maxsim_unchecked(const DenseIndex& index, ChunkRef chunk,
                        const std::vector<std::vector<double>>& query) {
  const std::size_t first = index.row_offsets[chunk];
  const std::size_t last = index.row_offsets[chunk + 1];
  double total = 0.0;
  for (const auto& q : query) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t r = first; r < last; ++r) {
      const auto row = index.row(r);
      double s = 0.0;
      for (std::size_t d = 0; d < index.dim; ++d) s += q[d] * static_cast<double>(row[d]);
      best = std::max(best, s);
    }
    total += best;
  }
  return total;
}

}  // namespace

double maxsim_score(const DenseIndex& index, ChunkRef chunk,
                    const std::vector<std::vector<double>>& query_vectors) {
  check_query_dim(index, query_vectors);
  if (chunk >= index.chunk_count()) throw IndexError("chunk ref out of range");
  return maxsim_unchecked(index, chunk, query_vectors);
}

std::vector<double> maxsim_score(const DenseIndex& index,
                                 const std::vector<std::vector<double>>& query_vectors) {
  check_query_dim(index, query_vectors);
  std::vector<double> scores(index.chunk_count());
  for (ChunkRef c = 0; c < index.chunk_count(); ++c) {
    scores[c] = maxsim_unchecked(index, c, query_vectors);
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Top-k

std::vector<std::string> RetrievalResult::chunk_ids() const {
  std::vector<std::string> ids;
  ids.reserve(entries.size());
  for (const auto& e : entries) ids.push_back(e.chunk_id);
  return ids;
}

const Chunk* IndexSet::find_chunk(std::string_view chunk_id) const {
  for (const auto& c : chunks) {
    if (c.chunk_id == chunk_id) return &c;
  }
  return nullptr;
}

namespace {

// Refs ordered by score descending, chunk_id ascending.
std::vector<ChunkRef> rank(const std::vector<double>& scores, const std::vector<Chunk>& chunks) {
  std::vector<ChunkRef> order(scores.size());
  std::iota(order.begin(), order.end(), ChunkRef{0});
  std::stable_sort(order.begin(), order.end(), [&](ChunkRef a, ChunkRef b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return chunks[a].chunk_id < chunks[b].chunk_id;
  });
  return order;
}

std::vector<double> bm25_all(const IndexSet& set, std::string_view query) {
  if (!set.bm25) throw IndexError("bm25 index not available");
  const auto tokens = folded_tokens(query);
  std::vector<double> scores(set.chunks.size(), 0.0);
  for (const auto& [ref, s] : bm25_score(*set.bm25, tokens)) scores[ref] = s;
  return scores;
}

std::vector<double> dense_all(const IndexSet& set, std::string_view query, Embedder* embedder) {
  if (!set.dense) throw IndexError("dense index not available");
  if (embedder == nullptr) throw ConfigError("dense retrieval needs an embedding backend");
  if (count_tokens(query) == 0) return std::vector<double>(set.chunks.size(), 0.0);

  auto results = embedder->embed({std::string(query)}, EmbeddingMode::token);
  if (results.size() != 1) throw IndexError("embedding backend returned no query embedding");
  auto& q = results.front();
  if (q.model_id != set.dense->embedder_id) {
    throw IndexError("query embedder '" + q.model_id + "' does not match index embedder '" +
                     set.dense->embedder_id + "'");
  }
  for (auto& v : q.vectors) normalize_in_place(v);
  return maxsim_score(*set.dense, q.vectors);
}

}  // namespace

RetrievalResult retrieve_topk(std::string_view query, std::size_t k, RetrieverKind mode,
                              const IndexSet& set, Embedder* embedder,
                              const RetrievalOptions& options) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (set.chunks.empty()) throw IndexError("index set has no chunks");
  RetrievalResult result;
  result.k = k;
  if (k > set.chunks.size()) {
    log_warning("k=" + std::to_string(k) + " exceeds chunk count " +
                std::to_string(set.chunks.size()) + "; returning all chunks");
    k = set.chunks.size();
  }

  if (mode == RetrieverKind::bm25 || mode == RetrieverKind::dense) {
    const auto scores =
        mode == RetrieverKind::bm25 ? bm25_all(set, query) : dense_all(set, query, embedder);
    const auto order = rank(scores, set.chunks);
    for (std::size_t i = 0; i < k; ++i) {
      result.entries.push_back({set.chunks[order[i]].chunk_id, scores[order[i]], mode});
    }
    return result;
  }

  if (options.dense_share < 0.0 || options.dense_share > 1.0) {
    throw ConfigError("dense_share must be in [0, 1]");
  }
  const auto dense_scores = dense_all(set, query, embedder);
  const auto sparse_scores = bm25_all(set, query);
  const auto dense_order = rank(dense_scores, set.chunks);
  const auto sparse_order = rank(sparse_scores, set.chunks);
  const auto dense_quota =
      static_cast<std::size_t>(std::ceil(static_cast<double>(k) * options.dense_share - 1e-12));
  const std::size_t sparse_quota = k - dense_quota;

  std::unordered_set<ChunkRef> taken;
  std::vector<std::pair<ChunkRef, RetrieverKind>> picks;
  for (std::size_t i = 0; i < dense_quota; ++i) {
    taken.insert(dense_order[i]);
    picks.emplace_back(dense_order[i], RetrieverKind::dense);
  }
  std::size_t sparse_taken = 0;
  for (std::size_t i = 0; i < sparse_order.size() && sparse_taken < sparse_quota; ++i) {
    const ChunkRef ref = sparse_order[i];
    if (!(sparse_scores[ref] > 0.0)) break;
    ++sparse_taken;
    if (taken.insert(ref).second) picks.emplace_back(ref, RetrieverKind::bm25);
  }
  for (std::size_t i = 0; i < dense_order.size() && picks.size() < k; ++i) {
    if (taken.insert(dense_order[i]).second) picks.emplace_back(dense_order[i], RetrieverKind::dense);
  }
  for (std::size_t rank_pos = 0; rank_pos < picks.size(); ++rank_pos) {
    const auto& [ref, source] = picks[rank_pos];
    result.entries.push_back(
        {set.chunks[ref].chunk_id, 1.0 / static_cast<double>(rank_pos + 1), source});
  }
  return result;
}

}  // namespace telequery
