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

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "telequery/error.hpp"
#include "telequery/retrieval.hpp"

namespace telequery {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little,
              "dense.vecs is little-endian float32; add byte swapping for this target");

namespace {

constexpr int kFormatVersion = 1;

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IndexError("cannot write " + path.string());
  out << content;
  if (!out) throw IndexError("error writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IndexError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IndexError(path.string() + ": " + e.what());
  }
}

ordered_json bm25_to_json(const Bm25Index& index) {
  ordered_json j;
  j["params"] = {{"k1", index.params.k1}, {"b", index.params.b}};
  j["n"] = index.chunk_count();
  j["avg_doc_length"] = index.avg_doc_length;
  j["chunk_ids"] = index.chunk_ids;
  j["doc_lengths"] = index.doc_lengths;
  // Sorted terms keep the file byte-stable across runs.
  std::map<std::string, const std::vector<Posting>*> sorted;
  for (const auto& [term, list] : index.postings) sorted.emplace(term, &list);
  ordered_json postings = ordered_json::object();
  for (const auto& [term, list] : sorted) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : *list) arr.push_back({p.chunk, p.tf});
    postings[term] = std::move(arr);
  }
  j["postings"] = std::move(postings);
  return j;
}

Bm25Index bm25_from_json(const json& j) {
  Bm25Index index;
  index.params.k1 = j.at("params").at("k1").get<double>();
  index.params.b = j.at("params").at("b").get<double>();
  index.avg_doc_length = j.at("avg_doc_length").get<double>();
  index.chunk_ids = j.at("chunk_ids").get<std::vector<std::string>>();
  index.doc_lengths = j.at("doc_lengths").get<std::vector<std::uint32_t>>();
  if (j.at("n").get<std::size_t>() != index.chunk_ids.size()) {
    throw IndexError("bm25.json: n does not match chunk_ids");
  }
  for (const auto& [term, arr] : j.at("postings").items()) {
    auto& list = index.postings[term];
    list.reserve(arr.size());
    for (const auto& p : arr) list.push_back({p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()});
  }
  index.validate();
  return index;
}

}  // namespace

void save_index(const IndexSet& set, const fs::path& dir) {
  fs::create_directories(dir);

  ordered_json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["tokenizer"] = default_tokenizer().name();
  manifest["chunk_size"] = set.chunking.chunk_size;
  manifest["stride"] = set.chunking.stride;
  manifest["chunk_count"] = set.chunks.size();
  manifest["bm25"] = set.bm25.has_value();
  manifest["dense"] = set.dense.has_value();
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  std::string lines;
  for (const auto& c : set.chunks) {
    ordered_json rec;
    rec["chunk_id"] = c.chunk_id;
    rec["doc_id"] = c.doc_id;
    rec["ordinal"] = c.ordinal;
    rec["token_count"] = c.token_count();
    rec["offset"] = c.tokens.empty() ? 0 : c.tokens.front().begin;
    rec["text"] = c.text;
    lines += rec.dump() + "\n";
  }
  write_text(dir / "chunks.jsonl", lines);

  if (set.bm25) write_text(dir / "bm25.json", bm25_to_json(*set.bm25).dump() + "\n");

  if (set.dense) {
    const auto& d = *set.dense;
    d.validate();
    ordered_json meta;
    meta["dim"] = d.dim;
    meta["embedder_id"] = d.embedder_id;
    meta["dtype"] = "float32-le";
    ordered_json table = ordered_json::array();
    for (std::size_t i = 0; i < d.chunk_count(); ++i) {
      table.push_back({{"chunk_id", d.chunk_ids[i]}, {"row_offset", d.row_offsets[i]}, {"rows", d.rows(i)}});
    }
    meta["chunks"] = std::move(table);
    write_text(dir / "dense.meta.json", meta.dump(2) + "\n");

    std::ofstream out(dir / "dense.vecs", std::ios::binary);
    if (!out) throw IndexError("cannot write " + (dir / "dense.vecs").string());
    out.write(reinterpret_cast<const char*>(d.data.data()),
              static_cast<std::streamsize>(d.data.size() * sizeof(float)));
    if (!out) throw IndexError("error writing dense.vecs");
  }
}

static IndexSet load_index_unchecked(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IndexError("index directory not found: " + dir.string());
  IndexSet set;

  const json manifest = read_json(dir / "manifest.json");
  if (manifest.at("format_version").get<int>() != kFormatVersion) {
    throw IndexError("unsupported index format version in " + dir.string());
  }
  if (manifest.at("tokenizer").get<std::string>() != default_tokenizer().name()) {
    throw IndexError("index was built with tokenizer '" + manifest.at("tokenizer").get<std::string>() + "'");
  }
  set.chunking.chunk_size = manifest.at("chunk_size").get<std::size_t>();
  set.chunking.stride = manifest.at("stride").get<std::size_t>();

  std::ifstream in(dir / "chunks.jsonl");
  if (!in) throw IndexError("cannot read " + (dir / "chunks.jsonl").string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = json::parse(line);
    Chunk c;
    c.chunk_id = rec.at("chunk_id").get<std::string>();
    c.doc_id = rec.at("doc_id").get<std::string>();
    c.ordinal = rec.at("ordinal").get<std::size_t>();
    c.text = rec.at("text").get<std::string>();
    c.tokens = tokenize(c.text);
    const auto offset = rec.at("offset").get<std::size_t>();
    for (auto& t : c.tokens) {
      t.begin += offset;
      t.end += offset;
    }
    if (c.tokens.size() != rec.at("token_count").get<std::size_t>()) {
      throw IndexError("chunk '" + c.chunk_id + "' re-tokenizes to a different length");
    }
    set.chunks.push_back(std::move(c));
  }
  if (set.chunks.size() != manifest.at("chunk_count").get<std::size_t>()) {
    throw IndexError("chunks.jsonl does not match manifest chunk_count");
  }
  auto check_ids = [&](const std::vector<std::string>& ids, const char* what) {
    if (ids.size() != set.chunks.size()) throw IndexError(std::string(what) + ": chunk table size mismatch");
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] != set.chunks[i].chunk_id) {
        throw IndexError(std::string(what) + ": chunk order differs at '" + ids[i] + "'");
      }
    }
  };

  if (manifest.at("bm25").get<bool>()) {
    set.bm25 = bm25_from_json(read_json(dir / "bm25.json"));
    check_ids(set.bm25->chunk_ids, "bm25.json");
  }

  if (manifest.at("dense").get<bool>()) {
    const json meta = read_json(dir / "dense.meta.json");
    DenseIndex d;
    d.dim = meta.at("dim").get<std::size_t>();
    d.embedder_id = meta.at("embedder_id").get<std::string>();
    if (meta.at("dtype").get<std::string>() != "float32-le") throw IndexError("unsupported dense dtype");
    d.row_offsets.assign(1, 0);
    for (const auto& rec : meta.at("chunks")) {
      if (rec.at("row_offset").get<std::size_t>() != d.row_offsets.back()) {
        throw IndexError("dense.meta.json: non-contiguous row offsets");
      }
      d.chunk_ids.push_back(rec.at("chunk_id").get<std::string>());
      d.row_offsets.push_back(d.row_offsets.back() + rec.at("rows").get<std::size_t>());
    }
    const fs::path vecs = dir / "dense.vecs";
    const auto bytes = fs::file_size(vecs);
    if (bytes != d.row_offsets.back() * d.dim * sizeof(float)) {
      throw IndexError("dense.vecs has " + std::to_string(bytes) + " bytes, expected " +
                       std::to_string(d.row_offsets.back() * d.dim * sizeof(float)));
    }
    d.data.resize(bytes / sizeof(float));
    std::ifstream vin(vecs, std::ios::binary);
    vin.read(reinterpret_cast<char*>(d.data.data()), static_cast<std::streamsize>(bytes));
    if (!vin) throw IndexError("error reading " + vecs.string());
    d.validate();
    check_ids(d.chunk_ids, "dense.meta.json");
    set.dense = std::move(d);
  }
  return set;
}

IndexSet load_index(const fs::path& dir) {
  try {
    return load_index_unchecked(dir);
  } catch (const json::exception& e) {
    throw IndexError(dir.string() + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw IndexError(e.what());
  }
}

}  // namespace telequery
