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

#include "telequery/stub_backend.hpp"

#include <cmath>

#include "json.hpp"
#include "telequery/embedding.hpp"
#include "telequery/error.hpp"
#include "telequery/hashing.hpp"
#include "telequery/text.hpp"

namespace telequery {

using nlohmann::json;

std::vector<double> stub_embedding(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ConfigError("stub embedding dim must be positive");
  std::vector<double> v;
  v.reserve(dim);
  for (std::uint64_t block = 0; v.size() < dim; ++block) {
    std::string key = std::to_string(seed) + ":" + std::to_string(block) + ":";
    key.append(text);
    const auto digest = sha256(key);
    for (std::size_t w = 0; w + 4 <= digest.size() && v.size() < dim; w += 4) {
      const std::uint32_t u = static_cast<std::uint32_t>(digest[w]) |
                              (static_cast<std::uint32_t>(digest[w + 1]) << 8) |
                              (static_cast<std::uint32_t>(digest[w + 2]) << 16) |
                              (static_cast<std::uint32_t>(digest[w + 3]) << 24);
      v.push_back(static_cast<double>(u) / 4294967296.0 * 2.0 - 1.0);
    }
  }
  normalize_in_place(v);
  return v;
}

std::string stub_model_id(std::size_t dim, std::uint64_t seed) {
  return "stub-" + std::to_string(dim) + "-" + std::to_string(seed);
}

StubBackend::StubBackend(std::size_t dim, std::uint64_t seed, Script script)
    : dim_(dim), seed_(seed), script_(std::move(script)) {}

HttpReply StubBackend::post(const std::string& path, const std::string& body) {
  if (path == "/embed") return embed(body);
  if (path == "/generate") return generate(body);
  return {404, R"({"error":"unknown endpoint"})"};
}

HttpReply StubBackend::embed(const std::string& body) const {
  json request;
  try {
    request = json::parse(body);
    if (!request.at("texts").is_array()) return {400, R"({"error":"texts must be an array"})"};
    parse_embedding_mode(request.at("mode").get<std::string>());
  } catch (const std::exception&) {
    return {400, R"({"error":"malformed request"})"};
  }
  const auto mode = parse_embedding_mode(request["mode"].get<std::string>());
  const auto& texts = request["texts"];
  if (texts.empty()) return {422, R"({"error":"texts is empty"})"};

  json vectors = json::array();
  for (const auto& t : texts) {
    if (!t.is_string() || t.get<std::string>().empty()) return {422, R"({"error":"empty text"})"};
    const auto text = t.get<std::string>();
    if (mode == EmbeddingMode::sequence) {
      vectors.push_back(stub_embedding(text, dim_, seed_));
    } else {
      json per_token = json::array();
      for (const auto& token : folded_tokens(text)) per_token.push_back(stub_embedding(token, dim_, seed_));
      if (per_token.empty()) return {422, R"({"error":"text has no tokens"})"};
      vectors.push_back(std::move(per_token));
    }
  }
  json reply;
  reply["model_id"] = stub_model_id(dim_, seed_);
  reply["dim"] = dim_;
  reply["vectors"] = std::move(vectors);
  return {200, reply.dump()};
}

HttpReply StubBackend::generate(const std::string& body) const {
  std::string prompt;
  try {
    prompt = json::parse(body).at("prompt").get<std::string>();
  } catch (const std::exception&) {
    return {400, R"({"error":"malformed request"})"};
  }
  std::optional<std::string> text;
  if (script_) text = script_(prompt);
  if (!text) {
    json miss;
    miss["error"] = "no scripted response";
    miss["prompt_hash"] = sha256_hex(prompt);
    return {404, miss.dump()};
  }
  return {200, json{{"text", *text}}.dump()};
}

}  // namespace telequery
