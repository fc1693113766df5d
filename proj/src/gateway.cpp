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

#include "telequery/gateway.hpp"

#include "httplib.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "telequery/error.hpp"
#include "telequery/hashing.hpp"
#include "telequery/text.hpp"

namespace telequery {

using nlohmann::json;

void BackendConfig::validate() const {
  if (!(timeout_s > 0.0)) throw ConfigError("backend timeout must be > 0");
  if (batch_size < 1) throw ConfigError("backend batch_size must be >= 1");
  if (max_retries < 0) throw ConfigError("backend max_retries must be >= 0");
  if (max_concurrency < 1) throw ConfigError("backend max_concurrency must be >= 1");
}

// ---------------------------------------------------------------------------
// HTTP

HttpTransport::HttpTransport(std::string base_url, double timeout_s, std::string bearer_token)
    : base_url_(std::move(base_url)), timeout_s_(timeout_s), bearer_token_(std::move(bearer_token)) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
  if (base_url_.find("://") == std::string::npos) {
    throw ConfigError("backend URL must include a scheme: '" + base_url_ + "'");
  }
}

HttpReply HttpTransport::post(const std::string& path, const std::string& body) {
  const auto scheme_end = base_url_.find("://") + 3;
  const auto slash = base_url_.find('/', scheme_end);
  const std::string origin = base_url_.substr(0, slash);
  const std::string prefix = slash == std::string::npos ? "" : base_url_.substr(slash);

  httplib::Client client(origin);
  const auto secs = static_cast<time_t>(timeout_s_);
  const auto usecs = static_cast<time_t>((timeout_s_ - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!bearer_token_.empty()) headers.emplace("Authorization", "Bearer " + bearer_token_);

  auto res = client.Post(prefix + path, headers, body, "application/json");
  if (!res) {
    throw GatewayError("POST " + base_url_ + path + " failed: " + httplib::to_string(res.error()));
  }
  return HttpReply{res->status, res->body};
}

// ---------------------------------------------------------------------------
// Cassettes

std::string request_hash(std::string_view path, std::string_view body) {
  std::string key;
  key.reserve(path.size() + 1 + body.size());
  key.append(path).push_back('\n');
  key.append(body);
  return sha256_hex(key);
}

CassetteTransport::CassetteTransport(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GatewayError("cannot read cassette: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto rec = json::parse(line);
      responses_[rec.at("request_hash").get<std::string>()] = rec.at("response").dump();
    } catch (const json::exception& e) {
      throw GatewayError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  id_ = file_sha256_hex(path);
}

HttpReply CassetteTransport::post(const std::string& path, const std::string& body) {
  const auto hash = request_hash(path, body);
  const auto it = responses_.find(hash);
  if (it == responses_.end()) throw CassetteMissError("cassette miss for " + path + " request " + hash);
  return HttpReply{200, it->second};
}

HttpReply RecordingTransport::post(const std::string& path, const std::string& body) {
  HttpReply reply = inner_.post(path, body);
  if (reply.status == 200) {
    std::lock_guard lock(mutex_);
    recorded_[request_hash(path, body)] = reply.body;
  }
  return reply;
}

void RecordingTransport::save(const std::filesystem::path& path) const {
  std::lock_guard lock(mutex_);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GatewayError("cannot write cassette: " + path.string());
  for (const auto& [hash, body] : recorded_) {
    nlohmann::ordered_json rec;
    rec["request_hash"] = hash;
    rec["response"] = json::parse(body);
    out << rec.dump() << '\n';
  }
}

std::unique_ptr<Transport> make_transport(const BackendConfig& cfg) {
  cfg.validate();
  if (const char* cassette = std::getenv(kCassetteEnvVar); cassette != nullptr && *cassette != '\0') {
    return std::make_unique<CassetteTransport>(cassette);
  }
  if (cfg.base_url.empty()) throw ConfigError("no backend URL given and " + std::string(kCassetteEnvVar) + " is unset");
  return std::make_unique<HttpTransport>(cfg.base_url, cfg.timeout_s, cfg.bearer_token);
}

// ---------------------------------------------------------------------------
// Clients

std::string post_with_retry(Transport& transport, const BackendConfig& cfg, const std::string& path,
                            const std::string& body) {
  std::string attempts;
  auto backoff = cfg.initial_backoff;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0 && backoff.count() > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    bool retryable = true;
    try {
      HttpReply reply = transport.post(path, body);
      if (reply.status == 200) return std::move(reply.body);
      retryable = reply.status == 429 || reply.status >= 500;
      attempts += "\n  attempt " + std::to_string(attempt + 1) + ": HTTP " + std::to_string(reply.status) +
                  " " + reply.body.substr(0, 200);
    } catch (const ProtocolError&) {
      throw;
    } catch (const CassetteMissError&) {
      throw;
    } catch (const GatewayError& e) {
      attempts += "\n  attempt " + std::to_string(attempt + 1) + ": " + e.what();
    }
    if (!retryable) break;
  }
  throw GatewayError("POST " + path + " failed" + attempts);
}

GenerationClient::GenerationClient(Transport& transport, BackendConfig cfg)
    : transport_(transport), cfg_(std::move(cfg)) {
  cfg_.validate();
}

std::string GenerationClient::generate(const std::string& prompt, std::size_t max_new_tokens) {
  json request;
  request["prompt"] = prompt;
  request["max_new_tokens"] = max_new_tokens;
  request["temperature"] = 0;
  const std::string body = post_with_retry(transport_, cfg_, "/generate", request.dump());
  try {
    return json::parse(body).at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("bad /generate response: ") + e.what());
  }
}

EmbeddingClient::EmbeddingClient(Transport& transport, BackendConfig cfg)
    : transport_(transport), cfg_(std::move(cfg)) {
  cfg_.validate();
}

namespace {

std::vector<double> parse_vector(const json& v, std::size_t dim) {
  auto out = v.get<std::vector<double>>();
  if (out.size() != dim) {
    throw ProtocolError("embedding of length " + std::to_string(out.size()) + " but dim is " + std::to_string(dim));
  }
  return out;
}

}  // namespace

std::vector<EmbeddingResult> EmbeddingClient::embed(const std::vector<std::string>& texts, EmbeddingMode mode) {
  if (texts.empty()) throw ConfigError("embed needs at least one text");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) throw ConfigError("cannot embed an empty text (index " + std::to_string(i) + ")");
  }

  std::vector<EmbeddingResult> results;
  results.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += cfg_.batch_size) {
    const std::size_t end = std::min(start + cfg_.batch_size, texts.size());
    json request;
    request["mode"] = to_string(mode);
    request["texts"] = std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                                texts.begin() + static_cast<std::ptrdiff_t>(end));
    const std::string body = post_with_retry(transport_, cfg_, "/embed", request.dump());
    try {
      const auto reply = json::parse(body);
      const auto dim = reply.at("dim").get<std::size_t>();
      const auto model_id = reply.at("model_id").get<std::string>();
      const auto& vectors = reply.at("vectors");
      if (!vectors.is_array() || vectors.size() != end - start) {
        throw ProtocolError("/embed returned " + std::to_string(vectors.size()) + " entries for " +
                            std::to_string(end - start) + " texts");
      }
      if (!results.empty() && (dim != results.front().dim || model_id != results.front().model_id)) {
        throw ProtocolError("/embed changed dim or model_id between batches");
      }
      for (const auto& entry : vectors) {
        EmbeddingResult r;
        r.mode = mode;
        r.dim = dim;
        r.model_id = model_id;
        if (mode == EmbeddingMode::sequence) {
          r.vectors.push_back(parse_vector(entry, dim));
        } else {
          if (!entry.is_array() || entry.empty()) throw ProtocolError("token embedding must hold >= 1 vector");
          for (const auto& v : entry) r.vectors.push_back(parse_vector(v, dim));
        }
        results.push_back(std::move(r));
      }
    } catch (const json::exception& e) {
      throw ProtocolError(std::string("bad /embed response: ") + e.what());
    }
  }
  return results;
}

// ---------------------------------------------------------------------------
// Answer parsing

std::optional<std::string> parse_mcq_answer(std::string_view generation, std::span<const std::string> valid_ids) {
  auto is_valid = [&](std::string_view id) {
    return std::find(valid_ids.begin(), valid_ids.end(), id) != valid_ids.end();
  };
  auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  auto digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };

  std::string lower(generation);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  constexpr std::string_view kWord = "option";
  for (std::size_t pos = lower.find(kWord); pos != std::string::npos; pos = lower.find(kWord, pos + 1)) {
    if (pos > 0 && alnum(lower[pos - 1])) continue;
    std::size_t i = pos + kWord.size();
    while (i < lower.size() && lower[i] == ' ') ++i;
    const std::size_t b = i;
    while (i < lower.size() && digit(lower[i])) ++i;
    if (i == b || (i < lower.size() && alnum(lower[i]))) continue;
    const std::string id = lower.substr(b, i - b);
    if (is_valid(id)) return id;
  }

  for (std::size_t i = 0; i < lower.size();) {
    if (!digit(lower[i])) {
      ++i;
      continue;
    }
    const std::size_t b = i;
    while (i < lower.size() && digit(lower[i])) ++i;
    const bool standalone = (b == 0 || !alnum(lower[b - 1])) && (i == lower.size() || !alnum(lower[i]));
    if (standalone) {
      const std::string id = lower.substr(b, i - b);
      if (is_valid(id)) return id;
    }
  }
  return std::nullopt;
}

}  // namespace telequery
