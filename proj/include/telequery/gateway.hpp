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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "telequery/embedding.hpp"

namespace telequery {

/// Environment variable naming a cassette file; when set, make_transport
/// replays from it instead of opening HTTP connections.
inline constexpr const char* kCassetteEnvVar = "TELEQUERY_CASSETTE";

inline constexpr std::size_t kMcqMaxNewTokens = 10;
inline constexpr std::size_t kOpenMaxNewTokens = 100;

struct BackendConfig {
  std::string base_url;
  double timeout_s = 60.0;
  int max_retries = 3;
  std::size_t batch_size = 16;
  std::size_t max_new_tokens = kMcqMaxNewTokens;
  std::chrono::milliseconds initial_backoff{250};
  std::size_t max_concurrency = 4;
  /// Sent as "Authorization: Bearer <token>" when non-empty.
  std::string bearer_token;

  void validate() const;
};

struct HttpReply {
  int status = 0;
  std::string body;
};

/// Carries one JSON POST to a backend. Throws GatewayError when no reply
/// could be obtained at all; any HTTP status is returned as a reply.
/// Implementations must be safe to call from several threads.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpReply post(const std::string& path, const std::string& body) = 0;
  /// Short human-readable identity, recorded in run reports.
  virtual std::string describe() const = 0;
};

class HttpTransport final : public Transport {
 public:
  HttpTransport(std::string base_url, double timeout_s, std::string bearer_token = {});
  HttpReply post(const std::string& path, const std::string& body) override;
  std::string describe() const override { return "http:" + base_url_; }

 private:
  std::string base_url_;
  double timeout_s_;
  std::string bearer_token_;
};

/// Key of a recorded exchange: sha256_hex(path + "\n" + body).
std::string request_hash(std::string_view path, std::string_view body);

/// Replays recorded responses from a JSON-Lines file of
/// {"request_hash": ..., "response": {...}} records. A miss is a
/// GatewayError naming the hash.
class CassetteTransport final : public Transport {
 public:
  explicit CassetteTransport(const std::filesystem::path& path);
  HttpReply post(const std::string& path, const std::string& body) override;
  std::string describe() const override { return "cassette:" + id_; }
  /// sha256 of the cassette file bytes.
  const std::string& id() const { return id_; }
  std::size_t size() const { return responses_.size(); }

 private:
  std::map<std::string, std::string> responses_;
  std::string id_;
};

/// Forwards to another transport and keeps every 200 reply so it can be
/// written out as a cassette.
class RecordingTransport final : public Transport {
 public:
  explicit RecordingTransport(Transport& inner) : inner_(inner) {}
  HttpReply post(const std::string& path, const std::string& body) override;
  std::string describe() const override { return "recording:" + inner_.describe(); }
  /// Records sorted by request hash, so the file is byte-stable.
  void save(const std::filesystem::path& path) const;

 private:
  Transport& inner_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> recorded_;
};

/// Cassette transport when TELEQUERY_CASSETTE is set, HTTP otherwise.
std::unique_ptr<Transport> make_transport(const BackendConfig& cfg);

class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string generate(const std::string& prompt, std::size_t max_new_tokens) = 0;
};

/// POST {base}/generate {"max_new_tokens", "prompt", "temperature": 0} -> {"text"}.
/// Retries transport failures, HTTP 429 and 5xx with exponential backoff.
class GenerationClient final : public Generator {
 public:
  GenerationClient(Transport& transport, BackendConfig cfg);
  std::string generate(const std::string& prompt, std::size_t max_new_tokens) override;
  std::string generate(const std::string& prompt) { return generate(prompt, cfg_.max_new_tokens); }

 private:
  Transport& transport_;
  BackendConfig cfg_;
};

/// POST {base}/embed {"mode", "texts"} -> {"model_id", "dim", "vectors"},
/// split into batches of cfg.batch_size. Any failing batch fails the call.
class EmbeddingClient final : public Embedder {
 public:
  EmbeddingClient(Transport& transport, BackendConfig cfg);
  std::vector<EmbeddingResult> embed(const std::vector<std::string>& texts, EmbeddingMode mode) override;

 private:
  Transport& transport_;
  BackendConfig cfg_;
};

/// Sends one request with the retry policy of `cfg` and returns the reply
/// body of the first 200. Throws GatewayError with the attempt log.
std::string post_with_retry(Transport& transport, const BackendConfig& cfg, const std::string& path,
                            const std::string& body);

/// First "option <k>" (any case) naming a valid id, else the first
/// standalone number that is a valid id, else nullopt.
std::optional<std::string> parse_mcq_answer(std::string_view generation,
                                            std::span<const std::string> valid_ids);

}  // namespace telequery
