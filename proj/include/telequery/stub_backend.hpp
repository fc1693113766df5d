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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "telequery/gateway.hpp"

namespace telequery {

/// Deterministic pseudo-embedding of `text`: consecutive SHA-256 digests of
/// "<seed>:<block>:<text>" read as little-endian uint32 words, each mapped
/// to u / 2^32 * 2 - 1, truncated to `dim` values and L2-normalized.
std::vector<double> stub_embedding(std::string_view text, std::size_t dim, std::uint64_t seed);

/// "stub-<dim>-<seed>"
std::string stub_model_id(std::size_t dim, std::uint64_t seed);

/// In-process implementation of the /embed and /generate wire protocol for
/// offline tests and fixture recording. Embeddings come from
/// stub_embedding (token mode: one vector per folded word token);
/// generations come from a script and unknown prompts get a 404 naming the
/// prompt hash.
class StubBackend final : public Transport {
 public:
  using Script = std::function<std::optional<std::string>(const std::string& prompt)>;

  explicit StubBackend(std::size_t dim = 64, std::uint64_t seed = 0, Script script = {});

  HttpReply post(const std::string& path, const std::string& body) override;
  std::string describe() const override { return "stub:" + stub_model_id(dim_, seed_); }

 private:
  HttpReply embed(const std::string& body) const;
  HttpReply generate(const std::string& body) const;

  std::size_t dim_;
  std::uint64_t seed_;
  Script script_;
};

}  // namespace telequery
