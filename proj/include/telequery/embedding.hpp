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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace telequery {

enum class EmbeddingMode { sequence, token };

std::string_view to_string(EmbeddingMode mode);
EmbeddingMode parse_embedding_mode(std::string_view s);

/// Embedding of one input text: a single vector in sequence mode, one
/// vector per token in token mode.
struct EmbeddingResult {
  EmbeddingMode mode = EmbeddingMode::sequence;
  std::size_t dim = 0;
  std::vector<std::vector<double>> vectors;
  std::string model_id;
};

/// Anything that turns texts into embeddings, preserving input order.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<EmbeddingResult> embed(const std::vector<std::string>& texts,
                                             EmbeddingMode mode) = 0;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

/// Scales `v` to unit length. Throws ConfigError for a zero vector.
void normalize_in_place(std::span<double> v);

}  // namespace telequery
