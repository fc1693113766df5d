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

#include "telequery/embedding.hpp"

#include <cmath>

#include "telequery/error.hpp"

namespace telequery {

std::string_view to_string(EmbeddingMode mode) {
  return mode == EmbeddingMode::token ? "token" : "sequence";
}

EmbeddingMode parse_embedding_mode(std::string_view s) {
  if (s == "token") return EmbeddingMode::token;
  if (s == "sequence") return EmbeddingMode::sequence;
  throw ConfigError("unknown embedding mode '" + std::string(s) + "'");
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ConfigError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

void normalize_in_place(std::span<double> v) {
  const double norm = l2_norm(v);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw ConfigError("cannot normalize a zero vector");
  for (double& x : v) x /= norm;
}

}  // namespace telequery
