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
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "telequery/embedding.hpp"
#include "telequery/glossary.hpp"
#include "telequery/prompt.hpp"
#include "telequery/question.hpp"

namespace telequery {

/// alpha1 weighs the normalized term overlap, alpha2 the cosine similarity.
struct ScoreWeights {
  double alpha1 = 0.2;
  double alpha2 = 0.8;

  /// Throws ConfigError unless both are in [0, 1] and sum to 1 (+-1e-9).
  void validate() const;
  /// Parses "0.2,0.8".
  static ScoreWeights parse(std::string_view text);
};

struct ScoredOption {
  std::string option_id;
  double overlap_raw = 0.0;
  double overlap_norm = 0.0;
  double cosine = 0.0;
  double ensemble = 0.0;
};

/// tf(t, d) * (ln((1 + N) / (1 + df(t))) + 1) for every token of every
/// document, N being the number of documents supplied.
std::vector<std::map<std::string, double>> tfidf_weights(
    const std::vector<std::vector<std::string>>& documents);

/// For each option: sum over tokens shared with the response of
/// weight(t, option) * weight(t, response), with idf taken over the
/// response plus all options. Aligned with `options`.
std::vector<double> overlap_score(std::string_view response, const std::vector<Option>& options);

/// Divides by the largest score; all zeros when nothing overlaps.
std::vector<double> normalize_overlap(std::span<const double> raw);

/// Throws ConfigError on a dimension mismatch or a zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Overlap and cosine for every option, ensemble left at zero. Cosine needs
/// one sequence-embedding call for the response and options together; an
/// empty response skips the call and leaves every cosine at 0.
std::vector<ScoredOption> score_signals(std::string_view response, const std::vector<Option>& options,
                                        Embedder& embedder, std::string_view qid = {});

/// ensemble = alpha1 * overlap_norm + alpha2 * cosine. The weights are not
/// required to sum to one here.
void apply_weights(std::span<ScoredOption> scored, double alpha1, double alpha2);

std::vector<ScoredOption> ensemble_score(std::string_view response, const std::vector<Option>& options,
                                         const ScoreWeights& weights, Embedder& embedder,
                                         std::string_view qid = {});

/// Highest ensemble score; exact ties go to the lowest option id.
std::string select_option(std::span<const ScoredOption> scored);

struct Triplet {
  std::string qid;
  std::string anchor;
  std::string positive;
  std::string negative;

  bool operator==(const Triplet&) const = default;
};

struct TripletSet {
  std::vector<Triplet> triplets;
  std::size_t skipped = 0;
};

/// One (explanation, correct option, random wrong option) triplet per
/// question that has an explanation and an answer. The wrong option is drawn
/// uniformly with a seeded mt19937_64, so output is stable across platforms.
TripletSet build_triplets(const std::vector<Question>& questions, std::uint64_t seed);

void write_triplets_jsonl(const std::vector<Triplet>& triplets, std::ostream& out);

struct SftRecord {
  std::string qid;
  std::string prompt;
  std::string target;
};

struct SftSet {
  std::vector<SftRecord> records;
  std::size_t skipped = 0;
};

/// "Answer: option <id>\nExplanation: <explanation>"
std::string sft_target(const Question& q);

/// Prompt per question built from the mcq template with the question's
/// retrieved context (keyed by qid; may be missing) and glossary expansions.
/// Questions without answer or explanation are skipped.
SftSet build_sft_records(const std::vector<Question>& questions,
                         const std::map<std::string, std::vector<ContextChunk>>& contexts,
                         const Glossary& glossary,
                         const PromptTemplate& tmpl = PromptTemplate::default_mcq());

void write_sft_jsonl(const std::vector<SftRecord>& records, std::ostream& out);

}  // namespace telequery
