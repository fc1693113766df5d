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
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "telequery/gateway.hpp"
#include "telequery/glossary.hpp"
#include "telequery/prompt.hpp"
#include "telequery/question.hpp"
#include "telequery/retrieval.hpp"
#include "telequery/scoring.hpp"

namespace telequery {

inline constexpr std::size_t kMcqDefaultK = 13;
inline constexpr std::size_t kOpenDefaultK = 3;

struct EvalConfig {
  PromptMode pipeline = PromptMode::mcq;
  std::size_t k = kMcqDefaultK;
  RetrieverKind retrieval = RetrieverKind::dense;
  RetrievalOptions retrieval_options;
  /// Append glossary expansions to the retrieval query.
  bool expand_retrieval_query = false;
  ScoreWeights weights;
  BudgetPolicy budget;
  std::size_t max_new_tokens = kMcqMaxNewTokens;
  std::size_t max_concurrency = 4;
  /// Extra generations after an unparseable mcq answer.
  std::size_t parse_retries = 0;
  /// Free-form provenance copied into the report (cassette id, seed, ...).
  std::map<std::string, std::string> labels;

  static EvalConfig mcq_defaults();
  static EvalConfig open_defaults();
};

/// Question stem, plus one line per glossary expansion when `expand` is set.
std::string retrieval_query(const Question& q, const Glossary& glossary, bool expand);

struct Backends {
  Generator* generator = nullptr;
  Embedder* embedder = nullptr;
};

struct QuestionOutcome {
  std::string qid;
  std::optional<std::string> predicted;
  std::optional<std::string> expected;
  bool correct = false;
  bool parse_failed = false;
  std::vector<std::string> retrieved_chunk_ids;
  std::size_t dropped_chunks = 0;
  bool prompt_overflow = false;
  std::string prompt_hash;
  std::string response;
  /// Open pipeline only.
  std::vector<ScoredOption> scored;
};

/// Seconds summed over questions.
struct StageTimes {
  double retrieval = 0.0;
  double prompt = 0.0;
  double generation = 0.0;
  double scoring = 0.0;
};

struct EvalReport {
  EvalConfig config;
  std::vector<std::string> backends;
  /// Sorted by qid.
  std::vector<QuestionOutcome> per_question;
  std::size_t total_questions = 0;
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  bool complete = true;
  std::string error;
  StageTimes wall_clock;
};

/// Thread-safe store of generations keyed by (qid, prompt hash).
class ResponseCache {
 public:
  std::optional<std::string> find(const std::string& qid, const std::string& prompt_hash) const;
  void put(const std::string& qid, const std::string& prompt_hash, std::string response);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::string> entries_;
};

/// retrieve -> expand -> mcq prompt -> generate -> parse -> compare.
/// Unparseable generations count as incorrect. A backend failure stops the
/// run; the returned report is then marked incomplete and holds the
/// questions finished so far.
EvalReport run_eval_mcq(const std::vector<Question>& questions, const IndexSet& indexes,
                        const Glossary& glossary, const EvalConfig& config, Backends backends,
                        const PromptTemplate& tmpl = PromptTemplate::default_mcq(),
                        ResponseCache* cache = nullptr);

/// retrieve -> expand -> open prompt -> generate -> ensemble score -> select.
EvalReport run_eval_open(const std::vector<Question>& questions, const IndexSet& indexes,
                         const Glossary& glossary, const EvalConfig& config, Backends backends,
                         const PromptTemplate& tmpl = PromptTemplate::default_open(),
                         ResponseCache* cache = nullptr);

/// qid -> relevant chunk ids.
using RecallJudgments = std::map<std::string, std::set<std::string>>;

/// JSON object qid -> [chunk_id, ...] or qid -> {chunk_id: bool}. With
/// `indexes`, every judged chunk id must exist in it.
RecallJudgments load_judgments(const std::filesystem::path& path, const IndexSet* indexes = nullptr);
RecallJudgments parse_judgments(std::string_view json_text, const IndexSet* indexes = nullptr);

/// True iff one of the first min(k, size) ranked chunks is relevant.
bool recall_at_k(const std::vector<std::string>& ranked_chunk_ids, const std::set<std::string>& relevant,
                 std::size_t k);
bool recall_at_k(const RetrievalResult& result, const std::set<std::string>& relevant, std::size_t k);

struct RecallSummary {
  std::size_t k = 0;
  std::size_t judged = 0;
  std::size_t found = 0;
  /// Questions with retrievals but no judgments.
  std::size_t skipped = 0;
  double percentage = 0.0;
};

RecallSummary summarize_recall(const std::map<std::string, std::vector<std::string>>& rankings,
                               const RecallJudgments& judgments, std::size_t k);

/// 0.0/1.0, 0.2/0.8, ... 1.0/0.0.
std::vector<ScoreWeights> default_weight_grid();

struct WeightSweepRow {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  /// qid -> selected option id.
  std::map<std::string, std::string> selections;
};

/// Rescores cached responses (qid -> generation) at each grid point without
/// calling the generator. Signals are computed once per question.
/// Questions lacking an answer or a cached response are left out.
std::vector<WeightSweepRow> sweep_weights(const std::vector<Question>& questions,
                                          const std::vector<ScoreWeights>& grid,
                                          const std::map<std::string, std::string>& responses,
                                          Embedder& embedder);

struct TopkSweepRow {
  std::size_t chunk_size = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  double accuracy = 0.0;
  /// Questions whose prompt exceeded the budget before dropping.
  std::size_t overflow_questions = 0;
};

/// Full grid over chunk sizes (one index each) and k values.
std::vector<TopkSweepRow> sweep_topk(const std::vector<Question>& questions,
                                     const std::vector<std::size_t>& k_values,
                                     const std::map<std::size_t, const IndexSet*>& indexes_by_chunk_size,
                                     const Glossary& glossary, const EvalConfig& base, Backends backends);

std::string topk_sweep_csv(const std::vector<TopkSweepRow>& rows);
std::string weight_sweep_csv(const std::vector<WeightSweepRow>& rows);

struct BreakdownRow {
  std::string label;
  std::size_t dataset_count = 0;
  std::size_t error_count = 0;
  double dataset_pct = 0.0;
  double error_pct = 0.0;
  /// (error% - dataset%) / dataset% * 100; absent when the error set is
  /// empty or the label has no dataset questions.
  std::optional<double> relative_change_pct;
};

struct BreakdownTable {
  std::string title;
  std::vector<BreakdownRow> rows;
};

/// Percentages from raw counts. The relative change uses unrounded
/// percentages.
BreakdownTable breakdown_from_counts(std::string title, const std::vector<std::string>& labels,
                                     const std::vector<std::size_t>& dataset_counts,
                                     const std::vector<std::size_t>& error_counts);

struct ErrorBreakdown {
  BreakdownTable by_category;
  std::optional<BreakdownTable> by_recall;
};

/// Dataset vs error-set distribution per category, and, with judgments,
/// per binary recall bucket {0, 1} over the judged questions using the
/// report's retrieved chunks cut at `k`.
ErrorBreakdown error_breakdown(const EvalReport& report, const std::vector<Question>& questions,
                               const RecallJudgments* judgments = nullptr, std::size_t k = kMcqDefaultK);

std::string breakdown_csv(const BreakdownTable& table);

enum class EntailmentLabel { entail, neutral, contradict };

struct EntailmentPair {
  std::string premise;
  std::string hypothesis;
  EntailmentLabel label = EntailmentLabel::neutral;
};

/// entail -> 1, neutral -> 0, contradict -> -1.
double entailment_target(EntailmentLabel label);
EntailmentLabel parse_entailment_label(std::string_view s);

/// JSON-Lines {premise, hypothesis, label}.
std::vector<EntailmentPair> load_entailment_pairs(const std::filesystem::path& path);

/// mean |cosine(premise, hypothesis) - target|. Throws ConfigError for an
/// empty list.
double mae_entailment(const std::vector<EntailmentPair>& pairs, Embedder& embedder);

// Report serialization. Wall-clock timings are kept out of the report JSON
// so that replayed runs produce identical bytes; they go to a sidecar.
nlohmann::ordered_json config_to_json(const EvalConfig& config);
nlohmann::ordered_json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
nlohmann::ordered_json timings_to_json(const StageTimes& times);
/// Writes `path` and `<path>.timing.json`.
void write_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport read_report(const std::filesystem::path& path);

}  // namespace telequery
