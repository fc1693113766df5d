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

#include "telequery/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "telequery/error.hpp"
#include "telequery/hashing.hpp"
#include "telequery/log.hpp"
#include "telequery/text.hpp"

namespace telequery {

std::string retrieval_query(const Question& q, const Glossary& glossary, bool expand) {
  std::string query = q.stem;
  if (expand) {
    for (const auto& line : expand_query(q.stem, q.option_texts(), glossary)) query += "\n" + line;
  }
  return query;
}

EvalConfig EvalConfig::mcq_defaults() { return EvalConfig{}; }

EvalConfig EvalConfig::open_defaults() {
  EvalConfig c;
  c.pipeline = PromptMode::open;
  c.k = kOpenDefaultK;
  c.max_new_tokens = kOpenMaxNewTokens;
  return c;
}

std::optional<std::string> ResponseCache::find(const std::string& qid, const std::string& prompt_hash) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find({qid, prompt_hash});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(const std::string& qid, const std::string& prompt_hash, std::string response) {
  std::lock_guard lock(mutex_);
  entries_[{qid, prompt_hash}] = std::move(response);
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct TimedOutcome {
  QuestionOutcome outcome;
  StageTimes times;
};

class EvalRun {
 public:
  EvalRun(const IndexSet& indexes, const Glossary& glossary, const EvalConfig& config, Backends backends,
          const PromptTemplate& tmpl, ResponseCache* cache)
      : indexes_(indexes), glossary_(glossary), config_(config), backends_(backends), tmpl_(tmpl), cache_(cache) {
    if (config_.k < 1) throw ConfigError("k must be >= 1");
    if (backends_.generator == nullptr) throw ConfigError("evaluation needs a generation backend");
    if (config_.pipeline == PromptMode::open) {
      config_.weights.validate();
      if (backends_.embedder == nullptr) throw ConfigError("open evaluation needs an embedding backend");
    }
    for (const auto& c : indexes_.chunks) chunk_by_id_.emplace(c.chunk_id, &c);
  }

  TimedOutcome evaluate(const Question& q) const {
    TimedOutcome result;
    auto& out = result.outcome;
    out.qid = q.qid;
    out.expected = q.answer;

    auto t0 = Clock::now();
    const auto expansions = expand_query(q.stem, q.option_texts(), glossary_);
    const auto retrieved = retrieve_topk(retrieval_query(q, glossary_, config_.expand_retrieval_query), config_.k, config_.retrieval, indexes_, backends_.embedder,
                                         config_.retrieval_options);
    result.times.retrieval = seconds_since(t0);

    t0 = Clock::now();
    PromptInput input;
    input.question = q.stem;
    if (config_.pipeline == PromptMode::mcq) input.options = q.options;
    input.expansions = expansions;
    for (const auto& e : retrieved.entries) {
      const auto it = chunk_by_id_.find(e.chunk_id);
      if (it == chunk_by_id_.end()) throw IndexError("retrieved unknown chunk '" + e.chunk_id + "'");
      input.context.push_back({e.chunk_id, it->second->text});
    }
    const auto fitted = fit_to_budget(std::move(input), config_.pipeline, tmpl_, config_.budget);
    out.dropped_chunks = fitted.dropped_chunks;
    out.prompt_overflow = fitted.dropped_chunks > 0 || fitted.overflow;
    const auto kept = retrieved.entries.size() - fitted.dropped_chunks;
    for (std::size_t i = 0; i < kept; ++i) out.retrieved_chunk_ids.push_back(retrieved.entries[i].chunk_id);
    out.prompt_hash = sha256_hex(fitted.bundle.text);
    result.times.prompt = seconds_since(t0);

    t0 = Clock::now();
    std::optional<std::string> cached = cache_ ? cache_->find(q.qid, out.prompt_hash) : std::nullopt;
    if (cached) {
      out.response = *cached;
    } else {
      out.response = backends_.generator->generate(fitted.bundle.text, config_.max_new_tokens);
      if (cache_) cache_->put(q.qid, out.prompt_hash, out.response);
    }
    result.times.generation = seconds_since(t0);

    t0 = Clock::now();
    if (config_.pipeline == PromptMode::mcq) {
      const auto ids = q.option_ids();
      out.predicted = parse_mcq_answer(out.response, ids);
      for (std::size_t retry = 0; !out.predicted && retry < config_.parse_retries; ++retry) {
        out.response = backends_.generator->generate(fitted.bundle.text, config_.max_new_tokens);
        out.predicted = parse_mcq_answer(out.response, ids);
      }
      out.parse_failed = !out.predicted;
    } else {
      out.scored = ensemble_score(out.response, q.options, config_.weights, *backends_.embedder, q.qid);
      out.predicted = select_option(out.scored);
    }
    out.correct = out.predicted && q.answer && *out.predicted == *q.answer;
    result.times.scoring = seconds_since(t0);
    return result;
  }

 private:
  const IndexSet& indexes_;
  const Glossary& glossary_;
  EvalConfig config_;
  Backends backends_;
  const PromptTemplate& tmpl_;
  ResponseCache* cache_;
  std::unordered_map<std::string, const Chunk*> chunk_by_id_;
};

std::vector<std::string> backend_descriptions(const EvalConfig& config) {
  std::vector<std::string> out;
  for (const auto& [k, v] : config.labels) out.push_back(k + "=" + v);
  return out;
}

EvalReport run_eval(const std::vector<Question>& questions, const IndexSet& indexes, const Glossary& glossary,
                    const EvalConfig& config, Backends backends, const PromptTemplate& tmpl, ResponseCache* cache) {
  const EvalRun run(indexes, glossary, config, backends, tmpl, cache);

  EvalReport report;
  report.config = config;
  report.backends = backend_descriptions(config);
  report.total_questions = questions.size();

  std::vector<std::optional<TimedOutcome>> slots(questions.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::string first_error;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= questions.size()) return;
      try {
        slots[i] = run.evaluate(questions[i]);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!failed.exchange(true)) first_error = "question '" + questions[i].qid + "': " + e.what();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(config.max_concurrency, 1, std::max<std::size_t>(questions.size(), 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  for (auto& slot : slots) {
    if (!slot) continue;
    report.wall_clock.retrieval += slot->times.retrieval;
    report.wall_clock.prompt += slot->times.prompt;
    report.wall_clock.generation += slot->times.generation;
    report.wall_clock.scoring += slot->times.scoring;
    report.per_question.push_back(std::move(slot->outcome));
  }
  std::sort(report.per_question.begin(), report.per_question.end(),
            [](const QuestionOutcome& a, const QuestionOutcome& b) { return a.qid < b.qid; });
  report.n = report.per_question.size();
  report.correct = static_cast<std::size_t>(std::count_if(report.per_question.begin(), report.per_question.end(),
                                                          [](const QuestionOutcome& o) { return o.correct; }));
  report.accuracy = report.n == 0 ? 0.0 : static_cast<double>(report.correct) / static_cast<double>(report.n);
  if (failed) {
    report.complete = false;
    report.error = first_error;
    log(LogLevel::error, "evaluation aborted: " + first_error);
  }
  return report;
}

}  // namespace

EvalReport run_eval_mcq(const std::vector<Question>& questions, const IndexSet& indexes, const Glossary& glossary,
                        const EvalConfig& config, Backends backends, const PromptTemplate& tmpl,
                        ResponseCache* cache) {
  EvalConfig c = config;
  c.pipeline = PromptMode::mcq;
  return run_eval(questions, indexes, glossary, c, backends, tmpl, cache);
}

EvalReport run_eval_open(const std::vector<Question>& questions, const IndexSet& indexes, const Glossary& glossary,
                         const EvalConfig& config, Backends backends, const PromptTemplate& tmpl,
                         ResponseCache* cache) {
  EvalConfig c = config;
  c.pipeline = PromptMode::open;
  return run_eval(questions, indexes, glossary, c, backends, tmpl, cache);
}

// ---------------------------------------------------------------------------
// Recall

RecallJudgments parse_judgments(std::string_view json_text, const IndexSet* indexes) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("judgments file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw DataError("judgments must be a JSON object qid -> [chunk_id, ...]");
  std::set<std::string> known;
  if (indexes != nullptr) {
    for (const auto& c : indexes->chunks) known.insert(c.chunk_id);
  }
  RecallJudgments out;
  for (const auto& [qid, ids] : root.items()) {
    std::vector<std::string> relevant;
    if (ids.is_array()) {
      for (const auto& id : ids) {
        if (!id.is_string()) throw DataError("judgments for '" + qid + "' must list chunk ids");
        relevant.push_back(id.get<std::string>());
      }
    } else if (ids.is_object()) {
      // {chunk_id: bool}
      for (const auto& [chunk_id, flag] : ids.items()) {
        if (!flag.is_boolean()) throw DataError("judgment flags for '" + qid + "' must be booleans");
        if (indexes != nullptr && !known.contains(chunk_id)) {
          throw DataError("judged chunk '" + chunk_id + "' for '" + qid + "' is not in the index");
        }
        if (flag.get<bool>()) relevant.push_back(chunk_id);
      }
    } else {
      throw DataError("judgments for '" + qid + "' must be an array or an object");
    }
    auto& set = out[qid];
    for (auto& chunk_id : relevant) {
      if (indexes != nullptr && !known.contains(chunk_id)) {
        throw DataError("judged chunk '" + chunk_id + "' for '" + qid + "' is not in the index");
      }
      set.insert(std::move(chunk_id));
    }
  }
  return out;
}

RecallJudgments load_judgments(const std::filesystem::path& path, const IndexSet* indexes) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read judgments: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_judgments(ss.str(), indexes);
}

bool recall_at_k(const std::vector<std::string>& ranked, const std::set<std::string>& relevant, std::size_t k) {
  const std::size_t limit = std::min(k, ranked.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (relevant.contains(ranked[i])) return true;
  }
  return false;
}

bool recall_at_k(const RetrievalResult& result, const std::set<std::string>& relevant, std::size_t k) {
  return recall_at_k(result.chunk_ids(), relevant, k);
}

RecallSummary summarize_recall(const std::map<std::string, std::vector<std::string>>& rankings,
                               const RecallJudgments& judgments, std::size_t k) {
  RecallSummary s;
  s.k = k;
  for (const auto& [qid, ranked] : rankings) {
    const auto it = judgments.find(qid);
    if (it == judgments.end()) {
      ++s.skipped;
      continue;
    }
    ++s.judged;
    if (recall_at_k(ranked, it->second, k)) ++s.found;
  }
  if (s.skipped > 0) log_warning(std::to_string(s.skipped) + " question(s) without judgments skipped");
  s.percentage = s.judged == 0 ? 0.0 : 100.0 * static_cast<double>(s.found) / static_cast<double>(s.judged);
  return s;
}

// ---------------------------------------------------------------------------
// Sweeps

std::vector<ScoreWeights> default_weight_grid() {
  std::vector<ScoreWeights> grid;
  for (int i = 0; i <= 5; ++i) {
    const double a1 = i / 5.0;
    grid.push_back({a1, 1.0 - a1});
  }
  return grid;
}

std::vector<WeightSweepRow> sweep_weights(const std::vector<Question>& questions,
                                          const std::vector<ScoreWeights>& grid,
                                          const std::map<std::string, std::string>& responses,
                                          Embedder& embedder) {
  struct Prepared {
    const Question* question;
    std::vector<ScoredOption> signals;
  };
  std::vector<Prepared> prepared;
  for (const auto& q : questions) {
    const auto it = responses.find(q.qid);
    if (!q.answer || it == responses.end()) continue;
    prepared.push_back({&q, score_signals(it->second, q.options, embedder, q.qid)});
  }

  std::vector<WeightSweepRow> rows;
  for (const auto& w : grid) {
    w.validate();
    WeightSweepRow row;
    row.alpha1 = w.alpha1;
    row.alpha2 = w.alpha2;
    row.n = prepared.size();
    for (auto& p : prepared) {
      apply_weights(p.signals, w.alpha1, w.alpha2);
      const auto chosen = select_option(p.signals);
      if (chosen == *p.question->answer) ++row.correct;
      row.selections[p.question->qid] = chosen;
    }
    row.accuracy = row.n == 0 ? 0.0 : static_cast<double>(row.correct) / static_cast<double>(row.n);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<TopkSweepRow> sweep_topk(const std::vector<Question>& questions, const std::vector<std::size_t>& k_values,
                                     const std::map<std::size_t, const IndexSet*>& indexes_by_chunk_size,
                                     const Glossary& glossary, const EvalConfig& base, Backends backends) {
  std::vector<TopkSweepRow> rows;
  for (const auto& [chunk_size, indexes] : indexes_by_chunk_size) {
    for (const std::size_t k : k_values) {
      EvalConfig config = base;
      config.k = k;
      const auto report =
          base.pipeline == PromptMode::mcq
              ? run_eval_mcq(questions, *indexes, glossary, config, backends)
              : run_eval_open(questions, *indexes, glossary, config, backends);
      if (!report.complete) throw GatewayError("sweep point cs=" + std::to_string(chunk_size) +
                                               " k=" + std::to_string(k) + " aborted: " + report.error);
      TopkSweepRow row;
      row.chunk_size = chunk_size;
      row.k = k;
      row.n = report.n;
      row.accuracy = report.accuracy;
      for (const auto& o : report.per_question) row.overflow_questions += o.prompt_overflow ? 1 : 0;
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

std::string fmt_double(double v, int precision = 6) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(precision);
  ss << v;
  return ss.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string topk_sweep_csv(const std::vector<TopkSweepRow>& rows) {
  std::string out = "chunk_size,k,n,accuracy,overflow_questions\n";
  for (const auto& r : rows) {
    out += std::to_string(r.chunk_size) + "," + std::to_string(r.k) + "," + std::to_string(r.n) + "," +
           fmt_double(r.accuracy) + "," + std::to_string(r.overflow_questions) + "\n";
  }
  return out;
}

std::string weight_sweep_csv(const std::vector<WeightSweepRow>& rows) {
  std::string out = "alpha1,alpha2,n,correct,accuracy\n";
  for (const auto& r : rows) {
    out += fmt_double(r.alpha1, 2) + "," + fmt_double(r.alpha2, 2) + "," + std::to_string(r.n) + "," +
           std::to_string(r.correct) + "," + fmt_double(r.accuracy) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Error analysis

BreakdownTable breakdown_from_counts(std::string title, const std::vector<std::string>& labels,
                                     const std::vector<std::size_t>& dataset_counts,
                                     const std::vector<std::size_t>& error_counts) {
  if (labels.size() != dataset_counts.size() || labels.size() != error_counts.size()) {
    throw ConfigError("breakdown labels and counts differ in length");
  }
  std::size_t dataset_total = 0;
  std::size_t error_total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (error_counts[i] > dataset_counts[i]) {
      log_warning("error count exceeds dataset count for '" + labels[i] + "'");
    }
    dataset_total += dataset_counts[i];
    error_total += error_counts[i];
  }
  BreakdownTable table;
  table.title = std::move(title);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    BreakdownRow row;
    row.label = labels[i];
    row.dataset_count = dataset_counts[i];
    row.error_count = error_counts[i];
    row.dataset_pct = dataset_total == 0 ? 0.0 : 100.0 * static_cast<double>(dataset_counts[i]) / static_cast<double>(dataset_total);
    row.error_pct = error_total == 0 ? 0.0 : 100.0 * static_cast<double>(error_counts[i]) / static_cast<double>(error_total);
    if (error_total > 0 && row.dataset_pct > 0.0) {
      row.relative_change_pct = 100.0 * (row.error_pct - row.dataset_pct) / row.dataset_pct;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

ErrorBreakdown error_breakdown(const EvalReport& report, const std::vector<Question>& questions,
                               const RecallJudgments* judgments, std::size_t k) {
  if (!report.complete) throw ConfigError("error breakdown needs a complete report: " + report.error);
  std::map<std::string, const Question*> by_qid;
  for (const auto& q : questions) by_qid[q.qid] = &q;

  std::map<std::string, std::pair<std::size_t, std::size_t>> categories;
  std::size_t recall_dataset[2] = {0, 0};
  std::size_t recall_errors[2] = {0, 0};
  for (const auto& o : report.per_question) {
    const auto it = by_qid.find(o.qid);
    const std::string category =
        it != by_qid.end() && it->second->category ? *it->second->category : std::string("(uncategorized)");
    auto& [dataset, errors] = categories[category];
    ++dataset;
    if (!o.correct) ++errors;

    if (judgments != nullptr) {
      const auto j = judgments->find(o.qid);
      if (j == judgments->end()) continue;
      const int bucket = recall_at_k(o.retrieved_chunk_ids, j->second, k) ? 1 : 0;
      ++recall_dataset[bucket];
      if (!o.correct) ++recall_errors[bucket];
    }
  }

  ErrorBreakdown out;
  std::vector<std::string> labels;
  std::vector<std::size_t> dataset_counts;
  std::vector<std::size_t> error_counts;
  for (const auto& [label, counts] : categories) {
    labels.push_back(label);
    dataset_counts.push_back(counts.first);
    error_counts.push_back(counts.second);
  }
  out.by_category = breakdown_from_counts("category", labels, dataset_counts, error_counts);
  if (judgments != nullptr) {
    out.by_recall = breakdown_from_counts("binary_recall@" + std::to_string(k), {"0", "1"},
                                          {recall_dataset[0], recall_dataset[1]},
                                          {recall_errors[0], recall_errors[1]});
  }
  return out;
}

std::string breakdown_csv(const BreakdownTable& table) {
  std::string out = "label,dataset_count,error_count,dataset_pct,error_pct,relative_change_pct\n";
  for (const auto& r : table.rows) {
    out += csv_field(r.label) + "," + std::to_string(r.dataset_count) + "," + std::to_string(r.error_count) + "," +
           fmt_double(r.dataset_pct, 1) + "," + fmt_double(r.error_pct, 1) + "," +
           (r.relative_change_pct ? fmt_double(*r.relative_change_pct, 1) : std::string()) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Entailment MAE

double entailment_target(EntailmentLabel label) {
  switch (label) {
    case EntailmentLabel::entail:
      return 1.0;
    case EntailmentLabel::neutral:
      return 0.0;
    case EntailmentLabel::contradict:
      return -1.0;
  }
  return 0.0;
}

EntailmentLabel parse_entailment_label(std::string_view s) {
  if (s == "entail" || s == "entailment") return EntailmentLabel::entail;
  if (s == "neutral") return EntailmentLabel::neutral;
  if (s == "contradict" || s == "contradiction") return EntailmentLabel::contradict;
  throw DataError("unknown entailment label '" + std::string(s) + "'");
}

std::vector<EntailmentPair> load_entailment_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read entailment pairs: " + path.string());
  std::vector<EntailmentPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      pairs.push_back({rec.at("premise").get<std::string>(), rec.at("hypothesis").get<std::string>(),
                       parse_entailment_label(rec.at("label").get<std::string>())});
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

double mae_entailment(const std::vector<EntailmentPair>& pairs, Embedder& embedder) {
  if (pairs.empty()) throw ConfigError("mae_entailment needs at least one pair");
  std::vector<std::string> texts;
  texts.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    texts.push_back(p.premise);
    texts.push_back(p.hypothesis);
  }
  const auto emb = embedder.embed(texts, EmbeddingMode::sequence);
  if (emb.size() != texts.size()) throw ProtocolError("embedding count does not match pair count");
  double total = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double cos = cosine_similarity(emb[2 * i].vectors.at(0), emb[2 * i + 1].vectors.at(0));
    total += std::abs(cos - entailment_target(pairs[i].label));
  }
  return total / static_cast<double>(pairs.size());
}

}  // namespace telequery
