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

#include <fstream>
#include <sstream>

#include "telequery/error.hpp"
#include "telequery/harness.hpp"

namespace telequery {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json optional_string(const std::optional<std::string>& s) {
  return s ? ordered_json(*s) : ordered_json(nullptr);
}

std::optional<std::string> read_optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

PromptMode parse_pipeline(const std::string& s) {
  if (s == "mcq") return PromptMode::mcq;
  if (s == "open") return PromptMode::open;
  throw DataError("unknown pipeline '" + s + "'");
}

}  // namespace

ordered_json config_to_json(const EvalConfig& config) {
  ordered_json j;
  j["pipeline"] = std::string(to_string(config.pipeline));
  j["k"] = config.k;
  j["retrieval"] = std::string(to_string(config.retrieval));
  j["dense_share"] = config.retrieval_options.dense_share;
  j["expand_retrieval_query"] = config.expand_retrieval_query;
  j["alpha1"] = config.weights.alpha1;
  j["alpha2"] = config.weights.alpha2;
  j["max_tokens"] = config.budget.max_tokens;
  j["tokens_per_word"] = config.budget.tokens_per_word;
  j["drop_chunks"] = config.budget.drop_chunks;
  j["max_new_tokens"] = config.max_new_tokens;
  j["parse_retries"] = config.parse_retries;
  ordered_json labels = ordered_json::object();
  for (const auto& [k, v] : config.labels) labels[k] = v;
  j["labels"] = labels;
  return j;
}

ordered_json report_to_json(const EvalReport& report) {
  ordered_json j;
  j["config"] = config_to_json(report.config);
  j["backends"] = report.backends;
  j["total_questions"] = report.total_questions;
  j["n"] = report.n;
  j["correct"] = report.correct;
  j["accuracy"] = report.accuracy;
  j["complete"] = report.complete;
  j["error"] = report.error;
  ordered_json rows = ordered_json::array();
  for (const auto& o : report.per_question) {
    ordered_json r;
    r["qid"] = o.qid;
    r["predicted"] = optional_string(o.predicted);
    r["expected"] = optional_string(o.expected);
    r["correct"] = o.correct;
    r["parse_failed"] = o.parse_failed;
    r["retrieved"] = o.retrieved_chunk_ids;
    r["dropped_chunks"] = o.dropped_chunks;
    r["prompt_overflow"] = o.prompt_overflow;
    r["prompt_hash"] = o.prompt_hash;
    r["response"] = o.response;
    if (report.config.pipeline == PromptMode::open) {
      ordered_json scored = ordered_json::array();
      for (const auto& s : o.scored) {
        scored.push_back({{"option", s.option_id},
                          {"overlap_raw", s.overlap_raw},
                          {"overlap_norm", s.overlap_norm},
                          {"cosine", s.cosine},
                          {"ensemble", s.ensemble}});
      }
      r["scores"] = scored;
    }
    rows.push_back(std::move(r));
  }
  j["per_question"] = rows;
  return j;
}

EvalReport report_from_json(const json& j) {
  try {
    EvalReport report;
    const auto& c = j.at("config");
    report.config.pipeline = parse_pipeline(c.at("pipeline").get<std::string>());
    report.config.k = c.at("k").get<std::size_t>();
    report.config.retrieval = parse_retriever_kind(c.at("retrieval").get<std::string>());
    report.config.retrieval_options.dense_share = c.at("dense_share").get<double>();
    report.config.expand_retrieval_query = c.at("expand_retrieval_query").get<bool>();
    report.config.weights.alpha1 = c.at("alpha1").get<double>();
    report.config.weights.alpha2 = c.at("alpha2").get<double>();
    report.config.budget.max_tokens = c.at("max_tokens").get<std::size_t>();
    report.config.budget.tokens_per_word = c.at("tokens_per_word").get<double>();
    report.config.budget.drop_chunks = c.at("drop_chunks").get<bool>();
    report.config.max_new_tokens = c.at("max_new_tokens").get<std::size_t>();
    report.config.parse_retries = c.value("parse_retries", std::size_t{0});
    report.config.labels = c.at("labels").get<std::map<std::string, std::string>>();
    report.backends = j.at("backends").get<std::vector<std::string>>();
    report.total_questions = j.at("total_questions").get<std::size_t>();
    report.n = j.at("n").get<std::size_t>();
    report.correct = j.at("correct").get<std::size_t>();
    report.accuracy = j.at("accuracy").get<double>();
    report.complete = j.at("complete").get<bool>();
    report.error = j.at("error").get<std::string>();
    for (const auto& r : j.at("per_question")) {
      QuestionOutcome o;
      o.qid = r.at("qid").get<std::string>();
      o.predicted = read_optional_string(r, "predicted");
      o.expected = read_optional_string(r, "expected");
      o.correct = r.at("correct").get<bool>();
      o.parse_failed = r.at("parse_failed").get<bool>();
      o.retrieved_chunk_ids = r.at("retrieved").get<std::vector<std::string>>();
      o.dropped_chunks = r.at("dropped_chunks").get<std::size_t>();
      o.prompt_overflow = r.at("prompt_overflow").get<bool>();
      o.prompt_hash = r.at("prompt_hash").get<std::string>();
      o.response = r.at("response").get<std::string>();
      if (r.contains("scores")) {
        for (const auto& s : r.at("scores")) {
          o.scored.push_back({s.at("option").get<std::string>(), s.at("overlap_raw").get<double>(),
                              s.at("overlap_norm").get<double>(), s.at("cosine").get<double>(),
                              s.at("ensemble").get<double>()});
        }
      }
      report.per_question.push_back(std::move(o));
    }
    return report;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

ordered_json timings_to_json(const StageTimes& times) {
  ordered_json j;
  j["retrieval_s"] = times.retrieval;
  j["prompt_s"] = times.prompt;
  j["generation_s"] = times.generation;
  j["scoring_s"] = times.scoring;
  return j;
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write report: " + path.string());
    out << report_to_json(report).dump(2) << "\n";
  }
  auto timing_path = path;
  timing_path += ".timing.json";
  std::ofstream out(timing_path, std::ios::binary);
  if (!out) throw DataError("cannot write timings: " + timing_path.string());
  out << timings_to_json(report.wall_clock).dump(2) << "\n";
}

EvalReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read report: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

}  // namespace telequery
