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

#include "telequery/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"
#include "telequery/error.hpp"
#include "telequery/text.hpp"

namespace telequery {

void ScoreWeights::validate() const {
  if (alpha1 < 0.0 || alpha1 > 1.0 || alpha2 < 0.0 || alpha2 > 1.0) {
    throw ConfigError("score weights must lie in [0, 1]");
  }
  if (std::abs(alpha1 + alpha2 - 1.0) > 1e-9) throw ConfigError("score weights must sum to 1");
}

ScoreWeights ScoreWeights::parse(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) throw ConfigError("weights must look like '0.2,0.8'");
  ScoreWeights w;
  try {
    w.alpha1 = std::stod(trim(text.substr(0, comma)));
    w.alpha2 = std::stod(trim(text.substr(comma + 1)));
  } catch (const std::exception&) {
    throw ConfigError("weights must look like '0.2,0.8', got '" + std::string(text) + "'");
  }
  w.validate();
  return w;
}

std::vector<std::map<std::string, double>> tfidf_weights(
    const std::vector<std::vector<std::string>>& documents) {
  std::map<std::string, std::size_t> df;
  std::vector<std::map<std::string, double>> tf(documents.size());
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (const auto& t : documents[d]) tf[d][t] += 1.0;
    for (const auto& [t, _] : tf[d]) ++df[t];
  }
  const double n = static_cast<double>(documents.size());
  for (auto& doc : tf) {
    for (auto& [t, w] : doc) w *= std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
  }
  return tf;
}

std::vector<double> overlap_score(std::string_view response, const std::vector<Option>& options) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(options.size() + 1);
  docs.push_back(folded_tokens(response));
  for (const auto& o : options) docs.push_back(folded_tokens(o.text));
  const auto weights = tfidf_weights(docs);

  const auto& resp = weights.front();
  std::vector<double> scores(options.size(), 0.0);
  for (std::size_t i = 0; i < options.size(); ++i) {
    for (const auto& [t, w] : weights[i + 1]) {
      const auto it = resp.find(t);
      if (it != resp.end()) scores[i] += w * it->second;
    }
  }
  return scores;
}

std::vector<double> normalize_overlap(std::span<const double> raw) {
  double best = 0.0;
  for (double v : raw) best = std::max(best, v);
  std::vector<double> out(raw.size(), 0.0);
  if (best > 0.0) {
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / best;
  }
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ConfigError("cosine: dimension mismatch " + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  }
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw ConfigError("cosine similarity of a zero vector is undefined");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

std::vector<ScoredOption> score_signals(std::string_view response, const std::vector<Option>& options,
                                        Embedder& embedder, std::string_view qid) {
  const auto raw = overlap_score(response, options);
  const auto norm = normalize_overlap(raw);
  std::vector<ScoredOption> scored(options.size());
  for (std::size_t i = 0; i < options.size(); ++i) {
    scored[i].option_id = options[i].id;
    scored[i].overlap_raw = raw[i];
    scored[i].overlap_norm = norm[i];
  }
  if (count_tokens(response) == 0) return scored;

  std::vector<std::string> texts;
  texts.emplace_back(response);
  for (const auto& o : options) texts.push_back(o.text);
  std::vector<EmbeddingResult> emb;
  try {
    emb = embedder.embed(texts, EmbeddingMode::sequence);
  } catch (const Error& e) {
    throw GatewayError("question '" + std::string(qid) + "': " + e.what());
  }
  if (emb.size() != texts.size()) {
    throw ProtocolError("question '" + std::string(qid) + "': expected " + std::to_string(texts.size()) +
                        " embeddings, got " + std::to_string(emb.size()));
  }
  for (const auto& e : emb) {
    if (e.vectors.size() != 1) {
      throw ProtocolError("question '" + std::string(qid) + "': sequence embedding must hold one vector");
    }
  }
  const auto& r = emb.front().vectors.front();
  for (std::size_t i = 0; i < options.size(); ++i) {
    scored[i].cosine = cosine_similarity(r, emb[i + 1].vectors.front());
  }
  return scored;
}

void apply_weights(std::span<ScoredOption> scored, double alpha1, double alpha2) {
  for (auto& s : scored) s.ensemble = alpha1 * s.overlap_norm + alpha2 * s.cosine;
}

std::vector<ScoredOption> ensemble_score(std::string_view response, const std::vector<Option>& options,
                                         const ScoreWeights& weights, Embedder& embedder,
                                         std::string_view qid) {
  weights.validate();
  auto scored = score_signals(response, options, embedder, qid);
  apply_weights(scored, weights.alpha1, weights.alpha2);
  return scored;
}

std::string select_option(std::span<const ScoredOption> scored) {
  if (scored.empty()) throw ConfigError("select_option needs at least one option");
  const ScoredOption* best = &scored.front();
  for (const auto& s : scored.subspan(1)) {
    if (s.ensemble > best->ensemble ||
        (s.ensemble == best->ensemble && option_id_less(s.option_id, best->option_id))) {
      best = &s;
    }
  }
  return best->option_id;
}

namespace {

// Uniform draw in [0, n) by rejection sampling.
std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

bool has_text(const std::optional<std::string>& s) { return s && !trim(*s).empty(); }

}  // namespace

TripletSet build_triplets(const std::vector<Question>& questions, std::uint64_t seed) {
  TripletSet out;
  std::mt19937_64 rng(seed);
  for (const auto& q : questions) {
    const Option* correct = q.answer ? q.find_option(*q.answer) : nullptr;
    if (!has_text(q.explanation) || correct == nullptr) {
      ++out.skipped;
      continue;
    }
    std::vector<const Option*> wrong;
    for (const auto& o : q.options) {
      if (o.id != correct->id && o.text != correct->text) wrong.push_back(&o);
    }
    if (wrong.empty()) {
      ++out.skipped;
      continue;
    }
    const Option* negative = wrong[draw_index(rng, wrong.size())];
    out.triplets.push_back(Triplet{q.qid, *q.explanation, correct->text, negative->text});
  }
  return out;
}

void write_triplets_jsonl(const std::vector<Triplet>& triplets, std::ostream& out) {
  for (const auto& t : triplets) {
    nlohmann::ordered_json rec;
    rec["qid"] = t.qid;
    rec["anchor"] = t.anchor;
    rec["positive"] = t.positive;
    rec["negative"] = t.negative;
    out << rec.dump() << '\n';
  }
}

std::string sft_target(const Question& q) {
  return "Answer: option " + q.answer.value_or("") + "\nExplanation: " + q.explanation.value_or("");
}

SftSet build_sft_records(const std::vector<Question>& questions,
                         const std::map<std::string, std::vector<ContextChunk>>& contexts,
                         const Glossary& glossary, const PromptTemplate& tmpl) {
  SftSet out;
  for (const auto& q : questions) {
    if (!q.answer || !has_text(q.explanation)) {
      ++out.skipped;
      continue;
    }
    PromptInput input;
    input.question = q.stem;
    input.options = q.options;
    if (const auto it = contexts.find(q.qid); it != contexts.end()) input.context = it->second;
    input.expansions = expand_query(q.stem, q.option_texts(), glossary);
    out.records.push_back(SftRecord{q.qid, build_prompt_mcq(input, tmpl).text, sft_target(q)});
  }
  return out;
}

void write_sft_jsonl(const std::vector<SftRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    nlohmann::ordered_json rec;
    rec["qid"] = r.qid;
    rec["prompt"] = r.prompt;
    rec["target"] = r.target;
    out << rec.dump() << '\n';
  }
}

}  // namespace telequery
