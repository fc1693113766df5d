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

// Acceptance suite. Prints one PASS/FAIL line per criterion.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "oracles.hpp"
#include "telequery/corpus.hpp"
#include "telequery/harness.hpp"
#include "telequery/log.hpp"
#include "telequery/retrieval.hpp"
#include "telequery/scoring.hpp"
#include "test_backends.hpp"

namespace telequery {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const fs::path kFixtures = fs::path(TELEQUERY_SOURCE_DIR) / "tests" / "fixtures";

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Option> as_options(const std::vector<std::string>& texts) {
  std::vector<Option> out;
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({std::to_string(i + 1), texts[i]});
  return out;
}

IndexSet index_of(const std::vector<std::string>& texts, Embedder* embedder, std::size_t chunk_size = 1000) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < texts.size(); ++i) docs.push_back({"d" + std::to_string(100 + i), "", texts[i]});
  IndexSet set;
  set.chunking = ChunkingConfig::with_size(chunk_size);
  set.chunks = chunk_corpus(docs, set.chunking);
  set.bm25 = build_bm25(set.chunks);
  if (embedder) set.dense = build_dense(set.chunks, *embedder);
  return set;
}

TEST(Acceptance, TfidfOverlapOracle) {
  const auto t0 = Clock::now();
  oracle::Random rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> options;
    for (std::size_t i = 0, n = rng.uniform(1, 5); i < n; ++i) options.push_back(rng.words(rng.uniform(1, 10), 8));
    const auto response = rng.words(rng.uniform(0, 10), 8);
    const auto expected = oracle::overlap(response, options);
    const auto got = overlap_score(response, as_options(options));
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_LE(oracle::relative_error(expected[i], got[i]), 1e-9) << "trial " << trial << " option " << i;
    }
  }
  EXPECT_LT(seconds_since(t0), 5.0);
}

TEST(Acceptance, Bm25Oracle) {
  oracle::Random rng(2025);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> texts;
    for (std::size_t i = 0, n = rng.uniform(1, 10); i < n; ++i) texts.push_back(rng.words(rng.uniform(1, 30), 10));
    const auto set = index_of(texts, nullptr);
    std::vector<std::vector<std::string>> docs;
    for (const auto& t : texts) docs.push_back(oracle::split_words(t));
    const auto query = oracle::split_words(rng.words(rng.uniform(1, 5), 14));
    const auto expected = oracle::bm25(docs, query);
    const auto got = bm25_score(*set.bm25, query);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const double g = got.contains(i) ? got.at(i) : 0.0;
      EXPECT_LE(oracle::relative_error(expected[i], g), 1e-9) << "trial " << trial << " chunk " << i;
    }
  }
}

TEST(Acceptance, MaxSimOracle) {
  oracle::Random rng(2026);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = trial % 2 == 0 ? 8 : 64;
    DenseIndex index;
    index.dim = dim;
    index.embedder_id = "random";
    index.add_chunk("c#0", rng.unit_rows(rng.uniform(1, 40), dim));
    oracle::Matrix stored;
    for (std::size_t r = 0; r < index.rows(0); ++r) {
      const auto row = index.row(r);
      stored.emplace_back(row.begin(), row.end());
    }
    const auto query = rng.unit_rows(rng.uniform(1, 12), dim);
    const double expected = oracle::maxsim(query, stored);
    const double got = maxsim_score(index, 0, query);
    EXPECT_NEAR(got, expected, 1e-9) << "trial " << trial;
    EXPECT_LE(got, static_cast<double>(query.size()));
  }
}

TEST(Acceptance, EnsembleArgmaxInvariance) {
  oracle::Random rng(2027);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredOption> base;
    for (std::size_t i = 0, n = rng.uniform(2, 5); i < n; ++i) {
      ScoredOption s;
      s.option_id = std::to_string(i + 1);
      s.overlap_norm = rng.uniform(0, 3) == 0 ? 1.0 : rng.real(0.0, 1.0);
      s.cosine = rng.real(-1.0, 1.0);
      base.push_back(s);
    }
    const double a1 = rng.real(0.0, 1.0);
    const double a2 = rng.real(0.0, 1.0);
    auto scored = base;
    apply_weights(scored, a1, a2);
    const auto reference = select_option(scored);
    for (double c : {0.5, 2.0, 10.0}) {
      auto scaled = base;
      apply_weights(scaled, c * a1, c * a2);
      EXPECT_EQ(select_option(scaled), reference) << "trial " << trial << " c=" << c;
    }
  }
}

TEST(Acceptance, WeightSweepStructure) {
  oracle::Random rng(2028);
  testing::StubEmbedder emb(64);
  std::vector<Question> questions;
  std::map<std::string, std::string> responses;
  for (int i = 0; i < 40; ++i) {
    Question q;
    q.qid = "q" + std::to_string(100 + i);
    q.stem = "stem";
    std::vector<std::string> texts;
    for (std::size_t o = 0, n = rng.uniform(2, 5); o < n; ++o) texts.push_back(rng.words(rng.uniform(1, 6), 10));
    q.options = as_options(texts);
    q.answer = std::to_string(rng.uniform(1, texts.size()));
    responses[q.qid] = rng.words(rng.uniform(1, 10), 10);
    questions.push_back(q);
  }
  const auto rows = sweep_weights(questions, default_weight_grid(), responses, emb);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows.front().alpha1, 0.0);
  EXPECT_EQ(rows.front().alpha2, 1.0);
  EXPECT_EQ(rows.back().alpha1, 1.0);
  EXPECT_EQ(rows.back().alpha2, 0.0);
  for (const auto& q : questions) {
    const auto signals = score_signals(responses.at(q.qid), q.options, emb);
    std::vector<std::pair<std::string, double>> cos;
    std::vector<std::pair<std::string, double>> ovl;
    for (const auto& s : signals) {
      cos.emplace_back(s.option_id, s.cosine);
      ovl.emplace_back(s.option_id, s.overlap_norm);
    }
    EXPECT_EQ(rows.front().selections.at(q.qid), oracle::rank(cos).front()) << q.qid;
    EXPECT_EQ(rows.back().selections.at(q.qid), oracle::rank(ovl).front()) << q.qid;
  }
}

TEST(Acceptance, ChunkerReconstruction) {
  oracle::Random rng(2029);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = rng.uniform(1, 10000);
    std::string body;
    for (std::size_t i = 0; i < n; ++i) {
      body += rng.word(500);
      body += rng.uniform(0, 9) == 0 ? ".\n" : " ";
    }
    const Document doc{"doc" + std::to_string(trial), "", body};
    const auto stream = tokenize(body);
    ASSERT_EQ(stream.size(), n);
    for (std::size_t cs : {100, 150, 200}) {
      const auto chunks = chunk_document(doc, ChunkingConfig::with_size(cs));
      std::vector<Token> flat;
      for (const auto& c : chunks) flat.insert(flat.end(), c.tokens.begin(), c.tokens.end());
      EXPECT_EQ(flat, stream) << "trial " << trial << " cs " << cs;
      const std::size_t closed_form = n <= cs ? 1 : (n - cs + cs - 1) / cs + 1;
      EXPECT_EQ(chunks.size(), closed_form) << "trial " << trial << " cs " << cs;
      EXPECT_EQ(chunks.size(), oracle::window_starts(n, cs, cs).size());
    }
  }
}

TEST(Acceptance, RecallMonotonicAndExact) {
  oracle::Random rng(2030);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> ranked;
    for (int i = 0; i < 30; ++i) ranked.push_back("c" + std::to_string(i));
    std::shuffle(ranked.begin(), ranked.end(), rng.engine());
    std::set<std::string> relevant;
    for (std::size_t i = 0, n = rng.uniform(0, 4); i < n; ++i) relevant.insert("c" + std::to_string(rng.uniform(0, 35)));
    for (std::size_t k = 1; k <= 30; ++k) {
      if (!recall_at_k(ranked, relevant, k)) continue;
      for (std::size_t k2 = k + 1; k2 <= 32; ++k2) EXPECT_TRUE(recall_at_k(ranked, relevant, k2));
    }
  }

  const auto questions = load_questions(kFixtures / "e2e" / "questions.json");
  const auto docs = load_corpus(kFixtures / "e2e" / "corpus");
  IndexSet set;
  set.chunking = ChunkingConfig::with_size(30);
  set.chunks = chunk_corpus(docs, set.chunking);
  set.bm25 = build_bm25(set.chunks);
  const auto judgments = load_judgments(kFixtures / "e2e" / "judgments.json", &set);
  std::map<std::string, std::vector<std::string>> rankings;
  for (const auto& q : questions) {
    rankings[q.qid] = retrieve_topk(q.stem, set.chunks.size(), RetrieverKind::bm25, set).chunk_ids();
  }
  for (std::size_t k : {1, 2, 3, 5, 13}) {
    std::size_t found = 0;
    for (const auto& q : questions) {
      const auto& r = rankings.at(q.qid);
      const auto& rel = judgments.at(q.qid);
      for (std::size_t i = 0; i < k && i < r.size(); ++i) {
        if (rel.contains(r[i])) {
          ++found;
          break;
        }
      }
    }
    const auto s = summarize_recall(rankings, judgments, k);
    EXPECT_EQ(s.judged, questions.size());
    EXPECT_EQ(s.found, found) << "k=" << k;
    EXPECT_EQ(s.percentage, 100.0 * static_cast<double>(found) / static_cast<double>(questions.size()));
  }
}

TEST(Acceptance, BreakdownArithmetic) {
  auto old = set_log_sink([](LogLevel, std::string_view) {});
  const auto cat = breakdown_from_counts("category", {"Lexicon", "Standards specifications"}, {63, 303}, {9, 65});
  const auto rec = breakdown_from_counts("binary recall", {"0", "1"}, {24, 98}, {37, 37});
  set_log_sink(old);
  const double expected_cat[2][3] = {{17.2, 12.2, -29.3}, {82.8, 87.8, 6.1}};
  const double expected_rec[2][3] = {{19.7, 50.0, 154.2}, {80.3, 50.0, -37.8}};
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(cat.rows[i].dataset_pct, expected_cat[i][0], 0.1);
    EXPECT_NEAR(cat.rows[i].error_pct, expected_cat[i][1], 0.1);
    ASSERT_TRUE(cat.rows[i].relative_change_pct.has_value());
    EXPECT_NEAR(*cat.rows[i].relative_change_pct, expected_cat[i][2], 0.1);
    EXPECT_NEAR(rec.rows[i].dataset_pct, expected_rec[i][0], 0.1);
    EXPECT_NEAR(rec.rows[i].error_pct, expected_rec[i][1], 0.1);
    ASSERT_TRUE(rec.rows[i].relative_change_pct.has_value());
    EXPECT_NEAR(*rec.rows[i].relative_change_pct, expected_rec[i][2], 0.1);
  }
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + TELEQUERY_CLI + "' " + args + " > /dev/null";
  return std::system(cmd.c_str());
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

TEST(Acceptance, EndToEndOffline) {
  const auto t0 = Clock::now();
  testing::TempDir dir;
  const auto e2e = kFixtures / "e2e";
  ::setenv(kCassetteEnvVar, (e2e / "cassette.jsonl").c_str(), 1);
  ::unsetenv("TELEQUERY_GEN_URL");
  ::unsetenv("TELEQUERY_EMBED_URL");
  const auto index = dir / "index";
  const std::string data = " --index " + q(index) + " --questions " + q(e2e / "questions.json");
  ASSERT_EQ(run_cli("index build --chunk-size 30 --corpus " + q(e2e / "corpus") + " --out " + q(index)), 0);
  ASSERT_EQ(run_cli("recall --k 3" + data + " --judgments " + q(e2e / "judgments.json") + " --out " +
                    q(dir / "recall.json")),
            0);
  for (const char* run : {"1", "2"}) {
    ASSERT_EQ(run_cli("eval mcq" + data + " --report " + q(dir / ("mcq" + std::string(run) + ".json"))), 0);
    ASSERT_EQ(run_cli("eval open" + data + " --report " + q(dir / ("open" + std::string(run) + ".json"))), 0);
  }
  ::unsetenv(kCassetteEnvVar);

  const auto recall = nlohmann::json::parse(slurp(dir / "recall.json"));
  EXPECT_EQ(recall.at("summary")[0].at("k"), 3);
  EXPECT_EQ(recall.at("summary")[0].at("judged"), 10);
  EXPECT_EQ(recall.at("summary")[0].at("recall_pct"), 100.0);

  for (const char* mode : {"mcq", "open"}) {
    const auto first = slurp(dir / (std::string(mode) + "1.json"));
    EXPECT_EQ(first, slurp(dir / (std::string(mode) + "2.json"))) << mode;
    const auto report = read_report(dir / (std::string(mode) + "1.json"));
    EXPECT_TRUE(report.complete) << mode;
    EXPECT_EQ(report.n, 10u) << mode;
    EXPECT_EQ(report.accuracy, 1.0) << mode;
  }
  EXPECT_LT(seconds_since(t0), 30.0);
}

TEST(Acceptance, IndexPersistence) {
  oracle::Random rng(2031);
  testing::StubEmbedder emb(32);
  std::vector<std::string> texts;
  for (int i = 0; i < 12; ++i) texts.push_back(rng.words(rng.uniform(20, 120), 60));
  const auto set = index_of(texts, &emb, 40);
  testing::TempDir dir;
  save_index(set, dir.path());
  const auto loaded = load_index(dir.path());
  const RetrieverKind kinds[] = {RetrieverKind::bm25, RetrieverKind::dense, RetrieverKind::ensemble};
  for (int i = 0; i < 20; ++i) {
    const auto query = rng.words(rng.uniform(1, 8), 60);
    const auto kind = kinds[i % 3];
    const std::size_t k = rng.uniform(1, 10);
    const auto before = retrieve_topk(query, k, kind, set, &emb);
    const auto after = retrieve_topk(query, k, kind, loaded, &emb);
    ASSERT_EQ(before.entries.size(), after.entries.size()) << "query " << i;
    for (std::size_t j = 0; j < before.entries.size(); ++j) {
      EXPECT_EQ(before.entries[j].chunk_id, after.entries[j].chunk_id) << "query " << i << " rank " << j;
      EXPECT_NEAR(before.entries[j].score, after.entries[j].score, 1e-12) << "query " << i << " rank " << j;
      EXPECT_EQ(before.entries[j].retriever, after.entries[j].retriever);
    }
  }
}

TEST(Acceptance, TripletAndSftBuilders) {
  const auto questions = load_questions(kFixtures / "dataset" / "questions.json");
  ASSERT_EQ(questions.size(), 20u);
  const auto set = build_triplets(questions, 17);
  EXPECT_EQ(set.triplets.size() + set.skipped, questions.size());
  EXPECT_GT(set.triplets.size(), 0u);
  std::map<std::string, const Question*> by_qid;
  for (const auto& qu : questions) by_qid[qu.qid] = &qu;
  for (const auto& t : set.triplets) {
    const auto& qu = *by_qid.at(t.qid);
    EXPECT_EQ(t.anchor, *qu.explanation);
    EXPECT_EQ(t.positive, qu.find_option(*qu.answer)->text);
    EXPECT_NE(t.negative, t.positive);
    const auto texts = qu.option_texts();
    EXPECT_NE(std::find(texts.begin(), texts.end(), t.negative), texts.end());
  }
  std::ostringstream a;
  std::ostringstream b;
  write_triplets_jsonl(set.triplets, a);
  write_triplets_jsonl(build_triplets(questions, 17).triplets, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_FALSE(a.str().empty());

  const auto sft = build_sft_records(questions, {}, Glossary{});
  EXPECT_EQ(sft.records.size() + sft.skipped, questions.size());
  for (const auto& r : sft.records) {
    EXPECT_TRUE(r.target.starts_with("Answer: option " + *by_qid.at(r.qid)->answer)) << r.qid;
  }
  std::ostringstream s1;
  std::ostringstream s2;
  write_sft_jsonl(sft.records, s1);
  write_sft_jsonl(build_sft_records(questions, {}, Glossary{}).records, s2);
  EXPECT_EQ(s1.str(), s2.str());
}

class CriterionPrinter : public ::testing::EmptyTestEventListener {
  void OnTestEnd(const ::testing::TestInfo& info) override {
    std::cout << (info.result()->Passed() ? "PASS " : "FAIL ") << info.name() << std::endl;
  }
};

}  // namespace
}  // namespace telequery

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(new telequery::CriterionPrinter);
  return RUN_ALL_TESTS();
}
