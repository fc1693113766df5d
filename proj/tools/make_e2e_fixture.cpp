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

// Writes the offline end-to-end fixture: a small corpus, questions,
// recall judgments and a cassette recorded against the stub backend.
//
//   make_e2e_fixture <fixtures-dir>
//
// Produces <dir>/e2e/{corpus/,questions.json,judgments.json,cassette.jsonl}
// and <dir>/dataset/questions.json.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "telequery/corpus.hpp"
#include "telequery/error.hpp"
#include "telequery/gateway.hpp"
#include "telequery/glossary.hpp"
#include "telequery/harness.hpp"
#include "telequery/stub_backend.hpp"

namespace fs = std::filesystem;
using namespace telequery;

namespace {

constexpr std::size_t kChunkSize = 30;
constexpr std::size_t kDim = 64;

struct Fact {
  std::string doc;
  std::string sentence;
  std::string stem;
  std::string answer;
  std::vector<std::string> distractors;
  std::string category;
};

const std::vector<Fact>& facts() {
  static const std::vector<Fact> f{
      {"paging.txt",
       "The paging occasion of a UE is derived from the UE identity modulo the number of paging frames in the cycle.",
       "How is the paging occasion of a UE derived?", "from the UE identity modulo the number of paging frames",
       {"from the physical cell identity", "from the tracking area code", "from the serving cell bandwidth"},
       "Standards specifications"},
      {"handover.txt",
       "During a handover the source gNB sends the handover command to the UE inside an RRC reconfiguration message.",
       "Which message carries the handover command to the UE?", "an RRC reconfiguration message",
       {"a paging record", "a system information block", "a random access response"}, "Standards specifications"},
      {"rrc.txt",
       "Radio Resource Control (RRC) connections are released after the inactivity timer expires and the UE moves to "
       "idle mode.",
       "What happens to the UE when the RRC inactivity timer expires?", "the UE moves to idle mode",
       {"the UE starts a handover", "the UE doubles its transmit power", "the UE reselects a new carrier"},
       "Lexicon"},
      {"prach.txt",
       "The random access preamble is transmitted on the physical random access channel using a configured root "
       "sequence.",
       "On which channel is the random access preamble transmitted?", "the physical random access channel",
       {"the physical uplink shared channel", "the physical broadcast channel", "the physical downlink control channel"},
       "Standards specifications"},
      {"harq.txt",
       "Hybrid automatic repeat request feedback for downlink data is reported on the physical uplink control channel.",
       "Where is hybrid automatic repeat request feedback for downlink data reported?",
       "on the physical uplink control channel",
       {"on the broadcast control channel", "on the paging channel", "on the sidelink feedback channel"},
       "Standards specifications"},
      {"timing.txt",
       "The timing advance command adjusts uplink transmission timing so that signals from all UEs arrive aligned at "
       "the base station.",
       "What is the purpose of the timing advance command?", "signals from all UEs arrive aligned at the base station",
       {"the UE saves battery during sleep", "the cell broadcasts its identity", "the core network selects a gateway"},
       "Lexicon"},
      {"drx.txt",
       "Discontinuous reception lets the UE switch off its receiver between scheduled wake up periods to save battery.",
       "Why does discontinuous reception switch off the receiver?", "to save battery",
       {"to measure neighbour cells", "to decode more carriers", "to avoid interference with radar"}, "Lexicon"},
      {"mib.txt",
       "The master information block is repeated every eighty milliseconds on a fixed broadcast resource.",
       "How often is the master information block repeated?", "every eighty milliseconds",
       {"every ten milliseconds", "every two seconds", "once per hyperframe"}, "Standards specifications"},
      {"qos.txt",
       "Each QoS flow is identified by a QoS flow identifier carried in the encapsulation header on the user plane "
       "tunnel.",
       "How is a QoS flow identified on the user plane?", "by a QoS flow identifier carried in the encapsulation header",
       {"by the IMSI of the subscriber", "by the cell radio network temporary identifier", "by the slice priority"},
       "Standards specifications"},
      {"beam.txt",
       "Beam failure recovery starts when the UE counts enough beam failure instances before the recovery timer runs "
       "out.",
       "When does beam failure recovery start?", "when the UE counts enough beam failure instances",
       {"when the gNB powers down", "when the UE leaves the tracking area", "when the paging cycle ends"},
       "Standards specifications"},
  };
  return f;
}

const std::vector<std::string> kFiller{
    "Implementation details remain vendor specific and are outside the scope of this clause.",
    "Operators may tune related parameters through configuration management during deployment.",
    "Interoperability testing confirmed that compliant equipment follows the stated behaviour.",
    "Later releases keep this behaviour unchanged for backward compatibility with earlier terminals.",
    "Informative annexes list example values that were used during early field trials.",
};

std::string doc_body(std::size_t i) {
  std::string body = facts()[i].sentence + "\n\n";
  for (std::size_t p = 0; p < 4; ++p) body += kFiller[(i + p) % kFiller.size()] + " ";
  body.pop_back();
  return body + "\n";
}

struct QuestionSpec {
  std::string qid;
  std::vector<std::string> options;
  std::size_t answer = 0;
};

QuestionSpec question_spec(std::size_t i) {
  const auto& f = facts()[i];
  QuestionSpec s;
  s.qid = "q" + std::string(i < 9 ? "0" : "") + std::to_string(i + 1);
  s.answer = i % (f.distractors.size() + 1);
  s.options = f.distractors;
  s.options.insert(s.options.begin() + static_cast<std::ptrdiff_t>(s.answer), f.answer);
  return s;
}

nlohmann::ordered_json questions_json() {
  nlohmann::ordered_json root;
  for (std::size_t i = 0; i < facts().size(); ++i) {
    const auto s = question_spec(i);
    nlohmann::ordered_json q;
    q["question"] = facts()[i].stem;
    for (std::size_t o = 0; o < s.options.size(); ++o) q["option " + std::to_string(o + 1)] = s.options[o];
    q["answer"] = "option " + std::to_string(s.answer + 1) + ": " + s.options[s.answer];
    q["explanation"] = facts()[i].sentence;
    q["category"] = facts()[i].category;
    root[s.qid] = q;
  }
  return root;
}

nlohmann::ordered_json dataset_json() {
  nlohmann::ordered_json root;
  for (std::size_t i = 0; i < 20; ++i) {
    const std::size_t n = 2 + i % 4;
    nlohmann::ordered_json q;
    q["question"] = "Which statement about feature " + std::to_string(i + 1) + " holds?";
    for (std::size_t o = 0; o < n; ++o) {
      q["option " + std::to_string(o + 1)] =
          "feature " + std::to_string(i + 1) + " uses setting " + std::to_string(o * 7 + i);
    }
    const std::size_t answer = (i * 3) % n;
    q["answer"] = "option " + std::to_string(answer + 1) + ": " +
                  q["option " + std::to_string(answer + 1)].get<std::string>();
    if (i % 9 != 4) {
      q["explanation"] = "Feature " + std::to_string(i + 1) + " is configured with setting " +
                         std::to_string(answer * 7 + i) + " in the reference profile.";
    }
    q["category"] = i % 3 == 0 ? "Lexicon" : "Standards specifications";
    root["d" + std::string(i < 9 ? "0" : "") + std::to_string(i + 1)] = q;
  }
  return root;
}

std::string context_part(const std::string& prompt) {
  const auto pos = prompt.find("Question: ");
  return pos == std::string::npos ? prompt : prompt.substr(0, pos);
}

/// Extractive responder: answers with whichever option of the asked
/// question appears verbatim in the prompt context.
std::optional<std::string> respond(const std::vector<Question>& questions, const std::string& prompt) {
  for (const auto& q : questions) {
    if (prompt.find("Question: " + q.stem) == std::string::npos) continue;
    const auto context = context_part(prompt);
    const bool mcq = prompt.find("\noption 1: ") != std::string::npos;
    for (const auto& o : q.options) {
      if (context.find(o.text) == std::string::npos) continue;
      return mcq ? "Answer: option " + o.id : o.text;
    }
    return std::string("I cannot tell from the context.");
  }
  return std::nullopt;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void check(bool ok, const std::string& message) {
  if (!ok) throw Error("fixture check failed: " + message);
}

void run(const fs::path& root) {
  const auto e2e = root / "e2e";
  fs::remove_all(e2e / "corpus");
  fs::create_directories(e2e / "corpus");
  fs::create_directories(root / "dataset");
  for (std::size_t i = 0; i < facts().size(); ++i) write_text(e2e / "corpus" / facts()[i].doc, doc_body(i));
  write_text(e2e / "questions.json", questions_json().dump(2) + "\n");
  write_text(root / "dataset" / "questions.json", dataset_json().dump(2) + "\n");

  const auto questions = load_questions(e2e / "questions.json");
  const auto docs = load_corpus(e2e / "corpus");

  IndexSet set;
  set.chunking = ChunkingConfig::with_size(kChunkSize);
  set.chunks = chunk_corpus(docs, set.chunking);

  nlohmann::ordered_json judgments;
  for (const auto& q : questions) {
    std::vector<std::string> holders;
    for (const auto& c : set.chunks) {
      for (const auto& o : q.options) {
        if (c.text.find(o.text) == std::string::npos) continue;
        check(o.id == *q.answer, q.qid + " distractor '" + o.text + "' occurs in " + c.chunk_id);
        holders.push_back(c.chunk_id);
      }
    }
    check(holders.size() == 1, q.qid + " answer occurs in " + std::to_string(holders.size()) + " chunks");
    judgments[q.qid] = holders;
  }
  write_text(e2e / "judgments.json", judgments.dump(2) + "\n");

  StubBackend stub(kDim, 0, [&](const std::string& prompt) { return respond(questions, prompt); });
  RecordingTransport recorder(stub);
  BackendConfig cfg;
  EmbeddingClient embedder(recorder, cfg);
  GenerationClient generator(recorder, cfg);

  set.bm25 = build_bm25(set.chunks);
  set.dense = build_dense(set.chunks, embedder);
  const auto glossary = build_glossary(docs);

  const auto parsed = parse_judgments(judgments.dump(), &set);
  std::map<std::string, std::vector<std::string>> rankings;
  for (const auto& q : questions) {
    rankings[q.qid] = retrieve_topk(retrieval_query(q, glossary, false), 3, RetrieverKind::dense, set, &embedder)
                          .chunk_ids();
  }
  const auto recall = summarize_recall(rankings, parsed, 3);
  check(recall.found == questions.size(), "dense recall@3 is " + std::to_string(recall.percentage) + "%");

  const auto mcq = run_eval_mcq(questions, set, glossary, EvalConfig::mcq_defaults(), {&generator, &embedder});
  check(mcq.complete && mcq.correct == questions.size(), "mcq accuracy " + std::to_string(mcq.accuracy));
  const auto open = run_eval_open(questions, set, glossary, EvalConfig::open_defaults(), {&generator, &embedder});
  check(open.complete && open.correct == questions.size(), "open accuracy " + std::to_string(open.accuracy));

  recorder.save(e2e / "cassette.jsonl");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_e2e_fixture <fixtures-dir>\n";
    return 2;
  }
  try {
    run(argv[1]);
  } catch (const std::exception& e) {
    std::cerr << "make_e2e_fixture: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
