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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "telequery/corpus.hpp"
#include "telequery/error.hpp"
#include "telequery/gateway.hpp"
#include "telequery/glossary.hpp"
#include "telequery/harness.hpp"
#include "telequery/log.hpp"
#include "telequery/prompt.hpp"
#include "telequery/question.hpp"
#include "telequery/retrieval.hpp"
#include "telequery/scoring.hpp"

namespace fs = std::filesystem;
using namespace telequery;

namespace {

constexpr int kExitIncomplete = 3;
const char* const kGlossaryFile = "glossary.jsonl";

struct BackendFlags {
  std::string gen_url;
  std::string embed_url;
  std::string token;
  double timeout_s = 60.0;
  int retries = 3;
  std::size_t batch_size = 16;

  void add_to(CLI::App& app, bool generation, bool embedding) {
    if (generation) {
      app.add_option("--gen-url", gen_url, "generation backend base URL")->envname("TELEQUERY_GEN_URL");
    }
    if (embedding) {
      app.add_option("--embed-url", embed_url, "embedding backend base URL")->envname("TELEQUERY_EMBED_URL");
      app.add_option("--batch-size", batch_size, "texts per embedding request")->capture_default_str();
    }
    app.add_option("--token", token, "bearer token")->envname("TELEQUERY_TOKEN");
    app.add_option("--timeout", timeout_s, "request timeout in seconds")->capture_default_str();
    app.add_option("--retries", retries, "retries per request")->capture_default_str();
  }

  BackendConfig config(const std::string& url) const {
    BackendConfig cfg;
    cfg.base_url = url;
    cfg.timeout_s = timeout_s;
    cfg.max_retries = retries;
    cfg.batch_size = batch_size;
    cfg.bearer_token = token;
    return cfg;
  }
};

/// Lazily opened backend clients.
class BackendSet {
 public:
  explicit BackendSet(const BackendFlags& flags) : flags_(flags) {}

  Embedder& embedder() {
    if (!embedder_) {
      const auto cfg = flags_.config(flags_.embed_url);
      embed_transport_ = make_transport(cfg);
      embedder_ = std::make_unique<EmbeddingClient>(*embed_transport_, cfg);
    }
    return *embedder_;
  }

  Generator& generator() {
    if (!generator_) {
      const auto cfg = flags_.config(flags_.gen_url);
      gen_transport_ = make_transport(cfg);
      generator_ = std::make_unique<GenerationClient>(*gen_transport_, cfg);
    }
    return *generator_;
  }

  std::map<std::string, std::string> labels() const {
    std::map<std::string, std::string> out;
    if (gen_transport_) out["generator"] = gen_transport_->describe();
    if (embed_transport_) out["embedder"] = embed_transport_->describe();
    return out;
  }

 private:
  const BackendFlags& flags_;
  std::unique_ptr<Transport> embed_transport_;
  std::unique_ptr<Transport> gen_transport_;
  std::unique_ptr<EmbeddingClient> embedder_;
  std::unique_ptr<GenerationClient> generator_;
};

struct LoadedIndex {
  IndexSet set;
  Glossary glossary;
};

LoadedIndex open_index(const fs::path& dir) {
  LoadedIndex out{load_index(dir), {}};
  if (fs::exists(dir / kGlossaryFile)) out.glossary = load_glossary(dir / kGlossaryFile);
  return out;
}

bool needs_embedder(RetrieverKind kind) { return kind != RetrieverKind::bm25; }

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string pct(double v) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << v;
  return ss.str();
}

struct RetrievalFlags {
  std::size_t k = 0;
  std::string retrieval = "dense";
  double dense_share = 0.5;
  bool expand = false;

  void add_to(CLI::App& app, std::size_t default_k) {
    k = default_k;
    app.add_option("-k,--k", k, "chunks to retrieve")->capture_default_str();
    app.add_option("--mode", retrieval, "retriever: bm25, dense or ensemble")->capture_default_str();
    app.add_option("--dense-share", dense_share, "dense fraction of an ensemble top-k")->capture_default_str();
    app.add_flag("--expand-retrieval-query", expand, "append abbreviation expansions to the retrieval query");
  }
};

// ---------------------------------------------------------------------------

struct IndexBuildCmd {
  std::string corpus;
  std::string out;
  std::size_t chunk_size = 150;
  std::optional<std::size_t> stride;
  std::string mode = "both";
  BackendFlags backends;

  int run() {
    const auto docs = load_corpus(corpus);
    IndexSet set;
    set.chunking = {chunk_size, stride.value_or(chunk_size)};
    set.chunks = chunk_corpus(docs, set.chunking);
    if (mode != "both" && mode != "bm25" && mode != "dense") throw ConfigError("--mode must be both, bm25 or dense");
    if (mode != "dense") set.bm25 = build_bm25(set.chunks);
    if (mode != "bm25") {
      BackendSet b(backends);
      set.dense = build_dense(set.chunks, b.embedder());
    }
    save_index(set, out);
    const auto glossary = build_glossary(docs);
    save_glossary(glossary, fs::path(out) / kGlossaryFile);
    std::cout << "indexed " << docs.size() << " documents into " << set.chunks.size() << " chunks; "
              << glossary.size() << " abbreviations\n";
    return 0;
  }
};

struct GlossaryBuildCmd {
  std::string corpus;
  std::string out;

  int run() {
    const auto glossary = build_glossary(load_corpus(corpus));
    save_glossary(glossary, out);
    std::cout << glossary.size() << " abbreviations\n";
    return 0;
  }
};

struct GlossaryLookupCmd {
  std::string glossary_path = "glossary.jsonl";
  std::vector<std::string> terms;

  int run() {
    const auto glossary = load_glossary(glossary_path);
    int status = 0;
    for (const auto& t : terms) {
      const auto hits = glossary.lookup(t);
      if (hits.empty()) {
        std::cout << t << ": not found\n";
        status = 1;
      }
      for (const auto& e : hits) std::cout << e.short_form << ": " << e.long_form << " (" << e.source_doc << ")\n";
    }
    return status;
  }
};

struct AskCmd {
  std::string index;
  std::string question;
  std::vector<std::string> options;
  std::string template_path;
  RetrievalFlags retrieval;
  std::size_t max_tokens = kDefaultContextWindow;
  BackendFlags backends;

  int run() {
    auto idx = open_index(index);
    BackendSet b(backends);
    Question q;
    q.qid = "ask";
    q.stem = question;
    for (std::size_t i = 0; i < options.size(); ++i) q.options.push_back({std::to_string(i + 1), options[i]});
    const auto kind = parse_retriever_kind(retrieval.retrieval);
    const auto result = retrieve_topk(retrieval_query(q, idx.glossary, retrieval.expand), retrieval.k, kind,
                                      idx.set, needs_embedder(kind) ? &b.embedder() : nullptr,
                                      {retrieval.dense_share});
    PromptInput input;
    input.question = q.stem;
    input.options = q.options;
    input.expansions = expand_query(q.stem, q.option_texts(), idx.glossary);
    for (const auto& e : result.entries) {
      std::cout << "retrieved " << e.chunk_id << " " << e.score << " " << to_string(e.retriever) << "\n";
      input.context.push_back({e.chunk_id, idx.set.find_chunk(e.chunk_id)->text});
    }
    const auto mode = options.empty() ? PromptMode::open : PromptMode::mcq;
    const auto tmpl = !template_path.empty()       ? PromptTemplate::load(template_path)
                      : mode == PromptMode::mcq ? PromptTemplate::default_mcq()
                                                : PromptTemplate::default_open();
    BudgetPolicy budget;
    budget.max_tokens = max_tokens;
    const auto fitted = fit_to_budget(std::move(input), mode, tmpl, budget);
    if (fitted.dropped_chunks > 0) std::cout << "dropped " << fitted.dropped_chunks << " chunks to fit the budget\n";
    const auto response = b.generator().generate(
        fitted.bundle.text, mode == PromptMode::mcq ? kMcqMaxNewTokens : kOpenMaxNewTokens);
    std::cout << "response: " << response << "\n";
    if (mode == PromptMode::mcq) {
      const auto parsed = parse_mcq_answer(response, q.option_ids());
      std::cout << "answer: " << (parsed ? "option " + *parsed : std::string("(unparsed)")) << "\n";
    }
    return 0;
  }
};

struct EvalCmd {
  PromptMode mode = PromptMode::mcq;
  std::string index;
  std::string questions;
  std::string out;
  std::string template_path;
  std::string weights;
  RetrievalFlags retrieval;
  std::size_t max_tokens = kDefaultContextWindow;
  bool no_drop = false;
  std::optional<std::size_t> max_new_tokens;
  std::size_t concurrency = 4;
  std::size_t parse_retries = 0;
  BackendFlags backends;

  int run() {
    auto idx = open_index(index);
    const auto qs = load_questions(questions);
    BackendSet b(backends);
    auto cfg = mode == PromptMode::mcq ? EvalConfig::mcq_defaults() : EvalConfig::open_defaults();
    cfg.k = retrieval.k;
    cfg.retrieval = parse_retriever_kind(retrieval.retrieval);
    cfg.retrieval_options.dense_share = retrieval.dense_share;
    cfg.expand_retrieval_query = retrieval.expand;
    if (!weights.empty()) cfg.weights = ScoreWeights::parse(weights);
    cfg.budget.max_tokens = max_tokens;
    cfg.budget.drop_chunks = !no_drop;
    if (max_new_tokens) cfg.max_new_tokens = *max_new_tokens;
    cfg.max_concurrency = concurrency;
    cfg.parse_retries = parse_retries;
    const auto tmpl = !template_path.empty()       ? PromptTemplate::load(template_path)
                      : mode == PromptMode::mcq ? PromptTemplate::default_mcq()
                                                : PromptTemplate::default_open();
    Backends handles{&b.generator(), nullptr};
    if (mode == PromptMode::open || needs_embedder(cfg.retrieval)) handles.embedder = &b.embedder();
    cfg.labels = b.labels();
    const auto report = mode == PromptMode::mcq ? run_eval_mcq(qs, idx.set, idx.glossary, cfg, handles, tmpl)
                                                : run_eval_open(qs, idx.set, idx.glossary, cfg, handles, tmpl);
    write_report(report, out);
    std::cout << to_string(mode) << " accuracy " << pct(100.0 * report.accuracy) << "% (" << report.correct << "/"
              << report.n << ")\n";
    if (!report.complete) {
      std::cerr << "incomplete run: " << report.error << "\n";
      return kExitIncomplete;
    }
    return 0;
  }
};

struct SweepWeightsCmd {
  std::string report;
  std::string questions;
  std::string out;
  std::vector<std::string> grid;
  BackendFlags backends;

  int run() {
    const auto r = read_report(report);
    if (r.config.pipeline != PromptMode::open) throw ConfigError("weight sweeps need an open-mode report");
    std::map<std::string, std::string> responses;
    for (const auto& o : r.per_question) responses[o.qid] = o.response;
    std::vector<ScoreWeights> points;
    for (const auto& g : grid) points.push_back(ScoreWeights::parse(g));
    if (points.empty()) points = default_weight_grid();
    BackendSet b(backends);
    const auto rows = sweep_weights(load_questions(questions), points, responses, b.embedder());
    const auto csv = weight_sweep_csv(rows);
    if (out.empty()) {
      std::cout << csv;
    } else {
      write_file(out, csv);
    }
    return 0;
  }
};

struct SweepTopkCmd {
  std::vector<std::string> indexes;
  std::string questions;
  std::string out;
  std::vector<std::size_t> ks{1, 3, 5, 7, 9, 11, 13, 15};
  RetrievalFlags retrieval;
  std::size_t max_tokens = kDefaultContextWindow;
  std::size_t concurrency = 4;
  BackendFlags backends;

  int run() {
    std::vector<LoadedIndex> loaded;
    loaded.reserve(indexes.size());
    for (const auto& dir : indexes) loaded.push_back(open_index(dir));
    std::map<std::size_t, const IndexSet*> by_size;
    for (const auto& l : loaded) {
      if (!by_size.emplace(l.set.chunking.chunk_size, &l.set).second) {
        throw ConfigError("two indexes share chunk size " + std::to_string(l.set.chunking.chunk_size));
      }
    }
    BackendSet b(backends);
    auto cfg = EvalConfig::mcq_defaults();
    cfg.retrieval = parse_retriever_kind(retrieval.retrieval);
    cfg.retrieval_options.dense_share = retrieval.dense_share;
    cfg.expand_retrieval_query = retrieval.expand;
    cfg.budget.max_tokens = max_tokens;
    cfg.max_concurrency = concurrency;
    Backends handles{&b.generator(), needs_embedder(cfg.retrieval) ? &b.embedder() : nullptr};
    cfg.labels = b.labels();
    const auto rows = sweep_topk(load_questions(questions), ks, by_size, loaded.front().glossary, cfg, handles);
    const auto csv = topk_sweep_csv(rows);
    if (out.empty()) {
      std::cout << csv;
    } else {
      write_file(out, csv);
    }
    return 0;
  }
};

struct RecallCmd {
  std::string index;
  std::string questions;
  std::string judgments;
  std::vector<std::size_t> ks{kMcqDefaultK};
  std::string out;
  RetrievalFlags retrieval;
  BackendFlags backends;

  int run() {
    auto idx = open_index(index);
    const auto qs = load_questions(questions);
    const auto judged = load_judgments(judgments, &idx.set);
    const auto kind = parse_retriever_kind(retrieval.retrieval);
    BackendSet b(backends);
    Embedder* embedder = needs_embedder(kind) ? &b.embedder() : nullptr;
    const std::size_t deepest = *std::max_element(ks.begin(), ks.end());
    std::map<std::string, std::vector<std::string>> rankings;
    for (const auto& q : qs) {
      rankings[q.qid] = retrieve_topk(retrieval_query(q, idx.glossary, retrieval.expand), deepest, kind, idx.set,
                                      embedder, {retrieval.dense_share})
                            .chunk_ids();
    }
    nlohmann::ordered_json summary = nlohmann::ordered_json::array();
    for (const auto k : ks) {
      const auto s = summarize_recall(rankings, judged, k);
      std::cout << "recall@" << k << " " << pct(s.percentage) << "% (" << s.found << "/" << s.judged
                << ", skipped " << s.skipped << ")\n";
      summary.push_back({{"k", k}, {"judged", s.judged}, {"found", s.found}, {"skipped", s.skipped},
                         {"recall_pct", s.percentage}});
    }
    if (!out.empty()) {
      nlohmann::ordered_json j;
      j["retrieval"] = retrieval.retrieval;
      j["summary"] = summary;
      j["rankings"] = rankings;
      write_file(out, j.dump(2) + "\n");
    }
    return 0;
  }
};

struct TripletsCmd {
  std::string questions;
  std::string out;
  std::uint64_t seed = 0;

  int run() {
    const auto set = build_triplets(load_questions(questions), seed);
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error("cannot write " + out);
    write_triplets_jsonl(set.triplets, f);
    std::cout << set.triplets.size() << " triplets, " << set.skipped << " questions skipped\n";
    return 0;
  }
};

struct SftCmd {
  std::string questions;
  std::string out;
  std::string index;
  std::string template_path;
  RetrievalFlags retrieval;
  BackendFlags backends;

  int run() {
    const auto qs = load_questions(questions);
    std::map<std::string, std::vector<ContextChunk>> contexts;
    Glossary glossary;
    if (!index.empty()) {
      auto idx = open_index(index);
      glossary = idx.glossary;
      const auto kind = parse_retriever_kind(retrieval.retrieval);
      BackendSet b(backends);
      Embedder* embedder = needs_embedder(kind) ? &b.embedder() : nullptr;
      for (const auto& q : qs) {
        const auto r = retrieve_topk(retrieval_query(q, glossary, retrieval.expand), retrieval.k, kind, idx.set,
                                     embedder, {retrieval.dense_share});
        for (const auto& e : r.entries) contexts[q.qid].push_back({e.chunk_id, idx.set.find_chunk(e.chunk_id)->text});
      }
    }
    const auto tmpl = template_path.empty() ? PromptTemplate::default_mcq() : PromptTemplate::load(template_path);
    const auto set = build_sft_records(qs, contexts, glossary, tmpl);
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error("cannot write " + out);
    write_sft_jsonl(set.records, f);
    std::cout << set.records.size() << " records, " << set.skipped << " questions skipped\n";
    return 0;
  }
};

struct BreakdownCmd {
  std::string report;
  std::string questions;
  std::string judgments;
  std::size_t k = kMcqDefaultK;
  std::string out_dir;
  std::vector<std::string> labels;
  std::vector<std::size_t> dataset_counts;
  std::vector<std::size_t> error_counts;

  void emit(const BreakdownTable& t, const std::string& name) const {
    const auto csv = breakdown_csv(t);
    if (out_dir.empty()) {
      std::cout << "# " << t.title << "\n" << csv;
    } else {
      write_file(fs::path(out_dir) / (name + ".csv"), csv);
    }
  }

  int run() {
    if (!labels.empty()) {
      emit(breakdown_from_counts("counts", labels, dataset_counts, error_counts), "breakdown");
      return 0;
    }
    if (report.empty() || questions.empty()) throw ConfigError("give --report and --questions, or --labels");
    const auto r = read_report(report);
    std::optional<RecallJudgments> judged;
    if (!judgments.empty()) judged = load_judgments(judgments);
    const auto b = error_breakdown(r, load_questions(questions), judged ? &*judged : nullptr, k);
    emit(b.by_category, "by_category");
    if (b.by_recall) emit(*b.by_recall, "by_recall");
    return 0;
  }
};

struct MaeCmd {
  std::string pairs;
  BackendFlags backends;

  int run() {
    BackendSet b(backends);
    const auto p = load_entailment_pairs(pairs);
    std::cout << "mae " << mae_entailment(p, b.embedder()) << " over " << p.size() << " pairs\n";
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval-augmented question answering over telecom standards"};
  app.require_subcommand(1);

  auto* index_cmd = app.add_subcommand("index", "manage retrieval indexes")->require_subcommand(1);
  IndexBuildCmd index_build;
  auto* ib = index_cmd->add_subcommand("build", "chunk a corpus and build indexes");
  ib->add_option("--corpus", index_build.corpus, "corpus directory or manifest")->required();
  ib->add_option("--out", index_build.out, "index directory")->required();
  ib->add_option("--chunk-size", index_build.chunk_size, "tokens per chunk")->capture_default_str();
  ib->add_option("--stride", index_build.stride, "tokens between chunk starts");
  ib->add_option("--mode", index_build.mode, "both, bm25 or dense")->capture_default_str();
  index_build.backends.add_to(*ib, false, true);

  auto* glossary_cmd = app.add_subcommand("glossary", "abbreviation glossary")->require_subcommand(1);
  GlossaryBuildCmd glossary_build;
  auto* gb = glossary_cmd->add_subcommand("build", "extract abbreviations from a corpus");
  gb->add_option("--corpus", glossary_build.corpus)->required();
  gb->add_option("--out", glossary_build.out)->required();
  GlossaryLookupCmd glossary_lookup;
  auto* gl = glossary_cmd->add_subcommand("lookup", "print expansions");
  gl->add_option("--glossary", glossary_lookup.glossary_path)->capture_default_str();
  gl->add_option("terms", glossary_lookup.terms)->required();

  AskCmd ask;
  auto* ask_cmd = app.add_subcommand("ask", "answer one question");
  ask_cmd->add_option("--index", ask.index)->required();
  ask_cmd->add_option("question", ask.question)->required();
  ask_cmd->add_option("--option", ask.options, "answer option, repeatable; none for open mode");
  ask_cmd->add_option("--template", ask.template_path);
  ask_cmd->add_option("--max-tokens", ask.max_tokens)->capture_default_str();
  ask.retrieval.add_to(*ask_cmd, kMcqDefaultK);
  ask.backends.add_to(*ask_cmd, true, true);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a question set")->require_subcommand(1);
  EvalCmd eval_mcq;
  EvalCmd eval_open;
  eval_open.mode = PromptMode::open;
  for (auto* e : {&eval_mcq, &eval_open}) {
    const bool mcq = e->mode == PromptMode::mcq;
    auto* sub = eval_cmd->add_subcommand(mcq ? "mcq" : "open", mcq ? "options shown to the model"
                                                                   : "free answer scored against options");
    sub->add_option("--index", e->index)->required();
    sub->add_option("--questions", e->questions)->required();
    sub->add_option("--report,--out", e->out, "report path")->required();
    sub->add_option("--template", e->template_path);
    sub->add_option("--max-tokens", e->max_tokens, "prompt budget")->capture_default_str();
    sub->add_flag("--no-drop", e->no_drop, "keep over-budget prompts intact");
    sub->add_option("--max-new-tokens", e->max_new_tokens);
    sub->add_option("--concurrency", e->concurrency)->capture_default_str();
    if (mcq) sub->add_option("--parse-retries", e->parse_retries, "regenerate unparseable answers")->capture_default_str();
    if (!mcq) sub->add_option("--weights", e->weights, "alpha1,alpha2");
    e->retrieval.add_to(*sub, mcq ? kMcqDefaultK : kOpenDefaultK);
    e->backends.add_to(*sub, true, true);
  }

  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweeps")->require_subcommand(1);
  SweepWeightsCmd sweep_weights_cmd;
  auto* sw = sweep_cmd->add_subcommand("weights", "rescore an open report over a weight grid");
  sw->add_option("--report", sweep_weights_cmd.report)->required();
  sw->add_option("--questions", sweep_weights_cmd.questions)->required();
  sw->add_option("--out", sweep_weights_cmd.out, "CSV path; stdout when omitted");
  sw->add_option("--grid", sweep_weights_cmd.grid, "alpha1,alpha2 points, repeatable");
  sweep_weights_cmd.backends.add_to(*sw, false, true);
  SweepTopkCmd sweep_topk_cmd;
  auto* st = sweep_cmd->add_subcommand("topk", "mcq accuracy over chunk sizes and k");
  st->add_option("--index", sweep_topk_cmd.indexes, "index directory, one per chunk size")->required();
  st->add_option("--questions", sweep_topk_cmd.questions)->required();
  st->add_option("--out", sweep_topk_cmd.out);
  st->add_option("--k,--ks", sweep_topk_cmd.ks, "comma-separated k values")->delimiter(',')->capture_default_str();
  st->add_option("--max-tokens", sweep_topk_cmd.max_tokens)->capture_default_str();
  st->add_option("--concurrency", sweep_topk_cmd.concurrency)->capture_default_str();
  st->add_option("--mode", sweep_topk_cmd.retrieval.retrieval, "retriever")->capture_default_str();
  st->add_option("--dense-share", sweep_topk_cmd.retrieval.dense_share)->capture_default_str();
  st->add_flag("--expand-retrieval-query", sweep_topk_cmd.retrieval.expand);
  sweep_topk_cmd.backends.add_to(*st, true, true);

  RecallCmd recall;
  auto* rc = app.add_subcommand("recall", "recall@k against judgments");
  rc->add_option("--index", recall.index)->required();
  rc->add_option("--questions", recall.questions)->required();
  rc->add_option("--judgments", recall.judgments)->required();
  rc->add_option("--k,--ks", recall.ks, "comma-separated k values")->delimiter(',')->capture_default_str();
  rc->add_option("--out", recall.out, "JSON summary with rankings");
  rc->add_option("--mode", recall.retrieval.retrieval, "retriever")->capture_default_str();
  rc->add_option("--dense-share", recall.retrieval.dense_share)->capture_default_str();
  rc->add_flag("--expand-retrieval-query", recall.retrieval.expand);
  recall.backends.add_to(*rc, false, true);

  TripletsCmd triplets;
  auto* tc = app.add_subcommand("triplets", "write anchor/positive/negative triplets");
  tc->add_option("--in,--questions", triplets.questions)->required();
  tc->add_option("--out", triplets.out)->required();
  tc->add_option("--seed", triplets.seed)->capture_default_str();

  SftCmd sft;
  auto* sc = app.add_subcommand("sft", "write prompt/target records for fine-tuning");
  sc->add_option("--in,--questions", sft.questions)->required();
  sc->add_option("--out", sft.out)->required();
  sc->add_option("--index", sft.index, "retrieve context from this index");
  sc->add_option("--template", sft.template_path);
  sft.retrieval.add_to(*sc, kMcqDefaultK);
  sft.backends.add_to(*sc, false, true);

  BreakdownCmd breakdown;
  auto* bc = app.add_subcommand("breakdown", "error analysis tables");
  bc->add_option("--report", breakdown.report);
  bc->add_option("--questions", breakdown.questions);
  bc->add_option("--judgments", breakdown.judgments);
  bc->add_option("--k", breakdown.k)->capture_default_str();
  bc->add_option("--out-dir", breakdown.out_dir);
  bc->add_option("--labels", breakdown.labels)->delimiter(',');
  bc->add_option("--dataset", breakdown.dataset_counts)->delimiter(',');
  bc->add_option("--errors", breakdown.error_counts)->delimiter(',');

  MaeCmd mae;
  auto* mc = app.add_subcommand("mae", "mean absolute error of embedding cosine on entailment pairs");
  mc->add_option("--pairs", mae.pairs)->required();
  mae.backends.add_to(*mc, false, true);

  CLI11_PARSE(app, argc, argv);

  set_log_sink([](LogLevel level, std::string_view message) {
    const char* tag = level == LogLevel::error ? "error" : level == LogLevel::warning ? "warning" : "info";
    std::cerr << tag << ": " << message << "\n";
  });

  try {
    if (*ib) return index_build.run();
    if (*gb) return glossary_build.run();
    if (*gl) return glossary_lookup.run();
    if (*ask_cmd) return ask.run();
    if (eval_cmd->got_subcommand("mcq")) return eval_mcq.run();
    if (eval_cmd->got_subcommand("open")) return eval_open.run();
    if (*sw) return sweep_weights_cmd.run();
    if (*st) return sweep_topk_cmd.run();
    if (*rc) return recall.run();
    if (*tc) return triplets.run();
    if (*sc) return sft.run();
    if (*bc) return breakdown.run();
    if (*mc) return mae.run();
  } catch (const telequery::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
