// Copyright 2026 The docctx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "docctx/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "docctx/config.hpp"
#include "docctx/corpus.hpp"
#include "docctx/datagen.hpp"
#include "docctx/dataset.hpp"
#include "docctx/error.hpp"
#include "docctx/eval.hpp"
#include "docctx/nerbridge.hpp"
#include "docctx/rerank.hpp"
#include "docctx/retrieval.hpp"
#include "docctx/text.hpp"

namespace docctx::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::string corpus;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> llm_endpoint;
  std::optional<std::string> scorer_endpoint;
  std::optional<std::string> ner_endpoint;
  std::optional<std::string> out_dir;
  std::vector<std::size_t> ns;
  std::vector<std::size_t> ks;
  std::vector<std::string> windows;
  std::optional<std::size_t> runs;

  // per subcommand
  std::vector<std::string> methods;
  std::string scorer;
  std::string model;
  std::string dataset;
  std::string eval_dataset;
  std::string gazetteer;
  std::vector<std::string> formats;
  std::string doc;
  std::optional<std::size_t> query_index;
  std::string output;
  std::string query;
  std::string context;
  std::optional<std::size_t> epochs;
  std::optional<double> learning_rate;
};

// Precedence: flag, then environment, then config file.
RunConfig resolve_config(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  apply_env_overrides(c);
  if (!f.corpus.empty()) c.corpus = f.corpus;
  if (f.seed) {
    c.seed = *f.seed;
    c.datagen.seed = *f.seed;
    c.scorer.seed = *f.seed;
  } else {
    c.datagen.seed = c.seed;
  }
  if (f.workers) c.workers = *f.workers;
  if (c.workers) c.datagen.parallelism = c.workers;
  if (f.llm_endpoint) c.llm_endpoint = *f.llm_endpoint;
  if (f.scorer_endpoint) c.scorer.endpoint = *f.scorer_endpoint;
  if (f.ner_endpoint) c.ner_endpoint = *f.ner_endpoint;
  if (f.out_dir) c.out_dir = *f.out_dir;
  if (!f.ns.empty()) c.ns = f.ns;
  if (!f.ks.empty()) c.ks = f.ks;
  if (!f.windows.empty()) {
    c.windows.clear();
    for (const auto& w : f.windows) c.windows.push_back(*parse_window(w));
  }
  if (f.runs) c.runs = *f.runs;
  if (!f.methods.empty()) {
    c.methods.clear();
    for (const auto& m : f.methods) c.methods.push_back(*parse_method(m));
  }
  if (!f.scorer.empty()) c.scorer.kind = *parse_scorer_kind(f.scorer);
  if (!f.model.empty()) {
    c.model_path = f.model;
    c.scorer.model_path = f.model;
  }
  if (!f.dataset.empty()) c.train_dataset = f.dataset;
  if (!f.eval_dataset.empty()) c.eval_dataset = f.eval_dataset;
  if (!f.gazetteer.empty()) c.gazetteer = f.gazetteer;
  if (!f.formats.empty()) c.formats = f.formats;
  if (f.epochs) c.epochs = *f.epochs;
  if (f.learning_rate) c.learning_rate = *f.learning_rate;
  return c;
}

std::vector<Document> load_corpus(const RunConfig& c) {
  if (c.corpus.empty()) throw ConfigError("no corpus given (--corpus or \"corpus\" in the config)");
  return load_ner_corpus(c.corpus);
}

fs::path default_model_path(const RunConfig& c) {
  return c.model_path.empty() ? c.out_dir / "lexical_model.json" : c.model_path;
}

std::unique_ptr<NerPredictor> make_predictor(const RunConfig& c) {
  if (!c.ner_endpoint.empty()) return std::make_unique<RemoteNerPredictor>(c.ner_endpoint);
  if (!c.gazetteer.empty()) {
    return std::make_unique<MockGazetteerPredictor>(load_gazetteer(c.gazetteer.string()),
                                                    c.context_rule);
  }
  throw ConfigError("no NER predictor configured (--ner-endpoint or --gazetteer)");
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

int cmd_validate(const RunConfig& c, std::ostream& out) {
  auto docs = load_corpus(c);
  std::size_t sentences = 0;
  for (const auto& d : docs) {
    validate_document(d);
    sentences += d.sentences.size();
  }
  out << docs.size() << " documents, " << sentences << " sentences\n";
  return kExitOk;
}

void print_split(std::ostream& out, const char* name, const std::vector<RetrievalExample>& xs,
                 const fs::path& path) {
  std::size_t pos = 0;
  for (const auto& x : xs) pos += x.label ? 1 : 0;
  out << name << ": " << xs.size() << " examples (" << pos << " positive, " << xs.size() - pos
      << " negative) -> " << path.string() << "\n";
}

int cmd_gen_dataset(const RunConfig& c, std::ostream& out, std::ostream& err) {
  auto docs = load_corpus(c);
  if (c.llm_endpoint.empty()) {
    throw ConfigError("no LLM endpoint (--llm-endpoint, DOCCTX_LLM_ENDPOINT or \"mock\")");
  }
  std::unique_ptr<LlmClient> llm;
  if (c.llm_endpoint == "mock") {
    llm = std::make_unique<TemplateLlmClient>();
  } else {
    llm = std::make_unique<HttpLlmClient>(c.llm_endpoint, c.llm_adapter);
  }
  auto generated = generate_dataset(docs, *llm, c.datagen);
  fs::create_directories(c.out_dir);
  const auto train = c.out_dir / "train.jsonl";
  const auto eval = c.out_dir / "eval.jsonl";
  const auto report = c.out_dir / "generation_report.json";
  save_dataset(train.string(), generated.split.train);
  save_dataset(eval.string(), generated.split.eval);
  std::ofstream r(report);
  r << generated.report.to_json().dump(2) << "\n";
  if (!r) throw Error("cannot write " + report.string());
  const auto& g = generated.report;
  err << "entities " << g.entities << ", accepted " << g.accepted << ", filtered " << g.filtered
      << ", empty " << g.empty << ", failed " << g.failed << "\n";
  print_split(out, "train", generated.split.train, train);
  print_split(out, "eval", generated.split.eval, eval);
  return kExitOk;
}

double accuracy(const LexicalModel& m, const std::vector<RetrievalExample>& xs) {
  std::size_t right = 0;
  for (const auto& x : xs) {
    auto q = text::tokenize(x.query_text);
    auto ctx = text::tokenize(x.context_text);
    right += ((m.predict(q, ctx) >= 0.5) == x.label) ? 1 : 0;
  }
  return xs.empty() ? 0.0 : static_cast<double>(right) / static_cast<double>(xs.size());
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  const fs::path train_path =
      c.train_dataset.empty() ? c.out_dir / "train.jsonl" : c.train_dataset;
  const auto train = load_dataset(train_path.string());
  const fs::path model_path = default_model_path(c);
  if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
  auto model = train_lexical_model(train, {c.epochs, c.learning_rate});
  model.save(model_path.string());
  out << "model -> " << model_path.string() << "\n";
  out << "train accuracy " << fmt4(accuracy(model, train)) << "\n";
  fs::path eval_path = c.eval_dataset;
  if (eval_path.empty() && c.train_dataset.empty()) eval_path = c.out_dir / "eval.jsonl";
  if (!eval_path.empty() && fs::exists(eval_path)) {
    out << "eval accuracy " << fmt4(accuracy(model, load_dataset(eval_path.string()))) << "\n";
  }
  return kExitOk;
}

int cmd_run_eval(RunConfig c, std::ostream& out) {
  auto docs = load_corpus(c);
  auto predictor = make_predictor(c);
  if (c.scorer.kind == ScorerKind::lexical && c.scorer.model_path.empty()) {
    c.scorer.model_path = default_model_path(c).string();
  }
  if (c.scorer.kind != ScorerKind::remote) c.scorer.endpoint.clear();
  if (c.scorer.kind != ScorerKind::lexical) c.scorer.model_path.clear();
  for (const auto& f : c.formats) {
    if (!parse_report_format(f)) throw ConfigError("unknown report format '" + f + "'");
  }
  EvalReport all;
  for (const auto& e : expand_experiments(c)) all.merge(run_experiment(e, docs, *predictor));
  fs::create_directories(c.out_dir);
  for (const auto& f : c.formats) emit_report(all, f, c.out_dir);

  out << "config\tprecision\trecall\tf1\tfold_mean_f1\n";
  for (const auto& cfg : all.configs) {
    const auto id = cfg.id();
    const Prf p = to_prf(all.micro(id));
    out << id << "\t" << fmt4(p.precision) << "\t" << fmt4(p.recall) << "\t" << fmt4(p.f1) << "\t"
        << fmt4(all.fold_mean_f1(id)) << "\n";
  }
  return kExitOk;
}

int cmd_dump_pool(const RunConfig& c, const Flags& f, std::ostream& out) {
  auto docs = load_corpus(c);
  std::ofstream file;
  std::ostream* sink = &out;
  if (!f.output.empty()) {
    file.open(f.output);
    if (!file) throw Error("cannot write " + f.output);
    sink = &file;
  }
  bool found = f.doc.empty();
  for (const auto& d : docs) {
    if (!f.doc.empty() && d.doc_id != f.doc) continue;
    found = true;
    RetrievalContext ctx(d, c.windows.front(), c.bm25);
    for (const auto& s : d.sentences) {
      if (!s.annotated) continue;
      if (f.query_index && s.index != *f.query_index) continue;
      auto pool = pool_candidates(ctx, s, c.ns.front(), c.seed);
      write_pool_records(*sink, s, pool);
    }
  }
  if (!found) throw Error("unknown document '" + f.doc + "'");
  return kExitOk;
}

Sentence text_sentence(std::size_t index, const std::string& raw) {
  Sentence s;
  s.doc_id = "cli";
  s.index = index;
  for (auto& w : text::tokenize(raw)) s.tokens.push_back(Token{std::move(w), Tag{}});
  return s;
}

int cmd_score(const RunConfig& c, const Flags& f, std::ostream& out) {
  if (f.query.empty() || f.context.empty()) throw ConfigError("score needs --query and --context");
  double value = 0;
  if (c.scorer.kind == ScorerKind::remote) {
    RemoteScorer remote(c.scorer.endpoint);
    std::vector<std::string> contexts{f.context};
    value = remote.score_texts(f.query, contexts).front().value();
  } else {
    Document doc;
    doc.doc_id = "cli";
    doc.sentences.push_back(text_sentence(0, f.query));
    doc.sentences.push_back(text_sentence(1, f.context));
    doc.first_chapter_end = 2;
    ScorerSpec spec = c.scorer;
    if (spec.kind == ScorerKind::lexical && spec.model_path.empty()) {
      spec.model_path = default_model_path(c).string();
    }
    if (spec.kind != ScorerKind::lexical) spec.model_path.clear();
    spec.endpoint.clear();
    auto scorer = make_scorer(spec);
    std::vector<Candidate> cand{{doc.sentences[1].ref(), Source::bm25, 0.0}};
    value = score_batch(*scorer, doc, doc.sentences[0], cand).front().value();
  }
  out << fmt4(value) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Document-level context retrieval for literary NER", "docctx"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;

  app.add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--corpus", f.corpus, "Corpus directory");
  app.add_option("--seed", f.seed, "Base seed");
  app.add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--llm-endpoint", f.llm_endpoint, "LLM HTTP endpoint, or 'mock'");
  app.add_option("--scorer-endpoint", f.scorer_endpoint, "Scoring service base URL");
  app.add_option("--ner-endpoint", f.ner_endpoint, "NER service base URL");
  app.add_option("--out-dir", f.out_dir, "Output directory");
  app.add_option("--n", f.ns, "Candidates per retrieval heuristic")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  app.add_option("--k", f.ks, "Context sentences kept")->delimiter(',')->check(CLI::PositiveNumber);
  app.add_option("--window", f.windows, "Context window")
      ->delimiter(',')
      ->check(CLI::IsMember({"chapter", "book"}));
  app.add_option("--runs", f.runs, "Repetitions of random configurations")
      ->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate-corpus", "Load and check a corpus");

  auto* gen = app.add_subcommand("gen-dataset", "Generate the retrieval training dataset");

  auto* train = app.add_subcommand("train-scorer", "Train the lexical relevance scorer");
  train->add_option("--dataset", f.dataset, "Training JSONL");
  train->add_option("--eval-dataset", f.eval_dataset, "Held-out JSONL");
  train->add_option("--model", f.model, "Model output path");
  train->add_option("--epochs", f.epochs)->check(CLI::PositiveNumber);
  train->add_option("--learning-rate", f.learning_rate)->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("run-eval", "Run NER evaluation experiments");
  eval->add_option("--method", f.methods, "Retrieval methods")
      ->delimiter(',')
      ->check(CLI::IsMember({"no_retrieval", "surrounding", "bm25", "samenoun", "neural_pool"}));
  eval->add_option("--scorer", f.scorer, "Re-ranker for neural_pool")
      ->check(CLI::IsMember({"random", "bucket_random", "lexical", "remote"}));
  eval->add_option("--model", f.model, "Lexical model path");
  eval->add_option("--gazetteer", f.gazetteer, "Gazetteer for the mock NER predictor");
  eval->add_option("--format", f.formats, "Report formats")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "json"}));

  auto* dump = app.add_subcommand("dump-pool", "Write candidate pools as JSONL");
  dump->add_option("--doc", f.doc, "Restrict to one document");
  dump->add_option("--query-index", f.query_index, "Restrict to one sentence");
  dump->add_option("--output", f.output, "Output file (default stdout)");

  auto* score = app.add_subcommand("score", "Score one query/context pair");
  score->add_option("--query", f.query)->required();
  score->add_option("--context", f.context)->required();
  score->add_option("--scorer", f.scorer, "Scorer kind")
      ->check(CLI::IsMember({"random", "lexical", "remote"}));
  score->add_option("--model", f.model, "Lexical model path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "docctx: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (f.config.empty() && !score->parsed()) throw ConfigError("--config is required");
    RunConfig c = resolve_config(f);
    if (validate->parsed()) return cmd_validate(c, out);
    if (gen->parsed()) return cmd_gen_dataset(c, out, err);
    if (train->parsed()) return cmd_train(c, out);
    if (eval->parsed()) return cmd_run_eval(std::move(c), out);
    if (dump->parsed()) return cmd_dump_pool(c, f, out);
    if (score->parsed()) return cmd_score(c, f, out);
  } catch (const ConfigError& e) {
    err << "docctx: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "docctx: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace docctx::cli
