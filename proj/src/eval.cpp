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

#include "docctx/eval.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <variant>

#include <json.hpp>

#include "docctx/error.hpp"
#include "docctx/parallel.hpp"
#include "docctx/rng.hpp"

namespace docctx {

// ---------------------------------------------------------------------------
// Metrics

Prf to_prf(const PrfCounts& c) {
  Prf p;
  p.precision_undefined = c.predicted == 0;
  p.recall_undefined = c.gold == 0;
  if (!p.precision_undefined) {
    p.precision = static_cast<double>(c.true_positives) / static_cast<double>(c.predicted);
  }
  if (!p.recall_undefined) {
    p.recall = static_cast<double>(c.true_positives) / static_cast<double>(c.gold);
  }
  if (p.precision + p.recall > 0.0) {
    p.f1 = 2.0 * p.precision * p.recall / (p.precision + p.recall);
  }
  return p;
}

namespace {

void check_shapes(TagSequences gold, TagSequences pred) {
  if (gold.size() != pred.size()) {
    throw ContractViolation("entity_prf: " + std::to_string(gold.size()) + " gold vs " +
                            std::to_string(pred.size()) + " predicted sentences");
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw ContractViolation("entity_prf: sentence " + std::to_string(i) + " length mismatch");
    }
  }
}

}  // namespace

std::map<EntityClass, PrfCounts> entity_counts_by_class(TagSequences gold, TagSequences pred) {
  check_shapes(gold, pred);
  std::map<EntityClass, PrfCounts> out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = decode_spans(gold[i]);
    const auto p = decode_spans(pred[i]);
    const std::set<Span> gs(g.begin(), g.end());
    for (const auto& s : g) ++out[s.entity_class].gold;
    for (const auto& s : p) {
      auto& c = out[s.entity_class];
      ++c.predicted;
      if (gs.contains(s)) ++c.true_positives;
    }
  }
  return out;
}

PrfCounts entity_counts(TagSequences gold, TagSequences pred) {
  PrfCounts total;
  for (const auto& [_, c] : entity_counts_by_class(gold, pred)) total += c;
  return total;
}

Prf entity_prf(TagSequences gold, TagSequences pred) { return to_prf(entity_counts(gold, pred)); }

// ---------------------------------------------------------------------------
// Folds

std::vector<std::string> FoldPlan::fold(std::size_t f) const {
  std::vector<std::string> out;
  for (const auto& [doc, idx] : assignment) {
    if (idx == f) out.push_back(doc);
  }
  return out;
}

FoldPlan make_folds(std::span<const Document> docs, std::size_t fold_count, std::uint64_t seed) {
  if (fold_count == 0 || fold_count > docs.size()) {
    throw Error("make_folds: cannot split " + std::to_string(docs.size()) + " documents into " +
                std::to_string(fold_count) + " folds");
  }
  std::vector<std::string> ids;
  for (const auto& d : docs) ids.push_back(d.doc_id);
  std::sort(ids.begin(), ids.end());
  Rng rng(derive_seed(seed, std::string_view{"folds"}));
  rng.shuffle(ids);
  FoldPlan plan;
  plan.fold_count = fold_count;
  plan.seed = seed;
  for (std::size_t i = 0; i < ids.size(); ++i) plan.assignment[ids[i]] = i % fold_count;
  return plan;
}

// ---------------------------------------------------------------------------
// Configs

std::string_view to_string(RetrievalMethod m) {
  switch (m) {
    case RetrievalMethod::no_retrieval:
      return "no_retrieval";
    case RetrievalMethod::surrounding:
      return "surrounding";
    case RetrievalMethod::bm25:
      return "bm25";
    case RetrievalMethod::samenoun:
      return "samenoun";
    case RetrievalMethod::neural_pool:
      return "neural_pool";
  }
  return "?";
}

std::optional<RetrievalMethod> parse_method(std::string_view s) {
  for (auto m : {RetrievalMethod::no_retrieval, RetrievalMethod::surrounding, RetrievalMethod::bm25,
                 RetrievalMethod::samenoun, RetrievalMethod::neural_pool}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (method != RetrievalMethod::no_retrieval && k == 0) throw ConfigError("k must be >= 1");
  if (runs == 0) throw ConfigError("runs must be >= 1");
  if (method == RetrievalMethod::neural_pool) {
    if (n == 0) throw ConfigError("n must be >= 1");
    scorer.validate();
  }
}

bool ExperimentConfig::deterministic() const {
  switch (method) {
    case RetrievalMethod::no_retrieval:
    case RetrievalMethod::surrounding:
    case RetrievalMethod::bm25:
      return true;
    case RetrievalMethod::samenoun:
    case RetrievalMethod::neural_pool:
      return false;
  }
  return false;
}

std::string ExperimentConfig::series_id() const {
  std::string id(to_string(method));
  if (method == RetrievalMethod::neural_pool) {
    id += "[" + scorer.id() + "]/n" + std::to_string(n);
  }
  if (method != RetrievalMethod::no_retrieval) id += "/" + std::string(to_string(window));
  return id;
}

std::string ExperimentConfig::id() const { return series_id() + "/k" + std::to_string(k); }

// ---------------------------------------------------------------------------
// Report aggregation

PrfCounts EvalReport::micro(const std::string& config_id) const {
  PrfCounts c;
  for (const auto& r : rows) {
    if (r.config_id == config_id) c += r.counts;
  }
  return c;
}

double EvalReport::fold_mean_f1(const std::string& config_id) const {
  std::map<std::pair<std::size_t, std::size_t>, PrfCounts> by_fold_run;
  for (const auto& r : rows) {
    if (r.config_id == config_id) by_fold_run[{r.fold, r.run}] += r.counts;
  }
  if (by_fold_run.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [_, c] : by_fold_run) sum += to_prf(c).f1;
  return sum / static_cast<double>(by_fold_run.size());
}

std::map<std::string, PrfCounts> EvalReport::per_book(const std::string& config_id) const {
  std::map<std::string, PrfCounts> out;
  for (const auto& r : rows) {
    if (r.config_id == config_id) out[r.book] += r.counts;
  }
  return out;
}

std::map<EntityClass, PrfCounts> EvalReport::per_class(const std::string& config_id) const {
  std::map<EntityClass, PrfCounts> out;
  for (const auto& r : rows) {
    if (r.config_id != config_id) continue;
    for (const auto& [cls, c] : r.per_class) out[cls] += c;
  }
  return out;
}

void EvalReport::merge(EvalReport other) {
  for (auto& c : other.configs) configs.push_back(std::move(c));
  for (auto& r : other.rows) rows.push_back(std::move(r));
  for (auto& p : other.predictions) predictions.push_back(std::move(p));
}

// ---------------------------------------------------------------------------
// Pipeline

std::vector<Candidate> select_context(const ExperimentConfig& config, const RetrievalContext& ctx,
                                      const Scorer* scorer, const Sentence& query,
                                      std::uint64_t query_seed) {
  const std::size_t k = config.k;
  switch (config.method) {
    case RetrievalMethod::no_retrieval:
      return {};
    case RetrievalMethod::surrounding: {
      // Nearest first, alternating sides: i-1, i+1, i-2, i+2, ...
      auto around = surrounding(ctx.document(), ctx.window(), query, k);
      std::vector<Candidate> out;
      auto b = around.before.rbegin();
      auto a = around.after.begin();
      while (out.size() < k && (b != around.before.rend() || a != around.after.end())) {
        if (b != around.before.rend()) out.push_back(*b++);
        if (out.size() < k && a != around.after.end()) out.push_back(*a++);
      }
      return out;
    }
    case RetrievalMethod::bm25:
      return bm25_topn(ctx.bm25(), query, k);
    case RetrievalMethod::samenoun:
      return samenoun_topn(ctx.nouns(), query, k, query_seed);
    case RetrievalMethod::neural_pool: {
      auto pool = pool_candidates(ctx, query, config.n, query_seed);
      if (pool.empty()) return {};
      if (config.scorer.kind == ScorerKind::bucket_random) {
        return bucket_random_topk(group_by_source(pool), k,
                                  derive_seed(query_seed, std::string_view{"bucket"}));
      }
      if (config.scorer.kind == ScorerKind::random) {
        const RandomScorer per_query(derive_seed(query_seed, std::string_view{"random"},
                                                 config.scorer.seed));
        return rank_topk(pool, score_batch(per_query, ctx.document(), query, pool), k);
      }
      if (!scorer) throw ContractViolation("select_context: neural_pool needs a scorer");
      return rank_topk(pool, score_batch(*scorer, ctx.document(), query, pool), k);
    }
  }
  return {};
}

namespace {

struct QueryRef {
  const Document* doc;
  const RetrievalContext* ctx;
  const Sentence* sentence;
};

}  // namespace

EvalReport run_experiment(const ExperimentConfig& config, std::span<const Document> corpus,
                          const NerPredictor& predictor, const Scorer* scorer) {
  config.validate();
  std::unique_ptr<Scorer> owned;
  const bool needs_model = config.method == RetrievalMethod::neural_pool &&
                           (config.scorer.kind == ScorerKind::lexical ||
                            config.scorer.kind == ScorerKind::remote);
  if (needs_model && !scorer) {
    owned = make_scorer(config.scorer);
    if (auto* remote = dynamic_cast<RemoteScorer*>(owned.get())) remote->check_health();
    scorer = owned.get();
  }

  const FoldPlan plan = make_folds(corpus, config.fold_count, config.seed);
  const std::string config_id = config.id();
  EvalReport report;
  report.configs.push_back(config);

  for (std::size_t fold = 0; fold < plan.fold_count; ++fold) {
    std::vector<const Document*> test_docs;
    for (const auto& d : corpus) {
      if (plan.assignment.at(d.doc_id) == fold) test_docs.push_back(&d);
    }
    std::vector<std::unique_ptr<RetrievalContext>> contexts;
    std::vector<QueryRef> queries;
    for (const Document* d : test_docs) {
      contexts.push_back(std::make_unique<RetrievalContext>(*d, config.window, config.bm25));
      for (const auto& s : d->sentences) {
        if (s.annotated) queries.push_back({d, contexts.back().get(), &s});
      }
    }

    for (std::size_t run = 0; run < config.runs; ++run) {
      const std::uint64_t run_seed = derive_seed(config.seed, std::string_view{config_id}, fold, run);
      std::vector<std::vector<Tag>> predicted(queries.size());
      parallel_for(queries.size(), config.workers, [&](std::size_t i) {
        const QueryRef& q = queries[i];
        const char* stage = "retrieval";
        try {
          const std::uint64_t query_seed =
              derive_seed(run_seed, std::string_view{q.doc->doc_id}, q.sentence->index);
          auto selected = select_context(config, *q.ctx, scorer, *q.sentence, query_seed);
          stage = "assembly";
          const auto assembled = assemble_context(*q.sentence, selected);
          stage = "ner";
          predicted[i] = predict_query_tags(predictor, *q.doc, assembled);
        } catch (const std::exception& e) {
          throw Error("fold " + std::to_string(fold) + ", doc " + q.doc->doc_id + ", sentence " +
                      std::to_string(q.sentence->index) + ", stage " + stage + ": " + e.what());
        }
      });

      // Deterministic reduction in document order.
      std::map<std::string, ResultRow> by_book;
      for (const Document* d : test_docs) {
        by_book[d->doc_id] = ResultRow{config_id, fold, run, d->doc_id, {}, {}};
      }
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto gold = queries[i].sentence->tags();
        const std::vector<std::vector<Tag>> g{gold};
        const std::vector<std::vector<Tag>> p{predicted[i]};
        auto& row = by_book[queries[i].doc->doc_id];
        for (const auto& [cls, c] : entity_counts_by_class(g, p)) {
          row.per_class[cls] += c;
          row.counts += c;
        }
        if (config.keep_predictions) {
          report.predictions.push_back(
              {config_id, fold, run, queries[i].sentence->ref(), gold, std::move(predicted[i])});
        }
      }
      for (auto& [_, row] : by_book) report.rows.push_back(std::move(row));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report emission

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  return std::nullopt;
}

namespace {

using Cell = std::variant<std::string, std::int64_t, double, bool>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  // Keep a decimal point so CSV readers do not infer an integer column.
  if (s.find_first_of(".e") == std::string::npos && s.find("inf") == std::string::npos &&
      s.find("nan") == std::string::npos) {
    s += ".0";
  }
  return s;
}

std::string csv_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string q = "\"";
          for (char ch : v) {
            if (ch == '"') q += '"';
            q += ch;
          }
          return q + "\"";
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else {
          return std::to_string(v);
        }
      },
      c);
}

nlohmann::ordered_json json_cell(const Cell& c) {
  return std::visit([](const auto& v) { return nlohmann::ordered_json(v); }, c);
}

void append_prf(std::vector<Cell>& row, const PrfCounts& c) {
  const Prf p = to_prf(c);
  row.emplace_back(static_cast<std::int64_t>(c.true_positives));
  row.emplace_back(static_cast<std::int64_t>(c.predicted));
  row.emplace_back(static_cast<std::int64_t>(c.gold));
  row.emplace_back(p.precision);
  row.emplace_back(p.recall);
  row.emplace_back(p.f1);
  row.emplace_back(p.precision_undefined);
}

const std::vector<std::string> kPrfColumns = {"tp",     "predicted", "gold",
                                              "precision", "recall", "f1",
                                              "precision_undefined"};

std::vector<std::string> with_prf(std::vector<std::string> cols) {
  cols.insert(cols.end(), kPrfColumns.begin(), kPrfColumns.end());
  return cols;
}

std::vector<Table> build_tables(const EvalReport& report) {
  // Configs in first-seen order, deduplicated by id.
  std::vector<const ExperimentConfig*> configs;
  std::set<std::string> seen;
  for (const auto& c : report.configs) {
    if (seen.insert(c.id()).second) configs.push_back(&c);
  }

  Table summary{"summary",
                with_prf({"config_id", "method", "scorer", "n", "k", "window", "runs", "folds"}),
                {}};
  summary.columns.push_back("fold_mean_f1");
  Table curves{"curves", with_prf({"series_id", "k"}), {}};
  Table books{"per_book", with_prf({"config_id", "book"}), {}};
  Table classes{"per_class", with_prf({"config_id", "class"}), {}};
  Table runs{"runs", with_prf({"config_id", "fold", "run", "book"}), {}};

  std::map<std::string, std::map<std::size_t, PrfCounts>> curve_points;
  std::vector<std::string> series_order;
  for (const auto* c : configs) {
    const std::string id = c->id();
    const PrfCounts micro = report.micro(id);
    std::vector<Cell> row{id,
                          std::string(to_string(c->method)),
                          c->method == RetrievalMethod::neural_pool ? c->scorer.id() : std::string(),
                          static_cast<std::int64_t>(c->n),
                          static_cast<std::int64_t>(c->k),
                          std::string(to_string(c->window)),
                          static_cast<std::int64_t>(c->runs),
                          static_cast<std::int64_t>(c->fold_count)};
    append_prf(row, micro);
    row.emplace_back(report.fold_mean_f1(id));
    summary.rows.push_back(std::move(row));

    const std::string series = c->series_id();
    if (!curve_points.contains(series)) series_order.push_back(series);
    curve_points[series][c->k] += micro;

    for (const auto& [book, counts] : report.per_book(id)) {
      std::vector<Cell> r{id, book};
      append_prf(r, counts);
      books.rows.push_back(std::move(r));
    }
    for (const auto& [cls, counts] : report.per_class(id)) {
      std::vector<Cell> r{id, std::string(to_string(cls))};
      append_prf(r, counts);
      classes.rows.push_back(std::move(r));
    }
  }
  for (const auto& series : series_order) {
    for (const auto& [k, counts] : curve_points[series]) {
      std::vector<Cell> r{series, static_cast<std::int64_t>(k)};
      append_prf(r, counts);
      curves.rows.push_back(std::move(r));
    }
  }
  for (const auto& rr : report.rows) {
    std::vector<Cell> r{rr.config_id, static_cast<std::int64_t>(rr.fold),
                        static_cast<std::int64_t>(rr.run), rr.book};
    append_prf(r, rr.counts);
    runs.rows.push_back(std::move(r));
  }
  return {summary, curves, books, classes, runs};
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const EvalReport& report, std::string_view format,
                                               const std::filesystem::path& out_dir) {
  const auto fmt = parse_report_format(format);
  if (!fmt) throw Error("unknown report format '" + std::string(format) + "'");
  std::filesystem::create_directories(out_dir);
  const auto tables = build_tables(report);
  std::vector<std::filesystem::path> written;
  if (*fmt == ReportFormat::csv) {
    for (const auto& t : tables) {
      const auto path = out_dir / (t.name + ".csv");
      std::ofstream out(path, std::ios::binary);
      if (!out) throw Error("cannot write " + path.string());
      for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
      out << '\n';
      for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
        out << '\n';
      }
      written.push_back(path);
    }
  } else {
    nlohmann::ordered_json j;
    for (const auto& t : tables) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& row : t.rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = json_cell(row[i]);
        arr.push_back(std::move(obj));
      }
      j[t.name] = std::move(arr);
    }
    const auto path = out_dir / "report.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    written.push_back(path);
  }
  return written;
}

}  // namespace docctx
