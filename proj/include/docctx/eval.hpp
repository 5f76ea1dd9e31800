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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docctx/corpus.hpp"
#include "docctx/nerbridge.hpp"
#include "docctx/rerank.hpp"
#include "docctx/retrieval.hpp"

namespace docctx {

// Entity-level counts over exact (sentence, span, class) matches.
struct PrfCounts {
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  PrfCounts& operator+=(const PrfCounts& o) {
    true_positives += o.true_positives;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
  friend bool operator==(const PrfCounts&, const PrfCounts&) = default;
};

// Undefined ratios (empty denominators) are reported as 0 and flagged.
struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
};

Prf to_prf(const PrfCounts& c);

using TagSequences = std::span<const std::vector<Tag>>;

// Throws ContractViolation when the shapes differ.
PrfCounts entity_counts(TagSequences gold, TagSequences pred);
std::map<EntityClass, PrfCounts> entity_counts_by_class(TagSequences gold, TagSequences pred);
Prf entity_prf(TagSequences gold, TagSequences pred);

struct FoldPlan {
  std::size_t fold_count = 5;
  std::uint64_t seed = 0;
  std::map<std::string, std::size_t> assignment;  // doc_id -> fold

  std::vector<std::string> fold(std::size_t f) const;
};

// Seeded shuffle then round-robin. Throws Error if fold_count exceeds the
// number of documents or is zero.
FoldPlan make_folds(std::span<const Document> docs, std::size_t fold_count, std::uint64_t seed);

enum class RetrievalMethod { no_retrieval, surrounding, bm25, samenoun, neural_pool };

std::string_view to_string(RetrievalMethod m);
std::optional<RetrievalMethod> parse_method(std::string_view s);

struct ExperimentConfig {
  RetrievalMethod method = RetrievalMethod::no_retrieval;
  ScorerSpec scorer;  // neural_pool only
  std::size_t n = 8;
  std::size_t k = 3;
  ContextWindow window = ContextWindow::full_book;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::size_t fold_count = 5;
  Bm25Params bm25;
  unsigned workers = 1;
  // Keep per-sentence gold/predicted tags in the report.
  bool keep_predictions = false;

  void validate() const;
  // Deterministic methods give identical runs.
  bool deterministic() const;
  // Everything except k: names a curve.
  std::string series_id() const;
  std::string id() const;
};

struct ResultRow {
  std::string config_id;
  std::size_t fold = 0;
  std::size_t run = 0;
  std::string book;
  PrfCounts counts;
  std::map<EntityClass, PrfCounts> per_class;
};

struct SentencePrediction {
  std::string config_id;
  std::size_t fold = 0;
  std::size_t run = 0;
  SentenceRef sentence;
  std::vector<Tag> gold;
  std::vector<Tag> predicted;
};

struct EvalReport {
  std::vector<ExperimentConfig> configs;
  // One row per (config, fold, run, book).
  std::vector<ResultRow> rows;
  std::vector<SentencePrediction> predictions;

  // Micro-average over every fold, run and book of a config.
  PrfCounts micro(const std::string& config_id) const;
  // Mean over (fold, run) of the fold-level micro F1.
  double fold_mean_f1(const std::string& config_id) const;
  std::map<std::string, PrfCounts> per_book(const std::string& config_id) const;
  std::map<EntityClass, PrfCounts> per_class(const std::string& config_id) const;

  void merge(EvalReport other);
};

// Context sentences chosen for one query under `config` (empty for
// no_retrieval). `query_seed` drives every random choice.
std::vector<Candidate> select_context(const ExperimentConfig& config, const RetrievalContext& ctx,
                                      const Scorer* scorer, const Sentence& query,
                                      std::uint64_t query_seed);

// Evaluates every annotated sentence of every test fold. `scorer` overrides
// the one built from config.scorer. Failures abort with an Error naming
// fold, document, sentence and stage.
EvalReport run_experiment(const ExperimentConfig& config, std::span<const Document> corpus,
                          const NerPredictor& predictor, const Scorer* scorer = nullptr);

enum class ReportFormat { csv, json };
std::optional<ReportFormat> parse_report_format(std::string_view s);

// Writes summary, curves, per_book, per_class and runs tables into out_dir
// (one file per table for CSV, a single report.json for JSON). Returns the
// written paths. Throws Error for an unknown format name.
std::vector<std::filesystem::path> emit_report(const EvalReport& report, std::string_view format,
                                               const std::filesystem::path& out_dir);

}  // namespace docctx
