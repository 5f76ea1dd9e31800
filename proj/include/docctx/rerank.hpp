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

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "docctx/corpus.hpp"
#include "docctx/dataset.hpp"
#include "docctx/http.hpp"
#include "docctx/retrieval.hpp"

namespace docctx {

// Relevance of a candidate context, always inside [0, 1].
class RelevanceScore {
 public:
  // Throws ProtocolError for values outside [0, 1] (NaN included).
  explicit RelevanceScore(double v);
  double value() const { return value_; }

  friend bool operator==(const RelevanceScore&, const RelevanceScore&) = default;

 private:
  double value_;
};

enum class ScorerKind { random, bucket_random, lexical, remote };

std::string_view to_string(ScorerKind k);
std::optional<ScorerKind> parse_scorer_kind(std::string_view s);

struct ScorerSpec {
  ScorerKind kind = ScorerKind::random;
  std::string endpoint;    // remote only
  std::string model_path;  // lexical only
  std::uint64_t seed = 0;  // random kinds

  // endpoint is set iff remote, model_path iff lexical.
  void validate() const;
  std::string id() const;
};

// Scores (query, candidate) pairs independently. Implementations are safe to
// call from several threads at once.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::vector<RelevanceScore> score_batch(const Document& doc, const Sentence& query,
                                                  std::span<const Candidate> candidates) const = 0;
};

// Uniform scores keyed on (seed, doc, query, candidate): repeated calls agree.
class RandomScorer : public Scorer {
 public:
  explicit RandomScorer(std::uint64_t seed) : seed_(seed) {}
  std::vector<RelevanceScore> score_batch(const Document& doc, const Sentence& query,
                                          std::span<const Candidate> candidates) const override;

 private:
  std::uint64_t seed_;
};

// Client for the scoring protocol:
//   POST <endpoint>/v1/score {"pairs":[{"query":...,"context":...}]}
//     -> {"scores":[...]}
//   GET  <endpoint>/v1/health -> {"status":"ok"}
class RemoteScorer : public Scorer {
 public:
  static constexpr std::size_t kBatchSize = 32;

  explicit RemoteScorer(const std::string& endpoint, http::RetryPolicy retry = {},
                        std::size_t pool_size = 4);

  std::vector<RelevanceScore> score_batch(const Document& doc, const Sentence& query,
                                          std::span<const Candidate> candidates) const override;
  // Scores raw text pairs; used by the CLI and by score_batch.
  std::vector<RelevanceScore> score_texts(std::string_view query,
                                          std::span<const std::string> contexts) const;
  // Throws TransportError/ProtocolError when the service is not healthy.
  void check_health() const;
  std::string url() const { return client_->endpoint().url(); }

 private:
  std::unique_ptr<http::JsonClient> client_;
};

// ---------------------------------------------------------------------------
// Lexical scorer: logistic regression over five pair features.

inline constexpr std::size_t kLexicalFeatures = 5;
using FeatureVector = std::array<double, kLexicalFeatures>;

inline constexpr std::array<std::string_view, kLexicalFeatures> kLexicalFeatureNames = {
    "token_overlap", "entity_hit", "shared_nouns", "context_length", "bm25"};

// Collection statistics for the pairwise BM25 feature.
struct TermStats {
  std::size_t sentence_count = 0;
  double average_length = 1.0;
  Bm25Params params;
  std::unordered_map<std::string, std::size_t> df;

  double idf(const std::string& term) const;
};

// Proper-noun-like tokens: capitalized words outside the closed-class list.
std::vector<std::string> entity_like_tokens(std::span<const std::string> tokens);

FeatureVector lexical_features(const TermStats& stats, std::span<const std::string> query,
                               std::span<const std::string> context);

// Standardized design matrix stored column-major for the vector kernels.
struct Design {
  std::size_t rows = 0;
  std::array<std::vector<double>, kLexicalFeatures> columns;
  std::vector<double> labels;
};

// Parameters are laid out as [w_0 .. w_4, bias].
inline constexpr std::size_t kLogisticParams = kLexicalFeatures + 1;
using LogisticParams = std::array<double, kLogisticParams>;

// Mean binary cross-entropy and its analytic gradient.
double logistic_loss(const LogisticParams& params, const Design& design);
LogisticParams logistic_gradient(const LogisticParams& params, const Design& design);

struct LexicalModel {
  TermStats stats;
  FeatureVector mean{};
  FeatureVector scale{};  // standard deviation, 1 for constant features
  LogisticParams params{};

  double predict(std::span<const std::string> query, std::span<const std::string> context) const;
  double predict_features(const FeatureVector& raw) const;

  void save(const std::string& path) const;
  static LexicalModel load(const std::string& path);
};

struct LexicalTrainOptions {
  std::size_t epochs = 300;
  double learning_rate = 0.5;
};

// Full-batch gradient descent on the mean cross-entropy. Throws Error when
// the dataset does not contain both labels.
LexicalModel train_lexical_model(std::span<const RetrievalExample> dataset,
                                 LexicalTrainOptions options = {});

// Trains and writes the model to `model_path`, which is returned.
std::string train_lexical_scorer(std::span<const RetrievalExample> dataset, std::size_t epochs,
                                 double learning_rate, const std::string& model_path);

class LexicalScorer : public Scorer {
 public:
  explicit LexicalScorer(LexicalModel model) : model_(std::move(model)) {}
  std::vector<RelevanceScore> score_batch(const Document& doc, const Sentence& query,
                                          std::span<const Candidate> candidates) const override;
  const LexicalModel& model() const { return model_; }

 private:
  LexicalModel model_;
};

std::unique_ptr<Scorer> make_scorer(const ScorerSpec& spec, http::RetryPolicy retry = {});

// Checks the batch contract (non-empty input, one in-range score per
// candidate) around scorer.score_batch.
std::vector<RelevanceScore> score_batch(const Scorer& scorer, const Document& doc,
                                        const Sentence& query,
                                        std::span<const Candidate> candidates);

// ---------------------------------------------------------------------------
// Selection and assembly

// k best candidates by score, ties by ascending sentence index.
std::vector<Candidate> rank_topk(std::span<const Candidate> candidates,
                                 std::span<const RelevanceScore> scores, std::size_t k);

using PoolBySource = std::array<std::vector<Candidate>, 4>;
PoolBySource group_by_source(std::span<const Candidate> pool);

// floor(k/4) per source plus one extra for the first k mod 4 sources (bm25,
// samenoun, before, after); shortfalls are backfilled uniformly from the
// candidates not yet chosen. Result sorted by sentence index.
std::vector<Candidate> bucket_random_topk(const PoolBySource& pool, std::size_t k,
                                          std::uint64_t seed);

struct AssembledContext {
  // Strictly increasing document indices, query included once.
  std::vector<SentenceRef> sentences;
  std::size_t query_position = 0;
};

// Throws ContractViolation on duplicates or when the query is selected.
AssembledContext assemble_context(const Sentence& query, std::span<const Candidate> selected);

}  // namespace docctx
