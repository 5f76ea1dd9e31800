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
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "docctx/corpus.hpp"

namespace docctx {

// Candidate provenance. Declaration order is the dedup priority when the
// same sentence is proposed by several heuristics.
enum class Source : std::uint8_t { bm25, samenoun, before, after };

inline constexpr Source kSources[] = {Source::bm25, Source::samenoun, Source::before,
                                      Source::after};

std::string_view to_string(Source s);
std::optional<Source> parse_source(std::string_view s);

struct Candidate {
  SentenceRef sentence;
  Source source = Source::bm25;
  // BM25 score for bm25; 1/(rank+1) for the rank-based heuristics.
  double heuristic_score = 0.0;
};

enum class ContextWindow { first_chapter, full_book };

std::string_view to_string(ContextWindow w);
std::optional<ContextWindow> parse_window(std::string_view s);

// Sentence index range [begin, end) a window covers in a document.
struct WindowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  std::size_t size() const { return end - begin; }
};

WindowRange window_range(const Document& doc, ContextWindow window);

struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;
};

// Index terms of a sentence: lowercased tokens that contain a letter or digit.
std::vector<std::string> bm25_terms(const Sentence& s);

// Okapi BM25 over the sentences of one document window, with the
// non-negative IDF ln(1 + (N - df + 0.5) / (df + 0.5)).
class Bm25Index {
 public:
  // Throws Error on an empty window or ContractViolation on bad parameters.
  static Bm25Index build(const Document& doc, ContextWindow window, Bm25Params params = {});

  const std::string& doc_id() const { return doc_id_; }
  WindowRange range() const { return range_; }
  const Bm25Params& params() const { return params_; }
  std::size_t sentence_count() const { return lengths_.size(); }
  double average_length() const { return avg_length_; }
  std::size_t length(std::size_t sentence_index) const;
  std::size_t document_frequency(const std::string& term) const;
  double idf(const std::string& term) const;

  // Score of every window sentence (position i is sentence range().begin + i)
  // against the distinct terms of `query`.
  std::vector<double> score_all(const Sentence& query) const;

 private:
  struct Postings {
    std::vector<std::uint32_t> sentence;  // window-relative
    std::vector<double> tf;
    std::vector<double> len_norm;  // k1 * (1 - b + b * |s| / avglen)
  };

  std::string doc_id_;
  WindowRange range_;
  Bm25Params params_;
  double avg_length_ = 0.0;
  std::vector<std::size_t> lengths_;
  std::unordered_map<std::string, Postings> postings_;
};

// Relative gap below which two BM25 scores are treated as equal.
inline constexpr double kBm25TieTolerance = 1e-12;

// At most n positive-scoring sentences, score descending, ties by index.
// The query sentence is never returned.
std::vector<Candidate> bm25_topn(const Bm25Index& index, const Sentence& query, std::size_t n);

class NounTagger {
 public:
  virtual ~NounTagger() = default;
  // Lowercased nouns of the sentence.
  virtual std::set<std::string> noun_set(const Sentence& s) const = 0;
};

// Dependency-free stand-in for a statistical POS tagger. Nouns are
// capitalized words that are not sentence-initial, and lowercase words with
// a noun suffix (-tion, -ment, -ness, -ity, -er, -or); closed-class words
// never count. A sentence-initial capitalized word counts only if the same
// form appears capitalized mid-sentence somewhere in the document.
class HeuristicNounTagger : public NounTagger {
 public:
  HeuristicNounTagger() = default;
  explicit HeuristicNounTagger(const Document& doc);

  std::set<std::string> noun_set(const Sentence& s) const override;

  static bool is_stopword(std::string_view lower);

 private:
  std::set<std::string> corroborated_;
};

std::set<std::string> noun_set(const Sentence& s, const NounTagger& tagger);

// Noun sets of one document window with a noun -> sentences inverted list.
class NounIndex {
 public:
  static NounIndex build(const Document& doc, ContextWindow window, const NounTagger& tagger);

  const std::string& doc_id() const { return doc_id_; }
  WindowRange range() const { return range_; }
  // Window sentences sharing at least one noun with the query, ascending,
  // query excluded.
  std::vector<std::size_t> matches(const Sentence& query) const;

 private:
  std::string doc_id_;
  WindowRange range_;
  const NounTagger* tagger_ = nullptr;
  std::unordered_map<std::string, std::vector<std::size_t>> postings_;
};

// Uniform sample of n matches without replacement, in draw order. The stream
// depends only on (rng_seed, doc_id, query index).
std::vector<Candidate> samenoun_topn(const NounIndex& index, const Sentence& query,
                                     std::size_t n, std::uint64_t rng_seed);

struct Surrounding {
  std::vector<Candidate> before;
  std::vector<Candidate> after;
};

// Up to n sentences on each side of the query, clipped to the window, in
// document order.
Surrounding surrounding(const Document& doc, ContextWindow window, const Sentence& query,
                        std::size_t n_each_side);

// Per-document state reused across all queries of that document.
class RetrievalContext {
 public:
  RetrievalContext(const Document& doc, ContextWindow window, Bm25Params params = {},
                   std::shared_ptr<const NounTagger> tagger = nullptr);

  const Document& document() const { return *doc_; }
  ContextWindow window() const { return window_; }
  const Bm25Index& bm25() const { return bm25_; }
  const NounIndex& nouns() const { return nouns_; }
  const NounTagger& tagger() const { return *tagger_; }

 private:
  const Document* doc_;
  ContextWindow window_;
  std::shared_ptr<const NounTagger> tagger_;
  Bm25Index bm25_;
  NounIndex nouns_;
};

// Union of bm25, samenoun, before and after (n each), deduplicated by
// sentence with the first source in priority order kept, sorted by index.
std::vector<Candidate> pool_candidates(const RetrievalContext& ctx, const Sentence& query,
                                       std::size_t n, std::uint64_t rng_seed);
std::vector<Candidate> pool_candidates(const Document& doc, ContextWindow window,
                                       const Sentence& query, std::size_t n,
                                       std::uint64_t rng_seed, Bm25Params params = {});

// Pool sizes exercised by the original experiments; others are allowed.
bool is_standard_pool_size(std::size_t n);

// One JSON object per line: doc_id, query_index, candidate_index, source,
// heuristic_score.
void write_pool_records(std::ostream& out, const Sentence& query,
                        std::span<const Candidate> pool);

}  // namespace docctx
