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
#include <set>
#include <string>
#include <vector>

#include "docctx/corpus.hpp"
#include "docctx/nerbridge.hpp"
#include "docctx/retrieval.hpp"
#include "docctx/rng.hpp"

namespace docctx::testing {

// "Frodo/B-PER ran home ." -> tokens; words without a "/TAG" suffix are O.
Sentence make_sentence(const std::string& doc_id, std::size_t index, const std::string& spec,
                       bool annotated);

// Sentences [0, annotated) are annotated; chapter_end defaults to annotated
// (or to the sentence count when nothing is annotated).
Document make_doc(const std::string& doc_id, const std::vector<std::string>& specs,
                  std::size_t annotated, std::size_t chapter_end = 0);

// Random document over a small vocabulary with capitalized names mixed in.
Document random_document(Rng& rng, const std::string& doc_id, std::size_t min_sentences,
                         std::size_t max_sentences);

// Random tag sequence drawn from all seven tags.
std::vector<Tag> random_tags(Rng& rng, std::size_t length);
// Random well-formed BIO sequence (every I continues a same-class run).
std::vector<Tag> random_bio(Rng& rng, std::size_t length);

// ---------------------------------------------------------------------------
// Brute-force oracles, written independently of the library internals.

// Okapi BM25 of `query` against every window sentence, recomputing term
// frequencies and document frequencies by direct scanning.
std::vector<double> bm25_oracle_scores(const Document& doc, ContextWindow window,
                                       const Sentence& query, Bm25Params params = {});

// Exhaustive top-n: all positive scores, query excluded, sorted by score
// then index.
std::vector<std::pair<std::size_t, double>> bm25_oracle_topn(const Document& doc,
                                                             ContextWindow window,
                                                             const Sentence& query, std::size_t n,
                                                             Bm25Params params = {});

// Set-union pool built from the individual heuristics, keeping the
// highest-priority source per sentence.
std::map<std::size_t, Source> pool_union_oracle(const RetrievalContext& ctx,
                                                const Sentence& query, std::size_t n,
                                                std::uint64_t seed);

// ---------------------------------------------------------------------------
// Constructed corpus where a share of query names can only be recognized by
// the gazetteer predictor when the right context sentence is retrieved.
struct BenefitCorpus {
  std::vector<Document> docs;
  Gazetteer gazetteer;
  std::size_t hidden_mentions = 0;
};
BenefitCorpus make_benefit_corpus();

// Generates a dataset with the template LLM and trains the lexical scorer
// on its train split. Returns the model path.
std::string train_mock_lexical_model(const std::vector<Document>& docs, std::uint64_t seed,
                                     const std::filesystem::path& path);

// Writes docs as a loadable corpus directory (<id>.conll + <id>.txt).
void write_corpus_dir(const std::filesystem::path& dir, const std::vector<Document>& docs);
void write_gazetteer(const std::filesystem::path& path, const Gazetteer& g);

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

}  // namespace docctx::testing
