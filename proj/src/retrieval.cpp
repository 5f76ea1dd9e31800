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

#include "docctx/retrieval.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "docctx/error.hpp"
#include "docctx/kernels.hpp"
#include "docctx/rng.hpp"
#include "docctx/text.hpp"

namespace docctx {

std::string_view to_string(Source s) {
  switch (s) {
    case Source::bm25:
      return "bm25";
    case Source::samenoun:
      return "samenoun";
    case Source::before:
      return "before";
    case Source::after:
      return "after";
  }
  return "?";
}

std::optional<Source> parse_source(std::string_view s) {
  for (Source src : kSources) {
    if (to_string(src) == s) return src;
  }
  return std::nullopt;
}

std::string_view to_string(ContextWindow w) {
  return w == ContextWindow::first_chapter ? "chapter" : "book";
}

std::optional<ContextWindow> parse_window(std::string_view s) {
  if (s == "chapter" || s == "first_chapter") return ContextWindow::first_chapter;
  if (s == "book" || s == "full_book") return ContextWindow::full_book;
  return std::nullopt;
}

WindowRange window_range(const Document& doc, ContextWindow window) {
  if (window == ContextWindow::first_chapter) return {0, doc.first_chapter_end};
  return {0, doc.sentences.size()};
}

std::vector<std::string> bm25_terms(const Sentence& s) {
  std::vector<std::string> terms;
  terms.reserve(s.tokens.size());
  for (const auto& t : s.tokens) {
    if (text::has_alnum(t.text)) terms.push_back(text::to_lower_ascii(t.text));
  }
  return terms;
}

// ---------------------------------------------------------------------------
// BM25

Bm25Index Bm25Index::build(const Document& doc, ContextWindow window, Bm25Params params) {
  if (params.k1 < 0.0 || params.b < 0.0 || params.b > 1.0) {
    throw ContractViolation("BM25 parameters out of range (need k1 >= 0, 0 <= b <= 1)");
  }
  Bm25Index idx;
  idx.doc_id_ = doc.doc_id;
  idx.range_ = window_range(doc, window);
  idx.params_ = params;
  if (idx.range_.size() == 0) throw Error(doc.doc_id + ": empty retrieval window");

  std::vector<std::unordered_map<std::string, std::size_t>> tfs(idx.range_.size());
  idx.lengths_.resize(idx.range_.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < idx.range_.size(); ++i) {
    auto terms = bm25_terms(doc.sentences[idx.range_.begin + i]);
    idx.lengths_[i] = terms.size();
    total += terms.size();
    for (auto& t : terms) ++tfs[i][std::move(t)];
  }
  idx.avg_length_ = static_cast<double>(total) / static_cast<double>(idx.range_.size());
  // Only reachable when no sentence has an index term; no posting then exists.
  const double avg = idx.avg_length_ > 0.0 ? idx.avg_length_ : 1.0;

  for (std::size_t i = 0; i < tfs.size(); ++i) {
    const double norm =
        params.k1 * (1.0 - params.b + params.b * static_cast<double>(idx.lengths_[i]) / avg);
    // Sorted so postings (and float summation) do not depend on hash order.
    std::vector<std::pair<std::string, std::size_t>> sorted(tfs[i].begin(), tfs[i].end());
    std::sort(sorted.begin(), sorted.end());
    for (auto& [term, count] : sorted) {
      auto& p = idx.postings_[term];
      p.sentence.push_back(static_cast<std::uint32_t>(i));
      p.tf.push_back(static_cast<double>(count));
      p.len_norm.push_back(norm);
    }
  }
  return idx;
}

std::size_t Bm25Index::length(std::size_t sentence_index) const {
  return lengths_.at(sentence_index - range_.begin);
}

std::size_t Bm25Index::document_frequency(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.sentence.size();
}

double Bm25Index::idf(const std::string& term) const {
  const double n = static_cast<double>(sentence_count());
  const double df = static_cast<double>(document_frequency(term));
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<double> Bm25Index::score_all(const Sentence& query) const {
  std::vector<double> scores(sentence_count(), 0.0);
  auto terms = bm25_terms(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

  std::vector<double> weights;
  for (const auto& term : terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const Postings& p = it->second;
    weights.resize(p.tf.size());
    kernels::bm25_term_weights(p.tf, p.len_norm, idf(term), params_.k1, weights);
    for (std::size_t j = 0; j < weights.size(); ++j) scores[p.sentence[j]] += weights[j];
  }
  return scores;
}

std::vector<Candidate> bm25_topn(const Bm25Index& index, const Sentence& query, std::size_t n) {
  if (n == 0) throw ContractViolation("bm25_topn: n must be >= 1");
  const auto scores = index.score_all(query);
  const WindowRange r = index.range();
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::size_t sent = r.begin + i;
    const bool is_query = query.doc_id == index.doc_id() && query.index == sent;
    if (scores[i] > 0.0 && !is_query) order.push_back(i);
  }
  const std::size_t keep = std::min(n, order.size());
  // Scores that differ only by summation rounding count as ties, which keep
  // ascending index order (stable sort over an ascending list).
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b] + kBm25TieTolerance * std::max(1.0, std::abs(scores[b]));
  });
  std::vector<Candidate> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.push_back({{index.doc_id(), r.begin + order[i]}, Source::bm25, scores[order[i]]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nouns

namespace {

constexpr std::array<std::string_view, 6> kNounSuffixes = {"tion", "ment", "ness",
                                                          "ity",  "er",   "or"};

// Closed-class words plus a few frequent -er/-or function words.
constexpr std::string_view kStopwords[] = {
    "a",       "about",   "above",   "after",    "again",   "against", "ah",      "all",
    "also",    "am",      "among",   "an",       "and",     "another", "any",     "are",
    "as",      "at",      "be",      "been",     "before",  "behind",  "below",   "between",
    "beyond",  "both",    "but",     "by",       "can",     "could",   "did",     "do",
    "does",    "during",  "each",    "either",   "else",    "ever",    "every",   "few",
    "for",     "from",    "further", "had",      "has",     "have",    "he",      "her",
    "here",    "hers",    "him",     "his",      "how",     "however", "i",       "if",
    "in",      "into",    "is",      "it",       "its",     "just",    "later",   "least",
    "less",    "many",    "may",     "me",       "might",   "more",    "most",    "much",
    "must",    "my",      "neither", "never",    "no",      "nor",     "not",     "now",
    "of",      "oh",      "on",      "once",     "only",    "onto",    "or",      "other",
    "our",     "over",    "per",     "rather",   "shall",   "she",     "should",  "since",
    "so",      "some",    "sooner",  "than",     "that",    "the",     "their",   "them",
    "then",    "there",   "these",   "they",     "this",    "those",   "through", "to",
    "together", "too",    "toward",  "towards",  "under",   "until",   "up",      "upon",
    "us",      "very",    "was",     "we",       "were",    "what",    "whatever", "when",
    "whenever", "where",  "whether", "which",    "while",   "who",     "whom",    "whose",
    "why",     "will",    "with",    "within",   "without", "would",   "yes",     "yet",
    "you",     "your",    "yours",   "whoever",  "wherever", "hither", "thither",
};

bool is_word(std::string_view tok) {
  if (tok.empty()) return false;
  for (char c : tok) {
    auto u = static_cast<unsigned char>(c);
    if (!(std::isalpha(u) || u >= 0x80 || c == '-' || c == '\'')) return false;
  }
  return std::isalpha(static_cast<unsigned char>(tok.front())) ||
         static_cast<unsigned char>(tok.front()) >= 0x80;
}

// Position of the first word token, or size() if none.
std::size_t first_word(const Sentence& s) {
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (text::has_alnum(s.tokens[i].text)) return i;
  }
  return s.tokens.size();
}

bool has_noun_suffix(std::string_view lower) {
  for (std::string_view suf : kNounSuffixes) {
    if (lower.size() > suf.size() + 1 && lower.substr(lower.size() - suf.size()) == suf) {
      return true;
    }
  }
  return false;
}

}  // namespace

bool HeuristicNounTagger::is_stopword(std::string_view lower) {
  return std::find(std::begin(kStopwords), std::end(kStopwords), lower) != std::end(kStopwords);
}

HeuristicNounTagger::HeuristicNounTagger(const Document& doc) {
  for (const auto& s : doc.sentences) {
    const std::size_t first = first_word(s);
    for (std::size_t i = first + 1; i < s.tokens.size(); ++i) {
      const auto& t = s.tokens[i].text;
      if (is_word(t) && text::starts_upper(t)) corroborated_.insert(t);
    }
  }
}

std::set<std::string> HeuristicNounTagger::noun_set(const Sentence& s) const {
  std::set<std::string> nouns;
  const std::size_t first = first_word(s);
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const std::string& t = s.tokens[i].text;
    if (!is_word(t)) continue;
    const std::string lower = text::to_lower_ascii(t);
    if (is_stopword(lower)) continue;
    if (text::starts_upper(t)) {
      if (i != first || corroborated_.contains(t)) nouns.insert(lower);
    } else if (has_noun_suffix(lower)) {
      nouns.insert(lower);
    }
  }
  return nouns;
}

std::set<std::string> noun_set(const Sentence& s, const NounTagger& tagger) {
  return tagger.noun_set(s);
}

NounIndex NounIndex::build(const Document& doc, ContextWindow window, const NounTagger& tagger) {
  NounIndex idx;
  idx.doc_id_ = doc.doc_id;
  idx.range_ = window_range(doc, window);
  idx.tagger_ = &tagger;
  for (std::size_t i = idx.range_.begin; i < idx.range_.end; ++i) {
    for (const auto& noun : tagger.noun_set(doc.sentences[i])) idx.postings_[noun].push_back(i);
  }
  return idx;
}

std::vector<std::size_t> NounIndex::matches(const Sentence& query) const {
  std::vector<std::size_t> out;
  for (const auto& noun : tagger_->noun_set(query)) {
    auto it = postings_.find(noun);
    if (it != postings_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (query.doc_id == doc_id_) std::erase(out, query.index);
  return out;
}

std::vector<Candidate> samenoun_topn(const NounIndex& index, const Sentence& query, std::size_t n,
                                     std::uint64_t rng_seed) {
  if (n == 0) throw ContractViolation("samenoun_topn: n must be >= 1");
  const auto matches = index.matches(query);
  Rng rng(derive_seed(rng_seed, std::string_view{"samenoun"}, std::string_view{query.doc_id},
                      query.index));
  std::vector<Candidate> out;
  const auto picks = rng.sample_without_replacement(matches.size(), n);
  for (std::size_t rank = 0; rank < picks.size(); ++rank) {
    out.push_back({{index.doc_id(), matches[picks[rank]]},
                   Source::samenoun,
                   1.0 / static_cast<double>(rank + 1)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Surrounding and pooling

Surrounding surrounding(const Document& doc, ContextWindow window, const Sentence& query,
                        std::size_t n_each_side) {
  if (n_each_side == 0) throw ContractViolation("surrounding: n must be >= 1");
  const WindowRange r = window_range(doc, window);
  Surrounding out;
  const std::size_t i = query.index;
  const std::size_t lo = i >= r.begin + n_each_side ? i - n_each_side : r.begin;
  for (std::size_t j = lo; j < i && j < r.end; ++j) {
    out.before.push_back({{doc.doc_id, j}, Source::before, 1.0 / static_cast<double>(i - j)});
  }
  const std::size_t hi = std::min(r.end, i + n_each_side + 1);
  for (std::size_t j = std::max(i + 1, r.begin); j < hi; ++j) {
    out.after.push_back({{doc.doc_id, j}, Source::after, 1.0 / static_cast<double>(j - i)});
  }
  return out;
}

RetrievalContext::RetrievalContext(const Document& doc, ContextWindow window, Bm25Params params,
                                   std::shared_ptr<const NounTagger> tagger)
    : doc_(&doc),
      window_(window),
      tagger_(tagger ? std::move(tagger) : std::make_shared<HeuristicNounTagger>(doc)),
      bm25_(Bm25Index::build(doc, window, params)),
      nouns_(NounIndex::build(doc, window, *tagger_)) {}

std::vector<Candidate> pool_candidates(const RetrievalContext& ctx, const Sentence& query,
                                       std::size_t n, std::uint64_t rng_seed) {
  if (n == 0) throw ContractViolation("pool_candidates: n must be >= 1");
  auto around = surrounding(ctx.document(), ctx.window(), query, n);
  std::vector<Candidate> all = bm25_topn(ctx.bm25(), query, n);
  auto same = samenoun_topn(ctx.nouns(), query, n, rng_seed);
  all.insert(all.end(), same.begin(), same.end());
  all.insert(all.end(), around.before.begin(), around.before.end());
  all.insert(all.end(), around.after.begin(), around.after.end());

  std::vector<Candidate> pool;
  std::set<std::size_t> seen;
  for (auto& c : all) {
    if (c.sentence.index == query.index) continue;
    if (seen.insert(c.sentence.index).second) pool.push_back(std::move(c));
  }
  std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    return a.sentence.index < b.sentence.index;
  });
  return pool;
}

std::vector<Candidate> pool_candidates(const Document& doc, ContextWindow window,
                                       const Sentence& query, std::size_t n,
                                       std::uint64_t rng_seed, Bm25Params params) {
  RetrievalContext ctx(doc, window, params);
  return pool_candidates(ctx, query, n, rng_seed);
}

bool is_standard_pool_size(std::size_t n) {
  return n == 4 || n == 8 || n == 12 || n == 16 || n == 24;
}

void write_pool_records(std::ostream& out, const Sentence& query,
                        std::span<const Candidate> pool) {
  for (const auto& c : pool) {
    nlohmann::ordered_json j;
    j["doc_id"] = query.doc_id;
    j["query_index"] = query.index;
    j["candidate_index"] = c.sentence.index;
    j["source"] = to_string(c.source);
    j["heuristic_score"] = c.heuristic_score;
    out << j.dump() << '\n';
  }
}

}  // namespace docctx
