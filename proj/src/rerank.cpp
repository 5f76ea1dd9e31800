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

#include "docctx/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "docctx/error.hpp"
#include "docctx/rng.hpp"

namespace docctx {

RelevanceScore::RelevanceScore(double v) : value_(v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ProtocolError("relevance score " + std::to_string(v) + " outside [0, 1]");
  }
}

std::string_view to_string(ScorerKind k) {
  switch (k) {
    case ScorerKind::random:
      return "random";
    case ScorerKind::bucket_random:
      return "bucket_random";
    case ScorerKind::lexical:
      return "lexical";
    case ScorerKind::remote:
      return "remote";
  }
  return "?";
}

std::optional<ScorerKind> parse_scorer_kind(std::string_view s) {
  for (auto k : {ScorerKind::random, ScorerKind::bucket_random, ScorerKind::lexical,
                 ScorerKind::remote}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

void ScorerSpec::validate() const {
  if ((kind == ScorerKind::remote) != !endpoint.empty()) {
    throw ConfigError("scorer: endpoint must be set exactly for the remote kind");
  }
  if ((kind == ScorerKind::lexical) != !model_path.empty()) {
    throw ConfigError("scorer: model_path must be set exactly for the lexical kind");
  }
}

std::string ScorerSpec::id() const {
  switch (kind) {
    case ScorerKind::random:
    case ScorerKind::bucket_random:
      return std::string(to_string(kind)) + "@" + std::to_string(seed);
    case ScorerKind::lexical:
    case ScorerKind::remote:
      return std::string(to_string(kind));
  }
  return "?";
}

std::vector<RelevanceScore> RandomScorer::score_batch(const Document& doc, const Sentence& query,
                                                      std::span<const Candidate> candidates) const {
  std::vector<RelevanceScore> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    Rng rng(derive_seed(seed_, std::string_view{"random-score"}, std::string_view{doc.doc_id},
                        query.index, c.sentence.index));
    out.emplace_back(rng.uniform_real());
  }
  return out;
}

RemoteScorer::RemoteScorer(const std::string& endpoint, http::RetryPolicy retry,
                           std::size_t pool_size)
    : client_(std::make_unique<http::JsonClient>(http::parse_endpoint(endpoint), retry,
                                                 pool_size)) {}

void RemoteScorer::check_health() const {
  auto j = client_->get("/v1/health");
  if (!j.is_object() || j.value("status", "") != "ok") {
    throw ProtocolError(url() + "/v1/health: unexpected answer " + j.dump());
  }
}

std::vector<RelevanceScore> RemoteScorer::score_texts(std::string_view query,
                                                      std::span<const std::string> contexts) const {
  std::vector<RelevanceScore> out;
  out.reserve(contexts.size());
  for (std::size_t begin = 0; begin < contexts.size(); begin += kBatchSize) {
    const std::size_t end = std::min(contexts.size(), begin + kBatchSize);
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t i = begin; i < end; ++i) {
      pairs.push_back({{"query", query}, {"context", contexts[i]}});
    }
    nlohmann::json body = {{"pairs", std::move(pairs)}};
    auto res = client_->post("/v1/score", body);
    const std::string where = url() + "/v1/score";
    if (!res.is_object() || !res.contains("scores") || !res["scores"].is_array()) {
      throw ProtocolError(where + ": response lacks a \"scores\" array");
    }
    const auto& scores = res["scores"];
    if (scores.size() != end - begin) {
      throw ProtocolError(where + ": expected " + std::to_string(end - begin) + " scores, got " +
                          std::to_string(scores.size()));
    }
    for (const auto& s : scores) {
      if (!s.is_number()) throw ProtocolError(where + ": non-numeric score");
      try {
        out.emplace_back(s.get<double>());
      } catch (const ProtocolError& e) {
        throw ProtocolError(where + ": " + e.what());
      }
    }
  }
  return out;
}

std::vector<RelevanceScore> RemoteScorer::score_batch(const Document& doc, const Sentence& query,
                                                      std::span<const Candidate> candidates) const {
  std::vector<std::string> contexts;
  contexts.reserve(candidates.size());
  for (const auto& c : candidates) contexts.push_back(doc.sentences.at(c.sentence.index).text());
  return score_texts(query.text(), contexts);
}

std::vector<RelevanceScore> LexicalScorer::score_batch(const Document& doc, const Sentence& query,
                                                       std::span<const Candidate> candidates) const {
  const auto q = query.words();
  std::vector<RelevanceScore> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    const auto ctx = doc.sentences.at(c.sentence.index).words();
    out.emplace_back(model_.predict(q, ctx));
  }
  return out;
}

std::unique_ptr<Scorer> make_scorer(const ScorerSpec& spec, http::RetryPolicy retry) {
  spec.validate();
  switch (spec.kind) {
    case ScorerKind::random:
    case ScorerKind::bucket_random:
      return std::make_unique<RandomScorer>(spec.seed);
    case ScorerKind::lexical:
      return std::make_unique<LexicalScorer>(LexicalModel::load(spec.model_path));
    case ScorerKind::remote:
      return std::make_unique<RemoteScorer>(spec.endpoint, retry);
  }
  throw ConfigError("unknown scorer kind");
}

std::vector<RelevanceScore> score_batch(const Scorer& scorer, const Document& doc,
                                        const Sentence& query,
                                        std::span<const Candidate> candidates) {
  if (candidates.empty()) throw ContractViolation("score_batch: no candidates");
  auto scores = scorer.score_batch(doc, query, candidates);
  if (scores.size() != candidates.size()) {
    throw ProtocolError("score_batch: " + std::to_string(scores.size()) + " scores for " +
                        std::to_string(candidates.size()) + " candidates");
  }
  return scores;
}

// ---------------------------------------------------------------------------

std::vector<Candidate> rank_topk(std::span<const Candidate> candidates,
                                 std::span<const RelevanceScore> scores, std::size_t k) {
  if (k == 0) throw ContractViolation("rank_topk: k must be >= 1");
  if (scores.size() != candidates.size()) {
    throw ContractViolation("rank_topk: score/candidate count mismatch");
  }
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t keep = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double sa = scores[a].value();
                      const double sb = scores[b].value();
                      if (sa != sb) return sa > sb;
                      return candidates[a].sentence.index < candidates[b].sentence.index;
                    });
  std::vector<Candidate> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(candidates[order[i]]);
  return out;
}

PoolBySource group_by_source(std::span<const Candidate> pool) {
  PoolBySource out;
  for (const auto& c : pool) out[static_cast<std::size_t>(c.source)].push_back(c);
  return out;
}

namespace {

void sort_by_index(std::vector<Candidate>& v) {
  std::sort(v.begin(), v.end(), [](const Candidate& a, const Candidate& b) {
    return a.sentence.index < b.sentence.index;
  });
}

}  // namespace

std::vector<Candidate> bucket_random_topk(const PoolBySource& pool, std::size_t k,
                                          std::uint64_t seed) {
  if (k == 0) throw ContractViolation("bucket_random_topk: k must be >= 1");
  Rng rng(seed);
  const std::size_t base = k / 4;
  const std::size_t extra = k % 4;
  std::vector<Candidate> chosen;
  std::vector<Candidate> leftover;
  std::size_t deficit = 0;
  for (std::size_t b = 0; b < pool.size(); ++b) {
    const std::size_t quota = base + (b < extra ? 1 : 0);
    const auto& bucket = pool[b];
    auto picks = rng.sample_without_replacement(bucket.size(), quota);
    std::vector<bool> taken(bucket.size(), false);
    for (std::size_t p : picks) {
      taken[p] = true;
      chosen.push_back(bucket[p]);
    }
    deficit += quota - picks.size();
    for (std::size_t i = 0; i < bucket.size(); ++i) {
      if (!taken[i]) leftover.push_back(bucket[i]);
    }
  }
  if (deficit > 0) {
    sort_by_index(leftover);
    for (std::size_t p : rng.sample_without_replacement(leftover.size(), deficit)) {
      chosen.push_back(leftover[p]);
    }
  }
  sort_by_index(chosen);
  return chosen;
}

AssembledContext assemble_context(const Sentence& query, std::span<const Candidate> selected) {
  std::set<std::size_t> seen;
  for (const auto& c : selected) {
    if (c.sentence.doc_id != query.doc_id) {
      throw ContractViolation("assemble_context: candidate from another document");
    }
    if (c.sentence.index == query.index) {
      throw ContractViolation("assemble_context: query selected as its own context");
    }
    if (!seen.insert(c.sentence.index).second) {
      throw ContractViolation("assemble_context: duplicate sentence " +
                              std::to_string(c.sentence.index));
    }
  }
  seen.insert(query.index);
  AssembledContext ctx;
  ctx.sentences.reserve(seen.size());
  for (std::size_t idx : seen) {
    if (idx == query.index) ctx.query_position = ctx.sentences.size();
    ctx.sentences.push_back({query.doc_id, idx});
  }
  return ctx;
}

}  // namespace docctx
