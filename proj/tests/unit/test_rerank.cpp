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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "docctx/error.hpp"
#include "docctx/rerank.hpp"
#include "fixtures.hpp"
#include "stub_server.hpp"

using namespace docctx;
using docctx::testing::make_doc;
using docctx::testing::ScoreStub;
using docctx::testing::StubServer;

namespace {

Candidate cand(std::size_t index, Source src = Source::bm25) { return {{"d", index}, src, 0.0}; }

std::vector<RelevanceScore> scores_of(std::initializer_list<double> xs) {
  std::vector<RelevanceScore> out;
  for (double x : xs) out.emplace_back(x);
  return out;
}

std::set<std::size_t> index_set(const std::vector<Candidate>& cs) {
  std::set<std::size_t> out;
  for (const auto& c : cs) out.insert(c.sentence.index);
  return out;
}

http::RetryPolicy fast_retry() {
  http::RetryPolicy r;
  r.initial_backoff = std::chrono::milliseconds(1);
  r.connect_timeout = std::chrono::milliseconds(500);
  r.read_timeout = std::chrono::milliseconds(500);
  return r;
}

Document small_doc() {
  return make_doc("d", {"Croaker ran .", "Elmo hid .", "the rain fell .", "Croaker wept ."}, 4);
}

}  // namespace

TEST_CASE("relevance score range") {
  CHECK_NOTHROW(RelevanceScore(0.0));
  CHECK_NOTHROW(RelevanceScore(1.0));
  CHECK_THROWS_AS(RelevanceScore(1.0000001), ProtocolError);
  CHECK_THROWS_AS(RelevanceScore(-0.1), ProtocolError);
  CHECK_THROWS_AS(RelevanceScore(std::nan("")), ProtocolError);
}

TEST_CASE("ScorerSpec invariants") {
  ScorerSpec s;
  CHECK_NOTHROW(s.validate());
  s.endpoint = "http://x";
  CHECK_THROWS_AS(s.validate(), ConfigError);
  ScorerSpec r{ScorerKind::remote, "", "", 0};
  CHECK_THROWS_AS(r.validate(), ConfigError);
  r.endpoint = "http://127.0.0.1:9";
  CHECK_NOTHROW(r.validate());
  ScorerSpec l{ScorerKind::lexical, "", "", 0};
  CHECK_THROWS_AS(l.validate(), ConfigError);
}

TEST_CASE("random scorer is deterministic under its seed") {
  auto doc = small_doc();
  std::vector<Candidate> cs{cand(1), cand(2), cand(3)};
  RandomScorer a(7), b(7), c(8);
  auto sa = score_batch(a, doc, doc.sentences[0], cs);
  CHECK(sa == score_batch(b, doc, doc.sentences[0], cs));
  CHECK(sa == score_batch(a, doc, doc.sentences[0], cs));
  CHECK_FALSE(sa == score_batch(c, doc, doc.sentences[0], cs));
  for (auto s : sa) CHECK((s.value() >= 0.0 && s.value() <= 1.0));
}

TEST_CASE("checked score_batch rejects an empty candidate list") {
  auto doc = small_doc();
  RandomScorer r(1);
  CHECK_THROWS_AS(score_batch(r, doc, doc.sentences[0], {}), ContractViolation);
}

TEST_CASE("rank_topk") {
  std::vector<Candidate> cs{cand(5), cand(2), cand(9), cand(1)};
  auto top = rank_topk(cs, scores_of({0.9, 0.1, 0.8, 0.8}), 3);
  REQUIRE(top.size() == 3);
  CHECK(top[0].sentence.index == 5);
  CHECK(top[1].sentence.index == 1);
  CHECK(top[2].sentence.index == 9);
  CHECK(rank_topk(cs, scores_of({0.9, 0.1, 0.8, 0.8}), 10).size() == 4);
  std::vector<Candidate> one{cand(3)};
  for (std::size_t k : {1, 2, 8}) CHECK(rank_topk(one, scores_of({0.2}), k).size() == 1);
  CHECK_THROWS_AS(rank_topk(cs, scores_of({0.1}), 2), ContractViolation);
}

TEST_CASE("rank_topk is invariant under strictly monotone transforms") {
  Rng rng(4);
  for (int iter = 0; iter < 500; ++iter) {
    const std::size_t n = 1 + rng.uniform_index(20);
    std::vector<Candidate> cs;
    std::vector<RelevanceScore> s, t;
    for (std::size_t i = 0; i < n; ++i) {
      cs.push_back(cand(i * 3 + rng.uniform_index(3)));
      // Coarse grid so ties occur.
      const double v = static_cast<double>(rng.uniform_index(6)) / 5.0;
      s.emplace_back(v);
      t.emplace_back(std::sqrt(v) * 0.5 + 0.25);
    }
    const std::size_t k = 1 + rng.uniform_index(8);
    auto a = rank_topk(cs, s, k);
    auto b = rank_topk(cs, t, k);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].sentence == b[i].sentence);
  }
}

TEST_CASE("bucket_random_topk quotas") {
  PoolBySource pool;
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t i = 0; i < 3; ++i) pool[s].push_back(cand(s * 10 + i, kSources[s]));
  }
  auto count = [](const std::vector<Candidate>& cs, Source s) {
    return std::count_if(cs.begin(), cs.end(), [&](const Candidate& c) { return c.source == s; });
  };
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto k4 = bucket_random_topk(pool, 4, seed);
    REQUIRE(k4.size() == 4);
    for (auto s : kSources) CHECK(count(k4, s) == 1);

    auto k3 = bucket_random_topk(pool, 3, seed);
    REQUIRE(k3.size() == 3);
    CHECK(count(k3, Source::bm25) == 1);
    CHECK(count(k3, Source::samenoun) == 1);
    CHECK(count(k3, Source::before) == 1);
    CHECK(count(k3, Source::after) == 0);
    for (std::size_t i = 1; i < k3.size(); ++i) CHECK(k3[i - 1].sentence.index < k3[i].sentence.index);
  }
}

TEST_CASE("bucket_random_topk backfills short buckets") {
  PoolBySource pool;
  pool[0] = {cand(1, Source::bm25), cand(2, Source::bm25)};
  pool[2] = {cand(3, Source::before)};
  pool[3] = {cand(4, Source::after), cand(5, Source::after)};
  std::map<std::size_t, int> backfill;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    auto got = bucket_random_topk(pool, 4, seed);
    REQUIRE(got.size() == 4);
    auto idx = index_set(got);
    CHECK(idx.size() == 4);
    CHECK(idx.contains(3));
    // One from bm25, one from after, plus one backfill from the leftovers.
    const int bm25 = static_cast<int>(idx.contains(1)) + static_cast<int>(idx.contains(2));
    const int after = static_cast<int>(idx.contains(4)) + static_cast<int>(idx.contains(5));
    CHECK(bm25 + after == 3);
    CHECK(bm25 >= 1);
    CHECK(after >= 1);
    ++backfill[bm25 == 2 ? 0 : 1];
  }
  // The two leftovers are equally likely to be the backfill.
  CHECK(std::abs(backfill[0] - 200) < 50);
  auto all = bucket_random_topk(pool, 8, 1);
  CHECK(all.size() == 5);
}

TEST_CASE("assemble_context") {
  auto doc = make_doc("d", std::vector<std::string>(50, "x ."), 50);
  const auto& q = doc.sentences[10];
  std::vector<Candidate> sel{cand(42), cand(3)};
  auto ctx = assemble_context(q, sel);
  REQUIRE(ctx.sentences.size() == 3);
  CHECK(ctx.sentences[0].index == 3);
  CHECK(ctx.sentences[1].index == 10);
  CHECK(ctx.sentences[2].index == 42);
  CHECK(ctx.query_position == 1);

  auto bare = assemble_context(q, {});
  CHECK(bare.sentences.size() == 1);
  CHECK(bare.query_position == 0);

  std::vector<Candidate> before{cand(1), cand(2)};
  CHECK(assemble_context(q, before).query_position == 2);

  std::vector<Candidate> dup{cand(1), cand(1)};
  CHECK_THROWS_AS(assemble_context(q, dup), ContractViolation);
  std::vector<Candidate> self{cand(10)};
  CHECK_THROWS_AS(assemble_context(q, self), ContractViolation);
}

TEST_CASE("remote scorer against a stub service") {
  auto doc = make_doc("d", std::vector<std::string>(80, "some words ."), 80);
  ScoreStub stub(0.5);
  RemoteScorer scorer(stub.http.url(), fast_retry());
  CHECK_NOTHROW(scorer.check_health());
  CHECK(stub.health_hits == 1);

  std::vector<Candidate> cs;
  for (std::size_t i = 1; i <= 70; ++i) cs.push_back(cand(i));
  auto scores = score_batch(scorer, doc, doc.sentences[0], cs);
  REQUIRE(scores.size() == 70);
  for (auto s : scores) CHECK(s.value() == 0.5);
  CHECK(stub.score_hits == 3);
  CHECK(stub.max_batch == RemoteScorer::kBatchSize);

  // Uniform scores leave ordering to the index tie-break.
  auto top = rank_topk(cs, scores, 3);
  CHECK(top[0].sentence.index == 1);
  CHECK(top[2].sentence.index == 3);
}

TEST_CASE("remote scorer protocol violations") {
  auto doc = small_doc();
  std::vector<Candidate> cs{cand(1), cand(2)};
  StubServer http;
  http.server().Post("/v1/score", [](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    const std::string q = body["pairs"][0]["query"];
    if (q.find("Croaker") != std::string::npos) {
      docctx::testing::reply_json(res, {{"scores", {0.2, 1.5}}});
    } else {
      docctx::testing::reply_json(res, {{"scores", {0.2}}});
    }
  });
  http.start();
  RemoteScorer scorer(http.url(), fast_retry());
  CHECK_THROWS_AS(scorer.score_batch(doc, doc.sentences[0], cs), ProtocolError);
  CHECK_THROWS_AS(scorer.score_batch(doc, doc.sentences[1], cs), ProtocolError);
}

TEST_CASE("remote scorer retries server errors then succeeds") {
  auto doc = small_doc();
  std::vector<Candidate> cs{cand(1)};
  StubServer http;
  std::atomic<int> hits{0};
  http.server().Post("/v1/score", [&](const httplib::Request&, httplib::Response& res) {
    if (++hits < 3) {
      docctx::testing::reply_json(res, {{"error", "busy"}}, 503);
    } else {
      docctx::testing::reply_json(res, {{"scores", {0.75}}});
    }
  });
  http.start();
  RemoteScorer scorer(http.url(), fast_retry());
  auto s = scorer.score_batch(doc, doc.sentences[0], cs);
  CHECK(s[0].value() == 0.75);
  CHECK(hits == 3);
}

TEST_CASE("remote scorer gives up after three retries") {
  auto doc = small_doc();
  std::vector<Candidate> cs{cand(1)};
  StubServer http;
  std::atomic<int> hits{0};
  http.server().Post("/v1/score", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    docctx::testing::reply_json(res, {{"error", "down"}}, 500);
  });
  http.start();
  RemoteScorer scorer(http.url(), fast_retry());
  CHECK_THROWS_AS(scorer.score_batch(doc, doc.sentences[0], cs), TransportError);
  CHECK(hits == 4);
}

TEST_CASE("unreachable scorer is a transport error naming the endpoint") {
  const std::string url = "http://127.0.0.1:" + std::to_string(docctx::testing::closed_port());
  RemoteScorer scorer(url, fast_retry());
  CHECK_THROWS_WITH_AS(scorer.check_health(), doctest::Contains("127.0.0.1"), TransportError);
}

TEST_CASE("make_scorer builds each kind") {
  CHECK(dynamic_cast<RandomScorer*>(make_scorer({ScorerKind::random, "", "", 3}).get()));
  CHECK(dynamic_cast<RandomScorer*>(make_scorer({ScorerKind::bucket_random, "", "", 3}).get()));
  CHECK(dynamic_cast<RemoteScorer*>(
      make_scorer({ScorerKind::remote, "http://127.0.0.1:9", "", 0}).get()));
  CHECK_THROWS(make_scorer({ScorerKind::lexical, "", "/nonexistent/model.json", 0}));
}
