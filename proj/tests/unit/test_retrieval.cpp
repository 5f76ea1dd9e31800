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
#include <sstream>

#include <json.hpp>

#include "docctx/error.hpp"
#include "docctx/retrieval.hpp"
#include "fixtures.hpp"

using namespace docctx;
using docctx::testing::make_doc;
using docctx::testing::make_sentence;

namespace {

std::vector<std::size_t> indices(const std::vector<Candidate>& cs) {
  std::vector<std::size_t> out;
  for (const auto& c : cs) out.push_back(c.sentence.index);
  return out;
}

Document ten_sentences() {
  return make_doc("ten",
                  {"the black company marched north .", "croaker wrote in the annals .",
                   "the lady watched the company .", "rain fell on the black tower .",
                   "croaker and elmo marched .", "nobody spoke .", "the tower was black .",
                   "elmo sharpened a sword .", "the annals of the black company .",
                   "north winds blew over the tower ."},
                  10);
}

}  // namespace

TEST_CASE("idf of a term present in every sentence") {
  auto doc = make_doc("d", {"x a .", "x b .", "x c .", "x d ."}, 4);
  auto idx = Bm25Index::build(doc, ContextWindow::full_book);
  CHECK(idx.document_frequency("x") == 4);
  CHECK(idx.idf("x") == doctest::Approx(std::log(1 + 0.5 / 4.5)).epsilon(1e-14));
  CHECK(idx.idf("x") > 0);
  CHECK(idx.document_frequency(".") == 0);
}

TEST_CASE("query identical to a sentence ranks it first among equal-length sentences") {
  auto doc = make_doc("d",
                      {"red fox runs far", "blue fox walks near", "red cat runs near",
                       "green owl flies far", "query sentence itself"},
                      5);
  auto idx = Bm25Index::build(doc, ContextWindow::full_book);
  auto q = make_sentence("other", 0, "red fox runs far", false);
  auto top = bm25_topn(idx, q, 5);
  REQUIRE_FALSE(top.empty());
  CHECK(top[0].sentence.index == 0);
  auto oracle = docctx::testing::bm25_oracle_topn(doc, ContextWindow::full_book, q, 5);
  REQUIRE(oracle.size() == top.size());
  for (std::size_t i = 0; i < top.size(); ++i) {
    CHECK(top[i].sentence.index == oracle[i].first);
    CHECK(std::abs(top[i].heuristic_score - oracle[i].second) <= 1e-9);
  }
}

TEST_CASE("k1 = 0 reduces the score to the sum of matched idf") {
  auto doc = make_doc("d", {"a a a b", "b c", "c d d", "e"}, 4);
  auto idx = Bm25Index::build(doc, ContextWindow::full_book, {0.0, 0.75});
  auto q = make_sentence("q", 0, "a b d", false);
  auto scores = idx.score_all(q);
  CHECK(scores[0] == doctest::Approx(idx.idf("a") + idx.idf("b")));
  CHECK(scores[1] == doctest::Approx(idx.idf("b")));
  CHECK(scores[2] == doctest::Approx(idx.idf("d")));
  CHECK(scores[3] == 0.0);
}

TEST_CASE("bm25_topn basics") {
  auto doc = ten_sentences();
  auto idx = Bm25Index::build(doc, ContextWindow::full_book);
  CHECK(bm25_topn(idx, make_sentence("q", 0, "zebra giraffe", false), 3).empty());

  const auto& q = doc.sentences[0];
  auto all = bm25_topn(idx, q, 100);
  auto oracle_all = docctx::testing::bm25_oracle_topn(doc, ContextWindow::full_book, q, 100);
  CHECK(all.size() == oracle_all.size());
  for (const auto& c : all) CHECK(c.sentence.index != q.index);

  auto top3 = bm25_topn(idx, q, 3);
  auto oracle3 = docctx::testing::bm25_oracle_topn(doc, ContextWindow::full_book, q, 3);
  REQUIRE(top3.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(top3[i].sentence.index == oracle3[i].first);
    CHECK(top3[i].heuristic_score == doctest::Approx(oracle3[i].second).epsilon(1e-12));
    CHECK(top3[i].source == Source::bm25);
  }
}

TEST_CASE("bm25 on random corpora matches the exhaustive oracle") {
  Rng rng(5);
  for (int c = 0; c < 30; ++c) {
    auto doc = docctx::testing::random_document(rng, "r", 2, 50);
    for (auto window : {ContextWindow::first_chapter, ContextWindow::full_book}) {
      auto idx = Bm25Index::build(doc, window);
      for (const auto& q : doc.sentences) {
        const std::size_t n = 1 + rng.uniform_index(10);
        auto got = bm25_topn(idx, q, n);
        auto want = docctx::testing::bm25_oracle_topn(doc, window, q, n);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
          REQUIRE(got[i].sentence.index == want[i].first);
          REQUIRE(std::abs(got[i].heuristic_score - want[i].second) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("bm25 scores are non-negative and monotone in tf at fixed length") {
  Rng rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t len = 2 + rng.uniform_index(8);
    std::vector<std::string> specs;
    for (std::size_t tf = 0; tf <= len; ++tf) {
      std::string s;
      for (std::size_t j = 0; j < len; ++j) s += (j < tf ? "w " : "pad" + std::to_string(j) + " ");
      specs.push_back(s);
    }
    specs.push_back("other words only");
    auto doc = make_doc("m", specs, specs.size());
    Bm25Params p{rng.uniform_real() * 3, rng.uniform_real()};
    auto idx = Bm25Index::build(doc, ContextWindow::full_book, p);
    auto scores = idx.score_all(make_sentence("q", 0, "w", false));
    for (double s : scores) CHECK(s >= 0.0);
    for (std::size_t tf = 1; tf <= len; ++tf) CHECK(scores[tf] >= scores[tf - 1]);
  }
}

TEST_CASE("bm25 rejects an empty window and bad parameters") {
  Document empty;
  empty.doc_id = "e";
  CHECK_THROWS_AS(Bm25Index::build(empty, ContextWindow::full_book), Error);
  auto doc = make_doc("d", {"a"}, 1);
  CHECK_THROWS_AS(Bm25Index::build(doc, ContextWindow::full_book, {-1.0, 0.5}), ContractViolation);
  CHECK_THROWS_AS(Bm25Index::build(doc, ContextWindow::full_book, {1.0, 1.5}), ContractViolation);
}

TEST_CASE("noun_set with the heuristic tagger") {
  HeuristicNounTagger plain;
  CHECK(plain.noun_set(make_sentence("d", 0, "The Black Company marched", false)) ==
        std::set<std::string>{"black", "company"});
  CHECK(plain.noun_set(make_sentence("d", 0, "and the of to it", false)).empty());
  CHECK(plain.noun_set(make_sentence("d", 0, "the creation of movement by a sailor", false)) ==
        std::set<std::string>{"creation", "movement", "sailor"});

  auto uncorroborated = make_doc("d", {"Croaker was whistling .", "the wind blew ."}, 2);
  HeuristicNounTagger t1(uncorroborated);
  CHECK(t1.noun_set(uncorroborated.sentences[0]).empty());

  auto corroborated = make_doc("d", {"Croaker was whistling .", "then Croaker left ."}, 2);
  HeuristicNounTagger t2(corroborated);
  CHECK(t2.noun_set(corroborated.sentences[0]) == std::set<std::string>{"croaker"});
}

TEST_CASE("samenoun_topn") {
  auto doc = make_doc("d",
                      {"we saw the Tower .", "the Tower fell .", "a Tower rose .", "the Tower burned .",
                       "one Tower stood .", "the Tower wept .", "the Tower slept .", "nothing here ."},
                      8);
  HeuristicNounTagger tagger(doc);
  auto idx = NounIndex::build(doc, ContextWindow::full_book, tagger);

  SUBCASE("no shared noun gives an empty list") {
    CHECK(samenoun_topn(idx, doc.sentences[7], 3, 1).empty());
  }
  SUBCASE("fixed seed is repeatable") {
    auto a = samenoun_topn(idx, doc.sentences[0], 2, 42);
    auto b = samenoun_topn(idx, doc.sentences[0], 2, 42);
    REQUIRE(a.size() == 2);
    CHECK(indices(a) == indices(b));
    for (const auto& c : a) CHECK(c.source == Source::samenoun);
  }
  SUBCASE("exactly n matches returns all of them") {
    auto doc2 = make_doc("e", {"the Gate .", "a Gate .", "one Gate .", "x ."}, 4);
    HeuristicNounTagger t(doc2);
    auto idx2 = NounIndex::build(doc2, ContextWindow::full_book, t);
    auto got = indices(samenoun_topn(idx2, doc2.sentences[0], 2, 9));
    std::sort(got.begin(), got.end());
    CHECK(got == std::vector<std::size_t>{1, 2});
  }
  SUBCASE("sampling is roughly uniform over the matches") {
    std::map<std::size_t, int> hits;
    for (std::uint64_t seed = 0; seed < 3000; ++seed) {
      for (const auto& c : samenoun_topn(idx, doc.sentences[0], 1, seed)) ++hits[c.sentence.index];
    }
    CHECK(hits.size() == 6);
    for (const auto& [i, h] : hits) CHECK(std::abs(h - 500) < 120);
  }
}

TEST_CASE("samenoun match set grows with the window") {
  Rng rng(77);
  for (int c = 0; c < 50; ++c) {
    auto doc = docctx::testing::random_document(rng, "r", 3, 40);
    HeuristicNounTagger tagger(doc);
    auto small = NounIndex::build(doc, ContextWindow::first_chapter, tagger);
    auto big = NounIndex::build(doc, ContextWindow::full_book, tagger);
    for (std::size_t i = 0; i < doc.first_chapter_end; ++i) {
      auto a = small.matches(doc.sentences[i]);
      auto b = big.matches(doc.sentences[i]);
      CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
  }
}

TEST_CASE("surrounding") {
  auto doc = make_doc("d", {"0", "1", "2", "3", "4", "5", "6", "7"}, 4, 6);
  auto at0 = surrounding(doc, ContextWindow::full_book, doc.sentences[0], 2);
  CHECK(at0.before.empty());
  CHECK(indices(at0.after) == std::vector<std::size_t>{1, 2});

  auto mid = surrounding(doc, ContextWindow::full_book, doc.sentences[4], 2);
  CHECK(indices(mid.before) == std::vector<std::size_t>{2, 3});
  CHECK(indices(mid.after) == std::vector<std::size_t>{5, 6});
  CHECK(mid.before[0].source == Source::before);
  CHECK(mid.after[0].source == Source::after);

  auto clipped = surrounding(doc, ContextWindow::first_chapter, doc.sentences[4], 3);
  CHECK(indices(clipped.after) == std::vector<std::size_t>{5});
  CHECK(indices(clipped.before) == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("pool_candidates") {
  SUBCASE("all heuristics agree on one sentence") {
    auto doc = make_doc("d", {"the Gate fell .", "the Gate stood ."}, 2);
    auto pool = pool_candidates(doc, ContextWindow::full_book, doc.sentences[0], 4, 1);
    REQUIRE(pool.size() == 1);
    CHECK(pool[0].sentence.index == 1);
    CHECK(pool[0].source == Source::bm25);
  }
  SUBCASE("twelve sentence fixture equals the union oracle") {
    auto doc = make_doc("d",
                        {"the Company rode north .", "Croaker wrote the annals .",
                         "the Lady smiled .", "the Company rested .", "rain fell .",
                         "Elmo and Croaker argued .", "the annals were lost .", "nobody came .",
                         "the Tower loomed .", "Croaker saw the Tower .", "winter came .",
                         "the Company marched on ."},
                        6, 6);
    RetrievalContext ctx(doc, ContextWindow::full_book);
    for (std::size_t q = 0; q < 6; ++q) {
      auto pool = pool_candidates(ctx, doc.sentences[q], 4, 17);
      auto oracle = docctx::testing::pool_union_oracle(ctx, doc.sentences[q], 4, 17);
      REQUIRE(pool.size() == oracle.size());
      std::size_t i = 0;
      for (const auto& [idx, src] : oracle) {
        CHECK(pool[i].sentence.index == idx);
        CHECK(pool[i].source == src);
        ++i;
      }
    }
  }
  SUBCASE("size bound and window") {
    Rng rng(3);
    for (int c = 0; c < 40; ++c) {
      auto doc = docctx::testing::random_document(rng, "r", 10, 60);
      for (auto w : {ContextWindow::first_chapter, ContextWindow::full_book}) {
        RetrievalContext ctx(doc, w);
        const auto range = window_range(doc, w);
        for (std::size_t q = 0; q < doc.first_chapter_end; ++q) {
          for (std::size_t n : {1, 4, 8}) {
            auto pool = pool_candidates(ctx, doc.sentences[q], n, 5);
            CHECK(pool.size() <= 4 * n);
            for (std::size_t i = 0; i < pool.size(); ++i) {
              CHECK(pool[i].sentence.index != q);
              CHECK(range.contains(pool[i].sentence.index));
              if (i) CHECK(pool[i - 1].sentence.index < pool[i].sentence.index);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("pool sizes of the original grid") {
  for (std::size_t n : {4, 8, 12, 16, 24}) CHECK(is_standard_pool_size(n));
  CHECK_FALSE(is_standard_pool_size(5));
}

TEST_CASE("pool records are one JSON object per line") {
  auto doc = make_doc("d", {"the Gate fell .", "the Gate stood .", "the Gate ."}, 3);
  auto pool = pool_candidates(doc, ContextWindow::full_book, doc.sentences[1], 4, 1);
  std::ostringstream out;
  write_pool_records(out, doc.sentences[1], pool);
  std::istringstream in(out.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j.at("doc_id") == "d");
    CHECK(j.at("query_index") == 1);
    CHECK(j.contains("candidate_index"));
    CHECK(parse_source(j.at("source").get<std::string>()).has_value());
    CHECK(j.at("heuristic_score").is_number());
    ++lines;
  }
  CHECK(lines == pool.size());
}
