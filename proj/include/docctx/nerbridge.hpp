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

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "docctx/corpus.hpp"
#include "docctx/http.hpp"
#include "docctx/rerank.hpp"

namespace docctx {

struct NerRequest {
  std::vector<std::string> tokens;
  // [start, end) of the query sentence inside `tokens`.
  std::size_t query_start = 0;
  std::size_t query_end = 0;
};

struct NerPrediction {
  std::vector<Tag> tags;  // one per request token
};

class NerPredictor {
 public:
  virtual ~NerPredictor() = default;
  virtual NerPrediction predict(const NerRequest& request) const = 0;
};

// POST <endpoint>/v1/tag {"tokens":[...]} -> {"tags":[...]}
class RemoteNerPredictor : public NerPredictor {
 public:
  explicit RemoteNerPredictor(const std::string& endpoint, http::RetryPolicy retry = {},
                              std::size_t pool_size = 4);
  NerPrediction predict(const NerRequest& request) const override;
  std::string url() const { return client_->endpoint().url(); }

 private:
  std::unique_ptr<http::JsonClient> client_;
};

// Surface (one or more space-separated tokens) -> class.
using Gazetteer = std::map<std::string, EntityClass>;

// Reads "surface\tclass" lines. Blank lines and lines starting with '#' are
// skipped.
Gazetteer load_gazetteer(const std::string& path);

// Deterministic test predictor. Exact gazetteer matches (longest first) are
// tagged B-/I-<class>. With the context rule on, a capitalized query token
// that is not in the gazetteer becomes B-PER when the same token appears
// outside the query span directly next to a gazetteer PER token.
class MockGazetteerPredictor : public NerPredictor {
 public:
  MockGazetteerPredictor(Gazetteer gazetteer, bool context_rule);
  NerPrediction predict(const NerRequest& request) const override;

 private:
  Gazetteer gazetteer_;
  std::map<std::vector<std::string>, EntityClass> phrases_;
  std::size_t longest_ = 1;
  bool context_rule_;
};

// Flattens the context sentences in order, tags them, and keeps the tags of
// the query sentence only.
std::vector<Tag> predict_query_tags(const NerPredictor& predictor, const Document& doc,
                                    const AssembledContext& context);

}  // namespace docctx
