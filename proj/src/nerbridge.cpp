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

#include "docctx/nerbridge.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "docctx/error.hpp"
#include "docctx/text.hpp"

namespace docctx {

RemoteNerPredictor::RemoteNerPredictor(const std::string& endpoint, http::RetryPolicy retry,
                                       std::size_t pool_size)
    : client_(std::make_unique<http::JsonClient>(http::parse_endpoint(endpoint), retry,
                                                 pool_size)) {}

NerPrediction RemoteNerPredictor::predict(const NerRequest& request) const {
  nlohmann::json body = {{"tokens", request.tokens}};
  auto res = client_->post("/v1/tag", body);
  const std::string where = url() + "/v1/tag";
  if (!res.is_object() || !res.contains("tags") || !res["tags"].is_array()) {
    throw ProtocolError(where + ": response lacks a \"tags\" array");
  }
  NerPrediction out;
  for (const auto& t : res["tags"]) {
    if (!t.is_string()) throw ProtocolError(where + ": non-string tag");
    auto tag = parse_tag(t.get<std::string>());
    if (!tag) throw ProtocolError(where + ": malformed tag '" + t.get<std::string>() + "'");
    out.tags.push_back(*tag);
  }
  return out;
}

Gazetteer load_gazetteer(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open gazetteer " + path);
  Gazetteer g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.rfind('\t');
    auto cls = tab == std::string::npos ? std::nullopt : parse_entity_class(line.substr(tab + 1));
    if (!cls || tab == 0) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected 'surface\\tclass'");
    }
    g[line.substr(0, tab)] = *cls;
  }
  return g;
}

MockGazetteerPredictor::MockGazetteerPredictor(Gazetteer gazetteer, bool context_rule)
    : gazetteer_(std::move(gazetteer)), context_rule_(context_rule) {
  if (gazetteer_.empty()) throw ContractViolation("mock predictor: gazetteer is empty");
  for (const auto& [surface, cls] : gazetteer_) {
    auto toks = text::tokenize(surface);
    if (toks.empty()) continue;
    longest_ = std::max(longest_, toks.size());
    phrases_[std::move(toks)] = cls;
  }
}

NerPrediction MockGazetteerPredictor::predict(const NerRequest& request) const {
  const auto& toks = request.tokens;
  NerPrediction out;
  out.tags.assign(toks.size(), Tag::outside());
  std::vector<bool> known(toks.size(), false);
  std::vector<bool> person(toks.size(), false);
  for (std::size_t i = 0; i < toks.size();) {
    std::size_t matched = 0;
    EntityClass cls = EntityClass::PER;
    for (std::size_t len = std::min(longest_, toks.size() - i); len >= 1; --len) {
      std::vector<std::string> key(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                   toks.begin() + static_cast<std::ptrdiff_t>(i + len));
      if (auto it = phrases_.find(key); it != phrases_.end()) {
        matched = len;
        cls = it->second;
        break;
      }
    }
    if (matched == 0) {
      ++i;
      continue;
    }
    for (std::size_t j = i; j < i + matched; ++j) {
      out.tags[j] = j == i ? Tag::begin(cls) : Tag::inside(cls);
      known[j] = true;
      person[j] = cls == EntityClass::PER;
    }
    i += matched;
  }
  if (!context_rule_) return out;

  // Tokens outside the query that sit right next to a known person.
  std::set<std::string> corroborated;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i >= request.query_start && i < request.query_end) continue;
    const bool left = i > 0 && person[i - 1];
    const bool right = i + 1 < toks.size() && person[i + 1];
    if ((left || right) && !known[i]) corroborated.insert(toks[i]);
  }
  for (std::size_t i = request.query_start; i < request.query_end && i < toks.size(); ++i) {
    if (known[i] || !text::starts_upper(toks[i]) || !text::has_alnum(toks[i])) continue;
    if (corroborated.contains(toks[i])) out.tags[i] = Tag::begin(EntityClass::PER);
  }
  return out;
}

std::vector<Tag> predict_query_tags(const NerPredictor& predictor, const Document& doc,
                                    const AssembledContext& context) {
  NerRequest req;
  for (std::size_t i = 0; i < context.sentences.size(); ++i) {
    const Sentence& s = doc.sentences.at(context.sentences[i].index);
    if (i == context.query_position) req.query_start = req.tokens.size();
    for (const auto& t : s.tokens) req.tokens.push_back(t.text);
    if (i == context.query_position) req.query_end = req.tokens.size();
  }
  if (req.tokens.empty()) throw ContractViolation("predict_query_tags: empty context");
  NerPrediction pred = predictor.predict(req);
  if (pred.tags.size() != req.tokens.size()) {
    throw ProtocolError("NER predictor returned " + std::to_string(pred.tags.size()) +
                        " tags for " + std::to_string(req.tokens.size()) + " tokens");
  }
  return {pred.tags.begin() + static_cast<std::ptrdiff_t>(req.query_start),
          pred.tags.begin() + static_cast<std::ptrdiff_t>(req.query_end)};
}

}  // namespace docctx
