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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "docctx/error.hpp"
#include "docctx/kernels.hpp"
#include "docctx/rerank.hpp"
#include "docctx/text.hpp"

namespace docctx {

namespace {

std::set<std::string> index_terms(std::span<const std::string> tokens) {
  std::set<std::string> out;
  for (const auto& t : tokens) {
    if (text::has_alnum(t)) out.insert(text::to_lower_ascii(t));
  }
  return out;
}

std::size_t term_count(std::span<const std::string> tokens) {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [](const std::string& t) { return text::has_alnum(t); }));
}

Sentence as_sentence(std::span<const std::string> tokens) {
  Sentence s;
  s.tokens.reserve(tokens.size());
  for (const auto& t : tokens) s.tokens.push_back({t, Tag::outside()});
  return s;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// Linear predictor for every row: bias + sum_f w_f * column_f.
std::vector<double> logits(const LogisticParams& p, const Design& d) {
  std::vector<double> z(d.rows, p[kLexicalFeatures]);
  for (std::size_t f = 0; f < kLexicalFeatures; ++f) kernels::axpy(p[f], d.columns[f], z);
  return z;
}

}  // namespace

double TermStats::idf(const std::string& term) const {
  const double n = static_cast<double>(sentence_count);
  auto it = df.find(term);
  const double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

std::vector<std::string> entity_like_tokens(std::span<const std::string> tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (!text::starts_upper(t) || !text::has_alnum(t)) continue;
    if (HeuristicNounTagger::is_stopword(text::to_lower_ascii(t))) continue;
    out.push_back(t);
  }
  return out;
}

FeatureVector lexical_features(const TermStats& stats, std::span<const std::string> query,
                               std::span<const std::string> context) {
  const auto qterms = index_terms(query);
  const auto cterms = index_terms(context);

  double overlap = 0.0;
  for (const auto& t : qterms) overlap += cterms.contains(t) ? 1.0 : 0.0;

  double entity_hit = 0.0;
  const std::set<std::string> ctx_exact(context.begin(), context.end());
  for (const auto& e : entity_like_tokens(query)) {
    if (ctx_exact.contains(e)) {
      entity_hit = 1.0;
      break;
    }
  }

  const HeuristicNounTagger tagger;
  const auto qn = tagger.noun_set(as_sentence(query));
  const auto cn = tagger.noun_set(as_sentence(context));
  double shared_nouns = 0.0;
  for (const auto& n : qn) shared_nouns += cn.contains(n) ? 1.0 : 0.0;

  const double len = static_cast<double>(term_count(context));

  std::unordered_map<std::string, double> tf;
  for (const auto& t : context) {
    if (text::has_alnum(t)) tf[text::to_lower_ascii(t)] += 1.0;
  }
  const double k1 = stats.params.k1;
  const double b = stats.params.b;
  const double avg = stats.average_length > 0.0 ? stats.average_length : 1.0;
  double bm25 = 0.0;
  for (const auto& t : qterms) {
    auto it = tf.find(t);
    if (it == tf.end()) continue;
    bm25 += stats.idf(t) * (it->second * (k1 + 1.0)) / (it->second + k1 * (1.0 - b + b * len / avg));
  }
  return {overlap, entity_hit, shared_nouns, len, bm25};
}

double logistic_loss(const LogisticParams& params, const Design& design) {
  if (design.rows == 0) return 0.0;
  const auto z = logits(params, design);
  double sum = 0.0;
  for (std::size_t i = 0; i < design.rows; ++i) sum += softplus(z[i]) - design.labels[i] * z[i];
  return sum / static_cast<double>(design.rows);
}

LogisticParams logistic_gradient(const LogisticParams& params, const Design& design) {
  LogisticParams g{};
  if (design.rows == 0) return g;
  auto residual = logits(params, design);
  for (std::size_t i = 0; i < design.rows; ++i) residual[i] = sigmoid(residual[i]) - design.labels[i];
  const double inv_n = 1.0 / static_cast<double>(design.rows);
  for (std::size_t f = 0; f < kLexicalFeatures; ++f) {
    g[f] = kernels::dot(residual, design.columns[f]) * inv_n;
  }
  double bias = 0.0;
  for (double r : residual) bias += r;
  g[kLexicalFeatures] = bias * inv_n;
  return g;
}

double LexicalModel::predict_features(const FeatureVector& raw) const {
  double z = params[kLexicalFeatures];
  for (std::size_t f = 0; f < kLexicalFeatures; ++f) z += params[f] * (raw[f] - mean[f]) / scale[f];
  return std::clamp(sigmoid(z), 0.0, 1.0);
}

double LexicalModel::predict(std::span<const std::string> query,
                             std::span<const std::string> context) const {
  return predict_features(lexical_features(stats, query, context));
}

LexicalModel train_lexical_model(std::span<const RetrievalExample> dataset,
                                 LexicalTrainOptions options) {
  const bool has_pos = std::any_of(dataset.begin(), dataset.end(), [](auto& e) { return e.label == 1; });
  const bool has_neg = std::any_of(dataset.begin(), dataset.end(), [](auto& e) { return e.label == 0; });
  if (!has_pos || !has_neg) throw Error("train_lexical_scorer: dataset needs both labels");

  LexicalModel model;
  std::vector<std::vector<std::string>> queries, contexts;
  queries.reserve(dataset.size());
  contexts.reserve(dataset.size());
  std::set<std::string> texts;
  for (const auto& ex : dataset) {
    queries.push_back(text::tokenize(ex.query_text));
    contexts.push_back(text::tokenize(ex.context_text));
    texts.insert(ex.query_text);
    texts.insert(ex.context_text);
  }
  // Collection statistics over the distinct sentences of the dataset.
  std::size_t total = 0;
  for (const auto& t : texts) {
    auto toks = text::tokenize(t);
    total += term_count(toks);
    for (const auto& term : index_terms(toks)) ++model.stats.df[term];
  }
  model.stats.sentence_count = texts.size();
  model.stats.average_length =
      texts.empty() ? 1.0 : static_cast<double>(total) / static_cast<double>(texts.size());

  Design d;
  d.rows = dataset.size();
  for (auto& col : d.columns) col.resize(d.rows);
  d.labels.resize(d.rows);
  for (std::size_t i = 0; i < d.rows; ++i) {
    const auto f = lexical_features(model.stats, queries[i], contexts[i]);
    for (std::size_t j = 0; j < kLexicalFeatures; ++j) d.columns[j][i] = f[j];
    d.labels[i] = dataset[i].label;
  }
  for (std::size_t j = 0; j < kLexicalFeatures; ++j) {
    auto& col = d.columns[j];
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(d.rows);
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(d.rows));
    model.mean[j] = mean;
    model.scale[j] = sd > 1e-12 ? sd : 1.0;
    for (double& v : col) v = (v - mean) / model.scale[j];
  }

  LogisticParams p{};
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto g = logistic_gradient(p, d);
    for (std::size_t j = 0; j < kLogisticParams; ++j) p[j] -= options.learning_rate * g[j];
  }
  model.params = p;
  return model;
}

std::string train_lexical_scorer(std::span<const RetrievalExample> dataset, std::size_t epochs,
                                 double learning_rate, const std::string& model_path) {
  train_lexical_model(dataset, {epochs, learning_rate}).save(model_path);
  return model_path;
}

void LexicalModel::save(const std::string& path) const {
  nlohmann::ordered_json j;
  j["kind"] = "lexical-logistic";
  j["version"] = 1;
  j["features"] = kLexicalFeatureNames;
  j["weights"] = std::vector<double>(params.begin(), params.begin() + kLexicalFeatures);
  j["bias"] = params[kLexicalFeatures];
  j["mean"] = mean;
  j["scale"] = scale;
  nlohmann::ordered_json bm;
  bm["k1"] = stats.params.k1;
  bm["b"] = stats.params.b;
  bm["sentence_count"] = stats.sentence_count;
  bm["average_length"] = stats.average_length;
  // Sorted for byte-stable output.
  std::map<std::string, std::size_t> df(stats.df.begin(), stats.df.end());
  bm["df"] = df;
  j["bm25"] = std::move(bm);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model " + path);
  out << j.dump(1) << '\n';
}

LexicalModel LexicalModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path);
  LexicalModel m;
  try {
    nlohmann::json j;
    in >> j;
    if (j.at("kind") != "lexical-logistic") throw ParseError(path + ": not a lexical model");
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto scale = j.at("scale").get<std::vector<double>>();
    if (w.size() != kLexicalFeatures || mean.size() != kLexicalFeatures ||
        scale.size() != kLexicalFeatures) {
      throw ParseError(path + ": feature count mismatch");
    }
    for (std::size_t i = 0; i < kLexicalFeatures; ++i) {
      m.params[i] = w[i];
      m.mean[i] = mean[i];
      m.scale[i] = scale[i];
    }
    m.params[kLexicalFeatures] = j.at("bias").get<double>();
    const auto& bm = j.at("bm25");
    m.stats.params.k1 = bm.at("k1").get<double>();
    m.stats.params.b = bm.at("b").get<double>();
    m.stats.sentence_count = bm.at("sentence_count").get<std::size_t>();
    m.stats.average_length = bm.at("average_length").get<double>();
    for (auto it = bm.at("df").begin(); it != bm.at("df").end(); ++it) {
      m.stats.df.emplace(it.key(), it.value().get<std::size_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return m;
}

}  // namespace docctx
