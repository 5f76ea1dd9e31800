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

#include "docctx/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <json.hpp>

#include "docctx/error.hpp"
#include "docctx/parallel.hpp"

namespace docctx::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
std::vector<T> scalar_or_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  RunConfig c;
  try {
    if (j.contains("corpus")) c.corpus = resolve(base, j["corpus"].get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    if (j.contains("out_dir")) c.out_dir = resolve(base, j["out_dir"].get<std::string>());
    if (j.contains("bm25")) {
      c.bm25.k1 = j["bm25"].value("k1", c.bm25.k1);
      c.bm25.b = j["bm25"].value("b", c.bm25.b);
    }
    if (j.contains("llm")) {
      const auto& l = j["llm"];
      c.llm_endpoint = l.value("endpoint", c.llm_endpoint);
      auto& req = c.datagen.request_defaults;
      req.temperature = l.value("temperature", req.temperature);
      req.max_tokens = l.value("max_tokens", req.max_tokens);
      if (l.contains("stop")) req.stop = l["stop"].get<std::vector<std::string>>();
      c.datagen.parallelism = l.value("parallelism", c.datagen.parallelism);
      if (l.contains("adapter")) {
        const auto& a = l["adapter"];
        auto& ad = c.llm_adapter;
        ad.prompt_field = a.value("prompt_field", ad.prompt_field);
        ad.max_tokens_field = a.value("max_tokens_field", ad.max_tokens_field);
        ad.temperature_field = a.value("temperature_field", ad.temperature_field);
        ad.stop_field = a.value("stop_field", ad.stop_field);
        ad.text_pointer = a.value("text_pointer", ad.text_pointer);
      }
      req.validate();
    }
    if (j.contains("datagen")) {
      const auto& d = j["datagen"];
      c.datagen.eval_fraction = d.value("eval_fraction", c.datagen.eval_fraction);
      c.datagen.sampled_per_positive = d.value("sampled_per_positive", c.datagen.sampled_per_positive);
      c.datagen.swapped_per_positive = d.value("swapped_per_positive", c.datagen.swapped_per_positive);
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      if (t.contains("dataset")) c.train_dataset = resolve(base, t["dataset"].get<std::string>());
      if (t.contains("eval_dataset")) {
        c.eval_dataset = resolve(base, t["eval_dataset"].get<std::string>());
      }
      c.epochs = t.value("epochs", c.epochs);
      c.learning_rate = t.value("learning_rate", c.learning_rate);
      if (t.contains("model")) c.model_path = resolve(base, t["model"].get<std::string>());
    }
    if (j.contains("experiment")) {
      const auto& e = j["experiment"];
      if (e.contains("method")) {
        c.methods.clear();
        for (const auto& m : scalar_or_list<std::string>(e["method"])) {
          auto method = parse_method(m);
          if (!method) throw ConfigError("unknown retrieval method '" + m + "'");
          c.methods.push_back(*method);
        }
      }
      if (e.contains("scorer")) {
        const auto& s = e["scorer"];
        auto kind = parse_scorer_kind(s.value("kind", "random"));
        if (!kind) throw ConfigError("unknown scorer kind '" + s.value("kind", "") + "'");
        c.scorer.kind = *kind;
        c.scorer.endpoint = s.value("endpoint", "");
        if (s.contains("model_path")) {
          c.scorer.model_path = resolve(base, s["model_path"].get<std::string>()).string();
        }
        c.scorer.seed = s.value("seed", std::uint64_t{0});
      }
      if (e.contains("n")) c.ns = scalar_or_list<std::size_t>(e["n"]);
      if (e.contains("k")) c.ks = scalar_or_list<std::size_t>(e["k"]);
      if (e.contains("window")) {
        c.windows.clear();
        for (const auto& w : scalar_or_list<std::string>(e["window"])) {
          auto win = parse_window(w);
          if (!win) throw ConfigError("unknown window '" + w + "'");
          c.windows.push_back(*win);
        }
      }
      if (e.contains("runs")) c.runs = e["runs"].get<std::size_t>();
      c.folds = e.value("folds", c.folds);
      if (e.contains("formats")) c.formats = scalar_or_list<std::string>(e["formats"]);
    }
    if (j.contains("ner")) {
      const auto& n = j["ner"];
      c.ner_endpoint = n.value("endpoint", "");
      if (n.contains("gazetteer")) c.gazetteer = resolve(base, n["gazetteer"].get<std::string>());
      c.context_rule = n.value("context_rule", c.context_rule);
    }
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const ContractViolation& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return c;
}

void apply_env_overrides(RunConfig& cfg) {
  if (const char* v = std::getenv("DOCCTX_LLM_ENDPOINT")) cfg.llm_endpoint = v;
  if (const char* v = std::getenv("DOCCTX_SCORER_ENDPOINT")) cfg.scorer.endpoint = v;
  if (const char* v = std::getenv("DOCCTX_NER_ENDPOINT")) cfg.ner_endpoint = v;
}

std::vector<ExperimentConfig> expand_experiments(const RunConfig& cfg) {
  std::vector<ExperimentConfig> out;
  std::set<std::string> seen;
  for (auto method : cfg.methods) {
    const bool pooled = method == RetrievalMethod::neural_pool;
    for (std::size_t n : pooled ? cfg.ns : std::vector<std::size_t>{cfg.ns.front()}) {
      for (std::size_t k : cfg.ks) {
        for (auto window : cfg.windows) {
          ExperimentConfig e;
          e.method = method;
          e.n = n;
          e.k = k;
          e.window = window;
          e.seed = cfg.seed;
          e.fold_count = cfg.folds;
          e.bm25 = cfg.bm25;
          e.workers = cfg.workers ? cfg.workers : default_workers();
          if (pooled) e.scorer = cfg.scorer;
          e.runs = cfg.runs.value_or(e.deterministic() ? 1 : 3);
          e.validate();
          if (seen.insert(e.id()).second) out.push_back(std::move(e));
        }
      }
    }
  }
  return out;
}

}  // namespace docctx::cli
