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
#include <optional>
#include <string>
#include <vector>

#include "docctx/datagen.hpp"
#include "docctx/eval.hpp"
#include "docctx/rerank.hpp"
#include "docctx/retrieval.hpp"

namespace docctx::cli {

// Declarative run configuration (JSON). Relative paths are resolved against
// the directory holding the config file. Endpoint fields can be overridden
// by DOCCTX_LLM_ENDPOINT, DOCCTX_SCORER_ENDPOINT and DOCCTX_NER_ENDPOINT,
// and every field by command-line flags.
struct RunConfig {
  std::filesystem::path corpus;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0: hardware concurrency
  std::filesystem::path out_dir = "out";
  Bm25Params bm25;

  // gen-dataset
  std::string llm_endpoint;  // "mock" selects the built-in template generator
  LlmAdapter llm_adapter;
  DatagenOptions datagen;

  // train-scorer
  std::filesystem::path train_dataset;
  std::filesystem::path eval_dataset;
  std::size_t epochs = 300;
  double learning_rate = 0.5;
  std::filesystem::path model_path;

  // run-eval / dump-pool
  std::vector<RetrievalMethod> methods = {RetrievalMethod::no_retrieval};
  ScorerSpec scorer;
  std::vector<std::size_t> ns = {8};
  std::vector<std::size_t> ks = {3};
  std::vector<ContextWindow> windows = {ContextWindow::full_book};
  std::optional<std::size_t> runs;  // default: 1 deterministic, 3 otherwise
  std::size_t folds = 5;
  std::vector<std::string> formats = {"csv", "json"};

  std::string ner_endpoint;
  std::filesystem::path gazetteer;
  bool context_rule = true;
};

// Throws ConfigError on unreadable files, bad JSON or invalid fields.
RunConfig load_config(const std::filesystem::path& path);
void apply_env_overrides(RunConfig& cfg);

// Cartesian product methods x n x k x window. n only varies for
// neural_pool.
std::vector<ExperimentConfig> expand_experiments(const RunConfig& cfg);

}  // namespace docctx::cli
