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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "docctx/corpus.hpp"
#include "docctx/dataset.hpp"
#include "docctx/http.hpp"

namespace docctx {

// Kinds of generated context sentence. Action is PER-only, movement is
// LOC-only, description fits every class.
enum class PromptKind { description, action, movement };

std::string_view to_string(PromptKind k);
bool is_compatible(PromptKind kind, EntityClass cls);
std::vector<PromptKind> allowed_kinds(EntityClass cls);

// Instantiates the prompt template for `kind`. Throws ContractViolation when
// the kind does not fit the entity class.
std::string build_prompt(PromptKind kind, const Mention& entity, const Sentence& input_sentence);

struct LlmRequest {
  std::string prompt;
  std::size_t max_tokens = 96;
  double temperature = 0.7;
  std::vector<std::string> stop = {"\n"};

  // max_tokens >= 16 and 0 <= temperature <= 2.
  void validate() const;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  // Raw completion text as returned by the backend.
  virtual std::string complete(const LlmRequest& request) const = 0;
};

// Maps the completion contract onto a server schema.
struct LlmAdapter {
  std::string prompt_field = "prompt";
  std::string max_tokens_field = "max_tokens";
  std::string temperature_field = "temperature";
  std::string stop_field = "stop";
  // JSON pointer to the generated text in the response.
  std::string text_pointer = "/text";
};

// POSTs {"prompt","max_tokens","temperature","stop"} to the endpoint URL and
// reads {"text"}. Three attempts by default.
class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(const std::string& endpoint, LlmAdapter adapter = {},
                         http::RetryPolicy retry = default_retry(), std::size_t pool_size = 4);
  std::string complete(const LlmRequest& request) const override;

  static http::RetryPolicy default_retry();

 private:
  LlmAdapter adapter_;
  std::unique_ptr<http::JsonClient> client_;
};

// Offline stand-in that answers every prompt kind with a fixed, entity
// mentioning sentence. Deterministic in the prompt.
class TemplateLlmClient : public LlmClient {
 public:
  std::string complete(const LlmRequest& request) const override;
};

// Strips an echoed prompt, keeps the first line, then the first sentence.
std::string llm_generate(const LlmClient& client, const LlmRequest& request);

struct GenerationReport {
  std::size_t entities = 0;
  std::size_t accepted = 0;
  std::size_t filtered = 0;     // output lacked the entity string
  std::size_t empty = 0;        // empty output
  std::size_t failed = 0;       // transport/protocol failure
  std::size_t negative_sampled = 0;
  std::size_t swapped = 0;
  std::size_t swap_skipped = 0;
  std::vector<std::string> entries;

  nlohmann::ordered_json to_json() const;
};

struct DatagenOptions {
  std::uint64_t seed = 0;
  std::size_t parallelism = 4;
  LlmRequest request_defaults;
  // Negatives per positive for each technique.
  std::size_t sampled_per_positive = 1;
  std::size_t swapped_per_positive = 1;
  double eval_fraction = 0.1;
};

// One positive per unique (class, surface) in the annotated sentences,
// ordered by (class, surface).
std::vector<RetrievalExample> generate_positives(std::span<const Document> docs,
                                                 const LlmClient& llm, std::uint64_t seed,
                                                 GenerationReport* report = nullptr,
                                                 const DatagenOptions& options = {});

// Requires at least two documents.
std::vector<RetrievalExample> negative_sampling(std::span<const Document> docs, std::size_t count,
                                                std::uint64_t seed);

// Positives whose query mentions every other positive's entity are skipped.
std::vector<RetrievalExample> positive_swap(std::span<const RetrievalExample> positives,
                                            std::uint64_t seed,
                                            GenerationReport* report = nullptr);

struct DatasetSplit {
  std::vector<RetrievalExample> train;
  std::vector<RetrievalExample> eval;
};

// Seeded split grouped by query text, with eval label counts targeting
// round(eval_fraction * count) per label.
DatasetSplit assemble_dataset(std::span<const RetrievalExample> positives,
                              std::span<const RetrievalExample> negatives, double eval_fraction,
                              std::uint64_t seed);

struct GeneratedDataset {
  DatasetSplit split;
  GenerationReport report;
};

GeneratedDataset generate_dataset(std::span<const Document> docs, const LlmClient& llm,
                                  const DatagenOptions& options);

}  // namespace docctx
