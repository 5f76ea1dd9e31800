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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docctx/corpus.hpp"

namespace docctx {

enum class Provenance : std::uint8_t { llm_positive, negative_sampling, positive_swap };

std::string_view to_string(Provenance p);
std::optional<Provenance> parse_provenance(std::string_view s);

// One (query sentence, context sentence, relevance) triple.
struct RetrievalExample {
  std::string query_text;
  std::string context_text;
  int label = 0;
  Provenance provenance = Provenance::negative_sampling;
  // For positives: the entity the context was generated for. For swapped
  // negatives: the foreign entity the borrowed context mentions.
  std::optional<std::string> entity_surface;
  std::optional<EntityClass> entity_class;

  friend bool operator==(const RetrievalExample&, const RetrievalExample&) = default;
};

// Throws ContractViolation if the label/provenance/containment rules fail.
void validate_example(const RetrievalExample& ex);

// Line-delimited JSON, one example per line, fixed key order.
void write_dataset(std::ostream& out, std::span<const RetrievalExample> examples);
std::vector<RetrievalExample> read_dataset(std::istream& in, const std::string& source);

void save_dataset(const std::string& path, std::span<const RetrievalExample> examples);
std::vector<RetrievalExample> load_dataset(const std::string& path);

}  // namespace docctx
