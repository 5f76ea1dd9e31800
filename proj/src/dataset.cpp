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

#include "docctx/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "docctx/error.hpp"

namespace docctx {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::llm_positive:
      return "llm_positive";
    case Provenance::negative_sampling:
      return "negative_sampling";
    case Provenance::positive_swap:
      return "positive_swap";
  }
  return "?";
}

std::optional<Provenance> parse_provenance(std::string_view s) {
  for (auto p : {Provenance::llm_positive, Provenance::negative_sampling,
                 Provenance::positive_swap}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

void validate_example(const RetrievalExample& ex) {
  if (ex.label == 1) {
    if (ex.provenance != Provenance::llm_positive) {
      throw ContractViolation("positive example with provenance " +
                              std::string(to_string(ex.provenance)));
    }
    if (!ex.entity_surface || ex.context_text.find(*ex.entity_surface) == std::string::npos) {
      throw ContractViolation("positive context does not contain its entity");
    }
  } else if (ex.label == 0) {
    if (ex.provenance == Provenance::llm_positive) {
      throw ContractViolation("negative example with provenance llm_positive");
    }
  } else {
    throw ContractViolation("label must be 0 or 1");
  }
}

void write_dataset(std::ostream& out, std::span<const RetrievalExample> examples) {
  for (const auto& ex : examples) {
    nlohmann::ordered_json j;
    j["query"] = ex.query_text;
    j["context"] = ex.context_text;
    j["label"] = ex.label;
    j["provenance"] = to_string(ex.provenance);
    j["entity_surface"] = ex.entity_surface ? nlohmann::ordered_json(*ex.entity_surface) : nullptr;
    j["entity_class"] = ex.entity_class ? nlohmann::ordered_json(to_string(*ex.entity_class))
                                        : nullptr;
    out << j.dump() << '\n';
  }
}

std::vector<RetrievalExample> read_dataset(std::istream& in, const std::string& source) {
  std::vector<RetrievalExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      return ParseError(source + ":" + std::to_string(lineno) + ": " + why);
    };
    RetrievalExample ex;
    try {
      auto j = nlohmann::json::parse(line);
      ex.query_text = j.at("query").get<std::string>();
      ex.context_text = j.at("context").get<std::string>();
      ex.label = j.at("label").get<int>();
      auto prov = parse_provenance(j.at("provenance").get<std::string>());
      if (!prov) throw fail("unknown provenance");
      ex.provenance = *prov;
      if (j.contains("entity_surface") && !j["entity_surface"].is_null()) {
        ex.entity_surface = j["entity_surface"].get<std::string>();
      }
      if (j.contains("entity_class") && !j["entity_class"].is_null()) {
        auto cls = parse_entity_class(j["entity_class"].get<std::string>());
        if (!cls) throw fail("unknown entity class");
        ex.entity_class = *cls;
      }
    } catch (const nlohmann::json::exception& e) {
      throw fail(e.what());
    }
    try {
      validate_example(ex);
    } catch (const ContractViolation& e) {
      throw fail(e.what());
    }
    out.push_back(std::move(ex));
  }
  return out;
}

void save_dataset(const std::string& path, std::span<const RetrievalExample> examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_dataset(out, examples);
}

std::vector<RetrievalExample> load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_dataset(in, path);
}

}  // namespace docctx
