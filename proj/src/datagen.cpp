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

#include "docctx/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <utility>

#include "docctx/error.hpp"
#include "docctx/parallel.hpp"
#include "docctx/rng.hpp"
#include "docctx/text.hpp"

namespace docctx {

std::string_view to_string(PromptKind k) {
  switch (k) {
    case PromptKind::description:
      return "description";
    case PromptKind::action:
      return "action";
    case PromptKind::movement:
      return "movement";
  }
  return "?";
}

bool is_compatible(PromptKind kind, EntityClass cls) {
  switch (kind) {
    case PromptKind::description:
      return true;
    case PromptKind::action:
      return cls == EntityClass::PER;
    case PromptKind::movement:
      return cls == EntityClass::LOC;
  }
  return false;
}

std::vector<PromptKind> allowed_kinds(EntityClass cls) {
  std::vector<PromptKind> out;
  for (auto k : {PromptKind::description, PromptKind::action, PromptKind::movement}) {
    if (is_compatible(k, cls)) out.push_back(k);
  }
  return out;
}

std::string build_prompt(PromptKind kind, const Mention& entity, const Sentence& input_sentence) {
  if (!is_compatible(kind, entity.entity_class)) {
    throw ContractViolation("prompt kind " + std::string(to_string(kind)) + " does not apply to " +
                            std::string(to_string(entity.entity_class)));
  }
  const std::string& e = entity.surface;
  switch (kind) {
    case PromptKind::description:
      return "'" + input_sentence.text() + "' - In the preceding sentence, " + e +
             " is a character. Invent a one-sentence description for this character, mentioning "
             "their name.";
    case PromptKind::action:
      return "Invent a single sentence depicting the character '" + e +
             "' performing an action, mentioning their name.";
    case PromptKind::movement:
      return "Invent a single sentence depicting a character of your invention going to " + e +
             ". You must mention the name of the character.";
  }
  return {};
}

void LlmRequest::validate() const {
  if (max_tokens < 16) throw ContractViolation("LlmRequest: max_tokens must be >= 16");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ContractViolation("LlmRequest: temperature must lie in [0, 2]");
  }
}

// ---------------------------------------------------------------------------

http::RetryPolicy HttpLlmClient::default_retry() {
  http::RetryPolicy p;
  p.max_attempts = 3;
  p.read_timeout = std::chrono::milliseconds(120000);
  return p;
}

HttpLlmClient::HttpLlmClient(const std::string& endpoint, LlmAdapter adapter,
                             http::RetryPolicy retry, std::size_t pool_size)
    : adapter_(std::move(adapter)),
      client_(std::make_unique<http::JsonClient>(http::parse_endpoint(endpoint), retry,
                                                 pool_size)) {}

std::string HttpLlmClient::complete(const LlmRequest& request) const {
  nlohmann::json body;
  body[adapter_.prompt_field] = request.prompt;
  body[adapter_.max_tokens_field] = request.max_tokens;
  body[adapter_.temperature_field] = request.temperature;
  body[adapter_.stop_field] = request.stop;
  auto res = client_->post("", body);
  const nlohmann::json::json_pointer ptr(adapter_.text_pointer);
  if (!res.contains(ptr) || !res[ptr].is_string()) {
    throw ProtocolError(client_->endpoint().url() + ": response has no string at " +
                        adapter_.text_pointer);
  }
  return res[ptr].get<std::string>();
}

namespace {

std::optional<std::string> between(std::string_view s, std::string_view open,
                                   std::string_view close) {
  auto a = s.find(open);
  if (a == std::string_view::npos) return std::nullopt;
  a += open.size();
  auto b = s.find(close, a);
  if (b == std::string_view::npos) return std::nullopt;
  return std::string(s.substr(a, b - a));
}

}  // namespace

std::string TemplateLlmClient::complete(const LlmRequest& request) const {
  const std::string_view p = request.prompt;
  if (auto e = between(p, "In the preceding sentence, ", " is a character.")) {
    static constexpr std::string_view kTail[] = {
        " is a weathered soldier who trusts no one.",
        " is a quiet scholar with a sharp and restless mind.",
        " is known across the realm for a stubborn sense of honour."};
    return *e + std::string(kTail[fnv1a64(*e) % 3]);
  }
  if (auto e = between(p, "the character '", "' performing")) {
    static constexpr std::string_view kTail[] = {
        " drew a sword and charged across the muddy yard.",
        " climbed the tower stairs two at a time.",
        " slammed the heavy door and shouted for the guards."};
    return *e + std::string(kTail[fnv1a64(*e) % 3]);
  }
  if (auto e = between(p, "going to ", ". You must")) {
    return "The traveller Oswin Hale set out at dawn, going to " + *e + " before the rains.";
  }
  return {};
}

std::string llm_generate(const LlmClient& client, const LlmRequest& request) {
  request.validate();
  std::string raw = client.complete(request);
  std::string_view out = raw;
  if (!request.prompt.empty() && out.substr(0, request.prompt.size()) == request.prompt) {
    out.remove_prefix(request.prompt.size());
  }
  while (!out.empty() && text::is_space(out.front())) out.remove_prefix(1);
  if (auto nl = out.find('\n'); nl != std::string_view::npos) out = out.substr(0, nl);
  return text::first_sentence(out);
}

nlohmann::ordered_json GenerationReport::to_json() const {
  nlohmann::ordered_json j;
  j["entities"] = entities;
  j["accepted"] = accepted;
  j["filtered"] = filtered;
  j["empty"] = empty;
  j["failed"] = failed;
  j["negative_sampled"] = negative_sampled;
  j["swapped"] = swapped;
  j["swap_skipped"] = swap_skipped;
  j["entries"] = entries;
  return j;
}

// ---------------------------------------------------------------------------

namespace {

struct Occurrence {
  const Sentence* sentence;
  Mention mention;
};

enum class Outcome { accepted, filtered, empty, failed };

struct EntityResult {
  Outcome outcome = Outcome::failed;
  std::optional<RetrievalExample> example;
  std::string note;
};

}  // namespace

std::vector<RetrievalExample> generate_positives(std::span<const Document> docs,
                                                 const LlmClient& llm, std::uint64_t seed,
                                                 GenerationReport* report,
                                                 const DatagenOptions& options) {
  std::map<std::pair<EntityClass, std::string>, std::vector<Occurrence>> occurrences;
  for (const auto& doc : docs) {
    for (const auto& s : doc.sentences) {
      if (!s.annotated) continue;
      for (auto& m : extract_mentions(s)) {
        auto key = std::make_pair(m.entity_class, m.surface);
        occurrences[key].push_back({&s, std::move(m)});
      }
    }
  }
  std::vector<const std::pair<const std::pair<EntityClass, std::string>, std::vector<Occurrence>>*>
      entities;
  for (const auto& kv : occurrences) entities.push_back(&kv);

  std::vector<EntityResult> results(entities.size());
  parallel_for(entities.size(), static_cast<unsigned>(std::max<std::size_t>(1, options.parallelism)),
               [&](std::size_t i) {
    const auto& [key, occs] = *entities[i];
    const auto& [cls, surface] = key;
    const std::string cls_name(to_string(cls));
    Rng occ_rng(derive_seed(seed, std::string_view{"occurrence"}, std::string_view{cls_name},
                            std::string_view{surface}));
    const Occurrence& occ = occs[occ_rng.uniform_index(occs.size())];
    const auto kinds = allowed_kinds(cls);
    Rng kind_rng(derive_seed(seed, std::string_view{"prompt-kind"}, std::string_view{cls_name},
                             std::string_view{surface}));
    const PromptKind kind = kinds[kind_rng.uniform_index(kinds.size())];

    LlmRequest req = options.request_defaults;
    req.prompt = build_prompt(kind, occ.mention, *occ.sentence);
    EntityResult& r = results[i];
    const std::string label = cls_name + " '" + surface + "'";
    std::string generated;
    try {
      generated = llm_generate(llm, req);
    } catch (const TransportError& e) {
      r.outcome = Outcome::failed;
      r.note = "failed " + label + ": " + e.what();
      return;
    } catch (const ProtocolError& e) {
      r.outcome = Outcome::failed;
      r.note = "failed " + label + ": " + e.what();
      return;
    }
    if (generated.empty()) {
      r.outcome = Outcome::empty;
      r.note = "empty " + label;
      return;
    }
    if (generated.find(surface) == std::string::npos) {
      r.outcome = Outcome::filtered;
      r.note = "filtered " + label + ": " + generated;
      return;
    }
    r.outcome = Outcome::accepted;
    r.example = RetrievalExample{occ.sentence->text(), generated, 1, Provenance::llm_positive,
                                 surface, cls};
  });

  std::vector<RetrievalExample> positives;
  GenerationReport local;
  GenerationReport& rep = report ? *report : local;
  rep.entities += entities.size();
  for (auto& r : results) {
    switch (r.outcome) {
      case Outcome::accepted:
        ++rep.accepted;
        positives.push_back(std::move(*r.example));
        break;
      case Outcome::filtered:
        ++rep.filtered;
        break;
      case Outcome::empty:
        ++rep.empty;
        break;
      case Outcome::failed:
        ++rep.failed;
        break;
    }
    if (!r.note.empty()) rep.entries.push_back(std::move(r.note));
  }
  return positives;
}

std::vector<RetrievalExample> negative_sampling(std::span<const Document> docs, std::size_t count,
                                                std::uint64_t seed) {
  if (docs.size() < 2) throw Error("negative_sampling: need at least two documents");
  std::vector<const Sentence*> queries;
  for (const auto& d : docs) {
    for (const auto& s : d.sentences) {
      if (s.annotated) queries.push_back(&s);
    }
  }
  std::size_t total_sentences = 0;
  std::map<std::string, std::size_t> doc_sizes;
  for (const auto& d : docs) {
    total_sentences += d.sentences.size();
    doc_sizes[d.doc_id] += d.sentences.size();
  }
  if (queries.empty() || count == 0) return {};

  std::vector<RetrievalExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, std::string_view{"negative"}, i));
    const Sentence& q = *queries[rng.uniform_index(queries.size())];
    // Uniform over the sentences of every other document.
    const std::size_t pool = total_sentences - doc_sizes[q.doc_id];
    if (pool == 0) continue;
    std::size_t pick = rng.uniform_index(pool);
    const Sentence* ctx = nullptr;
    for (const auto& d : docs) {
      if (d.doc_id == q.doc_id) continue;
      if (pick < d.sentences.size()) {
        ctx = &d.sentences[pick];
        break;
      }
      pick -= d.sentences.size();
    }
    out.push_back({q.text(), ctx->text(), 0, Provenance::negative_sampling, std::nullopt,
                   std::nullopt});
  }
  return out;
}

std::vector<RetrievalExample> positive_swap(std::span<const RetrievalExample> positives,
                                            std::uint64_t seed, GenerationReport* report) {
  if (positives.size() < 2) throw Error("positive_swap: need at least two positives");
  std::vector<RetrievalExample> out;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const auto& p = positives[i];
    std::vector<std::size_t> eligible;
    for (std::size_t j = 0; j < positives.size(); ++j) {
      if (j == i) continue;
      const auto& q = positives[j];
      if (!q.entity_surface) continue;
      if (p.query_text.find(*q.entity_surface) != std::string::npos) continue;
      eligible.push_back(j);
    }
    if (eligible.empty()) {
      if (report) {
        ++report->swap_skipped;
        report->entries.push_back("swap skipped: '" + p.entity_surface.value_or("") +
                                  "' query mentions every other entity");
      }
      continue;
    }
    Rng rng(derive_seed(seed, std::string_view{"swap"}, i));
    const auto& q = positives[eligible[rng.uniform_index(eligible.size())]];
    out.push_back({p.query_text, q.context_text, 0, Provenance::positive_swap, q.entity_surface,
                   q.entity_class});
    if (report) ++report->swapped;
  }
  return out;
}

DatasetSplit assemble_dataset(std::span<const RetrievalExample> positives,
                              std::span<const RetrievalExample> negatives, double eval_fraction,
                              std::uint64_t seed) {
  if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
    throw ContractViolation("assemble_dataset: eval_fraction must lie in (0, 1)");
  }
  struct Group {
    std::vector<const RetrievalExample*> members;
    std::size_t pos = 0;
    std::size_t neg = 0;
  };
  std::map<std::string, Group> by_query;
  for (auto set : {positives, negatives}) {
    for (const auto& ex : set) {
      auto& g = by_query[ex.query_text];
      g.members.push_back(&ex);
      (ex.label == 1 ? g.pos : g.neg)++;
    }
  }
  std::size_t pos_groups = 0, neg_groups = 0, total_pos = 0, total_neg = 0;
  std::vector<Group*> groups;
  for (auto& [_, g] : by_query) {
    pos_groups += g.pos > 0;
    neg_groups += g.neg > 0;
    total_pos += g.pos;
    total_neg += g.neg;
    groups.push_back(&g);
  }
  if (pos_groups < 2 || neg_groups < 2) {
    throw Error("assemble_dataset: need at least two query groups per label");
  }
  Rng rng(derive_seed(seed, std::string_view{"split"}));
  rng.shuffle(groups);

  const auto target_pos = static_cast<std::size_t>(std::llround(eval_fraction * total_pos));
  const auto target_neg = static_cast<std::size_t>(std::llround(eval_fraction * total_neg));
  std::size_t eval_pos = 0, eval_neg = 0;
  std::vector<bool> to_eval(groups.size(), false);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const Group& g = *groups[i];
    if (eval_pos + g.pos <= target_pos && eval_neg + g.neg <= target_neg &&
        (eval_pos < target_pos || eval_neg < target_neg)) {
      to_eval[i] = true;
      eval_pos += g.pos;
      eval_neg += g.neg;
    }
  }
  DatasetSplit split;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    auto& dst = to_eval[i] ? split.eval : split.train;
    for (const auto* ex : groups[i]->members) dst.push_back(*ex);
  }
  if (split.eval.empty() || split.train.empty()) {
    throw Error("assemble_dataset: split left one side empty; adjust eval_fraction");
  }
  return split;
}

GeneratedDataset generate_dataset(std::span<const Document> docs, const LlmClient& llm,
                                  const DatagenOptions& options) {
  GeneratedDataset out;
  auto positives = generate_positives(docs, llm, options.seed, &out.report, options);
  std::vector<RetrievalExample> negatives;
  if (options.sampled_per_positive > 0) {
    negatives = negative_sampling(docs, positives.size() * options.sampled_per_positive,
                                  derive_seed(options.seed, std::string_view{"negatives"}));
    out.report.negative_sampled = negatives.size();
  }
  for (std::size_t pass = 0; pass < options.swapped_per_positive; ++pass) {
    auto swaps = positive_swap(positives, derive_seed(options.seed, std::string_view{"swaps"}, pass),
                               &out.report);
    negatives.insert(negatives.end(), swaps.begin(), swaps.end());
  }
  out.split = assemble_dataset(positives, negatives, options.eval_fraction, options.seed);
  return out;
}

}  // namespace docctx
