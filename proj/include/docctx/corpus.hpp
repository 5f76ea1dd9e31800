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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace docctx {

enum class EntityClass : std::uint8_t { PER, LOC, ORG };

inline constexpr EntityClass kEntityClasses[] = {EntityClass::PER, EntityClass::LOC,
                                                 EntityClass::ORG};

std::string_view to_string(EntityClass c);
std::optional<EntityClass> parse_entity_class(std::string_view s);

// BIO label. All O tags compare equal regardless of the (unused) class.
struct Tag {
  enum class Prefix : std::uint8_t { O, B, I };

  Prefix prefix = Prefix::O;
  EntityClass cls = EntityClass::PER;

  static constexpr Tag outside() { return {}; }
  static constexpr Tag begin(EntityClass c) { return {Prefix::B, c}; }
  static constexpr Tag inside(EntityClass c) { return {Prefix::I, c}; }

  bool is_outside() const { return prefix == Prefix::O; }

  friend bool operator==(const Tag& a, const Tag& b) {
    if (a.prefix != b.prefix) return false;
    return a.prefix == Prefix::O || a.cls == b.cls;
  }
};

// Accepts exactly O | (B|I)-(PER|LOC|ORG).
std::optional<Tag> parse_tag(std::string_view s);
std::string to_string(Tag t);

struct Token {
  std::string text;
  Tag tag;
};

struct SentenceRef {
  std::string doc_id;
  std::size_t index = 0;

  auto operator<=>(const SentenceRef&) const = default;
};

struct Sentence {
  std::string doc_id;
  std::size_t index = 0;
  std::vector<Token> tokens;
  // Unannotated sentences carry O placeholders that must not be read as gold.
  bool annotated = false;

  SentenceRef ref() const { return {doc_id, index}; }
  std::vector<std::string> words() const;
  std::vector<Tag> tags() const;
  // Tokens joined by single spaces.
  std::string text() const;
};

struct Document {
  std::string doc_id;
  std::string title;
  std::vector<Sentence> sentences;
  // Exclusive end of the first chapter.
  std::size_t first_chapter_end = 0;

  std::size_t annotated_count() const;
};

struct Mention {
  EntityClass entity_class = EntityClass::PER;
  std::size_t start = 0;  // token span [start, end)
  std::size_t end = 0;
  std::string surface;

  friend bool operator==(const Mention&, const Mention&) = default;
};

// Typed span without surface text; shared with the evaluation code.
struct Span {
  EntityClass entity_class;
  std::size_t start;
  std::size_t end;

  auto operator<=>(const Span&) const = default;
};

// Lenient BIO decoding: maximal same-class B/I runs form a span; an I- tag
// that does not continue a same-class run opens a new span. A B- tag always
// opens a new span.
std::vector<Span> decode_spans(std::span<const Tag> tags);
std::vector<Tag> encode_spans(std::span<const Span> spans, std::size_t length);

// Throws ContractViolation on an unannotated sentence.
std::vector<Mention> extract_mentions(const Sentence& sentence);

using EntityStrings = std::map<EntityClass, std::set<std::string>>;
EntityStrings unique_entity_strings(std::span<const Document> docs);

// Annotated file: "<token>\t<tag>" per line, blank line between sentences.
// `source` is used in error messages.
std::vector<std::vector<Token>> parse_annotated(std::istream& in, const std::string& source);
// Canonical form of the annotated (first-chapter) sentences of `doc`.
void write_annotated(std::ostream& out, const Document& doc);

// Builds a document from its annotated first chapter and the full book text.
// The chapter end is located in the full text by matching the last annotated
// sentence with whitespace removed; everything after it is segmented and
// appended unannotated. Without a match the whole full text is appended.
Document assemble_document(std::string doc_id, std::string title,
                           std::vector<std::vector<Token>> annotated,
                           std::string_view full_text);

struct ManifestEntry {
  std::string doc_id;
  std::string title;
  std::filesystem::path annotated;
  std::filesystem::path full_text;
};

// Reads `manifest.json` in `dir` when present; otherwise pairs every
// `<doc_id>.conll` with `<doc_id>.txt`. Paths are resolved against `dir`.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir);

// Loaded documents are sorted by doc_id.
std::vector<Document> load_ner_corpus(const std::filesystem::path& dir);

// Throws ContractViolation describing the first broken invariant.
void validate_document(const Document& doc);

}  // namespace docctx
