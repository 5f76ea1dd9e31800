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

#include "docctx/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "docctx/error.hpp"
#include "docctx/text.hpp"

namespace docctx {

namespace fs = std::filesystem;

std::string_view to_string(EntityClass c) {
  switch (c) {
    case EntityClass::PER:
      return "PER";
    case EntityClass::LOC:
      return "LOC";
    case EntityClass::ORG:
      return "ORG";
  }
  return "?";
}

std::optional<EntityClass> parse_entity_class(std::string_view s) {
  if (s == "PER") return EntityClass::PER;
  if (s == "LOC") return EntityClass::LOC;
  if (s == "ORG") return EntityClass::ORG;
  return std::nullopt;
}

std::optional<Tag> parse_tag(std::string_view s) {
  if (s == "O") return Tag::outside();
  if (s.size() < 3 || s[1] != '-') return std::nullopt;
  auto cls = parse_entity_class(s.substr(2));
  if (!cls) return std::nullopt;
  if (s[0] == 'B') return Tag::begin(*cls);
  if (s[0] == 'I') return Tag::inside(*cls);
  return std::nullopt;
}

std::string to_string(Tag t) {
  switch (t.prefix) {
    case Tag::Prefix::O:
      return "O";
    case Tag::Prefix::B:
      return "B-" + std::string(to_string(t.cls));
    case Tag::Prefix::I:
      return "I-" + std::string(to_string(t.cls));
  }
  return "O";
}

std::vector<std::string> Sentence::words() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

std::vector<Tag> Sentence::tags() const {
  std::vector<Tag> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.tag);
  return out;
}

std::string Sentence::text() const { return text::join(words(), " "); }

std::size_t Document::annotated_count() const {
  return static_cast<std::size_t>(
      std::count_if(sentences.begin(), sentences.end(), [](const Sentence& s) { return s.annotated; }));
}

std::vector<Span> decode_spans(std::span<const Tag> tags) {
  std::vector<Span> spans;
  bool open = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const Tag& t = tags[i];
    if (t.is_outside()) {
      open = false;
      continue;
    }
    const bool continues =
        open && t.prefix == Tag::Prefix::I && spans.back().entity_class == t.cls;
    if (continues) {
      spans.back().end = i + 1;
    } else {
      spans.push_back({t.cls, i, i + 1});
      open = true;
    }
  }
  return spans;
}

std::vector<Tag> encode_spans(std::span<const Span> spans, std::size_t length) {
  std::vector<Tag> tags(length, Tag::outside());
  for (const auto& s : spans) {
    for (std::size_t i = s.start; i < s.end && i < length; ++i) {
      tags[i] = i == s.start ? Tag::begin(s.entity_class) : Tag::inside(s.entity_class);
    }
  }
  return tags;
}

std::vector<Mention> extract_mentions(const Sentence& sentence) {
  if (!sentence.annotated) {
    throw ContractViolation("extract_mentions: sentence " + sentence.doc_id + ":" +
                            std::to_string(sentence.index) + " is not annotated");
  }
  const auto tags = sentence.tags();
  std::vector<Mention> out;
  for (const Span& s : decode_spans(tags)) {
    std::string surface;
    for (std::size_t i = s.start; i < s.end; ++i) {
      if (i > s.start) surface += ' ';
      surface += sentence.tokens[i].text;
    }
    out.push_back({s.entity_class, s.start, s.end, std::move(surface)});
  }
  return out;
}

EntityStrings unique_entity_strings(std::span<const Document> docs) {
  EntityStrings out;
  for (const auto& doc : docs) {
    for (const auto& s : doc.sentences) {
      if (!s.annotated) continue;
      for (auto& m : extract_mentions(s)) out[m.entity_class].insert(std::move(m.surface));
    }
  }
  return out;
}

std::vector<std::vector<Token>> parse_annotated(std::istream& in, const std::string& source) {
  std::vector<std::vector<Token>> sentences;
  std::vector<Token> current;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!current.empty()) sentences.push_back(std::move(current));
      current.clear();
      continue;
    }
    const auto tab = line.rfind('\t');
    auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
    if (tab == std::string::npos) throw ParseError(where() + "expected '<token>\\t<tag>'");
    std::string_view tok(line.data(), tab);
    std::string_view tag_text(line.data() + tab + 1, line.size() - tab - 1);
    if (tok.empty()) throw ParseError(where() + "empty token");
    auto tag = parse_tag(tag_text);
    if (!tag) throw ParseError(where() + "malformed tag '" + std::string(tag_text) + "'");
    current.push_back({std::string(tok), *tag});
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

void write_annotated(std::ostream& out, const Document& doc) {
  bool first = true;
  for (const auto& s : doc.sentences) {
    if (!s.annotated) continue;
    if (!first) out << '\n';
    first = false;
    for (const auto& t : s.tokens) out << t.text << '\t' << to_string(t.tag) << '\n';
  }
}

namespace {

// Non-whitespace characters of `raw` and, for each, its raw offset.
struct Normalized {
  std::string chars;
  std::vector<std::size_t> offsets;
};

Normalized normalize(std::string_view raw) {
  Normalized n;
  n.chars.reserve(raw.size());
  n.offsets.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (text::is_space(raw[i])) continue;
    n.chars.push_back(raw[i]);
    n.offsets.push_back(i);
  }
  return n;
}

std::string squeeze(const std::vector<Token>& tokens) {
  std::string s;
  for (const auto& t : tokens) {
    for (char c : t.text) {
      if (!text::is_space(c)) s.push_back(c);
    }
  }
  return s;
}

// Raw offset just past the first chapter, if it can be located.
std::optional<std::size_t> locate_chapter_end(const std::vector<std::vector<Token>>& annotated,
                                              std::string_view full_text) {
  if (annotated.empty()) return std::nullopt;
  const Normalized norm = normalize(full_text);
  const std::string first = squeeze(annotated.front());
  const std::string last = squeeze(annotated.back());
  if (last.empty()) return std::nullopt;
  std::size_t from = norm.chars.find(first);
  if (from == std::string::npos) from = 0;
  const std::size_t pos = norm.chars.find(last, from);
  if (pos == std::string::npos) return std::nullopt;
  return norm.offsets[pos + last.size() - 1] + 1;
}

}  // namespace

Document assemble_document(std::string doc_id, std::string title,
                           std::vector<std::vector<Token>> annotated,
                           std::string_view full_text) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  doc.title = std::move(title);
  if (annotated.empty()) {
    throw ParseError(doc.doc_id + ": annotated chapter has no sentences");
  }
  const auto chapter_end = locate_chapter_end(annotated, full_text);
  const std::string_view remainder =
      chapter_end ? full_text.substr(*chapter_end) : full_text;

  for (auto& toks : annotated) {
    Sentence s{doc.doc_id, doc.sentences.size(), std::move(toks), true};
    doc.sentences.push_back(std::move(s));
  }
  doc.first_chapter_end = doc.sentences.size();
  for (auto& words : text::segment_sentences(remainder)) {
    Sentence s{doc.doc_id, doc.sentences.size(), {}, false};
    s.tokens.reserve(words.size());
    for (auto& w : words) s.tokens.push_back({std::move(w), Tag::outside()});
    doc.sentences.push_back(std::move(s));
  }
  return doc;
}

std::vector<ManifestEntry> read_manifest(const fs::path& dir) {
  std::vector<ManifestEntry> entries;
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(manifest.string() + ": " + e.what());
    }
    if (!j.contains("books") || !j["books"].is_array()) {
      throw ParseError(manifest.string() + ": expected a \"books\" array");
    }
    for (const auto& b : j["books"]) {
      ManifestEntry e;
      try {
        e.doc_id = b.at("doc_id").get<std::string>();
        e.title = b.value("title", e.doc_id);
        e.annotated = dir / b.value("annotated", e.doc_id + ".conll");
        e.full_text = dir / b.value("full_text", e.doc_id + ".txt");
      } catch (const nlohmann::json::exception& ex) {
        throw ParseError(manifest.string() + ": " + ex.what());
      }
      entries.push_back(std::move(e));
    }
    return entries;
  }
  if (!fs::is_directory(dir)) throw Error(dir.string() + ": not a directory");
  for (const auto& de : fs::directory_iterator(dir)) {
    if (!de.is_regular_file() || de.path().extension() != ".conll") continue;
    const std::string id = de.path().stem().string();
    entries.push_back({id, id, de.path(), dir / (id + ".txt")});
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
  return entries;
}

std::vector<Document> load_ner_corpus(const fs::path& dir) {
  const auto entries = read_manifest(dir);
  if (entries.empty()) throw Error(dir.string() + ": no documents found");

  std::set<std::string> seen;
  std::vector<std::string> missing;
  for (const auto& e : entries) {
    if (!seen.insert(e.doc_id).second) throw Error("duplicate doc_id '" + e.doc_id + "'");
    if (!fs::exists(e.full_text)) missing.push_back(e.doc_id + " (" + e.full_text.string() + ")");
  }
  if (!missing.empty()) {
    std::string msg = "missing full-text file for:";
    for (const auto& m : missing) msg += " " + m;
    throw Error(msg);
  }

  std::vector<Document> docs;
  for (const auto& e : entries) {
    std::ifstream ann(e.annotated);
    if (!ann) throw Error("cannot open " + e.annotated.string());
    auto sentences = parse_annotated(ann, e.annotated.string());
    std::ifstream full(e.full_text, std::ios::binary);
    std::stringstream buf;
    buf << full.rdbuf();
    docs.push_back(assemble_document(e.doc_id, e.title, std::move(sentences), buf.str()));
    validate_document(docs.back());
  }
  std::sort(docs.begin(), docs.end(),
            [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
  return docs;
}

void validate_document(const Document& doc) {
  auto fail = [&](const std::string& what) {
    throw ContractViolation(doc.doc_id + ": " + what);
  };
  if (doc.first_chapter_end == 0 || doc.first_chapter_end > doc.sentences.size()) {
    fail("first_chapter_end out of range");
  }
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    const Sentence& s = doc.sentences[i];
    if (s.index != i) fail("sentence indices are not dense");
    if (s.doc_id != doc.doc_id) fail("sentence " + std::to_string(i) + " has foreign doc_id");
    if (s.annotated && i >= doc.first_chapter_end) {
      fail("annotated sentence " + std::to_string(i) + " lies outside the first chapter");
    }
    if (s.tokens.empty()) fail("sentence " + std::to_string(i) + " is empty");
    for (const auto& t : s.tokens) {
      if (t.text.empty() || t.text.find('\n') != std::string::npos) {
        fail("sentence " + std::to_string(i) + " has an invalid token");
      }
      if (!s.annotated && !t.tag.is_outside()) {
        fail("unannotated sentence " + std::to_string(i) + " carries tags");
      }
    }
  }
}

}  // namespace docctx
