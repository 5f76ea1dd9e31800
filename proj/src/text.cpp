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

#include "docctx/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace docctx::text {

namespace {

constexpr std::array<std::string_view, 28> kAbbreviations = {
    "mr.",   "mrs.", "ms.",  "dr.",  "st.",  "jr.",  "sr.",  "prof.", "capt.", "col.",
    "gen.",  "lt.",  "sgt.", "rev.", "mt.",  "vs.",  "etc.", "e.g.",  "i.e.",  "no.",
    "messrs.", "hon.", "gov.", "maj.", "cpl.", "ft.", "esq.", "mme."};

// Multibyte typographic quotes treated as punctuation.
constexpr std::array<std::string_view, 4> kOpenQuotes = {"“", "‘", "\"", "'"};
constexpr std::array<std::string_view, 6> kCloseMarks = {"”", "’", "\"", "'", ")", "]"};

bool starts_with_any(std::string_view s, std::size_t pos, auto const& set, std::size_t* len) {
  for (std::string_view q : set) {
    if (s.substr(pos, q.size()) == q) {
      *len = q.size();
      return true;
    }
  }
  return false;
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_punct_ascii(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

// Length of a punctuation "character" at the front of s (0 if none).
std::size_t punct_front(std::string_view s) {
  if (s.empty()) return 0;
  if (is_punct_ascii(s[0])) return 1;
  for (std::string_view q : {std::string_view{"“"}, std::string_view{"”"},
                             std::string_view{"‘"}, std::string_view{"’"},
                             std::string_view{"—"}}) {
    if (s.substr(0, q.size()) == q) return q.size();
  }
  return 0;
}

std::size_t punct_back(std::string_view s) {
  if (s.empty()) return 0;
  if (is_punct_ascii(s.back())) return 1;
  for (std::string_view q : {std::string_view{"“"}, std::string_view{"”"},
                             std::string_view{"‘"}, std::string_view{"’"},
                             std::string_view{"—"}}) {
    if (s.size() >= q.size() && s.substr(s.size() - q.size()) == q) return q.size();
  }
  return 0;
}

// Word ending right before position `dot` (exclusive), back to whitespace,
// with leading punctuation removed.
std::string_view word_before(std::string_view raw, std::size_t dot) {
  std::size_t start = dot;
  while (start > 0 && !is_space(raw[start - 1])) --start;
  std::string_view w = raw.substr(start, dot - start);
  while (std::size_t n = punct_front(w)) {
    if (n == w.size()) break;
    w.remove_prefix(n);
  }
  return w;
}

// Single capital letter other than the pronoun "I".
bool is_initial(std::string_view word) {
  return word.size() == 1 && word[0] != 'I' && std::isupper(static_cast<unsigned char>(word[0]));
}

}  // namespace

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_abbreviation(std::string_view word_with_period) {
  const std::string lower = to_lower_ascii(word_with_period);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) != kAbbreviations.end();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool has_alnum(std::string_view s) {
  // Non-ASCII bytes count as letters so accented names are terms.
  return std::any_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u) != 0;
  });
}

bool starts_upper(std::string_view s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0])) != 0;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string_view> split_sentence_spans(std::string_view raw) {
  std::vector<std::string_view> spans;
  std::size_t start = 0;
  std::size_t i = 0;
  auto emit = [&](std::size_t end) {
    std::string_view s = trim(raw.substr(start, end - start));
    if (!s.empty()) spans.push_back(s);
    start = end;
  };
  while (i < raw.size()) {
    if (!is_terminator(raw[i])) {
      ++i;
      continue;
    }
    const std::size_t run_begin = i;
    while (i < raw.size() && is_terminator(raw[i])) ++i;
    std::size_t end = i;
    std::size_t len = 0;
    while (end < raw.size() && starts_with_any(raw, end, kCloseMarks, &len)) end += len;
    if (end < raw.size() && !is_space(raw[end])) continue;

    if (i - run_begin == 1 && raw[run_begin] == '.') {
      std::string_view w = word_before(raw, run_begin);
      std::string with_dot(w);
      with_dot += '.';
      if (is_abbreviation(with_dot) || is_initial(w)) continue;
    }

    std::size_t next = end;
    while (next < raw.size() && is_space(raw[next])) ++next;
    if (next >= raw.size()) {
      emit(end);
      i = end;
      break;
    }
    const bool upper = std::isupper(static_cast<unsigned char>(raw[next])) != 0;
    const bool quote = starts_with_any(raw, next, kOpenQuotes, &len);
    if (upper || quote) {
      emit(end);
      i = end;
    }
  }
  emit(raw.size());
  return spans;
}

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && is_space(sentence[i])) ++i;
    std::size_t j = i;
    while (j < sentence.size() && !is_space(sentence[j])) ++j;
    std::string_view word = sentence.substr(i, j - i);
    i = j;
    if (word.empty()) continue;

    while (std::size_t n = punct_front(word)) {
      tokens.emplace_back(word.substr(0, n));
      word.remove_prefix(n);
    }
    std::vector<std::string_view> trailing;
    while (!word.empty()) {
      if (word.back() == '.' && (is_abbreviation(word) || is_initial(word.substr(0, word.size() - 1)))) {
        break;
      }
      std::size_t n = punct_back(word);
      if (n == 0) break;
      trailing.push_back(word.substr(word.size() - n));
      word.remove_suffix(n);
    }
    if (!word.empty()) tokens.emplace_back(word);
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) tokens.emplace_back(*it);
  }
  return tokens;
}

std::vector<std::vector<std::string>> segment_sentences(std::string_view raw) {
  std::vector<std::vector<std::string>> out;
  for (std::string_view span : split_sentence_spans(raw)) {
    auto toks = tokenize(span);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

std::string first_sentence(std::string_view raw) {
  auto spans = split_sentence_spans(raw);
  if (spans.empty()) return {};
  return std::string(spans.front());
}

}  // namespace docctx::text
