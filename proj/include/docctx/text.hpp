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

#include <string>
#include <string_view>
#include <vector>

namespace docctx::text {

// Rule-based splitter for raw book text.
//
// A sentence ends at a run of '.', '!' or '?' (optionally followed by closing
// quotes or brackets) when the next non-space character is uppercase or an
// opening quote. A lone '.' closing a known abbreviation ("Mr.", "Dr.", ...)
// or a single-letter initial does not end a sentence.
//
// Tokens are whitespace-separated words with leading and trailing punctuation
// split off one character at a time. Abbreviations keep their period.

bool is_space(char c);
bool is_abbreviation(std::string_view word_with_period);

// Raw sentence spans, trimmed, in order. Never returns an empty span.
std::vector<std::string_view> split_sentence_spans(std::string_view raw);

std::vector<std::string> tokenize(std::string_view sentence);

std::vector<std::vector<std::string>> segment_sentences(std::string_view raw);

// Text up to and including the end of the first sentence, or the whole
// (trimmed) input when no boundary is found.
std::string first_sentence(std::string_view raw);

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool has_alnum(std::string_view s);
bool starts_upper(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace docctx::text
