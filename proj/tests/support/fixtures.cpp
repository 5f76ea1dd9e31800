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

#include "fixtures.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "docctx/datagen.hpp"
#include "docctx/rerank.hpp"
#include "docctx/text.hpp"

namespace docctx::testing {

namespace fs = std::filesystem;

Sentence make_sentence(const std::string& doc_id, std::size_t index, const std::string& spec,
                       bool annotated) {
  Sentence s;
  s.doc_id = doc_id;
  s.index = index;
  s.annotated = annotated;
  std::istringstream in(spec);
  std::string word;
  while (in >> word) {
    Token t;
    auto slash = word.rfind('/');
    std::optional<Tag> tag;
    if (slash != std::string::npos && slash > 0) tag = parse_tag(word.substr(slash + 1));
    if (tag) {
      t.text = word.substr(0, slash);
      t.tag = annotated ? *tag : Tag::outside();
    } else {
      t.text = word;
    }
    s.tokens.push_back(std::move(t));
  }
  return s;
}

Document make_doc(const std::string& doc_id, const std::vector<std::string>& specs,
                  std::size_t annotated, std::size_t chapter_end) {
  Document d;
  d.doc_id = doc_id;
  d.title = "Title of " + doc_id;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    d.sentences.push_back(make_sentence(doc_id, i, specs[i], i < annotated));
  }
  if (chapter_end == 0) chapter_end = annotated > 0 ? annotated : specs.size();
  d.first_chapter_end = chapter_end;
  return d;
}

namespace {

constexpr const char* kWords[] = {
    "the",   "a",      "river", "stone", "night", "watch",  "sword", "march", "company",
    "old",   "tower",  "rain",  "road",  "fire",  "silent", "cold",  "wind",  "north",
    "ran",   "looked", "saw",   "took",  "city",  "gate",   "of",    "and",   "to",
    "man",   "horse",  "dark",  "light", "creation", "movement", "kindness", "city",
    "soldier", "sailor", "ability", "far", "under", "over"};
constexpr const char* kNames[] = {"Croaker", "Elmo",   "Goblin", "Raven",  "Darling",
                                  "Silent",  "Juniper", "Oar",   "Roses",  "Lady",
                                  "Taken",   "Limper",  "Soulcatcher", "Tracker"};
constexpr const char* kPunct[] = {",", ";", "'"};

std::string pick(Rng& rng, std::span<const char* const> xs) {
  return xs[rng.uniform_index(xs.size())];
}

}  // namespace

Document random_document(Rng& rng, const std::string& doc_id, std::size_t min_sentences,
                         std::size_t max_sentences) {
  const std::size_t count = min_sentences + rng.uniform_index(max_sentences - min_sentences + 1);
  std::vector<std::string> specs;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t len = 1 + rng.uniform_index(12);
    std::string spec;
    for (std::size_t j = 0; j < len; ++j) {
      const double u = rng.uniform_real();
      std::string w;
      if (u < 0.2) {
        w = pick(rng, kNames);
      } else if (u < 0.27) {
        w = pick(rng, kPunct);
      } else {
        w = pick(rng, kWords);
        if (j == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
      }
      spec += w + " ";
    }
    spec += ".";
    specs.push_back(spec);
  }
  const std::size_t chapter = 1 + rng.uniform_index(count);
  return make_doc(doc_id, specs, chapter, chapter);
}

std::vector<Tag> random_tags(Rng& rng, std::size_t length) {
  std::vector<Tag> tags(length);
  for (auto& t : tags) {
    const std::size_t r = rng.uniform_index(7);
    if (r == 0) continue;
    const auto cls = kEntityClasses[(r - 1) % 3];
    t = r <= 3 ? Tag::begin(cls) : Tag::inside(cls);
  }
  return tags;
}

std::vector<Tag> random_bio(Rng& rng, std::size_t length) {
  std::vector<Tag> tags(length);
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t r = rng.uniform_index(4);
    if (r == 0) continue;
    if (r == 1 && i > 0 && !tags[i - 1].is_outside()) {
      tags[i] = Tag::inside(tags[i - 1].cls);
    } else if (r >= 2) {
      tags[i] = Tag::begin(kEntityClasses[rng.uniform_index(3)]);
    }
  }
  return tags;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> oracle_terms(const Sentence& s) {
  std::vector<std::string> out;
  for (const auto& t : s.tokens) {
    bool keep = false;
    std::string lower;
    for (unsigned char c : t.text) {
      if (std::isalnum(c) || c >= 0x80) keep = true;
      lower.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    }
    if (keep) out.push_back(lower);
  }
  return out;
}

}  // namespace

std::vector<double> bm25_oracle_scores(const Document& doc, ContextWindow window,
                                       const Sentence& query, Bm25Params params) {
  std::size_t end = window == ContextWindow::first_chapter ? doc.first_chapter_end
                                                           : doc.sentences.size();
  std::vector<std::vector<std::string>> sents;
  for (std::size_t i = 0; i < end; ++i) sents.push_back(oracle_terms(doc.sentences[i]));
  const double n = static_cast<double>(sents.size());
  double total = 0;
  for (const auto& s : sents) total += static_cast<double>(s.size());
  const double avg = total / n;

  auto qterms = oracle_terms(query);
  std::sort(qterms.begin(), qterms.end());
  qterms.erase(std::unique(qterms.begin(), qterms.end()), qterms.end());

  std::vector<double> scores(sents.size(), 0.0);
  for (const auto& term : qterms) {
    double df = 0;
    for (const auto& s : sents) {
      if (std::find(s.begin(), s.end(), term) != s.end()) df += 1;
    }
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    for (std::size_t i = 0; i < sents.size(); ++i) {
      const double tf = static_cast<double>(std::count(sents[i].begin(), sents[i].end(), term));
      if (tf == 0) continue;
      const double len = static_cast<double>(sents[i].size());
      scores[i] += idf * tf * (params.k1 + 1) /
                   (tf + params.k1 * (1 - params.b + params.b * len / avg));
    }
  }
  return scores;
}

std::vector<std::pair<std::size_t, double>> bm25_oracle_topn(const Document& doc,
                                                             ContextWindow window,
                                                             const Sentence& query, std::size_t n,
                                                             Bm25Params params) {
  auto scores = bm25_oracle_scores(doc, window, query, params);
  std::vector<std::pair<std::size_t, double>> all;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > 0 && !(query.doc_id == doc.doc_id && query.index == i)) {
      all.emplace_back(i, scores[i]);
    }
  }
  // Bubble-style exhaustive ordering: compare every pair.
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double a = all[j].second, b = all[i].second;
      const bool tie = std::abs(a - b) <= kBm25TieTolerance * std::max(1.0, std::abs(b));
      const bool better = tie ? all[j].first < all[i].first : a > b;
      if (better) std::swap(all[i], all[j]);
    }
  }
  if (all.size() > n) all.resize(n);
  return all;
}

std::map<std::size_t, Source> pool_union_oracle(const RetrievalContext& ctx,
                                                const Sentence& query, std::size_t n,
                                                std::uint64_t seed) {
  std::map<std::size_t, Source> out;
  auto add = [&](const std::vector<Candidate>& cs) {
    for (const auto& c : cs) {
      if (c.sentence.index == query.index) continue;
      auto it = out.find(c.sentence.index);
      if (it == out.end() || static_cast<int>(c.source) < static_cast<int>(it->second)) {
        out[c.sentence.index] = c.source;
      }
    }
  };
  auto around = surrounding(ctx.document(), ctx.window(), query, n);
  add(around.after);
  add(around.before);
  add(samenoun_topn(ctx.nouns(), query, n, seed));
  add(bm25_topn(ctx.bm25(), query, n));
  return out;
}

// ---------------------------------------------------------------------------

BenefitCorpus make_benefit_corpus() {
  struct Cast {
    std::vector<std::string> known;
    std::string place;
    std::vector<std::string> hidden;
  };
  const std::vector<Cast> casts = {
      {{"Frodo", "Samwise"}, "Bree", {"Croaker", "Elmo", "Goblin"}},
      {{"Gandalf", "Aragorn"}, "Rivendell", {"Raven", "Darling", "Juniper"}},
      {{"Boromir", "Legolas"}, "Moria", {"Otto", "Hagop", "Candy"}},
      {{"Gimli", "Faramir"}, "Rohan", {"Murgen", "Lofty", "Shed"}},
      {{"Eowyn", "Pippin"}, "Gondor", {"Sahra", "Tobo", "Willow"}},
  };
  const std::vector<std::string> actions = {
      "whistled a tune by the hearth", "counted coins beside the wagon",
      "sharpened a blade under the eaves", "limped across the muddy yard",
      "laughed at a bitter joke", "stared into the dying embers",
  };
  const std::vector<std::string> fillers = {
      "The wind howled over the barren hills .",
      "Rain drummed on the slate roofs until dawn .",
      "A crow circled above the empty road .",
      "Smoke drifted from the chimneys of the village .",
      "The river ran high after the storms .",
      "Bells rang somewhere beyond the walls .",
      "Nobody spoke about the harvest that year .",
      "The lanterns guttered in the damp cellar .",
  };

  BenefitCorpus out;
  for (std::size_t d = 0; d < casts.size(); ++d) {
    const Cast& c = casts[d];
    const std::string id = "book" + std::to_string(d + 1);
    for (const auto& k : c.known) out.gazetteer[k] = EntityClass::PER;
    out.gazetteer[c.place] = EntityClass::LOC;

    std::vector<std::string> chapter;
    for (std::size_t h = 0; h < c.hidden.size(); ++h) {
      for (std::size_t rep = 0; rep < 2; ++rep) {
        chapter.push_back(c.hidden[h] + "/B-PER " + actions[(h * 2 + rep + d) % actions.size()] +
                          " .");
        ++out.hidden_mentions;
        chapter.push_back(fillers[(h * 2 + rep + d) % fillers.size()]);
      }
      chapter.push_back(c.known[h % 2] + "/B-PER rode toward " + c.place + "/B-LOC at first light .");
    }
    const std::size_t annotated = chapter.size();

    std::vector<std::string> rest;
    for (std::size_t h = 0; h < c.hidden.size(); ++h) {
      rest.push_back(fillers[(h + 3 + d) % fillers.size()]);
      rest.push_back("Late that night " + c.known[(h + 1) % 2] + " " + c.hidden[h] +
                     " kept the watch together .");
      rest.push_back(fillers[(h + 5 + d) % fillers.size()]);
    }
    std::vector<std::string> all = chapter;
    all.insert(all.end(), rest.begin(), rest.end());
    out.docs.push_back(make_doc(id, all, annotated, annotated));
  }
  return out;
}

std::string train_mock_lexical_model(const std::vector<Document>& docs, std::uint64_t seed,
                                     const fs::path& path) {
  DatagenOptions opt;
  opt.seed = seed;
  auto generated = generate_dataset(docs, TemplateLlmClient(), opt);
  return train_lexical_scorer(generated.split.train, 300, 0.5, path.string());
}

void write_corpus_dir(const fs::path& dir, const std::vector<Document>& docs) {
  fs::create_directories(dir);
  for (const auto& d : docs) {
    std::ofstream conll(dir / (d.doc_id + ".conll"));
    write_annotated(conll, d);
    std::ofstream txt(dir / (d.doc_id + ".txt"));
    for (std::size_t i = 0; i < d.sentences.size(); ++i) {
      // Sentences are joined so the splitter sees a capitalized next word.
      txt << d.sentences[i].text() << (i + 1 < d.sentences.size() ? " " : "\n");
    }
  }
}

void write_gazetteer(const fs::path& path, const Gazetteer& g) {
  std::ofstream out(path);
  for (const auto& [surface, cls] : g) out << surface << "\t" << to_string(cls) << "\n";
}

fs::path temp_dir(const std::string& name) {
  static int counter = 0;
  auto dir = fs::temp_directory_path() /
             ("docctx_test_" + name + "_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace docctx::testing
