// Copyright 2026 The DAPMAV Authors.
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
//
// Text preprocessing: tokenization, stopword removal, short-document
// filtering and rare-word pruning. All stages are pure and deterministic;
// the same input and thresholds always produce byte-identical output.

#ifndef DAPMAV_PREPROCESS_HPP_
#define DAPMAV_PREPROCESS_HPP_

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "dapmav/core.hpp"

namespace dapmav {

struct Token {
  std::string surface;           // lowercase, no whitespace
  std::uint32_t position_index;  // ordinal within its document after filtering
};

struct Document {
  std::string doc_id;
  PostKind kind = PostKind::submission;
  std::vector<Token> tokens;
  NarrativeMetadata metadata;
  std::int64_t created_utc = 0;
};

using Corpus = std::vector<Document>;

// Dense word ids 0..V-1, assigned in lexicographic order.
struct Vocabulary {
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::unordered_map<std::string, std::uint32_t> ids;

  std::size_t size() const { return words.size(); }
};

using Stoplist = std::unordered_set<std::string>;

namespace detail {

inline bool is_word_byte(unsigned char c) {
  // Bytes >= 0x80 are UTF-8 continuation/lead bytes; they pass through so
  // non-ASCII words survive intact. Case folding is ASCII-only.
  return std::isalnum(c) != 0 || c >= 0x80;
}

inline char ascii_lower(unsigned char c) {
  return static_cast<char>(std::tolower(c));
}

}  // namespace detail

// Lowercases and splits on whitespace and punctuation. Apostrophes and
// hyphens are kept when they sit between word characters ("don't",
// "e-mail"), and a period is kept between digits ("4.5"). Pure-punctuation
// tokens are dropped; numerals are kept.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::string cur;
  auto flush = [&]() {
    if (!cur.empty()) {
      tokens.push_back(
          {std::move(cur), static_cast<std::uint32_t>(tokens.size())});
      cur.clear();
    }
  };
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (detail::is_word_byte(c)) {
      cur += detail::ascii_lower(c);
      continue;
    }
    bool joins = false;
    if (!cur.empty() && i + 1 < n &&
        detail::is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
      if (c == '\'' || c == '-') {
        joins = true;
      } else if (c == '.') {
        joins = std::isdigit(static_cast<unsigned char>(text[i - 1])) != 0 &&
                std::isdigit(static_cast<unsigned char>(text[i + 1])) != 0;
      }
    }
    if (joins)
      cur += static_cast<char>(c);
    else
      flush();
  }
  flush();
  return tokens;
}

// Removes exact stoplist matches and reindexes positions contiguously.
inline std::vector<Token> remove_stopwords(const std::vector<Token>& tokens,
                                           const Stoplist& stoplist) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) {
    if (stoplist.count(t.surface)) continue;
    out.push_back({t.surface, static_cast<std::uint32_t>(out.size())});
  }
  return out;
}

// Keeps documents with at least min_tokens tokens (boundary inclusive).
inline Corpus filter_short_documents(Corpus corpus, std::size_t min_tokens) {
  if (min_tokens == 0) return corpus;
  const std::size_t before = corpus.size();
  Corpus out;
  out.reserve(corpus.size());
  for (auto& doc : corpus)
    if (doc.tokens.size() >= min_tokens) out.push_back(std::move(doc));
  if (before > 0 && out.empty())
    throw DataError("short-document filter removed all " +
                    std::to_string(before) + " documents (min_tokens=" +
                    std::to_string(min_tokens) + ")");
  return out;
}

inline Vocabulary build_vocabulary(const Corpus& corpus) {
  std::map<std::string, std::uint64_t> freq;
  for (const Document& doc : corpus)
    for (const Token& t : doc.tokens) ++freq[t.surface];
  Vocabulary vocab;
  vocab.words.reserve(freq.size());
  for (auto& [word, count] : freq) {
    vocab.ids.emplace(word, static_cast<std::uint32_t>(vocab.words.size()));
    vocab.words.push_back(word);
    vocab.counts.push_back(count);
  }
  return vocab;
}

// Removes word types occurring fewer than min_count times across the corpus
// and rebuilds the vocabulary over what remains. Document order is kept.
// The short-document filter must be re-applied by the caller afterwards
// (see finish_preprocess).
inline std::pair<Corpus, Vocabulary> prune_rare_words(Corpus corpus,
                                                      std::size_t min_count) {
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const Document& doc : corpus)
    for (const Token& t : doc.tokens) ++freq[t.surface];
  for (Document& doc : corpus) {
    std::vector<Token> kept;
    kept.reserve(doc.tokens.size());
    for (Token& t : doc.tokens) {
      if (freq[t.surface] < min_count) continue;
      kept.push_back(
          {std::move(t.surface), static_cast<std::uint32_t>(kept.size())});
    }
    doc.tokens = std::move(kept);
  }
  Vocabulary vocab = build_vocabulary(corpus);
  if (vocab.size() == 0)
    throw DataError("rare-word pruning (min_count=" +
                    std::to_string(min_count) + ") emptied the vocabulary");
  return {std::move(corpus), std::move(vocab)};
}

// Corpus-level tail of the pipeline: rare-word pruning followed by the
// short-document filter, repeated until both thresholds hold simultaneously
// (dropping a document can push another word type under min_count).
inline std::pair<Corpus, Vocabulary> finish_preprocess(Corpus corpus,
                                                       std::size_t min_count,
                                                       std::size_t min_tokens) {
  for (;;) {
    auto [pruned, vocab] = prune_rare_words(std::move(corpus), min_count);
    std::size_t docs_before = pruned.size();
    Corpus filtered = filter_short_documents(std::move(pruned), min_tokens);
    if (filtered.size() == docs_before)
      return {std::move(filtered), std::move(vocab)};
    corpus = std::move(filtered);
  }
}

inline Stoplist load_stoplist(const std::filesystem::path& path) {
  Stoplist list;
  for (const std::string& line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    list.insert(line);
  }
  return list;
}

// Bundled English stoplist (mirrors data/stopwords_en.txt). Overridable via
// the stoplist path in the pipeline config.
inline const Stoplist& default_stoplist() {
  static const Stoplist list = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you",
      "your", "yours", "yourself", "yourselves", "he", "him", "his",
      "himself", "she", "her", "hers", "herself", "it", "its", "itself",
      "they", "them", "their", "theirs", "themselves", "what", "which",
      "who", "whom", "this", "that", "these", "those", "am", "is", "are",
      "was", "were", "be", "been", "being", "have", "has", "had", "having",
      "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if",
      "or", "because", "as", "until", "while", "of", "at", "by", "for",
      "with", "about", "against", "between", "into", "through", "during",
      "before", "after", "above", "below", "to", "from", "up", "down", "in",
      "out", "on", "off", "over", "under", "again", "further", "then",
      "once", "here", "there", "when", "where", "why", "how", "all", "any",
      "both", "each", "few", "more", "most", "other", "some", "such", "no",
      "nor", "not", "only", "own", "same", "so", "than", "too", "very", "s",
      "t", "can", "will", "just", "don", "should", "now", "would", "could",
      "ought", "also", "i'm", "i've", "i'll", "i'd", "you're", "you've",
      "you'll", "you'd", "he's", "he'll", "he'd", "she's", "she'll",
      "she'd", "it's", "it'll", "it'd", "we're", "we've", "we'll", "we'd",
      "they're", "they've", "they'll", "they'd", "that's", "that'll",
      "who's", "what's", "here's", "there's", "when's", "where's", "why's",
      "how's", "isn't", "aren't", "wasn't", "weren't", "hasn't", "haven't",
      "hadn't", "doesn't", "don't", "didn't", "won't", "wouldn't", "shan't",
      "shouldn't", "can't", "cannot", "couldn't", "mustn't", "let's",
      "ain't",
  };
  return list;
}

// Processed-corpus NDJSON: one {doc_id, kind, created_utc, tokens, metadata}
// object per line, keys in fixed order.
inline std::string document_to_json_line(const Document& doc) {
  nlohmann::ordered_json j;
  j["doc_id"] = doc.doc_id;
  j["kind"] = to_string(doc.kind);
  j["created_utc"] = doc.created_utc;
  j["tokens"] = nlohmann::ordered_json::array();
  for (const Token& t : doc.tokens) j["tokens"].push_back(t.surface);
  nlohmann::ordered_json meta;
  meta["age_brackets"] = nlohmann::ordered_json::array();
  for (const AgeBracket& b : doc.metadata.age_brackets)
    meta["age_brackets"].push_back(to_string(b));
  meta["family_roles"] = nlohmann::ordered_json::array();
  for (FamilyRole r : doc.metadata.family_roles)
    meta["family_roles"].push_back(to_string(r));
  j["metadata"] = std::move(meta);
  return j.dump();
}

inline Document document_from_json_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  Document doc;
  doc.doc_id = j.at("doc_id").get<std::string>();
  doc.kind = post_kind_from_string(j.at("kind").get<std::string>());
  doc.created_utc = j.at("created_utc").get<std::int64_t>();
  std::uint32_t pos = 0;
  for (const auto& t : j.at("tokens"))
    doc.tokens.push_back({t.get<std::string>(), pos++});
  if (j.contains("metadata")) {
    for (const auto& b : j["metadata"].value("age_brackets",
                                             nlohmann::json::array())) {
      const std::string s = b.get<std::string>();
      const auto dash = s.find('-');
      doc.metadata.age_brackets.insert(
          {std::stoi(s.substr(0, dash)), std::stoi(s.substr(dash + 1))});
    }
    for (const auto& r : j["metadata"].value("family_roles",
                                             nlohmann::json::array()))
      doc.metadata.family_roles.insert(
          family_role_from_string(r.get<std::string>()));
  }
  return doc;
}

inline void write_processed_corpus(const Corpus& corpus,
                                   const std::filesystem::path& path) {
  std::string out;
  for (const Document& doc : corpus) {
    out += document_to_json_line(doc);
    out += '\n';
  }
  write_text_file(path, out);
}

inline Corpus read_processed_corpus(const std::filesystem::path& path) {
  Corpus corpus;
  for (const std::string& line : read_lines(path)) {
    if (line.empty()) continue;
    corpus.push_back(document_from_json_line(line));
  }
  return corpus;
}

}  // namespace dapmav

#endif  // DAPMAV_PREPROCESS_HPP_
