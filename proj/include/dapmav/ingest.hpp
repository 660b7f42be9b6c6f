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
// Corpus acquisition: offline NDJSON dumps and a Pushshift-compatible HTTP
// client, post filtering and thinning, and narrative metadata extraction
// (age brackets, male family roles). Author names are hashed on ingest and
// never stored in the clear.

#ifndef DAPMAV_INGEST_HPP_
#define DAPMAV_INGEST_HPP_

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dapmav/core.hpp"
#include "dapmav/preprocess.hpp"

namespace dapmav {

// One acquired submission or reply.
struct RawPost {
  std::string id;
  std::optional<std::string> parent_id;
  std::string subreddit;
  std::int64_t created_utc = 0;
  std::optional<std::string> title;
  std::string body;
  std::optional<std::string> flair;
  PostKind kind = PostKind::submission;
  std::optional<std::string> author_hash;
};

struct FilterCriteria {
  std::optional<std::string> subreddit;
  std::optional<std::int64_t> after;
  std::optional<std::int64_t> before;
  std::optional<std::set<std::string>> flair_allowlist;
  std::set<PostKind> kinds = {PostKind::submission, PostKind::reply};

  void validate() const {
    if (after && before && !(*after < *before))
      throw ConfigError("filter: 'after' must be earlier than 'before'");
  }
};

struct CorpusStats {
  std::uint64_t n_total = 0;
  std::uint64_t n_submissions = 0;
  std::uint64_t n_replies = 0;
  double mean_tokens_submissions = 0.0;
  double mean_tokens_replies = 0.0;
  double mean_tokens_combined = 0.0;
  std::uint64_t max_tokens = 0;
};

namespace detail {

// Pushshift field mapping: selftext -> body for submissions, body for
// comments; link_flair_text / author_flair_text -> flair; author is hashed.
inline std::optional<RawPost> parse_pushshift_object(const nlohmann::json& j,
                                                     PostKind kind) {
  if (!j.is_object()) return std::nullopt;
  if (!j.contains("id") || !j["id"].is_string()) return std::nullopt;
  if (!j.contains("created_utc") || !j["created_utc"].is_number())
    return std::nullopt;
  const char* body_field = kind == PostKind::submission ? "selftext" : "body";
  if (!j.contains(body_field) || !j[body_field].is_string()) {
    // Some submission dumps carry "body" instead of "selftext".
    if (kind == PostKind::submission && j.contains("body") &&
        j["body"].is_string())
      body_field = "body";
    else
      return std::nullopt;
  }

  RawPost post;
  post.kind = kind;
  post.id = j["id"].get<std::string>();
  post.created_utc = static_cast<std::int64_t>(j["created_utc"].get<double>());
  if (post.id.empty() || post.created_utc < 0) return std::nullopt;
  post.body = j[body_field].get<std::string>();
  if (j.contains("subreddit") && j["subreddit"].is_string())
    post.subreddit = j["subreddit"].get<std::string>();
  if (j.contains("title") && j["title"].is_string())
    post.title = j["title"].get<std::string>();
  if (j.contains("parent_id") && j["parent_id"].is_string())
    post.parent_id = j["parent_id"].get<std::string>();
  const char* flair_field =
      kind == PostKind::submission ? "link_flair_text" : "author_flair_text";
  if (j.contains(flair_field) && j[flair_field].is_string())
    post.flair = j[flair_field].get<std::string>();
  if (j.contains("author") && j["author"].is_string())
    post.author_hash = fnv1a64_hex(j["author"].get<std::string>());
  return post;
}

}  // namespace detail

struct NdjsonLoad {
  std::vector<RawPost> posts;
  std::size_t skipped = 0;
  std::vector<std::size_t> bad_lines;  // 1-based, first few only
};

// Loads a Pushshift-schema dump, one JSON object per line. Malformed lines
// (unparsable, or missing id/created_utc/body) are skipped and counted; more
// than 50% malformed is fatal.
inline NdjsonLoad load_ndjson(const std::filesystem::path& path,
                              PostKind kind) {
  const std::vector<std::string> lines = read_lines(path);
  NdjsonLoad result;
  std::size_t considered = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    ++considered;
    std::optional<RawPost> post;
    try {
      post = detail::parse_pushshift_object(nlohmann::json::parse(lines[i]),
                                            kind);
    } catch (const nlohmann::json::exception&) {
      post = std::nullopt;
    }
    if (post) {
      result.posts.push_back(std::move(*post));
    } else {
      ++result.skipped;
      if (result.bad_lines.size() < 8) result.bad_lines.push_back(i + 1);
    }
  }
  if (considered > 0 && result.skipped * 2 > considered) {
    std::string msg = "more than half of " + path.string() +
                      " is malformed (" + std::to_string(result.skipped) +
                      "/" + std::to_string(considered) + "); first bad lines:";
    for (std::size_t ln : result.bad_lines) msg += " " + std::to_string(ln);
    throw DataError(msg);
  }
  return result;
}

// Keeps exactly the posts matching all present criteria; order preserved.
inline std::vector<RawPost> filter_posts(const std::vector<RawPost>& posts,
                                         const FilterCriteria& criteria) {
  criteria.validate();
  std::vector<RawPost> out;
  out.reserve(posts.size());
  for (const RawPost& p : posts) {
    if (!criteria.kinds.count(p.kind)) continue;
    if (criteria.subreddit && p.subreddit != *criteria.subreddit) continue;
    if (criteria.after && !(p.created_utc > *criteria.after)) continue;
    if (criteria.before && !(p.created_utc < *criteria.before)) continue;
    if (criteria.flair_allowlist &&
        (!p.flair || !criteria.flair_allowlist->count(*p.flair)))
      continue;
    out.push_back(p);
  }
  return out;
}

// Uniform sample of n distinct posts (partial Fisher-Yates); output is in
// sampled order, deterministic for a fixed seed.
inline std::vector<RawPost> sample_without_replacement(
    const std::vector<RawPost>& posts, std::size_t n, std::uint64_t seed) {
  if (n > posts.size())
    throw DataError("sample size " + std::to_string(n) + " exceeds corpus (" +
                    std::to_string(posts.size()) + ")");
  std::vector<std::size_t> idx(posts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::vector<RawPost> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    out.push_back(posts[idx[i]]);
  }
  return out;
}

namespace detail {

struct ScannedWord {
  std::string text;          // lowercase alnum run
  bool paren_before = false; // '(' in the gap before this word
  bool paren_after = false;  // ')' in the gap after
  bool comma_before = false;
  bool comma_after = false;
};

inline std::vector<ScannedWord> scan_words(std::string_view text) {
  std::vector<ScannedWord> words;
  std::string gap;
  std::string cur;
  auto flush = [&]() {
    if (cur.empty()) return;
    ScannedWord w;
    w.text = std::move(cur);
    cur.clear();
    w.paren_before = gap.find('(') != std::string::npos;
    w.comma_before = gap.find(',') != std::string::npos;
    words.push_back(std::move(w));
    gap.clear();
  };
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else {
      flush();
      gap += static_cast<char>(c);
      if (!words.empty()) {
        if (ch == ')') words.back().paren_after = true;
        if (ch == ',') words.back().comma_after = true;
      }
    }
  }
  flush();
  return words;
}

// Subject words that can carry an age. Possessives (my, his) are excluded:
// they precede clinical nouns as often as people ("my PSA (45)").
inline bool is_person_word(const std::string& w) {
  static const std::set<std::string> person = {
      "i", "he", "him", "himself",
      "brother", "bro", "father", "dad", "daddy", "papa",
      "grandfather", "grandpa", "granddad", "grandad",
      "husband", "hubby", "son", "uncle",
      "man", "men", "male", "guy", "patient", "friend"};
  return person.count(w) > 0;
}

inline bool person_word_within(const std::vector<ScannedWord>& words,
                               std::size_t pos, std::size_t window) {
  for (std::size_t back = 1; back <= window && back <= pos; ++back)
    if (is_person_word(words[pos - back].text)) return true;
  return false;
}

inline std::optional<int> two_digit_value(const std::string& w) {
  if (w.size() != 2 || !std::isdigit(static_cast<unsigned char>(w[0])) ||
      !std::isdigit(static_cast<unsigned char>(w[1])))
    return std::nullopt;
  return (w[0] - '0') * 10 + (w[1] - '0');
}

}  // namespace detail

// Detects ages written as "(72)" after a person word, "72 years old",
// "age 72", "72yo" or an appositive "my dad, 72,". A number only counts when
// an age cue sits within three words, which keeps PSA/Gleason values out.
// Ages outside [18, 99] are ignored.
inline std::set<AgeBracket> extract_age_brackets(std::string_view text) {
  using detail::ScannedWord;
  const std::vector<ScannedWord> words = detail::scan_words(text);
  std::set<AgeBracket> out;
  auto word_at = [&](std::size_t i) -> const std::string& {
    static const std::string empty;
    return i < words.size() ? words[i].text : empty;
  };
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string& w = words[i].text;

    // Fused forms: "72yo", "72yr", "72yrs".
    if (w.size() > 2) {
      const std::string head = w.substr(0, 2);
      const std::string tail = w.substr(2);
      if (auto v = detail::two_digit_value(head);
          v && *v >= 18 && *v <= 99 &&
          (tail == "yo" || tail == "yr" || tail == "yrs")) {
        out.insert(bracket_for_age(*v));
        continue;
      }
    }

    const std::optional<int> value = detail::two_digit_value(w);
    if (!value || *value < 18 || *value > 99) continue;

    bool is_age = false;
    // "72 years old", "72-year-old", "72 yrs old", "72 yo", "72 y/o".
    const std::string& n1 = word_at(i + 1);
    const std::string& n2 = word_at(i + 2);
    if ((n1 == "years" || n1 == "year" || n1 == "yrs" || n1 == "yr") &&
        (n2 == "old" || n2 == "older"))
      is_age = true;
    else if (n1 == "yo" || (n1 == "y" && n2 == "o"))
      is_age = true;
    // "age 72", "aged 72", "age of 72".
    else if (i >= 1 && (word_at(i - 1) == "age" || word_at(i - 1) == "aged"))
      is_age = true;
    else if (i >= 2 && word_at(i - 1) == "of" && word_at(i - 2) == "age")
      is_age = true;
    // "(72)" directly after a person word.
    else if (words[i].paren_before && words[i].paren_after &&
             detail::person_word_within(words, i, 1))
      is_age = true;
    // Appositive ", 72," with a person word shortly before.
    else if (words[i].comma_before && words[i].comma_after &&
             detail::person_word_within(words, i, 3))
      is_age = true;

    if (is_age) out.insert(bracket_for_age(*value));
  }
  return out;
}

// Case-insensitive whole-word match on the six male family roles, plus the
// synonyms dad -> father and grandpa/granddad -> grandfather.
inline std::set<FamilyRole> extract_family_roles(std::string_view text) {
  std::set<FamilyRole> out;
  for (const detail::ScannedWord& w : detail::scan_words(text)) {
    const std::string& s = w.text;
    if (s == "brother") out.insert(FamilyRole::brother);
    else if (s == "father" || s == "dad") out.insert(FamilyRole::father);
    else if (s == "grandfather" || s == "grandpa" || s == "granddad")
      out.insert(FamilyRole::grandfather);
    else if (s == "husband") out.insert(FamilyRole::husband);
    else if (s == "son") out.insert(FamilyRole::son);
    else if (s == "uncle") out.insert(FamilyRole::uncle);
  }
  return out;
}

// Counts and mean token lengths over a preprocessed corpus. Token counts are
// non-stopword tokens by construction of the pipeline.
inline CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  std::uint64_t sub_tokens = 0;
  std::uint64_t reply_tokens = 0;
  for (const Document& doc : corpus) {
    ++stats.n_total;
    stats.max_tokens = std::max<std::uint64_t>(stats.max_tokens,
                                               doc.tokens.size());
    if (doc.kind == PostKind::submission) {
      ++stats.n_submissions;
      sub_tokens += doc.tokens.size();
    } else {
      ++stats.n_replies;
      reply_tokens += doc.tokens.size();
    }
  }
  if (stats.n_submissions > 0)
    stats.mean_tokens_submissions =
        static_cast<double>(sub_tokens) / stats.n_submissions;
  if (stats.n_replies > 0)
    stats.mean_tokens_replies =
        static_cast<double>(reply_tokens) / stats.n_replies;
  if (stats.n_total > 0)
    stats.mean_tokens_combined =
        static_cast<double>(sub_tokens + reply_tokens) / stats.n_total;
  return stats;
}

// Canonical corpus NDJSON, the on-disk form handed to downstream stages.
inline std::string raw_post_to_json_line(const RawPost& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  if (p.parent_id) j["parent_id"] = *p.parent_id;
  j["subreddit"] = p.subreddit;
  j["created_utc"] = p.created_utc;
  if (p.title) j["title"] = *p.title;
  j["body"] = p.body;
  if (p.flair) j["flair"] = *p.flair;
  j["kind"] = to_string(p.kind);
  if (p.author_hash) j["author_hash"] = *p.author_hash;
  return j.dump();
}

inline RawPost raw_post_from_json_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  RawPost p;
  p.id = j.at("id").get<std::string>();
  if (j.contains("parent_id")) p.parent_id = j["parent_id"].get<std::string>();
  p.subreddit = j.value("subreddit", std::string());
  p.created_utc = j.at("created_utc").get<std::int64_t>();
  if (j.contains("title")) p.title = j["title"].get<std::string>();
  p.body = j.value("body", std::string());
  if (j.contains("flair")) p.flair = j["flair"].get<std::string>();
  p.kind = post_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("author_hash"))
    p.author_hash = j["author_hash"].get<std::string>();
  return p;
}

inline void write_raw_corpus(const std::vector<RawPost>& posts,
                             const std::filesystem::path& path) {
  std::string out;
  for (const RawPost& p : posts) {
    out += raw_post_to_json_line(p);
    out += '\n';
  }
  write_text_file(path, out);
}

inline std::vector<RawPost> read_raw_corpus(
    const std::filesystem::path& path) {
  std::vector<RawPost> posts;
  for (const std::string& line : read_lines(path)) {
    if (line.empty()) continue;
    posts.push_back(raw_post_from_json_line(line));
  }
  return posts;
}

}  // namespace dapmav

#endif  // DAPMAV_INGEST_HPP_
