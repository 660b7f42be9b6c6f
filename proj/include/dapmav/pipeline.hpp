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
// Pipeline orchestration: TOML config, the five stages (acquire, preprocess,
// model, analyse, visualise) with artifact wiring, and a manifest that
// detects stale upstream artifacts. Every output is reproducible byte for
// byte from config + inputs + seed; the manifest itself records wall-clock
// durations and is run metadata, not part of the reproducible bundle.

#ifndef DAPMAV_PIPELINE_HPP_
#define DAPMAV_PIPELINE_HPP_

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dapmav/analytics.hpp"
#include "dapmav/core.hpp"
#include "dapmav/ingest.hpp"
#include "dapmav/layout.hpp"
#include "dapmav/preprocess.hpp"
#include "dapmav/pushshift.hpp"
#include "dapmav/sentiment.hpp"
#include "dapmav/topic_model.hpp"

namespace dapmav {

// ---------------------------------------------------------------------------
// Minimal TOML subset: [sections], key = string|int|float|bool|array.
// ---------------------------------------------------------------------------

namespace toml_mini {

struct Value {
  std::variant<std::string, std::int64_t, double, bool,
               std::vector<std::string>, std::vector<double>>
      data;
};

using Table = std::map<std::string, std::map<std::string, Value>>;

inline std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline Value parse_scalar(const std::string& raw, const std::string& where) {
  const std::string s = strip(raw);
  if (s.empty()) throw ConfigError(where + ": empty value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      throw ConfigError(where + ": unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) {
        ++i;
        if (s[i] == 'n') out += '\n';
        else if (s[i] == 't') out += '\t';
        else out += s[i];
      } else {
        out += s[i];
      }
    }
    return {out};
  }
  if (s == "true") return {true};
  if (s == "false") return {false};
  char* end = nullptr;
  if (s.find_first_of(".eE") == std::string::npos) {
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() + s.size()) return {static_cast<std::int64_t>(v)};
  }
  const double d = std::strtod(s.c_str(), &end);
  if (end == s.c_str() + s.size()) return {d};
  throw ConfigError(where + ": cannot parse value '" + s + "'");
}

inline Value parse_value(const std::string& raw, const std::string& where) {
  const std::string s = strip(raw);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw ConfigError(where + ": unterminated array");
    std::vector<std::string> strings;
    std::vector<double> numbers;
    bool is_string = false, any = false;
    std::string inner = s.substr(1, s.size() - 2);
    std::size_t pos = 0;
    while (pos < inner.size()) {
      bool in_quotes = false;
      std::size_t end = pos;
      for (; end < inner.size(); ++end) {
        if (inner[end] == '"') in_quotes = !in_quotes;
        if (inner[end] == ',' && !in_quotes) break;
      }
      const std::string item = strip(inner.substr(pos, end - pos));
      if (!item.empty()) {
        Value v = parse_scalar(item, where);
        any = true;
        if (std::holds_alternative<std::string>(v.data)) {
          is_string = true;
          strings.push_back(std::get<std::string>(v.data));
        } else if (std::holds_alternative<std::int64_t>(v.data)) {
          numbers.push_back(
              static_cast<double>(std::get<std::int64_t>(v.data)));
        } else if (std::holds_alternative<double>(v.data)) {
          numbers.push_back(std::get<double>(v.data));
        } else {
          throw ConfigError(where + ": unsupported array element");
        }
      }
      pos = end + 1;
    }
    if (is_string && !numbers.empty())
      throw ConfigError(where + ": mixed array types");
    if (is_string || !any) return {strings};
    return {numbers};
  }
  return parse_scalar(s, where);
}

inline Table parse(const std::string& text, const std::string& origin) {
  Table table;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    // Strip comments outside quotes.
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_quotes = !in_quotes;
      if (line[i] == '#' && !in_quotes) {
        line = line.substr(0, i);
        break;
      }
    }
    line = strip(line);
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": bad section");
      section = strip(line.substr(1, line.size() - 2));
      table[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key = value");
    const std::string key = strip(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    table[section][key] = parse_value(line.substr(eq + 1), where);
  }
  return table;
}

}  // namespace toml_mini

// ---------------------------------------------------------------------------
// Pipeline configuration
// ---------------------------------------------------------------------------

struct PipelineConfig {
  // paths
  std::filesystem::path submissions_dump;
  std::filesystem::path comments_dump;
  std::string fetch_base_url;
  std::filesystem::path output_dir;
  std::filesystem::path stoplist_path;  // empty = bundled default stoplist
  std::filesystem::path lexicon_path;
  std::filesystem::path labels_path;    // optional
  std::filesystem::path cache_dir;      // optional, else DAPMAV_CACHE_DIR

  FilterCriteria criteria;

  // thresholds
  std::size_t min_tokens = 10;
  std::size_t min_count = 3;
  std::size_t sample_n = 0;  // 0 = keep everything
  std::uint64_t seed = 1;
  bool include_titles = true;

  FitConfig fit;

  // sentiment
  std::size_t arc_grid = 101;
  double arc_bandwidth = 0.05;

  // analytics
  std::size_t density_grid = 200;
  std::size_t progression_level = 1;
  std::size_t landscape_level = 0;

  // layout
  std::string layout_method = "mds";  // "mds" or "sne"
  double sne_perplexity = 5.0;
  std::size_t sne_iterations = 500;
  std::size_t wordcloud_top_k = 30;

  SvgStyle style;
};

namespace config_detail {

struct Reader {
  const toml_mini::Table& table;
  mutable std::set<std::string> consumed;

  bool has(const std::string& section, const std::string& key) const {
    auto s = table.find(section);
    if (s == table.end()) return false;
    return s->second.count(key) > 0;
  }
  const toml_mini::Value& get(const std::string& section,
                              const std::string& key) const {
    consumed.insert(section + "." + key);
    return table.at(section).at(key);
  }
  std::string str(const std::string& sec, const std::string& key,
                  const std::string& fallback) const {
    if (!has(sec, key)) return fallback;
    const auto& v = get(sec, key);
    if (!std::holds_alternative<std::string>(v.data))
      throw ConfigError(sec + "." + key + " must be a string");
    return std::get<std::string>(v.data);
  }
  std::int64_t integer(const std::string& sec, const std::string& key,
                       std::int64_t fallback) const {
    if (!has(sec, key)) return fallback;
    const auto& v = get(sec, key);
    if (std::holds_alternative<std::int64_t>(v.data))
      return std::get<std::int64_t>(v.data);
    throw ConfigError(sec + "." + key + " must be an integer");
  }
  double number(const std::string& sec, const std::string& key,
                double fallback) const {
    if (!has(sec, key)) return fallback;
    const auto& v = get(sec, key);
    if (std::holds_alternative<double>(v.data))
      return std::get<double>(v.data);
    if (std::holds_alternative<std::int64_t>(v.data))
      return static_cast<double>(std::get<std::int64_t>(v.data));
    throw ConfigError(sec + "." + key + " must be a number");
  }
  bool boolean(const std::string& sec, const std::string& key,
               bool fallback) const {
    if (!has(sec, key)) return fallback;
    const auto& v = get(sec, key);
    if (!std::holds_alternative<bool>(v.data))
      throw ConfigError(sec + "." + key + " must be true or false");
    return std::get<bool>(v.data);
  }
  std::vector<std::string> strings(const std::string& sec,
                                   const std::string& key) const {
    if (!has(sec, key)) return {};
    const auto& v = get(sec, key);
    if (std::holds_alternative<std::vector<std::string>>(v.data))
      return std::get<std::vector<std::string>>(v.data);
    throw ConfigError(sec + "." + key + " must be a string array");
  }
  std::vector<double> numbers(const std::string& sec,
                              const std::string& key) const {
    if (!has(sec, key)) return {};
    const auto& v = get(sec, key);
    if (std::holds_alternative<std::vector<double>>(v.data))
      return std::get<std::vector<double>>(v.data);
    throw ConfigError(sec + "." + key + " must be a numeric array");
  }
};

inline std::filesystem::path resolve(const std::filesystem::path& base,
                                     const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace config_detail

inline PipelineConfig load_config(const std::filesystem::path& config_path) {
  const std::string text = read_text_file(config_path);
  const toml_mini::Table table =
      toml_mini::parse(text, config_path.filename().string());
  const config_detail::Reader r{table, {}};
  const std::filesystem::path base =
      config_path.has_parent_path() ? config_path.parent_path()
                                    : std::filesystem::path(".");

  PipelineConfig cfg;
  cfg.submissions_dump =
      config_detail::resolve(base, r.str("paths", "submissions", ""));
  cfg.comments_dump =
      config_detail::resolve(base, r.str("paths", "comments", ""));
  cfg.fetch_base_url = r.str("paths", "fetch_base_url", "");
  cfg.output_dir =
      config_detail::resolve(base, r.str("paths", "output_dir", ""));
  cfg.stoplist_path =
      config_detail::resolve(base, r.str("paths", "stoplist", ""));
  cfg.lexicon_path =
      config_detail::resolve(base, r.str("paths", "lexicon", ""));
  cfg.labels_path = config_detail::resolve(base, r.str("paths", "labels", ""));
  cfg.cache_dir = config_detail::resolve(base, r.str("paths", "cache_dir", ""));

  if (const std::string s = r.str("filter", "subreddit", ""); !s.empty())
    cfg.criteria.subreddit = s;
  if (r.has("filter", "after"))
    cfg.criteria.after = r.integer("filter", "after", 0);
  if (r.has("filter", "before"))
    cfg.criteria.before = r.integer("filter", "before", 0);
  if (const auto flairs = r.strings("filter", "flairs"); !flairs.empty())
    cfg.criteria.flair_allowlist =
        std::set<std::string>(flairs.begin(), flairs.end());
  if (r.has("filter", "kinds")) {
    cfg.criteria.kinds.clear();
    for (const std::string& k : r.strings("filter", "kinds"))
      cfg.criteria.kinds.insert(post_kind_from_string(k));
    if (cfg.criteria.kinds.empty())
      throw ConfigError("filter.kinds must not be empty");
  }

  cfg.min_tokens = static_cast<std::size_t>(
      r.integer("thresholds", "min_tokens", 10));
  cfg.min_count =
      static_cast<std::size_t>(r.integer("thresholds", "min_count", 3));
  cfg.sample_n =
      static_cast<std::size_t>(r.integer("thresholds", "sample_n", 0));
  cfg.seed = static_cast<std::uint64_t>(r.integer("thresholds", "seed", 1));
  cfg.include_titles = r.boolean("preprocess", "include_titles", true);

  cfg.fit.seed = cfg.seed;
  cfg.fit.n_restarts =
      static_cast<std::uint32_t>(r.integer("model", "n_restarts", 10));
  cfg.fit.sweeps = static_cast<std::uint32_t>(r.integer("model", "sweeps", 100));
  cfg.fit.beta_schedule = r.numbers("model", "beta_schedule");
  cfg.fit.parallel_restarts = r.boolean("model", "parallel_restarts", true);

  cfg.arc_grid = static_cast<std::size_t>(r.integer("sentiment", "grid", 101));
  cfg.arc_bandwidth = r.number("sentiment", "bandwidth", 0.05);

  cfg.density_grid =
      static_cast<std::size_t>(r.integer("analytics", "grid", 200));
  cfg.progression_level = static_cast<std::size_t>(
      r.integer("analytics", "progression_level", 1));
  cfg.landscape_level =
      static_cast<std::size_t>(r.integer("analytics", "landscape_level", 0));

  cfg.layout_method = r.str("layout", "method", "mds");
  cfg.sne_perplexity = r.number("layout", "perplexity", 5.0);
  cfg.sne_iterations =
      static_cast<std::size_t>(r.integer("layout", "iterations", 500));
  cfg.wordcloud_top_k =
      static_cast<std::size_t>(r.integer("layout", "wordcloud_top_k", 30));

  cfg.style.width = r.number("render", "width", 1200.0);
  cfg.style.height = r.number("render", "height", 800.0);
  cfg.style.font = r.str("render", "font", "sans-serif");
  if (const auto palette = r.strings("render", "palette"); !palette.empty())
    cfg.style.palette = palette;

  // Reject unknown keys; silent typos are worse than a hard error.
  for (const auto& [section, entries] : table)
    for (const auto& [key, value] : entries)
      if (!r.consumed.count(section + "." + key))
        throw ConfigError("unknown config key: [" + section + "] " + key);
  return cfg;
}

// Fails fast before any stage work. `through_visualise` demands everything
// the downstream stages need (lexicon in particular).
inline void validate_config(const PipelineConfig& cfg,
                            bool through_visualise = true) {
  if (cfg.output_dir.empty())
    throw ConfigError("paths.output_dir is required");
  if (cfg.submissions_dump.empty() && cfg.comments_dump.empty() &&
      cfg.fetch_base_url.empty())
    throw ConfigError(
        "acquire needs paths.submissions/paths.comments dumps or "
        "paths.fetch_base_url");
  if (cfg.min_tokens < 1)
    throw ConfigError("thresholds.min_tokens must be >= 1");
  if (cfg.min_count < 1) throw ConfigError("thresholds.min_count must be >= 1");
  cfg.criteria.validate();
  if (through_visualise) {
    if (cfg.lexicon_path.empty())
      throw ConfigError("paths.lexicon is required (sentiment is enabled)");
    if (cfg.arc_grid < 2) throw ConfigError("sentiment.grid must be >= 2");
    if (!(cfg.arc_bandwidth > 0.0))
      throw ConfigError("sentiment.bandwidth must be > 0");
    if (cfg.density_grid < 1) throw ConfigError("analytics.grid must be >= 1");
    if (cfg.layout_method != "mds" && cfg.layout_method != "sne")
      throw ConfigError("layout.method must be 'mds' or 'sne'");
    if (cfg.wordcloud_top_k == 0)
      throw ConfigError("layout.wordcloud_top_k must be >= 1");
  }
}

// ---------------------------------------------------------------------------
// Stages and artifacts
// ---------------------------------------------------------------------------

enum class Stage { acquire, preprocess, model, analyse, visualise };

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::acquire: return "acquire";
    case Stage::preprocess: return "preprocess";
    case Stage::model: return "model";
    case Stage::analyse: return "analyse";
    case Stage::visualise: return "visualise";
  }
  return "?";
}

inline Stage stage_from_string(std::string_view s) {
  if (s == "acquire") return Stage::acquire;
  if (s == "preprocess") return Stage::preprocess;
  if (s == "model") return Stage::model;
  if (s == "analyse") return Stage::analyse;
  if (s == "visualise") return Stage::visualise;
  throw ConfigError("unknown stage: " + std::string(s));
}

struct ArtifactPaths {
  std::filesystem::path dir;

  std::filesystem::path raw_corpus() const { return dir / "corpus_raw.ndjson"; }
  std::filesystem::path processed_corpus() const {
    return dir / "corpus_processed.ndjson";
  }
  std::filesystem::path vocabulary() const { return dir / "vocabulary.json"; }
  std::filesystem::path stats() const { return dir / "corpus_stats.json"; }
  std::filesystem::path model() const { return dir / "model.json"; }
  std::filesystem::path hierarchy() const { return dir / "hierarchy.json"; }
  std::filesystem::path topic_densities() const {
    return dir / "topic_densities.csv";
  }
  std::filesystem::path cooccurrence() const {
    return dir / "cooccurrence.csv";
  }
  std::filesystem::path dissimilarity() const {
    return dir / "dissimilarity.csv";
  }
  std::filesystem::path positional_densities() const {
    return dir / "positional_densities.csv";
  }
  std::filesystem::path arc() const { return dir / "arc.csv"; }
  std::filesystem::path segments() const { return dir / "segments.csv"; }
  std::filesystem::path coordinates() const { return dir / "coordinates.csv"; }
  std::filesystem::path landscape_svg() const { return dir / "landscape.svg"; }
  std::filesystem::path stacked_svg() const {
    return dir / "stacked_densities.svg";
  }
  std::filesystem::path arc_svg() const { return dir / "arc.svg"; }
  std::filesystem::path wordcloud_dir() const { return dir / "wordclouds"; }
  std::filesystem::path manifest() const { return dir / "manifest.json"; }
};

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct ManifestEntry {
  std::string config_hash;
  std::map<std::string, std::string> input_hashes;   // path -> hash
  std::map<std::string, std::string> output_hashes;  // path -> hash
  std::int64_t duration_ms = 0;
};

struct Manifest {
  std::map<std::string, ManifestEntry> stages;
};

inline Manifest load_manifest(const ArtifactPaths& paths) {
  Manifest manifest;
  if (!std::filesystem::exists(paths.manifest())) return manifest;
  const nlohmann::json j =
      nlohmann::json::parse(read_text_file(paths.manifest()));
  const nlohmann::json stages = j.value("stages", nlohmann::json::object());
  for (const auto& [stage, entry] : stages.items()) {
    ManifestEntry e;
    e.config_hash = entry.value("config_hash", std::string());
    const nlohmann::json inputs =
        entry.value("inputs", nlohmann::json::object());
    for (const auto& [k, v] : inputs.items())
      e.input_hashes[k] = v.get<std::string>();
    const nlohmann::json outputs =
        entry.value("outputs", nlohmann::json::object());
    for (const auto& [k, v] : outputs.items())
      e.output_hashes[k] = v.get<std::string>();
    e.duration_ms = entry.value("duration_ms", std::int64_t{0});
    manifest.stages[stage] = std::move(e);
  }
  return manifest;
}

inline void save_manifest(const Manifest& manifest,
                          const ArtifactPaths& paths) {
  nlohmann::ordered_json j;
  j["stages"] = nlohmann::ordered_json::object();
  for (const auto& [stage, e] : manifest.stages) {
    nlohmann::ordered_json ej;
    ej["config_hash"] = e.config_hash;
    ej["inputs"] = e.input_hashes;
    ej["outputs"] = e.output_hashes;
    ej["duration_ms"] = e.duration_ms;
    j["stages"][stage] = std::move(ej);
  }
  write_text_file(paths.manifest(), j.dump(2) + "\n");
}

inline std::string file_hash(const std::filesystem::path& path) {
  return fnv1a64_hex(read_text_file(path));
}

inline std::string config_hash(const PipelineConfig& cfg) {
  std::string s;
  s += cfg.submissions_dump.string() + "|" + cfg.comments_dump.string() + "|";
  s += cfg.fetch_base_url + "|" + cfg.stoplist_path.string() + "|";
  s += cfg.lexicon_path.string() + "|" + cfg.labels_path.string() + "|";
  s += std::to_string(cfg.min_tokens) + "," + std::to_string(cfg.min_count) +
       "," + std::to_string(cfg.sample_n) + "," + std::to_string(cfg.seed);
  s += "," + std::to_string(cfg.include_titles);
  s += "|" + std::to_string(cfg.fit.n_restarts) + "," +
       std::to_string(cfg.fit.sweeps);
  for (double b : cfg.fit.beta_schedule) s += "," + format_double(b);
  s += "|" + std::to_string(cfg.arc_grid) + "," +
       format_double(cfg.arc_bandwidth);
  s += "|" + std::to_string(cfg.density_grid) + "," +
       std::to_string(cfg.progression_level) + "," +
       std::to_string(cfg.landscape_level);
  s += "|" + cfg.layout_method + "," + format_double(cfg.sne_perplexity) +
       "," + std::to_string(cfg.sne_iterations) + "," +
       std::to_string(cfg.wordcloud_top_k);
  if (cfg.criteria.subreddit) s += "|sub=" + *cfg.criteria.subreddit;
  if (cfg.criteria.after) s += "|after=" + std::to_string(*cfg.criteria.after);
  if (cfg.criteria.before)
    s += "|before=" + std::to_string(*cfg.criteria.before);
  if (cfg.criteria.flair_allowlist)
    for (const std::string& f : *cfg.criteria.flair_allowlist) s += "|f=" + f;
  for (PostKind k : cfg.criteria.kinds) s += "|k=" + to_string(k);
  return fnv1a64_hex(s);
}

namespace pipeline_detail {

inline Stage producer_of(const std::filesystem::path& file,
                         const ArtifactPaths& paths) {
  if (file == paths.raw_corpus()) return Stage::acquire;
  if (file == paths.processed_corpus() || file == paths.vocabulary() ||
      file == paths.stats())
    return Stage::preprocess;
  if (file == paths.model() || file == paths.hierarchy()) return Stage::model;
  return Stage::analyse;
}

// Inputs an artifact stage consumes from earlier stages.
inline std::vector<std::filesystem::path> stage_inputs(
    Stage stage, const ArtifactPaths& paths) {
  switch (stage) {
    case Stage::acquire: return {};
    case Stage::preprocess: return {paths.raw_corpus()};
    case Stage::model: return {paths.processed_corpus()};
    case Stage::analyse:
      return {paths.processed_corpus(), paths.model()};
    case Stage::visualise:
      return {paths.model(), paths.topic_densities(), paths.dissimilarity(),
              paths.positional_densities(), paths.arc(), paths.segments()};
  }
  return {};
}

inline void check_inputs(Stage stage, const ArtifactPaths& paths,
                         const Manifest& manifest, bool force) {
  for (const std::filesystem::path& input : stage_inputs(stage, paths)) {
    const Stage producer = producer_of(input, paths);
    if (!std::filesystem::exists(input))
      throw StageDependencyError(std::string("missing ") + input.string() +
                                 "; run " + stage_name(producer) + " first");
    if (force) continue;
    auto it = manifest.stages.find(stage_name(producer));
    if (it == manifest.stages.end()) continue;
    auto out = it->second.output_hashes.find(input.filename().string());
    if (out == it->second.output_hashes.end()) continue;
    if (out->second != file_hash(input))
      throw StageDependencyError(
          "stale input: " + input.string() + " changed since " +
          stage_name(producer) + " ran; re-run " + stage_name(producer) +
          " or pass --force");
  }
}

inline Stoplist effective_stoplist(const PipelineConfig& cfg) {
  if (cfg.stoplist_path.empty()) return default_stoplist();
  return load_stoplist(cfg.stoplist_path);
}

// Levels may collapse to a single topic near the top, where the analytics
// degenerate; fall back to the closest level with at least two topics.
inline std::size_t effective_level(const NestedPartition& partition,
                                   std::size_t requested) {
  std::size_t level = std::min(requested, partition.n_levels() - 1);
  while (level > 0 && partition.levels[level].n_word_groups < 2) --level;
  return level;
}

}  // namespace pipeline_detail

// ---------------------------------------------------------------------------
// Stage bodies
// ---------------------------------------------------------------------------

namespace stage_impl {

inline void acquire(const PipelineConfig& cfg, const ArtifactPaths& paths) {
  std::vector<RawPost> posts;
  if (!cfg.submissions_dump.empty() || !cfg.comments_dump.empty()) {
    if (!cfg.submissions_dump.empty()) {
      NdjsonLoad load = load_ndjson(cfg.submissions_dump, PostKind::submission);
      posts.insert(posts.end(), load.posts.begin(), load.posts.end());
    }
    if (!cfg.comments_dump.empty()) {
      NdjsonLoad load = load_ndjson(cfg.comments_dump, PostKind::reply);
      posts.insert(posts.end(), load.posts.begin(), load.posts.end());
    }
    posts = filter_posts(posts, cfg.criteria);
  } else {
    FetchOptions opts = FetchOptions::with_env_cache();
    if (!cfg.cache_dir.empty()) opts.cache_dir = cfg.cache_dir;
    posts = fetch_pushshift(cfg.fetch_base_url, cfg.criteria, opts).posts;
  }
  std::sort(posts.begin(), posts.end(),
            [](const RawPost& a, const RawPost& b) {
              return std::tie(a.created_utc, a.id) <
                     std::tie(b.created_utc, b.id);
            });
  // Ids must be unique within a corpus; combined dumps may overlap.
  std::unordered_set<std::string> seen;
  std::vector<RawPost> unique;
  unique.reserve(posts.size());
  for (RawPost& p : posts)
    if (seen.insert(p.id).second) unique.push_back(std::move(p));
  posts = std::move(unique);
  if (cfg.sample_n > 0) {
    if (cfg.sample_n > posts.size())
      throw DataError("sample_n=" + std::to_string(cfg.sample_n) +
                      " exceeds corpus size " + std::to_string(posts.size()));
    posts = sample_without_replacement(posts, cfg.sample_n, cfg.seed);
  }
  if (posts.empty()) throw DataError("acquire produced no posts");
  write_raw_corpus(posts, paths.raw_corpus());
}

inline void preprocess(const PipelineConfig& cfg, const ArtifactPaths& paths) {
  const std::vector<RawPost> posts = read_raw_corpus(paths.raw_corpus());
  const Stoplist stoplist = pipeline_detail::effective_stoplist(cfg);
  Corpus corpus;
  corpus.reserve(posts.size());
  for (const RawPost& post : posts) {
    std::string text;
    if (post.kind == PostKind::submission && cfg.include_titles && post.title)
      text = *post.title + "\n" + post.body;
    else
      text = post.body;
    Document doc;
    doc.doc_id = post.id;
    doc.kind = post.kind;
    doc.created_utc = post.created_utc;
    doc.metadata.age_brackets = extract_age_brackets(text);
    doc.metadata.family_roles = extract_family_roles(text);
    doc.tokens = remove_stopwords(tokenize(text), stoplist);
    corpus.push_back(std::move(doc));
  }
  auto [processed, vocab] =
      finish_preprocess(std::move(corpus), cfg.min_count, cfg.min_tokens);
  write_processed_corpus(processed, paths.processed_corpus());

  nlohmann::ordered_json vj;
  vj["words"] = vocab.words;
  vj["counts"] = vocab.counts;
  write_text_file(paths.vocabulary(), vj.dump(2) + "\n");

  const CorpusStats stats = corpus_stats(processed);
  nlohmann::ordered_json sj;
  sj["n_total"] = stats.n_total;
  sj["n_submissions"] = stats.n_submissions;
  sj["n_replies"] = stats.n_replies;
  sj["mean_tokens_submissions"] = stats.mean_tokens_submissions;
  sj["mean_tokens_replies"] = stats.mean_tokens_replies;
  sj["mean_tokens_combined"] = stats.mean_tokens_combined;
  sj["max_tokens"] = stats.max_tokens;
  write_text_file(paths.stats(), sj.dump(2) + "\n");
}

inline void model(const PipelineConfig& cfg, const ArtifactPaths& paths) {
  const Corpus corpus = read_processed_corpus(paths.processed_corpus());
  const Vocabulary vocab = build_vocabulary(corpus);
  const BipartiteGraph graph = build_bipartite_graph(corpus, vocab);
  FitConfig fit = cfg.fit;
  fit.seed = cfg.seed;
  const NestedPartition partition = fit_nested_partition(graph, fit);
  write_text_file(paths.model(),
                  model_to_json(graph, partition, fit).dump(2) + "\n");
  write_text_file(paths.hierarchy(),
                  hierarchy_to_json(graph, partition).dump(2) + "\n");
}

inline void analyse(const PipelineConfig& cfg, const ArtifactPaths& paths) {
  const Corpus corpus = read_processed_corpus(paths.processed_corpus());
  const Vocabulary vocab = build_vocabulary(corpus);
  const BipartiteGraph graph = build_bipartite_graph(corpus, vocab);
  const ModelArtifact artifact = model_from_json(
      nlohmann::json::parse(read_text_file(paths.model())));
  const NestedPartition& partition = artifact.partition;

  const std::size_t landscape_level =
      pipeline_detail::effective_level(partition, cfg.landscape_level);
  const std::size_t progression_level =
      pipeline_detail::effective_level(partition, cfg.progression_level);

  write_topic_densities_csv(
      topic_densities(graph, partition, landscape_level),
      paths.topic_densities());

  const CoocMatrix cooc = cooccurrence_matrix(partition, graph,
                                              landscape_level);
  write_square_matrix_csv(cooc.values, cooc.size, paths.cooccurrence());
  write_square_matrix_csv(dissimilarity(cooc), cooc.size,
                          paths.dissimilarity());

  const std::vector<std::uint32_t> word_topics = word_topics_at_level(
      partition, graph.n_docs, graph.n_words, progression_level);
  const TokenTopicAssignment token_topics =
      assign_token_topics(corpus, vocab, word_topics);
  const std::uint32_t n_topics =
      partition.levels[progression_level].n_word_groups;
  const std::vector<PositionalDensity> densities = positional_densities(
      corpus, token_topics, n_topics, cfg.density_grid);
  write_positional_densities_csv(densities, paths.positional_densities());

  const Lexicon lexicon = load_lexicon(cfg.lexicon_path).lexicon;
  const EmotionalArc arc =
      emotional_arc(corpus, lexicon, cfg.arc_grid, cfg.arc_bandwidth);
  write_arc_csv(arc, paths.arc());

  std::unordered_map<std::uint32_t, std::string> labels;
  if (!cfg.labels_path.empty()) labels = load_topic_labels(cfg.labels_path);
  const std::vector<double> weights =
      topic_densities(graph, partition, progression_level);
  const auto grouped =
      group_densities_by_label(densities, weights, labels);
  write_segments_csv(dominant_topic_segments(grouped, cfg.density_grid),
                     paths.segments());
}

inline void visualise(const PipelineConfig& cfg, const ArtifactPaths& paths) {
  const ModelArtifact artifact = model_from_json(
      nlohmann::json::parse(read_text_file(paths.model())));
  const NestedPartition& partition = artifact.partition;
  const std::size_t landscape_level =
      pipeline_detail::effective_level(partition, cfg.landscape_level);
  const std::size_t progression_level =
      pipeline_detail::effective_level(partition, cfg.progression_level);

  std::unordered_map<std::uint32_t, std::string> labels;
  if (!cfg.labels_path.empty()) labels = load_topic_labels(cfg.labels_path);
  auto label_of = [&](std::uint32_t topic) {
    auto it = labels.find(topic);
    return it == labels.end() ? std::string("unlabelled") : it->second;
  };

  // Word clouds and the landscape work from the model artifact alone.
  const std::vector<std::uint32_t> word_topics = word_topics_at_level(
      partition, artifact.n_docs, artifact.n_words, landscape_level);
  const std::uint32_t n_topics =
      partition.levels[landscape_level].n_word_groups;
  std::vector<double> topic_mass(n_topics, 0.0);
  for (std::uint32_t w = 0; w < artifact.n_words; ++w)
    topic_mass[word_topics[w]] +=
        static_cast<double>(artifact.word_degrees[w]);

  std::filesystem::create_directories(paths.wordcloud_dir());
  std::vector<WordCloudSpec> clouds(n_topics);
  for (std::uint32_t t = 0; t < n_topics; ++t) {
    std::vector<double> dist(artifact.n_words, 0.0);
    for (std::uint32_t w = 0; w < artifact.n_words; ++w)
      if (word_topics[w] == t && topic_mass[t] > 0.0)
        dist[w] = static_cast<double>(artifact.word_degrees[w]) /
                  topic_mass[t];
    clouds[t] = wordcloud_data(artifact.words, dist, cfg.wordcloud_top_k);
    const std::filesystem::path file =
        paths.wordcloud_dir() /
        ("topic_L" + std::to_string(landscape_level) + "_" +
         std::to_string(t) + ".svg");
    write_text_file(file, render_svg(clouds[t], cfg.style));
  }

  auto [dissim, dissim_size] = read_square_matrix_csv(paths.dissimilarity());
  if (dissim_size != n_topics)
    throw DataError("dissimilarity.csv does not match the model's topics");
  LayoutCoords coords;
  if (cfg.layout_method == "sne" && n_topics >= 4) {
    coords = sne_layout(dissim, n_topics,
                        std::min(cfg.sne_perplexity,
                                 static_cast<double>(n_topics) - 1.0),
                        cfg.sne_iterations, cfg.seed);
  } else {
    coords = classical_mds(dissim, n_topics);
  }
  write_coordinates_csv(coords, paths.coordinates());

  LandscapeArtifact landscape;
  landscape.coords = coords;
  const double total_mass = static_cast<double>(artifact.total_edges);
  for (std::uint32_t t = 0; t < n_topics; ++t) {
    LandscapeTopic topic;
    topic.label = label_of(t);
    const std::size_t n_words = std::min<std::size_t>(3, clouds[t].entries.size());
    for (std::size_t i = 0; i < n_words; ++i) {
      const auto& [word, p] = clouds[t].entries[i];
      // Relative frequency across the whole corpus.
      topic.top_words.emplace_back(
          word, p * topic_mass[t] / total_mass);
    }
    landscape.topics.push_back(std::move(topic));
  }
  write_text_file(paths.landscape_svg(), render_svg(landscape, cfg.style));

  // Stacked densities at the progression level, orderered by median.
  std::vector<PositionalDensity> densities =
      read_positional_densities_csv(paths.positional_densities());
  const std::vector<std::uint32_t> order = stack_order(densities);
  const std::uint32_t n_prog_topics =
      partition.levels[progression_level].n_word_groups;
  const std::vector<std::uint32_t> prog_topics = word_topics_at_level(
      partition, artifact.n_docs, artifact.n_words, progression_level);
  std::vector<double> prog_mass(n_prog_topics, 0.0);
  for (std::uint32_t w = 0; w < artifact.n_words; ++w)
    prog_mass[prog_topics[w]] +=
        static_cast<double>(artifact.word_degrees[w]) /
        static_cast<double>(artifact.total_edges);
  StackedDensitiesArtifact stacked;
  for (std::uint32_t topic : order) {
    for (PositionalDensity& d : densities) {
      if (d.topic != topic) continue;
      stacked.densities.push_back(d);
      stacked.weights.push_back(topic < prog_mass.size() ? prog_mass[topic]
                                                         : 1.0);
      stacked.labels.push_back(label_of(topic));
      break;
    }
  }
  write_text_file(paths.stacked_svg(), render_svg(stacked, cfg.style));

  ArcArtifact arc_artifact;
  arc_artifact.arc = read_arc_csv(paths.arc());
  arc_artifact.segments = read_segments_csv(paths.segments());
  write_text_file(paths.arc_svg(), render_svg(arc_artifact, cfg.style));
}

}  // namespace stage_impl

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

// Runs one stage: verifies upstream artifacts exist and are not stale,
// executes the stage, records a manifest entry (stage, config hash, input
// hashes, output hashes, duration).
inline void run_stage(Stage stage, const PipelineConfig& cfg,
                      bool force = false) {
  validate_config(cfg, /*through_visualise=*/stage >= Stage::analyse);
  const ArtifactPaths paths{cfg.output_dir};
  std::filesystem::create_directories(paths.dir);
  Manifest manifest = load_manifest(paths);
  pipeline_detail::check_inputs(stage, paths, manifest, force);

  ManifestEntry entry;
  entry.config_hash = config_hash(cfg);
  for (const std::filesystem::path& input :
       pipeline_detail::stage_inputs(stage, paths))
    entry.input_hashes[input.filename().string()] = file_hash(input);

  const auto started = std::chrono::steady_clock::now();
  switch (stage) {
    case Stage::acquire: stage_impl::acquire(cfg, paths); break;
    case Stage::preprocess: stage_impl::preprocess(cfg, paths); break;
    case Stage::model: stage_impl::model(cfg, paths); break;
    case Stage::analyse: stage_impl::analyse(cfg, paths); break;
    case Stage::visualise: stage_impl::visualise(cfg, paths); break;
  }
  entry.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - started)
                          .count();

  const std::vector<std::filesystem::path> outputs = [&] {
    std::vector<std::filesystem::path> out;
    switch (stage) {
      case Stage::acquire: out = {paths.raw_corpus()}; break;
      case Stage::preprocess:
        out = {paths.processed_corpus(), paths.vocabulary(), paths.stats()};
        break;
      case Stage::model: out = {paths.model(), paths.hierarchy()}; break;
      case Stage::analyse:
        out = {paths.topic_densities(), paths.cooccurrence(),
               paths.dissimilarity(), paths.positional_densities(),
               paths.arc(), paths.segments()};
        break;
      case Stage::visualise:
        out = {paths.coordinates(), paths.landscape_svg(),
               paths.stacked_svg(), paths.arc_svg()};
        break;
    }
    return out;
  }();
  for (const std::filesystem::path& output : outputs)
    entry.output_hashes[output.filename().string()] = file_hash(output);

  manifest.stages[stage_name(stage)] = std::move(entry);
  save_manifest(manifest, paths);
}

// Runs all five stages in order; identical to sequential run_stage calls.
inline void run_all(const PipelineConfig& cfg, bool force = false) {
  validate_config(cfg, /*through_visualise=*/true);
  for (Stage stage : {Stage::acquire, Stage::preprocess, Stage::model,
                      Stage::analyse, Stage::visualise})
    run_stage(stage, cfg, force);
}

inline nlohmann::ordered_json stats_report(const PipelineConfig& cfg) {
  const ArtifactPaths paths{cfg.output_dir};
  if (!std::filesystem::exists(paths.processed_corpus()))
    throw StageDependencyError("missing " +
                               paths.processed_corpus().string() +
                               "; run preprocess first");
  const Corpus corpus = read_processed_corpus(paths.processed_corpus());
  const CorpusStats stats = corpus_stats(corpus);
  nlohmann::ordered_json j;
  j["n_total"] = stats.n_total;
  j["n_submissions"] = stats.n_submissions;
  j["n_replies"] = stats.n_replies;
  j["mean_tokens_submissions"] = stats.mean_tokens_submissions;
  j["mean_tokens_replies"] = stats.mean_tokens_replies;
  j["mean_tokens_combined"] = stats.mean_tokens_combined;
  j["max_tokens"] = stats.max_tokens;
  return j;
}

}  // namespace dapmav

#endif  // DAPMAV_PIPELINE_HPP_
