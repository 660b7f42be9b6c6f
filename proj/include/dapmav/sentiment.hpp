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
// Lexicon valence scoring and the emotional arc: mean valence as a function
// of normalised document position. Each lexicon-matched token contributes at
// the midpoint of its position interval, smoothed with a Gaussian kernel, so
// the arc tends to the plain corpus mean as the bandwidth grows.

#ifndef DAPMAV_SENTIMENT_HPP_
#define DAPMAV_SENTIMENT_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dapmav/core.hpp"
#include "dapmav/preprocess.hpp"

namespace dapmav {

// Word -> valence, centered so 0 is neutral. Keys are lowercase.
struct Lexicon {
  std::unordered_map<std::string, double> valence;

  std::size_t size() const { return valence.size(); }
};

struct LexiconLoad {
  Lexicon lexicon;
  std::size_t duplicates = 0;  // duplicated words; last occurrence wins
};

// Parses a "word<TAB>score" TSV. A leading "word\tscore" header line is
// skipped; any other unparsable score is fatal with its line number.
inline LexiconLoad load_lexicon(const std::filesystem::path& path) {
  LexiconLoad result;
  const std::vector<std::string> lines = read_lines(path);
  bool first_content_line = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("lexicon " + path.string() + " line " +
                      std::to_string(i + 1) + ": expected word<TAB>score");
    std::string word = line.substr(0, tab);
    const std::string score_str = line.substr(tab + 1);
    char* end = nullptr;
    const double score = std::strtod(score_str.c_str(), &end);
    const bool parsed = end != score_str.c_str() && *end == '\0' &&
                        std::isfinite(score);
    if (!parsed) {
      std::string lowered = word;
      for (char& c : lowered) c = static_cast<char>(std::tolower(
          static_cast<unsigned char>(c)));
      if (first_content_line && lowered == "word") {
        first_content_line = false;
        continue;  // header
      }
      throw DataError("lexicon " + path.string() + " line " +
                      std::to_string(i + 1) + ": unparsable score '" +
                      score_str + "'");
    }
    first_content_line = false;
    for (char& c : word)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!result.lexicon.valence.emplace(word, score).second) {
      result.lexicon.valence[word] = score;
      ++result.duplicates;
    }
  }
  return result;
}

// Mean valence over tokens found in the lexicon; absent when none match.
inline std::optional<double> score_document(const std::vector<Token>& tokens,
                                            const Lexicon& lexicon) {
  double sum = 0.0;
  std::size_t matched = 0;
  for (const Token& t : tokens) {
    auto it = lexicon.valence.find(t.surface);
    if (it == lexicon.valence.end()) continue;
    sum += it->second;
    ++matched;
  }
  if (matched == 0) return std::nullopt;
  return sum / static_cast<double>(matched);
}

struct EmotionalArc {
  std::vector<double> positions;     // G evenly spaced points in [0, 1]
  std::vector<double> mean_valence;  // kernel-weighted mean at each point
  std::vector<double> support;       // token-mass weight at each point
};

// Kernel-weighted mean valence across normalised positions. Invariant under
// document reordering and corpus duplication; bounded by the lexicon range.
inline EmotionalArc emotional_arc(const Corpus& corpus, const Lexicon& lexicon,
                                  std::size_t grid_size = 101,
                                  double bandwidth = 0.05) {
  if (grid_size < 2) throw ConfigError("emotional arc grid must be >= 2");
  if (!(bandwidth > 0.0)) throw ConfigError("arc bandwidth must be > 0");

  struct Sample {
    double position;
    double valence;
  };
  std::vector<Sample> samples;
  for (const Document& doc : corpus) {
    const double n = static_cast<double>(doc.tokens.size());
    for (const Token& t : doc.tokens) {
      auto it = lexicon.valence.find(t.surface);
      if (it == lexicon.valence.end()) continue;
      samples.push_back({(t.position_index + 0.5) / n, it->second});
    }
  }
  if (samples.empty())
    throw DataError("emotional arc: no token matched the lexicon");

  EmotionalArc arc;
  arc.positions.resize(grid_size);
  arc.mean_valence.resize(grid_size);
  arc.support.resize(grid_size);
  const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  for (std::size_t g = 0; g < grid_size; ++g) {
    const double x = static_cast<double>(g) / (grid_size - 1);
    long double wsum = 0.0L;
    long double vsum = 0.0L;
    for (const Sample& s : samples) {
      const double d = x - s.position;
      const double w = std::exp(-d * d * inv2h2);
      wsum += w;
      vsum += w * s.valence;
    }
    arc.positions[g] = x;
    arc.support[g] = static_cast<double>(wsum);
    arc.mean_valence[g] =
        wsum > 0.0L ? static_cast<double>(vsum / wsum) : 0.0;
  }
  return arc;
}

inline void write_arc_csv(const EmotionalArc& arc,
                          const std::filesystem::path& path) {
  std::string out = "position,mean_valence,support\n";
  for (std::size_t i = 0; i < arc.positions.size(); ++i) {
    out += format_double(arc.positions[i]) + "," +
           format_double(arc.mean_valence[i]) + "," +
           format_double(arc.support[i]) + "\n";
  }
  write_text_file(path, out);
}

inline EmotionalArc read_arc_csv(const std::filesystem::path& path) {
  EmotionalArc arc;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 1; i < lines.size(); ++i) {  // skip header
    if (lines[i].empty()) continue;
    const auto c1 = lines[i].find(',');
    const auto c2 = lines[i].find(',', c1 + 1);
    arc.positions.push_back(std::stod(lines[i].substr(0, c1)));
    arc.mean_valence.push_back(std::stod(lines[i].substr(c1 + 1, c2 - c1 - 1)));
    arc.support.push_back(std::stod(lines[i].substr(c2 + 1)));
  }
  return arc;
}

}  // namespace dapmav

#endif  // DAPMAV_SENTIMENT_HPP_
