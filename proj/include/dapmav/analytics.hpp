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
// Positional structure and topic-interaction analytics: normalised token
// positions, positional occupancy densities, median-position stack ordering,
// the two-step topic co-occurrence matrix, its dissimilarity transform, and
// dominant-topic segmentation. Interval overlaps are evaluated exactly on an
// integer grid; there is no sampling noise anywhere in this module.

#ifndef DAPMAV_ANALYTICS_HPP_
#define DAPMAV_ANALYTICS_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "dapmav/core.hpp"
#include "dapmav/preprocess.hpp"
#include "dapmav/topic_model.hpp"

namespace dapmav {

// Token i of an n-token document occupies [i/n, (i+1)/n).
struct PositionInterval {
  double start = 0.0;
  double end = 0.0;
};

inline std::vector<PositionInterval> normalized_positions(
    const Document& doc) {
  if (doc.tokens.empty())
    throw DataError("normalized_positions: document '" + doc.doc_id +
                    "' is empty");
  const double n = static_cast<double>(doc.tokens.size());
  std::vector<PositionInterval> out(doc.tokens.size());
  for (std::size_t i = 0; i < doc.tokens.size(); ++i)
    out[i] = {static_cast<double>(i) / n, static_cast<double>(i + 1) / n};
  return out;
}

// Per-document, per-token topic ordinals.
using TokenTopicAssignment = std::vector<std::vector<std::uint32_t>>;

inline TokenTopicAssignment assign_token_topics(
    const Corpus& corpus, const Vocabulary& vocab,
    const std::vector<std::uint32_t>& word_topics) {
  TokenTopicAssignment assignment(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    assignment[d].reserve(corpus[d].tokens.size());
    for (const Token& t : corpus[d].tokens)
      assignment[d].push_back(word_topics[vocab.ids.at(t.surface)]);
  }
  return assignment;
}

// Piecewise-constant density of one topic's positional occupancy over an
// equal-bin grid on [0, 1]; integrates to 1.
struct PositionalDensity {
  std::uint32_t topic = 0;
  std::vector<double> density;  // one value per bin

  double integral() const {
    long double sum = 0.0L;
    for (double v : density) sum += v;
    return static_cast<double>(sum / density.size());
  }

  // Position where the cumulative density reaches one half.
  double median() const {
    const std::size_t grid = density.size();
    long double cum = 0.0L;
    for (std::size_t k = 0; k < grid; ++k) {
      const long double next = cum + density[k] / grid;
      if (next >= 0.5L) {
        const double inside =
            density[k] > 0.0
                ? static_cast<double>((0.5L - cum) / density[k])
                : 0.0;
        return static_cast<double>(k) / grid + inside;
      }
      cum = next;
    }
    return 1.0;
  }
};

// Occupancy density of topic `t_hat`: the number of documents whose position
// x is on a token of the topic, normalised by the topic's total occupied
// length. Token/bin overlaps are computed in integer units of 1/(n * grid).
inline PositionalDensity positional_density(
    const Corpus& corpus, const TokenTopicAssignment& token_topics,
    std::uint32_t t_hat, std::size_t grid = 200) {
  if (grid == 0) throw ConfigError("positional density grid must be >= 1");
  std::vector<long double> mass(grid, 0.0L);  // integral of the numerator
  long double denominator = 0.0L;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const std::uint64_t n = corpus[d].tokens.size();
    if (n == 0) continue;
    if (token_topics[d].size() != n)
      throw DataError("token topic assignment out of step with corpus");
    std::uint64_t matched = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (token_topics[d][i] != t_hat) continue;
      ++matched;
      // Token interval [i*G, (i+1)*G), bins [k*n, (k+1)*n) in 1/(nG) units.
      const std::uint64_t lo = i * grid;
      const std::uint64_t hi = (i + 1) * grid;
      for (std::uint64_t k = lo / n; k * n < hi && k < grid; ++k) {
        const std::uint64_t bin_lo = k * n;
        const std::uint64_t bin_hi = (k + 1) * n;
        const std::uint64_t overlap =
            std::min(hi, bin_hi) - std::max(lo, bin_lo);
        mass[k] += static_cast<long double>(overlap) /
                   (static_cast<long double>(n) * grid);
      }
    }
    denominator += static_cast<long double>(matched) / n;
  }
  if (denominator == 0.0L)
    throw DataError("positional density: topic " + std::to_string(t_hat) +
                    " is never used");
  PositionalDensity out;
  out.topic = t_hat;
  out.density.resize(grid);
  for (std::size_t k = 0; k < grid; ++k)
    out.density[k] =
        static_cast<double>(mass[k] * grid / denominator);
  return out;
}

inline std::vector<PositionalDensity> positional_densities(
    const Corpus& corpus, const TokenTopicAssignment& token_topics,
    std::uint32_t n_topics, std::size_t grid = 200) {
  std::vector<PositionalDensity> out;
  out.reserve(n_topics);
  for (std::uint32_t t = 0; t < n_topics; ++t)
    out.push_back(positional_density(corpus, token_topics, t, grid));
  return out;
}

// Topics in ascending order of median position; ties by topic id.
inline std::vector<std::uint32_t> stack_order(
    const std::vector<PositionalDensity>& densities) {
  std::vector<std::pair<double, std::uint32_t>> keyed;
  keyed.reserve(densities.size());
  for (const PositionalDensity& d : densities)
    keyed.emplace_back(d.median(), d.topic);
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::uint32_t> order;
  order.reserve(keyed.size());
  for (auto& [median, topic] : keyed) order.push_back(topic);
  return order;
}

// Symmetric topic-topic co-occurrence probabilities; entries sum to 1.
struct CoocMatrix {
  std::uint32_t size = 0;
  std::vector<double> values;  // row-major size x size

  double at(std::uint32_t t, std::uint32_t u) const {
    return values[static_cast<std::size_t>(t) * size + u];
  }
};

// Two-step interaction: token counts propagate from topics through documents
// and back. With n_dt the tokens of document d in topic t,
// C[t][u] is proportional to sum_d n_dt * n_du, normalised to total mass 1.
inline CoocMatrix cooccurrence_matrix(const NestedPartition& partition,
                                      const BipartiteGraph& graph,
                                      std::size_t level) {
  const std::vector<std::uint32_t> topics =
      word_topics_at_level(partition, graph.n_docs, graph.n_words, level);
  const std::uint32_t n_topics = partition.levels[level].n_word_groups;
  CoocMatrix cooc;
  cooc.size = n_topics;
  cooc.values.assign(static_cast<std::size_t>(n_topics) * n_topics, 0.0);
  std::vector<double> doc_counts(n_topics);
  for (std::uint32_t d = 0; d < graph.n_docs; ++d) {
    std::fill(doc_counts.begin(), doc_counts.end(), 0.0);
    for (auto [w, m] : graph.doc_edges[d])
      doc_counts[topics[w]] += static_cast<double>(m);
    for (std::uint32_t t = 0; t < n_topics; ++t) {
      if (doc_counts[t] == 0.0) continue;
      for (std::uint32_t u = 0; u < n_topics; ++u)
        cooc.values[static_cast<std::size_t>(t) * n_topics + u] +=
            doc_counts[t] * doc_counts[u];
    }
  }
  long double total = 0.0L;
  for (double v : cooc.values) total += v;
  if (total > 0.0L)
    for (double& v : cooc.values) v = static_cast<double>(v / total);
  return cooc;
}

// Affine negative co-occurrence: d[t][u] = max(C) - C[t][u], zero diagonal.
inline std::vector<double> dissimilarity(const CoocMatrix& cooc) {
  double max_value = 0.0;
  for (double v : cooc.values) max_value = std::max(max_value, v);
  std::vector<double> d(cooc.values.size());
  for (std::size_t i = 0; i < cooc.values.size(); ++i)
    d[i] = max_value - cooc.values[i];
  for (std::uint32_t t = 0; t < cooc.size; ++t)
    d[static_cast<std::size_t>(t) * cooc.size + t] = 0.0;
  return d;
}

// ---------------------------------------------------------------------------
// Classification labels and arc segmentation
// ---------------------------------------------------------------------------

// CSV "topic_id,label"; a header line is skipped. Labels are human-supplied,
// never inferred.
inline std::unordered_map<std::uint32_t, std::string> load_topic_labels(
    const std::filesystem::path& path) {
  std::unordered_map<std::uint32_t, std::string> labels;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError("labels " + path.string() + " line " +
                      std::to_string(i + 1) + ": expected topic_id,label");
    const std::string head = line.substr(0, comma);
    if (i == 0 && head == "topic_id") continue;
    try {
      labels[static_cast<std::uint32_t>(std::stoul(head))] =
          line.substr(comma + 1);
    } catch (const std::exception&) {
      throw DataError("labels " + path.string() + " line " +
                      std::to_string(i + 1) + ": bad topic id '" + head + "'");
    }
  }
  return labels;
}

// Sums positional densities per classification label, weighting each topic
// by its usage density so the stack reflects actual occupancy.
inline std::map<std::string, std::vector<double>> group_densities_by_label(
    const std::vector<PositionalDensity>& densities,
    const std::vector<double>& topic_weights,
    const std::unordered_map<std::uint32_t, std::string>& labels,
    const std::string& default_label = "unlabelled") {
  std::map<std::string, std::vector<double>> grouped;
  for (const PositionalDensity& d : densities) {
    auto it = labels.find(d.topic);
    const std::string& label =
        it == labels.end() ? default_label : it->second;
    auto& acc = grouped[label];
    if (acc.empty()) acc.assign(d.density.size(), 0.0);
    const double w =
        d.topic < topic_weights.size() ? topic_weights[d.topic] : 1.0;
    for (std::size_t k = 0; k < d.density.size(); ++k)
      acc[k] += w * d.density[k];
  }
  return grouped;
}

struct LabelledSegment {
  double start = 0.0;
  double end = 0.0;
  std::string label;
};

// Picks the label with the highest summed density at each grid point and
// merges adjacent equal labels. Ties go to the lexicographically first label
// (std::map iteration order).
inline std::vector<LabelledSegment> dominant_topic_segments(
    const std::map<std::string, std::vector<double>>& grouped,
    std::size_t grid) {
  if (grouped.empty())
    throw DataError("dominant_topic_segments: no density groups");
  for (const auto& [label, density] : grouped)
    if (density.size() != grid)
      throw DataError("density group '" + label + "' has wrong grid size");
  std::vector<LabelledSegment> segments;
  for (std::size_t k = 0; k < grid; ++k) {
    const std::string* best_label = nullptr;
    double best = -1.0;
    for (const auto& [label, density] : grouped) {
      if (density[k] > best) {
        best = density[k];
        best_label = &label;
      }
    }
    const double start = static_cast<double>(k) / grid;
    const double end = static_cast<double>(k + 1) / grid;
    if (!segments.empty() && segments.back().label == *best_label)
      segments.back().end = end;
    else
      segments.push_back({start, end, *best_label});
  }
  return segments;
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

inline void write_topic_densities_csv(const std::vector<double>& densities,
                                      const std::filesystem::path& path) {
  std::string out = "topic_id,density\n";
  for (std::size_t t = 0; t < densities.size(); ++t)
    out += std::to_string(t) + "," + format_double(densities[t]) + "\n";
  write_text_file(path, out);
}

inline void write_square_matrix_csv(const std::vector<double>& values,
                                    std::uint32_t size,
                                    const std::filesystem::path& path) {
  std::string out = "topic_id";
  for (std::uint32_t u = 0; u < size; ++u)
    out += ",t" + std::to_string(u);
  out += "\n";
  for (std::uint32_t t = 0; t < size; ++t) {
    out += std::to_string(t);
    for (std::uint32_t u = 0; u < size; ++u)
      out += "," +
             format_double(values[static_cast<std::size_t>(t) * size + u]);
    out += "\n";
  }
  write_text_file(path, out);
}

inline std::pair<std::vector<double>, std::uint32_t> read_square_matrix_csv(
    const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.size() < 2) throw DataError("matrix csv too short: " + path.string());
  const std::uint32_t size = static_cast<std::uint32_t>(lines.size() - 1);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(size) * size);
  for (std::uint32_t t = 0; t < size; ++t) {
    const std::string& line = lines[t + 1];
    std::size_t pos = line.find(',');  // skip topic_id column
    std::uint32_t parsed = 0;
    while (pos != std::string::npos && parsed < size) {
      const std::size_t next = line.find(',', pos + 1);
      values.push_back(std::stod(line.substr(
          pos + 1, next == std::string::npos ? next : next - pos - 1)));
      pos = next;
      ++parsed;
    }
    if (parsed != size)
      throw DataError("matrix csv row " + std::to_string(t) + " malformed");
  }
  return {std::move(values), size};
}

inline void write_positional_densities_csv(
    const std::vector<PositionalDensity>& densities,
    const std::filesystem::path& path) {
  std::string out = "topic_id,bin_start,bin_end,density\n";
  for (const PositionalDensity& d : densities) {
    const std::size_t grid = d.density.size();
    for (std::size_t k = 0; k < grid; ++k) {
      out += std::to_string(d.topic) + "," +
             format_double(static_cast<double>(k) / grid) + "," +
             format_double(static_cast<double>(k + 1) / grid) + "," +
             format_double(d.density[k]) + "\n";
    }
  }
  write_text_file(path, out);
}

inline std::vector<PositionalDensity> read_positional_densities_csv(
    const std::filesystem::path& path) {
  std::vector<PositionalDensity> out;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto c1 = lines[i].find(',');
    const auto c3 = lines[i].rfind(',');
    const std::uint32_t topic =
        static_cast<std::uint32_t>(std::stoul(lines[i].substr(0, c1)));
    const double density = std::stod(lines[i].substr(c3 + 1));
    if (out.empty() || out.back().topic != topic)
      out.push_back({topic, {}});
    out.back().density.push_back(density);
  }
  return out;
}

inline void write_segments_csv(const std::vector<LabelledSegment>& segments,
                               const std::filesystem::path& path) {
  std::string out = "start,end,label\n";
  for (const LabelledSegment& s : segments)
    out += format_double(s.start) + "," + format_double(s.end) + "," +
           csv_escape(s.label) + "\n";
  write_text_file(path, out);
}

inline std::vector<LabelledSegment> read_segments_csv(
    const std::filesystem::path& path) {
  std::vector<LabelledSegment> out;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto c1 = lines[i].find(',');
    const auto c2 = lines[i].find(',', c1 + 1);
    out.push_back({std::stod(lines[i].substr(0, c1)),
                   std::stod(lines[i].substr(c1 + 1, c2 - c1 - 1)),
                   lines[i].substr(c2 + 1)});
  }
  return out;
}

}  // namespace dapmav

#endif  // DAPMAV_ANALYTICS_HPP_
