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
// Dimension reduction of the topic dissimilarity matrix (classical MDS by
// default, an SNE-style neighbour embedding as the local-structure option)
// and deterministic SVG rendering of the visual artifacts: word clouds, the
// topic landscape, stacked positional densities and the emotional arc.

#ifndef DAPMAV_LAYOUT_HPP_
#define DAPMAV_LAYOUT_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dapmav/analytics.hpp"
#include "dapmav/core.hpp"
#include "dapmav/sentiment.hpp"

namespace dapmav {

struct LayoutCoords {
  std::size_t dims = 2;
  std::vector<double> coords;  // n x dims row-major, centered on the origin
  double stress = 0.0;         // MDS: Kruskal stress; SNE: final KL
  std::vector<double> kl_checkpoints;  // SNE only, non-increasing

  std::size_t size() const { return dims == 0 ? 0 : coords.size() / dims; }
  double x(std::size_t i) const { return coords[i * dims]; }
  double y(std::size_t i) const { return dims > 1 ? coords[i * dims + 1] : 0.0; }
};

namespace layout_detail {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
// eigenvalues in descending order with matching eigenvector columns.
inline void jacobi_eigen(std::vector<double> a, std::size_t n,
                         std::vector<double>& values,
                         std::vector<double>& vectors) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) scale = 1.0;

  for (int sweep = 0; sweep < 128; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        off += a[p * n + q] * a[p * n + q];
    if (off < 1e-30 * scale * scale) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        a[p * n + p] -= t * apq;
        a[q * n + q] += t * apq;
        a[p * n + q] = a[q * n + p] = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a[r * n + p];
          const double arq = a[r * n + q];
          a[r * n + p] = a[p * n + r] = c * arp - s * arq;
          a[r * n + q] = a[q * n + r] = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v[r * n + p];
          const double vrq = v[r * n + q];
          v[r * n + p] = c * vrp - s * vrq;
          v[r * n + q] = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a[x * n + x] > a[y * n + y];
  });
  values.resize(n);
  vectors.resize(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    values[k] = a[order[k] * n + order[k]];
    for (std::size_t r = 0; r < n; ++r)
      vectors[r * n + k] = v[r * n + order[k]];
  }
}

inline void check_dissimilarity(const std::vector<double>& d, std::size_t n) {
  if (d.size() != n * n)
    throw DataError("dissimilarity matrix has wrong size");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(d[i * n + i]) > 1e-12)
      throw DataError("dissimilarity diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      if (d[i * n + j] < 0.0)
        throw DataError("dissimilarity entries must be nonnegative");
      if (std::abs(d[i * n + j] - d[j * n + i]) > 1e-9)
        throw DataError("dissimilarity matrix must be symmetric");
    }
  }
}

}  // namespace layout_detail

// Classical (Torgerson) MDS: double-center -D^2/2, take the top eigenpairs,
// scale eigenvectors by the square roots of their eigenvalues. Deterministic
// up to sign; signs are fixed by making the largest-magnitude coordinate of
// each dimension positive.
inline LayoutCoords classical_mds(const std::vector<double>& dissimilarity,
                                  std::size_t n, std::size_t dims = 2) {
  layout_detail::check_dissimilarity(dissimilarity, n);
  LayoutCoords out;
  out.dims = dims;
  out.coords.assign(n * dims, 0.0);
  if (n == 1) return out;  // single point at the origin

  std::vector<double> sq(n * n);
  for (std::size_t i = 0; i < n * n; ++i)
    sq[i] = dissimilarity[i] * dissimilarity[i];
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row_mean[i] += sq[i * n + j];
    row_mean[i] /= n;
    grand += row_mean[i];
  }
  grand /= n;
  std::vector<double> b(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      b[i * n + j] = -0.5 * (sq[i * n + j] - row_mean[i] - row_mean[j] + grand);

  std::vector<double> values, vectors;
  layout_detail::jacobi_eigen(std::move(b), n, values, vectors);
  for (std::size_t k = 0; k < dims && k < n; ++k) {
    const double lambda = std::max(values[k], 0.0);
    const double s = std::sqrt(lambda);
    for (std::size_t i = 0; i < n; ++i)
      out.coords[i * dims + k] = vectors[i * n + k] * s;
  }

  // Sign convention and exact centering.
  for (std::size_t k = 0; k < dims; ++k) {
    std::size_t argmax = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = std::abs(out.coords[i * dims + k]);
      if (mag > best) {
        best = mag;
        argmax = i;
      }
    }
    if (out.coords[argmax * dims + k] < 0.0)
      for (std::size_t i = 0; i < n; ++i) out.coords[i * dims + k] *= -1.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += out.coords[i * dims + k];
    mean /= n;
    for (std::size_t i = 0; i < n; ++i) out.coords[i * dims + k] -= mean;
  }

  // Kruskal stress against the input dissimilarities.
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dist2 = 0.0;
      for (std::size_t k = 0; k < dims; ++k) {
        const double diff = out.coords[i * dims + k] - out.coords[j * dims + k];
        dist2 += diff * diff;
      }
      const double dij = dissimilarity[i * n + j];
      const double diff = dij - std::sqrt(dist2);
      num += diff * diff;
      den += dij * dij;
    }
  }
  out.stress = den > 0.0 ? std::sqrt(num / den) : 0.0;
  return out;
}

// Symmetric neighbour embedding with a Student-t low-dimensional kernel.
// Gradient descent uses backtracking on the KL divergence, so the recorded
// checkpoints never increase. Deterministic per seed.
inline LayoutCoords sne_layout(const std::vector<double>& dissimilarity,
                               std::size_t n, double perplexity,
                               std::size_t iterations, std::uint64_t seed) {
  layout_detail::check_dissimilarity(dissimilarity, n);
  if (n < 4) throw ConfigError("sne_layout needs at least 4 topics");
  if (!(perplexity > 0.0) || perplexity >= static_cast<double>(n))
    throw ConfigError("sne perplexity must be in (0, n)");

  // Row-wise Gaussian affinities calibrated to the target perplexity. The
  // exponent is shifted by the row's minimum squared distance so tiny sigmas
  // stay finite (the limit is then uniform over the nearest neighbours).
  std::vector<double> p(n * n, 0.0);
  const double target_h = std::log(perplexity);
  for (std::size_t i = 0; i < n; ++i) {
    double dmin2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dij = dissimilarity[i * n + j];
      dmin2 = std::min(dmin2, dij * dij);
    }
    auto row_weight = [&](std::size_t j, double inv) {
      const double dij = dissimilarity[i * n + j];
      return std::exp(-(dij * dij - dmin2) * inv);
    };
    double lo = -20.0, hi = 20.0;  // log2 sigma bounds
    for (int iter = 0; iter < 64; ++iter) {
      const double sigma = std::exp2(0.5 * (lo + hi));
      const double inv = 1.0 / (2.0 * sigma * sigma);
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) sum += row_weight(j, inv);
      double h = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double pj = row_weight(j, inv) / sum;
        if (pj > 1e-300) h -= pj * std::log(pj);
      }
      if (h < target_h) lo = 0.5 * (lo + hi);
      else hi = 0.5 * (lo + hi);
    }
    const double sigma = std::exp2(0.5 * (lo + hi));
    const double inv = 1.0 / (2.0 * sigma * sigma);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum += row_weight(j, inv);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) p[i * n + j] = row_weight(j, inv) / sum;
  }
  // Symmetrise with a small floor.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double pij =
          std::max((p[i * n + j] + p[j * n + i]) / (2.0 * n), 1e-12);
      p[i * n + j] = p[j * n + i] = pij;
    }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1e-2);
  std::vector<double> y(n * 2);
  for (double& v : y) v = normal(rng);

  auto kl_of = [&](const std::vector<double>& pos) {
    std::vector<double> qnum(n * n, 0.0);
    double qsum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = pos[i * 2] - pos[j * 2];
        const double dy = pos[i * 2 + 1] - pos[j * 2 + 1];
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        qnum[i * n + j] = qnum[j * n + i] = q;
        qsum += 2.0 * q;
      }
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double pij = p[i * n + j];
        const double qij = std::max(qnum[i * n + j] / qsum, 1e-300);
        kl += pij * std::log(pij / qij);
      }
    return kl;
  };

  double lr = 10.0;
  double kl = kl_of(y);
  const std::size_t checkpoint_every = std::max<std::size_t>(1, iterations / 20);
  LayoutCoords out;
  out.dims = 2;
  out.kl_checkpoints.push_back(kl);

  std::vector<double> grad(n * 2);
  for (std::size_t iter = 0; iter < iterations; ++iter) {
    // t-SNE gradient.
    std::vector<double> qnum(n * n, 0.0);
    double qsum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = y[i * 2] - y[j * 2];
        const double dy = y[i * 2 + 1] - y[j * 2 + 1];
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        qnum[i * n + j] = qnum[j * n + i] = q;
        qsum += 2.0 * q;
      }
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double qn = qnum[i * n + j];
        const double coeff = 4.0 * (p[i * n + j] - qn / qsum) * qn;
        grad[i * 2] += coeff * (y[i * 2] - y[j * 2]);
        grad[i * 2 + 1] += coeff * (y[i * 2 + 1] - y[j * 2 + 1]);
      }

    bool accepted = false;
    for (int backtrack = 0; backtrack < 24; ++backtrack) {
      std::vector<double> trial(n * 2);
      for (std::size_t k = 0; k < n * 2; ++k) trial[k] = y[k] - lr * grad[k];
      const double trial_kl = kl_of(trial);
      if (!std::isfinite(trial_kl))
        throw DataError("sne_layout diverged at iteration " +
                        std::to_string(iter));
      if (trial_kl <= kl) {
        y = std::move(trial);
        kl = trial_kl;
        lr *= 1.1;
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    if ((iter + 1) % checkpoint_every == 0) out.kl_checkpoints.push_back(kl);
    if (!accepted) break;  // no descent direction left at any step size
  }

  for (std::size_t k = 0; k < 2; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += y[i * 2 + k];
    mean /= n;
    for (std::size_t i = 0; i < n; ++i) y[i * 2 + k] -= mean;
  }
  for (double v : y)
    if (!std::isfinite(v)) throw DataError("sne_layout produced non-finite coordinates");
  out.coords = std::move(y);
  out.stress = kl;
  if (out.kl_checkpoints.empty() ||
      out.kl_checkpoints.back() != kl)
    out.kl_checkpoints.push_back(kl);
  return out;
}

// ---------------------------------------------------------------------------
// Word clouds
// ---------------------------------------------------------------------------

// Words with their P(word|topic) weights, heaviest first.
struct WordCloudSpec {
  std::vector<std::pair<std::string, double>> entries;
};

// Top k words by probability; ties broken lexicographically. Weights are the
// input probabilities, unrenormalised.
inline WordCloudSpec wordcloud_data(const std::vector<std::string>& words,
                                    const std::vector<double>& probabilities,
                                    std::size_t top_k) {
  if (top_k == 0) throw ConfigError("wordcloud top_k must be positive");
  if (words.size() != probabilities.size())
    throw DataError("wordcloud: words/probabilities size mismatch");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < words.size(); ++i)
    if (probabilities[i] > 0.0) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (probabilities[a] != probabilities[b])
      return probabilities[a] > probabilities[b];
    return words[a] < words[b];
  });
  if (order.size() > top_k) order.resize(top_k);
  WordCloudSpec spec;
  for (std::size_t i : order) spec.entries.emplace_back(words[i], probabilities[i]);
  return spec;
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

struct SvgStyle {
  double width = 1200.0;
  double height = 800.0;
  std::string font = "sans-serif";
  std::vector<std::string> palette = {
      "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee",
      "#aa3377", "#bbbbbb", "#000000", "#994455", "#997700"};
};

namespace svg_detail {

inline std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string header(const SvgStyle& style) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         format_double(style.width) + "\" height=\"" +
         format_double(style.height) + "\" viewBox=\"0 0 " +
         format_double(style.width) + " " + format_double(style.height) +
         "\">\n";
}

inline std::string text_element(double x, double y, double font_size,
                                const std::string& fill,
                                const std::string& font,
                                const std::string& content,
                                const char* anchor = "middle") {
  return "  <text x=\"" + format_double(x) + "\" y=\"" + format_double(y) +
         "\" font-size=\"" + format_double(font_size) + "\" fill=\"" + fill +
         "\" font-family=\"" + font + "\" text-anchor=\"" + anchor + "\">" +
         escape(content) + "</text>\n";
}

struct Box {
  double x0, y0, x1, y1;
  bool overlaps(const Box& other) const {
    return x0 < other.x1 && other.x0 < x1 && y0 < other.y1 && other.y0 < y1;
  }
};

}  // namespace svg_detail

// Word cloud with deterministic Archimedean-spiral placement and collision
// boxes. Font size is affine in weight, so sizes are monotone in weight.
inline std::string render_svg(const WordCloudSpec& cloud,
                              const SvgStyle& style) {
  std::string svg = svg_detail::header(style);
  if (!cloud.entries.empty()) {
    const double max_w = cloud.entries.front().second;
    const double min_w = cloud.entries.back().second;
    const double min_size = style.height / 40.0;
    const double max_size = style.height / 8.0;
    std::vector<svg_detail::Box> placed;
    const double cx = style.width / 2.0, cy = style.height / 2.0;
    for (std::size_t i = 0; i < cloud.entries.size(); ++i) {
      const auto& [word, weight] = cloud.entries[i];
      const double rel = max_w > min_w ? (weight - min_w) / (max_w - min_w) : 1.0;
      const double size = min_size + rel * (max_size - min_size);
      const double box_w = 0.62 * size * static_cast<double>(word.size());
      const double box_h = 1.15 * size;
      double x = cx, y = cy;
      for (double theta = 0.0; theta < 400.0; theta += 0.35) {
        const double r = 2.2 * theta;
        x = cx + r * std::cos(theta);
        y = cy + r * std::sin(theta);
        svg_detail::Box box{x - box_w / 2, y - box_h / 2, x + box_w / 2,
                            y + box_h / 2};
        bool collides = box.x0 < 0 || box.y0 < 0 || box.x1 > style.width ||
                        box.y1 > style.height;
        for (const auto& other : placed)
          if (box.overlaps(other)) { collides = true; break; }
        if (!collides) {
          placed.push_back(box);
          break;
        }
      }
      const std::string& color = style.palette[i % style.palette.size()];
      svg += svg_detail::text_element(x, y + 0.35 * size, size, color,
                                      style.font, word);
    }
  }
  svg += "</svg>\n";
  return svg;
}

// One topic on the landscape: its layout position comes from LayoutCoords,
// plus its top words (weight = relative frequency) and classification label.
struct LandscapeTopic {
  std::vector<std::pair<std::string, double>> top_words;
  std::string label;
};

struct LandscapeArtifact {
  LayoutCoords coords;
  std::vector<LandscapeTopic> topics;
};

// Topic landscape: for every topic the top words (three in the standard
// pipeline), sized by relative frequency and coloured by classification.
inline std::string render_svg(const LandscapeArtifact& landscape,
                              const SvgStyle& style) {
  const std::size_t n = landscape.topics.size();
  if (landscape.coords.size() != n)
    throw DataError("landscape: coords/topics size mismatch");
  std::string svg = svg_detail::header(style);

  double max_abs_x = 1e-12, max_abs_y = 1e-12, max_weight = 1e-12;
  for (std::size_t i = 0; i < n; ++i) {
    max_abs_x = std::max(max_abs_x, std::abs(landscape.coords.x(i)));
    max_abs_y = std::max(max_abs_y, std::abs(landscape.coords.y(i)));
    for (const auto& [word, weight] : landscape.topics[i].top_words)
      max_weight = std::max(max_weight, weight);
  }
  const double margin = 0.08 * std::min(style.width, style.height);
  const double sx = (style.width / 2.0 - margin) / max_abs_x;
  const double sy = (style.height / 2.0 - margin) / max_abs_y;

  // Deterministic label colours: first-appearance order.
  std::vector<std::string> label_order;
  auto color_of = [&](const std::string& label) {
    auto it = std::find(label_order.begin(), label_order.end(), label);
    std::size_t idx;
    if (it == label_order.end()) {
      label_order.push_back(label);
      idx = label_order.size() - 1;
    } else {
      idx = static_cast<std::size_t>(it - label_order.begin());
    }
    return style.palette[idx % style.palette.size()];
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double px = style.width / 2.0 + landscape.coords.x(i) * sx;
    const double py = style.height / 2.0 + landscape.coords.y(i) * sy;
    const std::string color = color_of(landscape.topics[i].label);
    double dy = 0.0;
    for (const auto& [word, weight] : landscape.topics[i].top_words) {
      const double size =
          style.height / 70.0 + (weight / max_weight) * style.height / 28.0;
      svg += svg_detail::text_element(px, py + dy, size, color, style.font,
                                      word);
      dy += size;
    }
  }
  svg += "</svg>\n";
  return svg;
}

struct StackedDensitiesArtifact {
  // In stack order (ascending median position), with per-topic weights
  // (usage densities) applied before stacking.
  std::vector<PositionalDensity> densities;
  std::vector<double> weights;             // aligned with densities
  std::vector<std::string> labels;         // optional, aligned
};

inline std::string render_svg(const StackedDensitiesArtifact& artifact,
                              const SvgStyle& style) {
  std::string svg = svg_detail::header(style);
  if (!artifact.densities.empty()) {
    const std::size_t grid = artifact.densities.front().density.size();
    std::vector<double> base(grid, 0.0);
    std::vector<std::vector<double>> tops;
    double max_total = 1e-12;
    for (std::size_t t = 0; t < artifact.densities.size(); ++t) {
      const double w =
          t < artifact.weights.size() ? artifact.weights[t] : 1.0;
      std::vector<double> top(grid);
      for (std::size_t k = 0; k < grid; ++k) {
        top[k] = base[k] + w * artifact.densities[t].density[k];
        max_total = std::max(max_total, top[k]);
      }
      tops.push_back(std::move(top));
      base = tops.back();
    }
    const double margin = 0.06 * style.height;
    auto to_px = [&](std::size_t k) {
      return margin + (style.width - 2 * margin) * static_cast<double>(k) /
                          (grid - 1);
    };
    auto to_py = [&](double v) {
      return style.height - margin -
             (style.height - 2 * margin) * (v / max_total);
    };
    std::vector<double> lower(grid, 0.0);
    for (std::size_t t = 0; t < tops.size(); ++t) {
      std::string points;
      for (std::size_t k = 0; k < grid; ++k)
        points += format_double(to_px(k)) + "," +
                  format_double(to_py(tops[t][k])) + " ";
      for (std::size_t k = grid; k-- > 0;)
        points += format_double(to_px(k)) + "," +
                  format_double(to_py(lower[k])) + " ";
      svg += "  <polygon points=\"" + points + "\" fill=\"" +
             style.palette[t % style.palette.size()] +
             "\" fill-opacity=\"0.85\" stroke=\"none\"/>\n";
      lower = tops[t];
    }
  }
  svg += "</svg>\n";
  return svg;
}

struct ArcArtifact {
  EmotionalArc arc;
  std::vector<LabelledSegment> segments;
};

// Emotional arc polyline with the dominant-topic segments underlaid as
// coloured bands.
inline std::string render_svg(const ArcArtifact& artifact,
                              const SvgStyle& style) {
  std::string svg = svg_detail::header(style);
  const auto& arc = artifact.arc;
  const double margin = 0.08 * std::min(style.width, style.height);
  double vmax = 1e-12;
  for (double v : arc.mean_valence) vmax = std::max(vmax, std::abs(v));
  auto to_px = [&](double x) {
    return margin + (style.width - 2 * margin) * x;
  };
  auto to_py = [&](double v) {
    return style.height / 2.0 - (style.height / 2.0 - margin) * (v / vmax);
  };

  std::vector<std::string> label_order;
  auto color_of = [&](const std::string& label) {
    auto it = std::find(label_order.begin(), label_order.end(), label);
    std::size_t idx = it == label_order.end()
                          ? (label_order.push_back(label),
                             label_order.size() - 1)
                          : static_cast<std::size_t>(it - label_order.begin());
    return style.palette[idx % style.palette.size()];
  };
  for (const LabelledSegment& seg : artifact.segments) {
    svg += "  <rect x=\"" + format_double(to_px(seg.start)) + "\" y=\"" +
           format_double(margin) + "\" width=\"" +
           format_double(to_px(seg.end) - to_px(seg.start)) + "\" height=\"" +
           format_double(style.height - 2 * margin) + "\" fill=\"" +
           color_of(seg.label) + "\" fill-opacity=\"0.18\"/>\n";
  }
  // Zero line.
  svg += "  <line x1=\"" + format_double(to_px(0.0)) + "\" y1=\"" +
         format_double(to_py(0.0)) + "\" x2=\"" + format_double(to_px(1.0)) +
         "\" y2=\"" + format_double(to_py(0.0)) +
         "\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
  if (!arc.positions.empty()) {
    std::string points;
    for (std::size_t i = 0; i < arc.positions.size(); ++i)
      points += format_double(to_px(arc.positions[i])) + "," +
                format_double(to_py(arc.mean_valence[i])) + " ";
    svg += "  <polyline points=\"" + points +
           "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"2.5\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void write_coordinates_csv(const LayoutCoords& coords,
                                  const std::filesystem::path& path) {
  std::string out = "topic_id,x,y\n";
  for (std::size_t i = 0; i < coords.size(); ++i)
    out += std::to_string(i) + "," + format_double(coords.x(i)) + "," +
           format_double(coords.y(i)) + "\n";
  write_text_file(path, out);
}

}  // namespace dapmav

#endif  // DAPMAV_LAYOUT_HPP_
