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

#include "dapmav/layout.hpp"

#include <gtest/gtest.h>

#include <random>
#include <regex>

#include "test_util.hpp"

namespace dapmav {
namespace {

std::vector<double> distance_matrix(const std::vector<double>& xy,
                                    std::size_t n) {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = xy[2 * i] - xy[2 * j];
      const double dy = xy[2 * i + 1] - xy[2 * j + 1];
      d[i * n + j] = std::sqrt(dx * dx + dy * dy);
    }
  return d;
}

TEST(ClassicalMds, RecoversUnitSquare) {
  const std::vector<double> square = {0, 0, 1, 0, 1, 1, 0, 1};
  const LayoutCoords coords = classical_mds(distance_matrix(square, 4), 4);
  ASSERT_EQ(coords.size(), 4u);
  std::vector<double> embedded;
  for (std::size_t i = 0; i < 4; ++i) {
    embedded.push_back(coords.x(i));
    embedded.push_back(coords.y(i));
  }
  EXPECT_LT(dapmav_test::procrustes_error(embedded, square, 4), 1e-6);
  EXPECT_LT(coords.stress, 1e-9);
}

TEST(ClassicalMds, RandomPlanarConfigsRecovered) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int trial = 0; trial < 3; ++trial) {
    const std::size_t n = 12;
    std::vector<double> points(2 * n);
    for (double& v : points) v = unif(rng);
    const LayoutCoords coords = classical_mds(distance_matrix(points, n), n);
    std::vector<double> embedded;
    for (std::size_t i = 0; i < n; ++i) {
      embedded.push_back(coords.x(i));
      embedded.push_back(coords.y(i));
    }
    EXPECT_LT(dapmav_test::procrustes_error(embedded, points, n), 1e-6);
  }
}

TEST(ClassicalMds, EquilateralFromEqualDissimilarities) {
  std::vector<double> d(9, 1.0);
  for (int i = 0; i < 3; ++i) d[i * 3 + i] = 0.0;
  const LayoutCoords coords = classical_mds(d, 3);
  // All pairwise embedded distances equal.
  std::vector<double> dist;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) {
      const double dx = coords.x(i) - coords.x(j);
      const double dy = coords.y(i) - coords.y(j);
      dist.push_back(std::sqrt(dx * dx + dy * dy));
    }
  EXPECT_NEAR(dist[0], dist[1], 1e-9);
  EXPECT_NEAR(dist[1], dist[2], 1e-9);
}

TEST(ClassicalMds, SinglePointAtOrigin) {
  const LayoutCoords coords = classical_mds({0.0}, 1);
  ASSERT_EQ(coords.size(), 1u);
  EXPECT_DOUBLE_EQ(coords.x(0), 0.0);
  EXPECT_DOUBLE_EQ(coords.y(0), 0.0);
  EXPECT_DOUBLE_EQ(coords.stress, 0.0);
}

TEST(ClassicalMds, CenteredAndDeterministicSign) {
  const std::vector<double> pts = {0, 0, 2, 0, 2, 1, 0, 1, 1, 3};
  const LayoutCoords a = classical_mds(distance_matrix(pts, 5), 5);
  const LayoutCoords b = classical_mds(distance_matrix(pts, 5), 5);
  EXPECT_EQ(a.coords, b.coords);
  double mx = 0, my = 0, max_abs_x = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    mx += a.x(i);
    my += a.y(i);
    max_abs_x = std::max(max_abs_x, std::abs(a.x(i)));
  }
  EXPECT_NEAR(mx, 0.0, 1e-9);
  EXPECT_NEAR(my, 0.0, 1e-9);
  // The largest-magnitude x coordinate is positive by convention.
  double largest = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    if (std::abs(a.x(i)) == max_abs_x) largest = a.x(i);
  EXPECT_GT(largest, 0.0);
}

TEST(ClassicalMds, RejectsBadMatrices) {
  std::vector<double> asym = {0, 1, 2, 0};  // d(0,1) != d(1,0)
  EXPECT_THROW(classical_mds(asym, 2), DataError);
  std::vector<double> negative = {0, -1, -1, 0};
  EXPECT_THROW(classical_mds(negative, 2), DataError);
  std::vector<double> diag = {1, 1, 1, 0};
  EXPECT_THROW(classical_mds(diag, 2), DataError);
  EXPECT_THROW(classical_mds({0, 1, 1}, 2), DataError);  // wrong size
}

std::vector<double> two_cluster_dissimilarity(std::size_t n) {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool same = (i < n / 2) == (j < n / 2);
      d[i * n + j] = same ? 0.1 : 10.0;
    }
  return d;
}

TEST(SneLayout, SeparatesPlantedClusters) {
  const std::size_t n = 10;
  const LayoutCoords coords =
      sne_layout(two_cluster_dissimilarity(n), n, 3.0, 400, 13);
  double cx[2] = {0, 0}, cy[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    cx[i < n / 2 ? 0 : 1] += coords.x(i) / (n / 2);
    cy[i < n / 2 ? 0 : 1] += coords.y(i) / (n / 2);
  }
  const double inter = std::hypot(cx[0] - cx[1], cy[0] - cy[1]);
  double intra = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = i < n / 2 ? 0 : 1;
    intra += std::hypot(coords.x(i) - cx[c], coords.y(i) - cy[c]) / n;
  }
  EXPECT_GT(inter, 3.0 * intra);
}

TEST(SneLayout, DeterministicPerSeedAndMonotoneKl) {
  const std::size_t n = 8;
  const auto d = two_cluster_dissimilarity(n);
  const LayoutCoords a = sne_layout(d, n, 2.5, 200, 42);
  const LayoutCoords b = sne_layout(d, n, 2.5, 200, 42);
  EXPECT_EQ(a.coords, b.coords);
  const LayoutCoords c = sne_layout(d, n, 2.5, 200, 43);
  EXPECT_NE(a.coords, c.coords);
  ASSERT_GE(a.kl_checkpoints.size(), 2u);
  for (std::size_t i = 1; i < a.kl_checkpoints.size(); ++i)
    EXPECT_LE(a.kl_checkpoints[i], a.kl_checkpoints[i - 1] + 1e-12);
  for (double v : a.coords) EXPECT_TRUE(std::isfinite(v));
}

TEST(SneLayout, SmallestSupportedInput) {
  std::vector<double> d = {0, 1, 2, 3,
                           1, 0, 1, 2,
                           2, 1, 0, 1,
                           3, 2, 1, 0};
  const LayoutCoords coords = sne_layout(d, 4, 2.0, 50, 1);
  ASSERT_EQ(coords.size(), 4u);
  for (double v : coords.coords) EXPECT_TRUE(std::isfinite(v));
}

TEST(SneLayout, ParameterValidation) {
  const auto d = two_cluster_dissimilarity(4);
  EXPECT_THROW(sne_layout(d, 4, 4.0, 50, 1), ConfigError);   // perplexity >= n
  EXPECT_THROW(sne_layout(two_cluster_dissimilarity(3), 3, 2.0, 50, 1),
               ConfigError);                                  // n < 4
}

TEST(WordcloudData, TopKAndTies) {
  const std::vector<std::string> words = {"a", "b", "c"};
  const WordCloudSpec top2 = wordcloud_data(words, {0.5, 0.3, 0.2}, 2);
  ASSERT_EQ(top2.entries.size(), 2u);
  EXPECT_EQ(top2.entries[0], (std::pair<std::string, double>{"a", 0.5}));
  EXPECT_EQ(top2.entries[1], (std::pair<std::string, double>{"b", 0.3}));

  const WordCloudSpec all = wordcloud_data(words, {0.5, 0.3, 0.2}, 10);
  EXPECT_EQ(all.entries.size(), 3u);

  const WordCloudSpec ties =
      wordcloud_data({"zeta", "alpha", "mid"}, {0.4, 0.4, 0.2}, 2);
  EXPECT_EQ(ties.entries[0].first, "alpha");
  EXPECT_EQ(ties.entries[1].first, "zeta");

  EXPECT_THROW(wordcloud_data(words, {0.5, 0.3, 0.2}, 0), ConfigError);
}

TEST(WordcloudData, WeightsAreExactInputProbabilities) {
  const WordCloudSpec spec =
      wordcloud_data({"x", "y"}, {0.123456789, 0.0000321}, 5);
  EXPECT_DOUBLE_EQ(spec.entries[0].second, 0.123456789);
  EXPECT_DOUBLE_EQ(spec.entries[1].second, 0.0000321);
}

std::vector<double> extract_font_sizes(const std::string& svg) {
  std::vector<double> sizes;
  std::regex re("font-size=\"([0-9.]+)\"");
  for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end;
       ++it)
    sizes.push_back(std::stod((*it)[1]));
  return sizes;
}

TEST(RenderSvg, WordcloudStructure) {
  WordCloudSpec cloud;
  cloud.entries = {{"psa", 0.5}, {"biopsy", 0.3}, {"scan", 0.2}};
  const SvgStyle style;
  const std::string svg = render_svg(cloud, style);
  EXPECT_TRUE(dapmav_test::xml_well_formed(svg)) << svg;
  EXPECT_EQ(dapmav_test::count_occurrences(svg, "<text"), 3u);
  const std::vector<double> sizes = extract_font_sizes(svg);
  ASSERT_EQ(sizes.size(), 3u);
  EXPECT_GE(sizes[0], sizes[1]);
  EXPECT_GE(sizes[1], sizes[2]);
  // Deterministic output.
  EXPECT_EQ(svg, render_svg(cloud, style));
}

TEST(RenderSvg, LandscapeStructure) {
  LandscapeArtifact landscape;
  landscape.coords.dims = 2;
  const std::vector<std::string> labels = {"diagnosis", "treatment",
                                           "symptoms", "experience",
                                           "general"};
  for (std::size_t t = 0; t < 5; ++t) {
    landscape.coords.coords.push_back(std::cos(1.3 * t));
    landscape.coords.coords.push_back(std::sin(1.3 * t));
    LandscapeTopic topic;
    topic.label = labels[t];
    topic.top_words = {{"w" + std::to_string(t) + "a", 0.03},
                       {"w" + std::to_string(t) + "b", 0.02},
                       {"w" + std::to_string(t) + "c", 0.01}};
    landscape.topics.push_back(topic);
  }
  const std::string svg = render_svg(landscape, SvgStyle{});
  EXPECT_TRUE(dapmav_test::xml_well_formed(svg));
  EXPECT_EQ(dapmav_test::count_occurrences(svg, "<text"), 15u);
  std::set<std::string> fills;
  std::regex re("fill=\"(#[0-9a-f]{6})\"");
  for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end;
       ++it)
    fills.insert((*it)[1]);
  EXPECT_EQ(fills.size(), 5u);
}

TEST(RenderSvg, StackedDensitiesStructure) {
  StackedDensitiesArtifact artifact;
  artifact.densities = {{0, {2.0, 1.0, 0.5, 0.5}}, {1, {0.0, 1.0, 1.5, 1.5}}};
  artifact.weights = {0.5, 0.5};
  artifact.labels = {"early", "late"};
  const std::string svg = render_svg(artifact, SvgStyle{});
  EXPECT_TRUE(dapmav_test::xml_well_formed(svg));
  EXPECT_EQ(dapmav_test::count_occurrences(svg, "<polygon"), 2u);
}

TEST(RenderSvg, ArcWithSegmentsStructure) {
  ArcArtifact artifact;
  for (int i = 0; i <= 20; ++i) {
    const double x = i / 20.0;
    artifact.arc.positions.push_back(x);
    artifact.arc.mean_valence.push_back(std::sin(6.28 * x) * 0.3 - 0.1);
    artifact.arc.support.push_back(1.0);
  }
  artifact.segments = {{0.0, 0.4, "diagnosis"}, {0.4, 1.0, "experience"}};
  const std::string svg = render_svg(artifact, SvgStyle{});
  EXPECT_TRUE(dapmav_test::xml_well_formed(svg));
  EXPECT_EQ(dapmav_test::count_occurrences(svg, "<polyline"), 1u);
  EXPECT_GE(dapmav_test::count_occurrences(svg, "<rect"), 1u);
}

TEST(RenderSvg, CoordinatesCsv) {
  LayoutCoords coords;
  coords.dims = 2;
  coords.coords = {1.5, -2.5, 0.25, 0.75};
  const std::filesystem::path path =
      dapmav_test::temp_dir("coords") / "coordinates.csv";
  write_coordinates_csv(coords, path);
  const std::vector<std::string> lines = read_lines(path);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "topic_id,x,y");
  EXPECT_EQ(lines[1], "0,1.5,-2.5");
  EXPECT_EQ(lines[2], "1,0.25,0.75");
}

}  // namespace
}  // namespace dapmav
