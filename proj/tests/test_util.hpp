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
// Test-only oracles and helpers, independent of the library's fitting and
// layout code paths: normalized mutual information, orthogonal Procrustes,
// exhaustive set-partition enumeration, and a small XML well-formedness
// check for the SVG outputs.

#ifndef DAPMAV_TESTS_TEST_UTIL_HPP_
#define DAPMAV_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace dapmav_test {

// Normalized mutual information with arithmetic-mean normalization.
inline double nmi(const std::vector<std::uint32_t>& a,
                  const std::vector<std::uint32_t>& b) {
  const double n = static_cast<double>(a.size());
  std::map<std::uint32_t, double> pa, pb;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> pab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1.0 / n;
    pb[b[i]] += 1.0 / n;
    pab[{a[i], b[i]}] += 1.0 / n;
  }
  auto entropy = [](const std::map<std::uint32_t, double>& p) {
    double h = 0.0;
    for (auto& [k, v] : p)
      if (v > 0) h -= v * std::log(v);
    return h;
  };
  const double ha = entropy(pa), hb = entropy(pb);
  double mi = 0.0;
  for (auto& [key, pxy] : pab) {
    if (pxy <= 0) continue;
    mi += pxy * std::log(pxy / (pa[key.first] * pb[key.second]));
  }
  if (ha + hb == 0.0) return 1.0;  // both single-cluster
  return 2.0 * mi / (ha + hb);
}

// Residual after optimal translation + rotation/reflection of x onto y
// (2-D). Tries both determinant signs and keeps the better fit.
inline double procrustes_error(const std::vector<double>& x,
                               const std::vector<double>& y, std::size_t n) {
  auto centered = [&](const std::vector<double>& pts) {
    std::vector<double> out(pts);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += pts[2 * i];
      my += pts[2 * i + 1];
    }
    mx /= n;
    my /= n;
    for (std::size_t i = 0; i < n; ++i) {
      out[2 * i] -= mx;
      out[2 * i + 1] -= my;
    }
    return out;
  };
  const std::vector<double> a = centered(x), b = centered(y);
  // Cross-covariance M = sum a_i b_i^T.
  double m00 = 0, m01 = 0, m10 = 0, m11 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    m00 += a[2 * i] * b[2 * i];
    m01 += a[2 * i] * b[2 * i + 1];
    m10 += a[2 * i + 1] * b[2 * i];
    m11 += a[2 * i + 1] * b[2 * i + 1];
  }
  double best = std::numeric_limits<double>::infinity();
  // Rotation by angle t, optionally composed with a reflection.
  for (int reflect = 0; reflect < 2; ++reflect) {
    const double c00 = m00, c01 = m01;
    const double c10 = reflect ? -m10 : m10;
    const double c11 = reflect ? -m11 : m11;
    const double theta = std::atan2(c01 - c10, c00 + c11);
    const double c = std::cos(theta), s = std::sin(theta);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ax = a[2 * i];
      const double ay = reflect ? -a[2 * i + 1] : a[2 * i + 1];
      const double rx = c * ax - s * ay;
      const double ry = s * ax + c * ay;
      const double dx = rx - b[2 * i];
      const double dy = ry - b[2 * i + 1];
      err += dx * dx + dy * dy;
    }
    best = std::min(best, std::sqrt(err));
  }
  return best;
}

// Enumerates all set partitions of {0..n-1} as restricted growth strings.
inline void for_each_partition(
    std::size_t n, const std::function<void(const std::vector<std::uint32_t>&,
                                            std::uint32_t)>& visit) {
  std::vector<std::uint32_t> rgs(n, 0);
  std::vector<std::uint32_t> max_prefix(n, 0);
  for (;;) {
    std::uint32_t n_groups = 0;
    for (std::uint32_t v : rgs) n_groups = std::max(n_groups, v + 1);
    visit(rgs, n_groups);
    // Advance to the next restricted growth string.
    std::size_t i = n;
    while (i-- > 1) {
      if (rgs[i] <= max_prefix[i - 1]) {
        ++rgs[i];
        max_prefix[i] = std::max(max_prefix[i - 1], rgs[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
          rgs[j] = 0;
          max_prefix[j] = max_prefix[j - 1];
        }
        break;
      }
      if (i == 1) return;
    }
    if (n <= 1) return;
  }
}

// Minimal XML well-formedness check: tag nesting, attribute quoting, and a
// single root element. Good enough to catch structurally broken SVG.
inline bool xml_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool seen_root = false;
  while (i < text.size()) {
    if (text[i] != '<') {
      ++i;
      continue;
    }
    if (text.compare(i, 5, "<?xml") == 0) {
      const std::size_t end = text.find("?>", i);
      if (end == std::string::npos) return false;
      i = end + 2;
      continue;
    }
    const std::size_t end = text.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(i + 1, end - i - 1);
    if (tag.empty()) return false;
    if (tag[0] == '/') {
      if (stack.empty()) return false;
      const std::string name = tag.substr(1);
      if (stack.back() != name) return false;
      stack.pop_back();
    } else {
      const bool self_closing = tag.back() == '/';
      if (self_closing) tag.pop_back();
      // Attribute quotes must be balanced.
      if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
      const std::size_t space = tag.find_first_of(" \t\n");
      const std::string name =
          space == std::string::npos ? tag : tag.substr(0, space);
      if (name.empty()) return false;
      if (stack.empty()) {
        if (seen_root && !self_closing) return false;
        seen_root = true;
      }
      if (!self_closing) stack.push_back(name);
    }
    i = end + 1;
  }
  return stack.empty() && seen_root;
}

inline std::size_t count_occurrences(const std::string& text,
                                     const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++count;
  return count;
}

// Unique scratch directory under the build tree.
inline std::filesystem::path temp_dir(const std::string& hint) {
  static std::mt19937_64 rng(std::random_device{}());
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("dapmav_test_" + hint + "_" + std::to_string(rng()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace dapmav_test

#endif  // DAPMAV_TESTS_TEST_UTIL_HPP_
