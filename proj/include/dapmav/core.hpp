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

#ifndef DAPMAV_CORE_HPP_
#define DAPMAV_CORE_HPP_

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dapmav {

// Error categories, mapped to CLI exit codes (config: 2, data: 3, stage: 4).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct StageDependencyError : std::runtime_error {
  explicit StageDependencyError(const std::string& msg)
      : std::runtime_error(msg) {}
};

enum class PostKind { submission, reply };

inline std::string to_string(PostKind k) {
  return k == PostKind::submission ? "submission" : "reply";
}

inline PostKind post_kind_from_string(std::string_view s) {
  if (s == "submission") return PostKind::submission;
  if (s == "reply" || s == "comment") return PostKind::reply;
  throw DataError("unknown post kind: " + std::string(s));
}

// The six male family roles tracked in narratives.
enum class FamilyRole { brother, father, grandfather, husband, son, uncle };

inline std::string to_string(FamilyRole r) {
  switch (r) {
    case FamilyRole::brother: return "brother";
    case FamilyRole::father: return "father";
    case FamilyRole::grandfather: return "grandfather";
    case FamilyRole::husband: return "husband";
    case FamilyRole::son: return "son";
    case FamilyRole::uncle: return "uncle";
  }
  return "?";
}

inline FamilyRole family_role_from_string(std::string_view s) {
  if (s == "brother") return FamilyRole::brother;
  if (s == "father") return FamilyRole::father;
  if (s == "grandfather") return FamilyRole::grandfather;
  if (s == "husband") return FamilyRole::husband;
  if (s == "son") return FamilyRole::son;
  if (s == "uncle") return FamilyRole::uncle;
  throw DataError("unknown family role: " + std::string(s));
}

// Decade age bracket, e.g. {70, 79}.
struct AgeBracket {
  int lo = 0;
  int hi = 0;

  friend bool operator<(const AgeBracket& a, const AgeBracket& b) {
    return a.lo < b.lo;
  }
  friend bool operator==(const AgeBracket& a, const AgeBracket& b) {
    return a.lo == b.lo && a.hi == b.hi;
  }
};

inline AgeBracket bracket_for_age(int age) {
  int lo = (age / 10) * 10;
  return {lo, lo + 9};
}

inline std::string to_string(const AgeBracket& b) {
  return std::to_string(b.lo) + "-" + std::to_string(b.hi);
}

// Age brackets and male family roles extracted from a narrative.
struct NarrativeMetadata {
  std::set<AgeBracket> age_brackets;
  std::set<FamilyRole> family_roles;
};

// FNV-1a, used for author pseudonymisation and artifact staleness checks.
// Not cryptographic; collisions are acceptable for both uses.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return std::string(buf);
}

// splitmix64; used to derive independent per-restart RNG seeds.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stable shortest-ish float formatting so CSV/SVG output is byte-reproducible.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos)
    return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            std::string_view content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("short write: " + path.string());
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace dapmav

#endif  // DAPMAV_CORE_HPP_
