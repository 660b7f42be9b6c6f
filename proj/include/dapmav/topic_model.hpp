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
// Nested degree-corrected stochastic block model on the document-word
// bipartite multigraph. Word-node groups are topics; the hierarchy of
// partitions is selected by minimising a description length.
//
// The description length implemented here, in nats, for a hierarchy of
// partitions b_0 (nodes), b_1 (level-0 groups), ..., b_L (with exactly one
// document group and one word group at the top) is
//
//   DL = S_edges + S_degrees + sum_l S_partition(l) + sum_{l>=1} S_matrix(l)
//
// with, writing e_rs for edge counts between level-0 groups, e_r = sum_s e_rs,
// n_r for group sizes, k_i for node degrees and A_dw for edge multiplicities:
//
//   S_edges     = sum_r ln e_r! - sum_{r,s} ln e_rs!
//                 - sum_i ln k_i! + sum_{d,w} ln A_dw!
//     (microcanonical degree-corrected multigraph likelihood; the graph is
//      bipartite, so there are no self-loops and no within-side pairs)
//   S_degrees   = sum_r ln C(n_r + e_r - 1, e_r)
//     (uniform prior over the degree sequences inside each level-0 group)
//   S_partition(l) = per side: ln N + ln C(N-1, B-1) + ln N! - sum_g ln n_g!
//     (uniform priors over the number of groups, group sizes, and the
//      partition itself; N counts the items partitioned at level l)
//   S_matrix(l) = sum_{u,v} ln C(n_u n_v + m_l[u][v] - 1, m_l[u][v])
//     (uniform prior over the level-(l-1) edge-count matrix given its
//      aggregation m_l to level-l groups; n_u counts child groups)
//
// The matrix chain terminates by itself: once a level has a single group per
// side every further term is zero, so appending trivial levels leaves the
// value unchanged. All terms are label-invariant sums over groups.

#ifndef DAPMAV_TOPIC_MODEL_HPP_
#define DAPMAV_TOPIC_MODEL_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dapmav/core.hpp"
#include "dapmav/preprocess.hpp"

namespace dapmav {

// ---------------------------------------------------------------------------
// Bipartite document-word multigraph
// ---------------------------------------------------------------------------

struct BipartiteGraph {
  std::uint32_t n_docs = 0;
  std::uint32_t n_words = 0;
  // Per document: (word id, multiplicity), sorted by word id; plus mirror.
  std::vector<std::vector<std::pair<std::uint32_t, std::uint64_t>>> doc_edges;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint64_t>>> word_edges;
  std::vector<std::uint64_t> doc_degrees;
  std::vector<std::uint64_t> word_degrees;
  std::uint64_t total_edges = 0;
  std::vector<std::string> doc_ids;
  std::vector<std::string> words;
};

// Edge multiplicity of (d, w) equals the count of w in document d, so the
// total edge count equals the total token count.
inline BipartiteGraph build_bipartite_graph(const Corpus& corpus,
                                            const Vocabulary& vocab) {
  if (corpus.empty()) throw DataError("cannot build graph: empty corpus");
  if (vocab.size() == 0) throw DataError("cannot build graph: empty vocabulary");
  BipartiteGraph g;
  g.n_docs = static_cast<std::uint32_t>(corpus.size());
  g.n_words = static_cast<std::uint32_t>(vocab.size());
  g.words = vocab.words;
  g.doc_edges.resize(g.n_docs);
  g.word_edges.resize(g.n_words);
  g.doc_degrees.assign(g.n_docs, 0);
  g.word_degrees.assign(g.n_words, 0);
  for (std::uint32_t d = 0; d < g.n_docs; ++d) {
    g.doc_ids.push_back(corpus[d].doc_id);
    std::map<std::uint32_t, std::uint64_t> counts;
    for (const Token& t : corpus[d].tokens) {
      auto it = vocab.ids.find(t.surface);
      if (it == vocab.ids.end())
        throw DataError("token '" + t.surface + "' missing from vocabulary");
      ++counts[it->second];
    }
    for (auto [w, m] : counts) {
      g.doc_edges[d].emplace_back(w, m);
      g.word_edges[w].emplace_back(d, m);
      g.doc_degrees[d] += m;
      g.word_degrees[w] += m;
      g.total_edges += m;
    }
  }
  if (g.total_edges == 0) throw DataError("cannot build graph: no tokens");
  return g;
}

// ---------------------------------------------------------------------------
// Nested partitions
// ---------------------------------------------------------------------------

// One level of the hierarchy. Group ids are side-blocked: document-side
// groups are 0..n_doc_groups-1, word-side groups follow. Level 0 assigns
// nodes (documents first, then words); level l >= 1 assigns the groups of
// level l-1.
struct PartitionLevel {
  std::vector<std::uint32_t> assignment;
  std::uint32_t n_doc_groups = 0;
  std::uint32_t n_word_groups = 0;
  // Cross edge counts, n_doc_groups x n_word_groups row-major.
  std::vector<std::uint64_t> edge_matrix;

  std::uint32_t n_groups() const { return n_doc_groups + n_word_groups; }
  std::uint64_t edges(std::uint32_t doc_group, std::uint32_t word_group) const {
    return edge_matrix[static_cast<std::size_t>(doc_group) * n_word_groups +
                       word_group];
  }
};

struct FitConfig {
  std::uint64_t seed = 1;
  std::uint32_t n_restarts = 10;
  std::uint32_t sweeps = 100;  // cap on greedy sweeps per convergence loop
  std::vector<double> beta_schedule;  // optional annealing stages
  bool parallel_restarts = true;
};

struct NestedPartition {
  std::vector<PartitionLevel> levels;
  double description_length = 0.0;

  std::size_t n_levels() const { return levels.size(); }

  // Composed group of a node at the given level (side-blocked id space of
  // that level). Nodes are indexed documents first, then words.
  std::uint32_t node_group_at_level(std::uint32_t node,
                                    std::size_t level) const {
    std::uint32_t g = levels[0].assignment[node];
    for (std::size_t l = 1; l <= level; ++l) g = levels[l].assignment[g];
    return g;
  }
};

// Word-node topic ordinals (0..n_word_groups-1) at a level.
inline std::vector<std::uint32_t> word_topics_at_level(
    const NestedPartition& partition, std::uint32_t n_docs,
    std::uint32_t n_words, std::size_t level) {
  std::vector<std::uint32_t> topics(n_words);
  const std::uint32_t offset = partition.levels[level].n_doc_groups;
  for (std::uint32_t w = 0; w < n_words; ++w)
    topics[w] = partition.node_group_at_level(n_docs + w, level) - offset;
  return topics;
}

inline std::vector<std::uint32_t> doc_groups_at_level(
    const NestedPartition& partition, std::uint32_t n_docs,
    std::size_t level) {
  std::vector<std::uint32_t> groups(n_docs);
  for (std::uint32_t d = 0; d < n_docs; ++d)
    groups[d] = partition.node_group_at_level(d, level);
  return groups;
}

// ---------------------------------------------------------------------------
// Description-length terms
// ---------------------------------------------------------------------------

namespace dl_detail {

extern "C" double lgamma_r(double, int*);  // thread-safe lgamma (glibc)

inline double lgamma_safe(double x) {
  int sign = 0;
  return lgamma_r(x, &sign);
}

// ln n!, cached for small arguments. The cache entries are computed with the
// same lgamma call as the fallback, so cached and uncached paths agree
// bit for bit.
inline double ln_factorial(std::uint64_t n) {
  static const std::vector<double> cache = [] {
    std::vector<double> c(1u << 16);
    for (std::size_t i = 0; i < c.size(); ++i)
      c[i] = lgamma_safe(static_cast<double>(i) + 1.0);
    return c;
  }();
  if (n < cache.size()) return cache[n];
  return lgamma_safe(static_cast<double>(n) + 1.0);
}

inline double ln_binom(std::uint64_t n, std::uint64_t k) {
  if (k == 0 || n == 0 || k >= n) return 0.0;
  return ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
}

// ln of the multiset coefficient ((n; m)) = C(n + m - 1, m): the number of
// ways m indistinct edges can fill n slots.
inline double ln_multiset(std::uint64_t n, std::uint64_t m) {
  if (m == 0 || n == 0) return 0.0;
  return ln_binom(n + m - 1, m);
}

// Per-side partition prior: ln N + ln C(N-1, B-1) + ln N! - sum ln n_g!.
// The size-dependent tail (-sum ln n_g!) is accounted separately so the
// incremental state can track it per group.
inline double partition_prior_head(std::uint64_t n_items,
                                   std::uint64_t n_groups) {
  if (n_items == 0) return 0.0;
  return std::log(static_cast<double>(n_items)) +
         ln_binom(n_items - 1, n_groups - 1) +
         ln_factorial(n_items);
}

}  // namespace dl_detail

// ---------------------------------------------------------------------------
// Level multigraph and the incremental block state
// ---------------------------------------------------------------------------

// Bipartite multigraph at one hierarchy level. Items 0..n_left-1 are
// document-side, the rest word-side.
struct LevelGraph {
  std::uint32_t n_left = 0;
  std::uint32_t n_right = 0;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint64_t>>> adj;
  std::vector<std::uint64_t> degree;
  std::uint64_t total_edges = 0;

  std::uint32_t n_items() const { return n_left + n_right; }
  bool is_left(std::uint32_t item) const { return item < n_left; }
};

inline LevelGraph level_graph_from(const BipartiteGraph& g) {
  LevelGraph lg;
  lg.n_left = g.n_docs;
  lg.n_right = g.n_words;
  lg.adj.resize(lg.n_items());
  lg.degree.assign(lg.n_items(), 0);
  lg.total_edges = g.total_edges;
  for (std::uint32_t d = 0; d < g.n_docs; ++d) {
    for (auto [w, m] : g.doc_edges[d]) {
      lg.adj[d].emplace_back(g.n_docs + w, m);
      lg.adj[g.n_docs + w].emplace_back(d, m);
    }
    lg.degree[d] = g.doc_degrees[d];
  }
  for (std::uint32_t w = 0; w < g.n_words; ++w)
    lg.degree[g.n_docs + w] = g.word_degrees[w];
  return lg;
}

// Objective for one level: the node level carries the degree-corrected
// likelihood and degree prior; higher levels encode the child edge-count
// matrix with uniform multiset priors.
enum class LevelObjective { degree_corrected, uniform };

// Incrementally maintained description length of one level plus the cost of
// closing the hierarchy directly above it with a trivial level. Moving a
// single item or merging two groups updates only the affected terms; the
// maintained value tracks a from-scratch recomputation to ~1e-12.
class BlockState {
 public:
  BlockState(const LevelGraph& graph, LevelObjective objective)
      : g_(&graph), objective_(objective) {
    constant_ = 0.0;
    if (objective_ == LevelObjective::degree_corrected) {
      for (std::uint32_t i = 0; i < g_->n_items(); ++i)
        constant_ -= dl_detail::ln_factorial(g_->degree[i]);
      for (std::uint32_t i = 0; i < g_->n_left; ++i)
        for (auto [j, m] : g_->adj[i])
          constant_ += dl_detail::ln_factorial(m);
    }
    constant_ += dl_detail::partition_prior_head(g_->n_left, 1) -
                 dl_detail::ln_binom(g_->n_left - 1, 0);
    constant_ += dl_detail::partition_prior_head(g_->n_right, 1) -
                 dl_detail::ln_binom(g_->n_right - 1, 0);
    // constant_ now holds ln N + ln N! per side (plus DC constants); the
    // C(N-1, B-1) factors are tracked against the live group counts.
  }

  std::uint32_t capacity() const { return g_->n_items() + 1; }

  void assign(const std::vector<std::uint32_t>& b) {
    if (b.size() != g_->n_items())
      throw DataError("block state: assignment size mismatch");
    b_ = b;
    size_.assign(capacity(), 0);
    degree_sum_.assign(capacity(), 0);
    neighbors_.assign(capacity(), {});
    n_left_groups_ = n_right_groups_ = 0;
    for (std::uint32_t i = 0; i < g_->n_items(); ++i) {
      if (b_[i] >= capacity())
        throw DataError("block state: group id out of range");
      if (size_[b_[i]] == 0) (g_->is_left(i) ? n_left_groups_
                                             : n_right_groups_)++;
      ++size_[b_[i]];
      degree_sum_[b_[i]] += g_->degree[i];
    }
    for (std::uint32_t i = 0; i < g_->n_items(); ++i) {
      if (!g_->is_left(i)) break;
      for (auto [j, m] : g_->adj[i]) {
        neighbors_[b_[i]][b_[j]] += m;
        neighbors_[b_[j]][b_[i]] += m;
      }
    }
    // Mixed-side groups would corrupt every term.
    std::vector<int> side(capacity(), -1);
    for (std::uint32_t i = 0; i < g_->n_items(); ++i) {
      const int s = g_->is_left(i) ? 0 : 1;
      if (side[b_[i]] == -1) side[b_[i]] = s;
      else if (side[b_[i]] != s)
        throw DataError("block state: group mixes document and word items");
    }
    dead_.clear();
    for (std::uint32_t gid = 0; gid < capacity(); ++gid)
      if (size_[gid] == 0) dead_.insert(gid);
    dl_ = scratch_dl();
  }

  const std::vector<std::uint32_t>& assignment() const { return b_; }
  std::uint32_t group_of(std::uint32_t item) const { return b_[item]; }
  std::uint32_t n_left_groups() const { return n_left_groups_; }
  std::uint32_t n_right_groups() const { return n_right_groups_; }
  std::uint64_t group_size(std::uint32_t gid) const { return size_[gid]; }
  const std::unordered_map<std::uint32_t, std::uint64_t>& group_neighbors(
      std::uint32_t gid) const {
    return neighbors_[gid];
  }

  double dl() const { return static_cast<double>(dl_); }

  // Lowest dead group id, usable as a fresh group for the given item's side.
  std::uint32_t spare_group() const { return *dead_.begin(); }

  std::vector<std::uint32_t> live_groups(bool left_side) const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t gid = 0; gid < capacity(); ++gid)
      if (size_[gid] > 0 && group_is_left_[gid] == (left_side ? 1 : 0))
        out.push_back(gid);
    return out;
  }

  // Canonical from-scratch evaluation: the level's terms plus the trivial
  // closure above it. For the node level this equals
  // description_length(graph, {b, trivial}).
  double scratch_dl() const {
    // Track group sides for live_groups(); rebuilt here since assign() and
    // moves both funnel through scratch or incremental updates.
    group_is_left_.assign(capacity(), -1);
    for (std::uint32_t i = 0; i < g_->n_items(); ++i)
      group_is_left_[b_[i]] = g_->is_left(i) ? 1 : 0;

    long double total = constant_;
    for (std::uint32_t gid = 0; gid < capacity(); ++gid) {
      if (size_[gid] == 0) continue;
      total += group_term(degree_sum_[gid], size_[gid]);
      total -= dl_detail::ln_factorial(size_[gid]);
    }
    for (std::uint32_t gid = 0; gid < capacity(); ++gid) {
      if (size_[gid] == 0 || group_is_left_[gid] != 1) continue;
      // Canonical order: left group id, then right group id.
      std::vector<std::pair<std::uint32_t, std::uint64_t>> row(
          neighbors_[gid].begin(), neighbors_[gid].end());
      std::sort(row.begin(), row.end());
      for (auto [other, m] : row)
        total += pair_term(m, size_[gid], size_[other]);
    }
    total += dl_detail::ln_binom(g_->n_left - 1, n_left_groups_ - 1);
    total += dl_detail::ln_binom(g_->n_right - 1, n_right_groups_ - 1);
    total += closure_term(n_left_groups_, n_right_groups_);
    return static_cast<double>(total);
  }

  double move_delta(std::uint32_t item, std::uint32_t target) const {
    const std::uint32_t from = b_[item];
    if (target == from) return 0.0;
    if (size_[target] > 0 &&
        group_is_left_[target] != (g_->is_left(item) ? 1 : 0))
      return std::numeric_limits<double>::infinity();  // cross-side: never
    const std::uint64_t k = g_->degree[item];
    long double delta = 0.0L;

    // Edge weight from `item` to each other-side group.
    auto weights = item_group_weights(item);

    const std::uint64_t nf = size_[from], nt = size_[target];
    if (objective_ == LevelObjective::uniform) {
      // Sizes enter the pair terms, so every nonzero entry of both rows is
      // affected, not only the groups adjacent to `item`.
      for (auto [other, m] : neighbors_[from]) {
        const std::uint64_t dm = lookup(weights, other);
        delta += pair_term(m - dm, nf - 1, size_[other]) -
                 pair_term(m, nf, size_[other]);
      }
      for (auto [other, m] : neighbors_[target]) {
        const std::uint64_t dm = lookup(weights, other);
        delta += pair_term(m + dm, nt + 1, size_[other]) -
                 pair_term(m, nt, size_[other]);
      }
      for (auto [other, dm] : weights) {
        if (neighbors_[from].count(other) == 0)
          delta += pair_term(dm, nf - 1, size_[other]);  // old entry was 0
        if (neighbors_[target].count(other) == 0)
          delta += pair_term(dm, nt + 1, size_[other]);
      }
    } else {
      for (auto [other, dm] : weights) {
        const std::uint64_t mf = lookup_map(neighbors_[from], other);
        const std::uint64_t mt = lookup_map(neighbors_[target], other);
        delta += pair_term(mf - dm, 0, 0) - pair_term(mf, 0, 0);
        delta += pair_term(mt + dm, 0, 0) - pair_term(mt, 0, 0);
      }
    }

    delta += group_term(degree_sum_[from] - k, nf - 1) -
             group_term(degree_sum_[from], nf);
    delta += group_term(degree_sum_[target] + k, nt + 1) -
             group_term(degree_sum_[target], nt);
    delta += -dl_detail::ln_factorial(nf - 1) + dl_detail::ln_factorial(nf);
    delta += -dl_detail::ln_factorial(nt + 1) + dl_detail::ln_factorial(nt);

    const bool left = g_->is_left(item);
    std::uint32_t bl = n_left_groups_, br = n_right_groups_;
    std::uint32_t nbl = bl, nbr = br;
    if (nf == 1) (left ? nbl : nbr)--;
    if (nt == 0) (left ? nbl : nbr)++;
    if (nbl != bl || nbr != br) {
      delta += dl_detail::ln_binom(g_->n_left - 1, nbl - 1) -
               dl_detail::ln_binom(g_->n_left - 1, bl - 1);
      delta += dl_detail::ln_binom(g_->n_right - 1, nbr - 1) -
               dl_detail::ln_binom(g_->n_right - 1, br - 1);
      delta += closure_term(nbl, nbr) - closure_term(bl, br);
    }
    return static_cast<double>(delta);
  }

  void apply_move(std::uint32_t item, std::uint32_t target) {
    const std::uint32_t from = b_[item];
    if (target == from) return;
    const double delta = move_delta(item, target);
    const bool left = g_->is_left(item);
    auto weights = item_group_weights(item);
    for (auto [other, dm] : weights) {
      sub_edge(from, other, dm);
      add_edge(target, other, dm);
    }
    --size_[from];
    degree_sum_[from] -= g_->degree[item];
    if (size_[from] == 0) {
      (left ? n_left_groups_ : n_right_groups_)--;
      neighbors_[from].clear();
      group_is_left_[from] = -1;
      dead_.insert(from);
    }
    if (size_[target] == 0) {
      (left ? n_left_groups_ : n_right_groups_)++;
      group_is_left_[target] = left ? 1 : 0;
      dead_.erase(target);
    }
    ++size_[target];
    degree_sum_[target] += g_->degree[item];
    b_[item] = target;
    dl_ += delta;
  }

  double merge_delta(std::uint32_t from, std::uint32_t into) const {
    if (from == into || size_[from] == 0 || size_[into] == 0)
      return std::numeric_limits<double>::infinity();
    if (group_is_left_[from] != group_is_left_[into])
      return std::numeric_limits<double>::infinity();
    long double delta = 0.0L;
    const std::uint64_t nf = size_[from], ni = size_[into];
    std::set<std::uint32_t> others;
    for (auto& [other, m] : neighbors_[from]) others.insert(other);
    for (auto& [other, m] : neighbors_[into]) others.insert(other);
    for (std::uint32_t other : others) {
      const std::uint64_t mf = lookup_map(neighbors_[from], other);
      const std::uint64_t mi = lookup_map(neighbors_[into], other);
      delta += pair_term(mf + mi, nf + ni, size_[other]) -
               pair_term(mf, nf, size_[other]) -
               pair_term(mi, ni, size_[other]);
    }
    delta += group_term(degree_sum_[from] + degree_sum_[into], nf + ni) -
             group_term(degree_sum_[from], nf) -
             group_term(degree_sum_[into], ni);
    delta += -dl_detail::ln_factorial(nf + ni) +
             dl_detail::ln_factorial(nf) + dl_detail::ln_factorial(ni);

    const bool left = group_is_left_[from] == 1;
    const std::uint32_t bl = n_left_groups_, br = n_right_groups_;
    const std::uint32_t nbl = bl - (left ? 1 : 0), nbr = br - (left ? 0 : 1);
    delta += dl_detail::ln_binom(g_->n_left - 1, nbl - 1) -
             dl_detail::ln_binom(g_->n_left - 1, bl - 1);
    delta += dl_detail::ln_binom(g_->n_right - 1, nbr - 1) -
             dl_detail::ln_binom(g_->n_right - 1, br - 1);
    delta += closure_term(nbl, nbr) - closure_term(bl, br);
    return static_cast<double>(delta);
  }

  void apply_merge(std::uint32_t from, std::uint32_t into) {
    const double delta = merge_delta(from, into);
    const bool left = group_is_left_[from] == 1;
    for (std::uint32_t i = 0; i < g_->n_items(); ++i)
      if (b_[i] == from) b_[i] = into;
    for (auto [other, m] : neighbors_[from]) {
      neighbors_[other].erase(from);
      neighbors_[into][other] += m;
      neighbors_[other][into] += m;
    }
    neighbors_[from].clear();
    size_[into] += size_[from];
    degree_sum_[into] += degree_sum_[from];
    size_[from] = 0;
    degree_sum_[from] = 0;
    group_is_left_[from] = -1;
    dead_.insert(from);
    (left ? n_left_groups_ : n_right_groups_)--;
    dl_ += delta;
  }

 private:
  static std::uint64_t lookup(
      const std::vector<std::pair<std::uint32_t, std::uint64_t>>& weights,
      std::uint32_t key) {
    for (auto [k, v] : weights)
      if (k == key) return v;
    return 0;
  }
  static std::uint64_t lookup_map(
      const std::unordered_map<std::uint32_t, std::uint64_t>& m,
      std::uint32_t key) {
    auto it = m.find(key);
    return it == m.end() ? 0 : it->second;
  }

  std::vector<std::pair<std::uint32_t, std::uint64_t>> item_group_weights(
      std::uint32_t item) const {
    std::map<std::uint32_t, std::uint64_t> acc;
    for (auto [j, m] : g_->adj[item]) acc[b_[j]] += m;
    return {acc.begin(), acc.end()};
  }

  void add_edge(std::uint32_t a, std::uint32_t b, std::uint64_t m) {
    if (m == 0) return;
    neighbors_[a][b] += m;
    neighbors_[b][a] += m;
  }
  void sub_edge(std::uint32_t a, std::uint32_t b, std::uint64_t m) {
    if (m == 0) return;
    auto& ab = neighbors_[a][b];
    ab -= m;
    if (ab == 0) neighbors_[a].erase(b);
    auto& ba = neighbors_[b][a];
    ba -= m;
    if (ba == 0) neighbors_[b].erase(a);
  }

  double pair_term(std::uint64_t m, std::uint64_t nu, std::uint64_t nv) const {
    if (objective_ == LevelObjective::degree_corrected)
      return -dl_detail::ln_factorial(m);
    return dl_detail::ln_multiset(nu * nv, m);
  }

  double group_term(std::uint64_t degree_sum, std::uint64_t n) const {
    if (objective_ == LevelObjective::degree_corrected)
      return dl_detail::ln_factorial(degree_sum) +
             dl_detail::ln_multiset(n, degree_sum);
    return 0.0;
  }

  // Cost of the trivial level above this one: encoding this level's matrix
  // as one block plus the all-in-one partition of its groups.
  double closure_term(std::uint64_t n_left_groups,
                      std::uint64_t n_right_groups) const {
    return dl_detail::ln_multiset(n_left_groups * n_right_groups,
                                  g_->total_edges) +
           std::log(static_cast<double>(n_left_groups)) +
           std::log(static_cast<double>(n_right_groups));
  }

  const LevelGraph* g_;
  LevelObjective objective_;
  double constant_ = 0.0;
  std::vector<std::uint32_t> b_;
  std::vector<std::uint64_t> size_;
  std::vector<std::uint64_t> degree_sum_;
  std::vector<std::unordered_map<std::uint32_t, std::uint64_t>> neighbors_;
  mutable std::vector<int> group_is_left_;
  std::set<std::uint32_t> dead_;
  std::uint32_t n_left_groups_ = 0;
  std::uint32_t n_right_groups_ = 0;
  long double dl_ = 0.0L;
};

// ---------------------------------------------------------------------------
// Description length of a full hierarchy
// ---------------------------------------------------------------------------

namespace dl_detail {

struct LevelShape {
  std::uint32_t n_doc_items = 0;   // items partitioned at this level
  std::uint32_t n_word_items = 0;
};

inline void validate_level(const PartitionLevel& level,
                           std::uint32_t n_doc_items,
                           std::uint32_t n_word_items, std::size_t index) {
  const auto fail = [index](const std::string& why) {
    throw DataError("invalid partition at level " + std::to_string(index) +
                    ": " + why);
  };
  if (level.assignment.size() !=
      static_cast<std::size_t>(n_doc_items) + n_word_items)
    fail("assignment size mismatch");
  if (level.n_doc_groups == 0 || level.n_word_groups == 0)
    fail("each side needs at least one group");
  std::vector<std::uint64_t> sizes(level.n_groups(), 0);
  for (std::size_t i = 0; i < level.assignment.size(); ++i) {
    const std::uint32_t gid = level.assignment[i];
    if (gid >= level.n_groups()) fail("group id out of range");
    const bool item_is_doc = i < n_doc_items;
    const bool group_is_doc = gid < level.n_doc_groups;
    if (item_is_doc != group_is_doc)
      fail("document and word items may not share a group");
    ++sizes[gid];
  }
  for (std::uint64_t s : sizes)
    if (s == 0) fail("empty group id (ids must be dense)");
}

}  // namespace dl_detail

// Description length in nats of the nested partition on the graph, per the
// formulas at the top of this header. The topmost level must have exactly
// one document group and one word group; the stored edge matrices and DL in
// `partition` are ignored and recomputed.
inline double description_length(const BipartiteGraph& graph,
                                 const NestedPartition& partition) {
  if (partition.levels.empty())
    throw DataError("invalid partition: no levels");

  // Validate the chain of shapes.
  std::uint32_t doc_items = graph.n_docs, word_items = graph.n_words;
  for (std::size_t l = 0; l < partition.levels.size(); ++l) {
    dl_detail::validate_level(partition.levels[l], doc_items, word_items, l);
    doc_items = partition.levels[l].n_doc_groups;
    word_items = partition.levels[l].n_word_groups;
  }
  const PartitionLevel& top = partition.levels.back();
  if (top.n_doc_groups != 1 || top.n_word_groups != 1)
    throw DataError(
        "invalid partition: topmost level must have one group per side");

  using dl_detail::ln_binom;
  using dl_detail::ln_factorial;
  using dl_detail::ln_multiset;

  long double total = 0.0L;

  // Level-0 groups: sizes, degree sums, cross matrix.
  const PartitionLevel& l0 = partition.levels[0];
  const std::uint32_t b0_groups = l0.n_groups();
  std::vector<std::uint64_t> size0(b0_groups, 0), esum0(b0_groups, 0);
  for (std::uint32_t d = 0; d < graph.n_docs; ++d) {
    ++size0[l0.assignment[d]];
    esum0[l0.assignment[d]] += graph.doc_degrees[d];
  }
  for (std::uint32_t w = 0; w < graph.n_words; ++w) {
    ++size0[l0.assignment[graph.n_docs + w]];
    esum0[l0.assignment[graph.n_docs + w]] += graph.word_degrees[w];
  }
  std::vector<std::uint64_t> m0(static_cast<std::size_t>(l0.n_doc_groups) *
                                    l0.n_word_groups,
                                0);
  for (std::uint32_t d = 0; d < graph.n_docs; ++d) {
    const std::uint32_t r = l0.assignment[d];
    for (auto [w, m] : graph.doc_edges[d]) {
      const std::uint32_t s = l0.assignment[graph.n_docs + w] -
                              l0.n_doc_groups;
      m0[static_cast<std::size_t>(r) * l0.n_word_groups + s] += m;
    }
  }

  // S_edges + S_degrees.
  for (std::uint32_t gid = 0; gid < b0_groups; ++gid) {
    total += ln_factorial(esum0[gid]);
    total += ln_multiset(size0[gid], esum0[gid]);
  }
  for (std::uint64_t m : m0) total -= ln_factorial(m);
  for (std::uint32_t i = 0; i < graph.n_docs; ++i) {
    total -= ln_factorial(graph.doc_degrees[i]);
    for (auto [w, m] : graph.doc_edges[i]) total += ln_factorial(m);
  }
  for (std::uint32_t w = 0; w < graph.n_words; ++w)
    total -= ln_factorial(graph.word_degrees[w]);

  // Partition priors and matrix priors up the hierarchy.
  std::uint32_t nd = graph.n_docs, nw = graph.n_words;
  std::vector<std::uint64_t> m_prev = std::move(m0);
  std::uint32_t prev_doc_groups = l0.n_doc_groups;
  std::uint32_t prev_word_groups = l0.n_word_groups;
  for (std::size_t l = 0; l < partition.levels.size(); ++l) {
    const PartitionLevel& level = partition.levels[l];
    std::vector<std::uint64_t> sizes(level.n_groups(), 0);
    for (std::uint32_t gid : level.assignment) ++sizes[gid];
    total += dl_detail::partition_prior_head(nd, level.n_doc_groups);
    total += dl_detail::partition_prior_head(nw, level.n_word_groups);
    for (std::uint32_t gid = 0; gid < level.n_groups(); ++gid)
      total -= ln_factorial(sizes[gid]);

    if (l >= 1) {
      // Aggregate m_{l-1} to level-l groups and add the multiset prior.
      const PartitionLevel& below = partition.levels[l - 1];
      std::vector<std::uint64_t> m_here(
          static_cast<std::size_t>(level.n_doc_groups) * level.n_word_groups,
          0);
      for (std::uint32_t r = 0; r < prev_doc_groups; ++r) {
        const std::uint32_t u = level.assignment[r];
        for (std::uint32_t s = 0; s < prev_word_groups; ++s) {
          const std::uint32_t v =
              level.assignment[below.n_doc_groups + s] - level.n_doc_groups;
          m_here[static_cast<std::size_t>(u) * level.n_word_groups + v] +=
              m_prev[static_cast<std::size_t>(r) * prev_word_groups + s];
        }
      }
      for (std::uint32_t u = 0; u < level.n_doc_groups; ++u)
        for (std::uint32_t v = 0; v < level.n_word_groups; ++v)
          total += ln_multiset(
              static_cast<std::uint64_t>(sizes[u]) *
                  sizes[level.n_doc_groups + v],
              m_here[static_cast<std::size_t>(u) * level.n_word_groups + v]);
      m_prev = std::move(m_here);
      prev_doc_groups = level.n_doc_groups;
      prev_word_groups = level.n_word_groups;
    }
    nd = level.n_doc_groups;
    nw = level.n_word_groups;
  }
  return static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

namespace fit_detail {

// One greedy sweep over all items in index order. Each item moves to the
// best group on its side (a fresh group included); ties in the DL change are
// broken toward the lower group id, with staying put treated like any other
// candidate. Returns the number of items moved.
inline std::size_t greedy_sweep(BlockState& state, const LevelGraph& g) {
  std::size_t moved = 0;
  for (std::uint32_t i = 0; i < g.n_items(); ++i) {
    const std::uint32_t current = state.group_of(i);
    std::uint32_t best = current;
    double best_delta = 0.0;
    auto consider = [&](std::uint32_t candidate) {
      const double d = state.move_delta(i, candidate);
      if (d < best_delta || (d == best_delta && candidate < best)) {
        best_delta = d;
        best = candidate;
      }
    };
    for (std::uint32_t candidate : state.live_groups(g.is_left(i)))
      if (candidate != current) consider(candidate);
    if (state.group_size(current) > 1) consider(state.spare_group());
    if (best != current) {
      state.apply_move(i, best);
      ++moved;
    }
  }
  return moved;
}

// Metropolis sweep at inverse temperature beta; uphill moves are accepted
// with probability exp(-beta * delta).
inline void anneal_sweep(BlockState& state, const LevelGraph& g, double beta,
                         std::mt19937_64& rng) {
  for (std::uint32_t i = 0; i < g.n_items(); ++i) {
    std::vector<std::uint32_t> candidates = state.live_groups(g.is_left(i));
    if (state.group_size(state.group_of(i)) > 1)
      candidates.push_back(state.spare_group());
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const std::uint32_t target = candidates[pick(rng)];
    if (target == state.group_of(i)) continue;
    const double delta = state.move_delta(i, target);
    if (delta <= 0.0) {
      state.apply_move(i, target);
    } else {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      if (unif(rng) < std::exp(-beta * delta)) state.apply_move(i, target);
    }
  }
}

// Strictly-improving group merges. While many groups are live, greedy
// per-group sweeps pick each group's best co-neighbour partner (groups
// sharing an other-side neighbour) and merge immediately; once a side is
// small every same-side pair is scanned for the single best merge until
// none improves. Returns whether anything merged.
inline bool merge_phase(BlockState& state) {
  constexpr std::size_t kExactScanLimit = 64;
  bool any = false;

  auto two_step_partners = [&state](std::uint32_t r) {
    std::set<std::uint32_t> partners;
    for (auto [mid, m1] : state.group_neighbors(r))
      for (auto [s, m2] : state.group_neighbors(mid))
        if (s != r) partners.insert(s);
    return partners;
  };

  // Fast agglomerative sweeps for large group counts.
  for (;;) {
    bool merged_this_pass = false;
    for (bool left : {true, false}) {
      if (state.live_groups(left).size() <= kExactScanLimit) continue;
      for (std::uint32_t r : state.live_groups(left)) {
        if (state.group_size(r) == 0) continue;  // merged earlier this pass
        double best_delta = -1e-12;
        std::uint32_t best_from = 0, best_into = 0;
        bool found = false;
        for (std::uint32_t s : two_step_partners(r)) {
          const std::uint32_t from = std::max(r, s), into = std::min(r, s);
          const double d = state.merge_delta(from, into);
          if (d < best_delta ||
              (d == best_delta && found &&
               std::tie(into, from) < std::tie(best_into, best_from))) {
            best_delta = d;
            best_from = from;
            best_into = into;
            found = true;
          }
        }
        if (found) {
          state.apply_merge(best_from, best_into);
          merged_this_pass = any = true;
        }
      }
    }
    if (!merged_this_pass) break;
  }

  // Exact phase: apply the globally best merge until nothing improves.
  for (;;) {
    double best_delta = -1e-12;
    std::uint32_t best_from = 0, best_into = 0;
    bool found = false;
    for (bool left : {true, false}) {
      const std::vector<std::uint32_t> groups = state.live_groups(left);
      if (groups.size() < 2) continue;
      auto consider = [&](std::uint32_t a, std::uint32_t b) {
        if (a == b) return;
        const std::uint32_t from = std::max(a, b), into = std::min(a, b);
        const double d = state.merge_delta(from, into);
        if (d < best_delta ||
            (d == best_delta && found &&
             std::tie(into, from) < std::tie(best_into, best_from))) {
          best_delta = d;
          best_from = from;
          best_into = into;
          found = true;
        }
      };
      if (groups.size() <= kExactScanLimit) {
        for (std::size_t x = 0; x < groups.size(); ++x)
          for (std::size_t y = x + 1; y < groups.size(); ++y)
            consider(groups[x], groups[y]);
      } else {
        for (std::uint32_t r : groups)
          for (std::uint32_t s : two_step_partners(r)) consider(r, s);
      }
    }
    if (!found) return any;
    state.apply_merge(best_from, best_into);
    any = true;
  }
}

struct RestartResult {
  double dl = std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> assignment;
};

inline RestartResult run_restart(const LevelGraph& g, LevelObjective obj,
                                 const FitConfig& cfg, std::uint32_t restart,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> init(g.n_items());
  if (restart == 0) {
    for (std::uint32_t i = 0; i < g.n_items(); ++i) init[i] = i;  // singletons
  } else if (restart == 1) {
    for (std::uint32_t i = 0; i < g.n_items(); ++i)
      init[i] = g.is_left(i) ? 0 : 1;  // everything merged
  } else {
    std::uniform_int_distribution<std::uint32_t> nl(1, g.n_left);
    std::uniform_int_distribution<std::uint32_t> nr(1, g.n_right);
    const std::uint32_t bl = nl(rng), br = nr(rng);
    std::uniform_int_distribution<std::uint32_t> pl(0, bl - 1);
    std::uniform_int_distribution<std::uint32_t> pr(0, br - 1);
    for (std::uint32_t i = 0; i < g.n_items(); ++i)
      init[i] = g.is_left(i) ? pl(rng) : bl + pr(rng);
  }

  BlockState state(g, obj);
  state.assign(init);
  if (restart == 0) merge_phase(state);  // agglomerative initialization

  const std::uint32_t anneal_sweeps = std::max<std::uint32_t>(1, cfg.sweeps / 10);
  for (double beta : cfg.beta_schedule)
    for (std::uint32_t s = 0; s < anneal_sweeps; ++s)
      anneal_sweep(state, g, beta, rng);

  // Alternate node sweeps and merges until neither changes anything.
  for (;;) {
    bool changed = false;
    for (std::uint32_t sweep = 0; sweep < cfg.sweeps; ++sweep) {
      const std::size_t moved = greedy_sweep(state, g);
      if (moved > 0) changed = true;
      if (moved * 1000 < g.n_items()) break;  // <0.1% of nodes moved
    }
    if (merge_phase(state)) changed = true;
    if (!changed) break;
  }

  return {state.dl(), state.assignment()};
}

// Relabel groups densely, document side first, ordered by smallest member.
inline PartitionLevel canonicalize(const LevelGraph& g,
                                   const std::vector<std::uint32_t>& b) {
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  PartitionLevel level;
  level.assignment.resize(b.size());
  for (std::uint32_t i = 0; i < g.n_items(); ++i) {
    if (g.is_left(i) && remap.emplace(b[i], remap.size()).second)
      ++level.n_doc_groups;
  }
  for (std::uint32_t i = 0; i < g.n_items(); ++i) {
    if (!g.is_left(i) && remap.emplace(b[i], remap.size()).second)
      ++level.n_word_groups;
  }
  for (std::size_t i = 0; i < b.size(); ++i)
    level.assignment[i] = remap.at(b[i]);
  return level;
}

inline void fill_edge_matrix(const LevelGraph& g, PartitionLevel& level) {
  level.edge_matrix.assign(
      static_cast<std::size_t>(level.n_doc_groups) * level.n_word_groups, 0);
  for (std::uint32_t i = 0; i < g.n_left; ++i) {
    const std::uint32_t r = level.assignment[i];
    for (auto [j, m] : g.adj[i]) {
      const std::uint32_t s = level.assignment[j] - level.n_doc_groups;
      level.edge_matrix[static_cast<std::size_t>(r) * level.n_word_groups +
                        s] += m;
    }
  }
}

inline LevelGraph contract(const LevelGraph& g, const PartitionLevel& level) {
  LevelGraph out;
  out.n_left = level.n_doc_groups;
  out.n_right = level.n_word_groups;
  out.adj.resize(level.n_groups());
  out.degree.assign(level.n_groups(), 0);
  out.total_edges = g.total_edges;
  for (std::uint32_t r = 0; r < level.n_doc_groups; ++r) {
    for (std::uint32_t s = 0; s < level.n_word_groups; ++s) {
      const std::uint64_t m = level.edges(r, s);
      if (m == 0) continue;
      const std::uint32_t word_item = level.n_doc_groups + s;
      out.adj[r].emplace_back(word_item, m);
      out.adj[word_item].emplace_back(r, m);
      out.degree[r] += m;
      out.degree[word_item] += m;
    }
  }
  return out;
}

inline PartitionLevel fit_level(const LevelGraph& g, LevelObjective obj,
                                const FitConfig& cfg,
                                std::uint64_t level_seed) {
  const std::uint32_t restarts = std::max<std::uint32_t>(1, cfg.n_restarts);
  std::vector<RestartResult> results(restarts);
  auto worker = [&](std::uint32_t r) {
    results[r] = run_restart(g, obj, cfg, r, split_seed(level_seed, r));
  };
  if (cfg.parallel_restarts && restarts > 1) {
    std::atomic<std::uint32_t> next{0};
    const unsigned n_threads =
        std::min<unsigned>(std::thread::hardware_concurrency() > 0
                               ? std::thread::hardware_concurrency()
                               : 2,
                           restarts);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (;;) {
          const std::uint32_t r = next.fetch_add(1);
          if (r >= restarts) return;
          worker(r);
        }
      });
    for (std::thread& t : pool) t.join();
  } else {
    for (std::uint32_t r = 0; r < restarts; ++r) worker(r);
  }
  std::uint32_t best = 0;
  for (std::uint32_t r = 1; r < restarts; ++r)
    if (results[r].dl < results[best].dl) best = r;
  PartitionLevel level = canonicalize(g, results[best].assignment);
  fill_edge_matrix(g, level);
  return level;
}

}  // namespace fit_detail

// Fits the hierarchy: each level is fitted by restarts of (optional
// annealing +) greedy single-item sweeps alternated with group merges, then
// the group multigraph is contracted and fitted again until one group per
// side remains. Deterministic for a fixed seed and config; restarts run in
// parallel with seeds derived from the master seed.
inline NestedPartition fit_nested_partition(const BipartiteGraph& graph,
                                            const FitConfig& config = {}) {
  if (graph.total_edges == 0) throw DataError("cannot fit an empty graph");
  // Warm the ln n! cache before spawning restart threads.
  dl_detail::ln_factorial(0);

  NestedPartition partition;
  LevelGraph lg = level_graph_from(graph);
  for (std::size_t level_index = 0;; ++level_index) {
    const LevelObjective obj = level_index == 0
                                   ? LevelObjective::degree_corrected
                                   : LevelObjective::uniform;
    PartitionLevel level = fit_detail::fit_level(
        lg, obj, config, split_seed(config.seed, 0xD0 + level_index));
    const bool trivial =
        level.n_doc_groups == 1 && level.n_word_groups == 1;
    const bool progress = level.n_groups() < lg.n_items();
    partition.levels.push_back(level);
    if (trivial) break;
    LevelGraph contracted = fit_detail::contract(lg, level);
    if (!progress) {
      // No coarsening found; close the hierarchy with the trivial level.
      PartitionLevel closing;
      closing.n_doc_groups = 1;
      closing.n_word_groups = 1;
      closing.assignment.resize(level.n_groups());
      for (std::uint32_t gid = 0; gid < level.n_groups(); ++gid)
        closing.assignment[gid] = gid < level.n_doc_groups ? 0 : 1;
      fit_detail::fill_edge_matrix(contracted, closing);
      partition.levels.push_back(closing);
      break;
    }
    lg = std::move(contracted);
  }
  partition.description_length = description_length(graph, partition);
  return partition;
}

// ---------------------------------------------------------------------------
// Topic queries
// ---------------------------------------------------------------------------

// P(word | topic): edge endpoints at each word of the topic over the topic's
// total endpoints. Topics are word groups, addressed by ordinal at a level.
inline std::vector<double> topic_word_distribution(
    const BipartiteGraph& graph, const NestedPartition& partition,
    std::size_t level, std::uint32_t topic) {
  if (level >= partition.n_levels())
    throw DataError("unknown level " + std::to_string(level));
  if (topic >= partition.levels[level].n_word_groups)
    throw DataError("unknown topic " + std::to_string(topic) + " at level " +
                    std::to_string(level));
  const std::vector<std::uint32_t> topics =
      word_topics_at_level(partition, graph.n_docs, graph.n_words, level);
  std::uint64_t topic_mass = 0;
  for (std::uint32_t w = 0; w < graph.n_words; ++w)
    if (topics[w] == topic) topic_mass += graph.word_degrees[w];
  std::vector<double> dist(graph.n_words, 0.0);
  if (topic_mass == 0) return dist;
  for (std::uint32_t w = 0; w < graph.n_words; ++w)
    if (topics[w] == topic)
      dist[w] = static_cast<double>(graph.word_degrees[w]) /
                static_cast<double>(topic_mass);
  return dist;
}

// Usage density per topic: the topic's token mass over all tokens. Sums to 1
// across the topics of any level.
inline std::vector<double> topic_densities(const BipartiteGraph& graph,
                                           const NestedPartition& partition,
                                           std::size_t level) {
  if (level >= partition.n_levels())
    throw DataError("unknown level " + std::to_string(level));
  const std::vector<std::uint32_t> topics =
      word_topics_at_level(partition, graph.n_docs, graph.n_words, level);
  std::vector<double> densities(partition.levels[level].n_word_groups, 0.0);
  for (std::uint32_t w = 0; w < graph.n_words; ++w)
    densities[topics[w]] += static_cast<double>(graph.word_degrees[w]);
  for (double& d : densities) d /= static_cast<double>(graph.total_edges);
  return densities;
}

// One topic with its identity, word distribution and usage density.
struct Topic {
  std::size_t level = 0;
  std::uint32_t id = 0;  // word-group ordinal at the level
  std::vector<double> word_distribution;
  double density = 0.0;
};

inline std::vector<Topic> topics_at_level(const BipartiteGraph& graph,
                                          const NestedPartition& partition,
                                          std::size_t level) {
  const std::vector<double> densities = topic_densities(graph, partition, level);
  std::vector<Topic> topics;
  topics.reserve(densities.size());
  for (std::uint32_t t = 0; t < densities.size(); ++t)
    topics.push_back({level, t, topic_word_distribution(graph, partition,
                                                        level, t),
                      densities[t]});
  return topics;
}

// Fraction of the document's tokens in each topic at the level; sums to 1.
inline std::vector<double> document_topic_mixture(
    const BipartiteGraph& graph, const NestedPartition& partition,
    std::uint32_t doc, std::size_t level) {
  if (doc >= graph.n_docs)
    throw DataError("unknown document index " + std::to_string(doc));
  if (level >= partition.n_levels())
    throw DataError("unknown level " + std::to_string(level));
  if (graph.doc_degrees[doc] == 0)
    throw DataError("document " + std::to_string(doc) + " has no tokens");
  const std::vector<std::uint32_t> topics =
      word_topics_at_level(partition, graph.n_docs, graph.n_words, level);
  std::vector<double> mix(partition.levels[level].n_word_groups, 0.0);
  for (auto [w, m] : graph.doc_edges[doc])
    mix[topics[w]] += static_cast<double>(m);
  for (double& v : mix) v /= static_cast<double>(graph.doc_degrees[doc]);
  return mix;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json model_to_json(const BipartiteGraph& graph,
                                            const NestedPartition& partition,
                                            const FitConfig& config) {
  nlohmann::ordered_json j;
  j["format"] = "dapmav-model-v1";
  j["seed"] = config.seed;
  j["config"] = {{"n_restarts", config.n_restarts},
                 {"sweeps", config.sweeps},
                 {"beta_schedule", config.beta_schedule}};
  j["description_length"] = partition.description_length;
  j["n_docs"] = graph.n_docs;
  j["n_words"] = graph.n_words;
  j["total_edges"] = graph.total_edges;
  j["doc_ids"] = graph.doc_ids;
  j["words"] = graph.words;
  j["doc_degrees"] = graph.doc_degrees;
  j["word_degrees"] = graph.word_degrees;
  j["levels"] = nlohmann::ordered_json::array();
  for (const PartitionLevel& level : partition.levels) {
    nlohmann::ordered_json lj;
    lj["n_doc_groups"] = level.n_doc_groups;
    lj["n_word_groups"] = level.n_word_groups;
    lj["assignment"] = level.assignment;
    lj["edge_matrix"] = nlohmann::ordered_json::array();
    for (std::uint32_t r = 0; r < level.n_doc_groups; ++r) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (std::uint32_t s = 0; s < level.n_word_groups; ++s)
        row.push_back(level.edges(r, s));
      lj["edge_matrix"].push_back(std::move(row));
    }
    j["levels"].push_back(std::move(lj));
  }
  return j;
}

// Everything the downstream stages need without re-reading the corpus.
struct ModelArtifact {
  NestedPartition partition;
  FitConfig config;
  std::uint32_t n_docs = 0;
  std::uint32_t n_words = 0;
  std::uint64_t total_edges = 0;
  std::vector<std::string> doc_ids;
  std::vector<std::string> words;
  std::vector<std::uint64_t> doc_degrees;
  std::vector<std::uint64_t> word_degrees;
};

inline ModelArtifact model_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "dapmav-model-v1")
    throw DataError("not a dapmav model artifact");
  ModelArtifact artifact;
  artifact.config.seed = j.at("seed").get<std::uint64_t>();
  artifact.config.n_restarts = j["config"].value("n_restarts", 10u);
  artifact.config.sweeps = j["config"].value("sweeps", 100u);
  artifact.config.beta_schedule =
      j["config"].value("beta_schedule", std::vector<double>{});
  artifact.partition.description_length =
      j.at("description_length").get<double>();
  artifact.n_docs = j.at("n_docs").get<std::uint32_t>();
  artifact.n_words = j.at("n_words").get<std::uint32_t>();
  artifact.total_edges = j.at("total_edges").get<std::uint64_t>();
  artifact.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
  artifact.words = j.at("words").get<std::vector<std::string>>();
  artifact.doc_degrees = j.at("doc_degrees").get<std::vector<std::uint64_t>>();
  artifact.word_degrees =
      j.at("word_degrees").get<std::vector<std::uint64_t>>();
  for (const auto& lj : j.at("levels")) {
    PartitionLevel level;
    level.n_doc_groups = lj.at("n_doc_groups").get<std::uint32_t>();
    level.n_word_groups = lj.at("n_word_groups").get<std::uint32_t>();
    level.assignment = lj.at("assignment").get<std::vector<std::uint32_t>>();
    for (const auto& row : lj.at("edge_matrix"))
      for (const auto& v : row)
        level.edge_matrix.push_back(v.get<std::uint64_t>());
    artifact.partition.levels.push_back(std::move(level));
  }
  return artifact;
}

// Nested word-group tree with word leaves, for radial-tree style viewers.
// Leaf values are empirical word counts.
inline nlohmann::ordered_json hierarchy_to_json(
    const BipartiteGraph& graph, const NestedPartition& partition) {
  const std::size_t n_levels = partition.n_levels();
  // children_of[level][ordinal] = ordinals one level down (or word ids at 0).
  auto node = [&](std::size_t level, std::uint32_t ordinal,
                  auto&& self) -> nlohmann::ordered_json {
    nlohmann::ordered_json j;
    j["name"] = "L" + std::to_string(level) + "/T" + std::to_string(ordinal);
    j["children"] = nlohmann::ordered_json::array();
    if (level == 0) {
      const std::uint32_t gid = partition.levels[0].n_doc_groups + ordinal;
      for (std::uint32_t w = 0; w < graph.n_words; ++w) {
        if (partition.levels[0].assignment[graph.n_docs + w] != gid) continue;
        nlohmann::ordered_json leaf;
        leaf["name"] = graph.words[w];
        leaf["value"] = graph.word_degrees[w];
        j["children"].push_back(std::move(leaf));
      }
    } else {
      const PartitionLevel& level_here = partition.levels[level];
      const PartitionLevel& below = partition.levels[level - 1];
      const std::uint32_t gid = level_here.n_doc_groups + ordinal;
      for (std::uint32_t s = 0; s < below.n_word_groups; ++s)
        if (level_here.assignment[below.n_doc_groups + s] == gid)
          j["children"].push_back(self(level - 1, s, self));
    }
    return j;
  };
  nlohmann::ordered_json root;
  root["name"] = "root";
  root["children"] = nlohmann::ordered_json::array();
  for (std::uint32_t t = 0; t < partition.levels[n_levels - 1].n_word_groups;
       ++t)
    root["children"].push_back(node(n_levels - 1, t, node));
  return root;
}

}  // namespace dapmav

#endif  // DAPMAV_TOPIC_MODEL_HPP_
