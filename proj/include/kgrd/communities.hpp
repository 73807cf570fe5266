// Copyright 2026 The kgrd Authors. All Rights Reserved.
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

#ifndef KGRD_COMMUNITIES_HPP
#define KGRD_COMMUNITIES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgrd/embed.hpp"
#include "kgrd/error.hpp"
#include "kgrd/kg.hpp"
#include "kgrd/matrix.hpp"
#include "kgrd/sim.hpp"

namespace kgrd {

enum class PartitionAlgorithm { KMeansStyle, MetisStyle, SemEPStyle };

inline constexpr std::array<PartitionAlgorithm, 3> kAllPartitioners = {
    PartitionAlgorithm::SemEPStyle, PartitionAlgorithm::MetisStyle, PartitionAlgorithm::KMeansStyle};

inline std::string_view to_string(PartitionAlgorithm a) {
  switch (a) {
    case PartitionAlgorithm::KMeansStyle: return "kmeans";
    case PartitionAlgorithm::MetisStyle: return "metis";
    case PartitionAlgorithm::SemEPStyle: return "semep";
  }
  return "?";
}

inline PartitionAlgorithm parse_partition_algorithm(std::string_view s) {
  for (PartitionAlgorithm a : kAllPartitioners) {
    if (s == to_string(a)) return a;
  }
  throw ConfigError("unknown partitioner '" + std::string(s) + "' (expected kmeans, metis or semep)");
}

/// Disjoint non-empty communities of entity ids covering one standard set.
/// Members are sorted and communities are ordered by their smallest member.
struct Partition {
  std::vector<std::vector<std::size_t>> communities;
  PartitionAlgorithm algorithm = PartitionAlgorithm::SemEPStyle;
  std::map<std::string, std::string> parameters;
  std::vector<std::string> warnings;

  std::size_t size() const { return communities.size(); }
};

/// Builds a canonical partition from per-position labels over `ids`.
inline Partition partition_from_labels(std::span<const std::size_t> labels, std::span<const std::size_t> ids,
                                       PartitionAlgorithm algorithm) {
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(ids[i]);
  Partition p;
  p.algorithm = algorithm;
  for (auto& [label, members] : groups) {
    std::sort(members.begin(), members.end());
    p.communities.push_back(std::move(members));
  }
  std::sort(p.communities.begin(), p.communities.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return p;
}

/// Community index per position of `ids`.
inline std::vector<std::size_t> labels_of(const Partition& p, std::span<const std::size_t> ids) {
  std::map<std::size_t, std::size_t> community_of;
  for (std::size_t c = 0; c < p.communities.size(); ++c) {
    for (std::size_t id : p.communities[c]) community_of[id] = c;
  }
  std::vector<std::size_t> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = community_of.find(ids[i]);
    if (it == community_of.end()) throw ConfigError("partition does not cover entity " + std::to_string(ids[i]));
    out[i] = it->second;
  }
  return out;
}

/// True when communities are non-empty, pairwise disjoint, and cover exactly `ids`.
inline bool is_valid_partition(const Partition& p, std::span<const std::size_t> ids) {
  std::vector<std::size_t> seen;
  for (const auto& c : p.communities) {
    if (c.empty()) return false;
    seen.insert(seen.end(), c.begin(), c.end());
  }
  std::vector<std::size_t> want(ids.begin(), ids.end());
  std::sort(seen.begin(), seen.end());
  std::sort(want.begin(), want.end());
  return seen == want;
}

/// Adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw ConfigError("adjusted_rand_index: size mismatch");
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double sum_ij = 0, sum_a = 0, sum_b = 0;
  for (const auto& [k, v] : joint) sum_ij += c2(v);
  for (const auto& [k, v] : ra) sum_a += c2(v);
  for (const auto& [k, v] : rb) sum_b += c2(v);
  const double total = c2(static_cast<double>(a.size()));
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_ij - expected) / (max_index - expected);
}

/// Number of connected components of the graph whose edges are the positive
/// off-diagonal entries of `m`; isolated vertices count as components.
inline std::size_t default_k(const SimilarityMatrix& m) {
  const std::size_t n = m.size();
  UnionFind uf(n);
  std::size_t comps = n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (m.weight(i, j) > 0.0 && uf.unite(i, j)) --comps;
    }
  }
  return comps;
}

// ---------------------------------------------------------------------------
// k-means
// ---------------------------------------------------------------------------

struct KMeansResult {
  std::vector<std::size_t> labels;
  Matrix centroids;
  std::vector<double> objective;  // sum of squared distances after each iteration
  std::size_t iterations = 0;
};

namespace detail {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Stops when assignments repeat or
/// after `max_iter` iterations. An empty cluster takes the point of the
/// largest cluster that lies farthest from its centroid.
inline KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter = 300) {
  const std::size_t n = points.rows(), d = points.cols();
  if (k == 0 || k > n) throw ConfigError("k must lie in [1, n] (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  std::mt19937_64 rng(seed);
  KMeansResult res;
  res.centroids = Matrix(k, d);

  // k-means++ seeding.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  std::copy_n(points.row(first).begin(), d, res.centroids.row(0).begin());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], detail::sq_dist(points.row(i), res.centroids.row(c - 1)));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (r < d2[i]) {
          pick = i;
          break;
        }
        r -= d2[i];
      }
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    std::copy_n(points.row(pick).begin(), d, res.centroids.row(c).begin());
  }

  std::vector<std::size_t> labels(n, k);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    std::vector<std::size_t> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = detail::sq_dist(points.row(i), res.centroids.row(c));
        if (dd < best) {
          best = dd;
          next[i] = c;
        }
      }
    }
    // Empty-cluster repair.
    std::vector<std::size_t> count(k, 0);
    for (std::size_t l : next) ++count[l];
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] != 0) continue;
      const std::size_t big = static_cast<std::size_t>(std::max_element(count.begin(), count.end()) - count.begin());
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (next[i] != big) continue;
        const double dd = detail::sq_dist(points.row(i), res.centroids.row(big));
        if (dd > far_d) {
          far_d = dd;
          far = i;
        }
      }
      next[far] = c;
      --count[big];
      count[c] = 1;
    }
    // Centroid update.
    Matrix sums(k, d);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sums.row(next[i]);
      auto p = points.row(i);
      for (std::size_t j = 0; j < d; ++j) s[j] += p[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < d; ++j) res.centroids(c, j) = sums(c, j) / static_cast<double>(count[c]);
    }
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj += detail::sq_dist(points.row(i), res.centroids.row(next[i]));
    res.objective.push_back(obj);
    res.iterations = iter + 1;
    const bool stable = next == labels;
    labels = std::move(next);
    if (stable) break;
  }
  res.labels = std::move(labels);
  return res;
}

/// Centroid clustering of the standards' entity vectors. With
/// `unit_normalize` the vectors are scaled to unit length first, so the
/// clustering agrees with cosine similarity.
inline Partition partition_kmeans(const EmbeddingModel& model, std::span<const std::size_t> standards, std::size_t k,
                                  std::uint64_t seed, bool unit_normalize = true) {
  Matrix pts(standards.size(), model.dim());
  for (std::size_t i = 0; i < standards.size(); ++i) {
    auto src = model.entities.row(standards[i]);
    std::copy(src.begin(), src.end(), pts.row(i).begin());
    if (unit_normalize) normalize(pts.row(i));
  }
  const KMeansResult km = kmeans(pts, k, seed);
  Partition p = partition_from_labels(km.labels, standards, PartitionAlgorithm::KMeansStyle);
  p.parameters["k"] = std::to_string(k);
  p.parameters["seed"] = std::to_string(seed);
  p.parameters["unit_normalize"] = unit_normalize ? "true" : "false";
  p.parameters["iterations"] = std::to_string(km.iterations);
  return p;
}

// ---------------------------------------------------------------------------
// Multilevel partitioning
// ---------------------------------------------------------------------------

/// Undirected weighted graph with vertex weights; adjacency lists are sorted by
/// neighbor and hold each edge in both directions.
struct WeightedGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;
  std::vector<double> vertex_weight;

  std::size_t size() const { return adj.size(); }
  double total_vertex_weight() const { return std::accumulate(vertex_weight.begin(), vertex_weight.end(), 0.0); }

  static WeightedGraph from_similarity(const SimilarityMatrix& m) {
    WeightedGraph g;
    const std::size_t n = m.size();
    g.adj.resize(n);
    g.vertex_weight.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double w = m.weight(i, j);
        if (w > 0.0) g.adj[i].emplace_back(j, w);
      }
    }
    return g;
  }
};

inline double edge_cut(const WeightedGraph& g, std::span<const std::size_t> part) {
  double cut = 0.0;
  for (std::size_t v = 0; v < g.size(); ++v) {
    for (auto [u, w] : g.adj[v]) {
      if (u > v && part[u] != part[v]) cut += w;
    }
  }
  return cut;
}

namespace detail {

struct Level {
  WeightedGraph graph;
  std::vector<std::size_t> coarse_of;  // fine vertex -> vertex of the next coarser graph
};

/// One round of heavy-edge matching. Returns the coarser graph and the map
/// from `g`'s vertices to it.
inline Level coarsen_once(const WeightedGraph& g, std::mt19937_64& rng) {
  const std::size_t n = g.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> match(n, kNone);
  for (std::size_t v : order) {
    if (match[v] != kNone) continue;
    std::size_t best = v;
    double best_w = 0.0;
    for (auto [u, w] : g.adj[v]) {
      if (u != v && match[u] == kNone && w > best_w) {
        best_w = w;
        best = u;
      }
    }
    match[v] = best;
    match[best] = v;
  }
  Level lvl;
  lvl.coarse_of.assign(n, kNone);
  std::size_t next = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (lvl.coarse_of[v] != kNone) continue;
    lvl.coarse_of[v] = next;
    lvl.coarse_of[match[v]] = next;
    ++next;
  }
  WeightedGraph& c = lvl.graph;
  c.adj.resize(next);
  c.vertex_weight.assign(next, 0.0);
  std::vector<std::map<std::size_t, double>> merged(next);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t cv = lvl.coarse_of[v];
    c.vertex_weight[cv] += g.vertex_weight[v];
    for (auto [u, w] : g.adj[v]) {
      const std::size_t cu = lvl.coarse_of[u];
      if (cu != cv) merged[cv][cu] += w;
    }
  }
  for (std::size_t cv = 0; cv < next; ++cv) c.adj[cv].assign(merged[cv].begin(), merged[cv].end());
  return lvl;
}

inline WeightedGraph induced_subgraph(const WeightedGraph& g, std::span<const std::size_t> vertices) {
  std::map<std::size_t, std::size_t> local;
  for (std::size_t i = 0; i < vertices.size(); ++i) local[vertices[i]] = i;
  WeightedGraph s;
  s.adj.resize(vertices.size());
  s.vertex_weight.resize(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    s.vertex_weight[i] = g.vertex_weight[vertices[i]];
    for (auto [u, w] : g.adj[vertices[i]]) {
      auto it = local.find(u);
      if (it != local.end()) s.adj[i].emplace_back(it->second, w);
    }
  }
  return s;
}

/// Greedy graph-growing bisection followed by boundary refinement. Side 0
/// receives roughly `target0` vertex weight. Several seeds are tried and the
/// lowest cut kept.
inline std::vector<std::size_t> bisect(const WeightedGraph& g, double target0, std::mt19937_64& rng) {
  const std::size_t n = g.size();
  std::vector<std::size_t> best(n, 1);
  if (n == 0) return best;
  double best_cut = std::numeric_limits<double>::infinity();
  double best_imbalance = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> seeds{0};
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int s = 0; s < 7 && seeds.size() < n; ++s) seeds.push_back(pick(rng));

  for (std::size_t seed : seeds) {
    std::vector<std::size_t> side(n, 1);
    std::vector<double> conn_in(n, 0.0);  // weight to side 0
    double weight0 = 0.0;
    std::size_t next_seed = seed;
    while (weight0 < target0) {
      // Vertex on side 1 with the largest cut reduction if moved.
      std::size_t v = n;
      double best_gain = -std::numeric_limits<double>::infinity();
      for (std::size_t u = 0; u < n; ++u) {
        if (side[u] == 0 || conn_in[u] <= 0.0) continue;
        double deg = 0.0;
        for (auto [x, w] : g.adj[u]) deg += w;
        const double gain = 2.0 * conn_in[u] - deg;
        if (gain > best_gain) {
          best_gain = gain;
          v = u;
        }
      }
      if (v == n) {
        // No frontier: start a new region at the next free vertex.
        while (side[next_seed] == 0) next_seed = (next_seed + 1) % n;
        v = next_seed;
      }
      if (weight0 > 0.0 && weight0 + g.vertex_weight[v] - target0 > target0 - weight0) break;
      side[v] = 0;
      weight0 += g.vertex_weight[v];
      for (auto [u, w] : g.adj[v]) conn_in[u] += w;
    }
    const double cut = edge_cut(g, side);
    const double imbalance = std::abs(weight0 - target0);
    if (cut < best_cut - 1e-12 || (std::abs(cut - best_cut) <= 1e-12 && imbalance < best_imbalance)) {
      best_cut = cut;
      best_imbalance = imbalance;
      best = side;
    }
  }
  return best;
}

inline void recursive_bisection(const WeightedGraph& g, std::span<const std::size_t> vertices, std::size_t k,
                                std::size_t first_label, std::vector<std::size_t>& labels, std::mt19937_64& rng) {
  if (k == 1 || vertices.size() <= 1) {
    for (std::size_t v : vertices) labels[v] = first_label;
    return;
  }
  const std::size_t k0 = k / 2, k1 = k - k0;
  const WeightedGraph sub = induced_subgraph(g, vertices);
  const double target0 = sub.total_vertex_weight() * static_cast<double>(k0) / static_cast<double>(k);
  const auto side = bisect(sub, target0, rng);
  std::vector<std::size_t> left, right;
  for (std::size_t i = 0; i < vertices.size(); ++i) (side[i] == 0 ? left : right).push_back(vertices[i]);
  recursive_bisection(g, left, k0, first_label, labels, rng);
  recursive_bisection(g, right, k1, first_label + k0, labels, rng);
}

}  // namespace detail

/// Greedy k-way boundary refinement: moves a vertex to the neighboring part
/// with the largest strictly positive cut reduction, provided the target part
/// stays within `max_part_weight` and the source part stays non-empty.
/// The cut never increases. Returns the number of moves.
inline std::size_t refine_kway(const WeightedGraph& g, std::vector<std::size_t>& labels, std::size_t k,
                               double max_part_weight, std::size_t max_passes = 10) {
  std::vector<double> pw(k, 0.0);
  std::vector<std::size_t> pc(k, 0);
  for (std::size_t v = 0; v < g.size(); ++v) {
    pw[labels[v]] += g.vertex_weight[v];
    ++pc[labels[v]];
  }
  std::size_t moves = 0;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (std::size_t v = 0; v < g.size(); ++v) {
      const std::size_t a = labels[v];
      if (pc[a] <= 1) continue;
      std::map<std::size_t, double> conn;
      for (auto [u, w] : g.adj[v]) conn[labels[u]] += w;
      const double internal = conn.count(a) ? conn[a] : 0.0;
      std::size_t best = a;
      double best_gain = 1e-12;
      for (auto [b, w] : conn) {
        if (b == a || pw[b] + g.vertex_weight[v] > max_part_weight) continue;
        if (w - internal > best_gain) {
          best_gain = w - internal;
          best = b;
        }
      }
      if (best == a) continue;
      labels[v] = best;
      pw[a] -= g.vertex_weight[v];
      pw[best] += g.vertex_weight[v];
      --pc[a];
      ++pc[best];
      ++moves;
      moved = true;
    }
    if (!moved) break;
  }
  return moves;
}

namespace detail {

/// Moves vertices out of overweight or into empty parts, choosing the move
/// that loses the least cut each time. May increase the cut.
inline void rebalance(const WeightedGraph& g, std::vector<std::size_t>& labels, std::size_t k, double max_part_weight) {
  const std::size_t n = g.size();
  for (std::size_t guard = 0; guard < 4 * n + 4 * k; ++guard) {
    std::vector<double> pw(k, 0.0);
    std::vector<std::size_t> pc(k, 0);
    for (std::size_t v = 0; v < n; ++v) {
      pw[labels[v]] += g.vertex_weight[v];
      ++pc[labels[v]];
    }
    std::size_t src = k, dst = k;
    const auto empty = std::find(pc.begin(), pc.end(), 0);
    if (empty != pc.end()) {
      dst = static_cast<std::size_t>(empty - pc.begin());
      src = static_cast<std::size_t>(std::max_element(pw.begin(), pw.end()) - pw.begin());
      if (pc[src] <= 1) return;
    } else {
      src = static_cast<std::size_t>(std::max_element(pw.begin(), pw.end()) - pw.begin());
      if (pw[src] <= max_part_weight) return;
    }
    std::size_t best_v = n, best_to = k;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < n; ++v) {
      if (labels[v] != src) continue;
      std::vector<double> conn(k, 0.0);
      for (auto [u, w] : g.adj[v]) conn[labels[u]] += w;
      for (std::size_t b = 0; b < k; ++b) {
        if (b == src || (dst != k && b != dst)) continue;
        if (dst == k && pw[b] + g.vertex_weight[v] > max_part_weight) continue;
        const double gain = conn[b] - conn[src];
        if (gain > best_gain) {
          best_gain = gain;
          best_v = v;
          best_to = b;
        }
      }
    }
    if (best_v == n) return;
    labels[best_v] = best_to;
  }
}

}  // namespace detail

struct MultilevelResult {
  std::vector<std::size_t> labels;
  double cut = 0.0;
  double max_part_weight = 0.0;
  bool balance_relaxed = false;
  std::size_t levels = 0;
  std::vector<std::string> warnings;
};

/// Multilevel k-way partitioning: heavy-edge matching until at most
/// max(10k, 20) vertices remain, recursive graph-growing bisection on the
/// coarsest graph, then projection with k-way refinement at every level.
/// When the graph has at least k connected components, the components are
/// packed into k parts instead (cut 0); if that packing cannot meet the
/// balance bound, the bound is relaxed with a warning.
inline MultilevelResult multilevel_partition(const WeightedGraph& g, std::size_t k, double balance_tol,
                                             std::uint64_t seed) {
  const std::size_t n = g.size();
  if (k == 0 || k > n) throw ConfigError("k must lie in [1, n] (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  if (!(balance_tol >= 0.0)) throw ConfigError("balance_tol must be non-negative");
  MultilevelResult res;
  const double total = g.total_vertex_weight();
  const double avg = total / static_cast<double>(k);
  res.max_part_weight = std::max((1.0 + balance_tol) * avg, std::ceil(avg));
  std::mt19937_64 rng(seed);

  // Connected components, ordered by smallest vertex.
  UnionFind uf(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (auto [u, w] : g.adj[v]) uf.unite(u, v);
  }
  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t v = 0; v < n; ++v) by_root[uf.find(v)].push_back(v);
  std::vector<std::vector<std::size_t>> comps;
  for (auto& [r, members] : by_root) comps.push_back(std::move(members));
  std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });

  if (comps.size() >= k && k > 1) {
    std::vector<std::size_t> order(comps.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return comps[a].size() > comps[b].size(); });
    std::vector<double> load(k, 0.0);
    res.labels.assign(n, 0);
    for (std::size_t c : order) {
      const std::size_t bin = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
      for (std::size_t v : comps[c]) {
        res.labels[v] = bin;
        load[bin] += g.vertex_weight[v];
      }
    }
    const double heaviest = *std::max_element(load.begin(), load.end());
    if (heaviest > res.max_part_weight) {
      res.balance_relaxed = true;
      res.warnings.push_back("balance relaxed: " + std::to_string(comps.size()) + " components do not fit " +
                             std::to_string(k) + " balanced parts (heaviest part " + std::to_string(heaviest) +
                             " > " + std::to_string(res.max_part_weight) + ")");
      res.max_part_weight = heaviest;
    }
    res.cut = edge_cut(g, res.labels);
    return res;
  }

  // Coarsening.
  std::vector<detail::Level> levels;
  const WeightedGraph* current = &g;
  const std::size_t stop = std::max<std::size_t>(10 * k, 20);
  while (current->size() > stop) {
    detail::Level lvl = detail::coarsen_once(*current, rng);
    if (lvl.graph.size() * 20 > current->size() * 19) break;  // under 5% shrink
    levels.push_back(std::move(lvl));
    current = &levels.back().graph;
  }
  res.levels = levels.size();

  // Initial partition on the coarsest graph.
  std::vector<std::size_t> labels(current->size(), 0);
  std::vector<std::size_t> all(current->size());
  std::iota(all.begin(), all.end(), 0);
  detail::recursive_bisection(*current, all, k, 0, labels, rng);
  refine_kway(*current, labels, k, res.max_part_weight);

  // Uncoarsening.
  for (std::size_t li = levels.size(); li-- > 0;) {
    const WeightedGraph& finer = li == 0 ? g : levels[li - 1].graph;
    std::vector<std::size_t> projected(finer.size());
    for (std::size_t v = 0; v < finer.size(); ++v) projected[v] = labels[levels[li].coarse_of[v]];
    labels = std::move(projected);
    refine_kway(finer, labels, k, res.max_part_weight);
  }
  detail::rebalance(g, labels, k, res.max_part_weight);
  refine_kway(g, labels, k, res.max_part_weight);
  res.labels = std::move(labels);
  res.cut = edge_cut(g, res.labels);
  return res;
}

/// Multilevel balanced partitioning of the thresholded similarity graph.
inline Partition partition_multilevel(const SimilarityMatrix& m, std::size_t k, double balance_tol = 0.1,
                                      std::uint64_t seed = 0) {
  const WeightedGraph g = WeightedGraph::from_similarity(m);
  MultilevelResult r = multilevel_partition(g, k, balance_tol, seed);
  Partition p = partition_from_labels(r.labels, m.ids, PartitionAlgorithm::MetisStyle);
  p.parameters["k"] = std::to_string(k);
  p.parameters["balance_tol"] = std::to_string(balance_tol);
  p.parameters["seed"] = std::to_string(seed);
  p.parameters["edge_cut"] = std::to_string(r.cut);
  p.parameters["balance_relaxed"] = r.balance_relaxed ? "true" : "false";
  p.warnings = std::move(r.warnings);
  return p;
}

// ---------------------------------------------------------------------------
// Density-threshold agglomerative partitioning
// ---------------------------------------------------------------------------

/// Visits standards by decreasing total similarity (ties by index) and puts
/// each one into the community with the highest average similarity to its
/// members when that average reaches the admission level; otherwise it opens
/// a new community. The admission level is the mean off-diagonal weight of
/// the thresholded matrix, so a vertex joins only where it is more similar
/// than a random pair. Communities whose average cross similarity reaches the
/// same level are then merged, best pair first. A single refinement pass
/// finally moves vertices between communities while the mean
/// intra-community pair similarity strictly improves.
inline Partition partition_semep_style(const SimilarityMatrix& m) {
  if (!m.cutoff_value) throw ConfigError("semep-style partitioning needs a thresholded similarity matrix");
  const double cutoff = *m.cutoff_value;
  const std::size_t n = m.size();
  std::vector<double> strength(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) strength[i] += m.weight(i, j);
    total += strength[i];
  }
  const double level = n > 1 ? total / static_cast<double>(n * (n - 1)) : 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return strength[a] > strength[b]; });

  std::vector<std::vector<std::size_t>> comms;
  std::vector<std::size_t> label(n, 0);
  auto avg_to = [&](std::size_t v, const std::vector<std::size_t>& c) {
    double s = 0.0;
    std::size_t cnt = 0;
    for (std::size_t u : c) {
      if (u == v) continue;
      s += m.weight(v, u);
      ++cnt;
    }
    return cnt ? s / static_cast<double>(cnt) : 0.0;
  };
  auto admits = [&](double avg) { return avg > 0.0 && avg >= level * (1.0 - 1e-12); };

  for (std::size_t v : order) {
    std::size_t best = comms.size();
    double best_avg = -1.0;
    for (std::size_t c = 0; c < comms.size(); ++c) {
      const double a = avg_to(v, comms[c]);
      if (a > best_avg) {
        best_avg = a;
        best = c;
      }
    }
    if (best < comms.size() && admits(best_avg)) {
      comms[best].push_back(v);
      label[v] = best;
    } else {
      label[v] = comms.size();
      comms.push_back({v});
    }
  }

  // Average-linkage merging of communities.
  std::size_t merges = 0;
  for (;;) {
    const std::size_t c = comms.size();
    std::vector<double> cross(c * c, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const std::size_t a = label[i], b = label[j];
        if (a != b) cross[std::min(a, b) * c + std::max(a, b)] += m.weight(i, j);
      }
    }
    std::size_t ba = c, bb = c;
    double best = -1.0;
    for (std::size_t a = 0; a < c; ++a) {
      for (std::size_t b = a + 1; b < c; ++b) {
        const double avg = cross[a * c + b] / static_cast<double>(comms[a].size() * comms[b].size());
        if (avg > best) {
          best = avg;
          ba = a;
          bb = b;
        }
      }
    }
    if (ba == c || !admits(best)) break;
    comms[ba].insert(comms[ba].end(), comms[bb].begin(), comms[bb].end());
    comms.erase(comms.begin() + static_cast<std::ptrdiff_t>(bb));
    for (std::size_t& l : label) {
      if (l == bb) l = ba;
      else if (l > bb) --l;
    }
    ++merges;
  }

  // Refinement pass on the mean intra-community similarity.
  double intra_sum = 0.0, intra_pairs = 0.0;
  for (const auto& c : comms) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = i + 1; j < c.size(); ++j) intra_sum += m.weight(c[i], c[j]);
    }
    intra_pairs += static_cast<double>(c.size() * (c.size() - 1) / 2);
  }
  auto mean = [](double s, double p) { return p > 0.0 ? s / p : 0.0; };
  std::size_t moves = 0;
  for (std::size_t v : order) {
    const std::size_t a = label[v];
    double to_a = 0.0;
    for (std::size_t u : comms[a]) to_a += m.weight(v, u);
    const double size_a = static_cast<double>(comms[a].size());
    const double current = mean(intra_sum, intra_pairs);
    std::size_t best = a;
    double best_obj = current;
    double best_s = intra_sum, best_p = intra_pairs;
    for (std::size_t b = 0; b < comms.size(); ++b) {
      if (b == a || comms[b].empty()) continue;
      double to_b = 0.0;
      for (std::size_t u : comms[b]) to_b += m.weight(v, u);
      if (!admits(to_b / static_cast<double>(comms[b].size()))) continue;
      const double s = intra_sum - to_a + to_b;
      const double p = intra_pairs - (size_a - 1.0) + static_cast<double>(comms[b].size());
      const double obj = mean(s, p);
      if (obj > best_obj + 1e-12) {
        best_obj = obj;
        best = b;
        best_s = s;
        best_p = p;
      }
    }
    if (best == a) continue;
    comms[a].erase(std::find(comms[a].begin(), comms[a].end(), v));
    comms[best].push_back(v);
    label[v] = best;
    intra_sum = best_s;
    intra_pairs = best_p;
    ++moves;
  }

  Partition p = partition_from_labels(label, m.ids, PartitionAlgorithm::SemEPStyle);
  p.parameters["cutoff"] = std::to_string(cutoff);
  p.parameters["admission_level"] = std::to_string(level);
  p.parameters["merges"] = std::to_string(merges);
  p.parameters["refinement_moves"] = std::to_string(moves);
  return p;
}

}  // namespace kgrd

#endif  // KGRD_COMMUNITIES_HPP
