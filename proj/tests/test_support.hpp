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

#ifndef KGRD_TESTS_SUPPORT_HPP
#define KGRD_TESTS_SUPPORT_HPP

// Fixture builders and brute-force oracles shared by the test binaries. The
// oracles deliberately avoid the library's own helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "kgrd/kgrd.hpp"

namespace kgrd::testing {

inline std::string std_iri(std::size_t i) { return "http://example.org/std/S" + std::to_string(i); }

/// `n` standards with entity indices 0..n-1, typed via rdf:type, plus the
/// given RelatedTo pairs stored once each as (first, second).
inline KnowledgeGraph standards_graph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  KnowledgeGraph g;
  const LabelMap& l = g.labels();
  for (std::size_t i = 0; i < n; ++i) g.add_entity(std_iri(i));
  for (std::size_t i = 0; i < n; ++i) g.add_triple(std_iri(i), l.type, l.standard_type);
  for (auto [a, b] : pairs) g.add_triple(std_iri(a), l.related_to, std_iri(b));
  g.infer_kinds();
  return g;
}

/// Boolean reachability over the undirected adjacency matrix.
inline std::vector<std::vector<bool>> floyd_warshall(std::size_t n,
                                                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (auto [a, b] : pairs) r[a][b] = r[b][a] = true;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!r[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (r[k][j]) r[i][j] = true;
      }
    }
  }
  return r;
}

/// Type-7 quantile by sorting and interpolating.
inline double sorted_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Random symmetric matrix with unit diagonal and entries in [lo, hi].
inline SimilarityMatrix random_matrix(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0,
                                      double zero_p = 0.0) {
  SimilarityMatrix m;
  m.ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.ids[i] = i;
  m.values = Matrix(n, n);
  std::uniform_real_distribution<double> u(lo, hi), coin(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.values(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = coin(rng) < zero_p ? 0.0 : u(rng);
      m.values(i, j) = m.values(j, i) = v;
    }
  }
  return m;
}

inline Partition random_partition(std::size_t n, std::mt19937_64& rng) {
  const std::size_t k = std::uniform_int_distribution<std::size_t>(1, n)(rng);
  std::vector<std::size_t> labels(n), ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
    ids[i] = i;
  }
  return partition_from_labels(labels, ids, PartitionAlgorithm::SemEPStyle);
}

inline std::vector<std::size_t> community_labels(const Partition& p, std::size_t n) {
  std::vector<std::size_t> lab(n, 0);
  for (std::size_t c = 0; c < p.communities.size(); ++c) {
    for (std::size_t v : p.communities[c]) lab[v] = c;
  }
  return lab;
}

/// The five metrics evaluated literally from their pair-sum definitions.
struct NaiveMetrics {
  double inv_conductance = 0, performance = 0, inv_total_cut = 0, modularity = 0, coverage = 0;
};

inline NaiveMetrics naive_metrics(const Partition& p, const SimilarityMatrix& m) {
  const std::size_t n = m.size();
  const auto lab = community_labels(p, n);
  auto w = [&](std::size_t i, std::size_t j) { return i == j ? 0.0 : std::max(0.0, m.values(i, j)); };
  double total = 0, intra = 0, inter = 0, perf = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      total += w(i, j);
      if (lab[i] == lab[j]) {
        intra += w(i, j);
        perf += w(i, j);
      } else {
        inter += w(i, j);
        perf += 1.0 - w(i, j);
      }
    }
  }
  NaiveMetrics r;
  const double pairs = static_cast<double>(n * (n - 1) / 2);
  r.performance = n < 2 ? 1.0 : perf / pairs;
  r.coverage = total == 0 ? 1.0 : intra / total;
  r.inv_total_cut = total == 0 ? 1.0 : 1.0 - inter / total;

  double phi_sum = 0;
  double q = 0;
  for (std::size_t c = 0; c < p.communities.size(); ++c) {
    double cut = 0, vol_in = 0, vol_out = 0, win = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const bool ii = lab[i] == c, jj = lab[j] == c;
        if (ii) vol_in += w(i, j);
        else vol_out += w(i, j);
        if (ii && !jj) cut += w(i, j);
        if (ii && jj && i < j) win += w(i, j);
      }
    }
    const double denom = std::min(vol_in, vol_out);
    phi_sum += denom > 0 ? cut / denom : 0.0;
    if (total > 0) q += win / total - std::pow(vol_in / (2.0 * total), 2);
  }
  r.inv_conductance = 1.0 - phi_sum / static_cast<double>(p.communities.size());
  r.modularity = q;
  return r;
}

}  // namespace kgrd::testing

#endif  // KGRD_TESTS_SUPPORT_HPP
