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

#ifndef KGRD_QUALITY_HPP
#define KGRD_QUALITY_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgrd/communities.hpp"
#include "kgrd/sim.hpp"

namespace kgrd {

enum class ConductanceAggregation { Mean, Max };
enum class PerformanceMode { Weighted, Unweighted };

struct QualityOptions {
  ConductanceAggregation conductance = ConductanceAggregation::Mean;
  PerformanceMode performance = PerformanceMode::Weighted;
};

/// Partition quality over a similarity matrix, every score oriented so that
/// higher is better.
struct QualityReport {
  double inv_conductance = 0.0;
  double performance = 0.0;
  double inv_total_cut = 0.0;
  double modularity_scaled = 0.0;
  double modularity_raw = 0.0;
  double coverage = 0.0;
};

namespace detail {

/// Pair weights are the matrix entries clipped at zero, so negative
/// similarities never act as edges.
struct WeightSums {
  double total = 0.0;  // over unordered pairs
  double intra = 0.0;
  double inter = 0.0;
  std::vector<double> degree;
};

inline WeightSums weight_sums(const SimilarityMatrix& m, std::span<const std::size_t> label) {
  WeightSums s;
  const std::size_t n = m.size();
  s.degree.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = m.weight(i, j);
      s.total += w;
      (label[i] == label[j] ? s.intra : s.inter) += w;
      s.degree[i] += w;
      s.degree[j] += w;
    }
  }
  return s;
}

inline std::size_t community_count(std::span<const std::size_t> label) {
  return label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
}

}  // namespace detail

/// 1 minus the aggregated conductance cut(k) / min(vol(k), vol(V \ k)).
/// Communities with a zero denominator contribute 0.
inline double inv_conductance(const Partition& p, const SimilarityMatrix& m,
                              ConductanceAggregation agg = ConductanceAggregation::Mean) {
  const auto label = labels_of(p, m.ids);
  const std::size_t n = m.size(), k = detail::community_count(label);
  if (k == 0) return 1.0;
  std::vector<double> cut(k, 0.0), vol(k, 0.0);
  double total_vol = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = m.weight(i, j);
      vol[label[i]] += w;
      total_vol += w;
      if (label[i] != label[j]) cut[label[i]] += w;
    }
  }
  double acc = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double denom = std::min(vol[c], total_vol - vol[c]);
    const double phi = denom > 0.0 ? std::min(1.0, cut[c] / denom) : 0.0;
    acc = agg == ConductanceAggregation::Mean ? acc + phi : std::max(acc, phi);
  }
  const double conductance = agg == ConductanceAggregation::Mean ? acc / static_cast<double>(k) : acc;
  return 1.0 - conductance;
}

/// Fraction of pairs "correctly" placed: intra-community similarity plus
/// inter-community dissimilarity, over all unordered pairs.
inline double performance(const Partition& p, const SimilarityMatrix& m,
                          PerformanceMode mode = PerformanceMode::Weighted) {
  const auto label = labels_of(p, m.ids);
  const std::size_t n = m.size();
  if (n < 2) return 1.0;
  double good = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double w = std::min(1.0, m.weight(i, j));
      if (mode == PerformanceMode::Unweighted) w = w > 0.0 ? 1.0 : 0.0;
      good += label[i] == label[j] ? w : 1.0 - w;
    }
  }
  return good / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

/// 1 minus inter-community similarity over total similarity; 1 when the
/// total is zero.
inline double inv_total_cut(const Partition& p, const SimilarityMatrix& m) {
  const auto s = detail::weight_sums(m, labels_of(p, m.ids));
  if (s.total <= 0.0) return 1.0;
  return 1.0 - s.inter / s.total;
}

/// Weighted Newman modularity; returns {raw, (raw + 0.5) / 1.5}.
inline std::pair<double, double> modularity(const Partition& p, const SimilarityMatrix& m) {
  const auto label = labels_of(p, m.ids);
  const auto s = detail::weight_sums(m, label);
  double q = 0.0;
  if (s.total > 0.0) {
    const std::size_t k = detail::community_count(label);
    std::vector<double> in(k, 0.0), vol(k, 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
      vol[label[i]] += s.degree[i];
      for (std::size_t j = i + 1; j < m.size(); ++j) {
        if (label[i] == label[j]) in[label[i]] += m.weight(i, j);
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      const double f = vol[c] / (2.0 * s.total);
      q += in[c] / s.total - f * f;
    }
  }
  return {q, (q + 0.5) / 1.5};
}

/// Intra-community similarity over total similarity; 1 when the total is zero.
inline double coverage(const Partition& p, const SimilarityMatrix& m) {
  const auto s = detail::weight_sums(m, labels_of(p, m.ids));
  if (s.total <= 0.0) return 1.0;
  return s.intra / s.total;
}

inline QualityReport evaluate_quality(const Partition& p, const SimilarityMatrix& m, const QualityOptions& opt = {}) {
  QualityReport r;
  r.inv_conductance = inv_conductance(p, m, opt.conductance);
  r.performance = performance(p, m, opt.performance);
  r.inv_total_cut = inv_total_cut(p, m);
  std::tie(r.modularity_raw, r.modularity_scaled) = modularity(p, m);
  r.coverage = coverage(p, m);
  return r;
}

}  // namespace kgrd

#endif  // KGRD_QUALITY_HPP
