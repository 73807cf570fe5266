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

#ifndef KGRD_SIM_HPP
#define KGRD_SIM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "kgrd/embed.hpp"
#include "kgrd/error.hpp"
#include "kgrd/kg.hpp"
#include "kgrd/matrix.hpp"

namespace kgrd {

/// Symmetric pairwise similarities between standards. `ids` are entity
/// indices; row i of `values` belongs to ids[i].
struct SimilarityMatrix {
  std::vector<std::size_t> ids;
  Matrix values;
  std::optional<double> threshold_level;
  std::optional<double> cutoff_value;

  std::size_t size() const { return ids.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values(i, j); }

  /// Edge weight used by graph algorithms: the off-diagonal value clipped at 0.
  double weight(std::size_t i, std::size_t j) const { return i == j ? 0.0 : std::max(0.0, values(i, j)); }

  bool thresholded() const { return cutoff_value.has_value(); }
};

/// Cosine of the angle between `u` and `v`, clipped to [-1, 1]. The cosine
/// distance is 1 minus this value.
inline double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ConfigError("cosine_similarity: dimension mismatch");
  const double nu = norm2(u), nv = norm2(v);
  if (nu == 0.0 || nv == 0.0) throw NumericError("cosine similarity is undefined for a zero vector");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

/// Full cosine-similarity matrix over the rows `ids` of `vectors`. Each
/// unordered pair is computed once and mirrored, the diagonal is exactly 1.
inline SimilarityMatrix build_matrix(const Matrix& vectors, std::span<const std::size_t> ids,
                                     const std::vector<std::string>* names = nullptr, unsigned threads = 1) {
  SimilarityMatrix sm;
  sm.ids.assign(ids.begin(), ids.end());
  const std::size_t n = ids.size();
  sm.values = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (ids[i] >= vectors.rows()) throw ConfigError("standard without an embedding row");
    if (norm2(vectors.row(ids[i])) == 0.0) {
      const std::string who = names ? (*names)[ids[i]] : "entity " + std::to_string(ids[i]);
      throw NumericError("zero embedding vector for " + who);
    }
  }
  auto fill_rows = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < n; i += stride) {
      sm.values(i, i) = 1.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        sm.values(i, j) = cosine_similarity(vectors.row(ids[i]), vectors.row(ids[j]));
      }
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || n < 64) {
    fill_rows(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(fill_rows, t, threads);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) sm.values(j, i) = sm.values(i, j);
  }
  return sm;
}

inline SimilarityMatrix build_matrix(const EmbeddingModel& model, std::span<const std::size_t> standards,
                                     const KnowledgeGraph* g = nullptr, unsigned threads = 1) {
  std::vector<std::string> names;
  if (g) {
    for (const auto& e : g->entities()) names.push_back(e.iri);
  }
  return build_matrix(model.entities, standards, g ? &names : nullptr, threads);
}

/// Off-diagonal upper-triangle values, row by row.
inline std::vector<double> upper_triangle(const SimilarityMatrix& m) {
  std::vector<double> out;
  const std::size_t n = m.size();
  out.reserve(n * (n - (n > 0)) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) out.push_back(m(i, j));
  }
  return out;
}

/// Linear-interpolation quantile of `values` at `level` in [0, 1].
inline double quantile(std::vector<double> values, double level) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = level * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace detail {

inline SimilarityMatrix zero_below(const SimilarityMatrix& m, double cutoff) {
  SimilarityMatrix out = m;
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && out.values(i, j) < cutoff) out.values(i, j) = 0.0;
    }
  }
  out.cutoff_value = cutoff;
  return out;
}

}  // namespace detail

/// Zeroes every off-diagonal entry strictly below the `level` quantile of the
/// off-diagonal values. The diagonal is left alone.
inline SimilarityMatrix apply_threshold(const SimilarityMatrix& m, double level) {
  if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("threshold level must lie in [0, 1]");
  if (m.thresholded()) throw ConfigError("similarity matrix is already thresholded");
  const auto tri = upper_triangle(m);
  const double cutoff = tri.empty() ? 1.0 : quantile(tri, level);
  SimilarityMatrix out = detail::zero_below(m, cutoff);
  out.threshold_level = level;
  return out;
}

/// Absolute-cutoff variant: zeroes off-diagonal entries strictly below `cutoff`.
inline SimilarityMatrix apply_absolute_cutoff(const SimilarityMatrix& m, double cutoff) {
  if (!std::isfinite(cutoff)) throw ConfigError("cutoff must be finite");
  if (m.thresholded()) throw ConfigError("similarity matrix is already thresholded");
  return detail::zero_below(m, cutoff);
}

/// Per-model default quantile levels.
inline double default_threshold_level(ModelKind kind) {
  switch (kind) {
    case ModelKind::TransH: return 0.50;
    case ModelKind::TransR: return 0.75;
    case ModelKind::TransE:
    case ModelKind::TransD: break;
  }
  return 0.85;
}

struct DensityEstimate {
  std::vector<double> sample_points;
  std::vector<double> densities;
  double bandwidth = 0.0;
};

/// Scott's rule h = sigma * n^(-1/5) with the sample standard deviation.
inline double scott_bandwidth(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0)) * std::pow(n, -0.2);
}

/// Gaussian kernel density estimate sampled on `grid` evenly spaced points
/// over [min - 3h, max + 3h].
inline DensityEstimate kde(std::span<const double> values, std::optional<double> bandwidth = std::nullopt,
                           std::size_t grid = 512) {
  if (values.size() < 2) throw ConfigError("kde needs at least two values");
  if (grid < 2) throw ConfigError("kde grid needs at least two points");
  if (bandwidth && !(*bandwidth > 0.0)) throw ConfigError("kde bandwidth must be positive");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  double h = 0.0;
  if (bandwidth) {
    h = *bandwidth;
  } else {
    if (*mn == *mx) throw NumericError("all values identical; pass an explicit bandwidth");
    h = scott_bandwidth(values);
  }
  DensityEstimate est;
  est.bandwidth = h;
  const double lo = *mn - 3.0 * h, hi = *mx + 3.0 * h;
  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  est.sample_points.resize(grid);
  est.densities.resize(grid);
  for (std::size_t g = 0; g < grid; ++g) {
    const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid - 1);
    double s = 0.0;
    for (double v : values) {
      const double z = (x - v) / h;
      s += std::exp(-0.5 * z * z);
    }
    est.sample_points[g] = x;
    est.densities[g] = s * norm;
  }
  return est;
}

/// Trapezoidal integral of the sampled density.
inline double integral(const DensityEstimate& est) {
  double s = 0.0;
  for (std::size_t i = 1; i < est.sample_points.size(); ++i) {
    s += 0.5 * (est.densities[i] + est.densities[i - 1]) * (est.sample_points[i] - est.sample_points[i - 1]);
  }
  return s;
}

}  // namespace kgrd

#endif  // KGRD_SIM_HPP
