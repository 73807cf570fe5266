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


#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <vector>

#include "kgrd/quality.hpp"
#include "test_support.hpp"

namespace kgrd {
namespace {

SimilarityMatrix from_weights(const std::vector<std::vector<double>>& w) {
  SimilarityMatrix m;
  m.values = Matrix(w.size(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    m.ids.push_back(i);
    for (std::size_t j = 0; j < w.size(); ++j) m.values(i, j) = w[i][j];
  }
  return m;
}

Partition by_labels(const std::vector<std::size_t>& labels) {
  std::vector<std::size_t> ids(labels.size());
  std::iota(ids.begin(), ids.end(), 0);
  return partition_from_labels(labels, ids, PartitionAlgorithm::SemEPStyle);
}

/// Two disjoint 3-cliques of unit weight.
SimilarityMatrix two_cliques() {
  std::vector<std::vector<double>> w(6, std::vector<double>(6, 0.0));
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) w[i][j] = i / 3 == j / 3 ? 1.0 : 0.0;
  }
  return from_weights(w);
}

TEST(Quality, MatchesPairSumOracle) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng() % 8;
    const SimilarityMatrix m = testing::random_matrix(n, rng, -1.0, 1.0, 0.3);
    const Partition p = testing::random_partition(n, rng);
    const QualityReport r = evaluate_quality(p, m);
    const auto o = testing::naive_metrics(p, m);
    EXPECT_NEAR(r.inv_conductance, o.inv_conductance, 1e-12);
    EXPECT_NEAR(r.performance, o.performance, 1e-12);
    EXPECT_NEAR(r.inv_total_cut, o.inv_total_cut, 1e-12);
    EXPECT_NEAR(r.modularity_raw, o.modularity, 1e-12);
    EXPECT_NEAR(r.coverage, o.coverage, 1e-12);
  }
}

TEST(Quality, TwoCliquesClosedForms) {
  const SimilarityMatrix m = two_cliques();
  const QualityReport r = evaluate_quality(by_labels({0, 0, 0, 1, 1, 1}), m);
  EXPECT_NEAR(r.modularity_raw, 0.5, 1e-12);
  EXPECT_NEAR(r.modularity_scaled, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.inv_total_cut, 1.0);
  EXPECT_DOUBLE_EQ(r.inv_conductance, 1.0);
  EXPECT_DOUBLE_EQ(r.coverage, 1.0);
  EXPECT_DOUBLE_EQ(r.performance, 1.0);
}

TEST(Quality, OneCommunityAndSingletons) {
  const SimilarityMatrix m = two_cliques();
  const QualityReport one = evaluate_quality(by_labels({0, 0, 0, 0, 0, 0}), m);
  EXPECT_NEAR(one.modularity_raw, 0.0, 1e-12);
  EXPECT_NEAR(one.modularity_scaled, 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(one.coverage, 1.0);
  const QualityReport single = evaluate_quality(by_labels({0, 1, 2, 3, 4, 5}), m);
  EXPECT_DOUBLE_EQ(single.coverage, 0.0);
  EXPECT_DOUBLE_EQ(single.inv_total_cut, 0.0);
}

TEST(Quality, PerformanceHandExample) {
  const SimilarityMatrix m = from_weights({{1, 0.8, 0.2}, {0.8, 1, 0}, {0.2, 0, 1}});
  const Partition p = by_labels({0, 0, 1});
  EXPECT_NEAR(performance(p, m), 2.6 / 3.0, 1e-12);
  EXPECT_NEAR(performance(p, m, PerformanceMode::Unweighted), 2.0 / 3.0, 1e-12);
}

TEST(Quality, MaxConductanceAggregation) {
  const SimilarityMatrix m = from_weights({{1, 1, 0.5, 0}, {1, 1, 0, 0}, {0.5, 0, 1, 1}, {0, 0, 1, 1}});
  const Partition p = by_labels({0, 0, 1, 1});
  // Both sides: cut 0.5 over volume 2.5.
  EXPECT_NEAR(inv_conductance(p, m, ConductanceAggregation::Max), 0.8, 1e-12);
  EXPECT_NEAR(inv_conductance(p, m, ConductanceAggregation::Mean), 0.8, 1e-12);
}

TEST(Quality, MergingNeverDecreasesCoverage) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng() % 10;
    const SimilarityMatrix m = testing::random_matrix(n, rng);
    const Partition p = testing::random_partition(n, rng);
    auto labels = testing::community_labels(p, n);
    const double before = coverage(p, m);
    const std::size_t a = rng() % p.size(), b = rng() % p.size();
    for (auto& l : labels) {
      if (l == b) l = a;
    }
    EXPECT_GE(coverage(by_labels(labels), m), before - 1e-12);
  }
}

TEST(Quality, InvTotalCutPlusCutShareIsOne) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 12;
    const SimilarityMatrix m = testing::random_matrix(n, rng, 0.01, 1.0);
    const Partition p = testing::random_partition(n, rng);
    const auto lab = testing::community_labels(p, n);
    double total = 0, cut = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        total += m.values(i, j);
        if (lab[i] != lab[j]) cut += m.values(i, j);
      }
    }
    EXPECT_NEAR(inv_total_cut(p, m) + cut / total, 1.0, 1e-12);
  }
}

TEST(Quality, ScoresStayInRange) {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + rng() % 20;
    const SimilarityMatrix m = testing::random_matrix(n, rng, -1.0, 1.0, 0.5);
    const QualityReport r = evaluate_quality(testing::random_partition(n, rng), m);
    for (double v : {r.inv_conductance, r.performance, r.inv_total_cut, r.modularity_scaled, r.coverage}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_GE(r.modularity_raw, -0.5);
    EXPECT_LE(r.modularity_raw, 1.0);
  }
}

TEST(Quality, EmptyGraphConventions) {
  const SimilarityMatrix m = from_weights({{1, 0}, {0, 1}});
  const QualityReport r = evaluate_quality(by_labels({0, 1}), m);
  EXPECT_DOUBLE_EQ(r.coverage, 1.0);
  EXPECT_DOUBLE_EQ(r.inv_total_cut, 1.0);
  EXPECT_DOUBLE_EQ(r.modularity_raw, 0.0);
  EXPECT_DOUBLE_EQ(r.inv_conductance, 1.0);
}

}  // namespace
}  // namespace kgrd
