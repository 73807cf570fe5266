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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "kgrd/embed.hpp"
#include "kgrd/sim.hpp"
#include "kgrd/synth.hpp"
#include "test_support.hpp"

namespace kgrd {
namespace {

EmbeddingModel tiny_model(ModelKind kind, std::size_t n, std::size_t m, std::size_t d, std::size_t k = 0) {
  TrainConfig cfg = TrainConfig::defaults_for(kind);
  cfg.embedding_dim = d;
  cfg.relation_dim = k ? k : d;
  return init_model(kind, n, m, cfg);
}

void set_row(Matrix& mat, std::size_t r, std::initializer_list<double> v) {
  std::size_t i = 0;
  for (double x : v) mat(r, i++) = x;
}

// Straight-line scores written independently of the library's helpers.
double reference_score(const EmbeddingModel& m, const Edge& t) {
  const std::size_t d = m.dim(), k = m.relation_dim();
  std::vector<double> res;
  switch (m.kind) {
    case ModelKind::TransE:
      for (std::size_t i = 0; i < d; ++i) {
        res.push_back(m.entities(t.subject, i) + m.relations(t.relation, i) - m.entities(t.object, i));
      }
      break;
    case ModelKind::TransH: {
      double wh = 0, wt = 0;
      for (std::size_t i = 0; i < d; ++i) {
        wh += m.normals(t.relation, i) * m.entities(t.subject, i);
        wt += m.normals(t.relation, i) * m.entities(t.object, i);
      }
      for (std::size_t i = 0; i < d; ++i) {
        const double h = m.entities(t.subject, i) - wh * m.normals(t.relation, i);
        const double o = m.entities(t.object, i) - wt * m.normals(t.relation, i);
        res.push_back(h + m.relations(t.relation, i) - o);
      }
      break;
    }
    case ModelKind::TransR:
      for (std::size_t a = 0; a < k; ++a) {
        double h = 0, o = 0;
        for (std::size_t b = 0; b < d; ++b) {
          h += m.projections(t.relation, a * d + b) * m.entities(t.subject, b);
          o += m.projections(t.relation, a * d + b) * m.entities(t.object, b);
        }
        res.push_back(h + m.relations(t.relation, a) - o);
      }
      break;
    case ModelKind::TransD: {
      double wh = 0, wt = 0;
      for (std::size_t i = 0; i < d; ++i) {
        wh += m.entity_projections(t.subject, i) * m.entities(t.subject, i);
        wt += m.entity_projections(t.object, i) * m.entities(t.object, i);
      }
      for (std::size_t a = 0; a < k; ++a) {
        const double h = m.relation_projections(t.relation, a) * wh + (a < d ? m.entities(t.subject, a) : 0.0);
        const double o = m.relation_projections(t.relation, a) * wt + (a < d ? m.entities(t.object, a) : 0.0);
        res.push_back(h + m.relations(t.relation, a) - o);
      }
      break;
    }
  }
  double s = 0;
  for (double v : res) s += m.norm == ScoreNorm::L1 ? std::fabs(v) : v * v;
  // Only TransE takes the root of the L2 sum; the projected models score squared.
  return m.norm == ScoreNorm::L2 && m.kind == ModelKind::TransE ? std::sqrt(s) : s;
}

TEST(ScoreTriple, TransEExactTranslationIsZero) {
  EmbeddingModel m = tiny_model(ModelKind::TransE, 2, 1, 2);
  set_row(m.entities, 0, {1, 0});
  set_row(m.relations, 0, {0, 1});
  set_row(m.entities, 1, {1, 1});
  EXPECT_EQ(score_triple(m, {0, 0, 1}), 0.0);
}

TEST(ScoreTriple, TransEUnitOffset) {
  EmbeddingModel m = tiny_model(ModelKind::TransE, 2, 1, 2);
  set_row(m.entities, 0, {0, 0});
  set_row(m.relations, 0, {0, 0});
  set_row(m.entities, 1, {1, 0});
  EXPECT_EQ(score_triple(m, {0, 0, 1}), 1.0);
}

TEST(ScoreTriple, TransHHandProjection) {
  EmbeddingModel m = tiny_model(ModelKind::TransH, 2, 1, 2);
  set_row(m.normals, 0, {1, 0});
  set_row(m.entities, 0, {3, 2});
  set_row(m.relations, 0, {0, 0});
  set_row(m.entities, 1, {5, 2});
  EXPECT_EQ(score_triple(m, {0, 0, 1}), 0.0);
  EXPECT_EQ(reference_score(m, {0, 0, 1}), 0.0);
}

TEST(ScoreTriple, MatchesStraightLineRecomputationForAllModels) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (ModelKind kind : kAllModels) {
    for (ScoreNorm norm : {ScoreNorm::L1, ScoreNorm::L2}) {
      EmbeddingModel m = tiny_model(kind, 6, 2, 5, 3);
      m.norm = norm;
      for (Matrix* b : m.blocks()) {
        for (double& x : b->data()) x = u(rng);
      }
      for (std::size_t h = 0; h < 6; ++h) {
        for (std::size_t t = 0; t < 6; ++t) {
          const Edge e{h, h % 2, t};
          const double s = score_triple(m, e);
          EXPECT_GE(s, 0.0);
          EXPECT_NEAR(s, reference_score(m, e), 1e-12) << to_string(kind);
        }
      }
    }
  }
}

TEST(ScoreTriple, TranslationIdentityHoldsExactly) {
  EmbeddingModel m = tiny_model(ModelKind::TransE, 3, 1, 8);
  for (std::size_t i = 0; i < 8; ++i) m.entities(2, i) = m.entities(0, i) + m.relations(0, i);
  EXPECT_EQ(score_triple(m, {0, 0, 2}), 0.0);
}

TEST(InitModel, DeterministicForFixedSeed) {
  for (ModelKind kind : kAllModels) {
    const TrainConfig cfg = TrainConfig::defaults_for(kind);
    EXPECT_TRUE(init_model(kind, 30, 4, cfg) == init_model(kind, 30, 4, cfg)) << to_string(kind);
  }
}

TEST(InitModel, ShapesAndConstraints) {
  const TrainConfig cfg;
  const EmbeddingModel e = init_model(ModelKind::TransE, 249, 4, cfg);
  EXPECT_EQ(e.entities.rows(), 249u);
  EXPECT_EQ(e.entities.cols(), 50u);
  const EmbeddingModel h = init_model(ModelKind::TransH, 249, 4, TrainConfig::defaults_for(ModelKind::TransH));
  for (std::size_t r = 0; r < 4; ++r) EXPECT_NEAR(norm2(h.normals.row(r)), 1.0, 1e-12);
  for (std::size_t i = 0; i < 249; ++i) {
    EXPECT_LE(norm2(e.entities.row(i)), 1.0 + 1e-12);
    EXPECT_LE(norm2(h.entities.row(i)), 1.0 + 1e-12);
  }
  const EmbeddingModel r = init_model(ModelKind::TransR, 5, 2, TrainConfig::defaults_for(ModelKind::TransR));
  EXPECT_EQ(r.projections.cols(), 20u * 50u);
  const EmbeddingModel d = init_model(ModelKind::TransD, 5, 2, TrainConfig::defaults_for(ModelKind::TransD));
  EXPECT_EQ(d.entity_projections.rows(), 5u);
  EXPECT_EQ(d.relation_projections.cols(), 20u);
}

TEST(InitModel, EmptyGraphIsAConfigurationError) {
  EXPECT_THROW(init_model(ModelKind::TransE, 0, 1, TrainConfig{}), ConfigError);
  EXPECT_THROW(init_model(ModelKind::TransE, 3, 0, TrainConfig{}), ConfigError);
}

TEST(GradientCheck, AllModelsBelowTolerance) {
  for (ModelKind kind : kAllModels) {
    const GradientCheckResult r = gradient_check(kind, 5);
    EXPECT_GE(r.triples_checked, 100u);
    EXPECT_GT(r.coefficients_compared, 0u);
    EXPECT_LT(r.max_relative_error, 1e-4) << to_string(kind);
  }
  EXPECT_LT(gradient_check(ModelKind::TransE, 6, 100, ScoreNorm::L2).max_relative_error, 1e-4);
}

TEST(HingeLoss, ZeroMarginZeroParametersGivesZeroLossAndGradient) {
  EmbeddingModel m = tiny_model(ModelKind::TransE, 3, 1, 4);
  for (Matrix* b : m.blocks()) std::fill(b->data().begin(), b->data().end(), 0.0);
  EmbeddingModel g = zeros_like(m);
  EXPECT_EQ(hinge_loss(m, {0, 0, 1}, {0, 0, 2}, 0.0, &g), 0.0);
  for (Matrix* b : g.blocks()) {
    for (double x : b->data()) EXPECT_EQ(x, 0.0);
  }
}

TEST(NegativeSample, HeadAndTailEquallyLikely) {
  const KnowledgeGraph g = testing::standards_graph(10, {{0, 1}});
  std::mt19937_64 rng(0);
  const Edge pos = g.edges().back();
  std::size_t heads = 0;
  const std::size_t draws = 100000;
  for (std::size_t i = 0; i < draws; ++i) {
    const Corruption c = negative_sample(g, pos, rng);
    const bool head_changed = c.triple.subject != pos.subject;
    const bool tail_changed = c.triple.object != pos.object;
    ASSERT_NE(head_changed, tail_changed);
    ASSERT_EQ(c.triple.relation, pos.relation);
    ASSERT_EQ(head_changed, c.head_replaced);
    heads += c.head_replaced;
  }
  const double f = static_cast<double>(heads) / static_cast<double>(draws);
  EXPECT_NEAR(f, 0.5, 0.02);
  EXPECT_NEAR(1.0 - f, 0.5, 0.02);
}

TEST(NegativeSample, ReproducibleSequence) {
  const KnowledgeGraph g = testing::standards_graph(10, {{0, 1}, {2, 3}});
  std::mt19937_64 a(9), b(9);
  for (int i = 0; i < 100; ++i) {
    const Edge& e = g.edges()[static_cast<std::size_t>(i) % g.edges().size()];
    EXPECT_EQ(negative_sample(g, e, a).triple, negative_sample(g, e, b).triple);
  }
}

TEST(Train, OneEntityGraphIsAConfigurationError) {
  KnowledgeGraph g;
  g.add_triple("http://x/A", "http://x/p", "http://x/A");
  TrainConfig cfg;
  cfg.epochs = 1;
  EmbeddingModel m = init_model(ModelKind::TransE, g, cfg);
  EXPECT_THROW(train(m, g, cfg), ConfigError);
}

TEST(Train, ZeroEpochsLeavesInitialModel) {
  const KnowledgeGraph g = synth_graph({});
  TrainConfig cfg;
  cfg.epochs = 0;
  EmbeddingModel m = init_model(ModelKind::TransE, g, cfg);
  const EmbeddingModel before = m;
  const TrainResult r = train(m, g, cfg);
  EXPECT_TRUE(r.epoch_loss.empty());
  EXPECT_TRUE(m == before);
}

TEST(Train, LossDecreasesAndConstraintsHold) {
  const KnowledgeGraph g = materialize_closure(synth_graph({}));
  for (ModelKind kind : kAllModels) {
    TrainConfig cfg = TrainConfig::defaults_for(kind);
    cfg.epochs = 200;
    cfg.embedding_dim = 20;
    cfg.relation_dim = 10;
    EmbeddingModel m = init_model(kind, g, cfg);
    const TrainResult r = train(m, g, cfg);
    ASSERT_EQ(r.epoch_loss.size(), 200u);
    EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front()) << to_string(kind);
    EXPECT_TRUE(m.finite());
    if (kind == ModelKind::TransE || kind == ModelKind::TransH) {
      for (std::size_t i = 0; i < m.entity_count(); ++i) EXPECT_LE(norm2(m.entities.row(i)), 1.0 + 1e-9);
    }
    if (kind == ModelKind::TransH) {
      for (std::size_t i = 0; i < m.relation_count(); ++i) EXPECT_NEAR(norm2(m.normals.row(i)), 1.0, 1e-9);
    }
  }
}

TEST(Train, BitwiseDeterministic) {
  const KnowledgeGraph g = materialize_closure(synth_graph({}));
  for (ModelKind kind : kAllModels) {
    TrainConfig cfg = TrainConfig::defaults_for(kind);
    cfg.epochs = 20;
    cfg.embedding_dim = 10;
    cfg.relation_dim = 5;
    EmbeddingModel a = init_model(kind, g, cfg), b = init_model(kind, g, cfg);
    const TrainResult ra = train(a, g, cfg), rb = train(b, g, cfg);
    EXPECT_TRUE(a == b) << to_string(kind);
    EXPECT_EQ(ra.epoch_loss, rb.epoch_loss);
  }
}

TEST(Train, NonFiniteLossNamesEpochAndBatch) {
  const KnowledgeGraph g = synth_graph({});
  TrainConfig cfg;
  cfg.epochs = 3;
  EmbeddingModel m = init_model(ModelKind::TransE, g, cfg);
  for (double& x : m.entities.data()) x = std::numeric_limits<double>::quiet_NaN();
  try {
    train(m, g, cfg);
    FAIL() << "expected a numeric error";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos);
  }
}

TEST(Train, TwoCliquesSeparateInCosineSimilarity) {
  SynthConfig sc;
  sc.blocks = 2;
  sc.block_size = 10;
  const KnowledgeGraph base = synth_graph(sc);
  const KnowledgeGraph g = materialize_closure(base);
  for (ModelKind kind : kAllModels) {
    TrainConfig cfg = TrainConfig::defaults_for(kind);
    cfg.epochs = 200;
    EmbeddingModel m = init_model(kind, g, cfg);
    train(m, g, cfg);
    const auto standards = standards_of(g);
    const SimilarityMatrix s = build_matrix(m, standards, &g);
    double intra = 0, cross = 0;
    std::size_t ni = 0, nc = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        const bool same = (i < 10) == (j < 10);
        (same ? intra : cross) += s.values(i, j);
        (same ? ni : nc) += 1;
      }
    }
    EXPECT_GT(intra / static_cast<double>(ni), cross / static_cast<double>(nc)) << to_string(kind);
  }
}

}  // namespace
}  // namespace kgrd
