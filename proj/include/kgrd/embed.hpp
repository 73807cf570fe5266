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

#ifndef KGRD_EMBED_HPP
#define KGRD_EMBED_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "kgrd/error.hpp"
#include "kgrd/kg.hpp"
#include "kgrd/matrix.hpp"

namespace kgrd {

enum class ModelKind { TransE, TransH, TransR, TransD };
enum class ScoreNorm { L1, L2 };

inline constexpr std::array<ModelKind, 4> kAllModels = {ModelKind::TransE, ModelKind::TransH, ModelKind::TransR,
                                                        ModelKind::TransD};

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::TransE: return "TransE";
    case ModelKind::TransH: return "TransH";
    case ModelKind::TransR: return "TransR";
    case ModelKind::TransD: return "TransD";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
  for (ModelKind k : kAllModels) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown model kind '" + std::string(s) + "'");
}

struct TrainConfig {
  std::size_t embedding_dim = 50;
  std::size_t relation_dim = 20;  // TransR and TransD only
  std::size_t epochs = 500;
  std::size_t batch_size = 64;
  double learning_rate = 0.01;
  double margin = 1.0;
  ScoreNorm score_norm = ScoreNorm::L1;
  std::uint64_t seed = 0;

  /// Per-model defaults: L1 and margin 1 for TransE, squared L2 and
  /// margin 0.05 for the others.
  static TrainConfig defaults_for(ModelKind kind) {
    TrainConfig c;
    if (kind != ModelKind::TransE) {
      c.margin = 0.05;
      c.score_norm = ScoreNorm::L2;
    }
    return c;
  }

  void validate() const {
    if (embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
    if (relation_dim == 0) throw ConfigError("relation_dim must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
    if (!(margin > 0.0) || !std::isfinite(margin)) throw ConfigError("margin must be positive");
  }
};

/// Entity and relation parameters of one translational model. Blocks that a
/// model does not use stay empty.
struct EmbeddingModel {
  ModelKind kind = ModelKind::TransE;
  ScoreNorm norm = ScoreNorm::L1;
  Matrix entities;              // n x d
  Matrix relations;             // m x d (TransE, TransH) or m x k (TransR, TransD)
  Matrix normals;               // TransH: m x d hyperplane normals
  Matrix projections;           // TransR: m x (k*d), each row a row-major k x d matrix
  Matrix entity_projections;    // TransD: n x d
  Matrix relation_projections;  // TransD: m x k

  std::size_t entity_count() const { return entities.rows(); }
  std::size_t relation_count() const { return relations.rows(); }
  std::size_t dim() const { return entities.cols(); }
  std::size_t relation_dim() const { return relations.cols(); }

  std::array<Matrix*, 6> blocks() {
    return {&entities, &relations, &normals, &projections, &entity_projections, &relation_projections};
  }
  std::array<const Matrix*, 6> blocks() const {
    return {&entities, &relations, &normals, &projections, &entity_projections, &relation_projections};
  }

  bool finite() const {
    for (const Matrix* b : blocks()) {
      if (!all_finite(b->data())) return false;
    }
    return true;
  }

  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;
};

/// Same shape as `m`, all parameters zero.
inline EmbeddingModel zeros_like(const EmbeddingModel& m) {
  EmbeddingModel z;
  z.kind = m.kind;
  z.norm = m.norm;
  auto dst = z.blocks();
  auto src = m.blocks();
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i] = Matrix(src[i]->rows(), src[i]->cols());
  return z;
}

namespace detail {

inline void fill_uniform(Matrix& m, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-bound, bound);
  for (double& x : m.data()) x = unif(rng);
}

inline void orthogonalize(std::span<double> v, std::span<const double> unit_normal) {
  const double a = dot(v, unit_normal);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= a * unit_normal[i];
}

/// Distance of a residual vector. TransE uses the plain norm; the projected
/// models use the squared L2 norm when L2 is selected.
inline bool squared_l2(const EmbeddingModel& m) { return m.kind != ModelKind::TransE; }

inline double distance(const EmbeddingModel& m, std::span<const double> v) {
  if (m.norm == ScoreNorm::L1) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  const double sq = dot(v, v);
  return squared_l2(m) ? sq : std::sqrt(sq);
}

/// d distance / d v, written into `g`.
inline void distance_grad(const EmbeddingModel& m, std::span<const double> v, std::span<double> g) {
  if (m.norm == ScoreNorm::L1) {
    for (std::size_t i = 0; i < v.size(); ++i) g[i] = (v[i] > 0.0) - (v[i] < 0.0);
    return;
  }
  if (squared_l2(m)) {
    for (std::size_t i = 0; i < v.size(); ++i) g[i] = 2.0 * v[i];
    return;
  }
  const double n = norm2(v);
  for (std::size_t i = 0; i < v.size(); ++i) g[i] = n > 0.0 ? v[i] / n : 0.0;
}

// Projections used by the scoring functions. `out` has the relation-space size.

inline void transh_project(std::span<const double> x, std::span<const double> w, std::span<double> out) {
  const double a = dot(w, x);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - a * w[i];
}

inline void transr_project(const EmbeddingModel& m, std::size_t r, std::span<const double> x, std::span<double> out) {
  const std::size_t k = m.relation_dim();
  const std::size_t d = m.dim();
  auto mr = m.projections.row(r);
  for (std::size_t i = 0; i < k; ++i) out[i] = dot(mr.subspan(i * d, d), x);
}

/// TransD mapping (w_r w_e^T + I) x, where I is the k x d truncated identity.
inline void transd_project(std::span<const double> x, std::span<const double> we, std::span<const double> wr,
                           std::span<double> out) {
  const double a = dot(we, x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * wr[i] + (i < x.size() ? x[i] : 0.0);
}

/// Residual vector whose distance is the triple's score.
inline void residual(const EmbeddingModel& m, const Edge& t, std::span<double> v) {
  auto h = m.entities.row(t.subject);
  auto o = m.entities.row(t.object);
  auto r = m.relations.row(t.relation);
  switch (m.kind) {
    case ModelKind::TransE:
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = h[i] + r[i] - o[i];
      return;
    case ModelKind::TransH: {
      auto w = m.normals.row(t.relation);
      std::vector<double> u(h.size());
      for (std::size_t i = 0; i < u.size(); ++i) u[i] = h[i] - o[i];
      transh_project(u, w, v);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += r[i];
      return;
    }
    case ModelKind::TransR: {
      std::vector<double> u(h.size());
      for (std::size_t i = 0; i < u.size(); ++i) u[i] = h[i] - o[i];
      transr_project(m, t.relation, u, v);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += r[i];
      return;
    }
    case ModelKind::TransD: {
      auto wr = m.relation_projections.row(t.relation);
      std::vector<double> ph(v.size()), po(v.size());
      transd_project(h, m.entity_projections.row(t.subject), wr, ph);
      transd_project(o, m.entity_projections.row(t.object), wr, po);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = ph[i] + r[i] - po[i];
      return;
    }
  }
}

inline std::size_t residual_size(const EmbeddingModel& m) {
  return (m.kind == ModelKind::TransR || m.kind == ModelKind::TransD) ? m.relation_dim() : m.dim();
}

}  // namespace detail

/// Plausibility score of (h, r, t); lower is more plausible, never negative.
inline double score_triple(const EmbeddingModel& m, const Edge& t) {
  if (t.subject >= m.entity_count() || t.object >= m.entity_count() || t.relation >= m.relation_count()) {
    throw ConfigError("triple index out of range");
  }
  std::vector<double> v(detail::residual_size(m));
  detail::residual(m, t, v);
  return detail::distance(m, v);
}

/// Adds `coeff` times the gradient of score(t) with respect to every
/// parameter into `grad` (a model of identical shape).
inline void accumulate_score_grad(const EmbeddingModel& m, const Edge& t, double coeff, EmbeddingModel& grad) {
  const std::size_t d = m.dim();
  const std::size_t rs = detail::residual_size(m);
  std::vector<double> v(rs), g(rs);
  detail::residual(m, t, v);
  detail::distance_grad(m, v, g);
  for (double& x : g) x *= coeff;

  auto gh = grad.entities.row(t.subject);
  auto gt = grad.entities.row(t.object);
  auto gr = grad.relations.row(t.relation);
  for (std::size_t i = 0; i < rs; ++i) gr[i] += g[i];

  switch (m.kind) {
    case ModelKind::TransE:
      for (std::size_t i = 0; i < d; ++i) {
        gh[i] += g[i];
        gt[i] -= g[i];
      }
      return;
    case ModelKind::TransH: {
      auto w = m.normals.row(t.relation);
      auto h = m.entities.row(t.subject);
      auto o = m.entities.row(t.object);
      const double gw = dot(g, w);
      double a = 0.0;
      for (std::size_t i = 0; i < d; ++i) a += w[i] * (h[i] - o[i]);
      auto gn = grad.normals.row(t.relation);
      for (std::size_t i = 0; i < d; ++i) {
        const double p = g[i] - gw * w[i];
        gh[i] += p;
        gt[i] -= p;
        gn[i] += -gw * (h[i] - o[i]) - a * g[i];
      }
      return;
    }
    case ModelKind::TransR: {
      auto mr = m.projections.row(t.relation);
      auto gm = grad.projections.row(t.relation);
      auto h = m.entities.row(t.subject);
      auto o = m.entities.row(t.object);
      for (std::size_t i = 0; i < rs; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          const double mij = mr[i * d + j];
          gh[j] += mij * g[i];
          gt[j] -= mij * g[i];
          gm[i * d + j] += g[i] * (h[j] - o[j]);
        }
      }
      return;
    }
    case ModelKind::TransD: {
      auto h = m.entities.row(t.subject);
      auto o = m.entities.row(t.object);
      auto wh = m.entity_projections.row(t.subject);
      auto wo = m.entity_projections.row(t.object);
      auto wr = m.relation_projections.row(t.relation);
      const double c = dot(g, wr);
      const double alpha = dot(wh, h);
      const double beta = dot(wo, o);
      auto gwh = grad.entity_projections.row(t.subject);
      auto gwo = grad.entity_projections.row(t.object);
      auto gwr = grad.relation_projections.row(t.relation);
      for (std::size_t j = 0; j < d; ++j) {
        const double id = j < rs ? g[j] : 0.0;
        gh[j] += c * wh[j] + id;
        gt[j] -= c * wo[j] + id;
        gwh[j] += c * h[j];
        gwo[j] -= c * o[j];
      }
      for (std::size_t i = 0; i < rs; ++i) gwr[i] += (alpha - beta) * g[i];
      return;
    }
  }
}

/// Margin-ranking hinge max(0, margin + f(pos) - f(neg)). When `grad` is
/// given and the hinge is active, its gradient is accumulated there.
inline double hinge_loss(const EmbeddingModel& m, const Edge& pos, const Edge& neg, double margin,
                         EmbeddingModel* grad = nullptr) {
  const double loss = margin + score_triple(m, pos) - score_triple(m, neg);
  if (!(loss > 0.0)) return std::isfinite(loss) ? 0.0 : loss;
  if (grad) {
    accumulate_score_grad(m, pos, 1.0, *grad);
    accumulate_score_grad(m, neg, -1.0, *grad);
  }
  return loss;
}

namespace detail {

inline void project_entity(EmbeddingModel& m, std::size_t e) {
  clamp_to_unit_ball(m.entities.row(e));
  if (!m.entity_projections.empty()) clamp_to_unit_ball(m.entity_projections.row(e));
}

inline void project_relation(EmbeddingModel& m, std::size_t r) {
  switch (m.kind) {
    case ModelKind::TransE:
      break;
    case ModelKind::TransH: {
      auto w = m.normals.row(r);
      normalize(w);
      orthogonalize(m.relations.row(r), w);
      break;
    }
    case ModelKind::TransR:
      clamp_to_unit_ball(m.relations.row(r));
      break;
    case ModelKind::TransD:
      clamp_to_unit_ball(m.relations.row(r));
      clamp_to_unit_ball(m.relation_projections.row(r));
      break;
  }
}

}  // namespace detail

/// Fresh parameters drawn uniformly from [-6/sqrt(dim), 6/sqrt(dim)], then
/// projected onto the model constraints. TransR projection matrices start as
/// the truncated identity.
inline EmbeddingModel init_model(ModelKind kind, std::size_t entity_count, std::size_t relation_count,
                                 const TrainConfig& cfg) {
  cfg.validate();
  if (entity_count == 0) throw ConfigError("cannot initialize a model without entities");
  if (relation_count == 0) throw ConfigError("cannot initialize a model without relations");
  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = entity_count, m = relation_count;
  const std::size_t d = cfg.embedding_dim, k = cfg.relation_dim;
  const double bd = 6.0 / std::sqrt(static_cast<double>(d));
  const double bk = 6.0 / std::sqrt(static_cast<double>(k));

  EmbeddingModel model;
  model.kind = kind;
  model.norm = cfg.score_norm;
  model.entities = Matrix(n, d);
  detail::fill_uniform(model.entities, bd, rng);
  switch (kind) {
    case ModelKind::TransE:
      model.relations = Matrix(m, d);
      detail::fill_uniform(model.relations, bd, rng);
      for (std::size_t r = 0; r < m; ++r) normalize(model.relations.row(r));
      break;
    case ModelKind::TransH:
      model.relations = Matrix(m, d);
      model.normals = Matrix(m, d);
      detail::fill_uniform(model.relations, bd, rng);
      detail::fill_uniform(model.normals, bd, rng);
      break;
    case ModelKind::TransR:
      model.relations = Matrix(m, k);
      detail::fill_uniform(model.relations, bk, rng);
      model.projections = Matrix(m, k * d);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t i = 0; i < std::min(k, d); ++i) model.projections(r, i * d + i) = 1.0;
      }
      break;
    case ModelKind::TransD:
      model.relations = Matrix(m, k);
      model.entity_projections = Matrix(n, d);
      model.relation_projections = Matrix(m, k);
      detail::fill_uniform(model.relations, bk, rng);
      detail::fill_uniform(model.entity_projections, bd, rng);
      detail::fill_uniform(model.relation_projections, bk, rng);
      break;
  }
  for (std::size_t e = 0; e < n; ++e) detail::project_entity(model, e);
  for (std::size_t r = 0; r < m; ++r) detail::project_relation(model, r);
  return model;
}

inline EmbeddingModel init_model(ModelKind kind, const KnowledgeGraph& g, const TrainConfig& cfg) {
  return init_model(kind, g.entity_count(), g.relation_count(), cfg);
}

struct Corruption {
  Edge triple;
  bool head_replaced = false;
};

/// Replaces the head (probability 1/2) or the tail of `triple` by a different,
/// uniformly drawn entity. Draws that hit an existing edge of `g` are retried
/// up to `max_retries` times; the last draw is then accepted.
template <class Rng>
Corruption negative_sample(const KnowledgeGraph& g, const Edge& triple, Rng& rng, int max_retries = 10) {
  const std::size_t n = g.entity_count();
  if (n < 2) throw ConfigError("negative sampling needs at least two entities");
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<std::size_t> pick(0, n - 2);
  const bool head = coin(rng) == 1;
  Corruption c{triple, head};
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    const std::size_t original = head ? triple.subject : triple.object;
    std::size_t e = pick(rng);
    if (e >= original) ++e;
    c.triple = triple;
    (head ? c.triple.subject : c.triple.object) = e;
    if (!g.has_edge(c.triple)) break;
  }
  return c;
}

struct TrainResult {
  std::vector<double> epoch_loss;  // mean hinge loss per positive triple
  std::size_t steps = 0;
};

/// Margin-ranking SGD over every edge of `g`, one corrupted triple per
/// positive, constant learning rate. Constraints are re-applied to the rows
/// touched by each batch.
inline TrainResult train(EmbeddingModel& model, const KnowledgeGraph& g, const TrainConfig& cfg) {
  cfg.validate();
  TrainResult result;
  if (cfg.epochs == 0) return result;
  if (g.entity_count() < 2) throw ConfigError("training needs at least two entities");
  if (g.edges().empty()) throw ConfigError("training needs at least one triple");
  if (model.entity_count() != g.entity_count() || model.relation_count() != g.relation_count()) {
    throw ConfigError("model shape does not match the training graph");
  }

  std::mt19937_64 rng(cfg.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<Edge> order = g.edges();
  EmbeddingModel grad = zeros_like(model);
  std::vector<char> ent_touched(model.entity_count(), 0), rel_touched(model.relation_count(), 0);
  std::vector<std::size_t> ents, rels;

  auto touch = [&](const Edge& e) {
    for (std::size_t x : {e.subject, e.object}) {
      if (!ent_touched[x]) {
        ent_touched[x] = 1;
        ents.push_back(x);
      }
    }
    if (!rel_touched[e.relation]) {
      rel_touched[e.relation] = 1;
      rels.push_back(e.relation);
    }
  };
  auto step_rows = [&](Matrix& param, Matrix& gb, std::size_t row) {
    if (param.empty()) return;
    auto p = param.row(row);
    auto q = gb.row(row);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] -= cfg.learning_rate * q[i];
      q[i] = 0.0;
    }
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += cfg.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (std::size_t i = start; i < end; ++i) {
        const Edge& pos = order[i];
        const Corruption neg = negative_sample(g, pos, rng);
        const double loss = hinge_loss(model, pos, neg.triple, cfg.margin, &grad);
        if (!std::isfinite(loss)) {
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch));
        }
        if (loss > 0.0) {
          touch(pos);
          touch(neg.triple);
        }
        total += loss;
      }
      for (std::size_t e : ents) {
        step_rows(model.entities, grad.entities, e);
        step_rows(model.entity_projections, grad.entity_projections, e);
        detail::project_entity(model, e);
        if (!all_finite(model.entities.row(e))) {
          throw NumericError("non-finite parameters at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch));
        }
        ent_touched[e] = 0;
      }
      for (std::size_t r : rels) {
        step_rows(model.relations, grad.relations, r);
        step_rows(model.normals, grad.normals, r);
        step_rows(model.projections, grad.projections, r);
        step_rows(model.relation_projections, grad.relation_projections, r);
        detail::project_relation(model, r);
        rel_touched[r] = 0;
      }
      ents.clear();
      rels.clear();
      ++result.steps;
    }
    result.epoch_loss.push_back(total / static_cast<double>(order.size()));
  }
  if (!model.finite()) throw NumericError("training produced non-finite parameters");
  return result;
}

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t triples_checked = 0;
  std::size_t triples_skipped = 0;  // near a hinge or norm kink
  std::size_t coefficients_compared = 0;
};

/// Compares analytic hinge-loss gradients against central finite differences
/// on `triples` random (positive, negative) pairs over a small random model.
/// Pairs within `kink_tol` of the hinge boundary or of an L1/L2 kink are
/// skipped.
inline GradientCheckResult gradient_check(ModelKind kind, std::uint64_t seed, std::size_t triples = 100,
                                          std::optional<ScoreNorm> norm = std::nullopt, double step = 1e-5,
                                          double kink_tol = 1e-3) {
  TrainConfig cfg = TrainConfig::defaults_for(kind);
  if (norm) cfg.score_norm = *norm;
  cfg.embedding_dim = 6;
  cfg.relation_dim = 4;
  cfg.seed = seed;
  const std::size_t n = 10, m = 3;
  EmbeddingModel model = init_model(kind, n, m, cfg);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (Matrix* b : model.blocks()) {
    for (double& x : b->data()) x = unif(rng);
  }
  std::uniform_int_distribution<std::size_t> pe(0, n - 1), pr(0, m - 1);
  const double margin = 2.0;

  auto near_kink = [&](const Edge& t) {
    std::vector<double> v(detail::residual_size(model));
    detail::residual(model, t, v);
    if (model.norm == ScoreNorm::L1) {
      return std::any_of(v.begin(), v.end(), [&](double x) { return std::abs(x) < kink_tol; });
    }
    return !detail::squared_l2(model) && norm2(v) < kink_tol;
  };

  GradientCheckResult res;
  while (res.triples_checked < triples) {
    const Edge pos{pe(rng), pr(rng), pe(rng)};
    Edge neg = pos;
    (unif(rng) < 0.0 ? neg.subject : neg.object) = pe(rng);
    const double active = margin + score_triple(model, pos) - score_triple(model, neg);
    if (std::abs(active) < kink_tol || near_kink(pos) || near_kink(neg)) {
      ++res.triples_skipped;
      continue;
    }
    EmbeddingModel grad = zeros_like(model);
    hinge_loss(model, pos, neg, margin, &grad);
    auto pblocks = model.blocks();
    auto gblocks = grad.blocks();
    for (std::size_t b = 0; b < pblocks.size(); ++b) {
      auto params = pblocks[b]->data();
      auto analytic = gblocks[b]->data();
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + step;
        const double up = hinge_loss(model, pos, neg, margin, nullptr);
        params[i] = saved - step;
        const double down = hinge_loss(model, pos, neg, margin, nullptr);
        params[i] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double scale = std::max(std::abs(analytic[i]), std::abs(numeric));
        if (scale < 1e-7) continue;
        res.max_relative_error = std::max(res.max_relative_error, std::abs(analytic[i] - numeric) / scale);
        ++res.coefficients_compared;
      }
    }
    ++res.triples_checked;
  }
  return res;
}

}  // namespace kgrd

#endif  // KGRD_EMBED_HPP
