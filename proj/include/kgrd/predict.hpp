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

#ifndef KGRD_PREDICT_HPP
#define KGRD_PREDICT_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "kgrd/communities.hpp"
#include "kgrd/embed.hpp"
#include "kgrd/kg.hpp"
#include "kgrd/quality.hpp"
#include "kgrd/sim.hpp"

namespace kgrd {

/// Candidate relation between two members of one community (a < b).
struct PredictedEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t community = 0;
  std::optional<bool> hit;

  friend bool operator==(const PredictedEdge&, const PredictedEdge&) = default;
};

/// Homophily expansion: every unordered pair of distinct members of a
/// community that is not already in `known`. Ordered by community, then pair.
inline std::vector<PredictedEdge> homophily_predict(const Partition& p, const PairSet& known) {
  std::vector<PredictedEdge> out;
  for (std::size_t c = 0; c < p.communities.size(); ++c) {
    std::vector<std::size_t> members = p.communities[c];
    std::sort(members.begin(), members.end());
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        if (members[i] == members[j] || known.contains({members[i], members[j]})) continue;
        out.push_back({members[i], members[j], c, std::nullopt});
      }
    }
  }
  return out;
}

struct FoldSplit {
  std::size_t fold_index = 0;
  PairSet train_edges;
  PairSet test_edges;
  std::uint64_t seed = 0;
};

/// Shuffles `pairs` with `seed` and slices them into `k` consecutive blocks;
/// block i is the test set of fold i. Block sizes differ by at most one.
inline std::vector<FoldSplit> kfold_split(const PairSet& pairs, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold split needs at least two folds");
  if (pairs.size() < k) {
    throw ConfigError("cannot split " + std::to_string(pairs.size()) + " pairs into " + std::to_string(k) + " folds");
  }
  std::vector<EntityPair> shuffled(pairs.begin(), pairs.end());
  std::mt19937_64 rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const std::size_t base = shuffled.size() / k, extra = shuffled.size() % k;
  std::vector<FoldSplit> folds(k);
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    folds[f].fold_index = f;
    folds[f].seed = seed;
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
      (i >= start && i < start + len ? folds[f].test_edges : folds[f].train_edges).insert(shuffled[i]);
    }
    start += len;
  }
  return folds;
}

enum class ThresholdMode { Quantile, Absolute };

struct ModelSettings {
  TrainConfig train;
  double threshold_level = 0.85;  // quantile level, or the cutoff itself in absolute mode
};

/// Everything the experiment harness needs besides the input graph.
struct ExperimentConfig {
  std::vector<ModelKind> models{kAllModels.begin(), kAllModels.end()};
  std::vector<PartitionAlgorithm> partitioners{kAllPartitioners.begin(), kAllPartitioners.end()};
  std::map<ModelKind, ModelSettings> settings;
  ThresholdMode threshold_mode = ThresholdMode::Quantile;
  std::optional<std::size_t> k;  // default: connected components of the thresholded graph
  double balance_tol = 0.1;
  bool kmeans_unit_normalize = true;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  bool train_on_closure = true;
  bool split_closed = false;
  bool metrics_on_thresholded = true;
  QualityOptions quality;
  unsigned threads = 1;

  ExperimentConfig() {
    for (ModelKind m : kAllModels) settings[m] = {TrainConfig::defaults_for(m), default_threshold_level(m)};
  }

  const ModelSettings& settings_for(ModelKind m) const { return settings.at(m); }
};

/// Trained model and similarity structure for one training graph.
struct ModelRun {
  ModelKind kind = ModelKind::TransE;
  KnowledgeGraph training_graph;
  PairSet known_pairs;  // RelatedTo standard pairs visible to training, after closure
  std::size_t leaked_pairs_removed = 0;
  EmbeddingModel model;
  TrainResult trace;
  std::vector<std::size_t> standards;
  SimilarityMatrix raw;
  SimilarityMatrix thresholded;
};

/// Removes `held_out` from `base`, materializes the closure, drops closure
/// edges that re-derive a held-out pair, trains the model, and builds the raw
/// and thresholded similarity matrices over the standards.
inline ModelRun prepare_model_run(const KnowledgeGraph& base, const PairSet& held_out, ModelKind kind,
                                  const ExperimentConfig& cfg) {
  ModelRun run;
  run.kind = kind;
  const KnowledgeGraph train_base = without_related_pairs(base, held_out);
  const KnowledgeGraph closed = materialize_closure(train_base);
  KnowledgeGraph clean = closed.filtered([&](const Edge& e) {
    if (closed.is_related_to(e) && held_out.contains(canonical_pair(e.subject, e.object))) {
      ++run.leaked_pairs_removed;
      return false;
    }
    return true;
  });
  clean.mark_closure_applied(true);
  run.known_pairs = related_pairs(clean);
  run.training_graph = cfg.train_on_closure ? std::move(clean) : train_base;

  const ModelSettings& ms = cfg.settings_for(kind);
  TrainConfig tc = ms.train;
  tc.seed = cfg.seed;
  run.model = init_model(kind, run.training_graph, tc);
  run.trace = train(run.model, run.training_graph, tc);

  run.standards = standards_of(base);
  if (run.standards.empty()) throw ConfigError("the graph has no Standard entities");
  run.raw = build_matrix(run.model, run.standards, &base);
  run.thresholded = cfg.threshold_mode == ThresholdMode::Quantile ? apply_threshold(run.raw, ms.threshold_level)
                                                                  : apply_absolute_cutoff(run.raw, ms.threshold_level);
  return run;
}

struct PartitionRun {
  Partition partition;
  std::size_t k_used = 0;
  std::vector<PredictedEdge> predictions;
  QualityReport quality;
};

inline Partition run_partitioner(const ModelRun& run, PartitionAlgorithm algo, const ExperimentConfig& cfg,
                                 std::size_t* k_used = nullptr) {
  const std::size_t n = run.standards.size();
  std::size_t k = cfg.k.value_or(default_k(run.thresholded));
  k = std::clamp<std::size_t>(k, 1, n);
  if (k_used) *k_used = algo == PartitionAlgorithm::SemEPStyle ? 0 : k;
  switch (algo) {
    case PartitionAlgorithm::KMeansStyle:
      return partition_kmeans(run.model, run.standards, k, cfg.seed, cfg.kmeans_unit_normalize);
    case PartitionAlgorithm::MetisStyle:
      return partition_multilevel(run.thresholded, k, cfg.balance_tol, cfg.seed);
    case PartitionAlgorithm::SemEPStyle:
      break;
  }
  return partition_semep_style(run.thresholded);
}

/// Partitions, scores quality, and expands communities into predictions.
inline PartitionRun partition_and_predict(const ModelRun& run, PartitionAlgorithm algo, const ExperimentConfig& cfg) {
  PartitionRun pr;
  pr.partition = run_partitioner(run, algo, cfg, &pr.k_used);
  pr.quality = evaluate_quality(pr.partition, cfg.metrics_on_thresholded ? run.thresholded : run.raw, cfg.quality);
  pr.predictions = homophily_predict(pr.partition, run.known_pairs);
  return pr;
}

struct FoldReport {
  std::size_t fold_index = 0;
  QualityReport quality;
  double recall = 0.0;
  double precision = 0.0;
  std::size_t test_size = 0;
  std::size_t predicted = 0;
  std::size_t hits = 0;          // predictions confirmed by the test set (or ideal graph)
  std::size_t test_recovered = 0;
  bool zero_predictions = false;
  std::size_t communities = 0;
  std::size_t k_used = 0;
  std::size_t leaked_pairs_removed = 0;
  double final_loss = 0.0;
  std::string error;
};

/// Marks each prediction's hit flag and fills recall/precision. Recall is the
/// share of test pairs predicted; precision counts a prediction as correct
/// when it is a test pair or, if supplied, a pair of the ideal graph.
inline void score_predictions(std::vector<PredictedEdge>& predictions, const PairSet& test, const PairSet* ideal,
                              FoldReport& rep) {
  rep.test_size = test.size();
  rep.predicted = predictions.size();
  rep.hits = rep.test_recovered = 0;
  for (PredictedEdge& p : predictions) {
    const EntityPair key{p.a, p.b};
    const bool in_test = test.contains(key);
    p.hit = in_test || (ideal && ideal->contains(key));
    rep.test_recovered += in_test;
    rep.hits += *p.hit;
  }
  rep.recall = test.empty() ? 0.0 : static_cast<double>(rep.test_recovered) / static_cast<double>(test.size());
  rep.zero_predictions = predictions.empty();
  rep.precision = predictions.empty() ? 0.0 : static_cast<double>(rep.hits) / static_cast<double>(predictions.size());
}

inline FoldReport evaluate_partitioner(const ModelRun& run, const FoldSplit& fold, PartitionAlgorithm algo,
                                       const ExperimentConfig& cfg, const PairSet* ideal = nullptr) {
  FoldReport rep;
  rep.fold_index = fold.fold_index;
  rep.leaked_pairs_removed = run.leaked_pairs_removed;
  rep.final_loss = run.trace.epoch_loss.empty() ? 0.0 : run.trace.epoch_loss.back();
  PartitionRun pr = partition_and_predict(run, algo, cfg);
  rep.quality = pr.quality;
  rep.communities = pr.partition.size();
  rep.k_used = pr.k_used;
  score_predictions(pr.predictions, fold.test_edges, ideal, rep);
  return rep;
}

/// One fold of one (model, partitioner) combination.
inline FoldReport evaluate_fold(const FoldSplit& fold, const KnowledgeGraph& base, ModelKind model,
                                PartitionAlgorithm algo, const ExperimentConfig& cfg, const PairSet* ideal = nullptr) {
  try {
    const ModelRun run = prepare_model_run(base, fold.test_edges, model, cfg);
    return evaluate_partitioner(run, fold, algo, cfg, ideal);
  } catch (const Error& e) {
    throw Error("fold " + std::to_string(fold.fold_index) + ": " + e.what());
  }
}

struct FoldSummary {
  double recall = 0.0;
  double precision = 0.0;
  QualityReport quality;
  double predicted = 0.0;
};

struct CombinationReport {
  ModelKind model = ModelKind::TransE;
  PartitionAlgorithm partitioner = PartitionAlgorithm::SemEPStyle;
  double threshold_level = 0.0;
  std::optional<std::size_t> k;
  std::vector<FoldReport> folds;
  FoldSummary mean;
  FoldSummary stddev;  // population standard deviation over folds
  std::string error;

  std::string id() const { return std::string(to_string(model)) + "+" + std::string(to_string(partitioner)); }
};

struct EvaluationReport {
  std::size_t fold_count = 0;
  std::size_t pair_count = 0;
  bool split_closed = false;
  std::vector<CombinationReport> combinations;
};

namespace detail {

inline std::vector<double FoldSummary::*> summary_scalars() {
  return {&FoldSummary::recall, &FoldSummary::precision, &FoldSummary::predicted};
}

inline std::vector<double QualityReport::*> quality_fields() {
  return {&QualityReport::inv_conductance, &QualityReport::performance, &QualityReport::inv_total_cut,
          &QualityReport::modularity_scaled, &QualityReport::modularity_raw, &QualityReport::coverage};
}

inline FoldSummary as_summary(const FoldReport& f) {
  return {f.recall, f.precision, f.quality, static_cast<double>(f.predicted)};
}

inline void aggregate(CombinationReport& c) {
  const double n = static_cast<double>(c.folds.size());
  if (c.folds.empty()) return;
  FoldSummary mean, var;
  for (const auto& f : c.folds) {
    const FoldSummary s = as_summary(f);
    for (auto field : summary_scalars()) mean.*field += s.*field / n;
    for (auto field : quality_fields()) mean.quality.*field += s.quality.*field / n;
  }
  for (const auto& f : c.folds) {
    const FoldSummary s = as_summary(f);
    for (auto field : summary_scalars()) var.*field += (s.*field - mean.*field) * (s.*field - mean.*field) / n;
    for (auto field : quality_fields()) {
      const double d = s.quality.*field - mean.quality.*field;
      var.quality.*field += d * d / n;
    }
  }
  for (auto field : summary_scalars()) var.*field = std::sqrt(var.*field);
  for (auto field : quality_fields()) var.quality.*field = std::sqrt(var.quality.*field);
  c.mean = mean;
  c.stddev = var;
}

/// Runs `tasks` on up to `threads` workers; each task writes only its own slot.
inline void run_tasks(std::vector<std::function<void()>>& tasks, unsigned threads) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
  if (threads <= 1) {
    for (auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) tasks[i]();
    });
  }
}

}  // namespace detail

/// The rows of `split_closed ? closure(base) : base` that the folds split.
inline PairSet experiment_pairs(const KnowledgeGraph& base, const ExperimentConfig& cfg) {
  return cfg.split_closed ? related_pairs(materialize_closure(base)) : related_pairs(base);
}

/// k-fold cross-validation over every requested (model x partitioner)
/// combination. Each model is trained once per fold and shared by the
/// partitioners. A failing fold marks only its own combinations as failed.
inline EvaluationReport run_experiment(const KnowledgeGraph& base, const ExperimentConfig& cfg,
                                       const PairSet* ideal = nullptr) {
  const PairSet pairs = experiment_pairs(base, cfg);
  const auto folds = kfold_split(pairs, cfg.folds, cfg.seed);
  EvaluationReport report;
  report.fold_count = folds.size();
  report.pair_count = pairs.size();
  report.split_closed = cfg.split_closed;

  const std::size_t nm = cfg.models.size(), np = cfg.partitioners.size(), nf = folds.size();
  // results[model][partitioner][fold]
  std::vector<std::vector<std::vector<FoldReport>>> results(
      nm, std::vector<std::vector<FoldReport>>(np, std::vector<FoldReport>(nf)));
  std::vector<std::function<void()>> tasks;
  for (std::size_t mi = 0; mi < nm; ++mi) {
    for (std::size_t fi = 0; fi < nf; ++fi) {
      tasks.emplace_back([&, mi, fi] {
        std::optional<ModelRun> run;
        std::string model_error;
        try {
          run.emplace(prepare_model_run(base, folds[fi].test_edges, cfg.models[mi], cfg));
        } catch (const std::exception& e) {
          model_error = e.what();
        }
        for (std::size_t pi = 0; pi < np; ++pi) {
          FoldReport& slot = results[mi][pi][fi];
          slot.fold_index = fi;
          if (!run) {
            slot.error = "fold " + std::to_string(fi) + ": " + model_error;
            continue;
          }
          try {
            slot = evaluate_partitioner(*run, folds[fi], cfg.partitioners[pi], cfg, ideal);
          } catch (const std::exception& e) {
            slot.error = "fold " + std::to_string(fi) + ": " + e.what();
          }
        }
      });
    }
  }
  detail::run_tasks(tasks, cfg.threads);

  for (std::size_t mi = 0; mi < nm; ++mi) {
    for (std::size_t pi = 0; pi < np; ++pi) {
      CombinationReport c;
      c.model = cfg.models[mi];
      c.partitioner = cfg.partitioners[pi];
      c.threshold_level = cfg.settings_for(c.model).threshold_level;
      c.k = cfg.k;
      for (auto& f : results[mi][pi]) {
        if (!f.error.empty() && c.error.empty()) c.error = f.error;
      }
      c.folds = std::move(results[mi][pi]);
      if (c.error.empty()) detail::aggregate(c);
      report.combinations.push_back(std::move(c));
    }
  }
  return report;
}

}  // namespace kgrd

#endif  // KGRD_PREDICT_HPP
