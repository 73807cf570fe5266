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

#ifndef KGRD_PIPELINE_HPP
#define KGRD_PIPELINE_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kgrd/communities.hpp"
#include "kgrd/config.hpp"
#include "kgrd/embed.hpp"
#include "kgrd/error.hpp"
#include "kgrd/io.hpp"
#include "kgrd/kg.hpp"
#include "kgrd/predict.hpp"
#include "kgrd/quality.hpp"
#include "kgrd/sim.hpp"

namespace kgrd {

/// Process exit code for an exception: 2 for input or configuration
/// problems, 1 for anything else.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ConfigError*>(&e)) return 2;
  return 1;
}

/// Canonical "key = value" rendering of a configuration. The output
/// directory and thread count are left out; they do not affect results.
inline std::string describe_config(const PipelineConfig& cfg) {
  const ExperimentConfig& x = cfg.experiment;
  std::ostringstream o;
  auto join = [](const auto& items) {
    std::string s;
    for (const auto& it : items) s += (s.empty() ? "" : ",") + std::string(to_string(it));
    return s;
  };
  o << "input = " << cfg.input_path << '\n';
  o << "ideal = " << cfg.ideal_path << '\n';
  o << "models = " << join(x.models) << '\n';
  o << "partitioners = " << join(x.partitioners) << '\n';
  o << "folds = " << x.folds << '\n';
  o << "seed = " << x.seed << '\n';
  o << "k = " << (x.k ? std::to_string(*x.k) : std::string("auto")) << '\n';
  o << "balance_tol = " << format_double(x.balance_tol) << '\n';
  o << "threshold_mode = " << (x.threshold_mode == ThresholdMode::Quantile ? "quantile" : "absolute") << '\n';
  o << "train_on = " << (x.train_on_closure ? "closure" : "base") << '\n';
  o << "split_on = " << (x.split_closed ? "closed" : "base") << '\n';
  o << "metrics_on = " << (x.metrics_on_thresholded ? "thresholded" : "raw") << '\n';
  o << "conductance = " << (x.quality.conductance == ConductanceAggregation::Mean ? "mean" : "max") << '\n';
  o << "performance = " << (x.quality.performance == PerformanceMode::Weighted ? "weighted" : "unweighted") << '\n';
  o << "kmeans_normalize = " << (x.kmeans_unit_normalize ? "true" : "false") << '\n';
  o << "cross_validation = " << (cfg.cross_validation ? "true" : "false") << '\n';
  o << "iri.related_to = " << cfg.labels.related_to << '\n';
  o << "iri.type = " << cfg.labels.type << '\n';
  o << "iri.classified_as = " << cfg.labels.classified_as << '\n';
  o << "iri.is_layer_of = " << cfg.labels.is_layer_of << '\n';
  o << "iri.standard = " << cfg.labels.standard_type << '\n';
  o << "iri.framework = " << cfg.labels.framework_type << '\n';
  o << "iri.layer = " << cfg.labels.layer_type << '\n';
  for (const auto& [kind, ms] : x.settings) {
    const TrainConfig& t = ms.train;
    o << '[' << to_string(kind) << "]\n";
    o << "dim = " << t.embedding_dim << '\n';
    o << "relation_dim = " << t.relation_dim << '\n';
    o << "epochs = " << t.epochs << '\n';
    o << "batch_size = " << t.batch_size << '\n';
    o << "learning_rate = " << format_double(t.learning_rate) << '\n';
    o << "margin = " << format_double(t.margin) << '\n';
    o << "score_norm = " << (t.score_norm == ScoreNorm::L1 ? "L1" : "L2") << '\n';
    o << "threshold = " << format_double(ms.threshold_level) << '\n';
  }
  return o.str();
}

struct StageStatus {
  std::string name;
  bool ok = true;
  std::string message;
};

struct PipelineResult {
  int exit_code = 0;
  std::vector<StageStatus> stages;
  std::size_t artifacts = 0;
};

/// Maps the RelatedTo pairs of `ideal`, after closing it, onto the entity
/// indices of `g` by IRI. Only pairs of standards of `g` are kept, so the
/// ideal graph need not carry type triples.
inline PairSet map_ideal_pairs(const KnowledgeGraph& ideal, const KnowledgeGraph& g) {
  PairSet out;
  const KnowledgeGraph closed = materialize_closure(ideal);
  for (const Edge& e : closed.edges()) {
    if (!closed.is_related_to(e)) continue;
    auto ia = g.find_entity(closed.entities()[e.subject].iri);
    auto ib = g.find_entity(closed.entities()[e.object].iri);
    if (ia && ib && *ia != *ib && g.is_standard(*ia) && g.is_standard(*ib)) out.insert(canonical_pair(*ia, *ib));
  }
  return out;
}

/// Ingest, closure, training, similarity, thresholding, partitioning,
/// prediction and cross-validated evaluation, writing every artifact below
/// cfg.output_dir together with a MANIFEST of stage states and digests.
/// A failing stage is recorded and later stages that do not depend on it
/// still run.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream& log) {
  namespace fs = std::filesystem;
  PipelineResult result;
  const fs::path root(cfg.output_dir);
  std::map<std::string, std::string> digests;  // relative path -> fnv1a64
  std::string input_bytes;

  auto emit = [&](const fs::path& rel, const std::string& content) {
    write_file(root / rel, content);
    digests[rel.generic_string()] = hex64(fnv1a64(content));
  };
  auto stage = [&](const std::string& name, auto&& body) -> bool {
    try {
      body();
      result.stages.push_back({name, true, "complete"});
      return true;
    } catch (const std::exception& e) {
      result.stages.push_back({name, false, e.what()});
      if (result.exit_code == 0) result.exit_code = exit_code_for(e);
      log << "stage " << name << " failed: " << e.what() << '\n';
      return false;
    }
  };

  fs::create_directories(root);
  std::optional<KnowledgeGraph> base;
  std::optional<PairSet> ideal;
  const bool ingested = stage("ingest", [&] {
    if (cfg.input_path.empty()) throw ConfigError("no input file configured");
    input_bytes = read_file(cfg.input_path);
    std::istringstream in(input_bytes);
    IngestStats st;
    base = parse_ntriples(in, cfg.labels, &st);
    for (const auto& w : st.warnings) log << "warning: " << w << '\n';
    std::ostringstream idx;
    write_entity_index(*base, idx);
    emit("graph/entities.tsv", idx.str());
    const auto counts = related_to_counts(*base);
    log << base->entity_count() << " entities, " << standards_of(*base).size() << " standards, " << counts.directed
        << " relatedTo edges (" << counts.undirected << " pairs)\n";
    if (!cfg.ideal_path.empty()) {
      std::ifstream is(cfg.ideal_path);
      if (!is) throw ConfigError("cannot open ideal graph " + cfg.ideal_path);
      ideal = map_ideal_pairs(parse_ntriples(is, cfg.labels), *base);
    }
  });

  if (ingested) {
    stage("closure", [&] {
      const KnowledgeGraph closed = materialize_closure(*base);
      std::ostringstream nt;
      write_ntriples(closed, nt);
      emit("graph/closed.nt", nt.str());
      const auto c = related_to_counts(closed);
      log << "closure: " << c.directed << " directed relatedTo instances (" << c.undirected << " pairs)\n";
    });

    const ExperimentConfig& x = cfg.experiment;
    for (ModelKind kind : x.models) {
      const std::string mname(to_string(kind));
      std::optional<ModelRun> run;
      const bool trained = stage(mname + "/train", [&] {
        run.emplace(prepare_model_run(*base, {}, kind, x));
        std::ostringstream emb, rel, loss, raw, thr;
        write_embeddings(run->model, run->training_graph, emb);
        write_relation_params(run->model, run->training_graph, rel);
        write_loss_trace(run->trace, loss);
        emit(fs::path(mname) / "embeddings.tsv", emb.str());
        emit(fs::path(mname) / "relations.tsv", rel.str());
        emit(fs::path(mname) / "loss.tsv", loss.str());
        if (!run->model.entity_projections.empty()) {
          std::ostringstream proj;
          write_entity_projections(run->model, run->training_graph, proj);
          emit(fs::path(mname) / "entity_projections.tsv", proj.str());
        }
        write_similarity(run->raw, *base, raw);
        write_similarity(run->thresholded, *base, thr);
        emit(fs::path(mname) / "similarity.tsv", raw.str());
        emit(fs::path(mname) / "similarity_thresholded.tsv", thr.str());
        const auto tri = upper_triangle(run->raw);
        if (tri.size() >= 2) {
          try {
            std::ostringstream dens;
            write_density(kde(tri), dens);
            emit(fs::path(mname) / "density.tsv", dens.str());
          } catch (const NumericError& e) {
            log << mname << ": density skipped: " << e.what() << '\n';
          }
        }
        log << mname << ": final loss " << format_double(run->trace.epoch_loss.empty() ? 0.0 : run->trace.epoch_loss.back())
            << ", cutoff " << format_double(run->thresholded.cutoff_value.value_or(0.0)) << '\n';
      });
      if (!trained) continue;
      for (PartitionAlgorithm algo : x.partitioners) {
        const std::string pname(to_string(algo));
        stage(mname + "/" + pname, [&] {
          PartitionRun pr = partition_and_predict(*run, algo, x);
          if (ideal) {
            for (auto& p : pr.predictions) p.hit = ideal->contains({p.a, p.b});
          }
          for (const auto& w : pr.partition.warnings) log << mname << "/" << pname << ": warning: " << w << '\n';
          const fs::path dir = fs::path(mname) / pname;
          std::ostringstream part, preds, ext;
          write_partition(pr.partition, *base, part);
          write_predictions(pr.predictions, *base, preds);
          write_ntriples(extended_graph(*base, pr.predictions), ext);
          emit(dir / "partition.tsv", part.str());
          emit(dir / "partition.json", partition_json(pr.partition).dump(2) + "\n");
          emit(dir / "predictions.tsv", preds.str());
          emit(dir / "quality.json", quality_json(pr.quality).dump(2) + "\n");
          emit(dir / "extended.nt", ext.str());
          log << mname << "/" << pname << ": " << pr.partition.size() << " communities, " << pr.predictions.size()
              << " predicted relations\n";
        });
      }
    }

    if (cfg.cross_validation) {
      stage("evaluate", [&] {
        const EvaluationReport rep = run_experiment(*base, x, ideal ? &*ideal : nullptr);
        std::ostringstream tsv, recall, quality;
        write_report_tsv(rep, tsv);
        write_recall_tsv(rep, recall);
        write_quality_summary_tsv(rep, quality);
        emit("report.json", report_json(rep).dump(2) + "\n");
        emit("report.tsv", tsv.str());
        emit("recall.tsv", recall.str());
        emit("quality.tsv", quality.str());
        std::string failed;
        for (const auto& c : rep.combinations) {
          if (c.error.empty()) {
            log << c.id() << ": recall " << format_double(c.mean.recall) << ", precision "
                << format_double(c.mean.precision) << '\n';
          } else {
            log << c.id() << ": failed: " << c.error << '\n';
            failed += (failed.empty() ? "" : ", ") + c.id();
          }
        }
        if (!failed.empty()) throw Error("combinations failed: " + failed);
      });
    }
  }

  std::ostringstream manifest;
  manifest << "# kgrd pipeline manifest\n";
  manifest << "[config]\n" << describe_config(cfg);
  manifest << "[input]\n";
  manifest << "path = " << cfg.input_path << '\n';
  manifest << "bytes = " << input_bytes.size() << '\n';
  manifest << "fnv1a64 = " << hex64(fnv1a64(input_bytes)) << '\n';
  manifest << "[stages]\n";
  for (const auto& s : result.stages) manifest << s.name << " = " << (s.ok ? "complete" : "failed: " + s.message) << '\n';
  manifest << "[artifacts]\n";
  for (const auto& [path, digest] : digests) manifest << path << " = " << digest << '\n';
  manifest << "[status]\nexit_code = " << result.exit_code << '\n';
  write_file(root / "MANIFEST", manifest.str());
  result.artifacts = digests.size();
  return result;
}

}  // namespace kgrd

#endif  // KGRD_PIPELINE_HPP
