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


// kgrd: relation discovery over typed knowledge graphs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kgrd/kgrd.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config_path;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
};

kgrd::PipelineConfig load_config(const Common& c) {
  kgrd::PipelineConfig cfg;
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path);
    if (!in) throw kgrd::ConfigError("cannot open config " + c.config_path);
    cfg = kgrd::parse_config(in);
    // Relative data paths in a config file are relative to that file.
    const fs::path base = fs::path(c.config_path).parent_path();
    for (std::string* p : {&cfg.input_path, &cfg.ideal_path}) {
      if (!p->empty() && fs::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
    }
  }
  kgrd::apply_env_overrides(cfg);
  if (c.threads) cfg.experiment.threads = *c.threads;
  if (c.seed) cfg.experiment.seed = *c.seed;
  return cfg;
}

kgrd::KnowledgeGraph load_graph(const std::string& path, const kgrd::LabelMap& labels,
                                kgrd::IngestStats* stats = nullptr) {
  std::ifstream in(path);
  if (!in) throw kgrd::ConfigError("cannot open " + path);
  kgrd::IngestStats local;
  kgrd::KnowledgeGraph g = kgrd::parse_ntriples(in, labels, stats ? stats : &local);
  for (const auto& w : (stats ? stats : &local)->warnings) std::cerr << "warning: " << w << '\n';
  return g;
}

template <class Fn>
void write_to(const fs::path& p, Fn&& fn) {
  std::ostringstream os;
  fn(os);
  kgrd::write_file(p, os.str());
}

// Entity vectors indexed like `g`, read back from an embeddings table.
kgrd::EmbeddingModel model_from_table(const kgrd::EmbeddingTable& t, const kgrd::KnowledgeGraph& g) {
  kgrd::EmbeddingModel m;
  m.entities = kgrd::Matrix(g.entity_count(), t.vectors.cols());
  for (std::size_t i = 0; i < t.iris.size(); ++i) {
    auto id = g.find_entity(t.iris[i]);
    if (!id) throw kgrd::ConfigError("embedding for unknown entity " + t.iris[i]);
    auto src = t.vectors.row(i);
    std::copy(src.begin(), src.end(), m.entities.row(*id).begin());
  }
  return m;
}

kgrd::EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw kgrd::ConfigError("cannot open " + path);
  return kgrd::read_embeddings(in);
}

int cmd_ingest(const Common& c, const std::string& input, const std::string& out) {
  const kgrd::PipelineConfig cfg = load_config(c);
  kgrd::IngestStats st;
  const kgrd::KnowledgeGraph g = load_graph(input, cfg.labels, &st);
  const auto counts = kgrd::related_to_counts(g);
  std::cout << kgrd::standards_of(g).size() << " standards, " << counts.directed << " relatedTo edges\n";
  std::cout << g.entity_count() << " entities, " << g.edges().size() << " edges, " << st.skipped_literals
            << " literal triples skipped, " << st.duplicate_triples << " duplicates\n";
  if (!out.empty()) {
    write_to(fs::path(out) / "entities.tsv", [&](std::ostream& os) { kgrd::write_entity_index(g, os); });
    write_to(fs::path(out) / "graph.nt", [&](std::ostream& os) { kgrd::write_ntriples(g, os); });
  }
  return 0;
}

int cmd_closure(const Common& c, const std::string& input, const std::string& out) {
  const kgrd::PipelineConfig cfg = load_config(c);
  const kgrd::KnowledgeGraph g = kgrd::materialize_closure(load_graph(input, cfg.labels));
  const auto counts = kgrd::related_to_counts(g);
  std::cout << counts.directed << " relatedTo edges after closure (" << counts.undirected << " pairs)\n";
  if (out.empty()) {
    kgrd::write_ntriples(g, std::cout);
  } else {
    write_to(out, [&](std::ostream& os) { kgrd::write_ntriples(g, os); });
  }
  return 0;
}

int cmd_train(const Common& c, const std::string& input, const std::string& model_name, const std::string& out) {
  const kgrd::PipelineConfig cfg = load_config(c);
  const kgrd::ModelKind kind = kgrd::parse_model_kind(model_name);
  const kgrd::KnowledgeGraph base = load_graph(input, cfg.labels);
  const kgrd::ModelRun run = kgrd::prepare_model_run(base, {}, kind, cfg.experiment);
  const fs::path dir(out);
  write_to(dir / "embeddings.tsv", [&](std::ostream& os) { kgrd::write_embeddings(run.model, run.training_graph, os); });
  write_to(dir / "relations.tsv",
           [&](std::ostream& os) { kgrd::write_relation_params(run.model, run.training_graph, os); });
  write_to(dir / "loss.tsv", [&](std::ostream& os) { kgrd::write_loss_trace(run.trace, os); });
  if (!run.model.entity_projections.empty()) {
    write_to(dir / "entity_projections.tsv",
             [&](std::ostream& os) { kgrd::write_entity_projections(run.model, run.training_graph, os); });
  }
  std::cout << model_name << ": " << run.trace.epoch_loss.size() << " epochs, final loss "
            << kgrd::format_double(run.trace.epoch_loss.empty() ? 0.0 : run.trace.epoch_loss.back()) << '\n';
  return 0;
}

int cmd_similarity(const Common& c, const std::string& input, const std::string& embeddings,
                   const std::string& model_name, std::optional<double> level, const std::string& out) {
  const kgrd::PipelineConfig cfg = load_config(c);
  const kgrd::KnowledgeGraph g = load_graph(input, cfg.labels);
  const kgrd::EmbeddingModel m = model_from_table(load_embeddings(embeddings), g);
  const kgrd::ModelKind kind = kgrd::parse_model_kind(model_name);
  const auto standards = kgrd::standards_of(g);
  const kgrd::SimilarityMatrix raw = kgrd::build_matrix(m, standards, &g, cfg.experiment.threads);
  const double lv = level.value_or(cfg.experiment.settings_for(kind).threshold_level);
  const kgrd::SimilarityMatrix thr = cfg.experiment.threshold_mode == kgrd::ThresholdMode::Quantile
                                         ? kgrd::apply_threshold(raw, lv)
                                         : kgrd::apply_absolute_cutoff(raw, lv);
  const fs::path dir(out);
  write_to(dir / "similarity.tsv", [&](std::ostream& os) { kgrd::write_similarity(raw, g, os); });
  write_to(dir / "similarity_thresholded.tsv", [&](std::ostream& os) { kgrd::write_similarity(thr, g, os); });
  const auto tri = kgrd::upper_triangle(raw);
  if (tri.size() >= 2) {
    write_to(dir / "density.tsv", [&](std::ostream& os) { kgrd::write_density(kgrd::kde(tri), os); });
  }
  std::cout << standards.size() << " standards, cutoff " << kgrd::format_double(*thr.cutoff_value) << '\n';
  return 0;
}

int cmd_partition(const Common& c, const std::string& input, const std::string& similarity,
                  const std::string& embeddings, const std::string& algo_name, std::optional<std::size_t> k,
                  const std::string& out) {
  const kgrd::PipelineConfig cfg = load_config(c);
  const kgrd::KnowledgeGraph g = load_graph(input, cfg.labels);
  std::ifstream sin(similarity);
  if (!sin) throw kgrd::ConfigError("cannot open " + similarity);
  const kgrd::SimilarityMatrix m = kgrd::read_similarity(sin, g);
  const kgrd::PartitionAlgorithm algo = kgrd::parse_partition_algorithm(algo_name);
  const std::size_t kk = std::clamp<std::size_t>(k.value_or(cfg.experiment.k.value_or(kgrd::default_k(m))), 1,
                                                 std::max<std::size_t>(1, m.size()));
  kgrd::Partition p;
  switch (algo) {
    case kgrd::PartitionAlgorithm::KMeansStyle: {
      if (embeddings.empty()) throw kgrd::ConfigError("kmeans needs --embeddings");
      const kgrd::EmbeddingModel em = model_from_table(load_embeddings(embeddings), g);
      p = kgrd::partition_kmeans(em, m.ids, kk, cfg.experiment.seed, cfg.experiment.kmeans_unit_normalize);
      break;
    }
    case kgrd::PartitionAlgorithm::MetisStyle:
      p = kgrd::partition_multilevel(m, kk, cfg.experiment.balance_tol, cfg.experiment.seed);
      break;
    case kgrd::PartitionAlgorithm::SemEPStyle:
      p = kgrd::partition_semep_style(m);
      break;
  }
  for (const auto& w : p.warnings) std::cerr << "warning: " << w << '\n';
  const kgrd::QualityReport q = kgrd::evaluate_quality(p, m, cfg.experiment.quality);
  const fs::path dir(out);
  write_to(dir / "partition.tsv", [&](std::ostream& os) { kgrd::write_partition(p, g, os); });
  kgrd::write_file(dir / "partition.json", kgrd::partition_json(p).dump(2) + "\n");
  kgrd::write_file(dir / "quality.json", kgrd::quality_json(q).dump(2) + "\n");
  std::cout << p.size() << " communities\n";
  return 0;
}

int cmd_predict(const Common& c, const std::string& input, const std::string& partition, const std::string& ideal,
                const std::string& out) {
  const kgrd::PipelineConfig cfg = load_config(c);
  const kgrd::KnowledgeGraph g = load_graph(input, cfg.labels);
  std::ifstream pin(partition);
  if (!pin) throw kgrd::ConfigError("cannot open " + partition);
  const kgrd::Partition p = kgrd::read_partition(pin, g);
  auto preds = kgrd::homophily_predict(p, kgrd::related_pairs(kgrd::materialize_closure(g)));
  std::size_t hits = 0;
  if (!ideal.empty()) {
    const kgrd::PairSet truth = kgrd::map_ideal_pairs(load_graph(ideal, cfg.labels), g);
    for (auto& e : preds) {
      e.hit = truth.contains({e.a, e.b});
      hits += *e.hit;
    }
  }
  const fs::path dir(out);
  write_to(dir / "predictions.tsv", [&](std::ostream& os) { kgrd::write_predictions(preds, g, os); });
  write_to(dir / "extended.nt", [&](std::ostream& os) { kgrd::write_ntriples(kgrd::extended_graph(g, preds), os); });
  std::cout << preds.size() << " predicted relations";
  if (!ideal.empty()) std::cout << ", " << hits << " confirmed by the ideal graph";
  std::cout << '\n';
  return 0;
}

int cmd_evaluate(const Common& c, const std::string& input, const std::string& out) {
  kgrd::PipelineConfig cfg = load_config(c);
  if (!input.empty()) cfg.input_path = input;
  if (!out.empty()) cfg.output_dir = out;
  if (cfg.input_path.empty()) throw kgrd::ConfigError("no input file given");
  const kgrd::KnowledgeGraph base = load_graph(cfg.input_path, cfg.labels);
  std::optional<kgrd::PairSet> ideal;
  if (!cfg.ideal_path.empty()) ideal = kgrd::map_ideal_pairs(load_graph(cfg.ideal_path, cfg.labels), base);
  const kgrd::EvaluationReport rep = kgrd::run_experiment(base, cfg.experiment, ideal ? &*ideal : nullptr);
  const fs::path dir(cfg.output_dir);
  kgrd::write_file(dir / "report.json", kgrd::report_json(rep).dump(2) + "\n");
  write_to(dir / "report.tsv", [&](std::ostream& os) { kgrd::write_report_tsv(rep, os); });
  write_to(dir / "recall.tsv", [&](std::ostream& os) { kgrd::write_recall_tsv(rep, os); });
  write_to(dir / "quality.tsv", [&](std::ostream& os) { kgrd::write_quality_summary_tsv(rep, os); });
  int code = 0;
  for (const auto& comb : rep.combinations) {
    if (!comb.error.empty()) {
      std::cerr << comb.id() << ": " << comb.error << '\n';
      code = 1;
      continue;
    }
    std::cout << comb.id() << "\trecall " << kgrd::format_double(comb.mean.recall) << "\tprecision "
              << kgrd::format_double(comb.mean.precision) << '\n';
  }
  return code;
}

int cmd_pipeline(const Common& c, const std::string& input, const std::string& out) {
  kgrd::PipelineConfig cfg = load_config(c);
  if (!input.empty()) cfg.input_path = input;
  if (!out.empty()) cfg.output_dir = out;
  const kgrd::PipelineResult r = kgrd::run_pipeline(cfg, std::cout);
  return r.exit_code;
}

int cmd_synth(const kgrd::SynthConfig& sc, const std::string& out) {
  const kgrd::KnowledgeGraph g = kgrd::synth_graph(sc);
  if (out.empty()) {
    kgrd::write_ntriples(g, std::cout);
  } else {
    write_to(out, [&](std::ostream& os) { kgrd::write_ntriples(g, os); });
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgrd: discover relations between knowledge-graph entities"};
  app.require_subcommand(1);
  Common common;
  app.add_option("-c,--config", common.config_path, "key = value configuration file");
  app.add_option("--threads", common.threads, "worker threads (1 is bitwise reproducible)");
  app.add_option("--seed", common.seed, "random seed");

  std::string input, out, model = "TransE", embeddings, similarity, algorithm = "semep", partition, ideal;
  std::optional<double> level;
  std::optional<std::size_t> k;
  kgrd::SynthConfig sc;

  auto* ingest = app.add_subcommand("ingest", "parse N-Triples and print counts");
  ingest->add_option("input", input, "N-Triples file")->required();
  ingest->add_option("-o,--out", out, "directory for entities.tsv and graph.nt");

  auto* closure = app.add_subcommand("closure", "materialize the symmetric-transitive RelatedTo closure");
  closure->add_option("input", input)->required();
  closure->add_option("-o,--out", out, "output N-Triples file (default stdout)");

  auto* train = app.add_subcommand("train", "train one embedding model on the closed graph");
  train->add_option("input", input)->required();
  train->add_option("-m,--model", model, "TransE, TransH, TransR or TransD");
  train->add_option("-o,--out", out)->required();

  auto* sim = app.add_subcommand("similarity", "cosine similarity of standards and thresholding");
  sim->add_option("input", input)->required();
  sim->add_option("-e,--embeddings", embeddings)->required();
  sim->add_option("-m,--model", model, "model whose default threshold applies");
  sim->add_option("-t,--threshold", level, "threshold level");
  sim->add_option("-o,--out", out)->required();

  auto* part = app.add_subcommand("partition", "partition standards into communities");
  part->add_option("input", input)->required();
  part->add_option("-s,--similarity", similarity, "similarity matrix TSV")->required();
  part->add_option("-e,--embeddings", embeddings, "embeddings TSV (kmeans only)");
  part->add_option("-a,--algorithm", algorithm, "semep, metis or kmeans");
  part->add_option("-k", k, "number of communities (default: connected components)");
  part->add_option("-o,--out", out)->required();

  auto* pred = app.add_subcommand("predict", "homophily prediction inside communities");
  pred->add_option("input", input)->required();
  pred->add_option("-p,--partition", partition)->required();
  pred->add_option("--ideal", ideal, "ideal graph used to mark hits");
  pred->add_option("-o,--out", out)->required();

  auto* eval = app.add_subcommand("evaluate", "k-fold cross-validation over all configured combinations");
  eval->add_option("input", input);
  eval->add_option("-o,--out", out);

  auto* pipe = app.add_subcommand("pipeline", "run every stage and write all artifacts");
  pipe->add_option("input", input);
  pipe->add_option("-o,--out", out);

  auto* synth = app.add_subcommand("synth", "generate a planted-partition graph");
  synth->add_option("--blocks", sc.blocks);
  synth->add_option("--block-size", sc.block_size);
  synth->add_option("--intra", sc.intra_p);
  synth->add_option("--inter", sc.inter_p);
  synth->add_option("--seed", sc.seed);
  synth->add_option("-o,--out", out, "output N-Triples file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(common, input, out);
    if (*closure) return cmd_closure(common, input, out);
    if (*train) return cmd_train(common, input, model, out);
    if (*sim) return cmd_similarity(common, input, embeddings, model, level, out);
    if (*part) return cmd_partition(common, input, similarity, embeddings, algorithm, k, out);
    if (*pred) return cmd_predict(common, input, partition, ideal, out);
    if (*eval) return cmd_evaluate(common, input, out);
    if (*pipe) return cmd_pipeline(common, input, out);
    if (*synth) return cmd_synth(sc, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kgrd::exit_code_for(e);
  }
  return 0;
}
