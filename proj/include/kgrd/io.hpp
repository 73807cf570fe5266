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

#ifndef KGRD_IO_HPP
#define KGRD_IO_HPP

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgrd/communities.hpp"
#include "kgrd/config.hpp"
#include "kgrd/embed.hpp"
#include "kgrd/error.hpp"
#include "kgrd/kg.hpp"
#include "kgrd/predict.hpp"
#include "kgrd/quality.hpp"
#include "kgrd/sim.hpp"

namespace kgrd {

/// Renders `v` with 17 significant digits.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

/// 64-bit FNV-1a digest.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << content;
  if (!out) throw Error("write failed for " + p.string());
}

namespace detail {

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

inline double parse_double(const std::string& s, std::size_t lineno) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(lineno, "invalid number '" + s + "'");
  return v;
}

inline void write_rows(std::ostream& out, std::string_view name, std::span<const double> a,
                       std::span<const double> b = {}) {
  out << name;
  for (double v : a) out << '\t' << format_double(v);
  for (double v : b) out << '\t' << format_double(v);
  out << '\n';
}

}  // namespace detail

// --- embeddings -------------------------------------------------------------

/// One row per entity: iri followed by the entity vector.
inline void write_embeddings(const EmbeddingModel& m, const KnowledgeGraph& g, std::ostream& out) {
  for (std::size_t e = 0; e < m.entity_count(); ++e) detail::write_rows(out, g.entities()[e].iri, m.entities.row(e));
}

/// One row per relation: iri, the relation vector, then the model-specific
/// relation parameters (TransH normal, flattened TransR matrix, TransD
/// projection vector).
inline void write_relation_params(const EmbeddingModel& m, const KnowledgeGraph& g, std::ostream& out) {
  for (std::size_t r = 0; r < m.relation_count(); ++r) {
    std::span<const double> extra;
    if (!m.normals.empty()) extra = m.normals.row(r);
    if (!m.projections.empty()) extra = m.projections.row(r);
    if (!m.relation_projections.empty()) extra = m.relation_projections.row(r);
    detail::write_rows(out, g.relations()[r].iri, m.relations.row(r), extra);
  }
}

/// TransD entity projection vectors, same layout as the embeddings file.
inline void write_entity_projections(const EmbeddingModel& m, const KnowledgeGraph& g, std::ostream& out) {
  for (std::size_t e = 0; e < m.entity_projections.rows(); ++e) {
    detail::write_rows(out, g.entities()[e].iri, m.entity_projections.row(e));
  }
}

inline void write_loss_trace(const TrainResult& r, std::ostream& out) {
  out << "epoch\tmean_loss\n";
  for (std::size_t i = 0; i < r.epoch_loss.size(); ++i) out << i << '\t' << format_double(r.epoch_loss[i]) << '\n';
}

struct EmbeddingTable {
  std::vector<std::string> iris;
  Matrix vectors;
};

inline EmbeddingTable read_embeddings(std::istream& in) {
  EmbeddingTable t;
  std::vector<double> values;
  std::size_t dim = 0, lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cells = detail::split_tabs(line);
    if (cells.size() < 2) throw ParseError(lineno, "expected an iri and at least one value");
    if (dim == 0) dim = cells.size() - 1;
    if (cells.size() - 1 != dim) throw ParseError(lineno, "inconsistent embedding dimension");
    t.iris.push_back(cells[0]);
    for (std::size_t i = 1; i < cells.size(); ++i) values.push_back(detail::parse_double(cells[i], lineno));
  }
  t.vectors = Matrix(t.iris.size(), dim);
  std::copy(values.begin(), values.end(), t.vectors.data().begin());
  return t;
}

// --- similarity -------------------------------------------------------------

/// Matrix TSV with a header row and first column of IRIs. A leading comment
/// line records the threshold level and cutoff when present.
inline void write_similarity(const SimilarityMatrix& m, const KnowledgeGraph& g, std::ostream& out) {
  if (m.cutoff_value) {
    out << "# cutoff=" << format_double(*m.cutoff_value);
    if (m.threshold_level) out << "\tlevel=" << format_double(*m.threshold_level);
    out << '\n';
  }
  out << "iri";
  for (std::size_t id : m.ids) out << '\t' << g.entities()[id].iri;
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) detail::write_rows(out, g.entities()[m.ids[i]].iri, m.values.row(i));
}

inline SimilarityMatrix read_similarity(std::istream& in, const KnowledgeGraph& g) {
  SimilarityMatrix m;
  std::string line;
  std::size_t lineno = 0, row = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (const auto& cell : detail::split_tabs(std::string_view(line).substr(1))) {
        const std::string c = detail::trim(cell);
        if (c.starts_with("cutoff=")) m.cutoff_value = detail::parse_double(c.substr(7), lineno);
        if (c.starts_with("level=")) m.threshold_level = detail::parse_double(c.substr(6), lineno);
      }
      continue;
    }
    auto cells = detail::split_tabs(line);
    if (!header) {
      header = true;
      for (std::size_t i = 1; i < cells.size(); ++i) {
        auto id = g.find_entity(cells[i]);
        if (!id) throw ParseError(lineno, "unknown entity " + cells[i]);
        m.ids.push_back(*id);
      }
      m.values = Matrix(m.ids.size(), m.ids.size());
      continue;
    }
    if (row >= m.ids.size() || cells.size() != m.ids.size() + 1) throw ParseError(lineno, "malformed matrix row");
    for (std::size_t j = 0; j < m.ids.size(); ++j) m.values(row, j) = detail::parse_double(cells[j + 1], lineno);
    ++row;
  }
  if (row != m.ids.size()) throw ParseError(lineno, "matrix has fewer rows than columns");
  return m;
}

inline void write_density(const DensityEstimate& d, std::ostream& out) {
  out << "x\tdensity\n";
  for (std::size_t i = 0; i < d.sample_points.size(); ++i) {
    out << format_double(d.sample_points[i]) << '\t' << format_double(d.densities[i]) << '\n';
  }
}

// --- partitions and predictions ---------------------------------------------

inline void write_partition(const Partition& p, const KnowledgeGraph& g, std::ostream& out) {
  out << "community_id\tentity_iri\n";
  for (std::size_t c = 0; c < p.communities.size(); ++c) {
    for (std::size_t id : p.communities[c]) out << c << '\t' << g.entities()[id].iri << '\n';
  }
}

inline nlohmann::ordered_json partition_json(const Partition& p) {
  nlohmann::ordered_json j;
  j["algorithm"] = std::string(to_string(p.algorithm));
  j["communities"] = p.communities.size();
  j["parameters"] = p.parameters;
  j["warnings"] = p.warnings;
  return j;
}

inline Partition read_partition(std::istream& in, const KnowledgeGraph& g,
                                PartitionAlgorithm algorithm = PartitionAlgorithm::SemEPStyle) {
  std::map<std::size_t, std::vector<std::size_t>> groups;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.starts_with("community_id")) continue;
    auto cells = detail::split_tabs(line);
    if (cells.size() != 2) throw ParseError(lineno, "expected community_id and entity_iri");
    std::size_t c = 0;
    const auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), c);
    if (ec != std::errc{}) throw ParseError(lineno, "invalid community id");
    auto id = g.find_entity(cells[1]);
    if (!id) throw ParseError(lineno, "unknown entity " + cells[1]);
    groups[c].push_back(*id);
  }
  Partition p;
  p.algorithm = algorithm;
  for (auto& [c, members] : groups) {
    std::sort(members.begin(), members.end());
    p.communities.push_back(std::move(members));
  }
  std::sort(p.communities.begin(), p.communities.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return p;
}

inline void write_predictions(const std::vector<PredictedEdge>& preds, const KnowledgeGraph& g, std::ostream& out) {
  out << "entity_a\tentity_b\tcommunity_id\thit\n";
  for (const auto& p : preds) {
    out << g.entities()[p.a].iri << '\t' << g.entities()[p.b].iri << '\t' << p.community << '\t'
        << (p.hit ? (*p.hit ? "1" : "0") : "unknown") << '\n';
  }
}

/// `g` plus one RelatedTo edge per prediction.
inline KnowledgeGraph extended_graph(const KnowledgeGraph& g, const std::vector<PredictedEdge>& preds) {
  KnowledgeGraph out = g;
  const std::size_t rel = out.add_relation(out.labels().related_to);
  for (const auto& p : preds) out.add_edge({p.a, rel, p.b});
  return out;
}

// --- reports ------------------------------------------------------------------

inline nlohmann::ordered_json quality_json(const QualityReport& q) {
  nlohmann::ordered_json j;
  j["inv_conductance"] = q.inv_conductance;
  j["performance"] = q.performance;
  j["inv_total_cut"] = q.inv_total_cut;
  j["modularity_scaled"] = q.modularity_scaled;
  j["modularity_raw"] = q.modularity_raw;
  j["coverage"] = q.coverage;
  return j;
}

inline std::string quality_tsv_header() { return "combination\tInvC\tP\tInvTC\tM\tCo"; }

inline std::string quality_tsv_row(std::string_view combination, const QualityReport& q) {
  std::string s(combination);
  for (double v : {q.inv_conductance, q.performance, q.inv_total_cut, q.modularity_scaled, q.coverage}) {
    s += '\t';
    s += format_double(v);
  }
  return s;
}

inline nlohmann::ordered_json fold_json(const FoldReport& f) {
  nlohmann::ordered_json j;
  j["fold"] = f.fold_index;
  if (!f.error.empty()) {
    j["error"] = f.error;
    return j;
  }
  j["recall"] = f.recall;
  j["precision"] = f.precision;
  j["test_size"] = f.test_size;
  j["predicted"] = f.predicted;
  j["predicted_directed"] = 2 * f.predicted;
  j["hits"] = f.hits;
  j["test_recovered"] = f.test_recovered;
  j["zero_predictions"] = f.zero_predictions;
  j["communities"] = f.communities;
  j["k"] = f.k_used;
  j["leaked_pairs_removed"] = f.leaked_pairs_removed;
  j["final_loss"] = f.final_loss;
  j["quality"] = quality_json(f.quality);
  return j;
}

inline nlohmann::ordered_json summary_json(const FoldSummary& s) {
  nlohmann::ordered_json j;
  j["recall"] = s.recall;
  j["precision"] = s.precision;
  j["predicted"] = s.predicted;
  j["quality"] = quality_json(s.quality);
  return j;
}

inline nlohmann::ordered_json report_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["folds"] = r.fold_count;
  j["pairs"] = r.pair_count;
  j["split_on"] = r.split_closed ? "closed" : "base";
  j["combinations"] = nlohmann::ordered_json::array();
  for (const auto& c : r.combinations) {
    nlohmann::ordered_json cj;
    cj["combination"] = c.id();
    cj["model"] = std::string(to_string(c.model));
    cj["partitioner"] = std::string(to_string(c.partitioner));
    cj["threshold_level"] = c.threshold_level;
    cj["k"] = c.k ? nlohmann::ordered_json(*c.k) : nlohmann::ordered_json("auto");
    if (!c.error.empty()) cj["error"] = c.error;
    cj["folds"] = nlohmann::ordered_json::array();
    for (const auto& f : c.folds) cj["folds"].push_back(fold_json(f));
    if (c.error.empty()) {
      cj["mean"] = summary_json(c.mean);
      cj["stddev"] = summary_json(c.stddev);
    }
    j["combinations"].push_back(std::move(cj));
  }
  return j;
}

/// Flat per-fold table: combination, fold, recall, precision, InvC, P, InvTC, M, Co.
inline void write_report_tsv(const EvaluationReport& r, std::ostream& out) {
  out << "combination\tfold\trecall\tprecision\tInvC\tP\tInvTC\tM\tCo\n";
  for (const auto& c : r.combinations) {
    for (const auto& f : c.folds) {
      out << c.id() << '\t' << f.fold_index;
      if (!f.error.empty()) {
        out << "\terror\terror\terror\terror\terror\terror\terror\n";
        continue;
      }
      for (double v : {f.recall, f.precision, f.quality.inv_conductance, f.quality.performance,
                       f.quality.inv_total_cut, f.quality.modularity_scaled, f.quality.coverage}) {
        out << '\t' << format_double(v);
      }
      out << '\n';
    }
  }
}

/// One row per combination with mean and standard deviation of recall and
/// precision, for bar charts.
inline void write_recall_tsv(const EvaluationReport& r, std::ostream& out) {
  out << "combination\trecall_mean\trecall_std\tprecision_mean\tprecision_std\n";
  for (const auto& c : r.combinations) {
    if (!c.error.empty()) continue;
    out << c.id() << '\t' << format_double(c.mean.recall) << '\t' << format_double(c.stddev.recall) << '\t'
        << format_double(c.mean.precision) << '\t' << format_double(c.stddev.precision) << '\n';
  }
}

/// Mean quality per combination in the metric-bar layout.
inline void write_quality_summary_tsv(const EvaluationReport& r, std::ostream& out) {
  out << quality_tsv_header() << '\n';
  for (const auto& c : r.combinations) {
    if (c.error.empty()) out << quality_tsv_row(c.id(), c.mean.quality) << '\n';
  }
}

}  // namespace kgrd

#endif  // KGRD_IO_HPP
