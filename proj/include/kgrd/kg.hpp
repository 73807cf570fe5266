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

#ifndef KGRD_KG_HPP
#define KGRD_KG_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kgrd/error.hpp"

namespace kgrd {

enum class EntityKind { Standard, StandardizationFramework, FrameworkLayer, Other };
enum class LabelKind { RelatedTo, Type, ClassifiedAs, IsLayerOf, Other };

inline std::string_view to_string(EntityKind k) {
  switch (k) {
    case EntityKind::Standard: return "Standard";
    case EntityKind::StandardizationFramework: return "StandardizationFramework";
    case EntityKind::FrameworkLayer: return "FrameworkLayer";
    case EntityKind::Other: break;
  }
  return "Other";
}

inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kStoNamespace = "https://w3id.org/i40/sto#";

/// IRIs that identify the recognized predicates and entity types.
/// Matching is exact and case-sensitive.
struct LabelMap {
  std::string related_to = std::string(kStoNamespace) + "relatedTo";
  std::string type = std::string(kRdfType);
  std::string classified_as = std::string(kStoNamespace) + "classifiedAs";
  std::string is_layer_of = std::string(kStoNamespace) + "isLayerOf";
  std::string standard_type = std::string(kStoNamespace) + "Standard";
  std::string framework_type = std::string(kStoNamespace) + "StandardizationFramework";
  std::string layer_type = std::string(kStoNamespace) + "FrameworkLayer";

  LabelKind label_of(std::string_view iri) const {
    if (iri == related_to) return LabelKind::RelatedTo;
    if (iri == type) return LabelKind::Type;
    if (iri == classified_as) return LabelKind::ClassifiedAs;
    if (iri == is_layer_of) return LabelKind::IsLayerOf;
    return LabelKind::Other;
  }

  EntityKind kind_of_type(std::string_view iri) const {
    if (iri == standard_type) return EntityKind::Standard;
    if (iri == framework_type) return EntityKind::StandardizationFramework;
    if (iri == layer_type) return EntityKind::FrameworkLayer;
    return EntityKind::Other;
  }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

struct Entity {
  std::string iri;
  EntityKind kind = EntityKind::Other;
};

struct Relation {
  std::string iri;
  LabelKind kind = LabelKind::Other;
};

/// A directed labeled edge; all fields are dense indices into the owning graph.
struct Edge {
  std::size_t subject = 0;
  std::size_t relation = 0;
  std::size_t object = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct EdgeHash {
  std::size_t operator()(const Edge& e) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint64_t v : {std::uint64_t(e.subject), std::uint64_t(e.relation),
                            std::uint64_t(e.object)}) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

/// Unordered entity pair in canonical form (first < second).
using EntityPair = std::pair<std::size_t, std::size_t>;
using PairSet = std::set<EntityPair>;

inline EntityPair canonical_pair(std::size_t a, std::size_t b) {
  return a < b ? EntityPair{a, b} : EntityPair{b, a};
}

/// Typed entities plus labeled directed edges. Entities keep the index they
/// were assigned on first insertion; edges are a set kept in insertion order.
class KnowledgeGraph {
 public:
  explicit KnowledgeGraph(LabelMap labels = {}) : labels_(std::move(labels)) {}

  std::size_t add_entity(std::string_view iri) {
    auto it = entity_index_.find(std::string(iri));
    if (it != entity_index_.end()) return it->second;
    const std::size_t idx = entities_.size();
    entities_.push_back({std::string(iri), EntityKind::Other});
    entity_index_.emplace(entities_.back().iri, idx);
    return idx;
  }

  std::size_t add_relation(std::string_view iri) {
    auto it = relation_index_.find(std::string(iri));
    if (it != relation_index_.end()) return it->second;
    const std::size_t idx = relations_.size();
    relations_.push_back({std::string(iri), labels_.label_of(iri)});
    relation_index_.emplace(relations_.back().iri, idx);
    return idx;
  }

  std::optional<std::size_t> find_entity(std::string_view iri) const {
    auto it = entity_index_.find(std::string(iri));
    if (it == entity_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> find_relation(std::string_view iri) const {
    auto it = relation_index_.find(std::string(iri));
    if (it == relation_index_.end()) return std::nullopt;
    return it->second;
  }

  /// Index of the relation carrying the RelatedTo label, if present.
  std::optional<std::size_t> related_to_relation() const { return find_relation(labels_.related_to); }

  /// Inserts `e` unless it is already present or is a RelatedTo self-loop.
  bool add_edge(const Edge& e) {
    if (e.subject >= entities_.size() || e.object >= entities_.size() ||
        e.relation >= relations_.size()) {
      throw ConfigError("edge endpoint or relation out of range");
    }
    if (e.subject == e.object && relations_[e.relation].kind == LabelKind::RelatedTo) return false;
    if (!edge_set_.insert(e).second) return false;
    edges_.push_back(e);
    return true;
  }

  bool add_triple(std::string_view s, std::string_view p, std::string_view o) {
    const std::size_t si = add_entity(s);
    const std::size_t pi = add_relation(p);
    const std::size_t oi = add_entity(o);
    return add_edge({si, pi, oi});
  }

  bool has_edge(const Edge& e) const { return edge_set_.contains(e); }

  void set_kind(std::size_t entity, EntityKind kind) { entities_.at(entity).kind = kind; }

  /// Derives entity kinds from Type edges. The first recognized type seen for
  /// an entity wins; later conflicting types are reported in `warnings`.
  void infer_kinds(std::vector<std::string>* warnings = nullptr) {
    std::vector<bool> assigned(entities_.size(), false);
    for (auto& ent : entities_) ent.kind = EntityKind::Other;
    for (const Edge& e : edges_) {
      if (relations_[e.relation].kind != LabelKind::Type) continue;
      const EntityKind k = labels_.kind_of_type(entities_[e.object].iri);
      if (k == EntityKind::Other) continue;
      if (!assigned[e.subject]) {
        entities_[e.subject].kind = k;
        assigned[e.subject] = true;
      } else if (entities_[e.subject].kind != k && warnings) {
        warnings->push_back("conflicting type for " + entities_[e.subject].iri + ": keeping " +
                            std::string(to_string(entities_[e.subject].kind)) + ", ignoring " +
                            std::string(to_string(k)));
      }
    }
  }

  /// Copy of this graph keeping entities and relations but only the edges
  /// accepted by `keep`.
  KnowledgeGraph filtered(const std::function<bool(const Edge&)>& keep) const {
    KnowledgeGraph out(labels_);
    out.entities_ = entities_;
    out.entity_index_ = entity_index_;
    out.relations_ = relations_;
    out.relation_index_ = relation_index_;
    for (const Edge& e : edges_) {
      if (keep(e)) out.add_edge(e);
    }
    return out;
  }

  const LabelMap& labels() const noexcept { return labels_; }
  const std::vector<Entity>& entities() const noexcept { return entities_; }
  const std::vector<Relation>& relations() const noexcept { return relations_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t entity_count() const noexcept { return entities_.size(); }
  std::size_t relation_count() const noexcept { return relations_.size(); }

  bool closure_applied() const noexcept { return closure_applied_; }
  void mark_closure_applied(bool v = true) noexcept { closure_applied_ = v; }

  bool is_standard(std::size_t entity) const { return entities_.at(entity).kind == EntityKind::Standard; }
  bool is_related_to(const Edge& e) const { return relations_[e.relation].kind == LabelKind::RelatedTo; }

 private:
  LabelMap labels_;
  std::vector<Entity> entities_;
  std::unordered_map<std::string, std::size_t> entity_index_;
  std::vector<Relation> relations_;
  std::unordered_map<std::string, std::size_t> relation_index_;
  std::vector<Edge> edges_;
  std::unordered_set<Edge, EdgeHash> edge_set_;
  bool closure_applied_ = false;
};

/// Counters and diagnostics gathered while reading N-Triples.
struct IngestStats {
  std::size_t lines = 0;
  std::size_t triples = 0;
  std::size_t duplicate_triples = 0;
  std::size_t skipped_literals = 0;
  std::size_t dropped_self_loops = 0;
  std::vector<std::string> warnings;
};

namespace detail {

enum class TermKind { Iri, BlankNode, Literal };

struct Term {
  TermKind kind;
  std::string text;  // IRI without brackets, "_:label", or raw literal
};

inline void skip_ws(std::string_view line, std::size_t& pos) {
  while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
}

inline Term read_term(std::string_view line, std::size_t& pos, std::size_t lineno) {
  skip_ws(line, pos);
  if (pos >= line.size()) throw ParseError(lineno, "unexpected end of line, expected a term");
  const char c = line[pos];
  if (c == '<') {
    const std::size_t end = line.find('>', pos + 1);
    if (end == std::string_view::npos) throw ParseError(lineno, "unterminated IRI");
    std::string_view iri = line.substr(pos + 1, end - pos - 1);
    if (iri.empty()) throw ParseError(lineno, "empty IRI");
    if (iri.find_first_of(" \t\"<") != std::string_view::npos) {
      throw ParseError(lineno, "invalid character in IRI");
    }
    pos = end + 1;
    return {TermKind::Iri, std::string(iri)};
  }
  if (c == '_' && pos + 1 < line.size() && line[pos + 1] == ':') {
    const std::size_t start = pos;
    pos += 2;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '.') ++pos;
    if (pos == start + 2) throw ParseError(lineno, "empty blank node label");
    return {TermKind::BlankNode, std::string(line.substr(start, pos - start))};
  }
  if (c == '"') {
    const std::size_t start = pos++;
    bool closed = false;
    while (pos < line.size()) {
      if (line[pos] == '\\') {
        pos += 2;
        continue;
      }
      if (line[pos] == '"') {
        closed = true;
        ++pos;
        break;
      }
      ++pos;
    }
    if (!closed) throw ParseError(lineno, "unterminated literal");
    if (pos < line.size() && line[pos] == '@') {
      while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '.') ++pos;
    } else if (line.substr(pos, 3) == "^^<") {
      const std::size_t end = line.find('>', pos + 3);
      if (end == std::string_view::npos) throw ParseError(lineno, "unterminated datatype IRI");
      pos = end + 1;
    }
    return {TermKind::Literal, std::string(line.substr(start, pos - start))};
  }
  throw ParseError(lineno, std::string("unexpected character '") + c + "'");
}

inline std::string format_term(std::string_view iri) {
  if (iri.starts_with("_:")) return std::string(iri);
  std::string out;
  out.reserve(iri.size() + 2);
  out += '<';
  out += iri;
  out += '>';
  return out;
}

}  // namespace detail

/// Reads line-oriented N-Triples. IRIs and blank nodes become entities in
/// first-seen order; triples whose object is a literal are counted and
/// skipped. Entity kinds are derived from Type edges.
inline KnowledgeGraph parse_ntriples(std::istream& in, const LabelMap& labels = {},
                                     IngestStats* stats = nullptr) {
  using detail::TermKind;
  KnowledgeGraph g(labels);
  IngestStats local;
  IngestStats& st = stats ? *stats : local;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    ++st.lines;
    std::string_view line(raw);
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    std::size_t pos = 0;
    detail::skip_ws(line, pos);
    if (pos == line.size() || line[pos] == '#') continue;

    const detail::Term s = detail::read_term(line, pos, lineno);
    const detail::Term p = detail::read_term(line, pos, lineno);
    const detail::Term o = detail::read_term(line, pos, lineno);
    if (s.kind == TermKind::Literal) throw ParseError(lineno, "literal in subject position");
    if (p.kind != TermKind::Iri) throw ParseError(lineno, "predicate must be an IRI");
    detail::skip_ws(line, pos);
    if (pos >= line.size() || line[pos] != '.') throw ParseError(lineno, "missing terminal ' .'");
    ++pos;
    detail::skip_ws(line, pos);
    if (pos < line.size() && line[pos] != '#') throw ParseError(lineno, "trailing content after ' .'");

    if (o.kind == TermKind::Literal) {
      ++st.skipped_literals;
      continue;
    }
    ++st.triples;
    const std::size_t si = g.add_entity(s.text);
    const std::size_t pi = g.add_relation(p.text);
    const std::size_t oi = g.add_entity(o.text);
    if (si == oi && g.relations()[pi].kind == LabelKind::RelatedTo) {
      ++st.dropped_self_loops;
      st.warnings.push_back("line " + std::to_string(lineno) + ": dropped relatedTo self-loop on " + s.text);
      continue;
    }
    if (!g.add_edge({si, pi, oi})) ++st.duplicate_triples;
  }
  g.infer_kinds(&st.warnings);
  return g;
}

/// Writes every edge as one N-Triples line, in edge order.
inline void write_ntriples(const KnowledgeGraph& g, std::ostream& out) {
  const auto& ents = g.entities();
  const auto& rels = g.relations();
  for (const Edge& e : g.edges()) {
    out << detail::format_term(ents[e.subject].iri) << ' ' << detail::format_term(rels[e.relation].iri) << ' '
        << detail::format_term(ents[e.object].iri) << " .\n";
  }
}

/// Entity index map as TSV: iri, index, kind.
inline void write_entity_index(const KnowledgeGraph& g, std::ostream& out) {
  out << "iri\tindex\tkind\n";
  const auto& ents = g.entities();
  for (std::size_t i = 0; i < ents.size(); ++i) {
    out << ents[i].iri << '\t' << i << '\t' << to_string(ents[i].kind) << '\n';
  }
}

/// All Standard entities in index order.
inline std::vector<std::size_t> standards_of(const KnowledgeGraph& g) {
  std::vector<std::size_t> out;
  const auto& ents = g.entities();
  for (std::size_t i = 0; i < ents.size(); ++i) {
    if (ents[i].kind == EntityKind::Standard) out.push_back(i);
  }
  return out;
}

/// Unordered RelatedTo pairs whose endpoints are both standards.
inline PairSet related_pairs(const KnowledgeGraph& g) {
  PairSet out;
  for (const Edge& e : g.edges()) {
    if (g.is_related_to(e) && g.is_standard(e.subject) && g.is_standard(e.object)) {
      out.insert(canonical_pair(e.subject, e.object));
    }
  }
  return out;
}

struct RelatedToCounts {
  std::size_t directed = 0;
  std::size_t undirected = 0;
};

/// RelatedTo instance counts, both as stored directed edges and as unordered pairs.
inline RelatedToCounts related_to_counts(const KnowledgeGraph& g) {
  RelatedToCounts c;
  PairSet pairs;
  for (const Edge& e : g.edges()) {
    if (!g.is_related_to(e)) continue;
    ++c.directed;
    pairs.insert(canonical_pair(e.subject, e.object));
  }
  c.undirected = pairs.size();
  return c;
}

/// Copy of `g` without any RelatedTo edge (either orientation) whose
/// endpoints form a pair in `pairs`.
inline KnowledgeGraph without_related_pairs(const KnowledgeGraph& g, const PairSet& pairs) {
  KnowledgeGraph out = g.filtered([&](const Edge& e) {
    return !(g.is_related_to(e) && pairs.contains(canonical_pair(e.subject, e.object)));
  });
  out.mark_closure_applied(false);
  return out;
}

/// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

/// Adds the minimal set of RelatedTo edges that makes the relation, restricted
/// to standards, symmetric and transitive: every connected component of the
/// undirected base relation becomes a clique stored in both directions.
/// Other labels are left untouched. Idempotent.
inline KnowledgeGraph materialize_closure(const KnowledgeGraph& g) {
  KnowledgeGraph out = g;
  out.mark_closure_applied(true);
  const auto rel = g.related_to_relation();
  if (!rel) return out;

  const std::size_t n = g.entity_count();
  UnionFind uf(n);
  std::vector<bool> touched(n, false);
  for (const Edge& e : g.edges()) {
    if (e.relation != *rel || !g.is_standard(e.subject) || !g.is_standard(e.object)) continue;
    uf.unite(e.subject, e.object);
    touched[e.subject] = touched[e.object] = true;
  }
  // Group members by root; iterating indices in order keeps members sorted and
  // components ordered by their smallest member.
  std::unordered_map<std::size_t, std::size_t> slot_of_root;
  std::vector<std::vector<std::size_t>> components;
  for (std::size_t v = 0; v < n; ++v) {
    if (!touched[v]) continue;
    const std::size_t r = uf.find(v);
    auto [it, inserted] = slot_of_root.try_emplace(r, components.size());
    if (inserted) components.emplace_back();
    components[it->second].push_back(v);
  }
  for (const auto& comp : components) {
    for (std::size_t a : comp) {
      for (std::size_t b : comp) {
        if (a != b) out.add_edge({a, *rel, b});
      }
    }
  }
  return out;
}

}  // namespace kgrd

#endif  // KGRD_KG_HPP
