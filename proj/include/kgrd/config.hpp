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

#ifndef KGRD_CONFIG_HPP
#define KGRD_CONFIG_HPP

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kgrd/error.hpp"
#include "kgrd/kg.hpp"
#include "kgrd/predict.hpp"

namespace kgrd {

/// Full pipeline configuration. Every field has a default.
struct PipelineConfig {
  std::string input_path;
  std::string ideal_path;
  std::string output_dir = "kgrd-out";
  LabelMap labels;
  ExperimentConfig experiment;
  bool cross_validation = true;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::stringstream ss{std::string(s)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError("invalid value for '" + key + "': " + v);
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("invalid boolean for '" + key + "': " + v);
}

template <class T>
T pick(const std::string& key, const std::string& v, std::initializer_list<std::pair<std::string_view, T>> options) {
  for (const auto& [name, value] : options) {
    if (v == name) return value;
  }
  throw ConfigError("invalid value for '" + key + "': " + v);
}

/// Applies a training or threshold key to one model's settings. Returns false
/// if the key is not a per-model key.
inline bool apply_model_key(ModelSettings& ms, const std::string& key, const std::string& v) {
  TrainConfig& t = ms.train;
  if (key == "dim") t.embedding_dim = parse_number<std::size_t>(key, v);
  else if (key == "relation_dim") t.relation_dim = parse_number<std::size_t>(key, v);
  else if (key == "epochs") t.epochs = parse_number<std::size_t>(key, v);
  else if (key == "batch_size") t.batch_size = parse_number<std::size_t>(key, v);
  else if (key == "learning_rate") t.learning_rate = parse_number<double>(key, v);
  else if (key == "margin") t.margin = parse_number<double>(key, v);
  else if (key == "score_norm") t.score_norm = pick<ScoreNorm>(key, v, {{"L1", ScoreNorm::L1}, {"L2", ScoreNorm::L2}});
  else if (key == "threshold") ms.threshold_level = parse_number<double>(key, v);
  else return false;
  return true;
}

inline void apply_global_key(PipelineConfig& c, const std::string& key, const std::string& v) {
  ExperimentConfig& x = c.experiment;
  if (key == "input") c.input_path = v;
  else if (key == "ideal") c.ideal_path = v;
  else if (key == "output_dir") c.output_dir = v;
  else if (key == "models") {
    x.models.clear();
    for (const auto& s : split_list(v)) x.models.push_back(parse_model_kind(s));
    if (x.models.empty()) throw ConfigError("'models' must name at least one model");
  } else if (key == "partitioners") {
    x.partitioners.clear();
    for (const auto& s : split_list(v)) x.partitioners.push_back(parse_partition_algorithm(s));
    if (x.partitioners.empty()) throw ConfigError("'partitioners' must name at least one partitioner");
  } else if (key == "folds") x.folds = parse_number<std::size_t>(key, v);
  else if (key == "seed") x.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "threads") x.threads = parse_number<unsigned>(key, v);
  else if (key == "k") {
    if (v == "auto") x.k.reset();
    else x.k = parse_number<std::size_t>(key, v);
  } else if (key == "balance_tol") x.balance_tol = parse_number<double>(key, v);
  else if (key == "threshold_mode") x.threshold_mode = pick<ThresholdMode>(key, v, {{"quantile", ThresholdMode::Quantile}, {"absolute", ThresholdMode::Absolute}});
  else if (key == "train_on") x.train_on_closure = pick<bool>(key, v, {{"closure", true}, {"base", false}});
  else if (key == "split_on") x.split_closed = pick<bool>(key, v, {{"base", false}, {"closed", true}});
  else if (key == "metrics_on") x.metrics_on_thresholded = pick<bool>(key, v, {{"thresholded", true}, {"raw", false}});
  else if (key == "conductance") x.quality.conductance = pick<ConductanceAggregation>(key, v, {{"mean", ConductanceAggregation::Mean}, {"max", ConductanceAggregation::Max}});
  else if (key == "performance") x.quality.performance = pick<PerformanceMode>(key, v, {{"weighted", PerformanceMode::Weighted}, {"unweighted", PerformanceMode::Unweighted}});
  else if (key == "kmeans_normalize") x.kmeans_unit_normalize = parse_bool(key, v);
  else if (key == "cross_validation") c.cross_validation = parse_bool(key, v);
  else if (key == "iri.related_to") c.labels.related_to = v;
  else if (key == "iri.type") c.labels.type = v;
  else if (key == "iri.classified_as") c.labels.classified_as = v;
  else if (key == "iri.is_layer_of") c.labels.is_layer_of = v;
  else if (key == "iri.standard") c.labels.standard_type = v;
  else if (key == "iri.framework") c.labels.framework_type = v;
  else if (key == "iri.layer") c.labels.layer_type = v;
  else throw ConfigError("unknown configuration key '" + key + "'");
}

}  // namespace detail

inline void validate(const PipelineConfig& cfg) {
  const ExperimentConfig& x = cfg.experiment;
  if (x.folds < 2) throw ConfigError("folds must be at least 2");
  if (x.k && *x.k == 0) throw ConfigError("k must be positive");
  if (!(x.balance_tol >= 0.0)) throw ConfigError("balance_tol must be non-negative");
  for (const auto& [kind, ms] : x.settings) {
    ms.train.validate();
    if (x.threshold_mode == ThresholdMode::Quantile && !(ms.threshold_level >= 0.0 && ms.threshold_level <= 1.0)) {
      throw ConfigError("threshold for " + std::string(to_string(kind)) + " must lie in [0, 1]");
    }
  }
}

/// Parses "key = value" lines. Lines starting with '#' or ';' are comments.
/// Training keys (dim, epochs, margin, threshold, ...) given before any
/// section apply to every model; a "[TransH]"-style section overrides them
/// for that model only, regardless of order in the file.
inline PipelineConfig parse_config(std::istream& in) {
  PipelineConfig cfg;
  std::vector<std::pair<std::string, std::string>> global_model_keys;
  std::vector<std::tuple<ModelKind, std::string, std::string>> section_keys;
  std::optional<ModelKind> section;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("unterminated section header");
        section = parse_model_kind(detail::trim(std::string_view(line).substr(1, line.size() - 2)));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected 'key = value'");
      const std::string key = detail::trim(std::string_view(line).substr(0, eq));
      const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
      if (key.empty()) throw ConfigError("empty key");
      ModelSettings probe;
      const bool model_key = detail::apply_model_key(probe, key, value);
      if (section) {
        if (!model_key) throw ConfigError("key '" + key + "' is not allowed inside a model section");
        section_keys.emplace_back(*section, key, value);
      } else if (model_key) {
        global_model_keys.emplace_back(key, value);
      } else {
        detail::apply_global_key(cfg, key, value);
      }
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  for (auto& [kind, ms] : cfg.experiment.settings) {
    for (const auto& [k, v] : global_model_keys) detail::apply_model_key(ms, k, v);
  }
  for (const auto& [kind, k, v] : section_keys) detail::apply_model_key(cfg.experiment.settings[kind], k, v);
  validate(cfg);
  return cfg;
}

/// Environment overrides: KGRD_OUTPUT_DIR and KGRD_THREADS.
inline void apply_env_overrides(PipelineConfig& cfg) {
  if (const char* dir = std::getenv("KGRD_OUTPUT_DIR"); dir && *dir) cfg.output_dir = dir;
  if (const char* t = std::getenv("KGRD_THREADS"); t && *t) {
    cfg.experiment.threads = detail::parse_number<unsigned>("KGRD_THREADS", t);
  }
}

}  // namespace kgrd

#endif  // KGRD_CONFIG_HPP
