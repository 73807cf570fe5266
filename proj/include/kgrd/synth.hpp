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

#ifndef KGRD_SYNTH_HPP
#define KGRD_SYNTH_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "kgrd/error.hpp"
#include "kgrd/kg.hpp"

namespace kgrd {

struct SynthConfig {
  std::size_t blocks = 2;
  std::size_t block_size = 10;
  double intra_p = 1.0;
  double inter_p = 0.0;
  std::uint64_t seed = 0;
  std::string base_iri = "http://example.org/kgrd/";
};

/// Planted-partition graph: `blocks` groups of standards with RelatedTo pairs
/// drawn independently (probability intra_p inside a block, inter_p across),
/// plus one framework whose layer j classifies the standards of block j.
/// Each sampled pair is emitted once, lower index first.
inline KnowledgeGraph synth_graph(const SynthConfig& cfg, const LabelMap& labels = {}) {
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob_ok(cfg.intra_p) || !prob_ok(cfg.inter_p)) throw ConfigError("probabilities must lie in [0, 1]");
  if (cfg.blocks == 0 || cfg.block_size == 0) throw ConfigError("blocks and block_size must be positive");

  KnowledgeGraph g(labels);
  const std::string& b = cfg.base_iri;
  auto standard = [&](std::size_t blk, std::size_t i) {
    return b + "standard/B" + std::to_string(blk) + "_S" + std::to_string(i);
  };
  const std::string framework = b + "framework/F0";
  for (std::size_t blk = 0; blk < cfg.blocks; ++blk) {
    for (std::size_t i = 0; i < cfg.block_size; ++i) g.add_triple(standard(blk, i), labels.type, labels.standard_type);
  }
  g.add_triple(framework, labels.type, labels.framework_type);
  for (std::size_t blk = 0; blk < cfg.blocks; ++blk) {
    const std::string layer = b + "layer/L" + std::to_string(blk);
    g.add_triple(layer, labels.type, labels.layer_type);
    g.add_triple(layer, labels.is_layer_of, framework);
    for (std::size_t i = 0; i < cfg.block_size; ++i) g.add_triple(standard(blk, i), labels.classified_as, layer);
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t n = cfg.blocks * cfg.block_size;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      const bool same = x / cfg.block_size == y / cfg.block_size;
      if (unif(rng) < (same ? cfg.intra_p : cfg.inter_p)) {
        g.add_triple(standard(x / cfg.block_size, x % cfg.block_size), labels.related_to,
                     standard(y / cfg.block_size, y % cfg.block_size));
      }
    }
  }
  g.infer_kinds();
  return g;
}

}  // namespace kgrd

#endif  // KGRD_SYNTH_HPP
