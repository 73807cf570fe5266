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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "kgrd/kgrd.hpp"

namespace kgrd {
namespace {

namespace fs = std::filesystem;

const fs::path kData = KGRD_TEST_DATA;
const fs::path kConfigs = KGRD_CONFIG_DIR;

struct CliResult {
  int code = -1;
  std::string out;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kgrd_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const std::string cmd = std::string(KGRD_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  return r;
}

PipelineConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::set<std::string> lines_of(const std::string& text) {
  std::set<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.insert(l);
  return out;
}

// --- configuration -----------------------------------------------------------

TEST(Config, SectionOverridesGlobalRegardlessOfOrder) {
  const PipelineConfig c = parse("[TransH]\nepochs = 7\n");
  EXPECT_EQ(c.experiment.settings_for(ModelKind::TransH).train.epochs, 7u);
  EXPECT_EQ(c.experiment.settings_for(ModelKind::TransE).train.epochs, 500u);
  const PipelineConfig d = parse("[TransH]\nepochs = 7\n[TransE]\nmargin = 2\n");
  EXPECT_EQ(d.experiment.settings_for(ModelKind::TransH).train.epochs, 7u);
  EXPECT_EQ(d.experiment.settings_for(ModelKind::TransE).train.margin, 2.0);
}

TEST(Config, GlobalTrainingKeysReachEveryModel) {
  const PipelineConfig c = parse("epochs = 9\ndim = 8\n[TransR]\ndim = 4\n");
  for (ModelKind m : kAllModels) EXPECT_EQ(c.experiment.settings_for(m).train.epochs, 9u);
  EXPECT_EQ(c.experiment.settings_for(ModelKind::TransE).train.embedding_dim, 8u);
  EXPECT_EQ(c.experiment.settings_for(ModelKind::TransR).train.embedding_dim, 4u);
}

TEST(Config, ListsAndEnums) {
  const PipelineConfig c = parse("models = TransE, TransD\npartitioners = metis\nk = 4\nthreshold_mode = absolute\n");
  EXPECT_EQ(c.experiment.models, (std::vector<ModelKind>{ModelKind::TransE, ModelKind::TransD}));
  EXPECT_EQ(c.experiment.partitioners, (std::vector<PartitionAlgorithm>{PartitionAlgorithm::MetisStyle}));
  EXPECT_EQ(c.experiment.k, 4u);
  EXPECT_EQ(c.experiment.threshold_mode, ThresholdMode::Absolute);
}

TEST(Config, ErrorsNameTheLine) {
  try {
    parse("# comment\nfolds = 5\nbogus = 1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse("folds = 1\n"), ConfigError);
  EXPECT_THROW(parse("folds = x\n"), ConfigError);
  EXPECT_THROW(parse("threshold = 1.5\n"), ConfigError);
  EXPECT_THROW(parse("[TransX]\n"), ConfigError);
  EXPECT_THROW(parse("[TransE]\nfolds = 3\n"), ConfigError);
  EXPECT_THROW(parse("models =\n"), ConfigError);
  EXPECT_THROW(parse("no equals sign\n"), ConfigError);
  EXPECT_THROW(parse("k = 0\n"), ConfigError);
}

TEST(Config, FullSampleSpellsOutTheDefaults) {
  std::ifstream in(kConfigs / "full.conf");
  ASSERT_TRUE(in);
  const PipelineConfig parsed = parse_config(in);
  PipelineConfig defaults;
  defaults.input_path = parsed.input_path;
  EXPECT_EQ(describe_config(parsed), describe_config(defaults));
}

// --- synthetic graphs --------------------------------------------------------

TEST(Synth, DeterministicCountsAtExtremeProbabilities) {
  SynthConfig sc;
  sc.blocks = 3;
  sc.block_size = 7;
  EXPECT_EQ(related_pairs(synth_graph(sc)).size(), 3u * 21u);
  sc.inter_p = 1.0;
  EXPECT_EQ(related_pairs(synth_graph(sc)).size(), 21u * 20u / 2u);
  sc.intra_p = 0.0;
  sc.inter_p = 0.0;
  EXPECT_EQ(related_pairs(synth_graph(sc)).size(), 0u);
  EXPECT_EQ(standards_of(synth_graph(sc)).size(), 21u);
}

TEST(Synth, PairsRespectBlocks) {
  SynthConfig sc;
  sc.blocks = 4;
  sc.block_size = 10;
  sc.intra_p = 0.5;
  sc.seed = 9;
  const KnowledgeGraph g = synth_graph(sc);
  std::size_t n = 0;
  for (const auto& [a, b] : related_pairs(g)) {
    const std::string& ia = g.entities()[a].iri;
    const std::string& ib = g.entities()[b].iri;
    EXPECT_EQ(ia.substr(0, ia.find("_S")), ib.substr(0, ib.find("_S")));
    ++n;
  }
  // 180 intra pairs at p = 0.5; a 6-sigma window.
  EXPECT_GT(n, 90u - 41u);
  EXPECT_LT(n, 90u + 41u);
}

TEST(Synth, RejectsBadProbabilities) {
  SynthConfig sc;
  sc.intra_p = 1.5;
  EXPECT_THROW(synth_graph(sc), ConfigError);
}

// --- command line ------------------------------------------------------------

TEST(Cli, IngestCounts) {
  const fs::path d = scratch("ingest");
  const CliResult r = run_cli("ingest " + (kConfigs / "planted.nt").string() + " -o " + d.string(), d);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "40 standards, 180 relatedTo edges");
  EXPECT_TRUE(fs::exists(d / "entities.tsv"));
}

TEST(Cli, MalformedInputExitsTwo) {
  const fs::path d = scratch("malformed");
  EXPECT_EQ(run_cli("ingest " + (kData / "malformed.nt").string(), d).code, 2);
  EXPECT_NE(read_file(d / "stderr.txt").find("line 1"), std::string::npos);
}

TEST(Cli, EmptyInputIsValid) {
  const fs::path d = scratch("empty");
  const CliResult r = run_cli("ingest " + (kData / "empty.nt").string(), d);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "0 standards, 0 relatedTo edges");
}

TEST(Cli, UsageAndMissingFileErrorsExitTwo) {
  const fs::path d = scratch("usage");
  EXPECT_EQ(run_cli("", d).code, 2);
  EXPECT_EQ(run_cli("ingest", d).code, 2);
  EXPECT_EQ(run_cli("ingest --no-such-flag x", d).code, 2);
  EXPECT_EQ(run_cli("ingest " + (d / "missing.nt").string(), d).code, 2);
  EXPECT_EQ(run_cli("-c " + (d / "missing.conf").string() + " ingest " + (kData / "empty.nt").string(), d).code, 2);
}

TEST(Cli, PredictMarksIdealHits) {
  const fs::path d = scratch("predict");
  const CliResult r = run_cli("predict " + (kData / "homophily.nt").string() + " -p " +
                                  (kData / "homophily_partition.tsv").string() + " --ideal " +
                                  (kData / "homophily_ideal.nt").string() + " -o " + d.string(),
                              d);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "16 predicted relations, 6 confirmed by the ideal graph\n");
}

TEST(Cli, ExtendedGraphContainsInput) {
  const fs::path d = scratch("extended");
  const std::string input = (kData / "homophily.nt").string();
  ASSERT_EQ(run_cli("predict " + input + " -p " + (kData / "homophily_partition.tsv").string() + " -o " + d.string(), d)
                .code,
            0);
  const auto in = lines_of(read_file(input)), out = lines_of(read_file(d / "extended.nt"));
  for (const auto& l : in) EXPECT_TRUE(out.contains(l)) << l;
  EXPECT_EQ(out.size(), in.size() + 16);
}

TEST(Cli, StagesChainThroughFiles) {
  const fs::path d = scratch("stages");
  const std::string input = (kConfigs / "planted.nt").string();
  const std::string conf = "-c " + (kConfigs / "planted.conf").string() + " ";
  ASSERT_EQ(run_cli(conf + "train " + input + " -m TransE -o " + (d / "m").string(), d).code, 0);
  ASSERT_EQ(run_cli(conf + "similarity " + input + " -m TransE -e " + (d / "m" / "embeddings.tsv").string() +
                        " -o " + (d / "s").string(),
                    d)
                .code,
            0);
  const CliResult p = run_cli(conf + "partition " + input + " -a semep -s " +
                                  (d / "s" / "similarity_thresholded.tsv").string() + " -o " + (d / "p").string(),
                              d);
  ASSERT_EQ(p.code, 0);
  EXPECT_EQ(p.out, "4 communities\n");
  const CliResult k = run_cli(conf + "partition " + input + " -a kmeans -k 4 -s " +
                                  (d / "s" / "similarity_thresholded.tsv").string() + " -e " +
                                  (d / "m" / "embeddings.tsv").string() + " -o " + (d / "k").string(),
                              d);
  EXPECT_EQ(k.code, 0);
  EXPECT_EQ(k.out, "4 communities\n");
  const CliResult pr =
      run_cli("predict " + input + " -p " + (d / "p" / "partition.tsv").string() + " -o " + (d / "r").string(), d);
  EXPECT_EQ(pr.code, 0);
  EXPECT_EQ(pr.out, "0 predicted relations\n");
}

TEST(Cli, PipelineWritesManifestAndTwelveRowReport) {
  const fs::path d = scratch("pipeline");
  const fs::path conf = d / "all.conf";
  write_file(conf, "input = " + (kConfigs / "planted.nt").string() + "\nepochs = 20\nfolds = 2\n");
  const CliResult r = run_cli("-c " + conf.string() + " evaluate -o " + (d / "eval").string(), d);
  EXPECT_EQ(r.code, 0);
  std::istringstream recall(read_file(d / "eval" / "recall.tsv"));
  std::size_t rows = 0;
  for (std::string l; std::getline(recall, l);) rows += !l.empty();
  EXPECT_EQ(rows, 13u);  // header plus one row per combination

  const CliResult p = run_cli("-c " + conf.string() + " pipeline -o " + (d / "out").string(), d);
  EXPECT_EQ(p.code, 0);
  const std::string manifest = read_file(d / "out" / "MANIFEST");
  for (const char* section : {"[config]", "[input]", "[stages]", "[artifacts]", "[status]"}) {
    EXPECT_NE(manifest.find(section), std::string::npos) << section;
  }
  EXPECT_NE(manifest.find("exit_code = 0"), std::string::npos);
  EXPECT_TRUE(fs::exists(d / "out" / "TransD" / "entity_projections.tsv"));
  EXPECT_TRUE(fs::exists(d / "out" / "TransR" / "metis" / "partition.json"));
}

TEST(Cli, SynthMatchesLibrary) {
  const fs::path d = scratch("synth");
  ASSERT_EQ(run_cli("synth --blocks 3 --block-size 4 --intra 0.7 --seed 3 -o " + (d / "g.nt").string(), d).code, 0);
  SynthConfig sc;
  sc.blocks = 3;
  sc.block_size = 4;
  sc.intra_p = 0.7;
  sc.seed = 3;
  std::ostringstream expect;
  write_ntriples(synth_graph(sc), expect);
  EXPECT_EQ(read_file(d / "g.nt"), expect.str());
}

}  // namespace
}  // namespace kgrd
