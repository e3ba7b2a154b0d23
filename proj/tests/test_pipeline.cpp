// Copyright 2026 The Recomb Authors.
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

#include <cstdlib>

#include "e2e_util.hpp"
#include "test_util.hpp"

namespace recomb {
namespace {

using testing::TempDir;

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;
};

CliResult run_cli(const TempDir& tmp, const std::string& args) {
  std::string cmd = std::string(RECOMB_CLI) + " " + args + " >" + (tmp / "stdout").string() + " 2>" +
                    (tmp / "stderr").string();
  int rc = std::system(cmd.c_str());
  return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, read_file(tmp / "stdout"), read_file(tmp / "stderr")};
}

std::string fixture_config() { return (e2e::fixture_dir() / "config.json").string(); }

TEST(Cli, BuildBeforeNormalizeFails) {
  TempDir tmp;
  auto r = run_cli(tmp, "--config " + fixture_config() + " --stage-dir " + (tmp / "s").string() + " build");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("run normalize first"), std::string::npos) << r.err;
}

TEST(Cli, ExtractBeforeIngestFails) {
  TempDir tmp;
  auto r = run_cli(tmp, "--config " + fixture_config() + " --stage-dir " + (tmp / "s").string() + " extract");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("run ingest first"), std::string::npos) << r.err;
}

TEST(Cli, UnknownSubcommandAndMissingConfig) {
  TempDir tmp;
  EXPECT_NE(run_cli(tmp, "frobnicate").exit_code, 0);
  EXPECT_NE(run_cli(tmp, "--config /nonexistent.json ingest").exit_code, 0);
}

TEST(Cli, AllTwiceGivesIdenticalDigests) {
  TempDir tmp;
  for (const char* d : {"a", "b"}) {
    auto r = run_cli(tmp, "--config " + fixture_config() + " --stage-dir " + (tmp / d).string() + " all");
    ASSERT_EQ(r.exit_code, 0) << r.err;
  }
  for (const char* f : {"kb/nodes.jsonl", "kb/edges.jsonl", "kb/meta.json", "records.jsonl", "test.jsonl",
                        "rankings.jsonl", "contrastive.jsonl", "manifest.build.json"})
    EXPECT_EQ(file_digest(tmp / "a" / f), file_digest(tmp / "b" / f)) << f;
}

TEST(Pipeline, FixtureGoldenCounts) {
  TempDir tmp;
  auto out = e2e::run_all(tmp.path());
  EXPECT_EQ(out["ingest"]["documents"], e2e::kDocuments);
  EXPECT_EQ(out["ingest"]["skipped_malformed"], 2);
  EXPECT_EQ(out["ingest"]["filtered_out"], 1);
  EXPECT_EQ(out["extract"]["outcomes"]["present"], 40);
  EXPECT_EQ(out["extract"]["outcomes"]["parse-failure"], 1);
  EXPECT_EQ(out["build"]["nodes"], e2e::kNodes);
  EXPECT_EQ(out["build"]["all"]["total"], e2e::kEdges);
  EXPECT_EQ(out["build"]["all"]["interdisciplinary"], e2e::kInterdisciplinary);
  EXPECT_EQ(out["build"]["inspiration"]["total"], e2e::kInspirationEdges);
  EXPECT_EQ(out["build"]["blend"]["total"], e2e::kBlendEdges);
  EXPECT_EQ(out["prep-predict"]["leak_discarded"], 1);
  EXPECT_EQ(out["prep-predict"]["train"], 39);
  EXPECT_EQ(out["prep-predict"]["test"], 20);
  EXPECT_EQ(out["export-train"]["rows"], 39 * 30);

  auto kb = load_kb(tmp / "kb");
  EXPECT_EQ(kb.nodes[0].canonical, "Chain of Thought");
  size_t loops = 0;
  for (const auto& e : kb.edges) loops += e.self_loop;
  EXPECT_EQ(loops, e2e::kSelfLoops);
  for (const auto& q : read_queries(tmp / "test.jsonl")) EXPECT_GE(q.published.year, 2024);
  Json manifest = Json::parse(read_file(tmp / "manifest.build.json"));
  EXPECT_EQ(manifest["outputs"]["kb/edges.jsonl"], file_digest(tmp / "kb/edges.jsonl"));
  EXPECT_EQ(manifest["seed"], 13);
}

TEST(Pipeline, StageErrorsNameTheMissingStage) {
  TempDir tmp;
  StageContext ctx{PipelineConfig{}, tmp.path(), nullptr};
  try {
    run_build(ctx);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_NE(std::string(e.what()).find("run normalize first"), std::string::npos);
  }
  EXPECT_THROW(run_rank(ctx), StageError);
  EXPECT_THROW(ctx.gw(), StageError);
}

TEST(Pipeline, BackendFailureFailsTheStage) {
  TempDir tmp;
  auto cfg = load_config(e2e::fixture_dir() / "config.json");
  StageContext ctx{cfg, tmp.path(), nullptr};
  run_ingest(ctx);
  ctx.gateway = testing::gateway_for(std::make_shared<MockBackend>());  // answers nothing
  EXPECT_THROW(run_extract(ctx), StageError);
  EXPECT_FALSE(fs::exists(tmp / "records.jsonl"));
}

TEST(Config, RejectsBadValues) {
  Json base = Json::parse(read_file(e2e::fixture_dir() / "config.json"));
  auto bad = [&](const char* key, Json v) {
    Json j = base;
    j[key] = v;
    return j;
  };
  EXPECT_NO_THROW(config_from_json(base, e2e::fixture_dir()));
  EXPECT_THROW(config_from_json(bad("quantiles", Json::array({1.5})), e2e::fixture_dir()), std::exception);
  EXPECT_THROW(config_from_json(bad("negatives", 0), e2e::fixture_dir()), std::exception);
  EXPECT_THROW(config_from_json(bad("cluster_threshold", -1), e2e::fixture_dir()), std::exception);
  auto a = config_from_json(base, e2e::fixture_dir());
  auto b = config_from_json(bad("seed", 14), e2e::fixture_dir());
  EXPECT_NE(a.digest(), b.digest());
  EXPECT_EQ(a.digest(), config_from_json(base, e2e::fixture_dir()).digest());
}

}  // namespace
}  // namespace recomb
