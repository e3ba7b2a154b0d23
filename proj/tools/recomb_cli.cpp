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

// recomb: command-line driver for the pipeline stages and the query service.

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "recomb/pipeline.hpp"
#include "recomb/service.hpp"

namespace {

using StageFn = std::function<recomb::Json(const recomb::StageContext&)>;

struct StageDef {
  const char* name;
  const char* help;
  StageFn fn;
  bool needs_backend;
};

const std::vector<StageDef>& stages() {
  using namespace recomb;
  static const std::vector<StageDef> kStages = {
      {"ingest", "Load and filter the metadata snapshot", run_ingest, false},
      {"screen", "Keyword screen (reporting only)", run_screen, false},
      {"extract", "Extract recombination records", run_extract, true},
      {"postprocess", "Refine entity texts", run_postprocess, true},
      {"evaluate", "Score extraction against gold annotations", run_evaluate, true},
      {"judge-audit", "LLM-judge accuracy audit of mined records", run_judge_audit, true},
      {"normalize", "Expand abbreviations and cluster entities", run_normalize, true},
      {"categorize", "Assign domains to entities", run_categorize, true},
      {"build", "Build the knowledge base", run_build, false},
      {"analyze", "Domain-pair tables, shares and time series", run_analyze, false},
      {"prep-predict", "Contexts, leak filtering and temporal splits", run_prep_predict, true},
      {"rank", "Rank candidates for test queries", run_rank, true},
      {"rerank", "Listwise rerank of the top candidates", run_rerank, true},
      {"export-train", "Write contrastive training pairs", run_export_train, false},
  };
  return kStages;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recomb: recombination mining, knowledge base and prediction toolkit"};
  app.require_subcommand(1);
  std::string config_path, stage_dir = "artifacts", cache_dir;
  std::optional<uint64_t> seed;
  app.add_option("--config", config_path, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--stage-dir", stage_dir, "Directory holding stage outputs");
  app.add_option("--cache-dir", cache_dir, "Model response cache directory");
  app.add_option("--seed", seed, "Seed for sampling and splits");

  std::map<CLI::App*, const StageDef*> by_cmd;
  for (const auto& s : stages()) by_cmd[app.add_subcommand(s.name, s.help)] = &s;
  auto* all = app.add_subcommand("all", "Run ingest through export-train (evaluate/audit when configured)");
  auto* serve = app.add_subcommand("serve", "Serve the knowledge base over HTTP");
  std::string host;
  int port = -1;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  CLI11_PARSE(app, argc, argv);

  try {
    recomb::PipelineConfig cfg;
    if (!config_path.empty()) cfg = recomb::load_config(config_path);
    if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
    if (seed) cfg.seed = *seed;
    cfg.raw["seed"] = cfg.seed;
    recomb::fs::create_directories(stage_dir);

    recomb::StageContext ctx{cfg, stage_dir, nullptr};
    auto backend_ctx = [&] {
      if (!ctx.gateway) ctx.gateway = recomb::make_gateway(cfg, recomb::make_backend(cfg.backend));
    };
    auto run_one = [&](const StageDef& s) {
      if (s.needs_backend) backend_ctx();
      std::cerr << "[" << s.name << "] running\n";
      recomb::Json out = s.fn(ctx);
      std::cout << s.name << ": " << out.dump() << "\n";
    };

    for (const auto& [cmd, def] : by_cmd)
      if (cmd->parsed()) run_one(*def);

    if (all->parsed()) {
      for (const auto& s : stages()) {
        std::string n = s.name;
        if (n == "evaluate" && !cfg.gold) continue;
        if (n == "judge-audit") continue;  // opt-in: run explicitly
        run_one(s);
      }
    }

    if (serve->parsed()) {
      auto kb_dir = recomb::fs::path(stage_dir) / "kb";
      if (!recomb::fs::exists(kb_dir / "meta.json"))
        throw recomb::StageError("missing " + kb_dir.string() + ": run build first");
      std::optional<std::vector<size_t>> pool;
      auto pool_p = recomb::fs::path(stage_dir) / "pool.jsonl";
      if (recomb::fs::exists(pool_p)) {
        std::vector<size_t> ids;
        for (const auto& c : recomb::read_pool(pool_p)) ids.push_back(c.node_id);
        pool = ids;
      }
      auto state = recomb::ServiceState::make(recomb::load_kb(kb_dir), pool);
      recomb::SuggestConfig sc;
      sc.gateway = recomb::make_gateway(cfg, recomb::make_backend(cfg.backend));
      sc.embedding_model = cfg.models.embedding;
      sc.rerank_model = cfg.models.rerank;
      auto api = std::make_shared<recomb::Api>(state, sc);
      recomb::Server server(api);
      std::string h = host.empty() ? cfg.host : host;
      int p = port < 0 ? cfg.port : port;
      std::cerr << "serving on " << h << ":" << p << "\n";
      server.run(h, p);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
