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


// In-process driver for the scripted 50-abstract fixture under tests/data/e2e.

#ifndef RECOMB_TESTS_E2E_UTIL_HPP_
#define RECOMB_TESTS_E2E_UTIL_HPP_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "recomb/pipeline.hpp"

namespace recomb::e2e {

inline fs::path fixture_dir() { return fs::path(RECOMB_TEST_DATA) / "e2e"; }

// Hand-computed expectations for the fixture (see make_fixture.py).
inline constexpr size_t kDocuments = 50;
inline constexpr size_t kNodes = 60;
inline constexpr size_t kEdges = 44;
inline constexpr size_t kInspirationEdges = 26;
inline constexpr size_t kBlendEdges = 18;
inline constexpr size_t kInterdisciplinary = 35;
inline constexpr size_t kInterdisciplinaryInspiration = 24;
inline constexpr size_t kInterdisciplinaryBlend = 11;
inline constexpr size_t kSelfLoops = 1;

// Runs ingest through export-train into `dir`; returns each stage's summary.
inline std::map<std::string, Json> run_all(const fs::path& dir) {
  fs::create_directories(dir);
  StageContext ctx{load_config(fixture_dir() / "config.json"), dir, nullptr};
  ctx.gateway = make_gateway(ctx.config, make_backend(ctx.config.backend));
  const std::vector<std::pair<std::string, std::function<Json(const StageContext&)>>> stages = {
      {"ingest", run_ingest},         {"screen", run_screen},       {"extract", run_extract},
      {"postprocess", run_postprocess}, {"normalize", run_normalize}, {"categorize", run_categorize},
      {"build", run_build},           {"analyze", run_analyze},     {"prep-predict", run_prep_predict},
      {"rank", run_rank},             {"rerank", run_rerank},       {"export-train", run_export_train}};
  std::map<std::string, Json> out;
  for (const auto& [name, fn] : stages) out[name] = fn(ctx);
  return out;
}

}  // namespace recomb::e2e

#endif  // RECOMB_TESTS_E2E_UTIL_HPP_
