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

// Pipeline stages over a stage directory. Each stage reads the files of the
// stages before it, writes its own, and records a manifest
// (manifest.<stage>.json) with input/output digests, the config digest and
// component versions. Manifests carry no timestamps, so reruns with a warm
// cache reproduce them byte for byte.
//
// Stage files:
//   ingest        corpus.jsonl, corpus_summary.json
//   screen        screened.jsonl
//   extract       outcomes.jsonl, records.jsonl, extract_stats.json
//   postprocess   records.post.jsonl
//   evaluate      eval_report.json, eval_table.txt
//   judge-audit   audit.json
//   normalize     entities.jsonl, clusters.jsonl
//   categorize    domains.jsonl
//   build         kb/{nodes.jsonl, edges.jsonl, meta.json}
//   analyze       analytics.json, domain_pairs_<type>_<q>.txt
//   prep-predict  queries.jsonl, train.jsonl, validation.jsonl, test.jsonl, pool.jsonl, prep_stats.json
//   rank          rankings.jsonl, metrics.json, metrics.txt
//   rerank        reranked.jsonl, metrics_rerank.json, metrics_rerank.txt
//   export-train  contrastive.jsonl

#ifndef RECOMB_PIPELINE_HPP_
#define RECOMB_PIPELINE_HPP_

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "recomb/categorize.hpp"
#include "recomb/core.hpp"
#include "recomb/eval.hpp"
#include "recomb/extract.hpp"
#include "recomb/gateway.hpp"
#include "recomb/ingest.hpp"
#include "recomb/io.hpp"
#include "recomb/kb.hpp"
#include "recomb/normalize.hpp"
#include "recomb/predict.hpp"
#include "recomb/prompts.hpp"

namespace recomb {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Configuration

struct Models {
  std::string extract = "gpt-4o";
  std::string postprocess = "gpt-4o";
  std::string judge = "gpt-4.1";
  std::string domain = "gpt-4o";
  std::string context = "gpt-4o";
  std::string leak = "gpt-4o";
  std::string rerank = "gpt-4o";
  std::string embedding = "all-mpnet-base-v2";
};

struct BackendConfig {
  std::string kind = "mock";  // mock | http
  std::string base_url;
  std::string api_key_env = "RECOMB_API_KEY";
  std::optional<std::string> mock_script;
  std::optional<std::string> mock_embeddings;
  size_t hash_dim = 0;
  int timeout_seconds = 120;
};

struct PipelineConfig {
  std::optional<std::string> corpus;
  std::vector<std::string> categories = {"cs.AI", "cs.CL", "cs.CV", "cs.CY", "cs.HC", "cs.IR", "cs.LG", "cs.RO", "cs.SI"};
  std::optional<std::string> date_min;
  std::optional<std::string> date_max;
  std::string extract_input = "corpus";  // corpus | screened
  BackendConfig backend;
  Models models;
  std::optional<std::string> cache_dir;
  std::optional<std::string> fixed_clock;  // pins response timestamps
  double cluster_threshold = 0.05;
  std::vector<double> quantiles = {0.9, 0.98};
  std::vector<std::string> timeseries_domains = {"cs.cl", "cs.cv", "cs.ro"};
  int cutoff_year = 2024;
  double validation_fraction = kDefaultValidationFraction;
  uint64_t seed = 13;
  size_t negatives = 30;
  size_t max_in_flight = 4;
  std::optional<std::string> gold;           // annotations (JSON lines)
  std::optional<std::string> annotations_b;  // second annotator, for agreement
  size_t audit_sample = 2000;
  std::optional<std::string> audit_human;    // {paper_id, verdict} lines
  std::string host = "127.0.0.1";
  int port = 8080;

  Json raw = Json::object();  // as loaded, for the config digest

  void check() const {
    if (!(cluster_threshold >= 0 && cluster_threshold <= 2)) throw StageError("config: cluster_threshold out of [0, 2]");
    for (double q : quantiles)
      if (!(q >= 0 && q < 1)) throw StageError("config: quantiles must be in [0, 1)");
    if (validation_fraction < 0 || validation_fraction > 1) throw StageError("config: validation_fraction out of [0, 1]");
    if (max_in_flight < 1) throw StageError("config: max_in_flight must be >= 1");
    if (negatives < 1) throw StageError("config: negatives must be >= 1");
    if (extract_input != "corpus" && extract_input != "screened")
      throw StageError("config: extract_input must be corpus or screened");
    if (backend.kind != "mock" && backend.kind != "http") throw StageError("config: backend.kind must be mock or http");
    if (date_min && !Date::parse(*date_min)) throw StageError("config: bad date_min");
    if (date_max && !Date::parse(*date_max)) throw StageError("config: bad date_max");
  }

  std::string digest() const { return sha256_hex(canonical_dump(raw)); }
};

namespace detail {

template <class T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

template <class T>
void read_opt(const Json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

}  // namespace detail

// Relative paths in the config resolve against `base`.
inline PipelineConfig config_from_json(const Json& j, const fs::path& base = {}) {
  if (!j.is_object()) throw StageError("config: expected a JSON object");
  PipelineConfig c;
  c.raw = j;
  using detail::read_opt;
  try {
    read_opt(j, "corpus", c.corpus);
    read_opt(j, "categories", c.categories);
    read_opt(j, "date_min", c.date_min);
    read_opt(j, "date_max", c.date_max);
    read_opt(j, "extract_input", c.extract_input);
    read_opt(j, "cache_dir", c.cache_dir);
    read_opt(j, "fixed_clock", c.fixed_clock);
    read_opt(j, "cluster_threshold", c.cluster_threshold);
    read_opt(j, "quantiles", c.quantiles);
    read_opt(j, "timeseries_domains", c.timeseries_domains);
    read_opt(j, "cutoff_year", c.cutoff_year);
    read_opt(j, "validation_fraction", c.validation_fraction);
    read_opt(j, "seed", c.seed);
    read_opt(j, "negatives", c.negatives);
    read_opt(j, "max_in_flight", c.max_in_flight);
    read_opt(j, "gold", c.gold);
    read_opt(j, "annotations_b", c.annotations_b);
    read_opt(j, "audit_sample", c.audit_sample);
    read_opt(j, "audit_human", c.audit_human);
    read_opt(j, "host", c.host);
    read_opt(j, "port", c.port);
    if (j.contains("backend")) {
      const Json& b = j["backend"];
      read_opt(b, "kind", c.backend.kind);
      read_opt(b, "base_url", c.backend.base_url);
      read_opt(b, "api_key_env", c.backend.api_key_env);
      read_opt(b, "mock_script", c.backend.mock_script);
      read_opt(b, "mock_embeddings", c.backend.mock_embeddings);
      read_opt(b, "hash_dim", c.backend.hash_dim);
      read_opt(b, "timeout_seconds", c.backend.timeout_seconds);
    }
    if (j.contains("models")) {
      const Json& m = j["models"];
      read_opt(m, "extract", c.models.extract);
      read_opt(m, "postprocess", c.models.postprocess);
      read_opt(m, "judge", c.models.judge);
      read_opt(m, "domain", c.models.domain);
      read_opt(m, "context", c.models.context);
      read_opt(m, "leak", c.models.leak);
      read_opt(m, "rerank", c.models.rerank);
      read_opt(m, "embedding", c.models.embedding);
    }
  } catch (const Json::exception& e) {
    throw StageError(std::string("config: ") + e.what());
  }
  auto resolve = [&](std::optional<std::string>& p) {
    if (p && !base.empty() && fs::path(*p).is_relative()) p = (base / *p).string();
  };
  for (auto* p : {&c.corpus, &c.cache_dir, &c.gold, &c.annotations_b, &c.audit_human, &c.backend.mock_script,
                  &c.backend.mock_embeddings})
    resolve(*p);
  c.check();
  return c;
}

inline PipelineConfig load_config(const fs::path& path) {
  Json j = Json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw StageError("config: " + path.string() + " is not valid JSON");
  return config_from_json(j, path.parent_path());
}

inline std::shared_ptr<Backend> make_backend(const BackendConfig& b) {
  if (b.kind == "http") {
    if (b.base_url.empty()) throw StageError("config: backend.base_url is required for http backends");
    return std::make_shared<HttpBackend>(HttpBackendConfig{b.base_url, b.api_key_env, b.timeout_seconds});
  }
  std::optional<fs::path> script, emb;
  if (b.mock_script) script = *b.mock_script;
  if (b.mock_embeddings) emb = *b.mock_embeddings;
  return MockBackend::from_files(script, emb, b.hash_dim);
}

inline std::shared_ptr<Gateway> make_gateway(const PipelineConfig& c, std::shared_ptr<Backend> backend) {
  GatewayOptions o;
  if (c.cache_dir) o.cache_dir = *c.cache_dir;
  if (c.fixed_clock) o.clock = [t = *c.fixed_clock] { return t; };
  return std::make_shared<Gateway>(std::move(backend), std::move(o));
}

// ---------------------------------------------------------------------------
// Stage plumbing

struct StageContext {
  PipelineConfig config;
  fs::path dir;
  std::shared_ptr<Gateway> gateway;  // may be null for offline stages

  Gateway& gw() const {
    if (!gateway) throw StageError("this stage needs a backend");
    return *gateway;
  }
};

// Which stage produces each file; used for "run X first" errors.
inline const std::map<std::string, std::string>& file_producers() {
  static const std::map<std::string, std::string> kProducers = {
      {"corpus.jsonl", "ingest"},        {"screened.jsonl", "screen"},    {"outcomes.jsonl", "extract"},
      {"records.jsonl", "extract"},      {"records.post.jsonl", "postprocess"},
      {"entities.jsonl", "normalize"},   {"clusters.jsonl", "normalize"}, {"domains.jsonl", "categorize"},
      {"kb/meta.json", "build"},         {"queries.jsonl", "prep-predict"}, {"train.jsonl", "prep-predict"},
      {"test.jsonl", "prep-predict"},    {"pool.jsonl", "prep-predict"},  {"rankings.jsonl", "rank"},
  };
  return kProducers;
}

inline fs::path require(const StageContext& ctx, const std::string& file) {
  fs::path p = ctx.dir / file;
  if (!fs::exists(p)) {
    auto it = file_producers().find(file);
    std::string stage = it == file_producers().end() ? "the producing stage" : it->second;
    throw StageError("missing " + p.string() + ": run " + stage + " first");
  }
  return p;
}

// Post-processed records when available, else raw extraction records.
inline fs::path records_path(const StageContext& ctx) {
  if (fs::exists(ctx.dir / "records.post.jsonl")) return ctx.dir / "records.post.jsonl";
  return require(ctx, "records.jsonl");
}

inline void write_manifest(const StageContext& ctx, const std::string& stage, const std::vector<fs::path>& inputs,
                           const std::vector<fs::path>& outputs, Json extra = Json::object()) {
  Json in = Json::object(), out = Json::object();
  auto rel = [&](const fs::path& p) {
    auto r = fs::relative(p, ctx.dir);
    return r.empty() || r.native().rfind("..", 0) == 0 ? p.filename().string() : r.generic_string();
  };
  for (const auto& p : inputs)
    if (fs::is_regular_file(p)) in[rel(p)] = file_digest(p);
  for (const auto& p : outputs)
    if (fs::is_regular_file(p)) out[rel(p)] = file_digest(p);
  Json m{{"stage", stage},
         {"inputs", in},
         {"outputs", out},
         {"config_digest", ctx.config.digest()},
         {"seed", ctx.config.seed},
         {"versions",
          {{"toolkit", kToolkitVersion},
           {"prompt_set", prompts::kPromptSetVersion},
           {"catalog", kCatalogVersion},
           {"kb_format", kKbFormatVersion}}},
         {"extra", std::move(extra)}};
  write_file_atomic(ctx.dir / ("manifest." + stage + ".json"), m.dump(2) + "\n");
}

inline std::vector<AbstractDoc> read_docs(const fs::path& p) {
  std::vector<AbstractDoc> docs;
  for_each_jsonl(p, [&](const Json& j, size_t) {
    docs.push_back(doc_from_json(j));
    return true;
  });
  return docs;
}

inline std::map<std::string, AbstractDoc> docs_by_id(const std::vector<AbstractDoc>& docs) {
  std::map<std::string, AbstractDoc> m;
  for (const auto& d : docs) m.emplace(d.paper_id, d);
  return m;
}

inline std::vector<RecombinationRecord> read_records(const fs::path& p) {
  std::vector<RecombinationRecord> out;
  for_each_jsonl(p, [&](const Json& j, size_t) {
    out.push_back(record_from_json(j));
    return true;
  });
  return out;
}

inline void write_rows(const fs::path& p, const std::vector<Json>& rows) { write_jsonl(p, rows); }

// Throws when any batch item failed; the message names the first failure.
template <class T>
void require_all_ok(const std::vector<BatchResult<T>>& results, const std::string& what) {
  size_t failed = 0;
  std::string first;
  for (size_t i = 0; i < results.size(); ++i)
    if (!results[i].ok()) {
      if (!failed) first = "item " + std::to_string(i) + ": " + results[i].error;
      ++failed;
    }
  if (failed) throw StageError(what + ": " + std::to_string(failed) + " backend failures; first " + first);
}

// ---------------------------------------------------------------------------
// Stages

inline Json run_ingest(const StageContext& ctx) {
  if (!ctx.config.corpus) throw StageError("config: corpus path is required for ingest");
  CorpusFilter f;
  for (const auto& c : ctx.config.categories) f.allowed_categories.insert(c);
  if (ctx.config.date_min) f.date_min = Date::parse(*ctx.config.date_min);
  if (ctx.config.date_max) f.date_max = Date::parse(*ctx.config.date_max);
  LoadStats stats;
  auto docs = load_snapshot(*ctx.config.corpus, f, &stats);
  std::set<std::string> seen;
  std::vector<Json> rows;
  for (const auto& d : docs)
    if (seen.insert(d.paper_id).second) rows.push_back(to_json(d));
  write_rows(ctx.dir / "corpus.jsonl", rows);
  Json summary = corpus_summary(docs, stats);
  write_file_atomic(ctx.dir / "corpus_summary.json", summary.dump(2) + "\n");
  write_manifest(ctx, "ingest", {*ctx.config.corpus}, {ctx.dir / "corpus.jsonl", ctx.dir / "corpus_summary.json"});
  return summary;
}

inline Json run_screen(const StageContext& ctx) {
  auto in = require(ctx, "corpus.jsonl");
  std::vector<Json> rows;
  size_t total = 0;
  for (auto& d : read_docs(in)) {
    ++total;
    d.matched_keywords = screen_keywords(d, recombination_keywords());
    if (!d.matched_keywords.empty()) rows.push_back(to_json(d));
  }
  write_rows(ctx.dir / "screened.jsonl", rows);
  Json stats{{"documents", total}, {"matched", rows.size()}};
  write_manifest(ctx, "screen", {in}, {ctx.dir / "screened.jsonl"}, stats);
  return stats;
}

inline Json run_extract(const StageContext& ctx) {
  auto in = require(ctx, ctx.config.extract_input == "screened" ? "screened.jsonl" : "corpus.jsonl");
  auto docs = read_docs(in);
  auto& gw = ctx.gw();
  auto results = batch_execute(docs, ctx.config.max_in_flight, [&](const AbstractDoc& d) {
    return extract_salient(d, gw, ctx.config.models.extract);
  });
  require_all_ok(results, "extract");
  std::vector<Json> outcomes, records;
  std::map<std::string, size_t> kinds;
  for (size_t i = 0; i < docs.size(); ++i) {
    const auto& o = *results[i].value;
    ++kinds[std::string(to_string(o.kind))];
    outcomes.push_back(to_json(o, docs[i].paper_id));
    if (o.is_present()) records.push_back(to_json(*o.record));
  }
  write_rows(ctx.dir / "outcomes.jsonl", outcomes);
  write_rows(ctx.dir / "records.jsonl", records);
  Json stats{{"documents", docs.size()}, {"outcomes", kinds}};
  write_file_atomic(ctx.dir / "extract_stats.json", stats.dump(2) + "\n");
  write_manifest(ctx, "extract", {in}, {ctx.dir / "outcomes.jsonl", ctx.dir / "records.jsonl"}, stats);
  return stats;
}

inline Json run_postprocess(const StageContext& ctx) {
  auto in = require(ctx, "records.jsonl");
  auto corpus = require(ctx, "corpus.jsonl");
  auto docs = docs_by_id(read_docs(corpus));
  auto records = read_records(in);
  auto& gw = ctx.gw();
  auto results = batch_execute(records, ctx.config.max_in_flight, [&](const RecombinationRecord& r) {
    auto it = docs.find(r.paper_id);
    if (it == docs.end()) throw StageError("record for unknown paper " + r.paper_id);
    return postprocess_record(r, it->second, gw, ctx.config.models.postprocess);
  });
  require_all_ok(results, "postprocess");
  std::vector<Json> rows;
  size_t refined = 0;
  for (const auto& r : results) {
    rows.push_back(to_json(*r.value));
    refined += r.value->entities.front().refined_text.has_value();
  }
  write_rows(ctx.dir / "records.post.jsonl", rows);
  Json stats{{"records", rows.size()}, {"refined", refined}};
  write_manifest(ctx, "postprocess", {in, corpus}, {ctx.dir / "records.post.jsonl"}, stats);
  return stats;
}

inline std::vector<GoldAnnotation> read_annotations(const fs::path& p) {
  std::vector<GoldAnnotation> out;
  for_each_jsonl(p, [&](const Json& j, size_t) {
    out.push_back(annotation_from_json(j));
    return true;
  });
  return out;
}

inline Json run_evaluate(const StageContext& ctx) {
  if (!ctx.config.gold) throw StageError("config: gold annotations path is required for evaluate");
  auto outcomes_p = require(ctx, "outcomes.jsonl");
  auto corpus_p = require(ctx, "corpus.jsonl");
  auto docs = docs_by_id(read_docs(corpus_p));
  auto gold = read_annotations(*ctx.config.gold);
  std::vector<GoldAnnotation> pred;
  for_each_jsonl(outcomes_p, [&](const Json& j, size_t) {
    GoldAnnotation a{j.at("paper_id").get<std::string>(), "model", GoldLabel::kNotPresent, {}};
    if (j.value("kind", "") == "present") {
      auto r = record_from_json(j.at("record"));
      a.label = r.relation_type == RelationType::kBlend ? GoldLabel::kBlend : GoldLabel::kInspiration;
      a.entities = r.entities;
    }
    pred.push_back(std::move(a));
    return true;
  });
  auto& gw = ctx.gw();
  JudgeFactory judge_for = [&](const std::string& paper_id) {
    auto it = docs.find(paper_id);
    return llm_span_judge(gw, ctx.config.models.judge, it == docs.end() ? std::string() : it->second.abstract);
  };
  auto report = extraction_report(gold, pred, judge_for);
  Json out{{"extraction", to_json(report)}};
  std::string table = format_table(report, ctx.config.models.extract);
  if (ctx.config.annotations_b) {
    auto b = read_annotations(*ctx.config.annotations_b);
    auto iaa = iaa_report(gold, b, judge_for);
    out["agreement"] = to_json(iaa);
    table += "\n" + format_table(iaa, "annotator B");
  }
  write_file_atomic(ctx.dir / "eval_report.json", out.dump(2) + "\n");
  write_file_atomic(ctx.dir / "eval_table.txt", table);
  write_manifest(ctx, "evaluate", {outcomes_p, corpus_p, *ctx.config.gold},
                 {ctx.dir / "eval_report.json", ctx.dir / "eval_table.txt"});
  return out;
}

inline Json run_judge_audit(const StageContext& ctx) {
  auto rec_p = records_path(ctx);
  auto corpus_p = require(ctx, "corpus.jsonl");
  auto docs = docs_by_id(read_docs(corpus_p));
  auto records = read_records(rec_p);
  if (records.empty()) throw StageError("judge-audit: no records to audit");
  std::vector<size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(ctx.config.seed);
  detail::seeded_shuffle(idx, rng);
  idx.resize(std::min(idx.size(), ctx.config.audit_sample));
  std::sort(idx.begin(), idx.end());
  std::map<std::string, bool> human;
  if (ctx.config.audit_human)
    for_each_jsonl(*ctx.config.audit_human, [&](const Json& j, size_t) {
      human[j.at("paper_id").get<std::string>()] = j.at("verdict").get<bool>();
      return true;
    });
  std::vector<AuditItem> sample;
  for (size_t i : idx) {
    const auto& r = records[i];
    auto d = docs.find(r.paper_id);
    AuditItem it{d == docs.end() ? "" : d->second.abstract, r, std::nullopt};
    if (auto h = human.find(r.paper_id); h != human.end()) it.human_verdict = h->second;
    sample.push_back(std::move(it));
  }
  auto res = accuracy_audit(sample, ctx.gw(), ctx.config.models.judge, ctx.config.max_in_flight);
  Json out = to_json(res);
  Json ids = Json::array();
  for (const auto& s : sample) ids.push_back(s.record.paper_id);
  out["paper_ids"] = ids;
  write_file_atomic(ctx.dir / "audit.json", out.dump(2) + "\n");
  write_manifest(ctx, "judge-audit", {rec_p, corpus_p}, {ctx.dir / "audit.json"});
  if (!res.complete) throw StageError("judge-audit: incomplete, " + std::to_string(res.errors.size()) +
                                      " items failed (partial results in audit.json)");
  return out;
}

inline Json run_normalize(const StageContext& ctx) {
  auto rec_p = records_path(ctx);
  auto corpus_p = require(ctx, "corpus.jsonl");
  auto docs = docs_by_id(read_docs(corpus_p));
  auto records = read_records(rec_p);
  struct Row {
    std::string paper_id, text, surface, normalized;
  };
  std::vector<Row> rows;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : records) {
    auto d = docs.find(r.paper_id);
    std::string abstract = d == docs.end() ? "" : d->second.abstract;
    for (const auto& e : r.entities) {
      if (!seen.insert({r.paper_id, e.text}).second) continue;
      std::string surface = entity_surface(e);
      std::string norm = expand_abbreviations(surface, abstract);
      if (trim(norm).empty()) norm = surface;
      rows.push_back({r.paper_id, e.text, surface, norm});
    }
  }
  if (rows.empty()) throw StageError("normalize: no entities (extraction produced no records)");
  std::vector<std::string> texts;
  for (const auto& r : rows) texts.push_back(r.normalized);
  ClusterOptions opts;
  opts.model = ctx.config.models.embedding;
  opts.threshold = ctx.config.cluster_threshold;
  auto ca = cluster_entities(texts, ctx.gw(), opts);
  std::vector<Json> out, clusters;
  for (size_t i = 0; i < rows.size(); ++i) {
    size_t c = ca.entity_cluster[i];
    out.push_back(Json{{"paper_id", rows[i].paper_id},
                       {"text", rows[i].text},
                       {"surface", rows[i].surface},
                       {"normalized", rows[i].normalized},
                       {"cluster_id", c},
                       {"canonical", ca.clusters[c].canonical}});
  }
  for (const auto& c : ca.clusters)
    clusters.push_back(Json{{"cluster_id", c.id}, {"canonical", c.canonical}, {"members", c.members}});
  write_rows(ctx.dir / "entities.jsonl", out);
  write_rows(ctx.dir / "clusters.jsonl", clusters);
  Json stats{{"entities", rows.size()}, {"clusters", ca.clusters.size()}};
  write_manifest(ctx, "normalize", {rec_p, corpus_p}, {ctx.dir / "entities.jsonl", ctx.dir / "clusters.jsonl"}, stats);
  return stats;
}

inline Json run_categorize(const StageContext& ctx) {
  auto rec_p = records_path(ctx);
  auto corpus_p = require(ctx, "corpus.jsonl");
  auto docs = docs_by_id(read_docs(corpus_p));
  auto records = read_records(rec_p);
  auto& gw = ctx.gw();
  auto results = batch_execute(records, ctx.config.max_in_flight, [&](const RecombinationRecord& r) {
    auto d = docs.find(r.paper_id);
    return assign_domains(r, d == docs.end() ? "" : d->second.abstract, gw, ctx.config.models.domain);
  });
  require_all_ok(results, "categorize");
  std::vector<Json> rows;
  std::map<std::string, size_t> kinds;
  std::set<std::pair<std::string, std::string>> seen;
  for (size_t i = 0; i < records.size(); ++i)
    for (size_t k = 0; k < records[i].entities.size(); ++k) {
      const auto& label = (*results[i].value)[k];
      if (!seen.insert({records[i].paper_id, records[i].entities[k].text}).second) continue;
      ++kinds[std::string(to_string(label.kind))];
      rows.push_back(Json{{"paper_id", records[i].paper_id},
                          {"text", records[i].entities[k].text},
                          {"domain", to_json(label)}});
    }
  write_rows(ctx.dir / "domains.jsonl", rows);
  Json stats{{"entities", rows.size()}, {"kinds", kinds}};
  write_manifest(ctx, "categorize", {rec_p, corpus_p}, {ctx.dir / "domains.jsonl"}, stats);
  return stats;
}

inline Json run_build(const StageContext& ctx) {
  auto ent_p = require(ctx, "entities.jsonl");
  auto clu_p = require(ctx, "clusters.jsonl");
  auto dom_p = require(ctx, "domains.jsonl");
  auto rec_p = records_path(ctx);
  auto corpus_p = require(ctx, "corpus.jsonl");
  BuildInputs in;
  in.docs = docs_by_id(read_docs(corpus_p));
  for (const auto& r : read_records(rec_p))
    for (auto& b : binarize(r)) in.records.push_back(std::move(b));
  for_each_jsonl(clu_p, [&](const Json& j, size_t) {
    Cluster c;
    c.id = j.at("cluster_id").get<size_t>();
    c.canonical = j.at("canonical").get<std::string>();
    c.members = j.at("members").get<std::map<std::string, size_t>>();
    in.clusters.push_back(std::move(c));
    return true;
  });
  std::sort(in.clusters.begin(), in.clusters.end(), [](const Cluster& a, const Cluster& b) { return a.id < b.id; });
  for_each_jsonl(ent_p, [&](const Json& j, size_t) {
    in.entity_cluster[{j.at("paper_id").get<std::string>(), j.at("text").get<std::string>()}] =
        j.at("cluster_id").get<size_t>();
    return true;
  });
  for_each_jsonl(dom_p, [&](const Json& j, size_t) {
    in.entity_domain[{j.at("paper_id").get<std::string>(), j.at("text").get<std::string>()}] =
        domain_from_json(j.at("domain"));
    return true;
  });
  Json meta{{"corpus_digest", file_digest(corpus_p)},
            {"records_digest", file_digest(rec_p)},
            {"entities_digest", file_digest(ent_p)},
            {"domains_digest", file_digest(dom_p)},
            {"toolkit", kToolkitVersion},
            {"prompt_set", prompts::kPromptSetVersion},
            {"catalog", kCatalogVersion}};
  KbSnapshot kb;
  try {
    kb = build_graph(in, meta);
  } catch (const KbError& e) {
    throw StageError(std::string("build: ") + e.what() + " (rerun normalize and categorize)");
  }
  save_kb(kb, ctx.dir / "kb");
  auto summary = to_json(interdisciplinary_summary(kb));
  write_manifest(ctx, "build", {corpus_p, rec_p, ent_p, clu_p, dom_p},
                 {ctx.dir / "kb/nodes.jsonl", ctx.dir / "kb/edges.jsonl", ctx.dir / "kb/meta.json"}, summary);
  return summary;
}

inline std::string quantile_tag(double q) {
  std::ostringstream s;
  s << q;
  return s.str();
}

inline Json run_analyze(const StageContext& ctx) {
  require(ctx, "kb/meta.json");
  auto kb = load_kb(ctx.dir / "kb");
  Json out{{"summary", to_json(interdisciplinary_summary(kb))}};
  std::vector<fs::path> outputs{ctx.dir / "analytics.json"};
  Json pairs = Json::object();
  for (RelationType t : {RelationType::kInspiration, RelationType::kBlend}) {
    std::string tn(to_string(t));
    for (double q : ctx.config.quantiles) {
      auto rows = domain_pair_table(kb, t, q);
      Json jr = Json::array();
      for (const auto& r : rows) jr.push_back(Json{{"source", r.source}, {"target", r.target}, {"count", r.count}});
      pairs[tn][quantile_tag(q)] = jr;
      fs::path txt = ctx.dir / ("domain_pairs_" + tn + "_" + quantile_tag(q) + ".txt");
      write_file_atomic(txt, format_domain_pairs(rows));
      outputs.push_back(txt);
    }
  }
  out["domain_pairs"] = pairs;
  Json ts = Json::object();
  for (const auto& d : ctx.config.timeseries_domains) {
    Json years = Json::object();
    for (const auto& [y, dist] : inspiration_timeseries(kb, d)) years[std::to_string(y)] = dist;
    ts[to_lower(d)] = years;
  }
  out["timeseries"] = ts;
  write_file_atomic(ctx.dir / "analytics.json", out.dump(2) + "\n");
  write_manifest(ctx, "analyze", {ctx.dir / "kb/nodes.jsonl", ctx.dir / "kb/edges.jsonl"}, outputs);
  return out;
}

inline Json run_prep_predict(const StageContext& ctx) {
  require(ctx, "kb/meta.json");
  auto corpus_p = require(ctx, "corpus.jsonl");
  auto kb = load_kb(ctx.dir / "kb");
  auto docs = docs_by_id(read_docs(corpus_p));
  auto& gw = ctx.gw();
  std::vector<const RecombinationEdge*> edges;
  for (const auto& e : kb.edges)
    if (!e.self_loop) edges.push_back(&e);
  auto contexts = batch_execute(edges, ctx.config.max_in_flight, [&](const RecombinationEdge* e) {
    auto d = docs.find(e->paper_id);
    if (d == docs.end()) throw StageError("edge references unknown paper " + e->paper_id);
    const std::string& src = e->text_a;
    const std::string& tgt = e->text_b;
    return extract_context(d->second.abstract, e->type, src, tgt, gw, ctx.config.models.context);
  });
  require_all_ok(contexts, "prep-predict contexts");
  std::vector<PredictionQuery> candidates;
  std::vector<std::string> answers;
  for (size_t i = 0; i < edges.size(); ++i)
    for (auto& q : queries_for_edge(*edges[i])) {
      q.context = *contexts[i].value;
      answers.push_back(q.gold_node == edges[i]->a ? edges[i]->text_a : edges[i]->text_b);
      candidates.push_back(std::move(q));
    }
  std::vector<size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  auto leaks = batch_execute(order, ctx.config.max_in_flight, [&](size_t i) {
    return detect_leak(candidates[i].query_text(), answers[i], gw, ctx.config.models.leak);
  });
  require_all_ok(leaks, "prep-predict leak detection");
  std::vector<PredictionQuery> kept;
  size_t discarded = 0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (*leaks[i].value) ++discarded;
    else kept.push_back(candidates[i]);
  }
  auto splits = split_by_cutoff(kept, ctx.config.cutoff_year, ctx.config.validation_fraction, ctx.config.seed);
  auto dump = [&](const char* name, const std::vector<PredictionQuery>& qs) {
    std::vector<Json> rows;
    for (const auto& q : qs) rows.push_back(to_json(q));
    write_rows(ctx.dir / name, rows);
  };
  dump("queries.jsonl", kept);
  dump("train.jsonl", splits.train);
  dump("validation.jsonl", splits.validation);
  dump("test.jsonl", splits.test);
  std::vector<Json> pool;
  for (const auto& c : candidate_pool(kb, splits.test)) pool.push_back(Json{{"node_id", c.node_id}, {"text", c.text}});
  write_rows(ctx.dir / "pool.jsonl", pool);
  double rate = candidates.empty() ? 0.0 : static_cast<double>(discarded) / static_cast<double>(candidates.size());
  Json stats{{"pairs", candidates.size()},
             {"leak_discarded", discarded},
             {"leak_discard_rate", rate},
             {"train", splits.train.size()},
             {"validation", splits.validation.size()},
             {"test", splits.test.size()},
             {"pool", pool.size()}};
  write_file_atomic(ctx.dir / "prep_stats.json", stats.dump(2) + "\n");
  write_manifest(ctx, "prep-predict", {ctx.dir / "kb/edges.jsonl", corpus_p},
                 {ctx.dir / "queries.jsonl", ctx.dir / "train.jsonl", ctx.dir / "validation.jsonl",
                  ctx.dir / "test.jsonl", ctx.dir / "pool.jsonl"},
                 stats);
  return stats;
}

inline std::vector<PredictionQuery> read_queries(const fs::path& p) {
  std::vector<PredictionQuery> out;
  for_each_jsonl(p, [&](const Json& j, size_t) {
    out.push_back(query_from_json(j));
    return true;
  });
  return out;
}

inline std::vector<Candidate> read_pool(const fs::path& p) {
  std::vector<Candidate> out;
  for_each_jsonl(p, [&](const Json& j, size_t) {
    out.push_back({j.at("node_id").get<size_t>(), j.at("text").get<std::string>()});
    return true;
  });
  return out;
}

inline Json run_rank(const StageContext& ctx) {
  auto test_p = require(ctx, "test.jsonl");
  auto pool_p = require(ctx, "pool.jsonl");
  require(ctx, "kb/meta.json");
  auto kb = load_kb(ctx.dir / "kb");
  auto queries = read_queries(test_p);
  auto pool = read_pool(pool_p);
  if (queries.empty()) throw StageError("rank: test split is empty");
  KnownAnswers known(kb);
  auto& gw = ctx.gw();
  std::vector<std::string> texts;
  for (const auto& c : pool) texts.push_back(c.text);
  auto pool_vecs = gw.embed(EmbedRequest{ctx.config.models.embedding, texts, true});
  std::vector<std::string> qtexts;
  for (const auto& q : queries) qtexts.push_back(q.query_text());
  auto qvecs = gw.embed(EmbedRequest{ctx.config.models.embedding, qtexts, true});
  std::vector<Json> rows;
  std::vector<size_t> ranks;
  for (size_t i = 0; i < queries.size(); ++i) {
    auto rq = rank_with_vectors(queries[i], qvecs[i], pool, pool_vecs, known);
    ranks.push_back(rq.filtered_rank);
    rows.push_back(to_json(rq));
  }
  write_rows(ctx.dir / "rankings.jsonl", rows);
  auto m = ranking_metrics(ranks);
  write_file_atomic(ctx.dir / "metrics.json", to_json(m).dump(2) + "\n");
  write_file_atomic(ctx.dir / "metrics.txt", format_metrics_table(m, ctx.config.models.embedding));
  write_manifest(ctx, "rank", {test_p, pool_p, ctx.dir / "kb/edges.jsonl"},
                 {ctx.dir / "rankings.jsonl", ctx.dir / "metrics.json", ctx.dir / "metrics.txt"});
  return to_json(m);
}

inline Json run_rerank(const StageContext& ctx) {
  auto rank_p = require(ctx, "rankings.jsonl");
  auto test_p = require(ctx, "test.jsonl");
  require(ctx, "kb/meta.json");
  auto kb = load_kb(ctx.dir / "kb");
  std::map<std::string, PredictionQuery> by_id;
  for (auto& q : read_queries(test_p)) by_id.emplace(q.query_id, std::move(q));
  struct Item {
    PredictionQuery q;
    std::vector<Candidate> top;
    size_t filtered_rank = 0;
  };
  std::vector<Item> items;
  for_each_jsonl(rank_p, [&](const Json& j, size_t) {
    auto it = by_id.find(j.at("query_id").get<std::string>());
    if (it == by_id.end()) throw StageError("rankings reference unknown query " + j["query_id"].dump());
    Item item{it->second, {}, j.at("filtered_rank").get<size_t>()};
    for (const auto& c : j.at("ranking")) {
      if (item.top.size() == 20) break;
      size_t id = c.at("node_id").get<size_t>();
      item.top.push_back({id, kb.node(id).canonical});
    }
    items.push_back(std::move(item));
    return true;
  });
  auto& gw = ctx.gw();
  auto results = batch_execute(items, ctx.config.max_in_flight, [&](const Item& it) {
    return rerank_top_k(it.q.query_text(), it.top, gw, ctx.config.models.rerank);
  });
  require_all_ok(results, "rerank");
  std::vector<Json> rows;
  std::vector<size_t> ranks;
  for (size_t i = 0; i < items.size(); ++i) {
    size_t rank = items[i].filtered_rank;
    Json order = Json::array();
    const auto& top = *results[i].value;
    for (size_t k = 0; k < top.size(); ++k) {
      order.push_back(top[k].node_id);
      if (top[k].node_id == items[i].q.gold_node) rank = k + 1;
    }
    ranks.push_back(rank);
    rows.push_back(Json{{"query_id", items[i].q.query_id},
                        {"filtered_rank", rank},
                        {"first_stage_rank", items[i].filtered_rank},
                        {"top", order}});
  }
  if (ranks.empty()) throw StageError("rerank: no rankings");
  write_rows(ctx.dir / "reranked.jsonl", rows);
  auto m = ranking_metrics(ranks);
  write_file_atomic(ctx.dir / "metrics_rerank.json", to_json(m).dump(2) + "\n");
  write_file_atomic(ctx.dir / "metrics_rerank.txt",
                    format_metrics_table(m, ctx.config.models.embedding + " + " + ctx.config.models.rerank));
  write_manifest(ctx, "rerank", {rank_p, test_p},
                 {ctx.dir / "reranked.jsonl", ctx.dir / "metrics_rerank.json", ctx.dir / "metrics_rerank.txt"});
  return to_json(m);
}

inline Json run_export_train(const StageContext& ctx) {
  auto train_p = require(ctx, "train.jsonl");
  require(ctx, "kb/meta.json");
  auto kb = load_kb(ctx.dir / "kb");
  auto train = read_queries(train_p);
  std::vector<size_t> pool;
  for (const auto& n : kb.nodes) pool.push_back(n.node_id);
  auto rows = export_contrastive_pairs(train, pool, KnownAnswers(kb), ctx.config.negatives, ctx.config.seed);
  std::vector<Json> out;
  for (const auto& r : rows) out.push_back(to_json(r));
  write_rows(ctx.dir / "contrastive.jsonl", out);
  Json stats{{"positives", train.size()}, {"rows", rows.size()}};
  write_manifest(ctx, "export-train", {train_p, ctx.dir / "kb/edges.jsonl"}, {ctx.dir / "contrastive.jsonl"}, stats);
  return stats;
}

}  // namespace recomb

#endif  // RECOMB_PIPELINE_HPP_
