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

// Read-only HTTP API over a KB snapshot plus the /suggest ideation
// endpoint.
//
//   GET  /health
//   GET  /nodes/{id}
//   GET  /edges?type&source_domain&target_domain&year_from&year_to&q&limit&offset
//   GET  /analytics/domain-pairs?type&quantile
//   GET  /analytics/timeseries?source_domain
//   POST /suggest  {"context", "entity", "relation_type", "top_k", "rerank"}
//
// Request handling is separated from the socket layer (Api) so it can be
// exercised directly; Server binds it to cpp-httplib.

#ifndef RECOMB_SERVICE_HPP_
#define RECOMB_SERVICE_HPP_

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "recomb/gateway.hpp"
#include "recomb/kb.hpp"
#include "recomb/predict.hpp"

namespace recomb {

// Immutable state behind one API generation.
struct ServiceState {
  KbSnapshot kb;
  std::vector<Candidate> pool;
  KnownAnswers known;
  std::vector<std::vector<std::string>> node_papers;  // node -> sorted paper ids

  // Pool defaults to every node that appears on at least one edge.
  static std::shared_ptr<const ServiceState> make(KbSnapshot kb, std::optional<std::vector<size_t>> pool_ids = {}) {
    auto s = std::make_shared<ServiceState>();
    s->kb = std::move(kb);
    s->known = KnownAnswers(s->kb);
    std::vector<std::set<std::string>> papers(s->kb.nodes.size());
    for (const auto& e : s->kb.edges) {
      papers[e.a].insert(e.paper_id);
      papers[e.b].insert(e.paper_id);
    }
    for (auto& p : papers) s->node_papers.emplace_back(p.begin(), p.end());
    if (pool_ids) {
      for (size_t id : *pool_ids) s->pool.push_back({id, s->kb.node(id).canonical});
    } else {
      for (const auto& n : s->kb.nodes)
        if (!s->node_papers[n.node_id].empty()) s->pool.push_back({n.node_id, n.canonical});
    }
    return s;
  }
};

struct ApiResponse {
  int status = 200;
  Json body;
};

struct SuggestConfig {
  std::shared_ptr<Gateway> gateway;  // null: /suggest answers 503
  std::string embedding_model = "all-mpnet-base-v2";
  std::string rerank_model;          // empty: reranking unavailable
  size_t max_top_k = 50;
};

using Params = std::multimap<std::string, std::string>;

class Api {
 public:
  Api(std::shared_ptr<const ServiceState> state, SuggestConfig cfg) : state_(std::move(state)), cfg_(std::move(cfg)) {
    if (!state_) throw std::invalid_argument("Api: null state");
  }

  // Atomic from the client's view: each request sees exactly one state.
  void swap_state(std::shared_ptr<const ServiceState> next) {
    if (!next) throw std::invalid_argument("Api: null state");
    std::lock_guard lock(mu_);
    state_ = std::move(next);
  }

  std::shared_ptr<const ServiceState> state() const {
    std::lock_guard lock(mu_);
    return state_;
  }

  ApiResponse health() const {
    auto s = state();
    return {200, Json{{"status", "ok"}, {"nodes", s->kb.nodes.size()}, {"edges", s->kb.edges.size()}}};
  }

  ApiResponse node(const std::string& id_text) const {
    auto s = state();
    auto id = parse_index(id_text);
    if (!id) return bad_request("id", "must be a non-negative integer");
    if (*id >= s->kb.nodes.size()) return {404, Json{{"error", "not found"}, {"field", "id"}}};
    Json j = to_json(s->kb.nodes[*id]);
    j["papers"] = s->node_papers[*id];
    return {200, j};
  }

  ApiResponse edges(const Params& p) const {
    auto s = state();
    EdgeFacets f;
    if (auto v = get(p, "type")) {
      auto t = parse_relation_type(*v);
      if (!t) return bad_request("type", "must be blend or inspiration");
      f.type = t;
    }
    if (auto v = get(p, "source_domain")) f.source_domain = *v;
    if (auto v = get(p, "target_domain")) f.target_domain = *v;
    if (auto v = get(p, "q")) f.text = *v;
    for (const char* key : {"year_from", "year_to"}) {
      if (auto v = get(p, key)) {
        auto y = parse_index(*v);
        if (!y || *y > 9999) return bad_request(key, "must be a year");
        (std::string(key) == "year_from" ? f.year_from : f.year_to) = static_cast<int>(*y);
      }
    }
    size_t limit = 50, offset = 0;
    if (auto v = get(p, "limit")) {
      auto x = parse_index(*v);
      if (!x || *x < 1 || *x > 1000) return bad_request("limit", "must be in [1, 1000]");
      limit = *x;
    }
    if (auto v = get(p, "offset")) {
      auto x = parse_index(*v);
      if (!x) return bad_request("offset", "must be a non-negative integer");
      offset = *x;
    }
    auto hits = query_edges(s->kb, f);
    Json rows = Json::array();
    for (size_t i = offset; i < hits.size() && i < offset + limit; ++i) rows.push_back(edge_view(*s, *hits[i]));
    return {200, Json{{"total", hits.size()}, {"offset", offset}, {"limit", limit}, {"edges", rows}}};
  }

  ApiResponse domain_pairs(const Params& p) const {
    auto s = state();
    RelationType type = RelationType::kInspiration;
    if (auto v = get(p, "type")) {
      auto t = parse_relation_type(*v);
      if (!t) return bad_request("type", "must be blend or inspiration");
      type = *t;
    }
    double q = 0.9;
    if (auto v = get(p, "quantile")) {
      auto x = parse_double(*v);
      if (!x || !(*x >= 0.0 && *x < 1.0)) return bad_request("quantile", "must be in [0, 1)");
      q = *x;
    }
    Json rows = Json::array();
    for (const auto& r : domain_pair_table(s->kb, type, q))
      rows.push_back(Json{{"source", r.source}, {"target", r.target}, {"count", r.count}});
    return {200, Json{{"type", to_string(type)}, {"quantile", q}, {"rows", rows}}};
  }

  ApiResponse timeseries(const Params& p) const {
    auto s = state();
    auto src = get(p, "source_domain");
    if (!src || trim(*src).empty()) return bad_request("source_domain", "is required");
    Json years = Json::object();
    for (const auto& [year, dist] : inspiration_timeseries(s->kb, *src)) years[std::to_string(year)] = dist;
    return {200, Json{{"source_domain", to_lower(*src)}, {"years", years}}};
  }

  ApiResponse suggest(const std::string& raw_body) const {
    auto s = state();
    Json body = Json::parse(raw_body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) return bad_request("body", "must be a JSON object");
    if (!body.contains("entity") || !body["entity"].is_string() || trim(body["entity"].get<std::string>()).empty())
      return bad_request("entity", "must be a nonempty string");
    std::string entity = trim(body["entity"].get<std::string>());
    std::string context = body.contains("context") && body["context"].is_string() ? body["context"].get<std::string>() : "";
    RelationType type = RelationType::kInspiration;
    if (body.contains("relation_type")) {
      auto t = body["relation_type"].is_string() ? parse_relation_type(body["relation_type"].get<std::string>())
                                                 : std::nullopt;
      if (!t) return bad_request("relation_type", "must be blend or inspiration");
      type = *t;
    }
    size_t top_k = 10;
    if (body.contains("top_k")) {
      if (!body["top_k"].is_number_integer() || body["top_k"].get<long>() < 1 ||
          body["top_k"].get<long>() > static_cast<long>(cfg_.max_top_k))
        return bad_request("top_k", "must be an integer in [1, " + std::to_string(cfg_.max_top_k) + "]");
      top_k = body["top_k"].get<size_t>();
    }
    bool rerank = body.value("rerank", false);
    if (rerank && cfg_.rerank_model.empty()) return bad_request("rerank", "no reranker configured");
    if (!cfg_.gateway) return {503, Json{{"error", "no embedding backend configured"}}};
    if (s->pool.empty()) return {503, Json{{"error", "empty candidate pool"}}};

    // Filter against known answers when the entity names a node.
    PredictionQuery q;
    q.query_id = "suggest";
    q.context = trim(context);
    q.given_text = entity;
    q.relation_type = type;
    q.question = question_for(type, entity);
    std::optional<size_t> given = find_node(s->kb, entity);
    try {
      std::vector<std::string> texts;
      for (const auto& c : s->pool) texts.push_back(c.text);
      auto pool_vecs = cfg_.gateway->embed(EmbedRequest{cfg_.embedding_model, texts, true});
      Vector qv = cfg_.gateway->embed_one(cfg_.embedding_model, q.query_text());
      std::vector<ScoredCandidate> ranking;
      for (size_t i = 0; i < s->pool.size(); ++i) {
        if (given && s->pool[i].node_id == *given) continue;
        double sc = 0;
        for (size_t k = 0; k < qv.size(); ++k) sc += qv[k] * pool_vecs[i][k];
        ranking.push_back({s->pool[i].node_id, sc});
      }
      sort_ranking(ranking);
      if (rerank) {
        size_t n = std::min<size_t>(20, ranking.size());
        std::vector<Candidate> top;
        std::map<size_t, double> score;
        for (size_t i = 0; i < n; ++i) {
          top.push_back({ranking[i].node_id, s->kb.nodes[ranking[i].node_id].canonical});
          score[ranking[i].node_id] = ranking[i].score;
        }
        top = rerank_top_k(q.query_text(), top, *cfg_.gateway, cfg_.rerank_model);
        for (size_t i = 0; i < n; ++i) ranking[i] = {top[i].node_id, score[top[i].node_id]};
      }
      Json out = Json::array();
      for (size_t i = 0; i < ranking.size() && out.size() < top_k; ++i) {
        const auto& n = s->kb.nodes[ranking[i].node_id];
        out.push_back(Json{{"node_id", n.node_id},
                           {"canonical", n.canonical},
                           {"score", ranking[i].score},
                           {"domain", to_json(n.domain)},
                           {"papers", s->node_papers[n.node_id]}});
      }
      return {200, Json{{"question", q.question},
                        {"given_node", given ? Json(*given) : Json(nullptr)},
                        {"suggestions", out}}};
    } catch (const std::exception& e) {
      return {503, Json{{"error", std::string("backend unavailable: ") + e.what()}}};
    }
  }

 private:
  static ApiResponse bad_request(const std::string& field, const std::string& msg) {
    return {400, Json{{"error", field + " " + msg}, {"field", field}}};
  }

  static std::optional<std::string> get(const Params& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) return std::nullopt;
    return it->second;
  }

  static std::optional<size_t> parse_index(const std::string& s) {
    if (s.empty() || s.size() > 12) return std::nullopt;
    size_t v = 0;
    for (char c : s) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      v = v * 10 + static_cast<size_t>(c - '0');
    }
    return v;
  }

  static std::optional<double> parse_double(const std::string& s) {
    try {
      size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) return std::nullopt;
      return v;
    } catch (...) {
      return std::nullopt;
    }
  }

  static std::optional<size_t> find_node(const KbSnapshot& kb, const std::string& text) {
    std::string t = normalize_text(text);
    for (const auto& n : kb.nodes) {
      if (normalize_text(n.canonical) == t) return n.node_id;
      for (const auto& s : n.surface_forms)
        if (normalize_text(s) == t) return n.node_id;
    }
    return std::nullopt;
  }

  static Json edge_view(const ServiceState& s, const RecombinationEdge& e) {
    Json j = to_json(e);
    j["a_name"] = s.kb.nodes[e.a].canonical;
    j["b_name"] = s.kb.nodes[e.b].canonical;
    j["a_domain"] = s.kb.nodes[e.a].domain.grouped;
    j["b_domain"] = s.kb.nodes[e.b].domain.grouped;
    return j;
  }

  mutable std::mutex mu_;
  std::shared_ptr<const ServiceState> state_;
  SuggestConfig cfg_;
};

// cpp-httplib binding for Api.
class Server {
 public:
  explicit Server(std::shared_ptr<Api> api) : api_(std::move(api)) {
    auto params_of = [](const httplib::Request& req) {
      Params p;
      for (const auto& [k, v] : req.params) p.emplace(k, v);
      return p;
    };
    auto reply = [](httplib::Response& res, const ApiResponse& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    http_.Get("/health", [=, this](const httplib::Request&, httplib::Response& res) { reply(res, api_->health()); });
    http_.Get(R"(/nodes/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
      reply(res, api_->node(req.matches[1]));
    });
    http_.Get("/edges", [=, this](const httplib::Request& req, httplib::Response& res) {
      reply(res, api_->edges(params_of(req)));
    });
    http_.Get("/analytics/domain-pairs", [=, this](const httplib::Request& req, httplib::Response& res) {
      reply(res, api_->domain_pairs(params_of(req)));
    });
    http_.Get("/analytics/timeseries", [=, this](const httplib::Request& req, httplib::Response& res) {
      reply(res, api_->timeseries(params_of(req)));
    });
    http_.Post("/suggest", [=, this](const httplib::Request& req, httplib::Response& res) {
      reply(res, api_->suggest(req.body));
    });
    http_.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) res.set_content(Json{{"error", "not found"}}.dump(), "application/json");
    });
  }

  // Binds and serves on a background thread; returns the bound port.
  // Throws on bind failure.
  int start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
      bound = http_.bind_to_any_port(host);
      if (bound < 0) throw std::runtime_error("cannot bind " + host);
    } else if (!http_.bind_to_port(host, port)) {
      throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    }
    thread_ = std::thread([this] { http_.listen_after_bind(); });
    http_.wait_until_ready();
    return bound;
  }

  // Blocks until stop() (from another thread or a signal handler).
  void run(const std::string& host, int port) {
    if (!http_.bind_to_port(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    http_.listen_after_bind();
  }

  void stop() {
    http_.stop();
    if (thread_.joinable()) thread_.join();
  }

  ~Server() { stop(); }

 private:
  std::shared_ptr<Api> api_;
  httplib::Server http_;
  std::thread thread_;
};

}  // namespace recomb

#endif  // RECOMB_SERVICE_HPP_
