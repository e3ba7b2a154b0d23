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

// The recombination graph: concept nodes, typed edges, faceted queries and
// the meta-science analytics.
//
// On disk a snapshot is a directory with nodes.jsonl, edges.jsonl and
// meta.json, all written in canonical (sorted-key) JSON.

#ifndef RECOMB_KB_HPP_
#define RECOMB_KB_HPP_

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "recomb/categorize.hpp"
#include "recomb/core.hpp"
#include "recomb/extract.hpp"
#include "recomb/io.hpp"
#include "recomb/normalize.hpp"

namespace recomb {

class KbError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kKbFormatVersion = "1";

struct ConceptNode {
  size_t node_id = 0;
  std::string canonical;
  std::vector<std::string> surface_forms;  // sorted, distinct
  DomainLabel domain;
  std::optional<Date> first_seen;

  bool operator==(const ConceptNode&) const = default;
};

struct RecombinationEdge {
  size_t edge_id = 0;
  RelationType type = RelationType::kBlend;
  size_t a = 0;  // inspiration: source
  size_t b = 0;  // inspiration: target
  std::string paper_id;
  size_t pair_index = 0;
  Date published;
  std::vector<std::string> arxiv_categories;
  bool interdisciplinary = false;
  bool self_loop = false;
  std::string text_a;  // entity text as extracted (refined when available)
  std::string text_b;

  bool operator==(const RecombinationEdge&) const = default;
};

struct KbSnapshot {
  std::vector<ConceptNode> nodes;  // indexed by node_id
  std::vector<RecombinationEdge> edges;  // indexed by edge_id
  Json build = Json::object();           // corpus digest, versions

  bool operator==(const KbSnapshot& o) const { return nodes == o.nodes && edges == o.edges && build == o.build; }

  const ConceptNode& node(size_t id) const {
    if (id >= nodes.size()) throw KbError("no such node: " + std::to_string(id));
    return nodes[id];
  }

  // Throws KbError on any dangling or inconsistent reference.
  void check_integrity() const {
    for (size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].node_id != i) throw KbError("node ids must be dense, found " + std::to_string(nodes[i].node_id));
    for (size_t i = 0; i < edges.size(); ++i) {
      const auto& e = edges[i];
      if (e.edge_id != i) throw KbError("edge ids must be dense, found " + std::to_string(e.edge_id));
      if (e.a >= nodes.size() || e.b >= nodes.size())
        throw KbError("edge " + std::to_string(i) + " references a missing node");
      if (e.self_loop != (e.a == e.b)) throw KbError("edge " + std::to_string(i) + " has a wrong self_loop flag");
    }
  }
};

inline bool is_interdisciplinary(const DomainLabel& x, const DomainLabel& y) {
  return !x.is_other() && !y.is_other() && domain_key(x) != domain_key(y);
}

// ---------------------------------------------------------------------------
// Build

// Entity reference used to join records with normalization and domain
// outputs: (paper_id, entity text as extracted).
using EntityRef = std::pair<std::string, std::string>;

// The text that represents an entity downstream: refined when available.
inline const std::string& entity_surface(const EntitySpan& e) { return e.refined_text ? *e.refined_text : e.text; }

struct BuildInputs {
  std::vector<BinarizedRecord> records;
  std::map<std::string, AbstractDoc> docs;          // by paper_id
  std::vector<Cluster> clusters;                    // indexed by cluster id
  std::map<EntityRef, size_t> entity_cluster;       // keyed by EntitySpan::text
  std::map<EntityRef, DomainLabel> entity_domain;   // missing => Other
};

inline KbSnapshot build_graph(const BuildInputs& in, Json build_meta = Json::object()) {
  KbSnapshot kb;
  kb.build = std::move(build_meta);
  for (size_t c = 0; c < in.clusters.size(); ++c) {
    if (in.clusters[c].id != c) throw KbError("cluster ids must be dense");
    ConceptNode n;
    n.node_id = c;
    n.canonical = in.clusters[c].canonical;
    for (const auto& [s, f] : in.clusters[c].members) n.surface_forms.push_back(s);
    kb.nodes.push_back(std::move(n));
  }
  std::vector<const BinarizedRecord*> order;
  for (const auto& r : in.records) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const BinarizedRecord* x, const BinarizedRecord* y) {
    return std::tie(x->parent_id, x->pair_index) < std::tie(y->parent_id, y->pair_index);
  });

  std::vector<std::vector<std::pair<DomainLabel, Date>>> votes(kb.nodes.size());
  auto resolve = [&](const std::string& paper, const EntitySpan& e) -> size_t {
    auto it = in.entity_cluster.find({paper, e.text});
    if (it == in.entity_cluster.end()) throw KbError("no cluster assignment for entity '" + e.text + "' of " + paper);
    if (it->second >= kb.nodes.size()) throw KbError("dangling cluster reference " + std::to_string(it->second));
    return it->second;
  };
  for (const BinarizedRecord* br : order) {
    const auto& r = br->record;
    if (auto v = validate_record(r)) throw KbError("invalid record " + r.paper_id + ": " + v->rule);
    if (r.entities.size() != 2) throw KbError("record " + r.paper_id + " is not binary");
    auto doc = in.docs.find(r.paper_id);
    if (doc == in.docs.end()) throw KbError("record references unknown paper " + r.paper_id);
    const EntitySpan& ea = r.relation_type == RelationType::kInspiration ? r.source() : r.entities[0];
    const EntitySpan& eb = r.relation_type == RelationType::kInspiration ? r.target() : r.entities[1];
    RecombinationEdge e;
    e.edge_id = kb.edges.size();
    e.type = r.relation_type;
    e.a = resolve(r.paper_id, ea);
    e.b = resolve(r.paper_id, eb);
    e.paper_id = r.paper_id;
    e.pair_index = br->pair_index;
    e.published = doc->second.published;
    e.arxiv_categories = doc->second.arxiv_categories;
    e.self_loop = e.a == e.b;
    e.text_a = entity_surface(ea);
    e.text_b = entity_surface(eb);
    for (auto [span, node] : {std::pair{&ea, e.a}, std::pair{&eb, e.b}}) {
      auto dl = in.entity_domain.find({r.paper_id, span->text});
      votes[node].emplace_back(dl == in.entity_domain.end() ? other_label() : dl->second, e.published);
      auto& fs = kb.nodes[node].first_seen;
      if (!fs || e.published < *fs) fs = e.published;
    }
    kb.edges.push_back(std::move(e));
  }
  for (size_t n = 0; n < kb.nodes.size(); ++n) kb.nodes[n].domain = vote_node_label(votes[n]);
  for (auto& e : kb.edges) e.interdisciplinary = is_interdisciplinary(kb.nodes[e.a].domain, kb.nodes[e.b].domain);
  kb.check_integrity();
  return kb;
}

// ---------------------------------------------------------------------------
// Queries

struct EdgeFacets {
  std::optional<RelationType> type;
  std::optional<std::string> source_domain;
  std::optional<std::string> target_domain;
  std::optional<int> year_from;
  std::optional<int> year_to;
  std::optional<std::string> text;
};

// A facet value names either the grouped domain or the raw label value.
inline bool domain_matches(const DomainLabel& l, const std::string& facet) {
  std::string f = to_lower(trim(facet));
  return f == domain_key(l) || (!l.value.empty() && f == to_lower(l.value)) ||
         (l.is_other() && f == to_lower(kOtherDomain));
}

inline std::vector<const RecombinationEdge*> query_edges(const KbSnapshot& kb, const EdgeFacets& f) {
  std::string needle = f.text ? to_lower(*f.text) : "";
  auto ends_match = [&](size_t x, size_t y) {
    return (!f.source_domain || domain_matches(kb.nodes[x].domain, *f.source_domain)) &&
           (!f.target_domain || domain_matches(kb.nodes[y].domain, *f.target_domain));
  };
  std::vector<const RecombinationEdge*> out;
  for (const auto& e : kb.edges) {
    if (f.type && e.type != *f.type) continue;
    if (f.year_from && e.published.year < *f.year_from) continue;
    if (f.year_to && e.published.year > *f.year_to) continue;
    bool dom = ends_match(e.a, e.b) || (e.type == RelationType::kBlend && ends_match(e.b, e.a));
    if (!dom) continue;
    if (!needle.empty() && to_lower(kb.nodes[e.a].canonical).find(needle) == std::string::npos &&
        to_lower(kb.nodes[e.b].canonical).find(needle) == std::string::npos)
      continue;
    out.push_back(&e);
  }
  std::stable_sort(out.begin(), out.end(), [](const RecombinationEdge* x, const RecombinationEdge* y) {
    if (x->published != y->published) return y->published < x->published;
    return x->edge_id < y->edge_id;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Analytics (Other-domain endpoints are excluded throughout)

struct DomainPairRow {
  std::string source;
  std::string target;
  size_t count = 0;

  bool operator==(const DomainPairRow&) const = default;
  bool operator<(const DomainPairRow& o) const {
    return std::tie(source, target, count) < std::tie(o.source, o.target, o.count);
  }
};

// Counts per grouped-domain pair. Blends are unordered (keys sorted);
// inspirations are directed source -> target. Sorted by count desc, then
// (source, target).
inline std::vector<DomainPairRow> domain_pair_counts(const KbSnapshot& kb, RelationType type) {
  std::map<std::pair<std::string, std::string>, size_t> counts;
  for (const auto& e : kb.edges) {
    if (e.type != type) continue;
    const auto& da = kb.nodes[e.a].domain;
    const auto& db = kb.nodes[e.b].domain;
    if (da.is_other() || db.is_other()) continue;
    std::string x = domain_key(da), y = domain_key(db);
    if (type == RelationType::kBlend && y < x) std::swap(x, y);
    ++counts[{x, y}];
  }
  std::vector<DomainPairRow> rows;
  for (const auto& [k, n] : counts) rows.push_back({k.first, k.second, n});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const DomainPairRow& p, const DomainPairRow& q) { return p.count > q.count; });
  return rows;
}

// Nearest-rank threshold over the ascending count list: the value at 1-based
// rank floor(q*m) + 1 (capped at m). Rows with count >= threshold are kept,
// so ties at the threshold survive.
inline size_t quantile_threshold(std::vector<size_t> counts, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("quantile must be in [0, 1)");
  if (counts.empty()) return 0;
  std::sort(counts.begin(), counts.end());
  size_t m = counts.size();
  size_t rank = std::min(m, static_cast<size_t>(std::floor(q * static_cast<double>(m) + 1e-9)) + 1);
  return counts[rank - 1];
}

inline std::vector<DomainPairRow> domain_pair_table(const KbSnapshot& kb, RelationType type, double q) {
  auto rows = domain_pair_counts(kb, type);
  std::vector<size_t> counts;
  for (const auto& r : rows) counts.push_back(r.count);
  size_t threshold = quantile_threshold(counts, q);
  std::vector<DomainPairRow> out;
  for (const auto& r : rows)
    if (r.count >= threshold) out.push_back(r);
  return out;
}

struct EdgeTypeSummary {
  size_t total = 0;
  size_t interdisciplinary = 0;
  double share() const { return total ? static_cast<double>(interdisciplinary) / static_cast<double>(total) : 0.0; }
};

struct InterdisciplinarySummary {
  EdgeTypeSummary inspiration;
  EdgeTypeSummary blend;
  EdgeTypeSummary all;
  size_t nodes = 0;
};

inline InterdisciplinarySummary interdisciplinary_summary(const KbSnapshot& kb) {
  InterdisciplinarySummary s;
  s.nodes = kb.nodes.size();
  for (const auto& e : kb.edges) {
    auto& t = e.type == RelationType::kBlend ? s.blend : s.inspiration;
    ++t.total;
    ++s.all.total;
    if (e.interdisciplinary) {
      ++t.interdisciplinary;
      ++s.all.interdisciplinary;
    }
  }
  return s;
}

inline Json to_json(const InterdisciplinarySummary& s) {
  auto part = [](const EdgeTypeSummary& t) {
    return Json{{"total", t.total}, {"interdisciplinary", t.interdisciplinary}, {"share", t.share()}};
  };
  return Json{{"inspiration", part(s.inspiration)}, {"blend", part(s.blend)}, {"all", part(s.all)},
              {"nodes", s.nodes}};
}

// year -> (target domain -> percentage). Only years with at least one
// matching inspiration edge appear.
using Timeseries = std::map<int, std::map<std::string, double>>;

inline Timeseries inspiration_timeseries(const KbSnapshot& kb, const std::string& source_domain) {
  std::map<int, std::map<std::string, size_t>> counts;
  for (const auto& e : kb.edges) {
    if (e.type != RelationType::kInspiration) continue;
    const auto& src = kb.nodes[e.a].domain;
    const auto& tgt = kb.nodes[e.b].domain;
    if (src.is_other() || tgt.is_other() || !domain_matches(src, source_domain)) continue;
    ++counts[e.published.year][domain_key(tgt)];
  }
  Timeseries out;
  for (const auto& [year, per] : counts) {
    size_t total = 0;
    for (const auto& [k, n] : per) total += n;
    for (const auto& [k, n] : per) out[year][k] = 100.0 * static_cast<double>(n) / static_cast<double>(total);
  }
  return out;
}

inline std::string format_domain_pairs(const std::vector<DomainPairRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(28) << "Source" << std::setw(28) << "Target" << std::right << std::setw(8)
      << "Count" << "\n";
  for (const auto& r : rows)
    out << std::left << std::setw(28) << r.source << std::setw(28) << r.target << std::right << std::setw(8)
        << r.count << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const ConceptNode& n) {
  return Json{{"node_id", n.node_id},
              {"canonical", n.canonical},
              {"surface_forms", n.surface_forms},
              {"domain", to_json(n.domain)},
              {"first_seen", n.first_seen ? Json(n.first_seen->iso()) : Json(nullptr)}};
}

inline ConceptNode node_from_json(const Json& j) {
  ConceptNode n;
  n.node_id = j.at("node_id").get<size_t>();
  n.canonical = j.at("canonical").get<std::string>();
  if (n.canonical.empty()) throw FormatError("empty canonical name");
  n.surface_forms = j.at("surface_forms").get<std::vector<std::string>>();
  n.domain = domain_from_json(j.at("domain"));
  if (!j.at("first_seen").is_null()) {
    auto d = Date::parse(j["first_seen"].get<std::string>());
    if (!d) throw FormatError("bad first_seen date");
    n.first_seen = *d;
  }
  return n;
}

inline Json to_json(const RecombinationEdge& e) {
  return Json{{"edge_id", e.edge_id},
              {"type", to_string(e.type)},
              {"a", e.a},
              {"b", e.b},
              {"paper_id", e.paper_id},
              {"pair_index", e.pair_index},
              {"published", e.published.iso()},
              {"arxiv_categories", e.arxiv_categories},
              {"interdisciplinary", e.interdisciplinary},
              {"self_loop", e.self_loop},
              {"text_a", e.text_a},
              {"text_b", e.text_b}};
}

inline RecombinationEdge edge_from_json(const Json& j) {
  RecombinationEdge e;
  e.edge_id = j.at("edge_id").get<size_t>();
  auto t = parse_relation_type(j.at("type").get<std::string>());
  if (!t) throw FormatError("bad edge type");
  e.type = *t;
  e.a = j.at("a").get<size_t>();
  e.b = j.at("b").get<size_t>();
  e.paper_id = j.at("paper_id").get<std::string>();
  e.pair_index = j.at("pair_index").get<size_t>();
  auto d = Date::parse(j.at("published").get<std::string>());
  if (!d) throw FormatError("bad published date");
  e.published = *d;
  e.arxiv_categories = j.at("arxiv_categories").get<std::vector<std::string>>();
  e.interdisciplinary = j.at("interdisciplinary").get<bool>();
  e.self_loop = j.at("self_loop").get<bool>();
  e.text_a = j.at("text_a").get<std::string>();
  e.text_b = j.at("text_b").get<std::string>();
  return e;
}

inline void save_kb(const KbSnapshot& kb, const fs::path& dir) {
  std::vector<Json> nodes, edges;
  for (const auto& n : kb.nodes) nodes.push_back(to_json(n));
  for (const auto& e : kb.edges) edges.push_back(to_json(e));
  write_jsonl(dir / "nodes.jsonl", nodes);
  write_jsonl(dir / "edges.jsonl", edges);
  Json meta{{"format_version", kKbFormatVersion},
            {"nodes", kb.nodes.size()},
            {"edges", kb.edges.size()},
            {"build", kb.build}};
  write_file_atomic(dir / "meta.json", canonical_dump(meta) + "\n");
}

inline KbSnapshot load_kb(const fs::path& dir) {
  KbSnapshot kb;
  Json meta;
  try {
    meta = Json::parse(read_file(dir / "meta.json"));
  } catch (const Json::exception& e) {
    throw KbError((dir / "meta.json").string() + ": " + e.what());
  }
  auto load_rows = [&](const fs::path& p, auto&& convert) {
    for_each_jsonl(p, [&](const Json& j, size_t line) {
      try {
        convert(j);
      } catch (const std::exception& e) {
        throw KbError(p.string() + ":" + std::to_string(line) + ": " + e.what());
      }
      return true;
    });
  };
  try {
    load_rows(dir / "nodes.jsonl", [&](const Json& j) { kb.nodes.push_back(node_from_json(j)); });
    load_rows(dir / "edges.jsonl", [&](const Json& j) { kb.edges.push_back(edge_from_json(j)); });
  } catch (const KbError&) {
    throw;
  } catch (const std::exception& e) {
    throw KbError(e.what());
  }
  if (meta.value("nodes", size_t{0}) != kb.nodes.size() || meta.value("edges", size_t{0}) != kb.edges.size())
    throw KbError(dir.string() + ": row counts disagree with meta.json (truncated snapshot?)");
  kb.build = meta.value("build", Json::object());
  kb.check_integrity();
  return kb;
}

}  // namespace recomb

#endif  // RECOMB_KB_HPP_
