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

// Recombination prediction: query construction, leakage filtering, temporal
// splits, filtered ranking, metrics, listwise reranking and training-pair
// export.
//
// Each KB edge yields queries "given one endpoint, predict the other". An
// inspiration edge asks for the source given the target; a blend edge asks
// in both directions.

#ifndef RECOMB_PREDICT_HPP_
#define RECOMB_PREDICT_HPP_

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "recomb/core.hpp"
#include "recomb/gateway.hpp"
#include "recomb/kb.hpp"
#include "recomb/prompts.hpp"

namespace recomb {

class PredictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Queries

struct PredictionQuery {
  std::string query_id;
  std::string context;
  size_t given_node = 0;
  std::string given_text;
  RelationType relation_type = RelationType::kBlend;
  std::string question;
  size_t gold_node = 0;
  std::string paper_id;
  Date published;

  bool operator==(const PredictionQuery&) const = default;

  std::string query_text() const { return context.empty() ? question : context + " " + question; }
};

inline std::string methodology_statement(RelationType type, const std::string& a, const std::string& b) {
  if (type == RelationType::kBlend) return "Combine " + a + " and " + b;
  return "Take inspiration from " + a + " and apply it to " + b;
}

inline std::string question_for(RelationType type, const std::string& given) {
  if (type == RelationType::kBlend)
    return "What could we blend with \"" + given + "\" to address the described settings?";
  return "What would be a good source of inspiration for \"" + given + "\"?";
}

inline std::string context_prompt(const std::string& abstract, const std::string& statement) {
  return prompts::fill(prompts::kContextExtraction, {{"ABSTRACT", abstract}, {"METHODOLOGY_STATEMENT", statement}});
}

// Background/motivation sentences for the recombination in `edge`.
inline std::string extract_context(const std::string& abstract, RelationType type, const std::string& text_a,
                                   const std::string& text_b, Gateway& gw, const std::string& model) {
  return trim(gw.generate_text(model, context_prompt(abstract, methodology_statement(type, text_a, text_b))));
}

inline std::string extract_context(const std::string& abstract, const RecombinationRecord& r, Gateway& gw,
                                   const std::string& model) {
  if (auto v = validate_record(r)) throw std::invalid_argument("extract_context: invalid record: " + v->rule);
  if (r.relation_type == RelationType::kInspiration)
    return extract_context(abstract, r.relation_type, entity_surface(r.source()), entity_surface(r.target()), gw,
                           model);
  return extract_context(abstract, r.relation_type, entity_surface(r.entities.at(0)),
                         entity_surface(r.entities.at(1)), gw, model);
}

inline std::string leak_prompt(const std::string& query, const std::string& answer) {
  return prompts::fill(prompts::kLeakDetection, {{"QUERY", query}, {"ANSWER", answer}});
}

// True means the pair must be discarded; an unparseable verdict counts as a
// leak.
inline bool detect_leak(const std::string& query, const std::string& answer, Gateway& gw, const std::string& model) {
  std::string s = to_lower(trim(gw.generate_text(model, leak_prompt(query, answer), 8)));
  while (!s.empty() && (s.back() == '.' || s.back() == '!')) s.pop_back();
  if (s == "no") return false;
  return true;
}

// Queries for one edge without contexts. Self-loops yield none.
inline std::vector<PredictionQuery> queries_for_edge(const RecombinationEdge& e) {
  std::vector<PredictionQuery> out;
  if (e.self_loop) return out;
  auto make = [&](size_t given, const std::string& given_text, size_t gold, const char* dir) {
    PredictionQuery q;
    q.query_id = e.paper_id + "#" + std::to_string(e.pair_index) + "#" + dir;
    q.given_node = given;
    q.given_text = given_text;
    q.relation_type = e.type;
    q.question = question_for(e.type, given_text);
    q.gold_node = gold;
    q.paper_id = e.paper_id;
    q.published = e.published;
    return q;
  };
  if (e.type == RelationType::kInspiration) {
    out.push_back(make(e.b, e.text_b, e.a, "src"));
  } else {
    out.push_back(make(e.a, e.text_a, e.b, "ab"));
    out.push_back(make(e.b, e.text_b, e.a, "ba"));
  }
  return out;
}

inline Json to_json(const PredictionQuery& q) {
  return Json{{"query_id", q.query_id},   {"context", q.context},
              {"given_node", q.given_node}, {"given_text", q.given_text},
              {"relation_type", to_string(q.relation_type)}, {"question", q.question},
              {"gold_node", q.gold_node},   {"paper_id", q.paper_id},
              {"published", q.published.iso()}};
}

inline PredictionQuery query_from_json(const Json& j) {
  PredictionQuery q;
  q.query_id = j.at("query_id").get<std::string>();
  q.context = j.at("context").get<std::string>();
  q.given_node = j.at("given_node").get<size_t>();
  q.given_text = j.at("given_text").get<std::string>();
  auto t = parse_relation_type(j.at("relation_type").get<std::string>());
  if (!t) throw FormatError("bad relation_type");
  q.relation_type = *t;
  q.question = j.at("question").get<std::string>();
  q.gold_node = j.at("gold_node").get<size_t>();
  q.paper_id = j.at("paper_id").get<std::string>();
  auto d = Date::parse(j.at("published").get<std::string>());
  if (!d) throw FormatError("bad published date");
  q.published = *d;
  return q;
}

// ---------------------------------------------------------------------------
// Splits

struct Splits {
  std::vector<PredictionQuery> train;
  std::vector<PredictionQuery> validation;
  std::vector<PredictionQuery> test;
};

// Validation share of pre-cutoff pairs, from the reference split sizes
// (530 validation vs 25,317 train).
inline constexpr double kDefaultValidationFraction = 530.0 / (25317.0 + 530.0);

namespace detail {

// Uniform integer in [0, n) without modulo bias; portable across standard
// libraries (unlike std::uniform_int_distribution).
inline uint64_t uniform_below(std::mt19937_64& rng, uint64_t n) {
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % n;
}

template <class T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_below(rng, i)]);
}

}  // namespace detail

// Papers dated in or after `cutoff_year` go to test. Earlier papers are
// shuffled (seeded) and the first round(fraction * n) become validation.
// All pairs of a paper land on the same side.
inline Splits split_by_cutoff(const std::vector<PredictionQuery>& pairs, int cutoff_year = 2024,
                              double validation_fraction = kDefaultValidationFraction, uint64_t seed = 13) {
  if (validation_fraction < 0 || validation_fraction > 1)
    throw std::invalid_argument("split_by_cutoff: validation fraction out of [0,1]");
  std::map<std::string, Date> paper_date;
  for (const auto& q : pairs) {
    if (!q.published.valid() || q.published.year <= 0)
      throw PredictError("undated pair " + q.query_id);
    auto [it, fresh] = paper_date.emplace(q.paper_id, q.published);
    if (!fresh && it->second != q.published) throw PredictError("inconsistent dates for paper " + q.paper_id);
  }
  std::vector<std::string> early;
  for (const auto& [id, d] : paper_date)
    if (d.year < cutoff_year) early.push_back(id);
  std::mt19937_64 rng(seed);
  detail::seeded_shuffle(early, rng);
  auto n_val = static_cast<size_t>(std::llround(validation_fraction * static_cast<double>(early.size())));
  std::set<std::string> val(early.begin(), early.begin() + static_cast<long>(n_val));
  Splits s;
  for (const auto& q : pairs) {
    if (q.published.year >= cutoff_year) s.test.push_back(q);
    else if (val.count(q.paper_id)) s.validation.push_back(q);
    else s.train.push_back(q);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Ranking

struct Candidate {
  size_t node_id = 0;
  std::string text;
};

struct ScoredCandidate {
  size_t node_id = 0;
  double score = 0;

  bool operator==(const ScoredCandidate&) const = default;
};

struct RankedQuery {
  std::string query_id;
  std::vector<ScoredCandidate> ranking;  // filtered
  size_t raw_rank = 0;                   // 1-based, before filtering
  size_t filtered_rank = 0;              // 1-based
};

// (given node, relation type) -> every node known to complete it, over all
// splits. Blends are symmetric.
class KnownAnswers {
 public:
  KnownAnswers() = default;
  explicit KnownAnswers(const KbSnapshot& kb) {
    for (const auto& e : kb.edges) add(e.type, e.a, e.b);
  }

  // Inspiration edges are stored as answer=source for given=target.
  void add(RelationType type, size_t a, size_t b) {
    if (type == RelationType::kInspiration) {
      known_[{b, type}].insert(a);
    } else {
      known_[{a, type}].insert(b);
      known_[{b, type}].insert(a);
    }
  }

  const std::set<size_t>& answers(size_t given, RelationType type) const {
    static const std::set<size_t> kEmpty;
    auto it = known_.find({given, type});
    return it == known_.end() ? kEmpty : it->second;
  }

 private:
  std::map<std::pair<size_t, RelationType>, std::set<size_t>> known_;
};

// Sorts by descending score, ties by ascending node id.
inline void sort_ranking(std::vector<ScoredCandidate>& r) {
  std::sort(r.begin(), r.end(), [](const ScoredCandidate& x, const ScoredCandidate& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.node_id < y.node_id;
  });
}

inline size_t rank_of(const std::vector<ScoredCandidate>& r, size_t node) {
  for (size_t i = 0; i < r.size(); ++i)
    if (r[i].node_id == node) return i + 1;
  throw PredictError("gold node " + std::to_string(node) + " not in ranking");
}

// Drops every candidate c != gold with (given, type, c) known.
inline std::vector<ScoredCandidate> apply_filtered_setting(const std::vector<ScoredCandidate>& ranking,
                                                           const PredictionQuery& q, const KnownAnswers& known) {
  const auto& positives = known.answers(q.given_node, q.relation_type);
  std::vector<ScoredCandidate> out;
  out.reserve(ranking.size());
  for (const auto& c : ranking)
    if (c.node_id == q.gold_node || !positives.count(c.node_id)) out.push_back(c);
  return out;
}

// Ranks with precomputed unit vectors: score = inner product.
inline RankedQuery rank_with_vectors(const PredictionQuery& q, const Vector& query_vec,
                                     const std::vector<Candidate>& pool, const std::vector<Vector>& pool_vecs,
                                     const KnownAnswers& known) {
  if (pool.empty()) throw std::invalid_argument("rank_candidates: empty candidate pool");
  if (pool.size() != pool_vecs.size()) throw std::invalid_argument("rank_candidates: pool/vector size mismatch");
  std::vector<ScoredCandidate> raw;
  raw.reserve(pool.size());
  for (size_t i = 0; i < pool.size(); ++i) {
    double s = 0;
    for (size_t k = 0; k < query_vec.size(); ++k) s += query_vec[k] * pool_vecs[i][k];
    raw.push_back({pool[i].node_id, s});
  }
  sort_ranking(raw);
  RankedQuery rq;
  rq.query_id = q.query_id;
  rq.raw_rank = rank_of(raw, q.gold_node);
  rq.ranking = apply_filtered_setting(raw, q, known);
  rq.filtered_rank = rank_of(rq.ranking, q.gold_node);
  return rq;
}

inline RankedQuery rank_candidates(const PredictionQuery& q, const std::vector<Candidate>& pool, Gateway& gw,
                                   const std::string& model, const KnownAnswers& known) {
  if (pool.empty()) throw std::invalid_argument("rank_candidates: empty candidate pool");
  std::vector<std::string> texts;
  for (const auto& c : pool) texts.push_back(c.text);
  auto pool_vecs = gw.embed(EmbedRequest{model, texts, true});
  return rank_with_vectors(q, gw.embed_one(model, q.query_text()), pool, pool_vecs, known);
}

// Distinct gold answers of `queries`, labelled with node canonical names.
inline std::vector<Candidate> candidate_pool(const KbSnapshot& kb, const std::vector<PredictionQuery>& queries) {
  std::set<size_t> ids;
  for (const auto& q : queries) ids.insert(q.gold_node);
  std::vector<Candidate> pool;
  for (size_t id : ids) pool.push_back({id, kb.node(id).canonical});
  return pool;
}

// ---------------------------------------------------------------------------
// Metrics

struct RankingMetrics {
  std::map<size_t, double> hits;  // K -> Hits@K
  double mrr = 0;
  size_t medr = 0;
  size_t n = 0;
};

inline const std::vector<size_t>& default_ks() {
  static const std::vector<size_t> kKs = {3, 5, 10, 50, 100};
  return kKs;
}

// Hits@K, MRR and MedR over 1-based ranks. Even counts take the lower
// median.
inline RankingMetrics ranking_metrics(const std::vector<size_t>& ranks, const std::vector<size_t>& ks = default_ks()) {
  if (ranks.empty()) throw std::invalid_argument("ranking_metrics: no ranks");
  RankingMetrics m;
  m.n = ranks.size();
  for (size_t k : ks) m.hits[k] = 0;
  double rr = 0;
  for (size_t r : ranks) {
    if (r == 0) throw std::invalid_argument("ranking_metrics: ranks are 1-based");
    rr += 1.0 / static_cast<double>(r);
    for (size_t k : ks)
      if (r <= k) m.hits[k] += 1;
  }
  for (auto& [k, h] : m.hits) h /= static_cast<double>(m.n);
  m.mrr = rr / static_cast<double>(m.n);
  std::vector<size_t> sorted = ranks;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>((m.n - 1) / 2), sorted.end());
  m.medr = sorted[(m.n - 1) / 2];
  return m;
}

inline Json to_json(const RankingMetrics& m) {
  Json hits = Json::object();
  for (const auto& [k, h] : m.hits) hits["H@" + std::to_string(k)] = h;
  return Json{{"hits", hits}, {"mrr", m.mrr}, {"medr", m.medr}, {"n", m.n}};
}

inline std::string format_metrics_table(const RankingMetrics& m, const std::string& system = "system") {
  std::ostringstream out;
  out << std::left << std::setw(24) << "Model" << std::right;
  for (const auto& [k, h] : m.hits) out << std::setw(8) << ("H@" + std::to_string(k));
  out << std::setw(8) << "MRR" << std::setw(8) << "MedR" << "\n";
  out << std::left << std::setw(24) << system << std::right << std::fixed << std::setprecision(3);
  for (const auto& [k, h] : m.hits) out << std::setw(8) << h;
  out << std::setw(8) << m.mrr << std::setw(8) << m.medr << "\n";
  return out.str();
}

inline Json to_json(const RankedQuery& r, size_t keep = 100) {
  Json ranking = Json::array();
  for (size_t i = 0; i < r.ranking.size() && i < keep; ++i)
    ranking.push_back(Json{{"node_id", r.ranking[i].node_id}, {"score", r.ranking[i].score}});
  return Json{{"query_id", r.query_id},
              {"raw_rank", r.raw_rank},
              {"filtered_rank", r.filtered_rank},
              {"ranking", ranking}};
}

// ---------------------------------------------------------------------------
// Reranking

struct RerankOptions {
  size_t window = 10;
  size_t step = 5;
  size_t top_k = 20;
};

inline std::string rerank_prompt(const std::string& query, const std::vector<Candidate>& window) {
  std::string list;
  for (size_t i = 0; i < window.size(); ++i) list += "[" + std::to_string(i + 1) + "] " + window[i].text + "\n";
  return prompts::fill(prompts::kRerank,
                       {{"QUERY", query}, {"NUM", std::to_string(window.size())}, {"CANDIDATES", list}});
}

// Reads identifiers from a ranking reply: every digit run, in order, kept
// when in [1, n] and not seen before; missing identifiers are appended in
// their original order. Returns nullopt when no identifier is usable.
inline std::optional<std::vector<size_t>> parse_permutation(std::string_view reply, size_t n) {
  std::vector<size_t> order;
  std::vector<char> seen(n + 1, 0);
  for (size_t i = 0; i < reply.size();) {
    if (!std::isdigit(static_cast<unsigned char>(reply[i]))) {
      ++i;
      continue;
    }
    size_t j = i;
    size_t v = 0;
    bool overflow = false;
    while (j < reply.size() && std::isdigit(static_cast<unsigned char>(reply[j]))) {
      if (v > 1000000) overflow = true;
      v = v * 10 + static_cast<size_t>(reply[j] - '0');
      ++j;
    }
    i = j;
    if (!overflow && v >= 1 && v <= n && !seen[v]) {
      seen[v] = 1;
      order.push_back(v - 1);
    }
  }
  if (order.empty()) return std::nullopt;
  for (size_t k = 1; k <= n; ++k)
    if (!seen[k]) order.push_back(k - 1);
  return order;
}

// Sliding-window listwise reranking, processed from the bottom window up.
// With 20 candidates, window 10 and step 5 the windows start at 10, 5, 0.
inline std::vector<Candidate> rerank_top_k(const std::string& query, std::vector<Candidate> candidates, Gateway& gw,
                                           const std::string& model, const RerankOptions& opts = {}) {
  if (candidates.size() > opts.top_k)
    throw std::invalid_argument("rerank_top_k: more than " + std::to_string(opts.top_k) + " candidates");
  if (opts.window == 0 || opts.step == 0) throw std::invalid_argument("rerank_top_k: window and step must be positive");
  size_t n = candidates.size();
  if (n <= 1) return candidates;
  size_t start = n > opts.window ? n - opts.window : 0;
  while (true) {
    size_t end = std::min(n, start + opts.window);
    std::vector<Candidate> window(candidates.begin() + static_cast<long>(start),
                                  candidates.begin() + static_cast<long>(end));
    std::string reply = gw.generate_text(model, rerank_prompt(query, window), 256);
    if (auto perm = parse_permutation(reply, window.size()))
      for (size_t i = 0; i < window.size(); ++i) candidates[start + i] = window[(*perm)[i]];
    if (start == 0) break;
    start = start > opts.step ? start - opts.step : 0;
  }
  return candidates;
}

// ---------------------------------------------------------------------------
// Contrastive pairs

struct ContrastiveRow {
  std::string query_id;
  std::string query;
  size_t positive = 0;
  size_t negative = 0;

  bool operator==(const ContrastiveRow&) const = default;
};

// One row per sampled negative: for each query, `negatives` nodes drawn
// uniformly without replacement from the pool minus the query's known
// answers.
inline std::vector<ContrastiveRow> export_contrastive_pairs(const std::vector<PredictionQuery>& train,
                                                            const std::vector<size_t>& pool,
                                                            const KnownAnswers& known, size_t negatives = 30,
                                                            uint64_t seed = 13) {
  std::mt19937_64 rng(seed);
  std::vector<size_t> sorted_pool(pool.begin(), pool.end());
  std::sort(sorted_pool.begin(), sorted_pool.end());
  sorted_pool.erase(std::unique(sorted_pool.begin(), sorted_pool.end()), sorted_pool.end());
  std::vector<ContrastiveRow> rows;
  for (const auto& q : train) {
    const auto& pos = known.answers(q.given_node, q.relation_type);
    std::vector<size_t> eligible;
    for (size_t c : sorted_pool)
      if (c != q.gold_node && c != q.given_node && !pos.count(c)) eligible.push_back(c);
    if (eligible.size() < negatives)
      throw PredictError("insufficient negative pool for " + q.query_id + ": " + std::to_string(eligible.size()) +
                         " < " + std::to_string(negatives));
    for (size_t i = 0; i < negatives; ++i) {
      size_t j = i + detail::uniform_below(rng, eligible.size() - i);
      std::swap(eligible[i], eligible[j]);
      rows.push_back({q.query_id, q.query_text(), q.gold_node, eligible[i]});
    }
  }
  return rows;
}

inline Json to_json(const ContrastiveRow& r) {
  return Json{{"query_id", r.query_id}, {"query", r.query}, {"positive", r.positive}, {"negative", r.negative}};
}

}  // namespace recomb

#endif  // RECOMB_PREDICT_HPP_
