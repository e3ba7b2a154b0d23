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

// Extraction evaluation.
//
// Entities are compared by a judged "soft" match: two spans of the same role
// match when a judge says they denote the same concept. Matching is
// one-to-one and maximum. Relations earn partial credit: a predicted binary
// relation scores (matched entity slots) / 2 against a gold relation of the
// same type; blends try both element assignments. Relations are assigned
// one-to-one to maximise total credit.

#ifndef RECOMB_EVAL_HPP_
#define RECOMB_EVAL_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "recomb/core.hpp"
#include "recomb/extract.hpp"
#include "recomb/gateway.hpp"
#include "recomb/prompts.hpp"

namespace recomb {

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Reports

enum class EvalLevel { kClassification, kEntity, kRelation };

inline std::string_view to_string(EvalLevel l) {
  switch (l) {
    case EvalLevel::kClassification: return "classification";
    case EvalLevel::kEntity: return "entity";
    case EvalLevel::kRelation: return "relation";
  }
  return "";
}

struct EvalReport {
  EvalLevel level = EvalLevel::kEntity;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double true_positives = 0;  // fractional for relations
  size_t gold_count = 0;
  size_t pred_count = 0;
};

inline double harmonic_f1(double p, double r) { return (p > 0 && r > 0) ? 2 * p * r / (p + r) : 0.0; }

// Zero denominators yield 0.
inline EvalReport report_from_counts(EvalLevel level, double tp, size_t gold, size_t pred) {
  EvalReport r;
  r.level = level;
  r.true_positives = tp;
  r.gold_count = gold;
  r.pred_count = pred;
  r.precision = pred ? tp / static_cast<double>(pred) : 0.0;
  r.recall = gold ? tp / static_cast<double>(gold) : 0.0;
  r.f1 = harmonic_f1(r.precision, r.recall);
  return r;
}

// Micro-average: pools true positives and counts.
inline EvalReport aggregate(EvalLevel level, std::span<const EvalReport> parts) {
  double tp = 0;
  size_t gold = 0, pred = 0;
  for (const auto& p : parts) {
    tp += p.true_positives;
    gold += p.gold_count;
    pred += p.pred_count;
  }
  return report_from_counts(level, tp, gold, pred);
}

inline Json to_json(const EvalReport& r) {
  return Json{{"level", to_string(r.level)}, {"precision", r.precision}, {"recall", r.recall},
              {"f1", r.f1},                  {"true_positives", r.true_positives},
              {"gold_count", r.gold_count},  {"pred_count", r.pred_count}};
}

// ---------------------------------------------------------------------------
// Judges

// Returns true when `gold` and `pred` (same role) denote the same concept.
using SpanJudge = std::function<bool(const EntitySpan& gold, const EntitySpan& pred)>;

// "yes"/"no" (any case, optional trailing period); anything else is nullopt.
inline std::optional<bool> parse_yes_no(std::string_view reply) {
  std::string s = to_lower(trim(reply));
  while (!s.empty() && (s.back() == '.' || s.back() == '!')) s.pop_back();
  if (s == "yes") return true;
  if (s == "no") return false;
  return std::nullopt;
}

inline std::string span_similarity_prompt(const std::string& abstract, const std::string& span_a,
                                          const std::string& span_b, Role role) {
  return prompts::fill(prompts::kSpanSimilarity, {{"ENTITY_TYPE", std::string(to_string(role))},
                                                  {"TEXT", abstract},
                                                  {"SPAN1", span_a},
                                                  {"SPAN2", span_b}});
}

// Two judge calls with the operand order swapped; a match needs both to be
// positive, which makes the decision order-insensitive.
inline bool judge_span_match(const std::string& abstract, const std::string& span_a, const std::string& span_b,
                             Role role, Gateway& gw, const std::string& model) {
  if (trim(span_a).empty() || trim(span_b).empty()) throw std::invalid_argument("judge_span_match: empty span");
  bool verdicts[2];
  const std::string* order[2][2] = {{&span_a, &span_b}, {&span_b, &span_a}};
  for (int k = 0; k < 2; ++k) {
    std::string reply;
    try {
      reply = gw.generate_text(model, span_similarity_prompt(abstract, *order[k][0], *order[k][1], role), 8);
    } catch (const std::exception& e) {
      throw EvaluationError(std::string("span judge failed: ") + e.what());
    }
    // Anything other than an explicit yes counts as a negative judgment.
    verdicts[k] = parse_yes_no(reply).value_or(false);
  }
  return verdicts[0] && verdicts[1];
}

inline SpanJudge llm_span_judge(Gateway& gw, std::string model, std::string abstract) {
  return [&gw, model = std::move(model), abstract = std::move(abstract)](const EntitySpan& g, const EntitySpan& p) {
    return judge_span_match(abstract, g.text, p.text, g.role, gw, model);
  };
}

// Exact normalized-text equality; handy for tests and offline runs.
inline bool exact_span_judge(const EntitySpan& g, const EntitySpan& p) {
  return normalize_text(g.text) == normalize_text(p.text);
}

// ---------------------------------------------------------------------------
// Assignment helpers

namespace detail {

inline size_t max_bipartite_matching(size_t n_left, size_t n_right, const std::vector<std::vector<size_t>>& adj) {
  std::vector<long> match_right(n_right, -1);
  std::vector<char> seen;
  std::function<bool(size_t)> augment = [&](size_t u) {
    for (size_t v : adj[u]) {
      if (seen[v]) continue;
      seen[v] = 1;
      if (match_right[v] < 0 || augment(static_cast<size_t>(match_right[v]))) {
        match_right[v] = static_cast<long>(u);
        return true;
      }
    }
    return false;
  };
  size_t size = 0;
  for (size_t u = 0; u < n_left; ++u) {
    seen.assign(n_right, 0);
    if (augment(u)) ++size;
  }
  return size;
}

// Maximum total weight of a one-to-one assignment on a rows x cols matrix of
// nonnegative integer weights (Hungarian algorithm on the padded square).
inline long max_weight_assignment(const std::vector<std::vector<long>>& w) {
  size_t rows = w.size();
  size_t cols = rows ? w[0].size() : 0;
  size_t n = std::max(rows, cols);
  if (n == 0) return 0;
  long wmax = 0;
  for (const auto& r : w)
    for (long x : r) wmax = std::max(wmax, x);
  auto cost = [&](size_t i, size_t j) -> long {
    long x = (i < rows && j < cols) ? w[i][j] : 0;
    return wmax - x;
  };
  const long kInf = std::numeric_limits<long>::max() / 4;
  std::vector<long> u(n + 1, 0), v(n + 1, 0);
  std::vector<size_t> p(n + 1, 0), way(n + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    p[0] = i;
    size_t j0 = 0;
    std::vector<long> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      size_t i0 = p[j0], j1 = 0;
      long delta = kInf;
      for (size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        long cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  long total = 0;
  for (size_t j = 1; j <= n; ++j) total += wmax - cost(p[j] - 1, j - 1);
  return total;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entity matching

struct MatchDecision {
  size_t gold_index = 0;
  size_t pred_index = 0;
  bool matched = false;

  bool operator==(const MatchDecision&) const = default;
};

// Judges every same-role (gold, pred) pair, then selects a maximum one-to-one
// matching among the positive pairs. Among maximum matchings the one whose
// sorted pair list is lexicographically smallest is returned. The result
// lists every judged pair with its matched flag.
inline std::vector<MatchDecision> match_entities(const std::vector<EntitySpan>& gold,
                                                 const std::vector<EntitySpan>& pred, const SpanJudge& judge) {
  std::vector<MatchDecision> decisions;
  std::vector<std::pair<size_t, size_t>> positive;
  for (size_t g = 0; g < gold.size(); ++g)
    for (size_t p = 0; p < pred.size(); ++p) {
      if (gold[g].role != pred[p].role) continue;
      decisions.push_back({g, p, false});
      if (judge(gold[g], pred[p])) positive.emplace_back(g, p);
    }

  auto max_size = [&](const std::vector<char>& gold_used, const std::vector<char>& pred_used) {
    std::vector<std::vector<size_t>> adj(gold.size());
    for (auto [g, p] : positive)
      if (!gold_used[g] && !pred_used[p]) adj[g].push_back(p);
    return detail::max_bipartite_matching(gold.size(), pred.size(), adj);
  };
  std::vector<char> gold_used(gold.size(), 0), pred_used(pred.size(), 0);
  size_t target = max_size(gold_used, pred_used);
  size_t fixed = 0;
  std::set<std::pair<size_t, size_t>> chosen;
  for (auto [g, p] : positive) {  // already in ascending (g, p) order
    if (fixed == target) break;
    if (gold_used[g] || pred_used[p]) continue;
    gold_used[g] = pred_used[p] = 1;
    if (fixed + 1 + max_size(gold_used, pred_used) == target) {
      ++fixed;
      chosen.emplace(g, p);
    } else {
      gold_used[g] = pred_used[p] = 0;
    }
  }
  for (auto& d : decisions) d.matched = chosen.count({d.gold_index, d.pred_index}) > 0;
  return decisions;
}

inline EvalReport entity_prf(const std::vector<MatchDecision>& decisions, size_t gold_count, size_t pred_count) {
  size_t matches = 0;
  for (const auto& d : decisions) matches += d.matched ? 1 : 0;
  if (matches > gold_count || matches > pred_count)
    throw std::invalid_argument("entity_prf: more matches than entities");
  return report_from_counts(EvalLevel::kEntity, static_cast<double>(matches), gold_count, pred_count);
}

// ---------------------------------------------------------------------------
// Relation matching

struct RelationAssignment {
  size_t gold_index = 0;
  size_t pred_index = 0;
  double credit = 0;
};

struct RelationMatch {
  EvalReport report;
  std::vector<RelationAssignment> assignments;  // credit > 0 only
};

// Credit of `pred` against `gold`: 0 across types; otherwise matched slots/2,
// maximised over both element assignments for blends.
inline double relation_credit(const RecombinationRecord& gold, const RecombinationRecord& pred, const SpanJudge& judge) {
  if (gold.relation_type != pred.relation_type) return 0.0;
  if (gold.entities.size() != 2 || pred.entities.size() != 2)
    throw std::invalid_argument("relation_credit: relations must be binarized");
  if (gold.relation_type == RelationType::kInspiration) {
    int slots = (judge(gold.source(), pred.source()) ? 1 : 0) + (judge(gold.target(), pred.target()) ? 1 : 0);
    return slots / 2.0;
  }
  const auto& g = gold.entities;
  const auto& p = pred.entities;
  bool m00 = judge(g[0], p[0]), m11 = judge(g[1], p[1]);
  bool m01 = judge(g[0], p[1]), m10 = judge(g[1], p[0]);
  int straight = (m00 ? 1 : 0) + (m11 ? 1 : 0);
  int swapped = (m01 ? 1 : 0) + (m10 ? 1 : 0);
  return std::max(straight, swapped) / 2.0;
}

inline RelationMatch relation_match(const std::vector<RecombinationRecord>& gold,
                                    const std::vector<RecombinationRecord>& pred, const SpanJudge& judge) {
  // Integer weights: 2 * credit in {0, 1, 2}; rows = pred, cols = gold.
  std::vector<std::vector<long>> w(pred.size(), std::vector<long>(gold.size(), 0));
  for (size_t p = 0; p < pred.size(); ++p)
    for (size_t g = 0; g < gold.size(); ++g)
      w[p][g] = std::lround(2 * relation_credit(gold[g], pred[p], judge));

  long best = detail::max_weight_assignment(w);

  std::vector<std::tuple<long, size_t, size_t>> order;  // (-weight, p, g)
  for (size_t p = 0; p < pred.size(); ++p)
    for (size_t g = 0; g < gold.size(); ++g)
      if (w[p][g] > 0) order.emplace_back(-w[p][g], p, g);
  std::sort(order.begin(), order.end());

  std::vector<char> pred_used(pred.size(), 0), gold_used(gold.size(), 0);
  auto remaining_best = [&] {
    std::vector<std::vector<long>> sub(pred.size(), std::vector<long>(gold.size(), 0));
    for (size_t p = 0; p < pred.size(); ++p)
      for (size_t g = 0; g < gold.size(); ++g)
        if (!pred_used[p] && !gold_used[g]) sub[p][g] = w[p][g];
    return detail::max_weight_assignment(sub);
  };
  RelationMatch out;
  long fixed = 0;
  for (auto [negw, p, g] : order) {
    if (fixed == best) break;
    if (pred_used[p] || gold_used[g]) continue;
    pred_used[p] = gold_used[g] = 1;
    if (fixed - negw + remaining_best() == best) {
      fixed -= negw;
      out.assignments.push_back({g, p, -negw / 2.0});
    } else {
      pred_used[p] = gold_used[g] = 0;
    }
  }
  out.report = report_from_counts(EvalLevel::kRelation, best / 2.0, gold.size(), pred.size());
  return out;
}

inline EvalReport relation_prf(const std::vector<RecombinationRecord>& gold,
                               const std::vector<RecombinationRecord>& pred, const SpanJudge& judge) {
  return relation_match(gold, pred, judge).report;
}

// ---------------------------------------------------------------------------
// Classification

template <class Label>
struct ClassificationReport {
  std::vector<std::pair<Label, EvalReport>> per_class;
  EvalReport macro;  // P, R and F1 are unweighted means over classes
};

enum class Presence { kAbsent, kPresent };

inline Presence presence_of(GoldLabel l) { return l == GoldLabel::kNotPresent ? Presence::kAbsent : Presence::kPresent; }
inline std::string_view to_string(Presence p) { return p == Presence::kPresent ? "present" : "absent"; }

// Per-class P/R/F1 over the classes occurring in gold or pred, plus the macro
// average. Macro F1 is the mean of per-class F1 scores.
template <class Label>
ClassificationReport<Label> classification_report(std::span<const Label> gold, std::span<const Label> pred) {
  if (gold.size() != pred.size()) throw std::invalid_argument("classification_report: length mismatch");
  std::set<Label> classes(gold.begin(), gold.end());
  classes.insert(pred.begin(), pred.end());
  ClassificationReport<Label> out;
  out.macro.level = EvalLevel::kClassification;
  for (const Label& c : classes) {
    size_t tp = 0, g = 0, p = 0;
    for (size_t i = 0; i < gold.size(); ++i) {
      g += gold[i] == c;
      p += pred[i] == c;
      tp += (gold[i] == c && pred[i] == c);
    }
    auto r = report_from_counts(EvalLevel::kClassification, static_cast<double>(tp), g, p);
    out.per_class.emplace_back(c, r);
    out.macro.precision += r.precision;
    out.macro.recall += r.recall;
    out.macro.f1 += r.f1;
    out.macro.true_positives += r.true_positives;
  }
  if (!classes.empty()) {
    double k = static_cast<double>(classes.size());
    out.macro.precision /= k;
    out.macro.recall /= k;
    out.macro.f1 /= k;
  }
  out.macro.gold_count = gold.size();
  out.macro.pred_count = pred.size();
  return out;
}

template <class Label>
ClassificationReport<Label> classification_report(const std::vector<Label>& gold, const std::vector<Label>& pred) {
  return classification_report(std::span<const Label>(gold), std::span<const Label>(pred));
}

// Cohen's kappa. Identical label sequences give 1 (including the degenerate
// single-class case where chance agreement is 1).
template <class Label>
double cohens_kappa(const std::vector<Label>& a, const std::vector<Label>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cohens_kappa: length mismatch");
  if (a.empty()) throw std::invalid_argument("cohens_kappa: empty input");
  std::map<Label, double> ca, cb;
  double agree = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    agree += a[i] == b[i];
  }
  double n = static_cast<double>(a.size());
  double po = agree / n;
  double pe = 0;
  for (const auto& [label, cnt] : ca)
    if (auto it = cb.find(label); it != cb.end()) pe += (cnt / n) * (it->second / n);
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1 - pe);
}

// Kappa over item-level agreement: each matched pair is one item both
// annotators have, each unmatched item belongs to one annotator only.
inline double item_kappa(double matched, double a_count, double b_count) {
  double n = a_count + b_count - matched;
  if (n <= 0) return 1.0;
  double po = matched / n;
  double pa = a_count / n, pb = b_count / n;
  double pe = pa * pb + (1 - pa) * (1 - pb);
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1 - pe);
}

// ---------------------------------------------------------------------------
// Document-level extraction evaluation and inter-annotator agreement

struct ExtractionReport {
  ClassificationReport<Presence> classification;
  EvalReport entity;
  EvalReport relation;
  double kappa_classification = 0;  // 3-way labels
  double kappa_entity = 0;
  double kappa_relation = 0;
};

// Relations of an annotation, binarized.
inline std::vector<RecombinationRecord> annotation_relations(const GoldAnnotation& a) {
  if (a.label == GoldLabel::kNotPresent) return {};
  RecombinationRecord r;
  r.paper_id = a.paper_id;
  r.relation_type = a.label == GoldLabel::kBlend ? RelationType::kBlend : RelationType::kInspiration;
  r.entities = a.entities;
  if (auto v = validate_record(r)) throw EvaluationError("annotation " + a.paper_id + " violates " + v->rule);
  std::vector<RecombinationRecord> out;
  for (auto& b : binarize(r)) out.push_back(std::move(b.record));
  return out;
}

// Converts an extraction outcome into annotation form (parse failures count
// as not-present predictions).
inline GoldAnnotation annotation_from_outcome(const std::string& paper_id, const ExtractionOutcome& o,
                                              const std::string& annotator = "model") {
  GoldAnnotation a{paper_id, annotator, GoldLabel::kNotPresent, {}};
  if (o.is_present()) {
    a.label = o.record->relation_type == RelationType::kBlend ? GoldLabel::kBlend : GoldLabel::kInspiration;
    a.entities = o.record->entities;
  }
  return a;
}

using JudgeFactory = std::function<SpanJudge(const std::string& paper_id)>;

// Scores `pred` against `gold`. Papers missing from `pred` count as
// not-present predictions.
inline ExtractionReport extraction_report(const std::vector<GoldAnnotation>& gold,
                                          const std::vector<GoldAnnotation>& pred, const JudgeFactory& judge_for) {
  std::map<std::string, const GoldAnnotation*> pred_by_id;
  for (const auto& p : pred) pred_by_id[p.paper_id] = &p;

  std::vector<Presence> gold_presence, pred_presence;
  std::vector<GoldLabel> gold_labels, pred_labels;
  std::vector<EvalReport> entity_parts, relation_parts;
  double entity_matched = 0, relation_full = 0;
  for (const auto& g : gold) {
    GoldAnnotation empty{g.paper_id, "", GoldLabel::kNotPresent, {}};
    auto it = pred_by_id.find(g.paper_id);
    const GoldAnnotation& p = it == pred_by_id.end() ? empty : *it->second;
    gold_presence.push_back(presence_of(g.label));
    pred_presence.push_back(presence_of(p.label));
    gold_labels.push_back(g.label);
    pred_labels.push_back(p.label);
    if (g.entities.empty() && p.entities.empty()) continue;

    SpanJudge judge = judge_for(g.paper_id);
    auto decisions = match_entities(g.entities, p.entities, judge);
    auto er = entity_prf(decisions, g.entities.size(), p.entities.size());
    entity_matched += er.true_positives;
    entity_parts.push_back(er);

    auto rm = relation_match(annotation_relations(g), annotation_relations(p), judge);
    for (const auto& a : rm.assignments) relation_full += a.credit >= 1.0 ? 1 : 0;
    relation_parts.push_back(rm.report);
  }
  ExtractionReport out;
  out.classification = classification_report(gold_presence, pred_presence);
  out.entity = aggregate(EvalLevel::kEntity, entity_parts);
  out.relation = aggregate(EvalLevel::kRelation, relation_parts);
  out.kappa_classification = cohens_kappa(gold_labels, pred_labels);
  out.kappa_entity = item_kappa(entity_matched, static_cast<double>(out.entity.gold_count),
                                static_cast<double>(out.entity.pred_count));
  out.kappa_relation = item_kappa(relation_full, static_cast<double>(out.relation.gold_count),
                                  static_cast<double>(out.relation.pred_count));
  return out;
}

// Agreement with annotator A as the reference. Both annotators must cover
// exactly the same papers.
inline ExtractionReport iaa_report(const std::vector<GoldAnnotation>& a, const std::vector<GoldAnnotation>& b,
                                   const JudgeFactory& judge_for) {
  std::set<std::string> ids_a, ids_b;
  for (const auto& x : a) ids_a.insert(x.paper_id);
  for (const auto& x : b) ids_b.insert(x.paper_id);
  std::vector<std::string> missing;
  for (const auto& id : ids_a)
    if (!ids_b.count(id)) missing.push_back(id + " (missing from B)");
  for (const auto& id : ids_b)
    if (!ids_a.count(id)) missing.push_back(id + " (missing from A)");
  if (!missing.empty()) {
    std::string msg = "iaa_report: annotator coverage mismatch:";
    for (const auto& m : missing) msg += " " + m;
    throw EvaluationError(msg);
  }
  return extraction_report(a, b, judge_for);
}

inline Json to_json(const ExtractionReport& r) {
  Json per_class = Json::object();
  for (const auto& [label, rep] : r.classification.per_class) per_class[std::string(to_string(label))] = to_json(rep);
  return Json{{"classification", {{"macro", to_json(r.classification.macro)}, {"per_class", per_class}}},
              {"entity", to_json(r.entity)},
              {"relation", to_json(r.relation)},
              {"kappa", {{"classification", r.kappa_classification},
                         {"entity", r.kappa_entity},
                         {"relation", r.kappa_relation}}}};
}

// Fixed-width table: one row per task (classification, entity, relation).
inline std::string format_table(const ExtractionReport& r, const std::string& system = "system") {
  std::ostringstream out;
  out << std::left << std::setw(26) << "Task" << std::setw(22) << "System" << std::right << std::setw(10)
      << "Precision" << std::setw(10) << "Recall" << std::setw(10) << "F1" << "\n";
  auto row = [&](const char* task, const EvalReport& e) {
    out << std::left << std::setw(26) << task << std::setw(22) << system << std::right << std::fixed
        << std::setprecision(3) << std::setw(10) << e.precision << std::setw(10) << e.recall << std::setw(10) << e.f1
        << "\n";
  };
  row("Abstract classification", r.classification.macro);
  row("Entity extraction", r.entity);
  row("Relation extraction", r.relation);
  return out.str();
}

// ---------------------------------------------------------------------------
// LLM-judge correctness audit

inline std::string record_judge_prompt(const std::string& abstract, const RecombinationRecord& r) {
  std::string e1, e2;
  if (r.relation_type == RelationType::kInspiration) {
    e1 = r.source().text;
    e2 = r.target().text;
  } else {
    e1 = r.entities.at(0).text;
    for (size_t i = 1; i < r.entities.size(); ++i) e2 += (i > 1 ? " | " : "") + r.entities[i].text;
  }
  return prompts::fill(prompts::kRecordJudge, {{"ABSTRACT", abstract},
                                               {"EXTRACTED_RELATION", std::string(to_string(r.relation_type))},
                                               {"ENTITY1", e1},
                                               {"ENTITY2", e2}});
}

// One judge call; the verdict must be a plain yes/no.
inline bool judge_record_correctness(const std::string& abstract, const RecombinationRecord& r, Gateway& gw,
                                     const std::string& model) {
  if (auto v = validate_record(r)) throw std::invalid_argument("judge_record_correctness: invalid record: " + v->rule);
  std::string reply = gw.generate_text(model, record_judge_prompt(abstract, r), 8);
  auto verdict = parse_yes_no(reply);
  if (!verdict) throw EvaluationError("unparseable judge verdict: " + reply.substr(0, 80));
  return *verdict;
}

struct AuditItem {
  std::string abstract;
  RecombinationRecord record;
  std::optional<bool> human_verdict;
};

struct AuditResult {
  std::vector<std::optional<bool>> verdicts;  // nullopt where judging failed
  double proportion_correct = 0;              // over successfully judged items
  size_t judged = 0;
  bool complete = true;
  std::vector<std::string> errors;            // "index: message"
  std::optional<double> agreement_f1;         // judge vs human, positive = correct
};

// Binary F1 of `pred` against reference `gold`, positive class = true.
inline double binary_f1(const std::vector<bool>& gold, const std::vector<bool>& pred) {
  size_t tp = 0, g = 0, p = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    tp += gold[i] && pred[i];
    g += gold[i];
    p += pred[i];
  }
  return report_from_counts(EvalLevel::kClassification, static_cast<double>(tp), g, p).f1;
}

inline AuditResult accuracy_audit(const std::vector<AuditItem>& sample, Gateway& gw, const std::string& model,
                                  size_t max_in_flight = 4) {
  if (sample.empty()) throw std::invalid_argument("accuracy_audit: empty sample");
  auto results = batch_execute(sample, max_in_flight, [&](const AuditItem& it) {
    return judge_record_correctness(it.abstract, it.record, gw, model);
  });
  AuditResult out;
  size_t correct = 0;
  std::vector<bool> human, judge;
  for (size_t i = 0; i < results.size(); ++i) {
    if (!results[i].ok()) {
      out.verdicts.push_back(std::nullopt);
      out.errors.push_back(std::to_string(i) + ": " + results[i].error);
      out.complete = false;
      continue;
    }
    bool v = *results[i].value;
    out.verdicts.push_back(v);
    ++out.judged;
    correct += v;
    if (sample[i].human_verdict) {
      human.push_back(*sample[i].human_verdict);
      judge.push_back(v);
    }
  }
  out.proportion_correct = out.judged ? static_cast<double>(correct) / static_cast<double>(out.judged) : 0.0;
  if (!human.empty()) out.agreement_f1 = binary_f1(human, judge);
  return out;
}

inline Json to_json(const AuditResult& r) {
  Json verdicts = Json::array();
  for (const auto& v : r.verdicts) verdicts.push_back(v ? Json(*v) : Json(nullptr));
  Json j{{"proportion_correct", r.proportion_correct},
         {"judged", r.judged},
         {"complete", r.complete},
         {"errors", r.errors},
         {"verdicts", verdicts}};
  j["agreement_f1"] = r.agreement_f1 ? Json(*r.agreement_f1) : Json(nullptr);
  return j;
}

}  // namespace recomb

#endif  // RECOMB_EVAL_HPP_
