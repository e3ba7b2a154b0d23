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

#include <random>

#include "oracles.hpp"
#include "recomb/predict.hpp"
#include "test_util.hpp"

namespace recomb {
namespace {

using testing::blend;
using testing::gateway_for;
using testing::inspiration;

TEST(Context, MethodologyStatements) {
  EXPECT_EQ(methodology_statement(RelationType::kBlend, "A", "B"), "Combine A and B");
  EXPECT_EQ(methodology_statement(RelationType::kInspiration, "S", "T"), "Take inspiration from S and apply it to T");
}

TEST(Context, EchoesMockSentences) {
  auto mock = std::make_shared<MockBackend>();
  mock->add_rule({{"Approach: Take inspiration from the human storytelling process and apply it to "
                   "data-driven storytelling"},
                  "  Data stories are hard to write. Prior tools ignore narrative structure.\n"});
  auto r = inspiration("p", "the human storytelling process", "data-driven storytelling");
  EXPECT_EQ(extract_context("abstract", r, *gateway_for(mock), "gpt-4o"),
            "Data stories are hard to write. Prior tools ignore narrative structure.");
  EXPECT_THROW(extract_context("abstract", blend("p", {"a"}), *gateway_for(mock), "m"), std::invalid_argument);
}

TEST(Leak, HumanBrainLeaks) {
  auto mock = std::make_shared<MockBackend>();
  mock->add_rule({{"Hidden answer: The human brain"}, "Yes"});
  mock->add_rule({{"Hidden answer: graph rewiring"}, "No."});
  mock->add_rule({{"Hidden answer: x"}, "I am not sure"});
  auto gw = gateway_for(mock);
  EXPECT_TRUE(detect_leak("Inspired by the human brain's processing capabilities, we ...", "The human brain", *gw,
                          "gpt-4o"));
  EXPECT_FALSE(detect_leak("Robots explore unknown terrain.", "graph rewiring", *gw, "gpt-4o"));
  EXPECT_TRUE(detect_leak("q", "x", *gw, "gpt-4o"));
}

RecombinationEdge edge(RelationType t, size_t a, size_t b, std::string paper, Date d = {2023, 1, 1}) {
  RecombinationEdge e;
  e.type = t;
  e.a = a;
  e.b = b;
  e.paper_id = std::move(paper);
  e.published = d;
  e.self_loop = a == b;
  e.text_a = "A" + std::to_string(a);
  e.text_b = "B" + std::to_string(b);
  return e;
}

TEST(Queries, BlendGivesBothDirectionsInspirationAsksForSource) {
  auto qb = queries_for_edge(edge(RelationType::kBlend, 1, 2, "p"));
  ASSERT_EQ(qb.size(), 2u);
  EXPECT_EQ(qb[0].given_node, 1u);
  EXPECT_EQ(qb[0].gold_node, 2u);
  EXPECT_EQ(qb[0].question, "What could we blend with \"A1\" to address the described settings?");
  EXPECT_EQ(qb[1].gold_node, 1u);
  auto qi = queries_for_edge(edge(RelationType::kInspiration, 3, 4, "p"));
  ASSERT_EQ(qi.size(), 1u);
  EXPECT_EQ(qi[0].given_node, 4u);
  EXPECT_EQ(qi[0].gold_node, 3u);
  EXPECT_EQ(qi[0].question, "What would be a good source of inspiration for \"B4\"?");
  EXPECT_TRUE(queries_for_edge(edge(RelationType::kBlend, 5, 5, "p")).empty());
  qi[0].context = "Ctx.";
  EXPECT_EQ(qi[0].query_text(), "Ctx. " + qi[0].question);
  EXPECT_EQ(query_from_json(to_json(qi[0])), qi[0]);
}

PredictionQuery dated(std::string paper, Date d, std::string suffix = "") {
  PredictionQuery q;
  q.query_id = paper + suffix;
  q.paper_id = std::move(paper);
  q.published = d;
  return q;
}

TEST(Split, CutoffRule) {
  auto s = split_by_cutoff({dated("a", {2024, 3, 1}), dated("b", {2023, 12, 31})}, 2024, 0.0);
  ASSERT_EQ(s.test.size(), 1u);
  EXPECT_EQ(s.test[0].paper_id, "a");
  EXPECT_EQ(s.train.size(), 1u);
  auto all_val = split_by_cutoff({dated("b", {2023, 12, 31})}, 2024, 1.0);
  EXPECT_EQ(all_val.validation.size(), 1u);
}

TEST(Split, Errors) {
  EXPECT_THROW(split_by_cutoff({dated("a", {0, 1, 1})}), PredictError);
  EXPECT_THROW(split_by_cutoff({dated("a", {2020, 1, 1}), dated("a", {2021, 1, 1}, "x")}), PredictError);
  EXPECT_THROW(split_by_cutoff({}, 2024, 1.5), std::invalid_argument);
}

TEST(Split, PaperDisjointAndSeeded) {
  std::mt19937 rng(2);
  std::vector<PredictionQuery> pairs;
  for (int i = 0; i < 400; ++i) {
    Date d{2018 + static_cast<int>(rng() % 8), 1 + static_cast<int>(rng() % 12), 1};
    pairs.push_back(dated("p" + std::to_string(i), d, "#ab"));
    pairs.push_back(dated("p" + std::to_string(i), d, "#ba"));
  }
  auto s1 = split_by_cutoff(pairs, 2024, 0.25, 7);
  auto s2 = split_by_cutoff(pairs, 2024, 0.25, 7);
  EXPECT_EQ(s1.validation, s2.validation);
  EXPECT_EQ(s1.train.size() + s1.validation.size() + s1.test.size(), pairs.size());
  std::set<std::string> tr, va, te;
  for (auto& q : s1.train) tr.insert(q.paper_id);
  for (auto& q : s1.validation) va.insert(q.paper_id);
  for (auto& q : s1.test) {
    te.insert(q.paper_id);
    EXPECT_GE(q.published.year, 2024);
  }
  for (auto& id : va) {
    EXPECT_FALSE(tr.count(id));
    EXPECT_FALSE(te.count(id));
  }
  for (auto& id : tr) EXPECT_FALSE(te.count(id));
  EXPECT_NEAR(static_cast<double>(va.size()) / static_cast<double>(va.size() + tr.size()), 0.25, 0.01);
}

TEST(Metrics, HandArithmetic) {
  auto m = ranking_metrics({1, 4, 12});
  EXPECT_DOUBLE_EQ(m.hits[3], 1.0 / 3);
  EXPECT_DOUBLE_EQ(m.hits[5], 2.0 / 3);
  EXPECT_DOUBLE_EQ(m.hits[10], 2.0 / 3);
  EXPECT_DOUBLE_EQ(m.hits[100], 1.0);
  EXPECT_NEAR(m.mrr, 0.4444, 1e-4);
  EXPECT_DOUBLE_EQ(m.mrr, (1 + 0.25 + 1.0 / 12) / 3);
  EXPECT_EQ(m.medr, 4u);

  auto one = ranking_metrics({1000});
  EXPECT_EQ(one.hits[100], 0.0);
  EXPECT_DOUBLE_EQ(one.mrr, 0.001);
  EXPECT_EQ(one.medr, 1000u);

  auto perfect = ranking_metrics({1, 1, 1, 1});
  for (auto& [k, h] : perfect.hits) EXPECT_EQ(h, 1.0);
  EXPECT_EQ(perfect.mrr, 1.0);
  EXPECT_EQ(ranking_metrics({2, 7, 3, 9}).medr, 3u);  // lower median
  EXPECT_THROW(ranking_metrics({}), std::invalid_argument);
  EXPECT_THROW(ranking_metrics({0}), std::invalid_argument);
  EXPECT_NE(format_metrics_table(m).find("MedR"), std::string::npos);
}

TEST(Metrics, AgreeWithNaiveOracle) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<size_t> ranks, naive;
  for (int q = 0; q < 50; ++q) {
    std::vector<double> scores(300);
    for (auto& s : scores) s = std::round(u(rng) * 50) / 50;  // many ties
    size_t gold = rng() % scores.size();
    std::vector<ScoredCandidate> r;
    for (size_t i = 0; i < scores.size(); ++i) r.push_back({i, scores[i]});
    sort_ranking(r);
    ranks.push_back(rank_of(r, gold));
    naive.push_back(oracle::naive_rank(scores, gold));
  }
  EXPECT_EQ(ranks, naive);
  auto m = ranking_metrics(ranks);
  auto o = oracle::naive_metrics(ranks, default_ks());
  EXPECT_EQ(m.hits, o.hits);
  EXPECT_EQ(m.mrr, o.mrr);
  EXPECT_EQ(m.medr, o.medr);
}

TEST(Filtered, HandCases) {
  PredictionQuery q;
  q.given_node = 0;
  q.gold_node = 3;
  q.relation_type = RelationType::kBlend;
  std::vector<ScoredCandidate> r = {{1, 0.9}, {2, 0.8}, {3, 0.7}, {4, 0.6}};
  KnownAnswers none;
  EXPECT_EQ(apply_filtered_setting(r, q, none), r);

  KnownAnswers one;
  one.add(RelationType::kBlend, 2, 0);  // symmetric: 0 -> 2 known
  one.add(RelationType::kBlend, 0, 3);
  auto f = apply_filtered_setting(r, q, one);
  EXPECT_EQ(rank_of(f, 3), rank_of(r, 3) - 1);

  KnownAnswers all;
  all.add(RelationType::kBlend, 0, 1);
  all.add(RelationType::kBlend, 0, 2);
  all.add(RelationType::kInspiration, 4, 0);  // other relation type: not filtered
  auto g = apply_filtered_setting(r, q, all);
  EXPECT_EQ(rank_of(g, 3), 1u);
  EXPECT_EQ(g.size(), 2u);
}

TEST(Filtered, NeverWorseThanRaw) {
  std::mt19937 rng(23);
  for (int it = 0; it < 2000; ++it) {
    size_t n = 2 + rng() % 30;
    PredictionQuery q;
    q.given_node = n;  // outside the pool
    q.gold_node = rng() % n;
    q.relation_type = rng() % 2 ? RelationType::kBlend : RelationType::kInspiration;
    std::vector<ScoredCandidate> r;
    for (size_t i = 0; i < n; ++i) r.push_back({i, static_cast<double>(rng() % 10)});
    sort_ranking(r);
    KnownAnswers k;
    for (size_t i = 0; i < n; ++i)
      if (rng() % 3 == 0) k.add(q.relation_type, q.relation_type == RelationType::kBlend ? q.given_node : i,
                                q.relation_type == RelationType::kBlend ? i : q.given_node);
    auto f = apply_filtered_setting(r, q, k);
    EXPECT_LE(rank_of(f, q.gold_node), rank_of(r, q.gold_node));
    for (const auto& c : f) EXPECT_TRUE(c.node_id == q.gold_node || !k.answers(q.given_node, q.relation_type).count(c.node_id));
  }
}

TEST(Rank, GoldClosestAndTieBreak) {
  auto mock = std::make_shared<MockBackend>();
  PredictionQuery q;
  q.query_id = "q";
  q.question = "Q?";
  q.gold_node = 7;
  mock->set_embedding("Q?", {1, 0});
  mock->set_embedding("gold", {0.9, 0.1});
  mock->set_embedding("near", {0.5, 0.5});
  mock->set_embedding("far", {0, 1});
  auto gw = gateway_for(mock);
  std::vector<Candidate> pool = {{2, "far"}, {7, "gold"}, {5, "near"}};
  auto rq = rank_candidates(q, pool, *gw, "emb", KnownAnswers{});
  EXPECT_EQ(rq.filtered_rank, 1u);
  EXPECT_EQ(rq.ranking.size(), 3u);
  EXPECT_EQ(rq.ranking[2].node_id, 2u);

  std::vector<Candidate> tied = {{9, "twin"}, {3, "twin"}};
  mock->set_embedding("twin", {1, 1});
  q.gold_node = 3;
  EXPECT_EQ(rank_candidates(q, tied, *gw, "emb", KnownAnswers{}).filtered_rank, 1u);
  EXPECT_THROW(rank_candidates(q, {}, *gw, "emb", KnownAnswers{}), std::invalid_argument);
  q.gold_node = 42;
  EXPECT_THROW(rank_candidates(q, pool, *gw, "emb", KnownAnswers{}), PredictError);
}

std::vector<Candidate> numbered(size_t n) {
  std::vector<Candidate> c;
  for (size_t i = 0; i < n; ++i) c.push_back({i, "cand" + std::to_string(i)});
  return c;
}

std::vector<size_t> ids(const std::vector<Candidate>& c) {
  std::vector<size_t> out;
  for (const auto& x : c) out.push_back(x.node_id);
  return out;
}

TEST(Rerank, TwentyCandidatesThreeWindows) {
  auto mock = std::make_shared<MockBackend>();
  std::vector<std::string> windows;
  mock->set_handler([&](const GenRequest& r) -> std::optional<std::string> {
    auto p = r.prompt.find("[1] ");
    windows.push_back(r.prompt.substr(p + 4, r.prompt.find('\n', p) - p - 4));
    return "[1] > [2] > [3] > [4] > [5] > [6] > [7] > [8] > [9] > [10]";
  });
  auto in = numbered(20);
  auto out = rerank_top_k("q", in, *gateway_for(mock), "gpt-4o");
  EXPECT_EQ(mock->generate_calls(), 3u);
  EXPECT_EQ(windows, (std::vector<std::string>{"cand10", "cand5", "cand0"}));
  EXPECT_EQ(ids(out), ids(in));
}

TEST(Rerank, ReversingWindowsStaysPermutation) {
  auto mock = std::make_shared<MockBackend>();
  mock->set_handler([](const GenRequest&) -> std::optional<std::string> {
    return "[10] > [9] > [8] > [7] > [6] > [5] > [4] > [3] > [2] > [1]";
  });
  auto in = numbered(20);
  auto out = ids(rerank_top_k("q", in, *gateway_for(mock), "m"));
  auto sorted = out;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, ids(in));
  EXPECT_NE(out, ids(in));
  EXPECT_THROW(rerank_top_k("q", numbered(21), *gateway_for(mock), "m"), std::invalid_argument);
}

TEST(Rerank, UnparseableReplyLeavesWindow) {
  auto mock = std::make_shared<MockBackend>();
  mock->set_handler([](const GenRequest&) -> std::optional<std::string> { return "I cannot rank these."; });
  auto in = numbered(12);
  EXPECT_EQ(ids(rerank_top_k("q", in, *gateway_for(mock), "m")), ids(in));
  EXPECT_EQ(mock->generate_calls(), 2u);
}

TEST(ParsePermutation, Cases) {
  EXPECT_EQ(parse_permutation("[2] > [1] > [3]", 3), (std::vector<size_t>{1, 0, 2}));
  EXPECT_EQ(parse_permutation("[3] > [3] > [99] > [0]", 3), (std::vector<size_t>{2, 0, 1}));
  EXPECT_EQ(parse_permutation("99999999999999999999999 [1]", 2), (std::vector<size_t>{0, 1}));
  EXPECT_FALSE(parse_permutation("none", 3));
}

TEST(Contrastive, SixtyRowsAndNoKnownPositives) {
  KnownAnswers k;
  k.add(RelationType::kBlend, 0, 1);
  k.add(RelationType::kBlend, 0, 2);
  k.add(RelationType::kInspiration, 3, 4);
  PredictionQuery a, b;
  a.query_id = "a";
  a.given_node = 0;
  a.gold_node = 1;
  a.relation_type = RelationType::kBlend;
  b.query_id = "b";
  b.given_node = 4;
  b.gold_node = 3;
  b.relation_type = RelationType::kInspiration;
  std::vector<size_t> pool(100);
  std::iota(pool.begin(), pool.end(), 0);
  auto rows = export_contrastive_pairs({a, b}, pool, k, 30, 5);
  ASSERT_EQ(rows.size(), 60u);
  EXPECT_EQ(rows, export_contrastive_pairs({a, b}, pool, k, 30, 5));
  EXPECT_NE(rows, export_contrastive_pairs({a, b}, pool, k, 30, 6));
  std::map<std::string, std::set<size_t>> neg;
  for (const auto& r : rows) {
    const auto& q = r.query_id == "a" ? a : b;
    EXPECT_EQ(r.positive, q.gold_node);
    EXPECT_FALSE(k.answers(q.given_node, q.relation_type).count(r.negative));
    EXPECT_NE(r.negative, q.given_node);
    neg[r.query_id].insert(r.negative);
  }
  EXPECT_EQ(neg["a"].size(), 30u);  // without replacement
  EXPECT_EQ(neg["b"].size(), 30u);
  EXPECT_THROW(export_contrastive_pairs({a}, {0, 1, 2, 3, 4}, k, 30), PredictError);
}

}  // namespace
}  // namespace recomb
