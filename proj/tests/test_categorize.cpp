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

#include "recomb/categorize.hpp"
#include "test_util.hpp"

namespace recomb {
namespace {

using testing::blend;
using testing::gateway_for;
using testing::inspiration;

TEST(Labels, ArxivWinsThenBranchThenOther) {
  EXPECT_EQ(label_from_fields(Json{{"arxiv_category", "cs.RO"}, {"branch", "Zoology"}}).grouped, "cs.ro");
  EXPECT_EQ(label_from_fields(Json{{"arxiv_category", "cs.XX"}, {"branch", "Zoology"}}).grouped, "Zoology");
  EXPECT_TRUE(label_from_fields(Json{{"arxiv_category", nullptr}, {"branch", "Astrobotany"}}).is_other());
  EXPECT_TRUE(label_from_fields(Json{{"arxiv_category", nullptr}, {"branch", nullptr}}).is_other());
  EXPECT_EQ(label_from_fields(Json{{"arxiv_category", "cs.RO (Robotics)"}}).value, "cs.ro");
}

TEST(Labels, BranchGrouping) {
  EXPECT_EQ(branch_label("Neuroscience").grouped, "Biomedical Sciences");
  EXPECT_EQ(branch_label("neuroscience").value, "Neuroscience");
  EXPECT_EQ(branch_label("Zoology").grouped, "Zoology");
  EXPECT_EQ(branch_label("Ornithology").grouped, "Zoology");
  EXPECT_EQ(branch_label("Astrobotany"), other_label());
  EXPECT_EQ(domain_key(branch_label("Neuroscience")), "biomedical sciences");
  EXPECT_THROW(arxiv_label("cs.XX"), std::invalid_argument);
}

TEST(Labels, EveryGroupedBranchIsInCatalog) {
  for (const auto& [group, members] : branch_groups())
    for (const auto& m : members) EXPECT_TRUE(known_branch(m)) << m;
}

TEST(Labels, JsonRoundTrip) {
  for (const auto& l : {arxiv_label("cs.CL"), branch_label("Linguistics"), other_label()})
    EXPECT_EQ(domain_from_json(to_json(l)), l);
  EXPECT_THROW(domain_from_json(Json{{"kind", "branch"}, {"value", "Astrobotany"}}), FormatError);
}

TEST(AssignDomains, HerdingDogsInspiration) {
  auto r = inspiration("p", "the shepherding behavior of herding dogs", "Frontier exploration");
  auto mock = std::make_shared<MockBackend>();
  mock->add_rule({{"herding dogs", "inspiration-source"},
                  R"({"inspiration-source": {"arxiv_category": null, "branch": "Zoology"},)"
                  R"( "inspiration-target": {"arxiv_category": "cs.RO", "branch": null}})"});
  auto labels = assign_domains(r, "abstract", *gateway_for(mock), "gpt-4o");
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_EQ(labels[0].kind, DomainKind::kBranch);
  EXPECT_EQ(domain_key(labels[0]), "zoology");
  EXPECT_EQ(domain_key(labels[1]), "cs.ro");
}

TEST(AssignDomains, BlendMatchesByTextThenPosition) {
  auto r = blend("p", {"a", "b", "c"});
  std::string reply = R"({"elements": [{"entity": "b", "arxiv_category": "cs.CV"},)"
                      R"( {"entity": "zzz", "arxiv_category": "cs.CL"},)"
                      R"( {"entity": "A", "branch": "Philosophy"}]})";
  auto labels = parse_domain_reply(r, reply);
  EXPECT_EQ(domain_key(labels[0]), "humanities");
  EXPECT_EQ(domain_key(labels[1]), "cs.cv");
  EXPECT_EQ(domain_key(labels[2]), "other");  // position 2 already taken by "A"
  for (const auto& l : parse_domain_reply(r, "not json")) EXPECT_TRUE(l.is_other());
}

TEST(AssignDomains, PromptListsCatalogs) {
  auto p = domain_prompt(blend("p", {"x", "y"}), "abs");
  EXPECT_NE(p.find("cs.RO"), std::string::npos);
  EXPECT_NE(p.find("Zoology"), std::string::npos);
  EXPECT_NE(p.find("- x\n- y\n"), std::string::npos);
}

TEST(VoteNodeLabel, MajorityThenRecency) {
  auto cl = arxiv_label("cs.CL"), lg = arxiv_label("cs.LG");
  EXPECT_EQ(vote_node_label({{cl, {2020, 1, 1}}, {cl, {2021, 1, 1}}, {lg, {2024, 1, 1}}}), cl);
  EXPECT_EQ(vote_node_label({{cl, {2022, 1, 1}}, {lg, {2024, 1, 1}}}), lg);
  EXPECT_EQ(vote_node_label({{lg, {2024, 1, 1}}, {cl, {2022, 1, 1}}}), lg);
  EXPECT_EQ(vote_node_label({}), other_label());
}

}  // namespace
}  // namespace recomb
