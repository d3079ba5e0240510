// Copyright 2026 The Compositor Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include <gtest/gtest.h>

#include "compositor/composer.h"
#include "compositor/matchmaker.h"
#include "oracle.h"

namespace compositor::composer {
namespace {

Request Req(ConceptSet provided, ConceptSet desired) {
  Request r;
  r.provided = NormalizeConcepts(std::move(provided));
  r.desired = NormalizeConcepts(std::move(desired));
  return r;
}

evaluator::ScoredPlan Scored(std::vector<ServiceDescription> nodes, const Request& r) {
  evaluator::ScoredPlan s;
  s.plan = *BuildPlan(std::move(nodes), r.provided, r.desired);
  s.score = 1.0;
  return s;
}

TEST(PrunePlanTest, DropsUnusedBranch) {
  const auto cat = Cat1();
  const Request r = Req({"A"}, {"C"});
  auto pruned = PrunePlan(Scored({cat[0], cat[1], cat[3]}, r).plan, r);
  EXPECT_EQ(pruned.NodeIds(), (std::vector<std::string>{"S1", "S2"}));
  EXPECT_EQ(PrunePlan(pruned, r), pruned);
  EXPECT_TRUE(PrunePlan(CompositionPlan{}, r).nodes.empty());
}

TEST(LayerPlanTest, Examples) {
  const auto cat = Cat1();
  CompositionPlan chain;
  chain.nodes = {cat[0], cat[1]};
  EXPECT_EQ(LayerPlan(chain, {"A"}).layers, (Layers{{"S1"}, {"S2"}}));
  CompositionPlan fan;
  fan.nodes = {cat[0], cat[1], cat[3]};
  EXPECT_EQ(LayerPlan(fan, {"A"}).layers, (Layers{{"S1", "S4"}, {"S2"}}));
  EXPECT_TRUE(LayerPlan(CompositionPlan{}, {"A"}).layers.empty());
}

TEST(LayerPlanTest, CycleRejected) {
  auto a = Cat1()[0];
  auto b = Cat1()[1];
  a.inputs = {"C"};  // A <- C, C <- B, B <- A's output
  CompositionPlan loop;
  loop.nodes = {a, b};
  try {
    LayerPlan(loop, {"X"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCycle);
  }
}

TEST(ComposeTest, R1Winner) {
  const auto cat = Cat1();
  const Request r = Req({"A"}, {"C"});
  auto plan = Compose(Scored({cat[0], cat[1]}, r), r);
  EXPECT_EQ(plan.layers, (Layers{{"S1"}, {"S2"}}));
  EXPECT_DOUBLE_EQ(plan.aggregate.response_time_ms, 30.0);
  EXPECT_EQ(plan.edges, (std::vector<PlanEdge>{{"S1", "S2", "B"},
                                               {"S2", std::string(kSink), "C"},
                                               {std::string(kSource), "S1", "A"}}));
}

TEST(ComposeTest, R2ParallelBranch) {
  const auto cat = Cat1();
  const Request r = Req({"A"}, {"C", "D"});
  auto plan = Compose(Scored({cat[0], cat[1], cat[3]}, r), r);
  EXPECT_EQ(plan.layers, (Layers{{"S1", "S4"}, {"S2"}}));
  EXPECT_DOUBLE_EQ(plan.aggregate.response_time_ms, 35.0);
}

TEST(ComposeTest, IdentityRequest) {
  const Request r = Req({"C"}, {"C"});
  auto plan = Compose(evaluator::ScoredPlan{}, r, 1234.0);
  EXPECT_TRUE(plan.nodes.empty());
  EXPECT_TRUE(plan.layers.empty());
  EXPECT_EQ(plan.aggregate.availability, 1.0);
  EXPECT_EQ(plan.aggregate.throughput_rps, 1234.0);
}

TEST(ComposeTest, EarliestProducerThenSmallestId) {
  auto s1 = Cat1()[0];  // A -> B
  auto s5 = s1;
  s5.id = "S5";
  auto s0 = s1;
  s0.id = "S0";
  s0.inputs = {"Q"};  // B again, one layer later
  auto q = s1;
  q.id = "SQ";
  q.outputs = {"Q"};
  auto consumer = Cat1()[1];  // B -> C
  const Request r = Req({"A"}, {"C"});
  auto plan = Compose(Scored({s5, s1, s0, q, consumer}, r), r);
  for (const auto& e : plan.edges) {
    if (e.consumer == "S2") EXPECT_EQ(e.producer, "S1");
  }
}

TEST(ComposerPropertyTest, PruneNeverWorsensAndLayersOrderEdges) {
  std::mt19937_64 rng(3);
  int checked = 0;
  while (checked < 300) {
    auto cat = oracle::RandomCatalog(rng, 10, 6);
    const Request r = Req({"c0"}, {"c" + std::to_string(1 + rng() % 5)});
    std::vector<ServiceDescription> firable;
    for (const auto& s : cat) {
      if (BuildPlan({s}, r.provided, {})) firable.push_back(s);
    }
    // A valid but padded plan: a minimal one plus unrelated firable nodes.
    std::vector<CompositionPlan> plans;
    try {
      plans = matchmaker::GenerateCandidates(cat, r);
    } catch (const Error&) {
      continue;
    }
    auto nodes = plans[0].nodes;
    for (const auto& s : firable) {
      bool dup = false;
      for (const auto& n : nodes) dup |= n.id == s.id;
      if (!dup && rng() % 2) nodes.push_back(s);
    }
    evaluator::ScoredPlan padded;
    padded.plan = *BuildPlan(nodes, r.provided, r.desired);
    const auto before = evaluator::AggregateQos(padded.plan);
    const auto plan = Compose(padded, r);
    EXPECT_TRUE(CheckPlan(plan, r.provided, r.desired).ok());
    EXPECT_LE(plan.aggregate.response_time_ms, before.response_time_ms);
    EXPECT_LE(plan.aggregate.cost, before.cost);
    EXPECT_GE(plan.aggregate.availability, before.availability);
    EXPECT_GE(plan.aggregate.reliability, before.reliability);
    for (const auto& e : plan.edges) {
      if (e.producer == kSource || e.consumer == kSink) continue;
      EXPECT_LT(*plan.LayerOf(e.producer), *plan.LayerOf(e.consumer));
    }
    EXPECT_EQ(PlanToJson(plan).dump(), PlanToJson(Compose(padded, r)).dump());
    ++checked;
  }
}

}  // namespace
}  // namespace compositor::composer
