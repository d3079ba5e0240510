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
#include "compositor/evaluator.h"
#include "compositor/matchmaker.h"
#include "oracle.h"

namespace compositor::evaluator {
namespace {

Request Req(ConceptSet provided, ConceptSet desired) {
  Request r;
  r.provided = NormalizeConcepts(std::move(provided));
  r.desired = NormalizeConcepts(std::move(desired));
  return r;
}

CompositionPlan Plan(std::vector<ServiceDescription> nodes, const Request& r) {
  auto p = BuildPlan(std::move(nodes), r.provided, r.desired);
  EXPECT_TRUE(p.has_value());
  p->aggregate = AggregateQos(*p);
  return *p;
}

ServiceDescription Svc(std::string id, ConceptSet in, ConceptSet out, double rt = 10) {
  ServiceDescription s = Cat1()[0];
  s.id = std::move(id);
  s.inputs = std::move(in);
  s.outputs = std::move(out);
  s.qos.response_time_ms = rt;
  return s;
}

QosWeights RtOnly() { return {1, 0, 0, 0, 0}; }

std::vector<CompositionPlan> Candidates(std::span<const ServiceDescription> cat, const Request& r) {
  auto plans = matchmaker::GenerateCandidates(cat, r);
  for (auto& p : plans) p.aggregate = AggregateQos(p);
  return plans;
}

TEST(FilterInterfaceTest, Examples) {
  const auto cat = Cat1();
  const Request r1 = Req({"A"}, {"C"});
  auto good = Plan({cat[0], cat[1]}, r1);
  EXPECT_TRUE(SatisfiesInterface(good, r1));

  // A node that needs E, which nothing produces.
  CompositionPlan bad = good;
  bad.nodes[1].inputs = {"E"};
  EXPECT_FALSE(SatisfiesInterface(bad, r1));
  EXPECT_EQ(FilterInterface({good, bad}, r1).size(), 1u);
  EXPECT_TRUE(FilterInterface({}, r1).empty());
}

TEST(FilterFunctionalityTest, Examples) {
  Request r = Req({"A"}, {"B"});
  auto s = Svc("S9", {"A"}, {"B"});
  s.functionality.category = "travel/booking/flight";
  r.category_requirement = "travel/booking";
  EXPECT_TRUE(SatisfiesFunctionality(Plan({s}, r), r));
  r.category_requirement = "travel/book";
  EXPECT_FALSE(SatisfiesFunctionality(Plan({s}, r), r));
  r.category_requirement.reset();

  r.constraints = {{"price", CompareOp::kLessEqual, 100.0}};
  s.functionality.attributes = {{"price", 120.0}};
  EXPECT_FALSE(SatisfiesFunctionality(Plan({s}, r), r));
  s.functionality.attributes = {{"price", 80.0}};
  EXPECT_TRUE(SatisfiesFunctionality(Plan({s}, r), r));
  s.functionality.attributes.clear();
  EXPECT_FALSE(SatisfiesFunctionality(Plan({s}, r), r));
  s.functionality.attributes = {{"price", std::string("cheap")}};
  EXPECT_FALSE(SatisfiesFunctionality(Plan({s}, r), r));
}

TEST(AggregateQosTest, Cat1Chain) {
  const auto cat = Cat1();
  const auto p = Plan({cat[0], cat[1]}, Req({"A"}, {"C"}));
  EXPECT_DOUBLE_EQ(p.aggregate.response_time_ms, 30.0);
  EXPECT_DOUBLE_EQ(p.aggregate.cost, 3.0);
  EXPECT_NEAR(p.aggregate.availability, 0.99 * 0.98, 1e-12);
  EXPECT_NEAR(p.aggregate.reliability, 0.99 * 0.98, 1e-12);
  EXPECT_DOUBLE_EQ(p.aggregate.throughput_rps, 50.0);
}

TEST(AggregateQosTest, ParallelLayerTakesMax) {
  const auto cat = Cat1();
  const auto p = Plan({cat[0], cat[1], cat[3]}, Req({"A"}, {"C", "D"}));
  EXPECT_EQ(p.layers, (Layers{{"S1", "S4"}, {"S2"}}));
  EXPECT_DOUBLE_EQ(p.aggregate.response_time_ms, 35.0);
  EXPECT_DOUBLE_EQ(p.aggregate.cost, 4.0);
}

TEST(AggregateQosTest, EmptyPlan) {
  const QoSVector q = AggregateQos(CompositionPlan{}, 777.0);
  EXPECT_EQ(q.response_time_ms, 0.0);
  EXPECT_EQ(q.cost, 0.0);
  EXPECT_EQ(q.availability, 1.0);
  EXPECT_EQ(q.reliability, 1.0);
  EXPECT_EQ(q.throughput_rps, 777.0);
}

TEST(ScoreTest, TwoPointRtOnly) {
  std::vector<QoSVector> qs = {{50, 1, 0.9, 0.9, 10}, {30, 1, 0.9, 0.9, 10}};
  auto s = ScoreAggregates(qs, RtOnly());
  EXPECT_DOUBLE_EQ(s[0].second, 0.0);
  EXPECT_DOUBLE_EQ(s[1].second, 1.0);
  EXPECT_DOUBLE_EQ(s[0].first[1], 1.0);  // equal cost
}

TEST(ScoreTest, SingleCandidateScoresOne) {
  std::vector<QoSVector> qs = {{50, 3, 0.5, 0.1, 10}};
  auto s = ScoreAggregates(qs, kEqualWeights);
  for (double u : s[0].first) EXPECT_EQ(u, 1.0);
  EXPECT_DOUBLE_EQ(s[0].second, 1.0);
}

TEST(ScoreTest, CostBoundRemovesChain) {
  const auto cat = Cat1();
  const Request r = Req({"A"}, {"C"});
  QosBounds b;
  b.max_cost = 2.5;
  auto scored = ScoreCandidates({Plan({cat[0], cat[1]}, r), Plan({cat[2]}, r)}, kEqualWeights, b);
  ASSERT_EQ(scored.size(), 1u);
  EXPECT_EQ(scored[0].plan.NodeIds(), (std::vector<std::string>{"S3"}));
  b.max_cost = 0.5;
  try {
    ScoreCandidates({Plan({cat[2]}, r)}, kEqualWeights, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoFeasible);
  }
}

TEST(SelectBestTest, R1RtOnlyPicksChain) {
  const auto cat = Cat1();
  const Request r = Req({"A"}, {"C"});
  auto scored = ScoreCandidates(Candidates(cat, r), RtOnly(), {});
  EXPECT_EQ(SelectBest(scored).plan.NodeIds(), (std::vector<std::string>{"S1", "S2"}));
}

TEST(SelectBestTest, TieBreaks) {
  ScoredPlan one, two, s25, s26;
  one.plan.nodes = {Svc("S7", {}, {"X"})};
  two.plan.nodes = {Svc("S1", {}, {"X"}), Svc("S2", {}, {"X"})};
  s25.plan.nodes = {Svc("S2", {}, {"X"}), Svc("S5", {}, {"X"})};
  s26.plan.nodes = {Svc("S2", {}, {"X"}), Svc("S6", {}, {"X"})};
  for (auto* p : {&one, &two, &s25, &s26}) p->score = 0.5;
  std::vector<ScoredPlan> a = {two, one};
  EXPECT_EQ(SelectBest(a).plan.NodeIds(), one.plan.NodeIds());
  std::vector<ScoredPlan> b = {s26, s25};
  EXPECT_EQ(SelectBest(b).plan.NodeIds(), s25.plan.NodeIds());
  s26.score = 0.5 + 1e-6;
  std::vector<ScoredPlan> c = {s25, s26};
  EXPECT_EQ(SelectBest(c).plan.NodeIds(), s26.plan.NodeIds());
  EXPECT_THROW(SelectBest(std::span<const ScoredPlan>{}), Error);
}

std::vector<CompositionPlan> RandomCandidates(std::mt19937_64& rng, Request& req) {
  for (;;) {
    auto cat = oracle::RandomCatalog(rng, 10, 6);
    req = Req({"c0"}, {"c" + std::to_string(1 + rng() % 5)});
    try {
      auto plans = matchmaker::GenerateCandidates(cat, req);
      for (auto& p : plans) p.aggregate = AggregateQos(p);
      if (plans.size() >= 2) return plans;
    } catch (const Error&) {
    }
  }
}

TEST(EvaluatorPropertyTest, AgreesWithOracleScores) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    Request req;
    auto plans = RandomCandidates(rng, req);
    QosWeights w;
    for (auto& x : w) x = static_cast<double>(rng() % 5);
    if (w == QosWeights{}) w[0] = 1;
    std::vector<QoSVector> expected_q;
    for (const auto& p : plans) {
      expected_q.push_back(oracle::Aggregate(p.nodes, req.provided));
      EXPECT_NEAR(p.aggregate.response_time_ms, expected_q.back().response_time_ms, 1e-12);
      EXPECT_NEAR(p.aggregate.availability, expected_q.back().availability, 1e-12);
    }
    auto expected = oracle::Scores(expected_q, w);
    auto scored = ScoreCandidates(plans, NormalizeWeights(w), {});
    ASSERT_EQ(scored.size(), plans.size());
    for (std::size_t i = 0; i < plans.size(); ++i) {
      EXPECT_NEAR(scored[i].score, expected[i], 1e-9);
      EXPECT_GE(scored[i].score, 0.0);
      EXPECT_LE(scored[i].score, 1.0);
    }
  }
}

TEST(EvaluatorPropertyTest, AffineTransformLeavesScoresUnchanged) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    std::vector<QoSVector> qs;
    for (std::size_t i = 0; i < n; ++i) {
      qs.push_back({double(rng() % 100), double(rng() % 20), (rng() % 100) / 100.0,
                    (rng() % 100) / 100.0, double(1 + rng() % 300)});
    }
    QosWeights w = {0.1, 0.3, 0.2, 0.25, 0.15};
    auto base = ScoreAggregates(qs, w);
    const double alpha = 0.5 + static_cast<double>(rng() % 8);
    const double beta = static_cast<double>(rng() % 50);
    auto moved = qs;
    const int a = static_cast<int>(rng() % 5);
    for (auto& q : moved) {
      double* f[] = {&q.response_time_ms, &q.cost, &q.availability, &q.reliability,
                     &q.throughput_rps};
      *f[a] = alpha * *f[a] + beta;
    }
    auto after = ScoreAggregates(moved, w);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(base[i].second, after[i].second, 1e-9);
    // With a zero weight, scrambling that attribute changes nothing.
    QosWeights zero = w;
    zero[a] = 0;
    zero = NormalizeWeights(zero);
    auto z1 = ScoreAggregates(qs, zero);
    for (auto& q : moved) {
      double* f[] = {&q.response_time_ms, &q.cost, &q.availability, &q.reliability,
                     &q.throughput_rps};
      *f[a] = static_cast<double>(rng() % 1000);
    }
    auto z2 = ScoreAggregates(moved, zero);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(z1[i].second, z2[i].second, 1e-12);
  }
}

TEST(EvaluatorPropertyTest, ConservationAndFilterCommutation) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Request req;
    auto plans = RandomCandidates(rng, req);
    for (const auto& p : plans) {
      double min_a = 1, max_rt = 0, min_thr = 1e18;
      for (const auto& s : p.nodes) {
        min_a = std::min(min_a, s.qos.availability);
        max_rt = std::max(max_rt, s.qos.response_time_ms);
        min_thr = std::min(min_thr, s.qos.throughput_rps);
      }
      EXPECT_LE(p.aggregate.availability, min_a);
      EXPECT_GE(p.aggregate.response_time_ms, max_rt);
      EXPECT_EQ(p.aggregate.throughput_rps, min_thr);
    }
    // Break some plans both ways, then filter in either order.
    auto mixed = plans;
    for (auto& p : mixed) {
      if (rng() % 3 == 0) p.nodes[0].functionality.category = "other/x";
      if (rng() % 3 == 0) p.nodes.back().inputs.push_back("zz");
    }
    req.category_requirement = "test";
    auto ab = FilterFunctionality(FilterInterface(mixed, req), req);
    auto ba = FilterInterface(FilterFunctionality(mixed, req), req);
    EXPECT_EQ(ab, ba);
  }
}

TEST(SelectBestPropertyTest, MatchesOracleOptimum) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    auto cat = oracle::RandomCatalog(rng, 10, 6);
    const Request req = Req({"c0"}, {"c" + std::to_string(1 + rng() % 5)});
    std::array<double, 5> w;
    for (auto& x : w) x = static_cast<double>(rng() % 4);
    if (w == std::array<double, 5>{}) w[2] = 1;
    auto expected = oracle::BestPlan(cat, req.provided, req.desired, w);
    if (!expected) continue;
    auto scored = ScoreCandidates(Candidates(cat, req), NormalizeWeights(w), {});
    const auto best = SelectBest(scored);
    EXPECT_EQ(best.plan.NodeIds(), expected->ids);
    EXPECT_NEAR(best.score, expected->score, 1e-9);
  }
}

}  // namespace
}  // namespace compositor::evaluator
