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
#include <set>

#include <gtest/gtest.h>

#include "compositor/matchmaker.h"
#include "oracle.h"

namespace compositor::matchmaker {
namespace {

Request Req(ConceptSet provided, ConceptSet desired) {
  Request r;
  r.provided = NormalizeConcepts(std::move(provided));
  r.desired = NormalizeConcepts(std::move(desired));
  return r;
}

std::set<std::vector<std::string>> IdSets(const std::vector<CompositionPlan>& plans) {
  std::set<std::vector<std::string>> out;
  for (const auto& p : plans) out.insert(p.NodeIds());
  return out;
}

TEST(GenerateCandidatesTest, Cat1TwoCandidates) {
  const auto cat = Cat1();
  auto plans = GenerateCandidates(cat, Req({"A"}, {"C"}));
  ASSERT_EQ(plans.size(), 2u);
  EXPECT_EQ(plans[0].NodeIds(), (std::vector<std::string>{"S3"}));
  EXPECT_EQ(plans[1].NodeIds(), (std::vector<std::string>{"S1", "S2"}));
  EXPECT_EQ(plans[1].layers, (Layers{{"S1"}, {"S2"}}));
}

TEST(GenerateCandidatesTest, AlreadySatisfiedGivesEmptyPlan) {
  const auto cat = Cat1();
  auto plans = GenerateCandidates(cat, Req({"A", "C"}, {"C"}));
  ASSERT_EQ(plans.size(), 1u);
  EXPECT_TRUE(plans[0].nodes.empty());
}

TEST(GenerateCandidatesTest, UnreachableConceptReported) {
  const auto cat = Cat1();
  try {
    GenerateCandidates(cat, Req({"A"}, {"Z"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoComposition);
    EXPECT_EQ(e.detail()["unreachable"], Json::parse(R"(["Z"])"));
  }
}

TEST(GenerateCandidatesTest, EmptyCatalog) {
  std::vector<ServiceDescription> none;
  EXPECT_THROW(GenerateCandidates(none, Req({"A"}, {"C"})), Error);
}

TEST(IsMinimalTest, Cat1) {
  const auto cat = Cat1();
  std::vector<ServiceDescription> s1s2 = {cat[0], cat[1]};
  std::vector<ServiceDescription> all3 = {cat[0], cat[1], cat[2]};
  EXPECT_TRUE(IsMinimal(s1s2, {"A"}, {"C"}));
  EXPECT_FALSE(IsMinimal(all3, {"A"}, {"C"}));
}

TEST(ForwardClosureTest, Cat1) {
  const auto cat = Cat1();
  EXPECT_EQ(ForwardClosure(cat, {"A"}), (ConceptSet{"A", "B", "C", "D"}));
  EXPECT_EQ(ForwardClosure(cat, {"B"}), (ConceptSet{"B", "C"}));
}

// Random small catalogs: the engine's candidates are exactly the minimal
// valid node sets found by subset enumeration.
TEST(GenerateCandidatesPropertyTest, AgreesWithSubsetOracle) {
  std::mt19937_64 rng(20260101);
  int solvable = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t concepts = 4 + rng() % 5;
    auto cat = oracle::RandomCatalog(rng, 10, concepts);
    ConceptSet provided = {"c" + std::to_string(rng() % concepts)};
    ConceptSet desired = {"c" + std::to_string(rng() % concepts)};
    if (rng() % 3 == 0) desired.push_back("c" + std::to_string(rng() % concepts));
    const Request req = Req(provided, desired);
    auto expected = oracle::MinimalPlans(cat, req.provided, req.desired);
    std::set<std::vector<std::string>> got;
    try {
      auto plans = GenerateCandidates(cat, req);
      got = IdSets(plans);
      for (const auto& p : plans) {
        EXPECT_TRUE(CheckPlan(p, req.provided, req.desired).ok());
        EXPECT_TRUE(IsMinimal(p.nodes, req.provided, req.desired));
      }
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kNoComposition);
    }
    EXPECT_EQ(got, expected) << "trial " << trial;
    solvable += !expected.empty();
  }
  EXPECT_GT(solvable, 100);
}

TEST(ForwardClosurePropertyTest, Monotone) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    auto cat = oracle::RandomCatalog(rng, 12, 8);
    ConceptSet small = NormalizeConcepts({"c" + std::to_string(rng() % 8)});
    ConceptSet big = small;
    big.push_back("c" + std::to_string(rng() % 8));
    big = NormalizeConcepts(big);
    auto a = ForwardClosure(cat, small);
    auto b = ForwardClosure(cat, big);
    EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    EXPECT_TRUE(std::includes(a.begin(), a.end(), small.begin(), small.end()));
    // Solvable iff desired lies in the closure.
    const ConceptSet desired = {"c" + std::to_string(rng() % 8)};
    const bool reachable = ConceptSetContains(a, desired[0]);
    EXPECT_EQ(reachable, oracle::AnyValid(cat, small, desired));
  }
}

TEST(BoundedSearchTest, LargeChainStaysWithinLimits) {
  std::vector<ServiceDescription> cat;
  for (int i = 0; i < 40; ++i) {
    ServiceDescription s = Cat1()[0];
    s.id = "L" + std::to_string(100 + i);
    s.inputs = {"k" + std::to_string(i)};
    s.outputs = {"k" + std::to_string(i + 1)};
    cat.push_back(s);
  }
  SearchLimits limits;
  limits.max_depth = 4;
  limits.max_services = 6;
  auto near = GenerateCandidates(cat, Req({"k0"}, {"k3"}), limits);
  ASSERT_EQ(near.size(), 1u);
  EXPECT_EQ(near[0].nodes.size(), 3u);
  EXPECT_THROW(GenerateCandidates(cat, Req({"k0"}, {"k30"}), limits), Error);
}

TEST(ValidateLimitsTest, RejectsNonPositive) {
  SearchLimits l;
  l.max_depth = 0;
  EXPECT_THROW(ValidateLimits(l), Error);
  l = {};
  l.branch_width = 0;
  EXPECT_THROW(ValidateLimits(l), Error);
  EXPECT_NO_THROW(ValidateLimits(SearchLimits{}));
}

class LookupTest : public ::testing::Test {
 protected:
  void SetUp() override {
    registry_ = std::make_shared<registry::Registry>("R1");
    for (const auto& s : Cat1()) registry_->Register(s);
    registries_ = {registry_};
  }

  LookupResult Run(SimTime now, Metrics& m) {
    return Lookup(Req({"A"}, {"C"}), replicas_, registries_, now, options_, m);
  }

  std::shared_ptr<registry::Registry> registry_;
  std::vector<std::shared_ptr<registry::RegistryClient>> registries_;
  wsdb::ReplicaSet replicas_ = wsdb::ReplicaSet::WithCount(3);
  LookupOptions options_;
};

TEST_F(LookupTest, ColdStartFetchesAndStampsEntries) {
  Metrics m;
  auto r = Run(100, m);
  EXPECT_EQ(r.candidates.source, Source::kRegistry);
  EXPECT_EQ(m.registry_fetches, 1u);
  EXPECT_EQ(m.wsdb_hits, 0u);
  EXPECT_EQ(m.event_trace, (std::vector<Stage>{Stage::kMatchWsdb, Stage::kMatchRegistry}));
  EXPECT_EQ(IdSets(r.candidates.plans),
            (std::set<std::vector<std::string>>{{"S3"}, {"S1", "S2"}}));
  for (std::size_t i = 0; i < 3; ++i) {
    auto e = replicas_.replica(i).Entry("S1");
    ASSERT_TRUE(e);
    EXPECT_EQ(e->fetched_at, 100);
    EXPECT_EQ(e->ttl_s, options_.wsdb_ttl_s);
  }
}

TEST_F(LookupTest, WarmHitSkipsRegistry) {
  Metrics cold, warm;
  Run(100, cold);
  registry_->SetUp(false);
  auto r = Run(110, warm);
  EXPECT_EQ(r.candidates.source, Source::kWsdb);
  EXPECT_EQ(warm.wsdb_hits, 1u);
  EXPECT_EQ(warm.registry_fetches, 0u);
  EXPECT_EQ(warm.event_trace, (std::vector<Stage>{Stage::kMatchWsdb}));
  EXPECT_EQ(r.replica_used, 0u);
}

TEST_F(LookupTest, TtlBoundary) {
  options_.wsdb_ttl_s = 60;
  Metrics cold;
  Run(100, cold);
  Metrics at159, at160;
  Run(159, at159);
  EXPECT_EQ(at159.registry_fetches, 0u);
  Run(160, at160);
  EXPECT_EQ(at160.registry_fetches, 1u);
  EXPECT_EQ(replicas_.replica(0).Entry("S1")->fetched_at, 160);
}

TEST_F(LookupTest, StaleCacheWithRegistryDown) {
  options_.wsdb_ttl_s = 10;
  Metrics cold, later;
  Run(0, cold);
  registry_->SetUp(false);
  try {
    Run(50, later);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRegistryUnreachable);
  }
}

TEST_F(LookupTest, AllReplicasDownFallsBackToRegistry) {
  for (std::size_t i = 0; i < 3; ++i) replicas_.replica(i).SetHealth(wsdb::Health::kDown);
  Metrics m;
  auto r = Run(5, m);
  EXPECT_EQ(r.candidates.source, Source::kRegistry);
  EXPECT_EQ(m.event_trace, (std::vector<Stage>{Stage::kMatchWsdb, Stage::kMatchRegistry}));
  EXPECT_EQ(r.candidates.plans.size(), 2u);
}

TEST_F(LookupTest, PartialCacheIsCompletedFromRegistry) {
  // Only S1 cached: A->B is known but C is not, so the registry is asked.
  std::vector<CacheEntry> partial = {{Cat1()[0], 0, 300}};
  replicas_.WriteAll(partial, 0);
  Metrics m;
  auto r = Run(1, m);
  EXPECT_EQ(r.candidates.source, Source::kRegistry);
  EXPECT_EQ(m.registry_fetches, 1u);
  EXPECT_EQ(r.candidates.plans.size(), 2u);
}

}  // namespace
}  // namespace compositor::matchmaker
