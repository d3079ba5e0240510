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

#include <atomic>
#include <cstdio>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "compositor/registry.h"

namespace compositor::registry {
namespace {

ServiceDescription Svc(const std::string& id, std::uint64_t version = 1,
                       ConceptSet outputs = {"B"}) {
  ServiceDescription s = Cat1()[0];
  s.id = id;
  s.version = version;
  s.outputs = std::move(outputs);
  return s;
}

RegistryState Empty(const std::string& id) {
  RegistryState s;
  s.registry_id = id;
  return s;
}

std::vector<std::string> Ids(const std::vector<ServiceDescription>& list) {
  std::vector<std::string> out;
  for (const auto& s : list) out.push_back(s.id);
  return out;
}

std::map<std::string, ServiceDescription> Services(const RegistryState& s) {
  std::map<std::string, ServiceDescription> out;
  for (const auto& [id, e] : s.catalog) out[id] = e.service;
  return out;
}

TEST(RegisterTest, InsertIntoEmpty) {
  auto s = RegisterService(Empty("R1"), Svc("S1"));
  ASSERT_EQ(s.catalog.size(), 1u);
  EXPECT_EQ(s.catalog.at("S1").service, Svc("S1"));
}

TEST(RegisterTest, HigherVersionReplaces) {
  auto s = RegisterService(RegisterService(Empty("R1"), Svc("S1", 1)), Svc("S1", 2));
  EXPECT_EQ(s.catalog.at("S1").service.version, 2u);
}

TEST(RegisterTest, LowerOrEqualVersionConflicts) {
  auto s = RegisterService(Empty("R1"), Svc("S1", 2));
  for (std::uint64_t v : {1u, 2u}) {
    try {
      RegisterService(s, Svc("S1", v));
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kVersionConflict);
    }
  }
}

TEST(RegisterTest, InvalidServiceIsValidationError) {
  auto bad = Svc("S1");
  bad.outputs.clear();
  try {
    RegisterService(Empty("R1"), bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
  }
}

TEST(DeregisterTest, Cases) {
  auto s = RegisterService(Empty("R1"), Svc("S1"));
  EXPECT_TRUE(DeregisterService(s, "S1").catalog.empty());
  try {
    DeregisterService(s, "Sx");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
  auto two = RegisterService(s, Svc("S2"));
  auto left = DeregisterService(two, "S1");
  ASSERT_EQ(left.catalog.size(), 1u);
  EXPECT_TRUE(left.catalog.count("S2"));
}

RegistryState Cat1State() {
  RegistryState s = Empty("R1");
  for (const auto& svc : Cat1()) s = RegisterService(s, svc);
  return s;
}

TEST(FindTest, ByOutputConcept) {
  FindQuery q;
  q.output_concept = "C";
  EXPECT_EQ(Ids(FindServices(Cat1State(), q)), (std::vector<std::string>{"S2", "S3"}));
  q.output_concept = "Z";
  EXPECT_TRUE(FindServices(Cat1State(), q).empty());
}

TEST(FindTest, CategoryPrefixIsSegmentWise) {
  auto flight = Svc("F");
  flight.functionality.category = "travel/booking/flight";
  auto loan = Svc("L");
  loan.functionality.category = "finance/loan";
  auto s = RegisterService(RegisterService(Empty("R1"), flight), loan);
  FindQuery q;
  q.category_prefix = "travel/booking";
  EXPECT_EQ(Ids(FindServices(s, q)), (std::vector<std::string>{"F"}));
}

TEST(FindTest, ConjunctiveAndById) {
  FindQuery q;
  q.output_concept = "C";
  q.id = "S3";
  EXPECT_EQ(Ids(FindServices(Cat1State(), q)), (std::vector<std::string>{"S3"}));
  q.output_concept = "B";
  EXPECT_TRUE(FindServices(Cat1State(), q).empty());
  EXPECT_THROW(FindServices(Cat1State(), FindQuery{}), Error);
}

TEST(FindTest, IsPure) {
  FindQuery q;
  q.category_prefix = "demo";
  auto state = Cat1State();
  EXPECT_EQ(FindServices(state, q), FindServices(state, q));
}

TEST(SyncMergeTest, DisjointUnion) {
  auto a = RegisterService(Empty("R1"), Svc("S1"));
  auto b = RegisterService(Empty("R2"), Svc("S2"));
  auto [a2, b2] = SyncMerge(a, b);
  EXPECT_EQ(Services(a2), Services(b2));
  EXPECT_EQ(a2.catalog.size(), 2u);
  EXPECT_EQ(a2.registry_id, "R1");
  EXPECT_EQ(b2.registry_id, "R2");
}

TEST(SyncMergeTest, LatestVersionWins) {
  auto a = RegisterService(Empty("R1"), Svc("S1", 2));
  auto b = RegisterService(Empty("R2"), Svc("S1", 1));
  auto [a2, b2] = SyncMerge(a, b);
  EXPECT_EQ(a2.catalog.at("S1").service.version, 2u);
  EXPECT_EQ(b2.catalog.at("S1").service.version, 2u);
}

TEST(SyncMergeTest, IdempotentAndOrderIndependent) {
  auto a = RegisterService(Empty("R1"), Svc("S1", 1, {"X"}));
  auto b = RegisterService(Empty("R2"), Svc("S1", 1, {"Y"}));
  auto [a2, b2] = SyncMerge(a, b);
  auto [a3, b3] = SyncMerge(a2, b2);
  EXPECT_EQ(a2, a3);
  EXPECT_EQ(b2, b3);
  auto [b4, a4] = SyncMerge(b, a);
  EXPECT_EQ(Services(a4), Services(a2));
  // Equal versions: the lexicographically smaller registry id wins.
  EXPECT_EQ(a2.catalog.at("S1").service.outputs, (ConceptSet{"X"}));
}

// Random catalogs over a shared id space, random connected topology.
TEST(SyncPropertyTest, OneRoundConvergesOnConnectedTopologies) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 5;
    std::vector<RegistryState> states;
    for (std::size_t i = 0; i < n; ++i) {
      RegistryState s = Empty("R" + std::to_string(i));
      for (int k = 0, m = static_cast<int>(rng() % 6); k < m; ++k) {
        auto svc = Svc("S" + std::to_string(rng() % 8), 1 + rng() % 3,
                       {"o" + std::to_string(rng() % 4)});
        try {
          s = RegisterService(s, svc);
        } catch (const Error&) {
        }
      }
      states.push_back(s);
    }
    // Random spanning tree plus extra edges.
    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (std::size_t v = 1; v < n; ++v) links.push_back({rng() % v, v});
    for (int extra = static_cast<int>(rng() % 3); extra > 0; --extra) {
      links.push_back({rng() % n, rng() % n});
    }
    // The expected union, computed independently.
    std::map<std::string, CatalogEntry> expected;
    for (const auto& s : states) {
      for (const auto& [id, e] : s.catalog) {
        auto it = expected.find(id);
        if (it == expected.end() || e.service.version > it->second.service.version ||
            (e.service.version == it->second.service.version && e.origin < it->second.origin)) {
          expected[id] = e;
        }
      }
    }
    SyncRound(states, links);
    for (const auto& s : states) ASSERT_EQ(s.catalog, expected) << "trial " << trial;
  }
}

TEST(SyncPropertyTest, DisconnectedTopologyIsRejected) {
  std::vector<RegistryState> states = {Empty("R1"), Empty("R2"), Empty("R3")};
  EXPECT_THROW(SyncRound(states, {{0, 1}}), Error);
}

TEST(RegistryTest, FindAfterRegisterAck) {
  Registry r("R1");
  r.Register(Svc("S1"));
  FindQuery q;
  q.id = "S1";
  EXPECT_EQ(r.Find(q).size(), 1u);
}

TEST(RegistryTest, DownRegistryIsUnreachable) {
  Registry r("R1");
  r.SetUp(false);
  try {
    r.Register(Svc("S1"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRegistryUnreachable);
  }
}

TEST(RegistryTest, ConcurrentFindsSeeWholeSnapshots) {
  Registry r("R1");
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::thread reader([&] {
    FindQuery q;
    q.output_concept = "B";
    while (!done.load()) {
      auto found = r.Find(q);
      // Services are registered in id order, so a snapshot is a prefix.
      for (std::size_t i = 0; i < found.size(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "S%04zu", i);
        if (found[i].id != buf) ++bad;
      }
    }
  });
  for (int i = 0; i < 300; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "S%04d", i);
    r.Register(Svc(buf));
  }
  done.store(true);
  reader.join();
  EXPECT_EQ(bad.load(), 0);
}

TEST(FederationTest, ServiceReachesPeerAfterOneInterval) {
  auto a = std::make_shared<Registry>("A");
  auto b = std::make_shared<Registry>("B");
  Federation fed({a, b}, 60);
  a->Register(Svc("S1"));
  FindQuery q;
  q.id = "S1";
  EXPECT_EQ(fed.Tick(59), 0u);
  EXPECT_TRUE(b->Find(q).empty());
  EXPECT_EQ(fed.Tick(60), 2u);
  EXPECT_EQ(b->Find(q).size(), 1u);
}

TEST(FederationTest, DeletionsDoNotPropagate) {
  auto a = std::make_shared<Registry>("A");
  auto b = std::make_shared<Registry>("B");
  Federation fed({a, b}, 60);
  a->Register(Svc("S1"));
  fed.SyncNow(1);
  a->Deregister("S1");
  fed.SyncNow(2);
  FindQuery q;
  q.id = "S1";
  EXPECT_EQ(b->Find(q).size(), 1u);
  EXPECT_EQ(a->Find(q).size(), 1u);  // pulled back from B
}

TEST(StateCodecTest, RoundTrip) {
  auto s = Cat1State();
  s.last_sync_at = 42;
  EXPECT_EQ(StateFromJson(StateToJson(s)), s);
}

}  // namespace
}  // namespace compositor::registry
