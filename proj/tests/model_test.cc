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

#include "compositor/model.h"

namespace compositor {
namespace {

ServiceDescription S1() { return Cat1()[0]; }

TEST(ValidateServiceTest, Cat1EntriesAreValid) {
  for (const auto& s : Cat1()) EXPECT_TRUE(ValidateService(s).ok()) << s.id;
}

TEST(ValidateServiceTest, ZeroAvailabilityIsRejected) {
  auto s = S1();
  s.qos.availability = 0.0;
  auto report = ValidateService(s);
  ASSERT_FALSE(report.ok());
  EXPECT_TRUE(report.Has("availability ∉ (0,1]"));
  EXPECT_EQ(report.violations[0].field, "/qos/availability");
}

TEST(ValidateServiceTest, EmptyOutputsAreRejected) {
  auto s = S1();
  s.outputs.clear();
  EXPECT_TRUE(ValidateService(s).Has("outputs non-empty"));
}

TEST(ValidateServiceTest, OtherBoundsAndNames) {
  auto s = S1();
  s.qos.reliability = 1.5;
  s.qos.response_time_ms = -1;
  s.qos.cost = -0.1;
  s.qos.throughput_rps = 0;
  s.inputs = {"has space"};
  auto report = ValidateService(s);
  EXPECT_TRUE(report.Has("reliability ∉ (0,1]"));
  EXPECT_TRUE(report.Has("response_time_ms ∉ [0,∞)"));
  EXPECT_TRUE(report.Has("cost ∉ [0,∞)"));
  EXPECT_TRUE(report.Has("throughput_rps ∉ (0,∞)"));
  EXPECT_TRUE(report.Has("invalid concept name"));
}

TEST(ValidateServiceTest, ReservedIdsAndBadCategory) {
  auto s = S1();
  s.id = "SOURCE";
  s.functionality.category = "a//b";
  auto report = ValidateService(s);
  EXPECT_TRUE(report.Has("id is reserved"));
  EXPECT_TRUE(report.Has("category segments non-empty"));
}

TEST(CanonicalizeTest, SortsConceptSets) {
  auto s = S1();
  s.inputs = {"B", "A"};
  EXPECT_EQ(Canonicalize(s).inputs, (ConceptSet{"A", "B"}));
}

TEST(CanonicalizeTest, IsIdempotent) {
  auto s = S1();
  EXPECT_EQ(Canonicalize(s), s);
  EXPECT_EQ(Canonicalize(Canonicalize(s)), Canonicalize(s));
}

TEST(CanonicalizeTest, SetOrderDoesNotChangeBytes) {
  auto a = S1();
  auto b = S1();
  a.inputs = {"X", "A", "M"};
  b.inputs = {"M", "X", "A"};
  EXPECT_EQ(SerializeService(Canonicalize(a)), SerializeService(Canonicalize(b)));
}

TEST(CanonicalizeTest, InvalidInputThrowsValidation) {
  auto s = S1();
  s.outputs.clear();
  try {
    Canonicalize(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
  }
}

TEST(SerializeTest, S1Document) {
  EXPECT_EQ(SerializeService(S1()),
            R"({"id":"S1","name":"Service 1","inputs":["A"],"outputs":["B"],)"
            R"("functionality":{"category":"demo/convert","attributes":{"price":10.0}},)"
            R"("qos":{"response_time_ms":10.0,"cost":1.0,"availability":0.99,)"
            R"("reliability":0.99,"throughput_rps":100.0},"endpoint":"sim://S1","version":1})");
  EXPECT_EQ(ParseService(SerializeService(S1())), S1());
}

TEST(SerializeTest, MissingIdIsParseErrorAtId) {
  Json doc = Json::parse(SerializeService(S1()));
  doc.erase("id");
  try {
    ParseService(doc.dump());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_EQ(e.detail()["path"], "/id");
  }
}

TEST(SerializeTest, AvailabilityOutOfRangeIsParseError) {
  Json doc = Json::parse(SerializeService(S1()));
  doc["qos"]["availability"] = 1.5;
  try {
    ParseService(doc.dump());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("availability ∉ (0,1]"), std::string::npos);
  }
}

TEST(SerializeTest, SyntaxErrorCarriesOffset) {
  try {
    ParseService("{\"id\": }");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_TRUE(e.detail().contains("offset"));
  }
}

TEST(SerializeTest, UnknownKeyIsRejected) {
  Json doc = Json::parse(SerializeService(S1()));
  doc["extra"] = 1;
  EXPECT_THROW(ParseService(doc.dump()), Error);
}

ServiceDescription RandomService(std::mt19937_64& rng, int i) {
  auto real = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto concept_name = [&]() { return "k" + std::to_string(rng() % 40); };
  ServiceDescription s;
  s.id = "svc-" + std::to_string(i);
  s.name = "random service \"" + std::to_string(rng()) + "\" ü";
  for (int k = 0, n = static_cast<int>(rng() % 4); k < n; ++k) s.inputs.push_back(concept_name());
  for (int k = 0, n = 1 + static_cast<int>(rng() % 3); k < n; ++k) {
    s.outputs.push_back(concept_name());
  }
  s.functionality.category = "cat/" + std::to_string(rng() % 5) + "/leaf";
  if (rng() % 2) s.functionality.attributes["price"] = real(0, 1000);
  if (rng() % 2) s.functionality.attributes["tier"] = std::string(rng() % 2 ? "gold" : "basic");
  s.qos.response_time_ms = real(0, 1e4);
  s.qos.cost = real(0, 100);
  s.qos.availability = real(1e-6, 1.0);
  s.qos.reliability = real(1e-6, 1.0);
  s.qos.throughput_rps = real(1e-3, 1e6);
  s.endpoint = "sim://" + s.id;
  s.version = rng() % 1000;
  return Canonicalize(s);
}

TEST(SerializePropertyTest, ThousandRandomRoundTrips) {
  std::mt19937_64 rng(20261015);
  for (int i = 0; i < 1000; ++i) {
    auto s = RandomService(rng, i);
    const std::string bytes = SerializeService(s);
    auto back = ParseService(bytes);
    ASSERT_EQ(back, s) << bytes;
    ASSERT_EQ(SerializeService(back), bytes);
  }
}

TEST(CacheEntryTest, FreshnessIsStrict) {
  CacheEntry e{S1(), 100, 60};
  EXPECT_TRUE(e.IsFresh(100));
  EXPECT_TRUE(e.IsFresh(159));
  EXPECT_FALSE(e.IsFresh(160));
  EXPECT_EQ(CacheEntryFromJson(CacheEntryToJson(e)), e);
}

TEST(ConceptTest, NamesAndCategories) {
  EXPECT_TRUE(IsValidConcept("a-b_c/D9"));
  EXPECT_FALSE(IsValidConcept(""));
  EXPECT_FALSE(IsValidConcept("a b"));
  EXPECT_TRUE(CategoryHasPrefix("travel/booking/flight", "travel/booking"));
  EXPECT_TRUE(CategoryHasPrefix("travel/booking", "travel/booking"));
  EXPECT_FALSE(CategoryHasPrefix("travel/bookings", "travel/booking"));
  EXPECT_FALSE(CategoryHasPrefix("finance/loan", "travel/booking"));
}

TEST(ConstraintTest, Comparisons) {
  Constraint le{"price", CompareOp::kLessEqual, 100.0};
  EXPECT_TRUE(le.SatisfiedBy(100.0));
  EXPECT_FALSE(le.SatisfiedBy(120.0));
  EXPECT_FALSE(le.SatisfiedBy(std::string("cheap")));
  Constraint eq{"tier", CompareOp::kEqual, std::string("gold")};
  EXPECT_TRUE(eq.SatisfiedBy(std::string("gold")));
  Constraint ne{"tier", CompareOp::kNotEqual, std::string("gold")};
  EXPECT_TRUE(ne.SatisfiedBy(std::string("basic")));
  EXPECT_FALSE((Constraint{"p", CompareOp::kGreaterEqual, std::string("x")}.IsWellFormed()));
}

TEST(WeightsTest, Normalization) {
  auto w = NormalizeWeights({2, 2, 0, 0, 0});
  EXPECT_DOUBLE_EQ(w[0], 0.5);
  EXPECT_THROW(NormalizeWeights({0, 0, 0, 0, 0}), Error);
  EXPECT_THROW(NormalizeWeights({-1, 2, 0, 0, 0}), Error);
}

TEST(RequestTest, EmptyDesiredIsInvalid) {
  Request r;
  r.provided = {"A"};
  EXPECT_TRUE(ValidateRequest(r).Has("desired non-empty"));
}

TEST(MetricsTest, MergeAddsCountersAndAppendsTrace) {
  Metrics a, b;
  a.wsdb_hits = 1;
  a.event_trace = {Stage::kTranslateIn};
  b.registry_fetches = 2;
  b.event_trace = {Stage::kMatchWsdb};
  a.Merge(b);
  EXPECT_EQ(a.wsdb_hits, 1u);
  EXPECT_EQ(a.registry_fetches, 2u);
  EXPECT_EQ(a.event_trace.size(), 2u);
  EXPECT_EQ(StageName(Stage::kMatchRegistry), "MATCH_REGISTRY");
}

}  // namespace
}  // namespace compositor
