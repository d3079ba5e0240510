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

// Domain types shared by every module: service descriptions, requests, cache
// entries and pipeline metrics, plus validation and the canonical JSON form.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "compositor/error.h"

namespace compositor {

// A concept is a flat, case-sensitive token. Two concepts match iff their
// names are byte-equal.
using Concept = std::string;

// Sorted and duplicate-free once canonicalized.
using ConceptSet = std::vector<Concept>;

// Simulated clock, integer seconds.
using SimTime = std::int64_t;

bool IsValidConcept(std::string_view name);
bool IsValidToken(std::string_view token);
bool IsValidCategoryPath(std::string_view path);

// Segment-wise prefix test: "travel/booking" is a prefix of
// "travel/booking/flight" but not of "travel/bookings".
bool CategoryHasPrefix(std::string_view category, std::string_view prefix);

// Sorts and removes duplicates.
ConceptSet NormalizeConcepts(ConceptSet concepts);
bool ConceptSetContains(const ConceptSet& sorted, std::string_view name);

enum class QosAttribute {
  kResponseTime,
  kCost,
  kAvailability,
  kReliability,
  kThroughput,
};

inline constexpr std::array<QosAttribute, 5> kQosAttributes = {
    QosAttribute::kResponseTime, QosAttribute::kCost,
    QosAttribute::kAvailability, QosAttribute::kReliability,
    QosAttribute::kThroughput};

// JSON key, e.g. "response_time_ms".
std::string_view QosAttributeName(QosAttribute attribute);
std::optional<QosAttribute> ParseQosAttribute(std::string_view name);
bool LowerIsBetter(QosAttribute attribute);

struct QoSVector {
  double response_time_ms = 0.0;
  double cost = 0.0;
  double availability = 1.0;
  double reliability = 1.0;
  double throughput_rps = 1.0;

  double Get(QosAttribute attribute) const;
  void Set(QosAttribute attribute, double value);

  bool operator==(const QoSVector&) const = default;
};

using AttributeValue = std::variant<double, std::string>;

enum class CompareOp { kLessEqual, kGreaterEqual, kEqual, kNotEqual };

std::string_view CompareOpSymbol(CompareOp op);
std::optional<CompareOp> ParseCompareOp(std::string_view symbol);

struct Constraint {
  std::string attribute;
  CompareOp op = CompareOp::kEqual;
  AttributeValue literal;

  // Ordering ops need a numeric literal; equality ops accept either kind.
  bool IsWellFormed() const;
  // False on a type mismatch between `value` and the literal.
  bool SatisfiedBy(const AttributeValue& value) const;

  bool operator==(const Constraint&) const = default;
};

struct FunctionalitySpec {
  std::string category;
  std::map<std::string, AttributeValue> attributes;

  bool operator==(const FunctionalitySpec&) const = default;
};

struct ServiceDescription {
  std::string id;
  std::string name;
  ConceptSet inputs;
  ConceptSet outputs;
  FunctionalitySpec functionality;
  QoSVector qos;
  std::string endpoint;
  std::uint64_t version = 1;

  bool operator==(const ServiceDescription&) const = default;
};

struct Violation {
  std::string field;  // JSON pointer into the canonical document
  std::string rule;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool Has(std::string_view rule) const;
  Json ToJson() const;
};

ValidationReport ValidateService(const ServiceDescription& desc);

// Sorts concept sets (dropping duplicates). Throws kValidation carrying the
// report when `desc` is invalid.
ServiceDescription Canonicalize(ServiceDescription desc);

// Canonical UTF-8 JSON: fixed key order, sorted arrays, no whitespace.
std::string SerializeService(const ServiceDescription& desc);
// Throws kParseError with "path" (and "offset" for syntax errors) in detail.
ServiceDescription ParseService(std::string_view bytes);

Json ServiceToJson(const ServiceDescription& desc);
ServiceDescription ServiceFromJson(const Json& doc, const std::string& path = "");

Json QosToJson(const QoSVector& qos);
QoSVector QosFromJson(const Json& doc, const std::string& path);

struct QosBounds {
  std::optional<double> max_response_time_ms;
  std::optional<double> max_cost;
  std::optional<double> min_availability;
  std::optional<double> min_reliability;
  std::optional<double> min_throughput_rps;

  bool Admits(const QoSVector& qos) const;
  bool empty() const;
  bool operator==(const QosBounds&) const = default;
};

using QosWeights = std::array<double, kQosAttributes.size()>;

inline constexpr QosWeights kEqualWeights = {0.2, 0.2, 0.2, 0.2, 0.2};

// Rescales to sum 1. Throws kValidation on negative entries or a zero sum.
QosWeights NormalizeWeights(QosWeights weights);

struct Request {
  std::optional<std::string> correlation_id;
  ConceptSet provided;
  ConceptSet desired;
  std::optional<std::string> category_requirement;
  std::vector<Constraint> constraints;
  QosWeights weights = kEqualWeights;  // normalized
  QosBounds bounds;

  bool operator==(const Request&) const = default;
};

ValidationReport ValidateRequest(const Request& request);

// All present criteria must hold. Registry finds require at least one.
struct FindQuery {
  std::optional<Concept> output_concept;
  std::optional<std::string> category_prefix;
  std::optional<std::string> id;

  bool empty() const;
  bool Matches(const ServiceDescription& desc) const;
  Json ToJson() const;
  static FindQuery FromJson(const Json& doc);

  bool operator==(const FindQuery&) const = default;
};

// A WSDB record. FRESH at t iff t < fetched_at + ttl_s.
struct CacheEntry {
  ServiceDescription service;
  SimTime fetched_at = 0;
  std::int64_t ttl_s = 1;

  bool IsFresh(SimTime now) const { return now < fetched_at + ttl_s; }

  bool operator==(const CacheEntry&) const = default;
};

Json CacheEntryToJson(const CacheEntry& entry);
CacheEntry CacheEntryFromJson(const Json& doc);

enum class Stage {
  kTranslateIn,
  kMatchWsdb,
  kMatchRegistry,
  kEvaluateInterface,
  kEvaluateFunctionality,
  kCompose,
  kExecute,
  kTranslateOut,
};

std::string_view StageName(Stage stage);

struct Metrics {
  std::uint64_t wsdb_hits = 0;
  std::uint64_t registry_fetches = 0;
  double composition_time_ms = 0.0;
  double exposure_time_ms = 0.0;
  std::vector<Stage> event_trace;

  void Merge(const Metrics& delta);
};

// The four-service fixture catalog used throughout tests and the CLI default.
std::vector<ServiceDescription> Cat1();

}  // namespace compositor
