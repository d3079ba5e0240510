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

// Simulated dataflow execution of a composed plan, the latency model, fault
// handling and the two benchmark harnesses.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "compositor/model.h"
#include "compositor/plan.h"

namespace compositor::execution {

using Value = std::variant<std::int64_t, std::string>;
using ValueMap = std::map<Concept, Value>;

// Must return a value for every output concept of the service.
using Behavior = std::function<ValueMap(const ServiceDescription&, const ValueMap&)>;

std::string ValueToString(const Value& value);
Json ValueToJson(const Value& value);
Value ValueFromJson(const Json& doc);

// Each output o of service s becomes the string "s.o(v1,v2,...)" over the
// input values in concept order.
ValueMap TagBehavior(const ServiceDescription& service, const ValueMap& inputs);

struct SimEnv {
  std::map<std::string, Behavior> behaviors;  // TagBehavior when absent
  std::map<std::string, double> processing_time_ms;  // qos rt when absent
  double edge_cost_ms = 5.0;
  double coordinator_overhead_ms = 0.0;
  std::set<std::string> faults;
  // Node id -> simulated ms after which the node is down. A node that
  // would start at or after that time fails the run.
  std::map<std::string, double> scheduled_faults;

  double ProcessingTime(const ServiceDescription& service) const;
  ValueMap Invoke(const ServiceDescription& service, const ValueMap& inputs) const;
};

enum class Mode { kCentralized, kDecentralized };

std::string_view ModeName(Mode mode);
// Accepts "centralized" / "decentralized". Throws kUsage.
Mode ParseMode(std::string_view name);

struct NodeTiming {
  std::string node;
  double start_ms = 0.0;
  double finish_ms = 0.0;
};

struct LatencyReport {
  double latency_ms = 0.0;
  std::vector<NodeTiming> schedule;  // plan layer order
  // Node ids along one binding chain, first to last.
  std::vector<std::string> critical_path;
  // Some binding chain crosses a node-to-node data edge.
  bool critical_path_has_transfer = false;
};

// Layer-synchronous schedule: a node starts once the previous layer has
// finished and each of its inputs has arrived. Arrival adds one hop for a
// SOURCE input (ingress) and one transfer for a node-to-node edge:
// edge_cost in DECENTRALIZED mode, 2 * edge_cost + overhead in CENTRALIZED
// mode. The run ends one hop (egress) after the last layer.
LatencyReport SimulateLatency(const CompositionPlan& plan, const SimEnv& env, Mode mode);

struct ExecutionResult {
  ValueMap outputs;
  double latency_ms = 0.0;
  Mode mode = Mode::kDecentralized;
  std::vector<NodeTiming> trace;  // completion order
};

// Throws kServiceDown (a node is in env.faults, or hits a scheduled fault)
// and kMissingInput (a SOURCE concept has no value in `inputs`).
ExecutionResult ExecutePlan(const CompositionPlan& plan, const ValueMap& inputs,
                            const SimEnv& env, Mode mode);

// First of {plan} ∪ fallback whose nodes are all up. Throws kNoHealthyPlan.
CompositionPlan PlanHealthCheck(const CompositionPlan& plan, const SimEnv& env,
                                std::span<const CompositionPlan> fallback);

struct BenchInstance {
  std::vector<ServiceDescription> catalog;
  Request request;
};

// Seeded layered catalog of `size` services with a reachable goal. Throws
// kValidation for size 0, kNoComposition if no solvable instance turns up
// within the retry budget.
BenchInstance GenerateBenchInstance(std::size_t size, std::uint64_t seed);

struct BenchRow {
  std::size_t size = 0;
  double elapsed_ms = 0.0;
};

// Wall time of lookup -> evaluate -> compose per catalog size.
std::vector<BenchRow> BenchComposition(std::span<const std::size_t> sizes,
                                       std::uint64_t seed);
// Wall time of registering `count` synthetic services into a fresh registry.
std::vector<BenchRow> BenchExposure(std::span<const std::size_t> counts);

std::string CompositionCsv(std::span<const BenchRow> rows);
std::string ExposureCsv(std::span<const BenchRow> rows);

}  // namespace compositor::execution
