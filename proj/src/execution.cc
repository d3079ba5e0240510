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

#include "compositor/execution.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <utility>

#include "compositor/composer.h"
#include "compositor/evaluator.h"
#include "compositor/matchmaker.h"
#include "compositor/registry.h"
#include "compositor/wsdb.h"
#include "json_util.h"

namespace compositor::execution {

namespace {

constexpr double kTimeEpsilon = 1e-9;

bool SameTime(double a, double b) { return std::abs(a - b) <= kTimeEpsilon; }

}  // namespace

std::string ValueToString(const Value& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  return std::get<std::string>(value);
}

Json ValueToJson(const Value& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return *i;
  return std::get<std::string>(value);
}

Value ValueFromJson(const Json& doc) {
  if (doc.is_number_integer()) return doc.get<std::int64_t>();
  if (doc.is_string()) return doc.get<std::string>();
  json_util::Fail("", "input values must be integers or strings");
}

ValueMap TagBehavior(const ServiceDescription& service, const ValueMap& inputs) {
  std::string args;
  for (const auto& in : service.inputs) {
    if (!args.empty()) args += ",";
    auto it = inputs.find(in);
    if (it != inputs.end()) args += ValueToString(it->second);
  }
  ValueMap out;
  for (const auto& o : service.outputs) out[o] = service.id + "." + o + "(" + args + ")";
  return out;
}

double SimEnv::ProcessingTime(const ServiceDescription& service) const {
  auto it = processing_time_ms.find(service.id);
  return it == processing_time_ms.end() ? service.qos.response_time_ms : it->second;
}

ValueMap SimEnv::Invoke(const ServiceDescription& service, const ValueMap& inputs) const {
  auto it = behaviors.find(service.id);
  ValueMap out = it == behaviors.end() ? TagBehavior(service, inputs)
                                       : it->second(service, inputs);
  for (const auto& o : service.outputs) {
    if (!out.count(o)) {
      throw Error(ErrorCode::kValidation,
                  "behavior of " + service.id + " did not produce " + o);
    }
  }
  return out;
}

std::string_view ModeName(Mode mode) {
  return mode == Mode::kCentralized ? "centralized" : "decentralized";
}

Mode ParseMode(std::string_view name) {
  if (name == "centralized") return Mode::kCentralized;
  if (name == "decentralized") return Mode::kDecentralized;
  throw Error(ErrorCode::kUsage, "mode must be centralized or decentralized",
              Json{{"mode", std::string(name)}});
}

LatencyReport SimulateLatency(const CompositionPlan& plan, const SimEnv& env, Mode mode) {
  const double hop = env.edge_cost_ms;
  const double transfer = mode == Mode::kDecentralized
                              ? env.edge_cost_ms
                              : 2.0 * env.edge_cost_ms + env.coordinator_overhead_ms;

  struct Incoming {
    bool from_source = false;
    std::vector<std::string> producers;
  };
  std::map<std::string, Incoming> incoming;
  for (const auto& e : plan.edges) {
    if (e.consumer == kSink) continue;
    if (e.producer == kSource) {
      incoming[e.consumer].from_source = true;
    } else {
      incoming[e.consumer].producers.push_back(e.producer);
    }
  }

  LatencyReport report;
  std::map<std::string, NodeTiming> timing;
  std::map<std::string, bool> has_transfer;
  std::map<std::string, std::string> predecessor;
  std::vector<std::string> prev_layer;
  double barrier = 0.0;

  for (const auto& layer : plan.layers) {
    double layer_end = barrier;
    for (const auto& id : layer) {
      const ServiceDescription* node = plan.FindNode(id);
      if (!node) continue;
      const Incoming& in = incoming[id];
      double start = barrier;
      if (in.from_source || in.producers.empty()) start = std::max(start, hop);
      for (const auto& p : in.producers) {
        start = std::max(start, timing.at(p).finish_ms + transfer);
      }
      // Which constraints bind at `start`; data edges are preferred when
      // reconstructing the path.
      bool transfer_binds = false;
      std::string pred;
      for (const auto& p : in.producers) {
        if (SameTime(timing.at(p).finish_ms + transfer, start)) {
          if (transfer > 0.0) transfer_binds = true;
          if (has_transfer[p]) transfer_binds = true;
          if (pred.empty()) pred = p;
        }
      }
      if (!prev_layer.empty() && SameTime(barrier, start)) {
        for (const auto& q : prev_layer) {
          if (SameTime(timing.at(q).finish_ms, barrier)) {
            if (has_transfer[q]) transfer_binds = true;
            if (pred.empty()) pred = q;
          }
        }
      }
      has_transfer[id] = transfer_binds;
      if (!pred.empty()) predecessor[id] = pred;
      NodeTiming t{id, start, start + env.ProcessingTime(*node)};
      timing[id] = t;
      report.schedule.push_back(t);
      layer_end = std::max(layer_end, t.finish_ms);
    }
    barrier = layer_end;
    prev_layer = layer;
  }

  if (plan.layers.empty()) {
    report.latency_ms = hop + hop;
    return report;
  }
  report.latency_ms = barrier + hop;
  std::string last;
  for (const auto& id : prev_layer) {
    if (!SameTime(timing.at(id).finish_ms, barrier)) continue;
    if (has_transfer[id]) report.critical_path_has_transfer = true;
    if (last.empty() || (has_transfer[id] && !has_transfer[last])) last = id;
  }
  for (std::string cur = last; !cur.empty();) {
    report.critical_path.push_back(cur);
    auto it = predecessor.find(cur);
    cur = it == predecessor.end() ? std::string() : it->second;
  }
  std::reverse(report.critical_path.begin(), report.critical_path.end());
  return report;
}

ExecutionResult ExecutePlan(const CompositionPlan& plan, const ValueMap& inputs,
                            const SimEnv& env, Mode mode) {
  for (const auto& node : plan.nodes) {
    if (env.faults.count(node.id)) {
      throw Error(ErrorCode::kServiceDown, "service " + node.id + " is down",
                  Json{{"id", node.id}});
    }
  }
  ConceptSet missing;
  for (const auto& e : plan.edges) {
    if (e.producer == kSource && !inputs.count(e.label)) missing.push_back(e.label);
  }
  if (!missing.empty()) {
    missing = NormalizeConcepts(std::move(missing));
    throw Error(ErrorCode::kMissingInput, "no value for provided concept " + missing[0],
                Json{{"missing", missing}});
  }

  LatencyReport latency = SimulateLatency(plan, env, mode);
  std::map<std::string, double> start_of;
  for (const auto& t : latency.schedule) start_of[t.node] = t.start_ms;

  std::map<std::string, ValueMap> produced;
  auto value_of = [&](const PlanEdge& e) -> const Value& {
    if (e.producer == kSource) return inputs.at(e.label);
    return produced.at(e.producer).at(e.label);
  };
  for (const auto& layer : plan.layers) {
    for (const auto& id : layer) {
      const ServiceDescription* node = plan.FindNode(id);
      if (!node) continue;
      auto fault = env.scheduled_faults.find(id);
      if (fault != env.scheduled_faults.end() && start_of[id] >= fault->second) {
        throw Error(ErrorCode::kServiceDown, "service " + id + " went down mid-run",
                    Json{{"id", id}, {"at_ms", start_of[id]}});
      }
      ValueMap args;
      for (const auto& e : plan.edges) {
        if (e.consumer == id) args[e.label] = value_of(e);
      }
      produced[id] = env.Invoke(*node, args);
    }
  }

  ExecutionResult result;
  result.mode = mode;
  result.latency_ms = latency.latency_ms;
  for (const auto& e : plan.edges) {
    if (e.consumer == kSink) result.outputs[e.label] = value_of(e);
  }
  result.trace = latency.schedule;
  std::stable_sort(result.trace.begin(), result.trace.end(),
                   [](const NodeTiming& a, const NodeTiming& b) {
                     if (a.finish_ms != b.finish_ms) return a.finish_ms < b.finish_ms;
                     return a.node < b.node;
                   });
  return result;
}

CompositionPlan PlanHealthCheck(const CompositionPlan& plan, const SimEnv& env,
                                std::span<const CompositionPlan> fallback) {
  auto healthy = [&](const CompositionPlan& p) {
    return std::none_of(p.nodes.begin(), p.nodes.end(),
                        [&](const ServiceDescription& n) { return env.faults.count(n.id); });
  };
  if (healthy(plan)) return plan;
  for (const auto& p : fallback) {
    if (healthy(p)) return p;
  }
  throw Error(ErrorCode::kNoHealthyPlan, "every candidate plan uses a down service",
              Json{{"down", std::vector<std::string>(env.faults.begin(), env.faults.end())}});
}

namespace {

// Same sequence on every platform, unlike the std distributions.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : gen_(seed) {}
  std::size_t Below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
  double Between(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 gen_;
};

std::string ConceptName(std::size_t i) { return "c" + std::to_string(i); }

std::vector<ServiceDescription> RandomLayeredCatalog(std::size_t size, PortableRng& rng) {
  const std::size_t concepts = std::max<std::size_t>(4, size / 2 + 2);
  std::vector<ServiceDescription> catalog;
  for (std::size_t i = 0; i < size; ++i) {
    ServiceDescription s;
    s.id = "svc-" + std::to_string(i);
    s.name = "Synthetic " + std::to_string(i);
    // Inputs come from a small window below the split point, outputs from
    // above it, so the dependency graph is layered.
    const std::size_t split = 1 + rng.Below(concepts - 1);
    const std::size_t window_lo = split >= 3 ? split - 3 : 0;
    const std::size_t n_in = 1 + rng.Below(std::min<std::size_t>(2, split - window_lo));
    for (std::size_t k = 0; k < n_in; ++k) {
      s.inputs.push_back(ConceptName(window_lo + rng.Below(split - window_lo)));
    }
    const std::size_t n_out = 1 + rng.Below(2);
    for (std::size_t k = 0; k < n_out; ++k) {
      s.outputs.push_back(ConceptName(split + rng.Below(concepts - split)));
    }
    s.functionality.category = "bench/synthetic";
    s.qos.response_time_ms = static_cast<double>(1 + rng.Below(100));
    s.qos.cost = static_cast<double>(1 + rng.Below(100)) / 10.0;
    s.qos.availability = 0.9 + static_cast<double>(rng.Below(100)) / 1000.0;
    s.qos.reliability = 0.9 + static_cast<double>(rng.Below(100)) / 1000.0;
    s.qos.throughput_rps = static_cast<double>(10 + rng.Below(990));
    s.endpoint = "sim://" + s.id;
    catalog.push_back(Canonicalize(std::move(s)));
  }
  return catalog;
}

constexpr int kGeneratorRetries = 200;

double ElapsedMs(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string Csv(std::string_view header, std::span<const BenchRow> rows) {
  std::string out(header);
  out += "\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f\n", r.size, r.elapsed_ms);
    out += buf;
  }
  return out;
}

}  // namespace

BenchInstance GenerateBenchInstance(std::size_t size, std::uint64_t seed) {
  if (size == 0) throw Error(ErrorCode::kValidation, "catalog size must be positive");
  PortableRng rng(seed);
  for (int attempt = 0; attempt < kGeneratorRetries; ++attempt) {
    BenchInstance inst;
    inst.catalog = RandomLayeredCatalog(size, rng);
    inst.request.provided = {ConceptName(0)};
    const ConceptSet closure = matchmaker::ForwardClosure(inst.catalog, inst.request.provided);
    // Aim for the deepest reachable concept the default search can plan.
    std::vector<std::size_t> reachable;
    for (const auto& c : closure) {
      if (c != ConceptName(0)) reachable.push_back(std::stoul(c.substr(1)));
    }
    std::sort(reachable.rbegin(), reachable.rend());
    for (std::size_t target : reachable) {
      inst.request.desired = {ConceptName(target)};
      try {
        matchmaker::GenerateCandidates(inst.catalog, inst.request);
        return inst;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoComposition) throw;
      }
    }
  }
  throw Error(ErrorCode::kNoComposition, "could not generate a solvable catalog",
              Json{{"size", size}, {"seed", seed}});
}

std::vector<BenchRow> BenchComposition(std::span<const std::size_t> sizes,
                                       std::uint64_t seed) {
  std::vector<BenchRow> rows;
  for (std::size_t size : sizes) {
    BenchInstance inst = GenerateBenchInstance(size, seed);
    wsdb::ReplicaSet replicas = wsdb::ReplicaSet::WithCount(1);
    std::vector<CacheEntry> entries;
    for (const auto& s : inst.catalog) entries.push_back({s, 0, wsdb::kDefaultTtlSeconds});
    replicas.WriteAll(entries, 0);

    const auto started = std::chrono::steady_clock::now();
    Metrics delta;
    auto found = matchmaker::Lookup(inst.request, replicas, {}, 0, {}, delta);
    auto plans = evaluator::FilterFunctionality(
        evaluator::FilterInterface(std::move(found.candidates.plans), inst.request),
        inst.request);
    for (auto& p : plans) p.aggregate = evaluator::AggregateQos(p);
    auto scored = evaluator::ScoreCandidates(std::move(plans), inst.request.weights,
                                             inst.request.bounds);
    composer::Compose(evaluator::SelectBest(scored), inst.request);
    rows.push_back({size, ElapsedMs(started)});
  }
  return rows;
}

std::vector<BenchRow> BenchExposure(std::span<const std::size_t> counts) {
  std::vector<BenchRow> rows;
  for (std::size_t count : counts) {
    if (count == 0) throw Error(ErrorCode::kValidation, "method count must be positive");
    registry::Registry reg("bench");
    std::vector<ServiceDescription> services;
    services.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      ServiceDescription s;
      s.id = "method-" + std::to_string(i);
      s.name = "Method " + std::to_string(i);
      s.inputs = {"in-" + std::to_string(i)};
      s.outputs = {"out-" + std::to_string(i)};
      s.functionality.category = "bench/exposed";
      s.endpoint = "sim://" + s.id;
      services.push_back(std::move(s));
    }
    const auto started = std::chrono::steady_clock::now();
    for (const auto& s : services) reg.Register(s);
    rows.push_back({count, ElapsedMs(started)});
  }
  return rows;
}

std::string CompositionCsv(std::span<const BenchRow> rows) {
  return Csv("size,composition_time_ms", rows);
}

std::string ExposureCsv(std::span<const BenchRow> rows) {
  return Csv("count,exposure_time_ms", rows);
}

}  // namespace compositor::execution
