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

#include "compositor/evaluator.h"

#include <algorithm>
#include <cmath>
#include <utility>

namespace compositor::evaluator {

bool SatisfiesInterface(const CompositionPlan& plan, const Request& request) {
  return CheckPlan(plan, NormalizeConcepts(request.provided),
                   NormalizeConcepts(request.desired))
      .ok();
}

std::vector<CompositionPlan> FilterInterface(std::vector<CompositionPlan> plans,
                                             const Request& request) {
  std::erase_if(plans, [&](const CompositionPlan& p) {
    return !SatisfiesInterface(p, request);
  });
  return plans;
}

bool SatisfiesFunctionality(const CompositionPlan& plan, const Request& request) {
  for (const auto& node : plan.nodes) {
    if (request.category_requirement &&
        !CategoryHasPrefix(node.functionality.category, *request.category_requirement)) {
      return false;
    }
    for (const auto& c : request.constraints) {
      auto it = node.functionality.attributes.find(c.attribute);
      if (it == node.functionality.attributes.end()) return false;
      if (!c.SatisfiedBy(it->second)) return false;
    }
  }
  return true;
}

std::vector<CompositionPlan> FilterFunctionality(std::vector<CompositionPlan> plans,
                                                 const Request& request) {
  std::erase_if(plans, [&](const CompositionPlan& p) {
    return !SatisfiesFunctionality(p, request);
  });
  return plans;
}

QoSVector AggregateQos(const CompositionPlan& plan, double throughput_max) {
  QoSVector out;
  out.response_time_ms = 0.0;
  out.cost = 0.0;
  out.availability = 1.0;
  out.reliability = 1.0;
  out.throughput_rps = throughput_max;
  for (const auto& layer : plan.layers) {
    double slowest = 0.0;
    for (const auto& id : layer) {
      const ServiceDescription* node = plan.FindNode(id);
      if (node) slowest = std::max(slowest, node->qos.response_time_ms);
    }
    out.response_time_ms += slowest;
  }
  for (const auto& node : plan.nodes) {
    out.cost += node.qos.cost;
    out.availability *= node.qos.availability;
    out.reliability *= node.qos.reliability;
    out.throughput_rps = std::min(out.throughput_rps, node.qos.throughput_rps);
  }
  return out;
}

std::vector<std::pair<Utilities, double>> ScoreAggregates(
    std::span<const QoSVector> aggregates, const QosWeights& weights) {
  const QosWeights w = NormalizeWeights(weights);
  std::vector<std::pair<Utilities, double>> out(aggregates.size());
  for (std::size_t a = 0; a < kQosAttributes.size(); ++a) {
    const QosAttribute attr = kQosAttributes[a];
    double lo = INFINITY;
    double hi = -INFINITY;
    for (const auto& q : aggregates) {
      lo = std::min(lo, q.Get(attr));
      hi = std::max(hi, q.Get(attr));
    }
    for (std::size_t i = 0; i < aggregates.size(); ++i) {
      const double x = aggregates[i].Get(attr);
      double u = 1.0;
      if (hi != lo) u = LowerIsBetter(attr) ? (hi - x) / (hi - lo) : (x - lo) / (hi - lo);
      out[i].first[a] = u;
    }
  }
  for (auto& [u, score] : out) {
    score = 0.0;
    for (std::size_t a = 0; a < u.size(); ++a) score += w[a] * u[a];
    score = std::clamp(score, 0.0, 1.0);
  }
  return out;
}

std::vector<ScoredPlan> ScoreCandidates(std::vector<CompositionPlan> plans,
                                        const QosWeights& weights,
                                        const QosBounds& bounds) {
  const std::size_t before = plans.size();
  std::erase_if(plans, [&](const CompositionPlan& p) { return !bounds.Admits(p.aggregate); });
  if (plans.empty()) {
    throw Error(ErrorCode::kNoFeasible, "no candidate satisfies the QoS bounds",
                Json{{"candidates", before}});
  }
  std::vector<QoSVector> aggregates;
  aggregates.reserve(plans.size());
  for (const auto& p : plans) aggregates.push_back(p.aggregate);
  auto scores = ScoreAggregates(aggregates, weights);
  std::vector<ScoredPlan> out;
  out.reserve(plans.size());
  for (std::size_t i = 0; i < plans.size(); ++i) {
    out.push_back({std::move(plans[i]), scores[i].first, scores[i].second});
  }
  return out;
}

bool RanksBefore(const ScoredPlan& a, const ScoredPlan& b) {
  if (std::abs(a.score - b.score) > kScoreTieEpsilon) return a.score > b.score;
  if (a.plan.nodes.size() != b.plan.nodes.size()) {
    return a.plan.nodes.size() < b.plan.nodes.size();
  }
  return a.plan.NodeIds() < b.plan.NodeIds();
}

std::vector<ScoredPlan> Rank(std::vector<ScoredPlan> scored) {
  std::stable_sort(scored.begin(), scored.end(), RanksBefore);
  return scored;
}

ScoredPlan SelectBest(std::span<const ScoredPlan> scored) {
  if (scored.empty()) throw Error(ErrorCode::kNoFeasible, "no candidate to select");
  const ScoredPlan* best = &scored[0];
  for (const auto& s : scored.subspan(1)) {
    if (RanksBefore(s, *best)) best = &s;
  }
  return *best;
}

}  // namespace compositor::evaluator
