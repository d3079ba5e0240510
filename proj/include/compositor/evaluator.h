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

// Candidate evaluation: interface filter, functionality filter, QoS
// aggregation and min-max scoring.

#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "compositor/model.h"
#include "compositor/plan.h"

namespace compositor::evaluator {

// Stands in for the unbounded throughput of the empty plan.
inline constexpr double kDefaultThroughputMax = 1e9;

// Ties on score closer than this fall through to the structural tie-break.
inline constexpr double kScoreTieEpsilon = 1e-12;

using Utilities = std::array<double, kQosAttributes.size()>;

struct ScoredPlan {
  CompositionPlan plan;
  Utilities utilities{};
  double score = 0.0;
};

bool SatisfiesInterface(const CompositionPlan& plan, const Request& request);
std::vector<CompositionPlan> FilterInterface(std::vector<CompositionPlan> plans,
                                             const Request& request);

// Category prefix on every node, and every constraint on every node; a node
// without the constrained attribute fails.
bool SatisfiesFunctionality(const CompositionPlan& plan, const Request& request);
std::vector<CompositionPlan> FilterFunctionality(std::vector<CompositionPlan> plans,
                                                 const Request& request);

// rt: sum of per-layer maxima; cost: sum; availability, reliability:
// product; throughput: min (the sentinel for the empty plan).
QoSVector AggregateQos(const CompositionPlan& plan,
                       double throughput_max = kDefaultThroughputMax);

// Min-max utilities over `aggregates` and the weighted score of each.
// Weights are renormalized. u := 1 on an attribute where max == min.
std::vector<std::pair<Utilities, double>> ScoreAggregates(
    std::span<const QoSVector> aggregates, const QosWeights& weights);

// Drops plans outside `bounds`, then scores the rest on plan.aggregate.
// Throws kNoFeasible when nothing survives.
std::vector<ScoredPlan> ScoreCandidates(std::vector<CompositionPlan> plans,
                                        const QosWeights& weights,
                                        const QosBounds& bounds);

// Strict ranking order: higher score, then fewer nodes, then smaller sorted
// id list.
bool RanksBefore(const ScoredPlan& a, const ScoredPlan& b);
std::vector<ScoredPlan> Rank(std::vector<ScoredPlan> scored);

// Throws kNoFeasible on empty input.
ScoredPlan SelectBest(std::span<const ScoredPlan> scored);

}  // namespace compositor::evaluator
