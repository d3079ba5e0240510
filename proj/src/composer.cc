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

#include "compositor/composer.h"

#include <set>
#include <utility>

namespace compositor::composer {

CompositionPlan PrunePlan(const CompositionPlan& plan, const Request& request) {
  const ConceptSet provided = NormalizeConcepts(request.provided);
  const ConceptSet desired = NormalizeConcepts(request.desired);

  std::set<Concept> needed;
  for (const auto& c : desired) {
    if (!ConceptSetContains(provided, c)) needed.insert(c);
  }
  std::vector<bool> keep(plan.nodes.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
      if (keep[i]) continue;
      const auto& node = plan.nodes[i];
      bool contributes = false;
      for (const auto& out : node.outputs) {
        if (needed.count(out)) contributes = true;
      }
      if (!contributes) continue;
      keep[i] = true;
      changed = true;
      for (const auto& in : node.inputs) {
        if (!ConceptSetContains(provided, in)) needed.insert(in);
      }
    }
  }

  std::vector<ServiceDescription> nodes;
  for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
    if (keep[i]) nodes.push_back(plan.nodes[i]);
  }
  if (nodes.size() == plan.nodes.size()) return plan;
  auto pruned = BuildPlan(std::move(nodes), provided, desired);
  if (!pruned) {
    throw Error(ErrorCode::kCycle, "pruned plan cannot fire from provided concepts");
  }
  pruned->aggregate = plan.aggregate;
  return *pruned;
}

CompositionPlan LayerPlan(CompositionPlan plan, const ConceptSet& provided) {
  auto layers = ComputeLayers(plan.nodes, NormalizeConcepts(provided));
  if (!layers) {
    throw Error(ErrorCode::kCycle, "plan has nodes that can never fire",
                Json{{"nodes", plan.NodeIds()}});
  }
  plan.layers = std::move(*layers);
  return plan;
}

CompositionPlan Compose(const evaluator::ScoredPlan& best, const Request& request,
                        double throughput_max) {
  const ConceptSet provided = NormalizeConcepts(request.provided);
  const ConceptSet desired = NormalizeConcepts(request.desired);
  CompositionPlan plan = LayerPlan(PrunePlan(best.plan, request), provided);
  plan.edges = WireEdges(plan.nodes, plan.layers, provided, desired);
  plan.aggregate = evaluator::AggregateQos(plan, throughput_max);
  return plan;
}

}  // namespace compositor::composer
