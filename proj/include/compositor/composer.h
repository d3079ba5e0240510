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

// Turns the selected candidate into the final executable plan.

#pragma once

#include "compositor/evaluator.h"
#include "compositor/model.h"
#include "compositor/plan.h"

namespace compositor::composer {

// Drops nodes that feed no desired concept, directly or transitively, then
// re-layers and re-wires. Concepts already provided need no producer.
CompositionPlan PrunePlan(const CompositionPlan& plan, const Request& request);

// Recomputes the ASAP layer partition. Throws kCycle when some node can
// never fire.
CompositionPlan LayerPlan(CompositionPlan plan, const ConceptSet& provided);

// Prune, layer, wire, attach the aggregate.
CompositionPlan Compose(const evaluator::ScoredPlan& best, const Request& request,
                        double throughput_max = evaluator::kDefaultThroughputMax);

}  // namespace compositor::composer
