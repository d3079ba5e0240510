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

#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compositor/model.h"

namespace compositor {

inline constexpr std::string_view kSource = "SOURCE";
inline constexpr std::string_view kSink = "SINK";

// A concept-labelled data edge. `producer` is a node id or SOURCE, `consumer`
// a node id or SINK.
struct PlanEdge {
  std::string producer;
  std::string consumer;
  Concept label;

  auto operator<=>(const PlanEdge&) const = default;
};

using Layers = std::vector<std::vector<std::string>>;

struct CompositionPlan {
  std::vector<ServiceDescription> nodes;  // sorted by id
  std::vector<PlanEdge> edges;            // sorted
  Layers layers;                          // ids sorted within a layer
  QoSVector aggregate;

  std::vector<std::string> NodeIds() const;
  const ServiceDescription* FindNode(std::string_view id) const;
  // Index of the layer holding `id`, or nullopt.
  std::optional<std::size_t> LayerOf(std::string_view id) const;

  bool operator==(const CompositionPlan&) const = default;
};

// ASAP stratification: a node sits in the first round in which all of its
// inputs are available from `provided` or from strictly earlier rounds.
// Returns nullopt if some node can never fire.
std::optional<Layers> ComputeLayers(std::span<const ServiceDescription> nodes,
                                    const ConceptSet& provided);

// Each consumer input (and each desired concept, as a SINK edge) is wired to
// SOURCE when provided, else to the producer in the earliest layer, smallest
// id first.
std::vector<PlanEdge> WireEdges(std::span<const ServiceDescription> nodes,
                                const Layers& layers, const ConceptSet& provided,
                                const ConceptSet& desired);

// Builds a layered, wired plan over `nodes` (aggregate left default).
// Returns nullopt if the node set cannot fire from `provided`.
std::optional<CompositionPlan> BuildPlan(std::vector<ServiceDescription> nodes,
                                         const ConceptSet& provided,
                                         const ConceptSet& desired);

// True iff every node fires from `provided` using only the given nodes and
// every desired concept ends up covered.
bool NodeSetIsValid(std::span<const ServiceDescription> nodes,
                    const ConceptSet& provided, const ConceptSet& desired);

// Structural validity of a fully built plan against a request's interface:
// layer partition, per-layer input coverage, desired coverage, edge sanity.
ValidationReport CheckPlan(const CompositionPlan& plan, const ConceptSet& provided,
                           const ConceptSet& desired);

// Identity used for de-duplication: sorted node ids plus the edge set.
std::string PlanKey(const CompositionPlan& plan);

// Canonical document {nodes, edges, layers, aggregate}.
Json PlanToJson(const CompositionPlan& plan);
CompositionPlan PlanFromJson(const Json& doc);

}  // namespace compositor
