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

#include "compositor/plan.h"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "json_util.h"

namespace compositor {

std::vector<std::string> CompositionPlan::NodeIds() const {
  std::vector<std::string> ids;
  ids.reserve(nodes.size());
  for (const auto& n : nodes) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

const ServiceDescription* CompositionPlan::FindNode(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::optional<std::size_t> CompositionPlan::LayerOf(std::string_view id) const {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (std::find(layers[k].begin(), layers[k].end(), id) != layers[k].end()) {
      return k;
    }
  }
  return std::nullopt;
}

std::optional<Layers> ComputeLayers(std::span<const ServiceDescription> nodes,
                                    const ConceptSet& provided) {
  std::set<Concept> available(provided.begin(), provided.end());
  std::vector<bool> placed(nodes.size(), false);
  std::size_t remaining = nodes.size();
  Layers layers;
  while (remaining > 0) {
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (placed[i]) continue;
      const auto& inputs = nodes[i].inputs;
      if (std::all_of(inputs.begin(), inputs.end(),
                      [&](const Concept& c) { return available.count(c) > 0; })) {
        ready.push_back(i);
      }
    }
    if (ready.empty()) return std::nullopt;
    std::vector<std::string> layer;
    for (std::size_t i : ready) {
      placed[i] = true;
      --remaining;
      layer.push_back(nodes[i].id);
    }
    for (std::size_t i : ready) {
      available.insert(nodes[i].outputs.begin(), nodes[i].outputs.end());
    }
    std::sort(layer.begin(), layer.end());
    layers.push_back(std::move(layer));
  }
  return layers;
}

std::vector<PlanEdge> WireEdges(std::span<const ServiceDescription> nodes,
                                const Layers& layers, const ConceptSet& provided,
                                const ConceptSet& desired) {
  std::map<std::string, std::size_t> layer_of;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    for (const auto& id : layers[k]) layer_of[id] = k;
  }
  // concept -> producers ordered by (layer, id)
  std::map<Concept, std::vector<std::pair<std::size_t, std::string>>> producers;
  for (const auto& n : nodes) {
    auto it = layer_of.find(n.id);
    if (it == layer_of.end()) continue;
    for (const auto& c : n.outputs) producers[c].emplace_back(it->second, n.id);
  }
  for (auto& [c, list] : producers) std::sort(list.begin(), list.end());

  auto earliest = [&](const Concept& c,
                      std::size_t before) -> std::optional<std::string> {
    if (ConceptSetContains(provided, c)) return std::string(kSource);
    auto it = producers.find(c);
    if (it == producers.end()) return std::nullopt;
    const auto& [layer, id] = it->second.front();
    if (layer >= before) return std::nullopt;
    return id;
  };

  std::set<PlanEdge> edges;
  for (const auto& n : nodes) {
    auto it = layer_of.find(n.id);
    if (it == layer_of.end()) continue;
    for (const auto& c : n.inputs) {
      if (auto from = earliest(c, it->second)) edges.insert({*from, n.id, c});
    }
  }
  for (const auto& c : desired) {
    if (auto from = earliest(c, layers.size())) {
      edges.insert({*from, std::string(kSink), c});
    }
  }
  return {edges.begin(), edges.end()};
}

std::optional<CompositionPlan> BuildPlan(std::vector<ServiceDescription> nodes,
                                         const ConceptSet& provided,
                                         const ConceptSet& desired) {
  std::sort(nodes.begin(), nodes.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  auto layers = ComputeLayers(nodes, provided);
  if (!layers) return std::nullopt;
  CompositionPlan plan;
  plan.edges = WireEdges(nodes, *layers, provided, desired);
  plan.layers = std::move(*layers);
  plan.nodes = std::move(nodes);
  return plan;
}

bool NodeSetIsValid(std::span<const ServiceDescription> nodes,
                    const ConceptSet& provided, const ConceptSet& desired) {
  if (!ComputeLayers(nodes, provided)) return false;
  std::set<Concept> covered(provided.begin(), provided.end());
  for (const auto& n : nodes) covered.insert(n.outputs.begin(), n.outputs.end());
  return std::all_of(desired.begin(), desired.end(),
                     [&](const Concept& c) { return covered.count(c) > 0; });
}

ValidationReport CheckPlan(const CompositionPlan& plan, const ConceptSet& provided,
                           const ConceptSet& desired) {
  ValidationReport report;
  auto add = [&](std::string field, std::string rule) {
    report.violations.push_back({std::move(field), std::move(rule)});
  };

  std::map<std::string, const ServiceDescription*> by_id;
  for (const auto& n : plan.nodes) {
    if (!by_id.emplace(n.id, &n).second) add("/nodes", "duplicate node " + n.id);
  }

  std::map<std::string, std::size_t> layer_of;
  for (std::size_t k = 0; k < plan.layers.size(); ++k) {
    if (plan.layers[k].empty()) add("/layers", "empty layer");
    for (const auto& id : plan.layers[k]) {
      if (!by_id.count(id)) add("/layers", "unknown node " + id);
      if (!layer_of.emplace(id, k).second) add("/layers", "node layered twice " + id);
    }
  }
  for (const auto& [id, node] : by_id) {
    if (!layer_of.count(id)) add("/layers", "node not layered " + id);
  }
  if (!report.ok()) return report;

  std::set<Concept> available(provided.begin(), provided.end());
  for (std::size_t k = 0; k < plan.layers.size(); ++k) {
    for (const auto& id : plan.layers[k]) {
      for (const auto& c : by_id[id]->inputs) {
        if (!available.count(c)) {
          add("/layers/" + std::to_string(k),
              "input " + c + " of " + id + " not covered");
        }
      }
    }
    for (const auto& id : plan.layers[k]) {
      const auto& out = by_id[id]->outputs;
      available.insert(out.begin(), out.end());
    }
  }
  for (const auto& c : desired) {
    if (!available.count(c)) add("/desired", "desired " + c + " not covered");
  }

  for (const auto& e : plan.edges) {
    std::optional<std::size_t> from_layer;
    if (e.producer == kSource) {
      if (!ConceptSetContains(provided, e.label)) {
        add("/edges", "SOURCE does not provide " + e.label);
      }
    } else if (auto it = by_id.find(e.producer); it == by_id.end()) {
      add("/edges", "unknown producer " + e.producer);
      continue;
    } else {
      if (!ConceptSetContains(it->second->outputs, e.label)) {
        add("/edges", e.producer + " does not produce " + e.label);
      }
      from_layer = layer_of[e.producer];
    }
    if (e.consumer == kSink) {
      if (!ConceptSetContains(desired, e.label)) {
        add("/edges", "SINK does not want " + e.label);
      }
    } else if (auto it = by_id.find(e.consumer); it == by_id.end()) {
      add("/edges", "unknown consumer " + e.consumer);
    } else {
      if (!ConceptSetContains(it->second->inputs, e.label)) {
        add("/edges", e.consumer + " does not consume " + e.label);
      }
      if (from_layer && *from_layer >= layer_of[e.consumer]) {
        add("/edges", "edge " + e.producer + "->" + e.consumer + " goes backwards");
      }
    }
  }
  return report;
}

std::string PlanKey(const CompositionPlan& plan) {
  std::string key;
  for (const auto& id : plan.NodeIds()) key += id + ",";
  key += "|";
  std::vector<PlanEdge> edges = plan.edges;
  std::sort(edges.begin(), edges.end());
  for (const auto& e : edges) {
    key += e.producer + ">" + e.consumer + ":" + e.label + ";";
  }
  return key;
}

Json PlanToJson(const CompositionPlan& plan) {
  std::vector<const ServiceDescription*> nodes;
  for (const auto& n : plan.nodes) nodes.push_back(&n);
  std::sort(nodes.begin(), nodes.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });
  Json out = Json::object();
  out["nodes"] = Json::array();
  for (const auto* n : nodes) out["nodes"].push_back(ServiceToJson(*n));
  std::vector<PlanEdge> edges = plan.edges;
  std::sort(edges.begin(), edges.end());
  out["edges"] = Json::array();
  for (const auto& e : edges) {
    out["edges"].push_back(Json::array({e.producer, e.consumer, e.label}));
  }
  out["layers"] = plan.layers;
  out["aggregate"] = QosToJson(plan.aggregate);
  return out;
}

CompositionPlan PlanFromJson(const Json& doc) {
  using namespace json_util;
  RequireObject(doc, "");
  RejectUnknownKeys(doc, "", {"nodes", "edges", "layers", "aggregate"});
  CompositionPlan plan;
  const Json& nodes = RequireField(doc, "", "nodes");
  if (!nodes.is_array()) Fail("/nodes", "expected array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    plan.nodes.push_back(ServiceFromJson(nodes[i], "/nodes/" + std::to_string(i)));
  }
  const Json& edges = RequireField(doc, "", "edges");
  if (!edges.is_array()) Fail("/edges", "expected array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "/edges/" + std::to_string(i);
    const Json& e = edges[i];
    if (!e.is_array() || e.size() != 3) Fail(path, "expected [producer, consumer, concept]");
    plan.edges.push_back({AsString(e[0], path + "/0"), AsString(e[1], path + "/1"),
                          AsString(e[2], path + "/2")});
  }
  const Json& layers = RequireField(doc, "", "layers");
  if (!layers.is_array()) Fail("/layers", "expected array");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string path = "/layers/" + std::to_string(k);
    if (!layers[k].is_array()) Fail(path, "expected array of ids");
    std::vector<std::string> layer;
    for (std::size_t j = 0; j < layers[k].size(); ++j) {
      layer.push_back(AsString(layers[k][j], path + "/" + std::to_string(j)));
    }
    plan.layers.push_back(std::move(layer));
  }
  plan.aggregate = QosFromJson(RequireField(doc, "", "aggregate"), "/aggregate");
  std::sort(plan.nodes.begin(), plan.nodes.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(plan.edges.begin(), plan.edges.end());
  return plan;
}

}  // namespace compositor
