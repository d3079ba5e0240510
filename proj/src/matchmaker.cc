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

#include "compositor/matchmaker.h"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>

namespace compositor::matchmaker {

namespace {

// Highest version per id, sorted by id.
std::vector<ServiceDescription> DedupeCatalog(std::span<const ServiceDescription> catalog) {
  std::map<std::string, const ServiceDescription*> latest;
  for (const auto& s : catalog) {
    auto [it, inserted] = latest.emplace(s.id, &s);
    if (!inserted && s.version > it->second->version) it->second = &s;
  }
  std::vector<ServiceDescription> out;
  out.reserve(latest.size());
  for (const auto& [id, s] : latest) out.push_back(*s);
  return out;
}

[[noreturn]] void ThrowNoComposition(const ConceptSet& unreachable,
                                     std::string reason = {}) {
  Json detail{{"unreachable", unreachable}};
  if (!reason.empty()) detail["reason"] = reason;
  std::string what = "no composition";
  if (!unreachable.empty()) {
    what += "; unreachable:";
    for (const auto& c : unreachable) what += " " + c;
  } else if (!reason.empty()) {
    what += "; " + reason;
  }
  throw Error(ErrorCode::kNoComposition, what, std::move(detail));
}

// Backward chaining over concept -> producer assignments. Each needed
// concept (desired, or an input of a chosen service) is assigned exactly one
// producer; the chosen set is accepted when it fires from `provided` and no
// single service can be dropped.
//
// Completeness in exhaustive mode: for a minimal plan M, the branch that
// assigns every needed concept its earliest-layer producer in M stays inside
// M and yields an acyclic support graph, hence a valid subset of M, hence M.
class BackwardSearch {
 public:
  BackwardSearch(std::vector<ServiceDescription> services, const Request& request,
                 const SearchLimits& limits, bool exhaustive)
      : services_(std::move(services)),
        request_(request),
        limits_(limits),
        exhaustive_(exhaustive) {
    auto intern = [&](const Concept& c) {
      auto [it, inserted] = concept_index_.emplace(c, concept_index_.size());
      return it->second;
    };
    for (const auto& c : request_.provided) intern(c);
    for (const auto& c : request_.desired) intern(c);
    for (const auto& s : services_) {
      for (const auto& c : s.inputs) intern(c);
      for (const auto& c : s.outputs) intern(c);
    }
    // Index order follows concept name so the open-concept pick is stable.
    std::size_t next = 0;
    for (auto& [name, index] : concept_index_) index = next++;

    const std::size_t n = concept_index_.size();
    provided_.assign(n, false);
    for (const auto& c : request_.provided) provided_[concept_index_[c]] = true;
    producers_.resize(n);
    inputs_.resize(services_.size());
    for (std::size_t s = 0; s < services_.size(); ++s) {
      for (const auto& c : services_[s].outputs) {
        producers_[concept_index_[c]].push_back(s);
      }
      for (const auto& c : services_[s].inputs) {
        inputs_[s].push_back(concept_index_[c]);
      }
    }
    for (auto& list : producers_) {
      std::stable_sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
        if (!exhaustive_ && services_[a].inputs.size() != services_[b].inputs.size()) {
          return services_[a].inputs.size() < services_[b].inputs.size();
        }
        return services_[a].id < services_[b].id;
      });
    }
    chosen_.assign(services_.size(), false);
    assigned_.assign(n, false);
    depth_.assign(n, kNotNeeded);
    for (const auto& c : request_.desired) {
      std::size_t i = concept_index_[c];
      if (!provided_[i]) depth_[i] = 0;
    }
  }

  std::set<std::vector<std::string>> Run() {
    Search();
    return found_;
  }

 private:
  static constexpr int kNotNeeded = -1;

  std::string StateKey() const {
    // Only set positions are encoded, so the key stays small on big catalogs.
    std::string key;
    auto put = [&key](std::uint32_t v) {
      key.append(reinterpret_cast<const char*>(&v), sizeof v);
    };
    for (std::size_t s = 0; s < chosen_.size(); ++s) {
      if (chosen_[s]) put(static_cast<std::uint32_t>(s));
    }
    put(UINT32_MAX);
    for (std::size_t i = 0; i < depth_.size(); ++i) {
      if (depth_[i] == kNotNeeded) continue;
      put(static_cast<std::uint32_t>(i));
      // Depth only matters to the bounded-mode pruning.
      const std::uint32_t depth = exhaustive_ ? 0 : static_cast<std::uint32_t>(depth_[i]);
      put(depth << 1 | (assigned_[i] ? 1u : 0u));
    }
    return key;
  }

  void Accept() {
    std::vector<ServiceDescription> nodes;
    for (std::size_t s = 0; s < services_.size(); ++s) {
      if (chosen_[s]) nodes.push_back(services_[s]);
    }
    if (!NodeSetIsValid(nodes, request_.provided, request_.desired)) return;
    if (!IsMinimal(nodes, request_.provided, request_.desired)) return;
    std::vector<std::string> ids;
    for (const auto& n : nodes) ids.push_back(n.id);
    found_.insert(std::move(ids));
  }

  void Search() {
    if (!exhaustive_ && expanded_ >= limits_.max_states) return;
    if (!visited_.insert(StateKey()).second) return;
    ++expanded_;

    std::size_t open = depth_.size();
    for (std::size_t i = 0; i < depth_.size(); ++i) {
      if (depth_[i] != kNotNeeded && !assigned_[i] && !provided_[i]) {
        open = i;
        break;
      }
    }
    if (open == depth_.size()) {
      Accept();
      return;
    }

    const int producer_depth = depth_[open] + 1;
    int fresh_branches = 0;
    assigned_[open] = true;
    for (std::size_t p : producers_[open]) {
      if (chosen_[p]) {
        Search();
        continue;
      }
      if (!exhaustive_) {
        if (fresh_branches >= limits_.branch_width) continue;
        if (producer_depth > limits_.max_depth) continue;
        if (chosen_count_ + 1 > static_cast<std::size_t>(limits_.max_services)) continue;
        ++fresh_branches;
      }
      chosen_[p] = true;
      ++chosen_count_;
      std::vector<std::size_t> newly_needed;
      for (std::size_t c : inputs_[p]) {
        if (!provided_[c] && depth_[c] == kNotNeeded) {
          depth_[c] = producer_depth;
          newly_needed.push_back(c);
        }
      }
      Search();
      for (std::size_t c : newly_needed) depth_[c] = kNotNeeded;
      --chosen_count_;
      chosen_[p] = false;
    }
    assigned_[open] = false;
  }

  std::vector<ServiceDescription> services_;
  const Request& request_;
  SearchLimits limits_;
  bool exhaustive_;

  std::map<Concept, std::size_t> concept_index_;
  std::vector<bool> provided_;
  std::vector<std::vector<std::size_t>> producers_;
  std::vector<std::vector<std::size_t>> inputs_;

  std::vector<bool> chosen_;
  std::size_t chosen_count_ = 0;
  std::vector<bool> assigned_;
  std::vector<int> depth_;

  std::unordered_set<std::string> visited_;
  std::size_t expanded_ = 0;
  std::set<std::vector<std::string>> found_;
};

}  // namespace

void ValidateLimits(const SearchLimits& limits) {
  if (limits.max_depth <= 0 || limits.max_services <= 0 ||
      limits.branch_width <= 0 || limits.max_states == 0) {
    throw Error(ErrorCode::kValidation, "search limits must be positive");
  }
}

ConceptSet ForwardClosure(std::span<const ServiceDescription> catalog,
                          const ConceptSet& provided) {
  std::set<Concept> known(provided.begin(), provided.end());
  std::vector<bool> fired(catalog.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      if (fired[i]) continue;
      const auto& inputs = catalog[i].inputs;
      if (std::all_of(inputs.begin(), inputs.end(),
                      [&](const Concept& c) { return known.count(c) > 0; })) {
        fired[i] = true;
        changed = true;
        known.insert(catalog[i].outputs.begin(), catalog[i].outputs.end());
      }
    }
  }
  return {known.begin(), known.end()};
}

bool IsMinimal(std::span<const ServiceDescription> nodes, const ConceptSet& provided,
               const ConceptSet& desired) {
  if (!NodeSetIsValid(nodes, provided, desired)) return false;
  std::vector<ServiceDescription> without;
  for (std::size_t skip = 0; skip < nodes.size(); ++skip) {
    without.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i != skip) without.push_back(nodes[i]);
    }
    if (NodeSetIsValid(without, provided, desired)) return false;
  }
  return true;
}

std::vector<CompositionPlan> GenerateCandidates(
    std::span<const ServiceDescription> catalog, const Request& request,
    const SearchLimits& limits) {
  ValidateLimits(limits);
  if (request.desired.empty()) {
    throw Error(ErrorCode::kValidation, "desired must be non-empty");
  }
  const ConceptSet provided = NormalizeConcepts(request.provided);
  const ConceptSet desired = NormalizeConcepts(request.desired);

  if (std::includes(provided.begin(), provided.end(), desired.begin(), desired.end())) {
    return {*BuildPlan({}, provided, desired)};
  }

  std::vector<ServiceDescription> services = DedupeCatalog(catalog);
  const ConceptSet closure = ForwardClosure(services, provided);
  ConceptSet unreachable;
  std::set_difference(desired.begin(), desired.end(), closure.begin(), closure.end(),
                      std::back_inserter(unreachable));
  if (!unreachable.empty()) ThrowNoComposition(unreachable);

  const bool exhaustive =
      limits.exhaustive && services.size() <= kExhaustiveCatalogLimit;
  // Services that can never fire cannot appear in any valid plan.
  std::erase_if(services, [&](const ServiceDescription& s) {
    return !std::includes(closure.begin(), closure.end(), s.inputs.begin(),
                          s.inputs.end());
  });

  Request normalized = request;
  normalized.provided = provided;
  normalized.desired = desired;
  BackwardSearch search(std::move(services), normalized, limits, exhaustive);
  std::set<std::vector<std::string>> found = search.Run();
  if (found.empty()) ThrowNoComposition({}, "search limits exhausted");

  std::map<std::string, const ServiceDescription*> by_id;
  for (const auto& s : catalog) {
    auto [it, inserted] = by_id.emplace(s.id, &s);
    if (!inserted && s.version > it->second->version) it->second = &s;
  }
  std::vector<CompositionPlan> plans;
  std::set<std::string> keys;
  for (const auto& ids : found) {
    std::vector<ServiceDescription> nodes;
    for (const auto& id : ids) nodes.push_back(*by_id.at(id));
    auto plan = BuildPlan(std::move(nodes), provided, desired);
    if (plan && keys.insert(PlanKey(*plan)).second) plans.push_back(std::move(*plan));
  }
  std::sort(plans.begin(), plans.end(), [](const auto& a, const auto& b) {
    if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
    return a.NodeIds() < b.NodeIds();
  });
  return plans;
}

LookupResult Lookup(const Request& request, wsdb::ReplicaSet& replicas,
                    std::span<const std::shared_ptr<registry::RegistryClient>> registries,
                    SimTime now, const LookupOptions& options, Metrics& delta) {
  LookupResult result;
  delta.event_trace.push_back(Stage::kMatchWsdb);

  std::vector<ServiceDescription> fresh;
  try {
    wsdb::ReadResult read = replicas.ReadFailover(std::nullopt, now);
    result.replica_used = read.replica_used;
    fresh = std::move(read.services);
    result.candidates.plans = GenerateCandidates(fresh, request, options.limits);
    result.candidates.source = Source::kWsdb;
    result.candidates.catalog_snapshot = std::move(fresh);
    ++delta.wsdb_hits;
    return result;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoComposition &&
        e.code() != ErrorCode::kAllReplicasDown) {
      throw;
    }
  }

  delta.event_trace.push_back(Stage::kMatchRegistry);
  const ConceptSet provided = NormalizeConcepts(request.provided);
  std::map<std::string, ServiceDescription> fetched;
  std::set<Concept> queried;
  ConceptSet frontier;
  std::set_difference(request.desired.begin(), request.desired.end(),
                      provided.begin(), provided.end(), std::back_inserter(frontier));
  frontier = NormalizeConcepts(std::move(frontier));
  bool any_reachable = false;
  for (int level = 0; level < options.limits.max_depth && !frontier.empty(); ++level) {
    std::set<Concept> next;
    for (const auto& wanted : frontier) {
      queried.insert(wanted);
      FindQuery query;
      query.output_concept = wanted;
      for (const auto& reg : registries) {
        std::vector<ServiceDescription> found;
        try {
          found = reg->Find(query);
          any_reachable = true;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kRegistryUnreachable) throw;
          continue;
        }
        for (auto& s : found) {
          for (const auto& in : s.inputs) {
            if (!ConceptSetContains(provided, in) && !queried.count(in)) next.insert(in);
          }
          auto it = fetched.find(s.id);
          if (it == fetched.end() || s.version > it->second.version) {
            fetched[s.id] = std::move(s);
          }
        }
      }
    }
    frontier.assign(next.begin(), next.end());
  }
  if (!any_reachable) {
    throw Error(ErrorCode::kRegistryUnreachable,
                "WSDB cannot answer and no registry is reachable",
                Json{{"registries", registries.size()}});
  }
  ++delta.registry_fetches;

  std::vector<CacheEntry> entries;
  entries.reserve(fetched.size());
  for (const auto& [id, s] : fetched) entries.push_back({s, now, options.wsdb_ttl_s});
  if (!entries.empty()) {
    try {
      replicas.WriteAll(entries, now);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kAllReplicasDown) throw;
    }
  }

  std::map<std::string, ServiceDescription> merged;
  for (auto& s : fresh) merged[s.id] = std::move(s);
  for (const auto& [id, s] : fetched) {
    auto it = merged.find(id);
    if (it == merged.end() || s.version >= it->second.version) merged[id] = s;
  }
  std::vector<ServiceDescription> catalog;
  for (auto& [id, s] : merged) catalog.push_back(std::move(s));

  result.candidates.plans = GenerateCandidates(catalog, request, options.limits);
  result.candidates.source = Source::kRegistry;
  result.candidates.catalog_snapshot = std::move(catalog);
  return result;
}

}  // namespace compositor::matchmaker
