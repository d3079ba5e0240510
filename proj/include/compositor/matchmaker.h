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

// The matching engine: interface-based candidate generation over a catalog,
// and the WSDB-first lookup with registry fallback.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "compositor/model.h"
#include "compositor/plan.h"
#include "compositor/registry.h"
#include "compositor/wsdb.h"

namespace compositor::matchmaker {

inline constexpr std::size_t kExhaustiveCatalogLimit = 12;

struct SearchLimits {
  // Longest producer chain explored below a desired concept. Also bounds the
  // registry fallback expansion.
  int max_depth = 4;
  int max_services = 6;
  // Enumerate every minimal plan when the catalog has at most
  // kExhaustiveCatalogLimit services (depth and size bounds are lifted).
  bool exhaustive = true;
  // Bounded mode only: producers tried per concept, cheapest inputs first.
  int branch_width = 3;
  // Bounded mode only: cap on distinct search states expanded.
  std::size_t max_states = 100000;

  bool operator==(const SearchLimits&) const = default;
};

// Throws kValidation when a bound is not positive.
void ValidateLimits(const SearchLimits& limits);

// Least fixed point of known ∪= outputs(s) for every s with inputs(s) ⊆ known.
ConceptSet ForwardClosure(std::span<const ServiceDescription> catalog,
                          const ConceptSet& provided);

// Minimal valid plans, layered and wired (aggregate unset), ordered by node
// count then sorted id list. Returns the single empty plan when
// desired ⊆ provided. Throws kNoComposition naming unreachable concepts.
std::vector<CompositionPlan> GenerateCandidates(
    std::span<const ServiceDescription> catalog, const Request& request,
    const SearchLimits& limits = {});

// Removing any single node breaks validity.
bool IsMinimal(std::span<const ServiceDescription> nodes, const ConceptSet& provided,
               const ConceptSet& desired);

enum class Source { kWsdb, kRegistry };

struct CandidateSet {
  std::vector<CompositionPlan> plans;
  Source source = Source::kWsdb;
  std::vector<ServiceDescription> catalog_snapshot;
};

struct LookupResult {
  CandidateSet candidates;
  std::optional<std::size_t> replica_used;
};

struct LookupOptions {
  SearchLimits limits;
  std::int64_t wsdb_ttl_s = wsdb::kDefaultTtlSeconds;
};

// WSDB first (fresh entries only); when that yields no composition or every
// replica is down, expands per-concept registry finds, caches what was
// fetched with the TTL, and retries. Throws kNoComposition or
// kRegistryUnreachable. Counters and MATCH_* stages are appended to `delta`
// as they happen, so a failed lookup still reports how far it got.
LookupResult Lookup(const Request& request, wsdb::ReplicaSet& replicas,
                    std::span<const std::shared_ptr<registry::RegistryClient>> registries,
                    SimTime now, const LookupOptions& options, Metrics& delta);

}  // namespace compositor::matchmaker
