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

#include "compositor/registry.h"

#include <algorithm>
#include <deque>
#include <numeric>

#include "json_util.h"

namespace compositor::registry {

bool Supersedes(const CatalogEntry& candidate, const CatalogEntry& incumbent) {
  if (candidate.service.version != incumbent.service.version) {
    return candidate.service.version > incumbent.service.version;
  }
  if (candidate.origin != incumbent.origin) {
    return candidate.origin < incumbent.origin;
  }
  // Same origin and version only diverge after a deregister/re-register;
  // byte order keeps the merge a total order.
  return SerializeService(candidate.service) < SerializeService(incumbent.service);
}

RegistryState RegisterService(RegistryState state, const ServiceDescription& desc) {
  ServiceDescription canonical = Canonicalize(desc);
  auto it = state.catalog.find(canonical.id);
  if (it != state.catalog.end() &&
      canonical.version <= it->second.service.version) {
    throw Error(ErrorCode::kVersionConflict,
                "service '" + canonical.id + "' already registered at version " +
                    std::to_string(it->second.service.version),
                Json{{"id", canonical.id},
                     {"existing_version", it->second.service.version},
                     {"offered_version", canonical.version}});
  }
  std::string id = canonical.id;
  state.catalog[id] = CatalogEntry{std::move(canonical), state.registry_id};
  return state;
}

RegistryState DeregisterService(RegistryState state, std::string_view id) {
  auto it = state.catalog.find(std::string(id));
  if (it == state.catalog.end()) {
    throw Error(ErrorCode::kNotFound, "service '" + std::string(id) + "' not found",
                Json{{"id", id}});
  }
  state.catalog.erase(it);
  return state;
}

std::vector<ServiceDescription> FindServices(const RegistryState& state,
                                             const FindQuery& query) {
  if (query.empty()) {
    throw Error(ErrorCode::kValidation, "find query needs at least one criterion");
  }
  std::vector<ServiceDescription> out;
  if (query.id) {
    auto it = state.catalog.find(*query.id);
    if (it != state.catalog.end() && query.Matches(it->second.service)) {
      out.push_back(it->second.service);
    }
    return out;
  }
  for (const auto& [id, entry] : state.catalog) {
    if (query.Matches(entry.service)) out.push_back(entry.service);
  }
  return out;
}

RegistryState Pull(RegistryState self, const RegistryState& peer) {
  for (const auto& [id, entry] : peer.catalog) {
    auto it = self.catalog.find(id);
    if (it == self.catalog.end()) {
      self.catalog.emplace(id, entry);
    } else if (Supersedes(entry, it->second)) {
      it->second = entry;
    }
  }
  return self;
}

std::pair<RegistryState, RegistryState> SyncMerge(RegistryState a,
                                                  RegistryState b) {
  RegistryState merged_a = Pull(std::move(a), b);
  b.catalog = merged_a.catalog;
  return {std::move(merged_a), std::move(b)};
}

void SyncRound(std::vector<RegistryState>& states,
               const std::vector<std::pair<std::size_t, std::size_t>>& links) {
  const std::size_t n = states.size();
  if (n <= 1) return;
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (const auto& [u, v] : links) {
    if (u >= n || v >= n) {
      throw Error(ErrorCode::kValidation, "sync link out of range");
    }
    adjacency[u].push_back(v);
    adjacency[v].push_back(u);
  }
  for (auto& list : adjacency) std::sort(list.begin(), list.end());

  std::vector<std::size_t> order;
  std::vector<std::size_t> parent(n, n);
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    order.push_back(u);
    for (std::size_t v : adjacency[u]) {
      if (!seen[v]) {
        seen[v] = true;
        parent[v] = u;
        queue.push_back(v);
      }
    }
  }
  if (order.size() != n) {
    throw Error(ErrorCode::kValidation, "sync topology is not connected");
  }
  auto merge = [&](std::size_t u, std::size_t v) {
    auto [a, b] = SyncMerge(std::move(states[u]), std::move(states[v]));
    states[u] = std::move(a);
    states[v] = std::move(b);
  };
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (parent[*it] != n) merge(*it, parent[*it]);
  }
  for (std::size_t u : order) {
    if (parent[u] != n) merge(parent[u], u);
  }
}

Json CatalogEntryToJson(const CatalogEntry& entry) {
  Json out = Json::object();
  out["service"] = ServiceToJson(entry.service);
  out["origin"] = entry.origin;
  return out;
}

CatalogEntry CatalogEntryFromJson(const Json& doc) {
  using namespace json_util;
  RequireObject(doc, "");
  RejectUnknownKeys(doc, "", {"service", "origin"});
  return {ServiceFromJson(RequireField(doc, "", "service"), "/service"),
          GetString(doc, "", "origin")};
}

Json StateToJson(const RegistryState& state) {
  Json entries = Json::array();
  for (const auto& [id, entry] : state.catalog) {
    entries.push_back(CatalogEntryToJson(entry));
  }
  Json out = Json::object();
  out["registry_id"] = state.registry_id;
  out["last_sync_at"] = state.last_sync_at;
  out["entries"] = std::move(entries);
  return out;
}

RegistryState StateFromJson(const Json& doc) {
  using namespace json_util;
  RequireObject(doc, "");
  RegistryState state;
  state.registry_id = GetString(doc, "", "registry_id");
  state.last_sync_at = GetInteger(doc, "", "last_sync_at");
  const Json& entries = RequireField(doc, "", "entries");
  if (!entries.is_array()) Fail("/entries", "expected array");
  for (const auto& e : entries) {
    CatalogEntry entry = CatalogEntryFromJson(e);
    std::string id = entry.service.id;
    state.catalog[id] = std::move(entry);
  }
  return state;
}

Registry::Registry(std::string registry_id, SimTime created_at)
    : id_(std::move(registry_id)) {
  RegistryState state;
  state.registry_id = id_;
  state.last_sync_at = created_at;
  state_ = std::make_shared<const RegistryState>(std::move(state));
}

void Registry::CheckUp() const {
  if (!up()) {
    throw Error(ErrorCode::kRegistryUnreachable, "registry " + id_ + " is down",
                Json{{"registry", id_}});
  }
}

template <typename Fn>
void Registry::Mutate(Fn&& fn) {
  std::lock_guard<std::mutex> write_lock(write_mu_);
  auto next = std::make_shared<const RegistryState>(fn(*Snapshot()));
  std::lock_guard<std::mutex> swap_lock(snapshot_mu_);
  state_ = std::move(next);
}

void Registry::Register(const ServiceDescription& desc) {
  CheckUp();
  Mutate([&](const RegistryState& s) { return RegisterService(s, desc); });
}

void Registry::Deregister(std::string_view id) {
  CheckUp();
  Mutate([&](const RegistryState& s) { return DeregisterService(s, id); });
}

std::vector<ServiceDescription> Registry::Find(const FindQuery& query) {
  CheckUp();
  return FindServices(*Snapshot(), query);
}

std::shared_ptr<const RegistryState> Registry::Snapshot() const {
  std::lock_guard<std::mutex> lock(snapshot_mu_);
  return state_;
}

void Registry::PullFrom(const RegistryState& peer, SimTime now) {
  Mutate([&](const RegistryState& s) {
    RegistryState next = registry::Pull(s, peer);
    next.last_sync_at = now;
    return next;
  });
}

Federation::Federation(std::vector<std::shared_ptr<Registry>> members,
                       SimTime sync_interval_s)
    : members_(std::move(members)), interval_(sync_interval_s) {
  if (interval_ <= 0) {
    throw Error(ErrorCode::kValidation, "sync interval must be positive");
  }
  peers_.resize(members_.size());
  for (std::size_t i = 0; i < members_.size(); ++i) {
    for (std::size_t j = 0; j < members_.size(); ++j) {
      if (i != j) peers_[i].push_back(j);
    }
  }
}

void Federation::SetPeers(std::size_t index, std::vector<std::size_t> peers) {
  for (std::size_t p : peers) {
    if (p >= members_.size() || p == index) {
      throw Error(ErrorCode::kValidation, "invalid peer index");
    }
  }
  peers_.at(index) = std::move(peers);
}

void Federation::SyncMember(std::size_t index, SimTime now) {
  Registry& self = *members_[index];
  for (std::size_t p : peers_[index]) {
    const Registry& peer = *members_[p];
    if (!peer.up()) continue;
    self.PullFrom(*peer.Snapshot(), now);
  }
  // Also stamps members with no reachable peers.
  self.PullFrom(RegistryState{}, now);
}

std::size_t Federation::Tick(SimTime now) {
  std::size_t synced = 0;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (!members_[i]->up()) continue;
    if (now - members_[i]->Snapshot()->last_sync_at >= interval_) {
      SyncMember(i, now);
      ++synced;
    }
  }
  return synced;
}

void Federation::SyncNow(SimTime now) {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (members_[i]->up()) SyncMember(i, now);
  }
}

}  // namespace compositor::registry
