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

// Provider-facing service registries and their periodic synchronization.
//
// The pure operations below work on RegistryState values. Registry wraps a
// state behind a copy-on-write pointer so readers always see either the
// pre-mutation or post-mutation catalog, never a partial merge.

#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "compositor/model.h"

namespace compositor::registry {

// `origin` is the registry the service was registered at; it breaks ties
// between equal versions during sync.
struct CatalogEntry {
  ServiceDescription service;
  std::string origin;

  bool operator==(const CatalogEntry&) const = default;
};

struct RegistryState {
  std::string registry_id;
  std::map<std::string, CatalogEntry> catalog;
  SimTime last_sync_at = 0;

  bool operator==(const RegistryState&) const = default;
};

// Higher version wins; equal versions go to the lexicographically smaller
// origin registry id.
bool Supersedes(const CatalogEntry& candidate, const CatalogEntry& incumbent);

// Throws kValidation for an invalid desc, kVersionConflict when the catalog
// already holds this id at an equal or higher version.
RegistryState RegisterService(RegistryState state, const ServiceDescription& desc);

// Throws kNotFound when `id` is absent.
RegistryState DeregisterService(RegistryState state, std::string_view id);

// Entries matching every criterion, sorted by id. Throws kValidation on an
// empty query.
std::vector<ServiceDescription> FindServices(const RegistryState& state,
                                             const FindQuery& query);

// Both results hold the id-wise union, resolved with Supersedes.
std::pair<RegistryState, RegistryState> SyncMerge(RegistryState a,
                                                  RegistryState b);

// One-sided merge: `self` absorbs `peer`.
RegistryState Pull(RegistryState self, const RegistryState& peer);

// One anti-entropy round over an undirected topology: merges along a BFS
// spanning tree leaves-to-root, then root-to-leaves, so every state in a
// connected topology ends identical. Throws kValidation if disconnected.
void SyncRound(std::vector<RegistryState>& states,
               const std::vector<std::pair<std::size_t, std::size_t>>& links);

Json CatalogEntryToJson(const CatalogEntry& entry);
CatalogEntry CatalogEntryFromJson(const Json& doc);
Json StateToJson(const RegistryState& state);
RegistryState StateFromJson(const Json& doc);

// What the matching engine and CLI talk to: an in-process registry or a
// remote one over the framed protocol. Unreachable registries throw
// kRegistryUnreachable.
class RegistryClient {
 public:
  virtual ~RegistryClient() = default;

  virtual std::string id() const = 0;
  virtual void Register(const ServiceDescription& desc) = 0;
  virtual void Deregister(std::string_view id) = 0;
  virtual std::vector<ServiceDescription> Find(const FindQuery& query) = 0;
};

class Registry : public RegistryClient {
 public:
  explicit Registry(std::string registry_id, SimTime created_at = 0);

  std::string id() const override { return id_; }
  void Register(const ServiceDescription& desc) override;
  void Deregister(std::string_view id) override;
  std::vector<ServiceDescription> Find(const FindQuery& query) override;

  std::shared_ptr<const RegistryState> Snapshot() const;
  void PullFrom(const RegistryState& peer, SimTime now);

  // Fault injection: a down registry rejects every call.
  void SetUp(bool up) { up_.store(up); }
  bool up() const { return up_.load(); }

 private:
  void CheckUp() const;
  template <typename Fn>
  void Mutate(Fn&& fn);

  const std::string id_;
  std::atomic<bool> up_{true};
  std::mutex write_mu_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const RegistryState> state_;
};

// Simulated-time scheduler: each member pulls from each of its UP peers once
// `sync_interval_s` has elapsed since its last sync.
class Federation {
 public:
  Federation(std::vector<std::shared_ptr<Registry>> members,
             SimTime sync_interval_s);

  // Restricts member `index` to pull only from `peers` (default: everyone).
  void SetPeers(std::size_t index, std::vector<std::size_t> peers);

  // Returns the number of member syncs performed.
  std::size_t Tick(SimTime now);
  // Syncs every UP member regardless of schedule.
  void SyncNow(SimTime now);

  const std::vector<std::shared_ptr<Registry>>& members() const {
    return members_;
  }
  SimTime sync_interval_s() const { return interval_; }

 private:
  void SyncMember(std::size_t index, SimTime now);

  std::vector<std::shared_ptr<Registry>> members_;
  std::vector<std::vector<std::size_t>> peers_;
  SimTime interval_;
};

}  // namespace compositor::registry
