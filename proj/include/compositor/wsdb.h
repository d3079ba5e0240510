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

// The web services database: a TTL-aged cache of service descriptions kept
// on several replicas, read primary-first with failover.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "compositor/model.h"

namespace compositor::wsdb {

inline constexpr std::int64_t kDefaultTtlSeconds = 300;

enum class Health { kUp, kDown };

class Replica {
 public:
  // With a journal path, existing lines are replayed (newest fetched_at wins
  // per id) and every put is appended.
  explicit Replica(std::string name,
                   std::optional<std::filesystem::path> journal = std::nullopt);

  const std::string& name() const { return name_; }
  Health health() const { return up_.load() ? Health::kUp : Health::kDown; }
  void SetHealth(Health health) { up_.store(health == Health::kUp); }

  // Every entry must carry fetched_at == now. Overwrites per service id.
  // Throws kReplicaDown, kValidation.
  void Put(std::span<const CacheEntry> entries, SimTime now);

  // FRESH entries matching `query` (all FRESH entries when nullopt), sorted
  // by id. Throws kReplicaDown.
  std::vector<ServiceDescription> GetFresh(const std::optional<FindQuery>& query,
                                           SimTime now) const;

  // Drops STALE entries; returns how many. Throws kReplicaDown.
  std::size_t EvictExpired(SimTime now);

  // Raw contents regardless of health or freshness.
  std::map<std::string, CacheEntry> Entries() const;
  std::optional<CacheEntry> Entry(const std::string& id) const;

  // Newest-fetched_at-wins merge used by replica repair.
  void Absorb(const std::map<std::string, CacheEntry>& entries);

 private:
  void CheckUp() const;
  void Append(const CacheEntry& entry);

  std::string name_;
  std::optional<std::filesystem::path> journal_;
  std::atomic<bool> up_{true};
  mutable std::shared_mutex mu_;
  std::map<std::string, CacheEntry> entries_;
};

struct ReadResult {
  std::vector<ServiceDescription> services;
  std::size_t replica_used = 0;
};

enum class WriteStatus { kAccepted, kSkippedDown };

class ReplicaSet {
 public:
  // Failover order is the order given. Throws kValidation when empty.
  explicit ReplicaSet(std::vector<std::shared_ptr<Replica>> replicas);
  static ReplicaSet WithCount(std::size_t count);

  std::size_t size() const { return replicas_.size(); }
  Replica& replica(std::size_t index) { return *replicas_.at(index); }
  const Replica& replica(std::size_t index) const { return *replicas_.at(index); }

  // GetFresh from the first UP replica. Throws kAllReplicasDown.
  ReadResult ReadFailover(const std::optional<FindQuery>& query, SimTime now) const;

  // Applies to every UP replica. Throws kAllReplicasDown if none accepted.
  std::vector<WriteStatus> WriteAll(std::span<const CacheEntry> entries, SimTime now);

  // Brings every UP replica to the id-wise union, newest fetched_at winning.
  void SyncReplicas();

 private:
  std::vector<std::shared_ptr<Replica>> replicas_;
};

}  // namespace compositor::wsdb
