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

#include "compositor/wsdb.h"

#include <fstream>
#include <mutex>

#include "json_util.h"

namespace compositor::wsdb {

namespace {

// Total order so that repair converges even on equal timestamps.
bool Newer(const CacheEntry& candidate, const CacheEntry& incumbent) {
  if (candidate.fetched_at != incumbent.fetched_at) {
    return candidate.fetched_at > incumbent.fetched_at;
  }
  if (candidate.ttl_s != incumbent.ttl_s) return candidate.ttl_s > incumbent.ttl_s;
  return SerializeService(candidate.service) > SerializeService(incumbent.service);
}

}  // namespace

Replica::Replica(std::string name, std::optional<std::filesystem::path> journal)
    : name_(std::move(name)), journal_(std::move(journal)) {
  if (!journal_ || !std::filesystem::exists(*journal_)) return;
  std::ifstream in(*journal_);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    CacheEntry entry;
    try {
      entry = CacheEntryFromJson(json_util::ParseText(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError,
                  journal_->string() + ":" + std::to_string(line_no) + ": " + e.what(),
                  Json{{"line", line_no}, {"detail", e.detail()}});
    }
    auto it = entries_.find(entry.service.id);
    if (it == entries_.end() || !Newer(it->second, entry)) {
      entries_[entry.service.id] = std::move(entry);
    }
  }
}

void Replica::CheckUp() const {
  if (!up_.load()) {
    throw Error(ErrorCode::kReplicaDown, "replica " + name_ + " is down",
                Json{{"replica", name_}});
  }
}

void Replica::Append(const CacheEntry& entry) {
  if (!journal_) return;
  std::ofstream out(*journal_, std::ios::app);
  out << CacheEntryToJson(entry).dump() << '\n';
}

void Replica::Put(std::span<const CacheEntry> entries, SimTime now) {
  CheckUp();
  for (const auto& e : entries) {
    if (e.fetched_at != now) {
      throw Error(ErrorCode::kValidation, "entry fetched_at must equal now",
                  Json{{"id", e.service.id}, {"fetched_at", e.fetched_at}, {"now", now}});
    }
    if (e.ttl_s <= 0) {
      throw Error(ErrorCode::kValidation, "ttl_s must be positive",
                  Json{{"id", e.service.id}});
    }
    ValidationReport report = ValidateService(e.service);
    if (!report.ok()) {
      throw Error(ErrorCode::kValidation, "invalid cached service " + e.service.id,
                  Json{{"violations", report.ToJson()}});
    }
  }
  std::unique_lock<std::shared_mutex> lock(mu_);
  for (const auto& e : entries) {
    CacheEntry stored = e;
    stored.service = Canonicalize(e.service);
    Append(stored);
    entries_[stored.service.id] = std::move(stored);
  }
}

std::vector<ServiceDescription> Replica::GetFresh(
    const std::optional<FindQuery>& query, SimTime now) const {
  CheckUp();
  std::shared_lock<std::shared_mutex> lock(mu_);
  std::vector<ServiceDescription> out;
  for (const auto& [id, entry] : entries_) {
    if (!entry.IsFresh(now)) continue;
    if (query && !query->Matches(entry.service)) continue;
    out.push_back(entry.service);
  }
  return out;
}

std::size_t Replica::EvictExpired(SimTime now) {
  CheckUp();
  std::unique_lock<std::shared_mutex> lock(mu_);
  return std::erase_if(entries_,
                       [&](const auto& kv) { return !kv.second.IsFresh(now); });
}

std::map<std::string, CacheEntry> Replica::Entries() const {
  std::shared_lock<std::shared_mutex> lock(mu_);
  return entries_;
}

std::optional<CacheEntry> Replica::Entry(const std::string& id) const {
  std::shared_lock<std::shared_mutex> lock(mu_);
  auto it = entries_.find(id);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void Replica::Absorb(const std::map<std::string, CacheEntry>& entries) {
  std::unique_lock<std::shared_mutex> lock(mu_);
  for (const auto& [id, entry] : entries) {
    auto it = entries_.find(id);
    if (it == entries_.end() || Newer(entry, it->second)) {
      Append(entry);
      entries_[id] = entry;
    }
  }
}

ReplicaSet::ReplicaSet(std::vector<std::shared_ptr<Replica>> replicas)
    : replicas_(std::move(replicas)) {
  if (replicas_.empty()) {
    throw Error(ErrorCode::kValidation, "a replica set needs at least one replica");
  }
}

ReplicaSet ReplicaSet::WithCount(std::size_t count) {
  std::vector<std::shared_ptr<Replica>> replicas;
  for (std::size_t i = 0; i < count; ++i) {
    replicas.push_back(std::make_shared<Replica>("wsdb-" + std::to_string(i + 1)));
  }
  return ReplicaSet(std::move(replicas));
}

ReadResult ReplicaSet::ReadFailover(const std::optional<FindQuery>& query,
                                    SimTime now) const {
  std::vector<bool> up;
  for (const auto& r : replicas_) up.push_back(r->health() == Health::kUp);
  for (std::size_t i = 0; i < replicas_.size(); ++i) {
    if (!up[i]) continue;
    try {
      return {replicas_[i]->GetFresh(query, now), i};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kReplicaDown) throw;
    }
  }
  throw Error(ErrorCode::kAllReplicasDown, "no WSDB replica is up");
}

std::vector<WriteStatus> ReplicaSet::WriteAll(std::span<const CacheEntry> entries,
                                              SimTime now) {
  std::vector<WriteStatus> status;
  std::size_t accepted = 0;
  for (const auto& r : replicas_) {
    if (r->health() != Health::kUp) {
      status.push_back(WriteStatus::kSkippedDown);
      continue;
    }
    try {
      r->Put(entries, now);
      status.push_back(WriteStatus::kAccepted);
      ++accepted;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kReplicaDown) throw;
      status.push_back(WriteStatus::kSkippedDown);
    }
  }
  if (accepted == 0) {
    throw Error(ErrorCode::kAllReplicasDown, "no WSDB replica accepted the write");
  }
  return status;
}

void ReplicaSet::SyncReplicas() {
  std::map<std::string, CacheEntry> merged;
  std::vector<bool> up;
  for (const auto& r : replicas_) up.push_back(r->health() == Health::kUp);
  for (std::size_t i = 0; i < replicas_.size(); ++i) {
    if (!up[i]) continue;
    for (auto& [id, entry] : replicas_[i]->Entries()) {
      auto it = merged.find(id);
      if (it == merged.end() || Newer(entry, it->second)) merged[id] = entry;
    }
  }
  for (std::size_t i = 0; i < replicas_.size(); ++i) {
    if (up[i]) replicas_[i]->Absorb(merged);
  }
}

}  // namespace compositor::wsdb
