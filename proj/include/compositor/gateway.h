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

// Request translation, the end-to-end pipeline, configuration, scenario
// scripts and the command line.

#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compositor/evaluator.h"
#include "compositor/execution.h"
#include "compositor/matchmaker.h"
#include "compositor/model.h"
#include "compositor/plan.h"
#include "compositor/registry.h"
#include "compositor/wire.h"
#include "compositor/wsdb.h"

namespace compositor::gateway {

struct Config {
  std::int64_t wsdb_ttl_s = wsdb::kDefaultTtlSeconds;
  std::int64_t sync_interval_s = 60;
  std::size_t replica_count = 3;
  matchmaker::SearchLimits limits;
  double edge_cost_ms = 5.0;
  double coordinator_overhead_ms = 0.0;
  std::vector<std::string> registry_peers;
  double throughput_max_rps = evaluator::kDefaultThroughputMax;

  Json ToJson() const;
  bool operator==(const Config&) const = default;
};

using Getenv = std::function<std::optional<std::string>(const char* name)>;

std::optional<std::string> ProcessGetenv(const char* name);

// Defaults, then the JSON object, then COMPOSITOR_<KEY> variables. Unknown
// keys and out-of-range values throw kConfigError naming the key.
Config ConfigFromJson(const Json& doc, const Getenv& getenv = ProcessGetenv);
Config LoadConfig(const std::optional<std::filesystem::path>& file,
                  const Getenv& getenv = ProcessGetenv);

struct ParsedRequest {
  Request request;
  // Values for provided concepts; defaults to each concept's own name.
  execution::ValueMap inputs;
};

// Throws kParseError (with the field path) or kValidation.
ParsedRequest ParseRequest(std::string_view text);
ParsedRequest RequestFromJson(const Json& doc);

struct PipelineResult {
  std::optional<std::string> correlation_id;
  CompositionPlan plan;
  std::optional<execution::ExecutionResult> execution;
  Metrics metrics;
};

// Canonical JSON text. Wall-clock timings and the replica that served the
// read are left out so that equal inputs give equal bytes.
std::string RenderResponse(const PipelineResult& result);
std::string RenderError(const Error& error,
                        const std::optional<std::string>& correlation_id = std::nullopt);

struct HandleOptions {
  bool execute = false;
  execution::Mode mode = execution::Mode::kDecentralized;
};

struct HandleResult {
  std::string response;
  Metrics metrics;
  std::optional<ErrorCode> error;
  std::optional<PipelineResult> result;
};

// Owns the WSDB replicas and the simulated service environment, and talks
// to whatever registries it is given.
class System {
 public:
  System(Config config, std::vector<std::shared_ptr<registry::RegistryClient>> registries);

  const Config& config() const { return config_; }
  wsdb::ReplicaSet& replicas() { return replicas_; }
  // Not synchronized; adjust between requests.
  execution::SimEnv& env() { return env_; }
  std::vector<std::shared_ptr<registry::RegistryClient>>& registries() {
    return registries_;
  }
  Metrics totals() const;

  // TRANSLATE_IN, MATCH_WSDB, [MATCH_REGISTRY], EVALUATE_INTERFACE,
  // EVALUATE_FUNCTIONALITY, COMPOSE, EXECUTE, TRANSLATE_OUT. Never throws on
  // bad input; failures come back as rendered errors.
  HandleResult Handle(std::string_view text, SimTime now, const HandleOptions& options = {});

 private:
  PipelineResult Run(const ParsedRequest& parsed, SimTime now, const HandleOptions& options,
                     Metrics& metrics);

  Config config_;
  std::vector<std::shared_ptr<registry::RegistryClient>> registries_;
  wsdb::ReplicaSet replicas_;
  execution::SimEnv env_;
  mutable std::mutex totals_mu_;
  Metrics totals_;
};

// COMPOSE frames: payload {"request": {...}, "execute"?: bool, "mode"?: str,
// "now"?: int}; the reply payload is the rendered response.
wire::Message HandleComposeMessage(System& system, const wire::Message& request,
                                   SimTime now);

struct ScenarioOutcome {
  std::vector<std::string> lines;  // one JSON line per request step
  std::size_t failed_expectations = 0;
};

// Either an array of steps or {"registries": [ids], "steps": [...]}.
// Step types: advance, fault, heal, request, sync, register.
ScenarioOutcome RunScenario(const Json& doc, const Config& config);

// Exit status 0 on success, 1 on a domain error, 2 on a usage error.
int RunCli(std::span<const std::string> args, std::ostream& out, std::ostream& err,
           const Getenv& getenv = ProcessGetenv);

}  // namespace compositor::gateway
