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

#include "compositor/gateway.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include "compositor/composer.h"
#include "json_util.h"

namespace compositor::gateway {

namespace {

using json_util::Fail;

[[noreturn]] void ConfigFail(const std::string& key, const std::string& message,
                             const std::string& source) {
  throw Error(ErrorCode::kConfigError, key + ": " + message,
              Json{{"key", "/" + key}, {"source", source}});
}

std::string EnvName(std::string_view key) {
  std::string name = "COMPOSITOR_";
  for (char c : key) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return name;
}

template <typename Int>
Int ParseIntText(const std::string& key, const std::string& text, const std::string& source) {
  Int value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    ConfigFail(key, "expected an integer, got \"" + text + "\"", source);
  }
  return value;
}

double ParseDoubleText(const std::string& key, const std::string& text,
                       const std::string& source) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    ConfigFail(key, "expected a number, got \"" + text + "\"", source);
  }
  return value;
}

bool ParseBoolText(const std::string& key, const std::string& text, const std::string& source) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  ConfigFail(key, "expected true or false, got \"" + text + "\"", source);
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// One settable config field, readable from JSON or from an env string.
struct Field {
  std::string_view key;
  std::function<void(Config&, const Json&, const std::string&)> from_json;
  std::function<void(Config&, const std::string&, const std::string&)> from_text;
};

template <typename Int>
Field IntField(std::string_view key, std::function<Int&(Config&)> ref) {
  return {key,
          [key, ref](Config& c, const Json& v, const std::string& src) {
            if (!v.is_number_integer()) ConfigFail(std::string(key), "expected an integer", src);
            if (std::is_unsigned_v<Int> && v.get<std::int64_t>() < 0) {
              ConfigFail(std::string(key), "must be positive", src);
            }
            ref(c) = v.get<Int>();
          },
          [key, ref](Config& c, const std::string& t, const std::string& src) {
            ref(c) = ParseIntText<Int>(std::string(key), t, src);
          }};
}

Field DoubleField(std::string_view key, std::function<double&(Config&)> ref) {
  return {key,
          [key, ref](Config& c, const Json& v, const std::string& src) {
            if (!v.is_number()) ConfigFail(std::string(key), "expected a number", src);
            ref(c) = v.get<double>();
          },
          [key, ref](Config& c, const std::string& t, const std::string& src) {
            ref(c) = ParseDoubleText(std::string(key), t, src);
          }};
}

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      IntField<std::int64_t>("wsdb_ttl_s", [](Config& c) -> std::int64_t& { return c.wsdb_ttl_s; }),
      IntField<std::int64_t>("sync_interval_s",
                             [](Config& c) -> std::int64_t& { return c.sync_interval_s; }),
      IntField<std::size_t>("replica_count",
                            [](Config& c) -> std::size_t& { return c.replica_count; }),
      IntField<int>("max_depth", [](Config& c) -> int& { return c.limits.max_depth; }),
      IntField<int>("max_services", [](Config& c) -> int& { return c.limits.max_services; }),
      {"exhaustive",
       [](Config& c, const Json& v, const std::string& src) {
         if (!v.is_boolean()) ConfigFail("exhaustive", "expected a boolean", src);
         c.limits.exhaustive = v.get<bool>();
       },
       [](Config& c, const std::string& t, const std::string& src) {
         c.limits.exhaustive = ParseBoolText("exhaustive", t, src);
       }},
      IntField<int>("branch_width", [](Config& c) -> int& { return c.limits.branch_width; }),
      IntField<std::size_t>("max_states",
                            [](Config& c) -> std::size_t& { return c.limits.max_states; }),
      DoubleField("edge_cost_ms", [](Config& c) -> double& { return c.edge_cost_ms; }),
      DoubleField("coordinator_overhead_ms",
                  [](Config& c) -> double& { return c.coordinator_overhead_ms; }),
      {"registry_peers",
       [](Config& c, const Json& v, const std::string& src) {
         if (!v.is_array()) ConfigFail("registry_peers", "expected an array of addresses", src);
         c.registry_peers.clear();
         for (const auto& p : v) {
           if (!p.is_string()) ConfigFail("registry_peers", "expected an array of addresses", src);
           c.registry_peers.push_back(p.get<std::string>());
         }
       },
       [](Config& c, const std::string& t, const std::string&) {
         c.registry_peers = SplitList(t);
       }},
      DoubleField("throughput_max_rps",
                  [](Config& c) -> double& { return c.throughput_max_rps; }),
  };
  return fields;
}

void ValidateConfig(const Config& c) {
  const std::string src = "effective";
  if (c.wsdb_ttl_s <= 0) ConfigFail("wsdb_ttl_s", "must be positive", src);
  if (c.sync_interval_s <= 0) ConfigFail("sync_interval_s", "must be positive", src);
  if (c.replica_count == 0) ConfigFail("replica_count", "must be positive", src);
  if (c.limits.max_depth <= 0) ConfigFail("max_depth", "must be positive", src);
  if (c.limits.max_services <= 0) ConfigFail("max_services", "must be positive", src);
  if (c.limits.branch_width <= 0) ConfigFail("branch_width", "must be positive", src);
  if (c.limits.max_states == 0) ConfigFail("max_states", "must be positive", src);
  if (!(c.edge_cost_ms >= 0.0)) ConfigFail("edge_cost_ms", "must be non-negative", src);
  if (!(c.coordinator_overhead_ms >= 0.0)) {
    ConfigFail("coordinator_overhead_ms", "must be non-negative", src);
  }
  if (!(c.throughput_max_rps > 0.0)) ConfigFail("throughput_max_rps", "must be positive", src);
}

std::string ReadFile(const std::filesystem::path& path, ErrorCode code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(code, "cannot read " + path.string(), Json{{"path", path.string()}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json TraceToJson(const std::vector<Stage>& trace) {
  Json out = Json::array();
  for (Stage s : trace) out.push_back(std::string(StageName(s)));
  return out;
}

}  // namespace

Json Config::ToJson() const {
  return Json{{"wsdb_ttl_s", wsdb_ttl_s},
              {"sync_interval_s", sync_interval_s},
              {"replica_count", replica_count},
              {"max_depth", limits.max_depth},
              {"max_services", limits.max_services},
              {"exhaustive", limits.exhaustive},
              {"branch_width", limits.branch_width},
              {"max_states", limits.max_states},
              {"edge_cost_ms", edge_cost_ms},
              {"coordinator_overhead_ms", coordinator_overhead_ms},
              {"registry_peers", registry_peers},
              {"throughput_max_rps", throughput_max_rps}};
}

std::optional<std::string> ProcessGetenv(const char* name) {
  const char* value = std::getenv(name);
  if (!value) return std::nullopt;
  return std::string(value);
}

Config ConfigFromJson(const Json& doc, const Getenv& getenv) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kConfigError, "config must be a JSON object", Json{{"key", "/"}});
  }
  Config config;
  for (const auto& [key, value] : doc.items()) {
    auto it = std::find_if(Fields().begin(), Fields().end(),
                           [&](const Field& f) { return f.key == key; });
    if (it == Fields().end()) ConfigFail(key, "unknown key", "file");
    it->from_json(config, value, "file");
  }
  for (const auto& f : Fields()) {
    const std::string name = EnvName(f.key);
    if (auto text = getenv(name.c_str())) f.from_text(config, *text, name);
  }
  ValidateConfig(config);
  return config;
}

Config LoadConfig(const std::optional<std::filesystem::path>& file, const Getenv& getenv) {
  Json doc = Json::object();
  if (file) {
    const std::string text = ReadFile(*file, ErrorCode::kConfigError);
    if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
      try {
        doc = json_util::ParseText(text);
      } catch (const Error& e) {
        throw Error(ErrorCode::kConfigError, file->string() + ": " + e.message(), e.detail());
      }
    }
  }
  return ConfigFromJson(doc, getenv);
}

ParsedRequest RequestFromJson(const Json& doc) {
  json_util::RequireObject(doc, "");
  json_util::RejectUnknownKeys(doc, "", {"id", "provided", "desired", "category", "constraints",
                                         "weights", "bounds", "inputs"});
  ParsedRequest parsed;
  Request& r = parsed.request;
  if (doc.contains("id")) r.correlation_id = json_util::GetString(doc, "", "id");
  if (doc.contains("provided")) r.provided = json_util::GetStringArray(doc, "", "provided");
  r.desired = json_util::GetStringArray(doc, "", "desired");
  if (doc.contains("category")) r.category_requirement = json_util::GetString(doc, "", "category");

  if (doc.contains("constraints")) {
    const Json& list = doc["constraints"];
    if (!list.is_array()) Fail("/constraints", "expected array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "/constraints/" + std::to_string(i);
      const Json& c = list[i];
      json_util::RequireObject(c, path);
      json_util::RejectUnknownKeys(c, path, {"attribute", "op", "value"});
      Constraint constraint;
      constraint.attribute = json_util::GetString(c, path, "attribute");
      if (!IsValidToken(constraint.attribute)) Fail(path + "/attribute", "invalid token");
      const std::string op = json_util::GetString(c, path, "op");
      auto parsed_op = ParseCompareOp(op);
      if (!parsed_op) Fail(path + "/op", "operator must be one of <=, >=, =, !=");
      constraint.op = *parsed_op;
      const Json& v = json_util::RequireField(c, path, "value");
      if (v.is_number()) {
        constraint.literal = json_util::AsNumber(v, path + "/value");
      } else if (v.is_string()) {
        constraint.literal = v.get<std::string>();
      } else {
        Fail(path + "/value", "expected number or string");
      }
      r.constraints.push_back(std::move(constraint));
    }
  }

  if (doc.contains("weights")) {
    const Json& w = doc["weights"];
    json_util::RequireObject(w, "/weights");
    r.weights.fill(0.0);
    for (const auto& [key, value] : w.items()) {
      auto attr = ParseQosAttribute(key);
      if (!attr) Fail("/weights/" + key, "unknown QoS attribute");
      const std::size_t index = static_cast<std::size_t>(*attr);
      r.weights[index] = json_util::AsNumber(value, "/weights/" + key);
    }
  }

  if (doc.contains("bounds")) {
    const Json& b = doc["bounds"];
    json_util::RequireObject(b, "/bounds");
    json_util::RejectUnknownKeys(b, "/bounds",
                                 {"max_response_time_ms", "max_cost", "min_availability",
                                  "min_reliability", "min_throughput_rps"});
    auto get = [&](const char* key) -> std::optional<double> {
      if (!b.contains(key)) return std::nullopt;
      return json_util::GetNumber(b, "/bounds", key);
    };
    r.bounds.max_response_time_ms = get("max_response_time_ms");
    r.bounds.max_cost = get("max_cost");
    r.bounds.min_availability = get("min_availability");
    r.bounds.min_reliability = get("min_reliability");
    r.bounds.min_throughput_rps = get("min_throughput_rps");
  }

  if (doc.contains("inputs")) {
    const Json& in = doc["inputs"];
    json_util::RequireObject(in, "/inputs");
    for (const auto& [key, value] : in.items()) {
      if (value.is_number_integer()) {
        parsed.inputs[key] = value.get<std::int64_t>();
      } else if (value.is_string()) {
        parsed.inputs[key] = value.get<std::string>();
      } else {
        Fail("/inputs/" + key, "expected integer or string");
      }
    }
  }

  ValidationReport report = ValidateRequest(r);
  if (!report.ok()) {
    const Violation& first = report.violations.front();
    throw Error(ErrorCode::kValidation, first.field + ": " + first.rule,
                Json{{"violations", report.ToJson()}});
  }
  r.provided = NormalizeConcepts(std::move(r.provided));
  r.desired = NormalizeConcepts(std::move(r.desired));
  r.weights = NormalizeWeights(r.weights);
  for (const auto& c : r.provided) parsed.inputs.try_emplace(c, c);
  return parsed;
}

ParsedRequest ParseRequest(std::string_view text) {
  return RequestFromJson(json_util::ParseText(text));
}

std::string RenderResponse(const PipelineResult& result) {
  Json out = Json::object();
  if (result.correlation_id) out["request_id"] = *result.correlation_id;
  out["plan"] = PlanToJson(result.plan);
  out["aggregate_qos"] = QosToJson(result.plan.aggregate);
  if (result.execution) {
    Json outputs = Json::object();
    for (const auto& [concept_name, value] : result.execution->outputs) {
      outputs[concept_name] = execution::ValueToJson(value);
    }
    out["outputs"] = std::move(outputs);
    out["latency_ms"] = result.execution->latency_ms;
    out["mode"] = std::string(execution::ModeName(result.execution->mode));
  }
  out["metrics"] = Json{{"wsdb_hits", result.metrics.wsdb_hits},
                        {"registry_fetches", result.metrics.registry_fetches},
                        {"event_trace", TraceToJson(result.metrics.event_trace)}};
  return out.dump();
}

std::string RenderError(const Error& error, const std::optional<std::string>& correlation_id) {
  Json out = Json::object();
  if (correlation_id) out["request_id"] = *correlation_id;
  out["error"] = std::string(ErrorCodeName(error.code()));
  if (error.detail().is_object() && !error.detail().empty()) {
    out["detail"] = error.detail();
  } else {
    out["detail"] = Json{{"message", error.message()}};
  }
  return out.dump();
}

System::System(Config config, std::vector<std::shared_ptr<registry::RegistryClient>> registries)
    : config_(std::move(config)),
      registries_(std::move(registries)),
      replicas_(wsdb::ReplicaSet::WithCount(config_.replica_count)) {
  env_.edge_cost_ms = config_.edge_cost_ms;
  env_.coordinator_overhead_ms = config_.coordinator_overhead_ms;
}

Metrics System::totals() const {
  std::lock_guard<std::mutex> lock(totals_mu_);
  return totals_;
}

PipelineResult System::Run(const ParsedRequest& parsed, SimTime now,
                           const HandleOptions& options, Metrics& metrics) {
  const Request& request = parsed.request;
  const auto started = std::chrono::steady_clock::now();

  matchmaker::LookupOptions lookup_options;
  lookup_options.limits = config_.limits;
  lookup_options.wsdb_ttl_s = config_.wsdb_ttl_s;
  auto found = matchmaker::Lookup(request, replicas_, registries_, now, lookup_options, metrics);

  metrics.event_trace.push_back(Stage::kEvaluateInterface);
  auto plans = evaluator::FilterInterface(std::move(found.candidates.plans), request);
  if (plans.empty()) {
    throw Error(ErrorCode::kNoComposition, "no candidate passes the interface check",
                Json{{"unreachable", Json::array()}, {"stage", "interface"}});
  }

  metrics.event_trace.push_back(Stage::kEvaluateFunctionality);
  plans = evaluator::FilterFunctionality(std::move(plans), request);
  if (plans.empty()) {
    throw Error(ErrorCode::kNoFeasible, "no candidate satisfies the functionality requirements",
                Json{{"stage", "functionality"}});
  }
  for (auto& p : plans) p.aggregate = evaluator::AggregateQos(p, config_.throughput_max_rps);
  auto ranked = evaluator::Rank(
      evaluator::ScoreCandidates(std::move(plans), request.weights, request.bounds));

  metrics.event_trace.push_back(Stage::kCompose);
  std::vector<CompositionPlan> composed;
  composed.reserve(ranked.size());
  for (const auto& s : ranked) {
    composed.push_back(composer::Compose(s, request, config_.throughput_max_rps));
  }
  metrics.composition_time_ms +=
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
          .count();

  metrics.event_trace.push_back(Stage::kExecute);
  PipelineResult result;
  result.correlation_id = request.correlation_id;
  result.plan = execution::PlanHealthCheck(
      composed.front(), env_, std::span<const CompositionPlan>(composed).subspan(1));
  auto executed = execution::ExecutePlan(result.plan, parsed.inputs, env_, options.mode);
  if (options.execute) result.execution = std::move(executed);

  metrics.event_trace.push_back(Stage::kTranslateOut);
  result.metrics = metrics;
  return result;
}

HandleResult System::Handle(std::string_view text, SimTime now, const HandleOptions& options) {
  HandleResult out;
  out.metrics.event_trace.push_back(Stage::kTranslateIn);
  std::optional<std::string> correlation_id;
  try {
    ParsedRequest parsed;
    try {
      parsed = ParseRequest(text);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParseError, e.what(), Json{{"path", "/"}});
    }
    correlation_id = parsed.request.correlation_id;
    PipelineResult result = Run(parsed, now, options, out.metrics);
    out.response = RenderResponse(result);
    out.result = std::move(result);
  } catch (const Error& e) {
    out.error = e.code();
    out.response = RenderError(e, correlation_id);
  } catch (const std::exception& e) {
    Error wrapped(ErrorCode::kValidation, e.what());
    out.error = wrapped.code();
    out.response = RenderError(wrapped, correlation_id);
  }
  std::lock_guard<std::mutex> lock(totals_mu_);
  totals_.Merge(out.metrics);
  return out;
}

wire::Message HandleComposeMessage(System& system, const wire::Message& request, SimTime now) {
  try {
    if (request.op != wire::Op::kCompose) {
      throw Error(ErrorCode::kUsage, "expected a COMPOSE message",
                  Json{{"op", std::string(wire::OpName(request.op))}});
    }
    const Json& p = request.payload;
    json_util::RequireObject(p, "");
    json_util::RejectUnknownKeys(p, "", {"request", "execute", "mode", "now"});
    const Json& body = json_util::RequireField(p, "", "request");
    HandleOptions options;
    if (p.contains("execute")) options.execute = json_util::GetBool(p, "", "execute");
    if (p.contains("mode")) options.mode = execution::ParseMode(json_util::GetString(p, "", "mode"));
    if (p.contains("now")) now = json_util::GetInteger(p, "", "now");
    HandleResult handled = system.Handle(body.dump(), now, options);
    return {wire::Op::kCompose, request.req_id, Json::parse(handled.response)};
  } catch (const Error& e) {
    return wire::MakeError(request.req_id, e);
  }
}

namespace {

class ScenarioRunner {
 public:
  ScenarioRunner(const Json& doc, const Config& config) : config_(config) {
    std::vector<std::string> ids = {"R1"};
    if (doc.is_array()) {
      steps_ = doc;
    } else {
      json_util::RequireObject(doc, "");
      json_util::RejectUnknownKeys(doc, "", {"registries", "steps"});
      if (doc.contains("registries")) ids = json_util::GetStringArray(doc, "", "registries");
      steps_ = json_util::RequireField(doc, "", "steps");
      if (!steps_.is_array()) Fail("/steps", "expected array");
    }
    if (ids.empty()) Fail("/registries", "at least one registry is needed");
    std::vector<std::shared_ptr<registry::RegistryClient>> clients;
    for (const auto& id : ids) {
      if (registries_.count(id)) Fail("/registries", "duplicate registry id " + id);
      auto reg = std::make_shared<registry::Registry>(id, 0);
      registries_[id] = reg;
      ordered_.push_back(reg);
      clients.push_back(reg);
    }
    federation_ = std::make_unique<registry::Federation>(ordered_, config.sync_interval_s);
    system_ = std::make_unique<System>(config, std::move(clients));
  }

  ScenarioOutcome Run() {
    for (std::size_t i = 0; i < steps_.size(); ++i) Step(i, steps_[i]);
    return std::move(outcome_);
  }

 private:
  std::shared_ptr<registry::Registry> RegistryById(const std::string& path, const std::string& id) {
    auto it = registries_.find(id);
    if (it == registries_.end()) Fail(path, "unknown registry " + id);
    return it->second;
  }

  void Step(std::size_t index, const Json& step) {
    const std::string path = "/steps/" + std::to_string(index);
    json_util::RequireObject(step, path);
    const std::string type = json_util::GetString(step, path, "type");
    if (type == "advance") {
      json_util::RejectUnknownKeys(step, path, {"type", "seconds"});
      const std::int64_t seconds = json_util::GetInteger(step, path, "seconds");
      if (seconds < 0) Fail(path + "/seconds", "time only moves forward");
      now_ += seconds;
      federation_->Tick(now_);
    } else if (type == "fault" || type == "heal") {
      json_util::RejectUnknownKeys(step, path, {"type", "target", "id", "index"});
      SetHealth(path, step, type == "heal");
    } else if (type == "sync") {
      json_util::RejectUnknownKeys(step, path, {"type"});
      federation_->SyncNow(now_);
      system_->replicas().SyncReplicas();
    } else if (type == "register") {
      json_util::RejectUnknownKeys(step, path, {"type", "registry", "service", "services", "builtin"});
      auto reg = step.contains("registry")
                     ? RegistryById(path + "/registry", json_util::GetString(step, path, "registry"))
                     : ordered_.front();
      std::vector<ServiceDescription> services;
      if (step.contains("service")) services.push_back(ServiceFromJson(step["service"], path + "/service"));
      if (step.contains("services")) {
        const Json& list = step["services"];
        if (!list.is_array()) Fail(path + "/services", "expected array");
        for (std::size_t k = 0; k < list.size(); ++k) {
          services.push_back(ServiceFromJson(list[k], path + "/services/" + std::to_string(k)));
        }
      }
      if (step.contains("builtin")) {
        if (json_util::GetString(step, path, "builtin") != "CAT-1") {
          Fail(path + "/builtin", "the only builtin catalog is CAT-1");
        }
        for (auto& s : Cat1()) services.push_back(std::move(s));
      }
      for (const auto& s : services) reg->Register(s);
    } else if (type == "request") {
      json_util::RejectUnknownKeys(step, path, {"type", "request", "execute", "mode", "expect"});
      HandleOptions options;
      if (step.contains("execute")) options.execute = json_util::GetBool(step, path, "execute");
      if (step.contains("mode")) {
        options.mode = execution::ParseMode(json_util::GetString(step, path, "mode"));
      }
      const Json& body = json_util::RequireField(step, path, "request");
      HandleResult handled = system_->Handle(body.dump(), now_, options);
      Json line{{"step", index}, {"t", now_}, {"response", Json::parse(handled.response)},
                {"event_trace", TraceToJson(handled.metrics.event_trace)},
                {"wsdb_hits", handled.metrics.wsdb_hits},
                {"registry_fetches", handled.metrics.registry_fetches}};
      if (step.contains("expect")) {
        Json failed = CheckExpectations(path + "/expect", step["expect"], handled);
        if (!failed.empty()) {
          ++outcome_.failed_expectations;
          line["failed_expectations"] = std::move(failed);
        }
      }
      outcome_.lines.push_back(line.dump());
    } else {
      Fail(path + "/type", "unknown step type \"" + type + "\"");
    }
  }

  void SetHealth(const std::string& path, const Json& step, bool up) {
    const std::string target = json_util::GetString(step, path, "target");
    if (target == "service") {
      const std::string id = json_util::GetString(step, path, "id");
      if (up) {
        system_->env().faults.erase(id);
      } else {
        system_->env().faults.insert(id);
      }
    } else if (target == "replica") {
      const std::uint64_t k = json_util::GetUnsigned(step, path, "index");
      if (k == 0 || k > system_->replicas().size()) {
        Fail(path + "/index", "replica index is 1-based and within the replica count");
      }
      system_->replicas().replica(k - 1).SetHealth(up ? wsdb::Health::kUp : wsdb::Health::kDown);
    } else if (target == "registry") {
      RegistryById(path + "/id", json_util::GetString(step, path, "id"))->SetUp(up);
    } else {
      Fail(path + "/target", "target must be service, replica or registry");
    }
  }

  Json CheckExpectations(const std::string& path, const Json& expect, const HandleResult& got) {
    json_util::RequireObject(expect, path);
    json_util::RejectUnknownKeys(expect, path,
                                 {"error", "wsdb_hits", "registry_fetches", "event_trace", "plan"});
    Json failed = Json::array();
    if (expect.contains("error")) {
      const Json want = expect["error"];
      const Json have = got.error ? Json(std::string(ErrorCodeName(*got.error))) : Json(nullptr);
      if (want != have) failed.push_back("error");
    }
    if (expect.contains("wsdb_hits") &&
        json_util::GetUnsigned(expect, path, "wsdb_hits") != got.metrics.wsdb_hits) {
      failed.push_back("wsdb_hits");
    }
    if (expect.contains("registry_fetches") &&
        json_util::GetUnsigned(expect, path, "registry_fetches") != got.metrics.registry_fetches) {
      failed.push_back("registry_fetches");
    }
    if (expect.contains("event_trace") &&
        expect["event_trace"] != TraceToJson(got.metrics.event_trace)) {
      failed.push_back("event_trace");
    }
    if (expect.contains("plan")) {
      const auto want = json_util::GetStringArray(expect, path, "plan");
      if (!got.result || got.result->plan.NodeIds() != want) failed.push_back("plan");
    }
    return failed;
  }

  Config config_;
  Json steps_;
  std::map<std::string, std::shared_ptr<registry::Registry>> registries_;
  std::vector<std::shared_ptr<registry::Registry>> ordered_;
  std::unique_ptr<registry::Federation> federation_;
  std::unique_ptr<System> system_;
  SimTime now_ = 0;
  ScenarioOutcome outcome_;
};

}  // namespace

ScenarioOutcome RunScenario(const Json& doc, const Config& config) {
  return ScenarioRunner(doc, config).Run();
}

}  // namespace compositor::gateway
