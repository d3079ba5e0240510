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

#include "compositor/model.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <utility>

#include "json_util.h"

namespace compositor {

namespace {

bool IsSpaceOrControl(char c) {
  auto u = static_cast<unsigned char>(c);
  return u <= 0x20 || u == 0x7f;
}

bool IsReservedId(std::string_view id) { return id == "SOURCE" || id == "SINK"; }

Json AttributeValueToJson(const AttributeValue& value) {
  if (const double* d = std::get_if<double>(&value)) return Json(*d);
  return Json(std::get<std::string>(value));
}

AttributeValue AttributeValueFromJson(const Json& value, const std::string& path) {
  if (value.is_number()) return json_util::AsNumber(value, path);
  if (value.is_string()) return value.get<std::string>();
  json_util::Fail(path, "expected number or string");
}

}  // namespace

bool IsValidConcept(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
           c == '/';
  });
}

bool IsValidToken(std::string_view token) {
  return !token.empty() &&
         std::none_of(token.begin(), token.end(), IsSpaceOrControl);
}

bool IsValidCategoryPath(std::string_view path) {
  if (path.empty()) return false;
  std::size_t start = 0;
  while (true) {
    std::size_t slash = path.find('/', start);
    std::string_view segment =
        path.substr(start, slash == std::string_view::npos ? path.npos
                                                           : slash - start);
    if (!IsValidToken(segment)) return false;
    if (slash == std::string_view::npos) return true;
    start = slash + 1;
  }
}

bool CategoryHasPrefix(std::string_view category, std::string_view prefix) {
  if (prefix.empty()) return true;
  if (category.size() < prefix.size()) return false;
  if (category.substr(0, prefix.size()) != prefix) return false;
  return category.size() == prefix.size() || category[prefix.size()] == '/';
}

ConceptSet NormalizeConcepts(ConceptSet concepts) {
  std::sort(concepts.begin(), concepts.end());
  concepts.erase(std::unique(concepts.begin(), concepts.end()), concepts.end());
  return concepts;
}

bool ConceptSetContains(const ConceptSet& sorted, std::string_view name) {
  return std::binary_search(sorted.begin(), sorted.end(), name);
}

std::string_view QosAttributeName(QosAttribute attribute) {
  switch (attribute) {
    case QosAttribute::kResponseTime: return "response_time_ms";
    case QosAttribute::kCost: return "cost";
    case QosAttribute::kAvailability: return "availability";
    case QosAttribute::kReliability: return "reliability";
    case QosAttribute::kThroughput: return "throughput_rps";
  }
  return "";
}

std::optional<QosAttribute> ParseQosAttribute(std::string_view name) {
  for (QosAttribute a : kQosAttributes) {
    if (QosAttributeName(a) == name) return a;
  }
  return std::nullopt;
}

bool LowerIsBetter(QosAttribute attribute) {
  return attribute == QosAttribute::kResponseTime ||
         attribute == QosAttribute::kCost;
}

double QoSVector::Get(QosAttribute attribute) const {
  switch (attribute) {
    case QosAttribute::kResponseTime: return response_time_ms;
    case QosAttribute::kCost: return cost;
    case QosAttribute::kAvailability: return availability;
    case QosAttribute::kReliability: return reliability;
    case QosAttribute::kThroughput: return throughput_rps;
  }
  return 0.0;
}

void QoSVector::Set(QosAttribute attribute, double value) {
  switch (attribute) {
    case QosAttribute::kResponseTime: response_time_ms = value; break;
    case QosAttribute::kCost: cost = value; break;
    case QosAttribute::kAvailability: availability = value; break;
    case QosAttribute::kReliability: reliability = value; break;
    case QosAttribute::kThroughput: throughput_rps = value; break;
  }
}

std::string_view CompareOpSymbol(CompareOp op) {
  switch (op) {
    case CompareOp::kLessEqual: return "<=";
    case CompareOp::kGreaterEqual: return ">=";
    case CompareOp::kEqual: return "=";
    case CompareOp::kNotEqual: return "!=";
  }
  return "";
}

std::optional<CompareOp> ParseCompareOp(std::string_view symbol) {
  for (CompareOp op : {CompareOp::kLessEqual, CompareOp::kGreaterEqual,
                       CompareOp::kEqual, CompareOp::kNotEqual}) {
    if (CompareOpSymbol(op) == symbol) return op;
  }
  return std::nullopt;
}

bool Constraint::IsWellFormed() const {
  if (!IsValidToken(attribute)) return false;
  if (op == CompareOp::kLessEqual || op == CompareOp::kGreaterEqual) {
    return std::holds_alternative<double>(literal);
  }
  return true;
}

bool Constraint::SatisfiedBy(const AttributeValue& value) const {
  if (value.index() != literal.index()) return false;
  if (const double* lhs = std::get_if<double>(&value)) {
    double rhs = std::get<double>(literal);
    switch (op) {
      case CompareOp::kLessEqual: return *lhs <= rhs;
      case CompareOp::kGreaterEqual: return *lhs >= rhs;
      case CompareOp::kEqual: return *lhs == rhs;
      case CompareOp::kNotEqual: return *lhs != rhs;
    }
    return false;
  }
  const auto& lhs = std::get<std::string>(value);
  const auto& rhs = std::get<std::string>(literal);
  switch (op) {
    case CompareOp::kEqual: return lhs == rhs;
    case CompareOp::kNotEqual: return lhs != rhs;
    default: return false;
  }
}

bool ValidationReport::Has(std::string_view rule) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.rule == rule; });
}

Json ValidationReport::ToJson() const {
  Json out = Json::array();
  for (const auto& v : violations) {
    out.push_back(Json{{"field", v.field}, {"rule", v.rule}});
  }
  return out;
}

ValidationReport ValidateService(const ServiceDescription& desc) {
  ValidationReport report;
  auto add = [&](std::string field, std::string rule) {
    report.violations.push_back({std::move(field), std::move(rule)});
  };
  if (!IsValidToken(desc.id)) add("/id", "id must be a non-empty token");
  if (IsReservedId(desc.id)) add("/id", "id is reserved");
  for (std::size_t i = 0; i < desc.inputs.size(); ++i) {
    if (!IsValidConcept(desc.inputs[i])) {
      add("/inputs/" + std::to_string(i), "invalid concept name");
    }
  }
  if (desc.outputs.empty()) add("/outputs", "outputs non-empty");
  for (std::size_t i = 0; i < desc.outputs.size(); ++i) {
    if (!IsValidConcept(desc.outputs[i])) {
      add("/outputs/" + std::to_string(i), "invalid concept name");
    }
  }
  if (!IsValidCategoryPath(desc.functionality.category)) {
    add("/functionality/category", "category segments non-empty");
  }
  for (const auto& [key, value] : desc.functionality.attributes) {
    if (!IsValidToken(key)) {
      add("/functionality/attributes/" + key, "attribute key must be a token");
    }
    if (const double* d = std::get_if<double>(&value); d && !std::isfinite(*d)) {
      add("/functionality/attributes/" + key, "attribute value not finite");
    }
  }
  const QoSVector& q = desc.qos;
  if (!(std::isfinite(q.response_time_ms) && q.response_time_ms >= 0.0)) {
    add("/qos/response_time_ms", "response_time_ms ∉ [0,∞)");
  }
  if (!(std::isfinite(q.cost) && q.cost >= 0.0)) {
    add("/qos/cost", "cost ∉ [0,∞)");
  }
  if (!(q.availability > 0.0 && q.availability <= 1.0)) {
    add("/qos/availability", "availability ∉ (0,1]");
  }
  if (!(q.reliability > 0.0 && q.reliability <= 1.0)) {
    add("/qos/reliability", "reliability ∉ (0,1]");
  }
  if (!(std::isfinite(q.throughput_rps) && q.throughput_rps > 0.0)) {
    add("/qos/throughput_rps", "throughput_rps ∉ (0,∞)");
  }
  if (!IsValidToken(desc.endpoint)) {
    add("/endpoint", "endpoint must be a non-empty token");
  }
  return report;
}

ServiceDescription Canonicalize(ServiceDescription desc) {
  ValidationReport report = ValidateService(desc);
  if (!report.ok()) {
    throw Error(ErrorCode::kValidation, "invalid service '" + desc.id + "'",
                Json{{"violations", report.ToJson()}});
  }
  desc.inputs = NormalizeConcepts(std::move(desc.inputs));
  desc.outputs = NormalizeConcepts(std::move(desc.outputs));
  return desc;
}

Json QosToJson(const QoSVector& qos) {
  Json out = Json::object();
  for (QosAttribute a : kQosAttributes) {
    out[std::string(QosAttributeName(a))] = qos.Get(a);
  }
  return out;
}

QoSVector QosFromJson(const Json& doc, const std::string& path) {
  json_util::RequireObject(doc, path);
  json_util::RejectUnknownKeys(doc, path,
                               {"response_time_ms", "cost", "availability",
                                "reliability", "throughput_rps"});
  QoSVector qos;
  for (QosAttribute a : kQosAttributes) {
    qos.Set(a, json_util::GetNumber(doc, path, QosAttributeName(a)));
  }
  return qos;
}

Json ServiceToJson(const ServiceDescription& desc) {
  Json attributes = Json::object();
  for (const auto& [key, value] : desc.functionality.attributes) {
    attributes[key] = AttributeValueToJson(value);
  }
  Json out = Json::object();
  out["id"] = desc.id;
  out["name"] = desc.name;
  out["inputs"] = NormalizeConcepts(desc.inputs);
  out["outputs"] = NormalizeConcepts(desc.outputs);
  out["functionality"] = Json{{"category", desc.functionality.category},
                              {"attributes", std::move(attributes)}};
  out["qos"] = QosToJson(desc.qos);
  out["endpoint"] = desc.endpoint;
  out["version"] = desc.version;
  return out;
}

ServiceDescription ServiceFromJson(const Json& doc, const std::string& path) {
  using namespace json_util;
  RequireObject(doc, path);
  RejectUnknownKeys(doc, path,
                    {"id", "name", "inputs", "outputs", "functionality", "qos",
                     "endpoint", "version"});
  ServiceDescription desc;
  desc.id = GetString(doc, path, "id");
  desc.name = GetString(doc, path, "name");
  desc.inputs = GetStringArray(doc, path, "inputs");
  desc.outputs = GetStringArray(doc, path, "outputs");

  const std::string fpath = path + "/functionality";
  const Json& functionality = RequireField(doc, path, "functionality");
  RequireObject(functionality, fpath);
  RejectUnknownKeys(functionality, fpath, {"category", "attributes"});
  desc.functionality.category = GetString(functionality, fpath, "category");
  const Json& attributes = RequireField(functionality, fpath, "attributes");
  RequireObject(attributes, fpath + "/attributes");
  for (const auto& [key, value] : attributes.items()) {
    desc.functionality.attributes[key] =
        AttributeValueFromJson(value, fpath + "/attributes/" + key);
  }

  desc.qos = QosFromJson(RequireField(doc, path, "qos"), path + "/qos");
  desc.endpoint = GetString(doc, path, "endpoint");
  desc.version = GetUnsigned(doc, path, "version");

  ValidationReport report = ValidateService(desc);
  if (!report.ok()) {
    const Violation& first = report.violations.front();
    throw Error(ErrorCode::kParseError, path + first.field + ": " + first.rule,
                Json{{"path", path + first.field},
                     {"message", first.rule},
                     {"violations", report.ToJson()}});
  }
  desc.inputs = NormalizeConcepts(std::move(desc.inputs));
  desc.outputs = NormalizeConcepts(std::move(desc.outputs));
  return desc;
}

std::string SerializeService(const ServiceDescription& desc) {
  return ServiceToJson(Canonicalize(desc)).dump();
}

ServiceDescription ParseService(std::string_view bytes) {
  return ServiceFromJson(json_util::ParseText(bytes));
}

bool QosBounds::Admits(const QoSVector& qos) const {
  if (max_response_time_ms && qos.response_time_ms > *max_response_time_ms) {
    return false;
  }
  if (max_cost && qos.cost > *max_cost) return false;
  if (min_availability && qos.availability < *min_availability) return false;
  if (min_reliability && qos.reliability < *min_reliability) return false;
  if (min_throughput_rps && qos.throughput_rps < *min_throughput_rps) {
    return false;
  }
  return true;
}

bool QosBounds::empty() const {
  return !max_response_time_ms && !max_cost && !min_availability &&
         !min_reliability && !min_throughput_rps;
}

QosWeights NormalizeWeights(QosWeights weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(std::isfinite(w) && w >= 0.0)) {
      throw Error(ErrorCode::kValidation, "QoS weights must be non-negative",
                  Json{{"path", "/weights"}});
    }
    sum += w;
  }
  if (!(sum > 0.0)) {
    throw Error(ErrorCode::kValidation, "QoS weights must sum to > 0",
                Json{{"path", "/weights"}});
  }
  for (double& w : weights) w /= sum;
  return weights;
}

ValidationReport ValidateRequest(const Request& request) {
  ValidationReport report;
  auto add = [&](std::string field, std::string rule) {
    report.violations.push_back({std::move(field), std::move(rule)});
  };
  for (std::size_t i = 0; i < request.provided.size(); ++i) {
    if (!IsValidConcept(request.provided[i])) {
      add("/provided/" + std::to_string(i), "invalid concept name");
    }
  }
  if (request.desired.empty()) add("/desired", "desired non-empty");
  for (std::size_t i = 0; i < request.desired.size(); ++i) {
    if (!IsValidConcept(request.desired[i])) {
      add("/desired/" + std::to_string(i), "invalid concept name");
    }
  }
  if (request.category_requirement &&
      !IsValidCategoryPath(*request.category_requirement)) {
    add("/category", "category segments non-empty");
  }
  for (std::size_t i = 0; i < request.constraints.size(); ++i) {
    if (!request.constraints[i].IsWellFormed()) {
      add("/constraints/" + std::to_string(i),
          "ordering operators need a numeric literal");
    }
  }
  double sum = 0.0;
  for (double w : request.weights) {
    if (!(std::isfinite(w) && w >= 0.0)) add("/weights", "weights non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) add("/weights", "weights sum > 0");
  return report;
}

bool FindQuery::empty() const {
  return !output_concept && !category_prefix && !id;
}

bool FindQuery::Matches(const ServiceDescription& desc) const {
  if (id && desc.id != *id) return false;
  if (output_concept &&
      std::find(desc.outputs.begin(), desc.outputs.end(), *output_concept) ==
          desc.outputs.end()) {
    return false;
  }
  if (category_prefix &&
      !CategoryHasPrefix(desc.functionality.category, *category_prefix)) {
    return false;
  }
  return true;
}

Json FindQuery::ToJson() const {
  Json out = Json::object();
  if (output_concept) out["output_concept"] = *output_concept;
  if (category_prefix) out["category_prefix"] = *category_prefix;
  if (id) out["id"] = *id;
  return out;
}

FindQuery FindQuery::FromJson(const Json& doc) {
  using namespace json_util;
  RequireObject(doc, "");
  RejectUnknownKeys(doc, "", {"output_concept", "category_prefix", "id"});
  FindQuery q;
  if (doc.contains("output_concept")) {
    q.output_concept = GetString(doc, "", "output_concept");
  }
  if (doc.contains("category_prefix")) {
    q.category_prefix = GetString(doc, "", "category_prefix");
  }
  if (doc.contains("id")) q.id = GetString(doc, "", "id");
  return q;
}

Json CacheEntryToJson(const CacheEntry& entry) {
  Json out = Json::object();
  out["service"] = ServiceToJson(entry.service);
  out["fetched_at"] = entry.fetched_at;
  out["ttl_s"] = entry.ttl_s;
  return out;
}

CacheEntry CacheEntryFromJson(const Json& doc) {
  using namespace json_util;
  RequireObject(doc, "");
  RejectUnknownKeys(doc, "", {"service", "fetched_at", "ttl_s"});
  CacheEntry entry;
  entry.service = ServiceFromJson(RequireField(doc, "", "service"), "/service");
  entry.fetched_at = GetInteger(doc, "", "fetched_at");
  entry.ttl_s = GetInteger(doc, "", "ttl_s");
  if (entry.fetched_at < 0) Fail("/fetched_at", "must be non-negative");
  if (entry.ttl_s <= 0) Fail("/ttl_s", "must be positive");
  return entry;
}

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kTranslateIn: return "TRANSLATE_IN";
    case Stage::kMatchWsdb: return "MATCH_WSDB";
    case Stage::kMatchRegistry: return "MATCH_REGISTRY";
    case Stage::kEvaluateInterface: return "EVALUATE_INTERFACE";
    case Stage::kEvaluateFunctionality: return "EVALUATE_FUNCTIONALITY";
    case Stage::kCompose: return "COMPOSE";
    case Stage::kExecute: return "EXECUTE";
    case Stage::kTranslateOut: return "TRANSLATE_OUT";
  }
  return "";
}

void Metrics::Merge(const Metrics& delta) {
  wsdb_hits += delta.wsdb_hits;
  registry_fetches += delta.registry_fetches;
  composition_time_ms += delta.composition_time_ms;
  exposure_time_ms += delta.exposure_time_ms;
  event_trace.insert(event_trace.end(), delta.event_trace.begin(),
                     delta.event_trace.end());
}

std::vector<ServiceDescription> Cat1() {
  auto make = [](std::string id, Concept in, Concept out, double rt, double cost,
                 double avail, double rel, double thr, double price) {
    ServiceDescription s;
    s.name = "Service " + id.substr(1);
    s.endpoint = "sim://" + id;
    s.id = std::move(id);
    s.inputs = {std::move(in)};
    s.outputs = {std::move(out)};
    s.functionality.category = "demo/convert";
    s.functionality.attributes["price"] = price;
    s.qos = {rt, cost, avail, rel, thr};
    s.version = 1;
    return s;
  };
  return {
      make("S1", "A", "B", 10, 1.0, 0.99, 0.99, 100, 10),
      make("S2", "B", "C", 20, 2.0, 0.98, 0.98, 50, 20),
      make("S3", "A", "C", 50, 1.0, 0.90, 0.95, 80, 15),
      make("S4", "A", "D", 15, 1.0, 0.99, 0.99, 60, 5),
  };
}

}  // namespace compositor
