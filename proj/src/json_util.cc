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

#include "json_util.h"

#include <algorithm>
#include <cmath>

namespace compositor::json_util {

void Fail(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::kParseError, (path.empty() ? "/" : path) + ": " + message,
              Json{{"path", path.empty() ? "/" : path}, {"message", message}});
}

Json ParseText(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what(),
                Json{{"path", "/"},
                     {"offset", e.byte},
                     {"message", "malformed JSON"}});
  }
}

void RequireObject(const Json& doc, const std::string& path) {
  if (!doc.is_object()) Fail(path, "expected object");
}

void RejectUnknownKeys(const Json& doc, const std::string& path,
                       std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      Fail(path + "/" + key, "unknown field");
    }
  }
}

const Json& RequireField(const Json& doc, const std::string& path,
                         std::string_view key) {
  RequireObject(doc, path);
  auto it = doc.find(key);
  if (it == doc.end()) {
    Fail(path + "/" + std::string(key), "missing required field");
  }
  return *it;
}

double AsNumber(const Json& value, const std::string& path) {
  if (!value.is_number()) Fail(path, "expected number");
  double v = value.get<double>();
  if (!std::isfinite(v)) Fail(path, "expected finite number");
  return v;
}

std::string AsString(const Json& value, const std::string& path) {
  if (!value.is_string()) Fail(path, "expected string");
  return value.get<std::string>();
}

std::string GetString(const Json& doc, const std::string& path,
                      std::string_view key) {
  return AsString(RequireField(doc, path, key), path + "/" + std::string(key));
}

double GetNumber(const Json& doc, const std::string& path, std::string_view key) {
  return AsNumber(RequireField(doc, path, key), path + "/" + std::string(key));
}

std::uint64_t GetUnsigned(const Json& doc, const std::string& path,
                          std::string_view key) {
  const Json& v = RequireField(doc, path, key);
  std::string field = path + "/" + std::string(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  Fail(field, "expected non-negative integer");
}

std::int64_t GetInteger(const Json& doc, const std::string& path,
                        std::string_view key) {
  const Json& v = RequireField(doc, path, key);
  std::string field = path + "/" + std::string(key);
  if (v.is_number_integer() && !v.is_number_unsigned()) {
    return v.get<std::int64_t>();
  }
  if (v.is_number_unsigned() &&
      v.get<std::uint64_t>() <= static_cast<std::uint64_t>(INT64_MAX)) {
    return static_cast<std::int64_t>(v.get<std::uint64_t>());
  }
  Fail(field, "expected integer");
}

bool GetBool(const Json& doc, const std::string& path, std::string_view key) {
  const Json& v = RequireField(doc, path, key);
  if (!v.is_boolean()) Fail(path + "/" + std::string(key), "expected boolean");
  return v.get<bool>();
}

std::vector<std::string> GetStringArray(const Json& doc, const std::string& path,
                                        std::string_view key) {
  const Json& v = RequireField(doc, path, key);
  std::string field = path + "/" + std::string(key);
  if (!v.is_array()) Fail(field, "expected array of strings");
  std::vector<std::string> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(AsString(v[i], field + "/" + std::to_string(i)));
  }
  return out;
}

}  // namespace compositor::json_util
