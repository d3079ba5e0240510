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

// Strict field accessors for hand-written JSON schemas. All failures throw
// kParseError with the JSON pointer of the offending field.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "compositor/error.h"

namespace compositor::json_util {

[[noreturn]] void Fail(const std::string& path, const std::string& message);

// Parses text; syntax errors carry the byte offset.
Json ParseText(std::string_view text);

void RequireObject(const Json& doc, const std::string& path);
void RejectUnknownKeys(const Json& doc, const std::string& path,
                       std::initializer_list<std::string_view> allowed);

const Json& RequireField(const Json& doc, const std::string& path,
                         std::string_view key);

std::string GetString(const Json& doc, const std::string& path,
                      std::string_view key);
double GetNumber(const Json& doc, const std::string& path, std::string_view key);
std::uint64_t GetUnsigned(const Json& doc, const std::string& path,
                          std::string_view key);
std::int64_t GetInteger(const Json& doc, const std::string& path,
                        std::string_view key);
bool GetBool(const Json& doc, const std::string& path, std::string_view key);
std::vector<std::string> GetStringArray(const Json& doc, const std::string& path,
                                        std::string_view key);

double AsNumber(const Json& value, const std::string& path);
std::string AsString(const Json& value, const std::string& path);

}  // namespace compositor::json_util
