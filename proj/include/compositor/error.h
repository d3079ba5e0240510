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

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace compositor {

using Json = nlohmann::ordered_json;

enum class ErrorCode {
  kParseError,
  kValidation,
  kVersionConflict,
  kNotFound,
  kFrameError,
  kReplicaDown,
  kAllReplicasDown,
  kNoComposition,
  kRegistryUnreachable,
  kNoFeasible,
  kCycle,
  kServiceDown,
  kMissingInput,
  kNoHealthyPlan,
  kConfigError,
  kUsage,
};

// Wire name, e.g. "NO_COMPOSITION".
std::string_view ErrorCodeName(ErrorCode code);
std::optional<ErrorCode> ParseErrorCode(std::string_view name);

// Every domain failure in the library is reported by throwing this. `detail`
// is a JSON object carrying machine-readable context (field paths, offending
// ids, unreachable concepts) and is what the gateway renders to requesters.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, Json detail = Json::object());

  ErrorCode code() const { return code_; }
  // Without the code prefix that what() carries.
  const std::string& message() const { return message_; }
  const Json& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string message_;
  Json detail_;
};

}  // namespace compositor
