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

#include "compositor/error.h"

#include <utility>

namespace compositor {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "PARSE_ERROR";
    case ErrorCode::kValidation: return "VALIDATION";
    case ErrorCode::kVersionConflict: return "VERSION_CONFLICT";
    case ErrorCode::kNotFound: return "NOT_FOUND";
    case ErrorCode::kFrameError: return "FRAME_ERROR";
    case ErrorCode::kReplicaDown: return "REPLICA_DOWN";
    case ErrorCode::kAllReplicasDown: return "ALL_REPLICAS_DOWN";
    case ErrorCode::kNoComposition: return "NO_COMPOSITION";
    case ErrorCode::kRegistryUnreachable: return "REGISTRY_UNREACHABLE";
    case ErrorCode::kNoFeasible: return "NO_FEASIBLE";
    case ErrorCode::kCycle: return "CYCLE";
    case ErrorCode::kServiceDown: return "SERVICE_DOWN";
    case ErrorCode::kMissingInput: return "MISSING_INPUT";
    case ErrorCode::kNoHealthyPlan: return "NO_HEALTHY_PLAN";
    case ErrorCode::kConfigError: return "CONFIG_ERROR";
    case ErrorCode::kUsage: return "USAGE";
  }
  return "UNKNOWN";
}

std::optional<ErrorCode> ParseErrorCode(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::kUsage); ++i) {
    auto code = static_cast<ErrorCode>(i);
    if (ErrorCodeName(code) == name) return code;
  }
  return std::nullopt;
}

Error::Error(ErrorCode code, std::string message, Json detail)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code),
      message_(std::move(message)),
      detail_(std::move(detail)) {}

}  // namespace compositor
