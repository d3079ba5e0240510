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

// Length-prefixed message framing shared by registries and the gateway.
//
//   +----------------------+---------------------------------------------+
//   | u32 big-endian len   | len bytes of UTF-8 JSON                     |
//   +----------------------+---------------------------------------------+
//   body: {"op": "<OP>", "req_id": <u64>, "payload": {...}}

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "compositor/error.h"

namespace compositor::wire {

enum class Op {
  kRegister,
  kDeregister,
  kFind,
  kFindResult,
  kSyncPull,
  kSyncState,
  kError,
  kCompose,
};

std::string_view OpName(Op op);
std::optional<Op> ParseOp(std::string_view name);

struct Message {
  Op op = Op::kError;
  std::uint64_t req_id = 0;
  Json payload = Json::object();

  bool operator==(const Message&) const = default;
};

inline constexpr std::size_t kDefaultMaxFrame = 1u << 20;
inline constexpr std::size_t kLengthPrefixBytes = 4;

// Throws kFrameError (oversize) when the body exceeds `max_frame`.
std::vector<std::uint8_t> EncodeFrame(const Message& message,
                                      std::size_t max_frame = kDefaultMaxFrame);

// Decodes exactly one frame. Throws kFrameError for oversize, truncated or
// trailing bytes, kParseError for a malformed body.
Message DecodeFrame(std::span<const std::uint8_t> bytes,
                    std::size_t max_frame = kDefaultMaxFrame);

// Parses an already de-framed JSON body.
Message DecodeBody(std::string_view body);

// Incremental decoder for stream transports.
class FrameReader {
 public:
  explicit FrameReader(std::size_t max_frame = kDefaultMaxFrame)
      : max_frame_(max_frame) {}

  void Feed(std::span<const std::uint8_t> bytes);
  // Next complete message, if buffered. Throws like DecodeFrame.
  std::optional<Message> Next();
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::size_t max_frame_;
  std::vector<std::uint8_t> buffer_;
};

Message MakeError(std::uint64_t req_id, const Error& error);
// Re-raises an ERROR message as the Error it carries; no-op otherwise.
void RaiseIfError(const Message& message);

}  // namespace compositor::wire
