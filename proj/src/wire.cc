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

#include "compositor/wire.h"

#include <string>

#include "json_util.h"

namespace compositor::wire {

namespace {

constexpr Op kAllOps[] = {Op::kRegister,  Op::kDeregister, Op::kFind,
                          Op::kFindResult, Op::kSyncPull,  Op::kSyncState,
                          Op::kError,      Op::kCompose};

std::uint32_t ReadLength(std::span<const std::uint8_t> bytes) {
  return (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
         (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
}

[[noreturn]] void FrameFail(const std::string& what, Json detail) {
  throw Error(ErrorCode::kFrameError, what, std::move(detail));
}

}  // namespace

std::string_view OpName(Op op) {
  switch (op) {
    case Op::kRegister: return "REGISTER";
    case Op::kDeregister: return "DEREGISTER";
    case Op::kFind: return "FIND";
    case Op::kFindResult: return "FIND_RESULT";
    case Op::kSyncPull: return "SYNC_PULL";
    case Op::kSyncState: return "SYNC_STATE";
    case Op::kError: return "ERROR";
    case Op::kCompose: return "COMPOSE";
  }
  return "";
}

std::optional<Op> ParseOp(std::string_view name) {
  for (Op op : kAllOps) {
    if (OpName(op) == name) return op;
  }
  return std::nullopt;
}

std::vector<std::uint8_t> EncodeFrame(const Message& message,
                                      std::size_t max_frame) {
  if (!message.payload.is_object()) {
    throw Error(ErrorCode::kValidation, "frame payload must be an object");
  }
  Json body = Json::object();
  body["op"] = OpName(message.op);
  body["req_id"] = message.req_id;
  body["payload"] = message.payload;
  std::string text = body.dump();
  if (text.size() > max_frame) {
    FrameFail("frame body of " + std::to_string(text.size()) +
                  " bytes exceeds max " + std::to_string(max_frame),
              Json{{"reason", "oversize"}, {"length", text.size()}});
  }
  std::vector<std::uint8_t> out;
  out.reserve(kLengthPrefixBytes + text.size());
  auto len = static_cast<std::uint32_t>(text.size());
  out.push_back(static_cast<std::uint8_t>(len >> 24));
  out.push_back(static_cast<std::uint8_t>(len >> 16));
  out.push_back(static_cast<std::uint8_t>(len >> 8));
  out.push_back(static_cast<std::uint8_t>(len));
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

Message DecodeBody(std::string_view body) {
  using namespace json_util;
  Json doc = ParseText(body);
  RequireObject(doc, "");
  RejectUnknownKeys(doc, "", {"op", "req_id", "payload"});
  std::string op_name = GetString(doc, "", "op");
  auto op = ParseOp(op_name);
  if (!op) Fail("/op", "unknown op '" + op_name + "'");
  Message message;
  message.op = *op;
  message.req_id = GetUnsigned(doc, "", "req_id");
  message.payload = RequireField(doc, "", "payload");
  RequireObject(message.payload, "/payload");
  return message;
}

Message DecodeFrame(std::span<const std::uint8_t> bytes, std::size_t max_frame) {
  if (bytes.size() < kLengthPrefixBytes) {
    FrameFail("truncated length prefix",
              Json{{"reason", "truncated"}, {"have", bytes.size()}});
  }
  std::uint32_t len = ReadLength(bytes);
  if (len > max_frame) {
    FrameFail("declared length " + std::to_string(len) + " exceeds max " +
                  std::to_string(max_frame),
              Json{{"reason", "oversize"}, {"length", len}});
  }
  std::size_t have = bytes.size() - kLengthPrefixBytes;
  if (have < len) {
    FrameFail("truncated body: declared " + std::to_string(len) + ", have " +
                  std::to_string(have),
              Json{{"reason", "truncated"}, {"length", len}, {"have", have}});
  }
  if (have > len) {
    FrameFail("trailing bytes after frame",
              Json{{"reason", "trailing"}, {"length", len}, {"have", have}});
  }
  auto body = bytes.subspan(kLengthPrefixBytes);
  return DecodeBody(std::string_view(reinterpret_cast<const char*>(body.data()),
                                     body.size()));
}

void FrameReader::Feed(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> FrameReader::Next() {
  if (buffer_.size() < kLengthPrefixBytes) return std::nullopt;
  std::uint32_t len = ReadLength(buffer_);
  if (len > max_frame_) {
    FrameFail("declared length " + std::to_string(len) + " exceeds max " +
                  std::to_string(max_frame_),
              Json{{"reason", "oversize"}, {"length", len}});
  }
  if (buffer_.size() < kLengthPrefixBytes + len) return std::nullopt;
  std::string body(buffer_.begin() + kLengthPrefixBytes,
                   buffer_.begin() + kLengthPrefixBytes + len);
  buffer_.erase(buffer_.begin(), buffer_.begin() + kLengthPrefixBytes + len);
  return DecodeBody(body);
}

Message MakeError(std::uint64_t req_id, const Error& error) {
  Message m;
  m.op = Op::kError;
  m.req_id = req_id;
  m.payload = Json{{"code", ErrorCodeName(error.code())},
                   {"message", error.what()},
                   {"detail", error.detail()}};
  return m;
}

void RaiseIfError(const Message& message) {
  if (message.op != Op::kError) return;
  std::string name = message.payload.value("code", "");
  auto code = ParseErrorCode(name).value_or(ErrorCode::kRegistryUnreachable);
  Json detail = message.payload.contains("detail") ? message.payload["detail"]
                                                   : Json::object();
  std::string text = message.payload.value("message", name);
  const std::string prefix = std::string(ErrorCodeName(code)) + ": ";
  if (text.rfind(prefix, 0) == 0) text.erase(0, prefix.size());
  throw Error(code, text, detail);
}

}  // namespace compositor::wire
