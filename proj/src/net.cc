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

#include "compositor/net.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "json_util.h"

namespace compositor::net {

namespace {

[[noreturn]] void Unreachable(const Address& address, const std::string& what) {
  throw Error(ErrorCode::kRegistryUnreachable,
              address.ToString() + ": " + what,
              Json{{"address", address.ToString()}});
}

bool SendAll(int fd, std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

void SetTimeouts(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

}  // namespace

Address Address::Parse(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kUsage, "address must be host:port, got '" +
                                       std::string(text) + "'");
  }
  Address address;
  if (colon > 0) address.host = std::string(text.substr(0, colon));
  std::string_view port = text.substr(colon + 1);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || ptr != port.data() + port.size() || port.empty() ||
      value > 65535) {
    throw Error(ErrorCode::kUsage, "bad port in '" + std::string(text) + "'");
  }
  address.port = static_cast<std::uint16_t>(value);
  return address;
}

std::string Address::ToString() const {
  return host + ":" + std::to_string(port);
}

std::vector<Address> ParseAddressList(std::string_view comma_separated) {
  std::vector<Address> out;
  std::size_t start = 0;
  while (start <= comma_separated.size()) {
    std::size_t comma = comma_separated.find(',', start);
    std::string_view item = comma_separated.substr(
        start, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - start);
    if (!item.empty()) out.push_back(Address::Parse(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

FrameServer::FrameServer(Address listen, Handler handler, std::size_t max_frame)
    : listen_(std::move(listen)), handler_(std::move(handler)),
      max_frame_(max_frame) {}

FrameServer::~FrameServer() { Stop(); }

void FrameServer::Start() {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* result = nullptr;
  std::string port = std::to_string(listen_.port);
  if (::getaddrinfo(listen_.host.c_str(), port.c_str(), &hints, &result) != 0 ||
      result == nullptr) {
    throw Error(ErrorCode::kUsage, "cannot resolve " + listen_.ToString());
  }
  listen_fd_ = ::socket(result->ai_family, result->ai_socktype, result->ai_protocol);
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  bool ok = listen_fd_ >= 0 &&
            ::bind(listen_fd_, result->ai_addr, result->ai_addrlen) == 0 &&
            ::listen(listen_fd_, 64) == 0;
  ::freeaddrinfo(result);
  if (!ok) {
    std::string reason = std::strerror(errno);
    if (listen_fd_ >= 0) ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(ErrorCode::kUsage, "cannot listen on " + listen_.ToString() + ": " + reason);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
  stopping_ = false;
  accept_thread_ = std::thread([this] { AcceptLoop(); });
}

void FrameServer::Stop() {
  if (listen_fd_ < 0) return;
  stopping_ = true;
  if (accept_thread_.joinable()) accept_thread_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  std::vector<std::thread> threads;
  {
    std::lock_guard<std::mutex> lock(conn_mu_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
    threads.swap(conn_threads_);
  }
  for (auto& t : threads) t.join();
}

void FrameServer::AcceptLoop() {
  while (!stopping_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    int ready = ::poll(&pfd, 1, 50);
    if (ready <= 0) continue;
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard<std::mutex> lock(conn_mu_);
    conn_fds_.insert(fd);
    conn_threads_.emplace_back([this, fd] { ServeConnection(fd); });
  }
}

void FrameServer::ServeConnection(int fd) {
  wire::FrameReader reader(max_frame_);
  std::vector<std::uint8_t> buf(64 * 1024);
  bool open = true;
  while (open && !stopping_) {
    ssize_t n = ::recv(fd, buf.data(), buf.size(), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    reader.Feed(std::span(buf.data(), static_cast<std::size_t>(n)));
    try {
      while (auto request = reader.Next()) {
        wire::Message response;
        try {
          response = handler_(*request);
        } catch (const Error& e) {
          response = wire::MakeError(request->req_id, e);
        } catch (const std::exception& e) {
          response = wire::MakeError(
              request->req_id, Error(ErrorCode::kValidation, e.what()));
        }
        response.req_id = request->req_id;
        if (!SendAll(fd, wire::EncodeFrame(response, max_frame_))) {
          open = false;
          break;
        }
      }
    } catch (const Error& e) {
      // Framing is unrecoverable on a byte stream: report and hang up.
      SendAll(fd, wire::EncodeFrame(wire::MakeError(0, e), max_frame_));
      open = false;
    }
  }
  std::lock_guard<std::mutex> lock(conn_mu_);
  conn_fds_.erase(fd);
  ::close(fd);
}

FrameClient::FrameClient(Address address, std::chrono::milliseconds timeout,
                         std::size_t max_frame)
    : address_(std::move(address)), timeout_(timeout), max_frame_(max_frame),
      reader_(max_frame) {}

FrameClient::~FrameClient() { Disconnect(); }

void FrameClient::Connect() {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  std::string port = std::to_string(address_.port);
  if (::getaddrinfo(address_.host.c_str(), port.c_str(), &hints, &result) != 0 ||
      result == nullptr) {
    Unreachable(address_, "cannot resolve host");
  }
  int fd = ::socket(result->ai_family, result->ai_socktype, result->ai_protocol);
  if (fd >= 0) SetTimeouts(fd, timeout_);
  bool ok = fd >= 0 && ::connect(fd, result->ai_addr, result->ai_addrlen) == 0;
  ::freeaddrinfo(result);
  if (!ok) {
    std::string reason = std::strerror(errno);
    if (fd >= 0) ::close(fd);
    Unreachable(address_, "connect failed: " + reason);
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  fd_ = fd;
  reader_ = wire::FrameReader(max_frame_);
}

void FrameClient::Disconnect() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

wire::Message FrameClient::Call(wire::Message request) {
  std::lock_guard<std::mutex> lock(mu_);
  if (fd_ < 0) Connect();
  request.req_id = next_req_id_++;
  if (!SendAll(fd_, wire::EncodeFrame(request, max_frame_))) {
    Disconnect();
    Unreachable(address_, "send failed");
  }
  std::vector<std::uint8_t> buf(64 * 1024);
  while (true) {
    std::optional<wire::Message> response;
    try {
      response = reader_.Next();
    } catch (const Error&) {
      Disconnect();
      throw;
    }
    if (response) {
      if (response->req_id != request.req_id && response->op != wire::Op::kError) {
        Disconnect();
        Unreachable(address_, "response id mismatch");
      }
      return *response;
    }
    ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      Disconnect();
      Unreachable(address_, n == 0 ? "connection closed" : "receive failed");
    }
    reader_.Feed(std::span(buf.data(), static_cast<std::size_t>(n)));
  }
}

wire::Message HandleRegistryMessage(registry::Registry& registry,
                                    const wire::Message& request) {
  using wire::Op;
  wire::Message response;
  response.req_id = request.req_id;
  switch (request.op) {
    case Op::kRegister: {
      const Json& doc = json_util::RequireField(request.payload, "/payload", "service");
      ServiceDescription desc = ServiceFromJson(doc, "/payload/service");
      registry.Register(desc);
      response.op = Op::kRegister;
      response.payload = Json{{"ok", true}, {"id", desc.id}, {"version", desc.version}};
      return response;
    }
    case Op::kDeregister: {
      std::string id = json_util::GetString(request.payload, "/payload", "id");
      registry.Deregister(id);
      response.op = Op::kDeregister;
      response.payload = Json{{"ok", true}, {"id", id}};
      return response;
    }
    case Op::kFind: {
      FindQuery query = FindQuery::FromJson(request.payload);
      Json services = Json::array();
      for (const auto& s : registry.Find(query)) services.push_back(ServiceToJson(s));
      response.op = Op::kFindResult;
      response.payload = Json{{"services", std::move(services)}};
      return response;
    }
    case Op::kSyncPull: {
      if (!registry.up()) {
        throw Error(ErrorCode::kRegistryUnreachable, "registry is down");
      }
      response.op = Op::kSyncState;
      response.payload = registry::StateToJson(*registry.Snapshot());
      return response;
    }
    default:
      throw Error(ErrorCode::kValidation,
                  "registry does not accept " + std::string(wire::OpName(request.op)));
  }
}

RemoteRegistry::RemoteRegistry(Address address, std::chrono::milliseconds timeout)
    : address_(address), client_(std::move(address), timeout) {}

void RemoteRegistry::Register(const ServiceDescription& desc) {
  wire::Message m{wire::Op::kRegister, 0, Json{{"service", ServiceToJson(desc)}}};
  wire::RaiseIfError(client_.Call(std::move(m)));
}

void RemoteRegistry::Deregister(std::string_view id) {
  wire::Message m{wire::Op::kDeregister, 0, Json{{"id", id}}};
  wire::RaiseIfError(client_.Call(std::move(m)));
}

std::vector<ServiceDescription> RemoteRegistry::Find(const FindQuery& query) {
  wire::Message response = client_.Call({wire::Op::kFind, 0, query.ToJson()});
  wire::RaiseIfError(response);
  const Json& services = json_util::RequireField(response.payload, "/payload", "services");
  if (!services.is_array()) json_util::Fail("/payload/services", "expected array");
  std::vector<ServiceDescription> out;
  for (std::size_t i = 0; i < services.size(); ++i) {
    out.push_back(ServiceFromJson(services[i], "/payload/services/" + std::to_string(i)));
  }
  return out;
}

registry::RegistryState RemoteRegistry::PullState() {
  wire::Message response = client_.Call({wire::Op::kSyncPull, 0, Json::object()});
  wire::RaiseIfError(response);
  return registry::StateFromJson(response.payload);
}

RegistryNode::RegistryNode(std::shared_ptr<registry::Registry> registry,
                           Address listen, std::vector<Address> peers,
                           std::chrono::milliseconds sync_interval)
    : registry_(std::move(registry)),
      server_(std::move(listen),
              [this](const wire::Message& m) {
                return HandleRegistryMessage(*registry_, m);
              }),
      peers_(std::move(peers)),
      sync_interval_(sync_interval),
      started_(std::chrono::steady_clock::now()) {}

RegistryNode::~RegistryNode() { Stop(); }

void RegistryNode::Start() {
  server_.Start();
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = false;
  }
  if (!peers_.empty() && sync_interval_.count() > 0) {
    sync_thread_ = std::thread([this] { SyncLoop(); });
  }
}

void RegistryNode::Stop() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  if (sync_thread_.joinable()) sync_thread_.join();
  server_.Stop();
}

SimTime RegistryNode::NowSeconds() const {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::steady_clock::now() - started_)
      .count();
}

std::size_t RegistryNode::SyncNow() {
  std::size_t answered = 0;
  for (const auto& peer : peers_) {
    try {
      RemoteRegistry remote(peer, std::chrono::seconds(2));
      registry::RegistryState state = remote.PullState();
      if (registry_->up()) registry_->PullFrom(state, NowSeconds());
      ++answered;
    } catch (const Error&) {
      // Unreachable peers are retried on the next interval.
    }
  }
  return answered;
}

void RegistryNode::SyncLoop() {
  std::unique_lock<std::mutex> lock(mu_);
  while (!stop_) {
    if (cv_.wait_for(lock, sync_interval_, [this] { return stop_; })) break;
    lock.unlock();
    SyncNow();
    lock.lock();
  }
}

}  // namespace compositor::net
