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

// TCP transport for framed messages: a threaded server, a blocking client,
// and the registry served over both.

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "compositor/registry.h"
#include "compositor/wire.h"

namespace compositor::net {

struct Address {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  // "host:port" or ":port". Throws kUsage when malformed.
  static Address Parse(std::string_view text);
  std::string ToString() const;
};

std::vector<Address> ParseAddressList(std::string_view comma_separated);

using Handler = std::function<wire::Message(const wire::Message&)>;

// Serves each connection on its own thread. Requests on one connection are
// handled in arrival order, so pipelined responses come back in order.
class FrameServer {
 public:
  FrameServer(Address listen, Handler handler,
              std::size_t max_frame = wire::kDefaultMaxFrame);
  ~FrameServer();

  FrameServer(const FrameServer&) = delete;
  FrameServer& operator=(const FrameServer&) = delete;

  void Start();
  void Stop();
  // Bound port; meaningful after Start (useful with port 0).
  std::uint16_t port() const { return port_; }

 private:
  void AcceptLoop();
  void ServeConnection(int fd);

  Address listen_;
  Handler handler_;
  std::size_t max_frame_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex conn_mu_;
  std::set<int> conn_fds_;
  std::vector<std::thread> conn_threads_;
};

// One connection, one request in flight at a time. Transport failures throw
// kRegistryUnreachable.
class FrameClient {
 public:
  explicit FrameClient(Address address,
                       std::chrono::milliseconds timeout = std::chrono::seconds(5),
                       std::size_t max_frame = wire::kDefaultMaxFrame);
  ~FrameClient();

  FrameClient(const FrameClient&) = delete;
  FrameClient& operator=(const FrameClient&) = delete;

  // Assigns req_id and returns the matching response.
  wire::Message Call(wire::Message request);

 private:
  void Connect();
  void Disconnect();

  Address address_;
  std::chrono::milliseconds timeout_;
  std::size_t max_frame_;
  std::mutex mu_;
  int fd_ = -1;
  std::uint64_t next_req_id_ = 1;
  wire::FrameReader reader_;
};

// Answers REGISTER, DEREGISTER, FIND and SYNC_PULL against `registry`.
wire::Message HandleRegistryMessage(registry::Registry& registry,
                                    const wire::Message& request);

class RemoteRegistry : public registry::RegistryClient {
 public:
  explicit RemoteRegistry(Address address,
                          std::chrono::milliseconds timeout = std::chrono::seconds(5));

  std::string id() const override { return address_.ToString(); }
  void Register(const ServiceDescription& desc) override;
  void Deregister(std::string_view id) override;
  std::vector<ServiceDescription> Find(const FindQuery& query) override;
  registry::RegistryState PullState();

 private:
  Address address_;
  FrameClient client_;
};

// A registry served over TCP that periodically pulls from its peers.
class RegistryNode {
 public:
  RegistryNode(std::shared_ptr<registry::Registry> registry, Address listen,
               std::vector<Address> peers, std::chrono::milliseconds sync_interval);
  ~RegistryNode();

  void Start();
  void Stop();
  // Pulls from every reachable peer now; returns how many answered.
  std::size_t SyncNow();
  std::uint16_t port() const { return server_.port(); }
  registry::Registry& registry() { return *registry_; }

 private:
  void SyncLoop();
  SimTime NowSeconds() const;

  std::shared_ptr<registry::Registry> registry_;
  FrameServer server_;
  std::vector<Address> peers_;
  std::chrono::milliseconds sync_interval_;
  std::chrono::steady_clock::time_point started_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stop_ = false;
  std::thread sync_thread_;
};

}  // namespace compositor::net
