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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "compositor/gateway.h"
#include "compositor/net.h"
#include "json_util.h"

namespace compositor::gateway {

namespace {

std::atomic<bool> g_stop{false};

void OnSignal(int) { g_stop.store(true); }

// Blocks until a signal arrives, or for `seconds` when positive.
void WaitForShutdown(double seconds) {
  g_stop.store(false);
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(seconds > 0 ? seconds : 0);
  while (!g_stop.load()) {
    if (seconds > 0 && std::chrono::steady_clock::now() >= deadline) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

std::string ReadInput(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kUsage, "cannot read " + path, Json{{"path", path}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A JSON array of service documents, or {"services": [...]}.
std::vector<ServiceDescription> LoadCatalog(const std::string& path) {
  Json doc = json_util::ParseText(ReadInput(path));
  std::string base;
  if (doc.is_object()) {
    json_util::RejectUnknownKeys(doc, "", {"services"});
    doc = json_util::RequireField(doc, "", "services");
    base = "/services";
  }
  if (!doc.is_array()) json_util::Fail(base, "expected an array of services");
  std::vector<ServiceDescription> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    out.push_back(ServiceFromJson(doc[i], base + "/" + std::to_string(i)));
  }
  return out;
}

std::vector<std::shared_ptr<registry::RegistryClient>> RemoteRegistries(
    const std::vector<std::string>& addresses) {
  std::vector<std::shared_ptr<registry::RegistryClient>> out;
  for (const auto& a : addresses) {
    out.push_back(std::make_shared<net::RemoteRegistry>(net::Address::Parse(a)));
  }
  return out;
}

// Remote registries when addresses are given, else one in-process registry
// holding `catalog_path` (CAT-1 by default).
std::vector<std::shared_ptr<registry::RegistryClient>> RegistriesFor(
    const Config& config, const std::vector<std::string>& remote,
    const std::string& catalog_path) {
  std::vector<std::string> addresses = remote.empty() ? config.registry_peers : remote;
  if (!addresses.empty()) return RemoteRegistries(addresses);
  auto local = std::make_shared<registry::Registry>("local");
  for (const auto& s : catalog_path.empty() ? Cat1() : LoadCatalog(catalog_path)) {
    local->Register(s);
  }
  return {local};
}

}  // namespace

int RunCli(std::span<const std::string> args, std::ostream& out, std::ostream& err,
           const Getenv& getenv) {
  CLI::App app{"Dynamic service composition engine", "compositor"};
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config_path;
  bool print_config = false;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_flag("--print-config", print_config, "Print the effective config and exit");
  app.require_subcommand(0, 1);

  auto* registry_cmd = app.add_subcommand("registry", "Registry node commands");
  registry_cmd->require_subcommand(1);
  auto* registry_serve = registry_cmd->add_subcommand("serve", "Serve a registry over TCP");
  std::string reg_id = "R1";
  std::string reg_listen = "127.0.0.1:7400";
  std::string reg_peers;
  double reg_sync = -1;
  std::string reg_catalog;
  double run_for = 0;
  registry_serve->add_option("--id", reg_id, "Registry id");
  registry_serve->add_option("--listen", reg_listen, "host:port to listen on");
  registry_serve->add_option("--peers", reg_peers, "Comma-separated peer addresses");
  registry_serve->add_option("--sync-interval", reg_sync, "Seconds between sync pulls");
  registry_serve->add_option("--catalog", reg_catalog, "Services to preload");
  registry_serve->add_option("--run-for", run_for, "Stop after this many seconds");

  auto* register_cmd = app.add_subcommand("register", "Register a service at a registry");
  std::string svc_file;
  std::string svc_registry;
  register_cmd->add_option("--file", svc_file, "Service description JSON")->required();
  register_cmd->add_option("--registry", svc_registry, "Registry host:port")->required();

  auto* compose_cmd = app.add_subcommand("compose", "Compose a request");
  std::string req_file;
  std::string compose_catalog;
  std::vector<std::string> compose_registries;
  bool execute = false;
  std::string mode_name = "decentralized";
  SimTime compose_now = 0;
  compose_cmd->add_option("--request", req_file, "Request JSON")->required();
  compose_cmd->add_option("--catalog", compose_catalog, "Catalog JSON (default CAT-1)");
  compose_cmd->add_option("--registry", compose_registries, "Remote registries host:port")
      ->delimiter(',');
  compose_cmd->add_flag("--execute", execute, "Run the plan and report outputs and latency");
  compose_cmd->add_option("--mode", mode_name, "centralized or decentralized")
      ->check(CLI::IsMember({"centralized", "decentralized"}));
  compose_cmd->add_option("--now", compose_now, "Simulated time in seconds");

  auto* bench_cmd = app.add_subcommand("bench", "Benchmarks (CSV on stdout)");
  bench_cmd->require_subcommand(1);
  auto* bench_compose = bench_cmd->add_subcommand("compose", "Composition time per catalog size");
  std::vector<std::size_t> sizes;
  std::uint64_t seed = 1;
  bench_compose->add_option("--sizes", sizes, "Catalog sizes")->delimiter(',')->required()
      ->check(CLI::PositiveNumber);
  bench_compose->add_option("--seed", seed, "Generator seed");
  auto* bench_expose = bench_cmd->add_subcommand("expose", "Exposure time per method count");
  std::vector<std::size_t> counts;
  bench_expose->add_option("--counts", counts, "Method counts")->delimiter(',')->required()
      ->check(CLI::PositiveNumber);

  auto* scenario_cmd = app.add_subcommand("scenario", "Run a scripted scenario");
  std::string scenario_file;
  scenario_cmd->add_option("--file", scenario_file, "Scenario JSON")->required();

  auto* gateway_cmd = app.add_subcommand("gateway", "Requester endpoint commands");
  gateway_cmd->require_subcommand(1);
  auto* gateway_serve = gateway_cmd->add_subcommand("serve", "Serve COMPOSE frames over TCP");
  std::string gw_listen = "127.0.0.1:7500";
  std::string gw_catalog;
  std::vector<std::string> gw_registries;
  gateway_serve->add_option("--listen", gw_listen, "host:port to listen on");
  gateway_serve->add_option("--catalog", gw_catalog, "Catalog JSON (default CAT-1)");
  gateway_serve->add_option("--registry", gw_registries, "Remote registries host:port")
      ->delimiter(',');
  gateway_serve->add_option("--run-for", run_for, "Stop after this many seconds");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    Config config = LoadConfig(config_path.empty()
                                   ? std::nullopt
                                   : std::optional<std::filesystem::path>(config_path),
                               getenv);
    if (print_config) {
      out << config.ToJson().dump(2) << "\n";
      return 0;
    }
    if (app.get_subcommands().empty()) {
      err << "a subcommand is required\n\n" << app.help();
      return 2;
    }

    if (registry_serve->parsed()) {
      auto reg = std::make_shared<registry::Registry>(reg_id);
      if (!reg_catalog.empty()) {
        for (const auto& s : LoadCatalog(reg_catalog)) reg->Register(s);
      }
      const double interval = reg_sync > 0 ? reg_sync : static_cast<double>(config.sync_interval_s);
      std::vector<net::Address> peers =
          reg_peers.empty() ? std::vector<net::Address>{} : net::ParseAddressList(reg_peers);
      net::RegistryNode node(reg, net::Address::Parse(reg_listen), std::move(peers),
                             std::chrono::milliseconds(static_cast<std::int64_t>(interval * 1000)));
      node.Start();
      out << Json{{"registry", reg_id}, {"port", node.port()}}.dump() << std::endl;
      WaitForShutdown(run_for);
      node.Stop();
      return 0;
    }

    if (register_cmd->parsed()) {
      ServiceDescription desc = ServiceFromJson(json_util::ParseText(ReadInput(svc_file)));
      net::RemoteRegistry remote(net::Address::Parse(svc_registry));
      remote.Register(desc);
      out << Json{{"registered", desc.id}, {"version", desc.version}}.dump() << "\n";
      return 0;
    }

    if (compose_cmd->parsed()) {
      const std::string text = ReadInput(req_file);
      System system(config, RegistriesFor(config, compose_registries, compose_catalog));
      HandleOptions options;
      options.execute = execute;
      options.mode = execution::ParseMode(mode_name);
      HandleResult handled = system.Handle(text, compose_now, options);
      out << handled.response << "\n";
      return handled.error ? 1 : 0;
    }

    if (bench_compose->parsed()) {
      out << execution::CompositionCsv(execution::BenchComposition(sizes, seed));
      return 0;
    }
    if (bench_expose->parsed()) {
      out << execution::ExposureCsv(execution::BenchExposure(counts));
      return 0;
    }

    if (scenario_cmd->parsed()) {
      ScenarioOutcome outcome = RunScenario(json_util::ParseText(ReadInput(scenario_file)), config);
      for (const auto& line : outcome.lines) out << line << "\n";
      if (outcome.failed_expectations > 0) {
        err << outcome.failed_expectations << " expectation(s) failed\n";
        return 1;
      }
      return 0;
    }

    if (gateway_serve->parsed()) {
      System system(config, RegistriesFor(config, gw_registries, gw_catalog));
      const auto started = std::chrono::steady_clock::now();
      net::FrameServer server(net::Address::Parse(gw_listen), [&](const wire::Message& m) {
        const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
        return HandleComposeMessage(system, m, now);
      });
      server.Start();
      out << Json{{"gateway", "compose"}, {"port", server.port()}}.dump() << std::endl;
      WaitForShutdown(run_for);
      server.Stop();
      return 0;
    }
  } catch (const Error& e) {
    err << RenderError(e) << "\n";
    return e.code() == ErrorCode::kUsage ? 2 : 1;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace compositor::gateway
