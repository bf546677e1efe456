// Copyright 2026 The Tiernet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// tiernet: management API server, command-line client, node daemon and
// standalone GMT in one binary.

#include <signal.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>
#include <unistd.h>

#include "tiernet/api_server.h"
#include "tiernet/cli.h"
#include "tiernet/error.h"
#include "tiernet/launcher.h"
#include "tiernet/manager.h"
#include "tiernet/node.h"
#include "tiernet/service.h"
#include "tiernet/tiers.h"

namespace {

using namespace tiernet;

// Blocks SIGINT and SIGTERM so WaitForSignal can collect them.
void BlockSignals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

int WaitForSignal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
  return sig;
}

LogSink StderrLog() {
  return [](LogLevel level, const std::string &source, const std::string &message) {
    std::cerr << FormatLogLine(level, source, message) << std::endl;
  };
}

std::string SelfExecutable(const char *argv0) {
  char buf[4096];
  auto n = ::readlink("/proc/self/exe", buf, sizeof buf - 1);
  if (n > 0) return std::string(buf, static_cast<std::size_t>(n));
  return argv0;
}

int RunApi(const std::string &host, int port, const std::string &graph_file,
           const std::string &config_dir, const std::string &node_mode,
           const std::string &events_file, const std::string &self) {
  BlockSignals();
  ManagementService::Options options;
  options.config_dir = config_dir;
  if (!events_file.empty()) options.event_file = events_file;
  if (node_mode == "process") options.launcher = MakeChildProcessLauncher(self);
  ManagementService service(options);
  if (!graph_file.empty()) {
    std::ifstream in(graph_file, std::ios::binary);
    if (!in) throw Error(ErrorCode::kNotFound, "cannot read graph file " + graph_file);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    service.PutGraph(LoadGraph(text, graph_file));
  }
  ApiServer server(service);
  server.Start(host, port);
  std::cout << "listening on " << host << ":" << server.port() << std::endl;
  WaitForSignal();
  server.Stop();
  service.Shutdown();
  return 0;
}

int RunCli(const std::string &script, const std::string &api, bool keep_going,
           const std::string &config_dir, bool quiet) {
  std::unique_ptr<ManagementService> local;
  std::unique_ptr<CommandSink> sink;
  if (!api.empty()) {
    sink = MakeHttpSink(Endpoint::Parse(api));
  } else {
    ManagementService::Options options;
    options.config_dir = config_dir;
    local = std::make_unique<ManagementService>(options);
    sink = MakeLocalSink(*local);
  }
  CliOptions options;
  options.keep_going = keep_going;
  options.echo_events = !quiet;
  if (script.empty() || script == "-") {
    options.interactive = script.empty() && ::isatty(0);
    return RunScript(std::cin, *sink, std::cout, std::cerr, options);
  }
  std::ifstream in(script);
  if (!in) {
    std::cerr << "cannot read script " << script << "\n";
    return 2;
  }
  return RunScript(in, *sink, std::cout, std::cerr, options);
}

int RunNode(const std::string &config_file, const std::string &gmt, bool stdio, int timeout_ms) {
  NodeDaemon::Options options;
  if (!gmt.empty()) options.gmt_endpoint = Endpoint::Parse(gmt);
  options.registration_timeout = std::chrono::milliseconds(timeout_ms);
  options.log = StderrLog();
  std::unique_ptr<NodeDaemon> node;
  try {
    node = NodeDaemon::Start(LoadConfigFile(config_file), options);
  } catch (const Error &e) {
    if (stdio) std::cout << "error " << ErrorCodeName(e.code()) << " " << e.what() << std::endl;
    throw;
  }
  if (stdio) return ServeNodeStdio(*node, std::cin, std::cout);
  BlockSignals();
  auto id = node->Register();
  std::cout << "registered as node " << *id.node_id << std::endl;
  WaitForSignal();
  node->Stop();
  return 0;
}

int RunGmt(const std::string &config_file) {
  BlockSignals();
  Manager::Options options;
  options.log = StderrLog();
  auto m = Manager::Bootstrap(LoadConfigFile(config_file), options);
  std::cout << "GMT listening on " << m->registration_endpoint().ToString() << std::endl;
  WaitForSignal();
  m->Shutdown();
  return 0;
}

// A bare worker process bound to one store; used to exercise failure of a
// whole process.
int RunWorkerProcess(const std::string &dst, std::uint32_t node_id, std::uint32_t index,
                     const std::string &work, int delay_ms, int poll_ms) {
  BlockSignals();
  TierId self{node_id, TierType::kDWT, index};
  DstLink link(Endpoint::Parse(dst), self);
  auto fn = MakeWorkFunction(work, std::chrono::milliseconds(delay_ms));
  WorkerOptions options;
  options.poll = std::chrono::milliseconds(poll_ms);
  options.log = StderrLog();
  options.source = "tier:" + self.ToString();
  std::jthread loop([&](std::stop_token stop) { RunWorker(link, fn, options, stop); });
  std::cout << "ready" << std::endl;
  WaitForSignal();
  loop.request_stop();
  loop.join();
  link.Close();
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"tiernet: multi-tier demand network runtime and management tools"};
  app.require_subcommand(1);

  std::string host = "127.0.0.1", graph_file, config_dir = ".", node_mode = "process",
              events_file;
  int port = 8080;
  if (const char *env = std::getenv("TIERNET_API_PORT")) port = std::atoi(env);
  auto *api = app.add_subcommand("api", "Serve the management HTTP API with an embedded GMT");
  api->add_option("--host", host, "Listen address");
  api->add_option("--port", port, "Listen port (env TIERNET_API_PORT; 0 picks one)");
  api->add_option("--graph", graph_file, "Network graph file to load at startup");
  api->add_option("--config-dir", config_dir, "Directory for named configuration files");
  api->add_option("--node-mode", node_mode, "Run node daemons as 'process' or 'inproc'")
      ->check(CLI::IsMember({"process", "inproc"}));
  api->add_option("--events-file", events_file, "Append every event to this file");

  std::string script, api_endpoint;
  bool keep_going = false, quiet = false;
  auto *cli = app.add_subcommand("cli", "Run commands from a script or the terminal");
  cli->add_option("--script", script, "Command script ('-' for stdin)");
  cli->add_option("--api", api_endpoint, "host:port of a running API; in-process when omitted");
  cli->add_flag("--keep-going", keep_going, "Continue after a failing command");
  cli->add_option("--config-dir", config_dir, "Directory for named configuration files");
  cli->add_flag("--quiet", quiet, "Do not echo service events");

  std::string node_config, gmt;
  bool stdio = false;
  int timeout_ms = 30000;
  auto *node = app.add_subcommand("node", "Run a node daemon");
  node->add_option("--config", node_config, "Node configuration file")->required();
  node->add_option("--gmt", gmt, "host:port of the GMT registration store");
  node->add_flag("--stdio", stdio, "Take register/tiers/stop requests on stdin");
  node->add_option("--registration-timeout-ms", timeout_ms, "Registration deadline");

  std::string gmt_config;
  auto *gmt_cmd = app.add_subcommand("gmt", "Run a standalone GMT");
  gmt_cmd->add_option("--config", gmt_config, "GMT configuration file")->required();

  std::string dst, work = "checksum";
  std::uint32_t worker_node = 1, worker_index = 1;
  int delay_ms = 10, poll_ms = 5;
  auto *worker = app.add_subcommand("worker", "");
  worker->group("");
  worker->add_option("--dst", dst)->required();
  worker->add_option("--node-id", worker_node);
  worker->add_option("--index", worker_index);
  worker->add_option("--work", work);
  worker->add_option("--delay-ms", delay_ms);
  worker->add_option("--poll-ms", poll_ms);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*api) return RunApi(host, port, graph_file, config_dir, node_mode, events_file,
                            SelfExecutable(argv[0]));
    if (*cli) return RunCli(script, api_endpoint, keep_going, config_dir, quiet);
    if (*node) return RunNode(node_config, gmt, stdio, timeout_ms);
    if (*gmt_cmd) return RunGmt(gmt_config);
    if (*worker) return RunWorkerProcess(dst, worker_node, worker_index, work, delay_ms, poll_ms);
  } catch (const Error &e) {
    std::cerr << "error: " << ErrorCodeName(e.code()) << ": " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
