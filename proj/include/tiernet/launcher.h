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

// Ways for the management service to run node daemons. A child process
// speaks a line protocol on its stdin/stdout:
//
//   parent                 child
//                          ready <name>          (or: error <code> <message>)
//   register               registered <id> <dst index> <dst endpoint>
//                          (or: error <code> <message>)
//   tiers                  tiers <n>, then n lines "<tier id> <status> <config>"
//   stop                   stopped
//
// Log lines go to stderr as LEVEL|source|message. Closing stdin stops the
// child.

#pragma once

#include <chrono>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tiernet/config.h"
#include "tiernet/endpoint.h"
#include "tiernet/log.h"
#include "tiernet/node.h"

namespace tiernet {

class NodeHandle {
 public:
  virtual ~NodeHandle() = default;

  virtual std::string name() const = 0;
  // Throws like NodeDaemon::Register.
  virtual NodeIdentity Register() = 0;
  virtual std::optional<std::uint32_t> node_id() const = 0;
  virtual bool running() const = 0;
  virtual std::vector<HostedTier> Tiers() = 0;
  // Orderly stop. Idempotent.
  virtual void Stop() = 0;
  // Abrupt termination without cleanup; in-process handles just stop.
  virtual void Kill() { Stop(); }
};

class NodeLauncher {
 public:
  virtual ~NodeLauncher() = default;
  // Throws Error(kStartup).
  virtual std::unique_ptr<NodeHandle> Launch(const Configuration &config, const Endpoint &gmt,
                                             LogSink log) = 0;
};

std::unique_ptr<NodeLauncher> MakeInProcessLauncher(
    std::chrono::milliseconds registration_timeout = std::chrono::seconds(30));
// Runs `<executable> node --config <file> --gmt <endpoint> --stdio`.
std::unique_ptr<NodeLauncher> MakeChildProcessLauncher(
    std::string executable,
    std::chrono::milliseconds registration_timeout = std::chrono::seconds(30));

// Child side of the protocol; returns the exit status.
int ServeNodeStdio(NodeDaemon &node, std::istream &in, std::ostream &out);

}  // namespace tiernet
