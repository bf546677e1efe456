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

// The node daemon: hosts tier instances, registers with the manager and
// serves the system demands addressed to it.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tiernet/config.h"
#include "tiernet/demand.h"
#include "tiernet/endpoint.h"
#include "tiernet/log.h"
#include "tiernet/system_demand.h"
#include "tiernet/tiers.h"
#include "tiernet/transport.h"

namespace tiernet {

struct NodeIdentity {
  // Unset until registration completes.
  std::optional<std::uint32_t> node_id;
  std::string name;
  std::string host;
  std::string color;
  std::optional<std::uint32_t> dst_index;
  std::optional<Endpoint> dst;
};

struct HostedTier {
  TierId id;
  std::string config_name;
  TierStatus status = TierStatus::kCreated;
  std::optional<Endpoint> dst;
};

class NodeDaemon {
 public:
  struct Options {
    // Registration store to use when the config names none.
    std::optional<Endpoint> gmt_endpoint;
    std::chrono::milliseconds registration_timeout{30'000};
    std::chrono::milliseconds poll{20};
    LogSink log;
  };

  // Validates the node configuration. Throws Error(kStartup) when it is
  // invalid or names no registration store and the node does not host the
  // manager.
  static std::unique_ptr<NodeDaemon> Start(const Configuration &config, Options options);
  ~NodeDaemon();

  NodeDaemon(const NodeDaemon &) = delete;
  NodeDaemon &operator=(const NodeDaemon &) = delete;

  // Deposits a NodeRegistration and waits for the result, retrying the
  // connection with backoff. On success connects to the assigned store and
  // starts serving system demands. Throws Error(kRegistration) when the
  // manager rejects the node, Error(kTimeout) when no result arrives and
  // Error(kConflict) if already registered.
  NodeIdentity Register();
  // Sets the registration store when it was not known at start.
  void SetGmtEndpoint(Endpoint endpoint);

  NodeIdentity identity() const;
  bool registered() const;
  std::vector<HostedTier> Tiers() const;
  // Direct access for in-process hosts and tests.
  std::shared_ptr<TierInstance> FindTier(const TierId &id) const;

  // Stops every hosted tier and closes all sessions. Idempotent.
  void Stop();

  // Handlers for system demands; exposed for tests.
  TierAllocationResult ServeAllocation(const TierAllocationRequest &request);
  TierDeallocationResult ServeDeallocation(const TierDeallocationRequest &request);

 private:
  NodeDaemon(Configuration config, Options options);
  NodeIdentity RegisterOnce(std::chrono::milliseconds timeout);
  void ServiceLoop(std::stop_token stop);
  void Serve(const Demand &demand);
  // Returns a result body for a system demand on the current control
  // session; false if the session is gone.
  bool Reply(const DemandSignature &signature, const SystemDemandBody &body);
  void Log(LogLevel level, const std::string &message) const;
  std::string source() const;

  Configuration config_;
  Options options_;
  std::chrono::milliseconds keepalive_;

  mutable std::mutex mu_;
  NodeIdentity identity_;
  std::map<TierId, std::shared_ptr<TierInstance>> tiers_;
  std::map<TierType, std::uint32_t> next_index_;
  std::atomic<bool> stopped_{false};

  std::mutex session_mu_;
  std::shared_ptr<Session> control_;
  std::unique_ptr<Session> dst_session_;
  std::jthread loop_;
  std::mutex register_mu_;
};

}  // namespace tiernet
