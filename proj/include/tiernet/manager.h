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

// The general manager tier: hosts the registration store, assigns node ids
// and stores, drives tier allocation through system demands, and keeps the
// authoritative registry.

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
#include "tiernet/demand_store.h"
#include "tiernet/endpoint.h"
#include "tiernet/log.h"
#include "tiernet/report.h"
#include "tiernet/system_demand.h"
#include "tiernet/transport.h"

namespace tiernet {

// The manager's identity on the registration store.
inline constexpr TierId kManagerTierId{0, TierType::kGMT, 0};

enum class NodeStatus : std::uint8_t { kRegistered, kLost };
std::string_view NodeStatusName(NodeStatus status);

struct NodeRecord {
  std::uint32_t node_id = 0;
  std::string name;
  std::string host;
  std::string color;
  NodeStatus status = NodeStatus::kRegistered;
  std::int64_t registered_at_ms = 0;
  // Store assigned at registration.
  std::uint32_t dst_index = 0;
  bool operator==(const NodeRecord &) const = default;
};

struct TierRecord {
  TierId tier_id;
  std::string config_name;
  // Store a DGT/DWT is bound to, or the index a DST was given.
  std::uint32_t dst_index = 0;
  std::string status = "running";
  bool operator==(const TierRecord &) const = default;
};

struct DstRecord {
  std::uint32_t index = 0;
  Endpoint endpoint;
  // Unset for the registration store.
  std::optional<TierId> tier;
  bool active = true;
  bool operator==(const DstRecord &) const = default;
};

enum class EvalStatus : std::uint8_t { kIdle, kRunning, kDone };
std::string_view EvalStatusName(EvalStatus status);

struct EvaluationHandle {
  TierId generator;
  EvalStatus status = EvalStatus::kIdle;
  std::optional<GeneratorReport> report;
  std::string error;
  std::int64_t started_at_ms = 0;
};

// Consistent copy of the registry.
struct RegistrySnapshot {
  std::vector<NodeRecord> nodes;
  std::vector<TierRecord> tiers;
  std::vector<DstRecord> dsts;
  std::vector<EvaluationHandle> evaluations;

  // Key-value dump under net.registry.*. Without volatile fields it omits
  // timestamps and store endpoints, so runs on different ports compare equal.
  Configuration ToConfiguration(bool include_volatile = true) const;
  std::string StructuralDump() const { return SerializeConfig(ToConfiguration(false)); }
};

// Registry state. Not synchronized; the manager guards it.
class InfoKeeper {
 public:
  explicit InfoKeeper(Endpoint registration_store);

  // Next id, strictly increasing from 1.
  NodeRecord &AddNode(NodeRegistration registration, std::uint32_t dst_index);
  NodeRecord *FindNode(std::uint32_t node_id);
  // A lost node registered again under the same name gets its id back.
  NodeRecord *FindLostByName(const std::string &name);
  std::uint32_t AddDst(Endpoint endpoint, TierId tier);
  const DstRecord *FindDst(std::uint32_t index) const;
  // Highest-index active computational store, else the registration store.
  std::uint32_t AssignableDst() const;
  void PutTier(TierRecord record);
  bool RemoveTier(const TierId &id);
  const TierRecord *FindTier(const TierId &id) const;

  RegistrySnapshot Snapshot() const;
  std::map<TierId, EvaluationHandle> &evaluations() { return evaluations_; }
  std::vector<DstRecord> &dsts() { return dsts_; }

 private:
  std::map<std::uint32_t, NodeRecord> nodes_;
  std::map<TierId, TierRecord> tiers_;
  std::vector<DstRecord> dsts_;
  std::map<TierId, EvaluationHandle> evaluations_;
  std::uint32_t next_node_id_ = 1;
};

// (request, result) signature pair observed for one system demand.
struct PairingRecord {
  std::string kind;
  DemandSignature request;
  DemandSignature result;
};

class Manager {
 public:
  struct Options {
    std::chrono::milliseconds allocation_timeout{60'000};
    std::chrono::milliseconds command_timeout{30'000};
    std::chrono::milliseconds poll{2};
    LogSink log;
  };

  // Starts the registration store from a GMT configuration. Throws
  // Error(kValidation) or Error(kStartup).
  static std::unique_ptr<Manager> Bootstrap(const Configuration &config, Options options);
  static std::unique_ptr<Manager> Bootstrap(const Configuration &config) {
    return Bootstrap(config, Options{});
  }
  ~Manager();

  Manager(const Manager &) = delete;
  Manager &operator=(const Manager &) = delete;

  Endpoint registration_endpoint() const { return server_->endpoint(); }
  DemandStore &registration_store() { return *store_; }

  // Throws Error(kNotFound) for an unknown node, Error(kConflict) for a lost
  // one, Error(kValidation) for a bad store index or a request the node
  // rejected outright, and Error(kTimeout). Per-instance failures come back
  // inside the registrations.
  TierAllocationResult Allocate(std::uint32_t node_id, TierType type, const std::string &config_name,
                                const std::string &config_text,
                                std::optional<std::uint32_t> dst_index, std::uint32_t count);
  TierDeallocationResult Deallocate(std::uint32_t node_id, TierType type,
                                    const std::vector<TierId> &tier_ids);

  // Throws Error(kNotFound) unless generator is an allocated DGT and
  // Error(kConflict) while it is already evaluating.
  EvaluationHandle StartEvaluation(const TierId &generator);
  // Current handle, refreshed from the store. Throws Error(kNotFound).
  EvaluationHandle Evaluation(const TierId &generator);
  EvaluationHandle WaitEvaluation(const TierId &generator, std::chrono::milliseconds timeout);
  void Step(const TierId &generator, std::uint32_t steps);
  void StopEvaluation(const TierId &generator);

  RegistrySnapshot Snapshot() const;
  std::vector<PairingRecord> PairingTrace() const;
  // Store stats of every active store, probed over the wire.
  std::map<std::uint32_t, StoreStats> ProbeStores();

  void Shutdown();

 private:
  Manager(Options options);
  void RegistrationLoop(std::stop_token stop);
  void ProcessRegistration(const Demand &demand);
  void OnSessionLost(TierId peer, std::size_t remaining);
  NodeRecord RequireLiveNode(std::uint32_t node_id);
  void RequireGenerator(const TierId &generator) const;
  // Deposits an addressed system demand and waits for its result body.
  Bytes Exchange(std::uint32_t node_id, const std::string &identifier,
                 const SystemDemandBody &body, std::chrono::milliseconds timeout);
  DemandSignature AddressedSignature(std::uint32_t node_id, const std::string &identifier);
  void RecordPairing(const std::string &kind, const DemandSignature &request);
  void Log(LogLevel level, const std::string &message) const;

  Options options_;
  std::unique_ptr<DemandStore> store_;
  std::unique_ptr<StoreServer> server_;
  std::jthread loop_;

  mutable std::mutex mu_;
  std::unique_ptr<InfoKeeper> keeper_;
  std::vector<PairingRecord> pairings_;
  std::map<TierId, DemandSignature> eval_requests_;
  std::atomic<std::int64_t> next_request_{1};
  // Serializes mutating commands.
  std::mutex command_mu_;
};

}  // namespace tiernet
