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

// Tier implementations: the configuration-driven factory, the demand store
// tier, the simulator generator and the worker loop.

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "tiernet/config.h"
#include "tiernet/demand.h"
#include "tiernet/demand_store.h"
#include "tiernet/endpoint.h"
#include "tiernet/log.h"
#include "tiernet/report.h"
#include "tiernet/transport.h"

namespace tiernet {

// Sleeps up to d; returns false if stop was requested first.
bool SleepFor(std::stop_token stop, std::chrono::microseconds d);

// ---------------------------------------------------------------------------
// Simulator parameters, payloads and signatures.

struct SimulatorParams {
  int mode = 2;
  // Mode 1: demands per step. Mode 3: number of parallel streams.
  std::uint32_t tester_parameter = 1;
  std::uint32_t instance_count = 1;
  std::uint32_t payload_size = 32;
  std::uint32_t max_demands = 1;
  std::uint64_t seed = 0;
  std::string program = "simulator";

  // Throws Error(kValidation).
  static SimulatorParams FromConfig(const Configuration &config);
  // Throws Error(kValidation) unless mode is 0..3 and max_demands >= 1.
  void Check() const;
};

// Seeded pseudo-random payload for the seq-th demand.
Bytes SimulatorPayload(std::uint64_t seed, std::int64_t seq, std::size_t size);
// (program, "sim", [("seq", seq)]).
DemandSignature SimulatorSignature(const std::string &program, std::int64_t seq);
Demand SimulatorDemand(const SimulatorParams &params, std::int64_t seq, TierId issued_by);

// ---------------------------------------------------------------------------
// Work functions.

struct WorkFunction {
  std::string name;
  // Returns nothing when stop interrupted the computation.
  std::function<std::optional<Bytes>(const Bytes &, std::stop_token)> apply;

  Bytes operator()(const Bytes &payload) const { return *apply(payload, {}); }
};

// Big-endian FNV-1a 64 of the payload.
Bytes Checksum(const Bytes &payload);
// "echo", "checksum" or "sleep-then-checksum". Throws Error(kFactory).
WorkFunction MakeWorkFunction(const std::string &name, std::chrono::milliseconds delay);
const std::vector<std::string> &WorkFunctionNames();

// ---------------------------------------------------------------------------
// Reconnecting store session.

// A session to one store that reconnects with exponential backoff when the
// connection fails. Each failed attempt after a working connection counts
// as one interruption.
class DstLink {
 public:
  struct Options {
    Session::Options session;
    std::chrono::milliseconds backoff_min{50};
    std::chrono::milliseconds backoff_max{2'000};
  };

  DstLink(Endpoint endpoint, TierId self, Options options);
  DstLink(Endpoint endpoint, TierId self) : DstLink(std::move(endpoint), self, Options{}) {}

  // Runs fn against a live session, reconnecting on connect or transport
  // failures until stop is requested (then throws Error(kTransport)).
  // Errors replied by the store are rethrown unchanged.
  template <typename F>
  auto Run(std::stop_token stop, F &&fn) -> decltype(fn(std::declval<Session &>()));

  void Close();
  std::uint32_t interruptions() const { return interruptions_; }
  const Endpoint &endpoint() const { return endpoint_; }

 private:
  Session &Connected(std::stop_token stop);
  void Failed(std::stop_token stop, const Error &error);

  Endpoint endpoint_;
  TierId self_;
  Options options_;
  std::unique_ptr<Session> session_;
  std::chrono::milliseconds backoff_;
  bool was_connected_ = false;
  std::uint32_t interruptions_ = 0;
};

bool IsConnectionError(const Error &e);

template <typename F>
auto DstLink::Run(std::stop_token stop, F &&fn) -> decltype(fn(std::declval<Session &>())) {
  while (true) {
    try {
      return fn(Connected(stop));
    } catch (const Error &e) {
      if (!IsConnectionError(e)) throw;
      Failed(stop, e);
    }
  }
}

// ---------------------------------------------------------------------------
// Generator and worker loops.

// Step signals for a user-controlled generator.
class StepSignal {
 public:
  void Add(std::uint32_t steps);
  // Waits up to timeout for steps; returns and clears the pending count.
  std::uint32_t Take(std::stop_token stop, std::chrono::milliseconds timeout);

 private:
  std::mutex mu_;
  std::condition_variable_any cv_;
  std::uint32_t pending_ = 0;
};

struct GeneratorOptions {
  DstLink::Options link;
  // Result polling starts here and doubles up to poll_max.
  std::chrono::microseconds poll_min{200};
  std::chrono::microseconds poll_max{20'000};
};

// Runs one evaluation of params against the store at dst. Mode 0 deposits
// every demand up front, mode 1 deposits tester_parameter demands per step,
// mode 2 deposits one demand at a time and awaits its result, mode 3 splits
// the demands over tester_parameter concurrent streams. Every mode waits for
// all emitted demands to be computed. Stopping returns a partial report.
GeneratorReport RunGenerator(const SimulatorParams &params, const Endpoint &dst, TierId self,
                             StepSignal *steps, std::stop_token stop,
                             const GeneratorOptions &options = {});

struct WorkerOptions {
  std::chrono::milliseconds poll{100};
  LogSink log;
  std::string source;
  // Incremented per delivered result when set.
  std::atomic<std::uint64_t> *delivered = nullptr;
};

// Grabs procedural demands, applies work and returns results until stop is
// requested. A demand in flight when stop arrives is finished first unless
// the work function itself is interrupted; an abandoned demand is requeued
// by the store when the session closes.
// Returns the number of results delivered.
std::uint64_t RunWorker(DstLink &link, const WorkFunction &work, const WorkerOptions &options,
                        std::stop_token stop);

// ---------------------------------------------------------------------------
// Tier instances.

enum class TierStatus : std::uint8_t { kCreated, kRunning, kStopping, kStopped };
std::string_view TierStatusName(TierStatus status);
std::optional<TierStatus> ParseTierStatus(std::string_view name);

// Host-provided environment for an instance.
struct TierRuntime {
  // Store that generators and workers bind to.
  std::optional<Endpoint> dst;
  // Keepalive interval for store sessions; zero disables it.
  std::chrono::milliseconds keepalive{2'000};
  LogSink log;
};

class TierInstance {
 public:
  TierInstance(TierId id, Configuration config, TierRuntime runtime);
  virtual ~TierInstance();

  TierInstance(const TierInstance &) = delete;
  TierInstance &operator=(const TierInstance &) = delete;

  const TierId &id() const { return id_; }
  TierType type() const { return id_.type; }
  const Configuration &config() const { return config_; }
  TierStatus status() const;
  // The store a DGT/DWT binds to; a DST's own endpoint once running.
  virtual std::optional<Endpoint> assigned_dst() const { return runtime_.dst; }
  const std::string &implementation() const { return implementation_; }

  // created -> running. Throws Error(kStateMachine) from any other status
  // and Error(kStartup) if the tier cannot start.
  void Start();
  // Idempotent; returns the final status.
  TierStatus Stop();

 protected:
  virtual void DoStart() = 0;
  virtual void DoStop() = 0;
  void Log(LogLevel level, const std::string &message) const;
  std::string source() const { return "tier:" + id_.ToString(); }

  const TierRuntime &runtime() const { return runtime_; }
  Session::Options SessionOptions() const;

 private:
  friend std::unique_ptr<TierInstance> InstantiateTier(TierId, const Configuration &,
                                                       TierRuntime);

  TierId id_;
  Configuration config_;
  TierRuntime runtime_;
  std::string implementation_;
  mutable std::mutex status_mu_;
  TierStatus status_ = TierStatus::kCreated;
};

class DstTier : public TierInstance {
 public:
  DstTier(TierId id, Configuration config, TierRuntime runtime);
  ~DstTier() override;

  std::optional<Endpoint> assigned_dst() const override;
  DemandStore &store() { return *store_; }
  StoreServer &server() { return *server_; }

 protected:
  void DoStart() override;
  void DoStop() override;

 private:
  std::unique_ptr<DemandStore> store_;
  std::unique_ptr<StoreServer> server_;
};

class GeneratorTier : public TierInstance {
 public:
  enum class EvalState : std::uint8_t { kIdle, kRunning, kDone };
  // error is empty on success.
  using DoneFn = std::function<void(const GeneratorReport &report, const std::string &error)>;

  GeneratorTier(TierId id, Configuration config, TierRuntime runtime);
  ~GeneratorTier() override;

  const SimulatorParams &params() const { return params_; }

  // Throws Error(kConflict) while an evaluation runs and
  // Error(kStateMachine) unless the tier is running.
  void StartEvaluation(DoneFn on_done = nullptr);
  // Mode 1 only; throws Error(kConflict) otherwise or when no evaluation
  // runs.
  void Step(std::uint32_t steps);
  // Stops a running evaluation; its report is marked stopped_early.
  void StopEvaluation();

  EvalState eval_state() const;
  std::optional<GeneratorReport> last_report() const;
  std::string last_error() const;
  // Waits until the current evaluation finishes.
  bool WaitIdle(std::chrono::milliseconds timeout) const;

 protected:
  void DoStart() override {}
  void DoStop() override;

 private:
  SimulatorParams params_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  EvalState state_ = EvalState::kIdle;
  std::optional<GeneratorReport> report_;
  std::string error_;
  StepSignal steps_;
  std::jthread eval_;
};

class WorkerTier : public TierInstance {
 public:
  WorkerTier(TierId id, Configuration config, TierRuntime runtime);
  ~WorkerTier() override;

  const WorkFunction &work() const { return work_; }
  std::uint64_t computed() const { return computed_.load(); }

 protected:
  void DoStart() override;
  void DoStop() override;

 private:
  WorkFunction work_;
  WorkerOptions options_;
  std::atomic<std::uint64_t> computed_{0};
  std::jthread loop_;
};

// Picks the implementation named by the wrapper.impl key and builds an
// instance in status created. Throws Error(kFactory) for an unknown name, a
// name whose tier type differs from id.type, or a GMT implementation;
// Error(kValidation) for a configuration that fails its schema.
std::unique_ptr<TierInstance> InstantiateTier(TierId id, const Configuration &config,
                                              TierRuntime runtime = {});

}  // namespace tiernet
