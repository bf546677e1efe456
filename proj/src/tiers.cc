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

#include "tiernet/tiers.h"

#include <algorithm>
#include <map>
#include <random>

#include "tiernet/error.h"

namespace tiernet {

using Clock = std::chrono::steady_clock;
using std::chrono::microseconds;
using std::chrono::milliseconds;

bool SleepFor(std::stop_token stop, microseconds d) {
  std::mutex mu;
  std::condition_variable_any cv;
  std::unique_lock lock(mu);
  return !cv.wait_for(lock, stop, d, [] { return false; }) && !stop.stop_requested();
}

// ---------------------------------------------------------------------------
// Simulator

SimulatorParams SimulatorParams::FromConfig(const Configuration &config) {
  SimulatorParams p;
  p.mode = static_cast<int>(config.GetIntOr(keys::kSimMode, p.mode));
  p.tester_parameter =
      static_cast<std::uint32_t>(config.GetIntOr(keys::kSimTesterParameter, p.tester_parameter));
  p.instance_count =
      static_cast<std::uint32_t>(config.GetIntOr(keys::kSimTesterNumber, p.instance_count));
  p.payload_size = static_cast<std::uint32_t>(config.GetIntOr(keys::kSimPayload, p.payload_size));
  p.max_demands =
      static_cast<std::uint32_t>(config.GetIntOr(keys::kSimMaxDemands, p.instance_count));
  p.seed = static_cast<std::uint64_t>(config.GetIntOr(keys::kSimSeed, 0));
  p.program = config.GetOr(std::string(keys::kSimProgram), p.program);
  p.Check();
  return p;
}

void SimulatorParams::Check() const {
  if (mode < 0 || mode > 3) {
    throw Error(ErrorCode::kValidation, "simulator mode " + std::to_string(mode) + " not in 0..3");
  }
  if (max_demands < 1) throw Error(ErrorCode::kValidation, "max_demands must be at least 1");
  if (tester_parameter < 1) {
    throw Error(ErrorCode::kValidation, "tester.parameter must be at least 1");
  }
  if (program.empty()) throw Error(ErrorCode::kValidation, "simulator program id is empty");
}

Bytes SimulatorPayload(std::uint64_t seed, std::int64_t seq, std::size_t size) {
  std::mt19937_64 rng(seed ^ (static_cast<std::uint64_t>(seq) * 0x9E3779B97F4A7C15ull));
  Bytes out(size);
  for (std::size_t i = 0; i < size; i += 8) {
    auto v = rng();
    for (std::size_t k = 0; k < 8 && i + k < size; ++k) {
      out[i + k] = static_cast<std::uint8_t>(v >> (8 * k));
    }
  }
  return out;
}

DemandSignature SimulatorSignature(const std::string &program, std::int64_t seq) {
  return MakeSignature(program, "sim", {{"seq", seq}});
}

Demand SimulatorDemand(const SimulatorParams &params, std::int64_t seq, TierId issued_by) {
  return Demand::Issue(SimulatorSignature(params.program, seq), DemandKind::kProcedural,
                       SimulatorPayload(params.seed, seq, params.payload_size), issued_by);
}

// ---------------------------------------------------------------------------
// Work functions

Bytes Checksum(const Bytes &payload) {
  ByteWriter out;
  out.U64(Fnv1a64(payload));
  return out.Take();
}

const std::vector<std::string> &WorkFunctionNames() {
  static const std::vector<std::string> kNames = {"echo", "checksum", "sleep-then-checksum"};
  return kNames;
}

WorkFunction MakeWorkFunction(const std::string &name, milliseconds delay) {
  if (name == "echo") {
    return {name, [](const Bytes &p, std::stop_token) -> std::optional<Bytes> { return p; }};
  }
  if (name == "checksum") {
    return {name, [](const Bytes &p, std::stop_token) -> std::optional<Bytes> {
              return Checksum(p);
            }};
  }
  if (name == "sleep-then-checksum") {
    return {name, [delay](const Bytes &p, std::stop_token stop) -> std::optional<Bytes> {
              if (!SleepFor(stop, delay)) return std::nullopt;
              return Checksum(p);
            }};
  }
  throw Error(ErrorCode::kFactory, "unknown work function '" + name + "'");
}

// ---------------------------------------------------------------------------
// DstLink

bool IsConnectionError(const Error &e) {
  return e.code() == ErrorCode::kConnect || e.code() == ErrorCode::kTransport ||
         e.code() == ErrorCode::kHandshake;
}

DstLink::DstLink(Endpoint endpoint, TierId self, Options options)
    : endpoint_(std::move(endpoint)),
      self_(self),
      options_(options),
      backoff_(options.backoff_min) {}

Session &DstLink::Connected(std::stop_token stop) {
  if (stop.stop_requested()) {
    throw Error(ErrorCode::kTransport, "stopped");
  }
  if (session_ && session_->open()) return *session_;
  session_ = Session::Connect(endpoint_, self_, options_.session);
  was_connected_ = true;
  backoff_ = options_.backoff_min;
  return *session_;
}

void DstLink::Failed(std::stop_token stop, const Error &error) {
  session_.reset();
  if (was_connected_) {
    ++interruptions_;
    was_connected_ = false;
  }
  if (!SleepFor(stop, backoff_)) {
    throw Error(ErrorCode::kTransport,
                "stopped while reconnecting to " + endpoint_.ToString() + ": " + error.what());
  }
  backoff_ = std::min(backoff_ * 2, options_.backoff_max);
}

void DstLink::Close() { session_.reset(); }

// ---------------------------------------------------------------------------
// Generator

void StepSignal::Add(std::uint32_t steps) {
  {
    std::lock_guard lock(mu_);
    pending_ += steps;
  }
  cv_.notify_all();
}

std::uint32_t StepSignal::Take(std::stop_token stop, milliseconds timeout) {
  std::unique_lock lock(mu_);
  if (timeout.count() > 0) cv_.wait_for(lock, stop, timeout, [&] { return pending_ > 0; });
  return std::exchange(pending_, 0);
}

namespace {

enum class Pacing { kAllAtOnce, kOneAtATime, kStepped };

// Emits seqs according to pacing and collects every result into report.
void RunStream(const SimulatorParams &params, DstLink &link, TierId self,
               const std::vector<std::int64_t> &seqs, Pacing pacing, StepSignal *steps,
               std::stop_token stop, const GeneratorOptions &options, GeneratorReport &report) {
  const std::size_t n = seqs.size();
  std::size_t next = 0;
  std::size_t allowed = pacing == Pacing::kAllAtOnce ? n : 0;
  std::map<std::int64_t, Clock::time_point> outstanding;
  auto poll = options.poll_min;
  auto record = [&](std::int64_t seq, Clock::time_point t0, Bytes result) {
    report.latencies_us.push_back(
        std::chrono::duration_cast<microseconds>(Clock::now() - t0).count());
    report.results.emplace_back(seq, std::move(result));
    ++report.computed;
  };

  while (!stop.stop_requested()) {
    if (pacing == Pacing::kOneAtATime && outstanding.empty()) allowed = std::min(n, next + 1);
    if (pacing == Pacing::kStepped && steps != nullptr && next < n) {
      bool idle = outstanding.empty();
      auto taken = steps->Take(stop, idle ? milliseconds(50) : milliseconds(0));
      allowed = std::min<std::size_t>(n, allowed + std::size_t{taken} * params.tester_parameter);
    }
    while (next < allowed && !stop.stop_requested()) {
      auto seq = seqs[next];
      auto demand = SimulatorDemand(params, seq, self);
      auto t0 = Clock::now();
      auto reply = link.Run(stop, [&](Session &s) { return s.Deposit(demand); });
      ++report.emitted;
      ++next;
      if (reply.outcome == DepositOutcome::kAlreadyComputed) {
        ++report.cache_hits;
        record(seq, t0, std::move(reply.result));
      } else {
        outstanding.emplace(seq, t0);
      }
    }
    if (next == n && outstanding.empty()) return;

    bool progress = false;
    for (auto it = outstanding.begin(); it != outstanding.end() && !stop.stop_requested();) {
      auto sig = SimulatorSignature(params.program, it->first);
      auto result = link.Run(stop, [&](Session &s) { return s.Lookup(sig); });
      if (result) {
        record(it->first, it->second, std::move(*result));
        it = outstanding.erase(it);
        progress = true;
      } else {
        ++it;
      }
    }
    if (progress) {
      poll = options.poll_min;
    } else if (!outstanding.empty()) {
      SleepFor(stop, poll);
      poll = std::min(poll * 2, options.poll_max);
    }
  }
  report.stopped_early = true;
}

void Merge(GeneratorReport &into, GeneratorReport &&part) {
  into.emitted += part.emitted;
  into.computed += part.computed;
  into.cache_hits += part.cache_hits;
  into.interruptions += part.interruptions;
  into.stopped_early = into.stopped_early || part.stopped_early;
  into.latencies_us.insert(into.latencies_us.end(), part.latencies_us.begin(),
                           part.latencies_us.end());
  for (auto &r : part.results) into.results.push_back(std::move(r));
}

}  // namespace

GeneratorReport RunGenerator(const SimulatorParams &params, const Endpoint &dst, TierId self,
                             StepSignal *steps, std::stop_token stop,
                             const GeneratorOptions &options) {
  params.Check();
  GeneratorReport report;
  report.mode = params.mode;
  report.requested = params.max_demands;

  const std::size_t streams =
      params.mode == 3 ? std::min<std::size_t>(params.tester_parameter, params.max_demands) : 1;
  std::vector<std::vector<std::int64_t>> seqs(streams);
  for (std::int64_t k = 1; k <= static_cast<std::int64_t>(params.max_demands); ++k) {
    seqs[(k - 1) % streams].push_back(k);
  }
  const Pacing pacing = params.mode == 1   ? Pacing::kStepped
                        : params.mode == 2 ? Pacing::kOneAtATime
                                           : Pacing::kAllAtOnce;

  auto run = [&](std::size_t i, GeneratorReport &part) {
    DstLink link(dst, self, options.link);
    try {
      RunStream(params, link, self, seqs[i], pacing, steps, stop, options, part);
    } catch (const Error &e) {
      if (!stop.stop_requested()) {
        part.interruptions += link.interruptions();
        throw;
      }
      part.stopped_early = true;
    }
    part.interruptions += link.interruptions();
  };

  if (streams == 1) {
    run(0, report);
  } else {
    std::vector<GeneratorReport> parts(streams);
    std::vector<std::exception_ptr> errors(streams);
    {
      std::vector<std::jthread> threads;
      for (std::size_t i = 0; i < streams; ++i) {
        threads.emplace_back([&, i] {
          try {
            run(i, parts[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        });
      }
    }
    for (auto &e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (auto &p : parts) Merge(report, std::move(p));
  }
  std::sort(report.results.begin(), report.results.end(),
            [](const auto &a, const auto &b) { return a.first < b.first; });
  return report;
}

// ---------------------------------------------------------------------------
// Worker

std::uint64_t RunWorker(DstLink &link, const WorkFunction &work, const WorkerOptions &options,
                        std::stop_token stop) {
  const auto filter = GrabFilter::Kinds({DemandKind::kProcedural});
  std::uint64_t delivered = 0;
  while (!stop.stop_requested()) {
    std::optional<Demand> demand;
    try {
      demand = link.Run(stop, [&](Session &s) { return s.Grab(filter); });
    } catch (const Error &e) {
      if (stop.stop_requested()) break;
      Emit(options.log, LogLevel::kWarn, options.source, std::string("grab failed: ") + e.what());
      SleepFor(stop, options.poll);
      continue;
    }
    if (!demand) {
      SleepFor(stop, options.poll);
      continue;
    }
    auto result = work.apply(demand->payload(), stop);
    if (!result) {
      Emit(options.log, LogLevel::kWarn, options.source,
           "abandoned " + demand->signature().ToString() + " on stop");
      break;
    }
    try {
      link.Run(stop, [&](Session &s) {
        s.Return(demand->signature(), std::move(*result));
        return 0;
      });
      ++delivered;
      if (options.delivered) ++*options.delivered;
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kOwnership || e.code() == ErrorCode::kNotFound) {
        // The store requeued it after our session dropped; someone else owns it.
        Emit(options.log, LogLevel::kWarn, options.source,
             "result for " + demand->signature().ToString() + " dropped: " + e.what());
        continue;
      }
      if (stop.stop_requested()) break;
      throw;
    }
  }
  link.Close();
  return delivered;
}

// ---------------------------------------------------------------------------
// TierInstance

std::string_view TierStatusName(TierStatus status) {
  switch (status) {
    case TierStatus::kCreated:
      return "created";
    case TierStatus::kRunning:
      return "running";
    case TierStatus::kStopping:
      return "stopping";
    case TierStatus::kStopped:
      return "stopped";
  }
  return "unknown";
}

std::optional<TierStatus> ParseTierStatus(std::string_view name) {
  for (auto s : {TierStatus::kCreated, TierStatus::kRunning, TierStatus::kStopping,
                 TierStatus::kStopped}) {
    if (TierStatusName(s) == name) return s;
  }
  return std::nullopt;
}

TierInstance::TierInstance(TierId id, Configuration config, TierRuntime runtime)
    : id_(id), config_(std::move(config)), runtime_(std::move(runtime)) {
  implementation_ = config_.GetOr(std::string(keys::kWrapperImpl), "");
}

TierInstance::~TierInstance() = default;

TierStatus TierInstance::status() const {
  std::lock_guard lock(status_mu_);
  return status_;
}

void TierInstance::Start() {
  {
    std::lock_guard lock(status_mu_);
    if (status_ != TierStatus::kCreated) {
      throw Error(ErrorCode::kStateMachine, "cannot start tier " + id_.ToString() + " in status " +
                                                std::string(TierStatusName(status_)));
    }
  }
  try {
    DoStart();
  } catch (const Error &e) {
    std::lock_guard lock(status_mu_);
    status_ = TierStatus::kStopped;
    throw Error(ErrorCode::kStartup, "tier " + id_.ToString() + " failed to start: " + e.what());
  }
  std::lock_guard lock(status_mu_);
  status_ = TierStatus::kRunning;
  Log(LogLevel::kInfo, "started " + implementation_);
}

TierStatus TierInstance::Stop() {
  {
    std::lock_guard lock(status_mu_);
    if (status_ == TierStatus::kStopping || status_ == TierStatus::kStopped) {
      return TierStatus::kStopped;
    }
    status_ = TierStatus::kStopping;
  }
  DoStop();
  std::lock_guard lock(status_mu_);
  status_ = TierStatus::kStopped;
  Log(LogLevel::kInfo, "stopped");
  return status_;
}

void TierInstance::Log(LogLevel level, const std::string &message) const {
  Emit(runtime_.log, level, source(), message);
}

Session::Options TierInstance::SessionOptions() const {
  Session::Options o;
  o.connect_timeout = milliseconds(2'000);
  o.keepalive = runtime_.keepalive;
  return o;
}

// ---------------------------------------------------------------------------
// DstTier

DstTier::DstTier(TierId id, Configuration config, TierRuntime runtime)
    : TierInstance(id, std::move(config), std::move(runtime)) {}

DstTier::~DstTier() { Stop(); }

std::optional<Endpoint> DstTier::assigned_dst() const {
  if (!server_) return std::nullopt;
  return server_->endpoint();
}

void DstTier::DoStart() {
  DemandStore::Options store_options;
  if (auto journal = config().Get(keys::kDstJournal)) store_options.journal = *journal;
  store_ = std::make_unique<DemandStore>(store_options);
  StoreServer::Options server_options;
  server_options.host = config().GetOr(std::string(keys::kDstHost), "127.0.0.1");
  server_options.port = static_cast<std::uint16_t>(config().GetIntOr(keys::kDstPort, 0));
  server_options.heartbeat.interval = milliseconds(config().GetIntOr(keys::kDstHeartbeatMs, 10'000));
  server_ = std::make_unique<StoreServer>(*store_, server_options);
  server_->OnSessionLost([this](TierId peer, std::size_t requeued, std::size_t) {
    Log(requeued > 0 ? LogLevel::kWarn : LogLevel::kInfo,
        "session of " + peer.ToString() + " lost, " + std::to_string(requeued) + " requeued");
  });
  server_->Start();
}

void DstTier::DoStop() {
  if (server_) server_->Stop();
}

// ---------------------------------------------------------------------------
// GeneratorTier

GeneratorTier::GeneratorTier(TierId id, Configuration config, TierRuntime runtime)
    : TierInstance(id, std::move(config), std::move(runtime)),
      params_(SimulatorParams::FromConfig(this->config())) {}

GeneratorTier::~GeneratorTier() { Stop(); }

void GeneratorTier::StartEvaluation(DoneFn on_done) {
  if (status() != TierStatus::kRunning) {
    throw Error(ErrorCode::kStateMachine, "generator " + id().ToString() + " is not running");
  }
  if (!runtime().dst) {
    throw Error(ErrorCode::kStateMachine, "generator " + id().ToString() + " has no store");
  }
  std::unique_lock lock(mu_);
  if (state_ == EvalState::kRunning) {
    throw Error(ErrorCode::kConflict, "generator " + id().ToString() + " is already evaluating");
  }
  if (eval_.joinable()) {
    lock.unlock();
    eval_.join();
    lock.lock();
  }
  state_ = EvalState::kRunning;
  report_.reset();
  error_.clear();
  steps_.Take({}, milliseconds(0));
  GeneratorOptions options;
  options.link.session = SessionOptions();
  eval_ = std::jthread([this, options, on_done = std::move(on_done)](std::stop_token stop) {
    GeneratorReport report;
    std::string error;
    try {
      report = RunGenerator(params_, *runtime().dst, id(), &steps_, stop, options);
    } catch (const std::exception &e) {
      error = e.what();
      report.mode = params_.mode;
      report.requested = params_.max_demands;
    }
    if (error.empty()) {
      Log(LogLevel::kInfo, "evaluation done: " + std::to_string(report.computed) + "/" +
                               std::to_string(report.requested) + " computed");
    } else {
      Log(LogLevel::kError, "evaluation failed: " + error);
    }
    {
      std::lock_guard lock(mu_);
      state_ = EvalState::kDone;
      report_ = report;
      error_ = error;
    }
    cv_.notify_all();
    if (on_done) on_done(report, error);
  });
  Log(LogLevel::kInfo, "evaluation started in mode " + std::to_string(params_.mode));
}

void GeneratorTier::Step(std::uint32_t steps) {
  if (params_.mode != 1) {
    throw Error(ErrorCode::kConflict, "generator " + id().ToString() + " is in mode " +
                                          std::to_string(params_.mode) + ", not user-controlled");
  }
  std::lock_guard lock(mu_);
  if (state_ != EvalState::kRunning) {
    throw Error(ErrorCode::kConflict, "generator " + id().ToString() + " is not evaluating");
  }
  steps_.Add(steps);
}

void GeneratorTier::StopEvaluation() {
  eval_.request_stop();
  if (eval_.joinable()) eval_.join();
}

GeneratorTier::EvalState GeneratorTier::eval_state() const {
  std::lock_guard lock(mu_);
  return state_;
}

std::optional<GeneratorReport> GeneratorTier::last_report() const {
  std::lock_guard lock(mu_);
  return report_;
}

std::string GeneratorTier::last_error() const {
  std::lock_guard lock(mu_);
  return error_;
}

bool GeneratorTier::WaitIdle(milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] { return state_ != EvalState::kRunning; });
}

void GeneratorTier::DoStop() { StopEvaluation(); }

// ---------------------------------------------------------------------------
// WorkerTier

WorkerTier::WorkerTier(TierId id, Configuration config, TierRuntime runtime)
    : TierInstance(id, std::move(config), std::move(runtime)),
      work_(MakeWorkFunction(this->config().GetOr(std::string(keys::kDwtWork), "checksum"),
                             milliseconds(this->config().GetIntOr(keys::kDwtDelayMs, 10)))) {
  options_.poll = milliseconds(this->config().GetIntOr(keys::kDwtPollMs, 100));
  options_.log = this->runtime().log;
  options_.source = source();
  options_.delivered = &computed_;
}

WorkerTier::~WorkerTier() { Stop(); }

void WorkerTier::DoStart() {
  if (!runtime().dst) {
    throw Error(ErrorCode::kStartup, "worker " + id().ToString() + " has no store");
  }
  DstLink::Options link_options;
  link_options.session = SessionOptions();
  loop_ = std::jthread([this, link_options](std::stop_token stop) {
    DstLink link(*runtime().dst, id(), link_options);
    try {
      RunWorker(link, work_, options_, stop);
    } catch (const std::exception &e) {
      Log(LogLevel::kError, std::string("worker loop ended: ") + e.what());
    }
  });
}

void WorkerTier::DoStop() {
  loop_.request_stop();
  if (loop_.joinable()) loop_.join();
}

// ---------------------------------------------------------------------------
// Factory

namespace {

using Maker = std::function<std::unique_ptr<TierInstance>(TierId, Configuration, TierRuntime)>;

template <typename T>
Maker MakerFor() {
  return [](TierId id, Configuration config, TierRuntime runtime) {
    return std::make_unique<T>(id, std::move(config), std::move(runtime));
  };
}

const std::map<std::string, Maker, std::less<>> &Registry() {
  static const auto *kRegistry = [] {
    auto *r = new std::map<std::string, Maker, std::less<>>;
    for (const auto &n : ImplementationNames(TierType::kDST)) (*r)[n] = MakerFor<DstTier>();
    for (const auto &n : ImplementationNames(TierType::kDGT)) (*r)[n] = MakerFor<GeneratorTier>();
    for (const auto &n : ImplementationNames(TierType::kDWT)) (*r)[n] = MakerFor<WorkerTier>();
    return r;
  }();
  return *kRegistry;
}

}  // namespace

std::unique_ptr<TierInstance> InstantiateTier(TierId id, const Configuration &config,
                                              TierRuntime runtime) {
  auto impl = config.Get(keys::kWrapperImpl);
  if (!impl) {
    throw Error(ErrorCode::kFactory, "configuration " + config.source_name() + " has no " +
                                         std::string(keys::kWrapperImpl));
  }
  auto type = TierTypeOfImplementation(*impl);
  if (!type) throw Error(ErrorCode::kFactory, "unknown tier implementation '" + *impl + "'");
  if (*type == TierType::kGMT) {
    throw Error(ErrorCode::kFactory, "GMT implementations are started by the manager");
  }
  if (*type != id.type) {
    throw Error(ErrorCode::kFactory, "implementation '" + *impl + "' is a " +
                                         std::string(TierTypeName(*type)) + ", requested " +
                                         std::string(TierTypeName(id.type)));
  }
  RequireValid(config, SchemaFor(*type));
  auto it = Registry().find(*impl);
  if (it == Registry().end()) {
    throw Error(ErrorCode::kFactory, "no constructor registered for '" + *impl + "'");
  }
  return it->second(id, config, std::move(runtime));
}

}  // namespace tiernet
