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

#include "tiernet/node.h"

#include <random>

#include "tiernet/error.h"

namespace tiernet {

using std::chrono::milliseconds;
using Clock = std::chrono::steady_clock;

namespace {

constexpr TierId kUnregistered{0, TierType::kNode, 0};

std::int64_t RandomNonce() {
  std::random_device rd;
  std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  return static_cast<std::int64_t>(v >> 2);
}

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

NodeDaemon::NodeDaemon(Configuration config, Options options)
    : config_(std::move(config)), options_(std::move(options)) {
  keepalive_ = milliseconds(config_.GetIntOr(keys::kNodeHeartbeatMs, 2'000));
  identity_.name = config_.GetOr(std::string(keys::kNodeName), "");
  identity_.host = config_.GetOr(std::string(keys::kNodeHost), "127.0.0.1");
  identity_.color = config_.GetOr(std::string(keys::kNodeColor), "");
}

std::unique_ptr<NodeDaemon> NodeDaemon::Start(const Configuration &config, Options options) {
  try {
    RequireValid(config, SchemaFor(TierType::kNode));
  } catch (const Error &e) {
    throw Error(ErrorCode::kStartup, e.what());
  }
  if (auto ep = config.Get(keys::kNodeGmtEndpoint)) options.gmt_endpoint = Endpoint::Parse(*ep);
  if (!options.gmt_endpoint && !config.GetBoolOr(keys::kNodeGmtHost, false)) {
    throw Error(ErrorCode::kStartup, "node configuration names no " +
                                         std::string(keys::kNodeGmtEndpoint) +
                                         " and the node does not host the GMT");
  }
  std::unique_ptr<NodeDaemon> node(new NodeDaemon(config, std::move(options)));
  node->Log(LogLevel::kInfo, "node started");
  return node;
}

NodeDaemon::~NodeDaemon() { Stop(); }

std::string NodeDaemon::source() const { return "node:" + identity_.name; }

void NodeDaemon::Log(LogLevel level, const std::string &message) const {
  Emit(options_.log, level, source(), message);
}

void NodeDaemon::SetGmtEndpoint(Endpoint endpoint) {
  std::lock_guard lock(mu_);
  options_.gmt_endpoint = std::move(endpoint);
}

NodeIdentity NodeDaemon::identity() const {
  std::lock_guard lock(mu_);
  return identity_;
}

bool NodeDaemon::registered() const {
  std::lock_guard lock(mu_);
  return identity_.node_id.has_value();
}

std::vector<HostedTier> NodeDaemon::Tiers() const {
  std::lock_guard lock(mu_);
  std::vector<HostedTier> out;
  for (const auto &[id, t] : tiers_) {
    out.push_back({id, t->config().source_name(), t->status(), t->assigned_dst()});
  }
  return out;
}

std::shared_ptr<TierInstance> NodeDaemon::FindTier(const TierId &id) const {
  std::lock_guard lock(mu_);
  auto it = tiers_.find(id);
  return it == tiers_.end() ? nullptr : it->second;
}

NodeIdentity NodeDaemon::Register() {
  std::lock_guard reg(register_mu_);
  if (stopped_) throw Error(ErrorCode::kStateMachine, "node is stopped");
  if (auto id = identity().node_id) {
    throw Error(ErrorCode::kConflict, "already registered as node " + std::to_string(*id));
  }
  auto identity = RegisterOnce(options_.registration_timeout);
  if (!loop_.joinable()) {
    loop_ = std::jthread([this](std::stop_token stop) { ServiceLoop(stop); });
  }
  return identity;
}

NodeIdentity NodeDaemon::RegisterOnce(milliseconds timeout) {
  std::optional<Endpoint> gmt;
  NodeRegistration body;
  {
    std::lock_guard lock(mu_);
    gmt = options_.gmt_endpoint;
    body = {identity_.name, identity_.host, identity_.color};
  }
  if (!gmt) throw Error(ErrorCode::kRegistration, "no registration store endpoint known");
  const auto deadline = Clock::now() + timeout;
  auto remaining = [&] {
    return std::max(milliseconds(1),
                    std::chrono::duration_cast<milliseconds>(deadline - Clock::now()));
  };
  auto backoff = milliseconds(50);
  const auto sig = SystemSignature("NodeRegistration", {{"nonce", RandomNonce()}});
  std::optional<RegistrationResult> result;
  bool deposited = false;
  while (!result) {
    if (Clock::now() >= deadline) {
      throw Error(ErrorCode::kTimeout, "registration with " + gmt->ToString() + " timed out after " +
                                           std::to_string(timeout.count()) + " ms");
    }
    try {
      auto pre = Session::Connect(*gmt, kUnregistered,
                                  {.connect_timeout = std::min(remaining(), milliseconds(2'000)),
                                   .call_timeout = std::min(remaining(), milliseconds(5'000))});
      if (!deposited) {
        pre->Deposit(MakeSystemDemand(sig, body, kUnregistered));
        deposited = true;
        Log(LogLevel::kInfo, "registration requested at " + gmt->ToString());
      }
      while (Clock::now() < deadline && !stopped_) {
        if (auto bytes = pre->Lookup(sig)) {
          result = DecodeBodyAs<RegistrationResult>(*bytes);
          break;
        }
        std::this_thread::sleep_for(options_.poll);
      }
      if (stopped_) throw Error(ErrorCode::kStateMachine, "node stopped during registration");
    } catch (const Error &e) {
      if (!IsConnectionError(e)) throw;
      Log(LogLevel::kWarn, std::string("registration attempt failed: ") + e.what());
      std::this_thread::sleep_for(std::min(backoff, remaining()));
      backoff = std::min(backoff * 2, milliseconds(1'000));
    }
  }
  if (!result->error.empty()) {
    throw Error(ErrorCode::kRegistration, "registration rejected: " + result->error);
  }

  const TierId self{result->node_id, TierType::kNode, 0};
  Session::Options session_options;
  session_options.keepalive = keepalive_;
  auto control = std::shared_ptr<Session>(Session::Connect(*gmt, self, session_options));
  std::unique_ptr<Session> dst_session;
  if (result->dst != *gmt) dst_session = Session::Connect(result->dst, self, session_options);
  {
    std::lock_guard lock(session_mu_);
    control_ = std::move(control);
    dst_session_ = std::move(dst_session);
  }
  NodeIdentity out;
  {
    std::lock_guard lock(mu_);
    identity_.node_id = result->node_id;
    identity_.dst_index = result->dst_index;
    identity_.dst = result->dst;
    out = identity_;
  }
  Log(LogLevel::kInfo, "registered as node " + std::to_string(result->node_id) + ", DST " +
                           std::to_string(result->dst_index) + " at " + result->dst.ToString());
  return out;
}

void NodeDaemon::ServiceLoop(std::stop_token stop) {
  auto backoff = milliseconds(50);
  while (!stop.stop_requested()) {
    std::shared_ptr<Session> session;
    {
      std::lock_guard lock(session_mu_);
      session = control_;
    }
    if (!session || !session->open()) {
      Log(LogLevel::kWarn, "control session lost; registering again");
      try {
        {
          std::lock_guard lock(mu_);
          identity_.node_id.reset();
        }
        RegisterOnce(options_.registration_timeout);
        backoff = milliseconds(50);
      } catch (const Error &e) {
        Log(LogLevel::kError, std::string("re-registration failed: ") + e.what());
        SleepFor(stop, backoff);
        backoff = std::min(backoff * 2, milliseconds(5'000));
      }
      continue;
    }
    auto id = identity().node_id.value_or(0);
    auto filter = GrabFilter::Kinds({DemandKind::kSystem}).WithContext("node", id);
    std::optional<Demand> demand;
    try {
      demand = session->Grab(filter);
    } catch (const Error &e) {
      if (!IsConnectionError(e)) {
        Log(LogLevel::kError, std::string("grab failed: ") + e.what());
        SleepFor(stop, options_.poll);
      }
      session->Close();
      continue;
    }
    if (!demand) {
      SleepFor(stop, options_.poll);
      continue;
    }
    Serve(*demand);
  }
}

bool NodeDaemon::Reply(const DemandSignature &signature, const SystemDemandBody &body) {
  std::shared_ptr<Session> session;
  {
    std::lock_guard lock(session_mu_);
    session = control_;
  }
  if (!session) return false;
  try {
    session->Return(signature, EncodeBody(body));
    return true;
  } catch (const Error &e) {
    Log(LogLevel::kError, "could not return " + std::string(BodyName(body)) + ": " + e.what());
    return false;
  }
}

void NodeDaemon::Serve(const Demand &demand) {
  const auto sig = demand.signature();
  SystemDemandBody body;
  try {
    body = DecodeBody(demand.payload());
  } catch (const Error &e) {
    Reply(sig, Ack{std::string("malformed system demand: ") + e.what()});
    return;
  }
  auto generator = [&](const TierId &id) -> std::shared_ptr<GeneratorTier> {
    return std::dynamic_pointer_cast<GeneratorTier>(FindTier(id));
  };
  std::visit(
      Overloaded{
          [&](const TierAllocationRequest &req) { Reply(sig, ServeAllocation(req)); },
          [&](const TierDeallocationRequest &req) { Reply(sig, ServeDeallocation(req)); },
          [&](const StartEvaluation &req) {
            auto g = generator(req.generator);
            if (!g) {
              Reply(sig, EvaluationResult{req.generator.ToString() + " is not a generator here", {}});
              return;
            }
            try {
              g->StartEvaluation([this, sig](const GeneratorReport &report, const std::string &error) {
                Reply(sig, EvaluationResult{error, report});
              });
            } catch (const Error &e) {
              Reply(sig, EvaluationResult{e.what(), {}});
            }
          },
          [&](const StepGenerator &req) {
            auto g = generator(req.generator);
            if (!g) {
              Reply(sig, Ack{req.generator.ToString() + " is not a generator here"});
              return;
            }
            try {
              g->Step(req.steps);
              Reply(sig, Ack{});
            } catch (const Error &e) {
              Reply(sig, Ack{e.what()});
            }
          },
          [&](const StopTier &req) {
            auto g = generator(req.tier);
            if (!g) {
              Reply(sig, Ack{req.tier.ToString() + " is not a generator here"});
              return;
            }
            g->StopEvaluation();
            Reply(sig, Ack{});
          },
          [&](const auto &other) {
            Reply(sig, Ack{"unexpected system demand " + std::string(BodyName(other))});
          },
      },
      body);
}

TierAllocationResult NodeDaemon::ServeAllocation(const TierAllocationRequest &request) {
  TierAllocationResult result;
  auto own = identity().node_id;
  if (!own || *own != request.node_id) {
    result.errors.push_back("request addressed to node " + std::to_string(request.node_id));
    return result;
  }
  Configuration config;
  try {
    config = ParseConfig(request.config_text, request.config_name);
  } catch (const Error &e) {
    result.errors.push_back(e.what());
    return result;
  }
  auto impl = config.Get(keys::kWrapperImpl);
  auto impl_type = impl ? TierTypeOfImplementation(*impl) : std::nullopt;
  if (!impl_type) {
    result.errors.push_back(request.config_name + ": unknown or missing " +
                            std::string(keys::kWrapperImpl));
    return result;
  }
  if (*impl_type != request.tier_type) {
    result.errors.push_back(request.config_name + " configures a " +
                            std::string(TierTypeName(*impl_type)) + ", not a " +
                            std::string(TierTypeName(request.tier_type)));
    return result;
  }
  for (const auto &f : Validate(config, SchemaFor(request.tier_type))) {
    if (f.severity == Severity::kError) result.errors.push_back(request.config_name + ": " + f.key + ": " + f.reason);
  }
  const bool bound = request.tier_type == TierType::kDGT || request.tier_type == TierType::kDWT;
  if (bound && !request.dst) result.errors.push_back("no DST endpoint for a bound tier");
  if (!result.errors.empty()) return result;

  for (std::uint32_t i = 0; i < request.count; ++i) {
    TierId id;
    {
      std::lock_guard lock(mu_);
      id = {*own, request.tier_type, ++next_index_[request.tier_type]};
    }
    TierRuntime runtime;
    if (bound) runtime.dst = request.dst;
    runtime.keepalive = keepalive_;
    runtime.log = options_.log;
    TierRegistration reg;
    reg.tier_id = id;
    reg.config_name = request.config_name;
    try {
      std::shared_ptr<TierInstance> tier = InstantiateTier(id, config, runtime);
      tier->Start();
      reg.endpoint = tier->assigned_dst();
      std::lock_guard lock(mu_);
      tiers_[id] = std::move(tier);
    } catch (const Error &e) {
      reg.error = e.what();
    }
    result.registrations.push_back(std::move(reg));
  }
  return result;
}

TierDeallocationResult NodeDaemon::ServeDeallocation(const TierDeallocationRequest &request) {
  TierDeallocationResult result;
  for (const auto &id : request.tier_ids) {
    std::shared_ptr<TierInstance> tier;
    {
      std::lock_guard lock(mu_);
      auto it = tiers_.find(id);
      if (it != tiers_.end() && id.type == request.tier_type) {
        tier = it->second;
        tiers_.erase(it);
      }
    }
    if (!tier) {
      result.outcomes.push_back({id, DeallocationStatus::kNotFound, "no such tier on this node"});
      continue;
    }
    try {
      tier->Stop();
      result.outcomes.push_back({id, DeallocationStatus::kStopped, ""});
      Log(LogLevel::kInfo, "deallocated " + id.ToString());
    } catch (const std::exception &e) {
      result.outcomes.push_back({id, DeallocationStatus::kFailed, e.what()});
    }
  }
  return result;
}

void NodeDaemon::Stop() {
  if (stopped_.exchange(true)) return;
  loop_.request_stop();
  if (loop_.joinable()) loop_.join();
  std::map<TierId, std::shared_ptr<TierInstance>> tiers;
  {
    std::lock_guard lock(mu_);
    tiers.swap(tiers_);
  }
  for (auto &[id, t] : tiers) t->Stop();
  {
    std::lock_guard lock(session_mu_);
    control_.reset();
    dst_session_.reset();
  }
  Log(LogLevel::kInfo, "node stopped");
}

}  // namespace tiernet
