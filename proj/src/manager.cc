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

#include "tiernet/manager.h"

#include <algorithm>

#include "tiernet/error.h"
#include "tiernet/tiers.h"

namespace tiernet {

using std::chrono::milliseconds;

std::string_view NodeStatusName(NodeStatus status) {
  return status == NodeStatus::kRegistered ? "registered" : "lost";
}

std::string_view EvalStatusName(EvalStatus status) {
  switch (status) {
    case EvalStatus::kIdle:
      return "idle";
    case EvalStatus::kRunning:
      return "running";
    case EvalStatus::kDone:
      return "done";
  }
  return "idle";
}

// ---------------------------------------------------------------------------
// RegistrySnapshot

Configuration RegistrySnapshot::ToConfiguration(bool include_volatile) const {
  Configuration c;
  c.AddComment("registry dump");
  for (const auto &n : nodes) {
    const auto p = "net.registry.node." + std::to_string(n.node_id) + ".";
    c.Set(p + "name", n.name);
    c.Set(p + "host", n.host);
    c.Set(p + "color", n.color);
    c.Set(p + "status", NodeStatusName(n.status));
    c.Set(p + "dst", std::to_string(n.dst_index));
    if (include_volatile) c.Set(p + "registered_at", std::to_string(n.registered_at_ms));
  }
  for (const auto &d : dsts) {
    const auto p = "net.registry.dst." + std::to_string(d.index) + ".";
    c.Set(p + "tier", d.tier ? d.tier->ToString() : "registration");
    c.Set(p + "active", d.active ? "true" : "false");
    if (include_volatile) c.Set(p + "endpoint", d.endpoint.ToString());
  }
  for (const auto &t : tiers) {
    const auto p = "net.registry.tier." + t.tier_id.ToString() + ".";
    c.Set(p + "config", t.config_name);
    c.Set(p + "dst", std::to_string(t.dst_index));
    c.Set(p + "status", t.status);
  }
  for (const auto &e : evaluations) {
    const auto p = "net.registry.eval." + e.generator.ToString() + ".";
    c.Set(p + "status", EvalStatusName(e.status));
    if (e.report) c.Set(p + "computed", std::to_string(e.report->computed));
    if (!e.error.empty()) c.Set(p + "error", e.error);
  }
  return c;
}

// ---------------------------------------------------------------------------
// InfoKeeper

InfoKeeper::InfoKeeper(Endpoint registration_store) {
  dsts_.push_back({0, std::move(registration_store), std::nullopt, true});
}

NodeRecord &InfoKeeper::AddNode(NodeRegistration registration, std::uint32_t dst_index) {
  NodeRecord r;
  r.node_id = next_node_id_++;
  r.name = std::move(registration.name);
  r.host = std::move(registration.host);
  r.color = std::move(registration.color);
  r.registered_at_ms = NowMs();
  r.dst_index = dst_index;
  return nodes_[r.node_id] = std::move(r);
}

NodeRecord *InfoKeeper::FindNode(std::uint32_t node_id) {
  auto it = nodes_.find(node_id);
  return it == nodes_.end() ? nullptr : &it->second;
}

NodeRecord *InfoKeeper::FindLostByName(const std::string &name) {
  for (auto &[id, n] : nodes_) {
    if (n.status == NodeStatus::kLost && n.name == name) return &n;
  }
  return nullptr;
}

std::uint32_t InfoKeeper::AddDst(Endpoint endpoint, TierId tier) {
  auto index = static_cast<std::uint32_t>(dsts_.size());
  dsts_.push_back({index, std::move(endpoint), tier, true});
  return index;
}

const DstRecord *InfoKeeper::FindDst(std::uint32_t index) const {
  return index < dsts_.size() ? &dsts_[index] : nullptr;
}

std::uint32_t InfoKeeper::AssignableDst() const {
  for (auto it = dsts_.rbegin(); it != dsts_.rend(); ++it) {
    if (it->index > 0 && it->active) return it->index;
  }
  return 0;
}

void InfoKeeper::PutTier(TierRecord record) { tiers_[record.tier_id] = std::move(record); }

bool InfoKeeper::RemoveTier(const TierId &id) { return tiers_.erase(id) > 0; }

const TierRecord *InfoKeeper::FindTier(const TierId &id) const {
  auto it = tiers_.find(id);
  return it == tiers_.end() ? nullptr : &it->second;
}

RegistrySnapshot InfoKeeper::Snapshot() const {
  RegistrySnapshot s;
  for (const auto &[id, n] : nodes_) s.nodes.push_back(n);
  for (const auto &[id, t] : tiers_) s.tiers.push_back(t);
  s.dsts = dsts_;
  for (const auto &[id, e] : evaluations_) s.evaluations.push_back(e);
  return s;
}

// ---------------------------------------------------------------------------
// Manager

Manager::Manager(Options options) : options_(std::move(options)) {}

std::unique_ptr<Manager> Manager::Bootstrap(const Configuration &config, Options options) {
  RequireValid(config, SchemaFor(TierType::kGMT));
  std::unique_ptr<Manager> m(new Manager(std::move(options)));
  m->store_ = std::make_unique<DemandStore>();
  StoreServer::Options server_options;
  server_options.host = config.GetOr(std::string(keys::kGmtHost), "127.0.0.1");
  server_options.port = static_cast<std::uint16_t>(config.GetIntOr(keys::kGmtPort, 0));
  server_options.heartbeat.interval = milliseconds(config.GetIntOr(keys::kGmtHeartbeatMs, 10'000));
  m->server_ = std::make_unique<StoreServer>(*m->store_, server_options);
  m->server_->OnSessionLost([raw = m.get()](TierId peer, std::size_t, std::size_t remaining) {
    raw->OnSessionLost(peer, remaining);
  });
  m->server_->Start();
  m->keeper_ = std::make_unique<InfoKeeper>(m->server_->endpoint());
  m->store_->Attach(kManagerTierId);
  m->loop_ = std::jthread([raw = m.get()](std::stop_token stop) { raw->RegistrationLoop(stop); });
  m->Log(LogLevel::kInfo, "registration store listening on " + m->server_->endpoint().ToString());
  return m;
}

Manager::~Manager() { Shutdown(); }

void Manager::Shutdown() {
  loop_.request_stop();
  if (loop_.joinable()) loop_.join();
  if (server_) server_->Stop();
}

void Manager::Log(LogLevel level, const std::string &message) const {
  Emit(options_.log, level, "GMT", message);
}

void Manager::RegistrationLoop(std::stop_token stop) {
  auto filter = GrabFilter::Kinds({DemandKind::kSystem}).WithIdentifier("NodeRegistration");
  while (!stop.stop_requested()) {
    auto demand = store_->Grab(kManagerTierId, filter);
    if (!demand) {
      SleepFor(stop, options_.poll);
      continue;
    }
    ProcessRegistration(*demand);
  }
}

void Manager::ProcessRegistration(const Demand &demand) {
  RegistrationResult result;
  try {
    auto reg = DecodeBodyAs<NodeRegistration>(demand.payload());
    std::lock_guard lock(mu_);
    NodeRecord *node = reg.name.empty() ? nullptr : keeper_->FindLostByName(reg.name);
    if (node != nullptr) {
      node->status = NodeStatus::kRegistered;
      node->host = reg.host;
      node->color = reg.color;
      node->dst_index = keeper_->AssignableDst();
      for (auto &t : keeper_->Snapshot().tiers) {
        if (t.tier_id.node_id == node->node_id) {
          t.status = "running";
          keeper_->PutTier(t);
        }
      }
    } else {
      node = &keeper_->AddNode(reg, keeper_->AssignableDst());
    }
    result.node_id = node->node_id;
    result.dst_index = node->dst_index;
    result.dst = keeper_->FindDst(node->dst_index)->endpoint;
  } catch (const Error &e) {
    result.error = std::string("malformed registration: ") + e.what();
  }
  store_->ReturnResult(kManagerTierId, demand.signature(), EncodeBody(result));
  RecordPairing("NodeRegistration", demand.signature());
  if (result.error.empty()) {
    Log(LogLevel::kInfo, "registered node " + std::to_string(result.node_id) + " with DST " +
                             std::to_string(result.dst_index));
  } else {
    Log(LogLevel::kError, result.error);
  }
}

void Manager::OnSessionLost(TierId peer, std::size_t remaining) {
  if (peer.type != TierType::kNode || peer.node_id == 0 || remaining > 0) return;
  {
    std::lock_guard lock(mu_);
    auto *node = keeper_->FindNode(peer.node_id);
    if (node == nullptr || node->status == NodeStatus::kLost) return;
    node->status = NodeStatus::kLost;
    for (auto &t : keeper_->Snapshot().tiers) {
      if (t.tier_id.node_id == peer.node_id) {
        t.status = "unreachable";
        keeper_->PutTier(t);
      }
    }
  }
  Log(LogLevel::kWarn, "node " + std::to_string(peer.node_id) + " lost");
}

void Manager::RecordPairing(const std::string &kind, const DemandSignature &request) {
  auto entry = store_->Get(request);
  std::lock_guard lock(mu_);
  pairings_.push_back({kind, request, entry ? entry->demand.signature() : DemandSignature{}});
}

NodeRecord Manager::RequireLiveNode(std::uint32_t node_id) {
  std::lock_guard lock(mu_);
  auto *node = keeper_->FindNode(node_id);
  if (node == nullptr) throw Error(ErrorCode::kNotFound, "unknown node " + std::to_string(node_id));
  if (node->status == NodeStatus::kLost) {
    throw Error(ErrorCode::kConflict, "node " + std::to_string(node_id) + " is lost");
  }
  return *node;
}

DemandSignature Manager::AddressedSignature(std::uint32_t node_id, const std::string &identifier) {
  return SystemSignature(identifier,
                         {{"node", node_id}, {"req", next_request_.fetch_add(1)}});
}

Bytes Manager::Exchange(std::uint32_t node_id, const std::string &identifier,
                        const SystemDemandBody &body, milliseconds timeout) {
  auto sig = AddressedSignature(node_id, identifier);
  store_->Deposit(MakeSystemDemand(sig, body, kManagerTierId));
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (auto result = store_->Lookup(sig)) {
      RecordPairing(identifier, sig);
      return *result;
    }
    {
      std::lock_guard lock(mu_);
      auto *node = keeper_->FindNode(node_id);
      if (node != nullptr && node->status == NodeStatus::kLost) {
        throw Error(ErrorCode::kConflict, "node " + std::to_string(node_id) + " lost while " +
                                              identifier + " was pending");
      }
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw Error(ErrorCode::kTimeout, identifier + " to node " + std::to_string(node_id) +
                                           " timed out after " + std::to_string(timeout.count()) +
                                           " ms; request " + sig.ToString() + " left in store");
    }
    std::this_thread::sleep_for(options_.poll);
  }
}

TierAllocationResult Manager::Allocate(std::uint32_t node_id, TierType type,
                                       const std::string &config_name,
                                       const std::string &config_text,
                                       std::optional<std::uint32_t> dst_index,
                                       std::uint32_t count) {
  std::lock_guard command(command_mu_);
  if (type == TierType::kGMT || type == TierType::kNode) {
    throw Error(ErrorCode::kValidation,
                std::string(TierTypeName(type)) + " tiers cannot be allocated");
  }
  if (count < 1) throw Error(ErrorCode::kValidation, "allocation count must be at least 1");
  RequireLiveNode(node_id);
  TierAllocationRequest request;
  request.node_id = node_id;
  request.tier_type = type;
  request.count = count;
  request.config_name = config_name;
  request.config_text = config_text;
  if (type == TierType::kDST) {
    if (dst_index) throw Error(ErrorCode::kValidation, "DST allocation takes no DST index");
  } else {
    if (!dst_index) {
      throw Error(ErrorCode::kValidation,
                  std::string(TierTypeName(type)) + " allocation needs a DST index");
    }
    std::lock_guard lock(mu_);
    const auto *dst = keeper_->FindDst(*dst_index);
    if (*dst_index == 0) {
      throw Error(ErrorCode::kValidation, "DST index 0 is the registration store");
    }
    if (dst == nullptr || !dst->active) {
      throw Error(ErrorCode::kValidation, "no active DST with index " + std::to_string(*dst_index));
    }
    request.dst_index = dst_index;
    request.dst = dst->endpoint;
  }

  Log(LogLevel::kInfo, "allocating " + std::to_string(count) + " " +
                           std::string(TierTypeName(type)) + " on node " +
                           std::to_string(node_id));
  auto bytes = Exchange(node_id, "TierAllocation", request, options_.allocation_timeout);
  auto result = DecodeBodyAs<TierAllocationResult>(bytes);
  {
    std::lock_guard lock(mu_);
    for (const auto &reg : result.registrations) {
      if (!reg.ok()) continue;
      TierRecord record{reg.tier_id, config_name, dst_index.value_or(0), "running"};
      if (type == TierType::kDST && reg.endpoint) {
        record.dst_index = keeper_->AddDst(*reg.endpoint, reg.tier_id);
      }
      keeper_->PutTier(record);
    }
  }
  for (const auto &reg : result.registrations) {
    if (reg.ok()) {
      Log(LogLevel::kInfo, "allocated " + reg.tier_id.ToString());
    } else {
      Log(LogLevel::kError, "allocation of " + reg.tier_id.ToString() + " failed: " + reg.error);
    }
  }
  if (!result.errors.empty()) {
    std::string msg = "allocation on node " + std::to_string(node_id) + " failed";
    for (const auto &e : result.errors) msg += "; " + e;
    Log(LogLevel::kError, msg);
    if (result.registrations.empty()) throw Error(ErrorCode::kValidation, msg);
  }
  return result;
}

TierDeallocationResult Manager::Deallocate(std::uint32_t node_id, TierType type,
                                           const std::vector<TierId> &tier_ids) {
  std::lock_guard command(command_mu_);
  RequireLiveNode(node_id);
  TierDeallocationRequest request{node_id, type, tier_ids};
  auto bytes = Exchange(node_id, "TierDeallocation", request, options_.allocation_timeout);
  auto result = DecodeBodyAs<TierDeallocationResult>(bytes);
  std::lock_guard lock(mu_);
  for (const auto &o : result.outcomes) {
    if (o.status != DeallocationStatus::kStopped) continue;
    keeper_->RemoveTier(o.tier_id);
    keeper_->evaluations().erase(o.tier_id);
    eval_requests_.erase(o.tier_id);
    for (auto &d : keeper_->dsts()) {
      if (d.tier == o.tier_id) d.active = false;
    }
  }
  for (const auto &o : result.outcomes) {
    Log(o.status == DeallocationStatus::kStopped ? LogLevel::kInfo : LogLevel::kWarn,
        "deallocation of " + o.tier_id.ToString() + ": " +
            std::string(DeallocationStatusName(o.status)) +
            (o.message.empty() ? "" : " (" + o.message + ")"));
  }
  return result;
}

void Manager::RequireGenerator(const TierId &generator) const {
  std::lock_guard lock(mu_);
  if (keeper_->FindTier(generator) == nullptr || generator.type != TierType::kDGT) {
    throw Error(ErrorCode::kNotFound, generator.ToString() + " is not an allocated DGT");
  }
}

EvaluationHandle Manager::StartEvaluation(const TierId &generator) {
  std::lock_guard command(command_mu_);
  RequireGenerator(generator);
  if (Evaluation(generator).status == EvalStatus::kRunning) {
    throw Error(ErrorCode::kConflict, generator.ToString() + " is already evaluating");
  }
  RequireLiveNode(generator.node_id);
  auto sig = AddressedSignature(generator.node_id, "StartEvaluation");
  store_->Deposit(MakeSystemDemand(sig, tiernet::StartEvaluation{generator}, kManagerTierId));
  EvaluationHandle handle;
  handle.generator = generator;
  handle.status = EvalStatus::kRunning;
  handle.started_at_ms = NowMs();
  {
    std::lock_guard lock(mu_);
    keeper_->evaluations()[generator] = handle;
    eval_requests_[generator] = sig;
  }
  Log(LogLevel::kInfo, "evaluation started on " + generator.ToString());
  return handle;
}

EvaluationHandle Manager::Evaluation(const TierId &generator) {
  std::optional<DemandSignature> sig;
  {
    std::lock_guard lock(mu_);
    auto it = keeper_->evaluations().find(generator);
    if (it == keeper_->evaluations().end()) {
      if (keeper_->FindTier(generator) == nullptr) {
        throw Error(ErrorCode::kNotFound, "no generator " + generator.ToString());
      }
      EvaluationHandle idle;
      idle.generator = generator;
      return idle;
    }
    if (it->second.status != EvalStatus::kRunning) return it->second;
    sig = eval_requests_.at(generator);
  }
  auto bytes = store_->Lookup(*sig);
  if (!bytes) {
    std::lock_guard lock(mu_);
    return keeper_->evaluations().at(generator);
  }
  EvaluationResult result;
  try {
    result = DecodeBodyAs<EvaluationResult>(*bytes);
  } catch (const Error &e) {
    result.error = e.what();
  }
  bool finished_now = false;
  EvaluationHandle out;
  {
    std::lock_guard lock(mu_);
    auto &h = keeper_->evaluations().at(generator);
    if (h.status == EvalStatus::kRunning) {
      h.status = EvalStatus::kDone;
      h.report = result.report;
      h.error = result.error;
      finished_now = true;
    }
    out = h;
  }
  if (finished_now) {
    RecordPairing("StartEvaluation", *sig);
    if (out.error.empty()) {
      Log(LogLevel::kInfo, "evaluation on " + generator.ToString() + " done: " +
                               std::to_string(out.report->computed) + " computed");
    } else {
      Log(LogLevel::kError, "evaluation on " + generator.ToString() + " failed: " + out.error);
    }
  }
  return out;
}

EvaluationHandle Manager::WaitEvaluation(const TierId &generator, milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    auto h = Evaluation(generator);
    if (h.status != EvalStatus::kRunning) return h;
    if (std::chrono::steady_clock::now() >= deadline) return h;
    std::this_thread::sleep_for(options_.poll * 5);
  }
}

void Manager::Step(const TierId &generator, std::uint32_t steps) {
  std::lock_guard command(command_mu_);
  RequireGenerator(generator);
  RequireLiveNode(generator.node_id);
  auto ack = DecodeBodyAs<Ack>(Exchange(generator.node_id, "StepGenerator",
                                        StepGenerator{generator, steps}, options_.command_timeout));
  if (!ack.error.empty()) throw Error(ErrorCode::kConflict, ack.error);
  Log(LogLevel::kInfo, "stepped " + generator.ToString() + " by " + std::to_string(steps));
}

void Manager::StopEvaluation(const TierId &generator) {
  std::lock_guard command(command_mu_);
  RequireGenerator(generator);
  RequireLiveNode(generator.node_id);
  auto ack = DecodeBodyAs<Ack>(
      Exchange(generator.node_id, "StopTier", StopTier{generator}, options_.command_timeout));
  if (!ack.error.empty()) throw Error(ErrorCode::kConflict, ack.error);
  Log(LogLevel::kInfo, "evaluation stopped on " + generator.ToString());
}

RegistrySnapshot Manager::Snapshot() const {
  std::lock_guard lock(mu_);
  return keeper_->Snapshot();
}

std::vector<PairingRecord> Manager::PairingTrace() const {
  std::lock_guard lock(mu_);
  return pairings_;
}

std::map<std::uint32_t, StoreStats> Manager::ProbeStores() {
  std::vector<DstRecord> dsts;
  {
    std::lock_guard lock(mu_);
    dsts = keeper_->dsts();
  }
  std::map<std::uint32_t, StoreStats> out;
  out[0] = store_->Stats();
  for (const auto &d : dsts) {
    if (d.index == 0 || !d.active) continue;
    try {
      auto s = Session::Connect(d.endpoint, kManagerTierId,
                                {.connect_timeout = milliseconds(500),
                                 .call_timeout = milliseconds(2'000)});
      out[d.index] = s->Stats();
    } catch (const Error &e) {
      Log(LogLevel::kWarn, "DST " + std::to_string(d.index) + " probe failed: " + e.what());
    }
  }
  return out;
}

}  // namespace tiernet
