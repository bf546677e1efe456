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

#include "tiernet/service.h"

#include <fstream>
#include <sstream>

#include "tiernet/error.h"

namespace tiernet {

void ConfigStore::Put(const std::string &name, std::string text) {
  if (name.empty()) throw Error(ErrorCode::kValidation, "config name is empty");
  std::lock_guard lock(mu_);
  texts_[name] = std::move(text);
}

std::string ConfigStore::Get(const std::string &name) const {
  {
    std::lock_guard lock(mu_);
    auto it = texts_.find(name);
    if (it != texts_.end()) return it->second;
  }
  std::filesystem::path p(name);
  if (p.is_relative()) p = base_dir_ / p;
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "config '" + name + "' not found");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> ConfigStore::Uploaded() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto &[k, v] : texts_) out.push_back(k);
  return out;
}

Json PlanReport::ToJson() const {
  Json j;
  j["completed"] = completed();
  j["failed_at"] = failed_at ? Json(*failed_at) : Json();
  j["steps"] = Json::array();
  for (const auto &s : steps) {
    j["steps"].push_back({{"command", s.command},
                          {"subject", s.subject},
                          {"ok", s.ok},
                          {"message", s.message},
                          {"detail", s.detail}});
  }
  return j;
}

// ---------------------------------------------------------------------------

ManagementService::ManagementService(Options options)
    : options_(std::move(options)),
      events_(options_.event_capacity, options_.event_file),
      configs_(options_.config_dir) {
  if (!options_.launcher) options_.launcher = MakeInProcessLauncher();
  options_.manager.log = events_.Sink();
}

ManagementService::~ManagementService() { Shutdown(); }

void ManagementService::Shutdown() {
  std::vector<std::unique_ptr<NodeHandle>> nodes;
  std::unique_ptr<Manager> manager;
  {
    std::lock_guard lock(state_mu_);
    nodes.swap(nodes_);
    manager.swap(manager_);
  }
  for (auto &n : nodes) n->Stop();
  nodes.clear();
  if (manager) manager->Shutdown();
  events_.Close();
}

void ManagementService::Event(LogLevel level, std::string message) {
  events_.Append("system", level, std::move(message));
}

Manager *ManagementService::manager() {
  std::lock_guard lock(state_mu_);
  return manager_.get();
}

Manager &ManagementService::RequireManager() {
  auto *m = manager();
  if (!m) throw Error(ErrorCode::kConflict, "no GMT is running; run 'start GMT <config>' first");
  return *m;
}

NodeHandle *ManagementService::FindNode(const std::string &name) {
  std::lock_guard lock(state_mu_);
  for (auto &n : nodes_) {
    if (n->name() == name) return n.get();
  }
  return nullptr;
}

NetworkGraph ManagementService::graph() const {
  std::lock_guard lock(state_mu_);
  return graph_;
}

std::uint64_t ManagementService::graph_version() const {
  std::lock_guard lock(state_mu_);
  return graph_version_;
}

void ManagementService::PutGraph(NetworkGraph graph) {
  {
    std::lock_guard lock(state_mu_);
    graph_ = std::move(graph);
    ++graph_version_;
  }
  Event(LogLevel::kInfo, "graph updated to version " + std::to_string(graph_version()));
}

std::map<std::string, std::vector<TierId>> ManagementService::bindings() const {
  std::lock_guard lock(state_mu_);
  return bindings_;
}

CommandOutcome ManagementService::ExecuteLine(std::string_view line) {
  return Execute(ParseCommand(line));
}

CommandOutcome ManagementService::Execute(const Command &command) {
  std::lock_guard lock(command_mu_);
  return Run(command);
}

CommandOutcome ManagementService::Run(const Command &command) {
  auto text = RenderCommand(command);
  Event(LogLevel::kInfo, "> " + text);
  try {
    CommandOutcome out;
    if (auto *c = std::get_if<cmd::StartGmt>(&command)) {
      out = StartGmt(*c);
    } else if (auto *c = std::get_if<cmd::StartNode>(&command)) {
      out = StartNode(*c);
    } else if (auto *c = std::get_if<cmd::Register>(&command)) {
      out = RegisterNode(*c);
    } else if (auto *c = std::get_if<cmd::Allocate>(&command)) {
      out = Allocate(*c);
    } else if (auto *c = std::get_if<cmd::Deallocate>(&command)) {
      auto r = RequireManager().Deallocate(c->node_id, c->tier_type, c->tiers);
      int stopped = 0;
      for (const auto &o : r.outcomes) stopped += o.status == DeallocationStatus::kStopped;
      out = {command, std::to_string(stopped) + " of " + std::to_string(r.outcomes.size()) +
                          " tiers stopped", ToJson(r)};
    } else if (auto *c = std::get_if<cmd::StartEval>(&command)) {
      auto h = RequireManager().StartEvaluation(c->generator);
      out = {command, "evaluation started on " + c->generator.ToString(), ToJson(h)};
    } else if (auto *c = std::get_if<cmd::Step>(&command)) {
      RequireManager().Step(c->generator, c->steps);
      out = {command, "stepped " + c->generator.ToString(), Json::object()};
    } else if (auto *c = std::get_if<cmd::StopEval>(&command)) {
      RequireManager().StopEvaluation(c->generator);
      out = {command, "evaluation stop requested on " + c->generator.ToString(), Json::object()};
    } else if (auto *c = std::get_if<cmd::StopNode>(&command)) {
      out = StopNode(*c);
    } else {
      out = {command, "status", Status()};
    }
    Event(LogLevel::kInfo, "ok: " + out.message);
    return out;
  } catch (const Error &e) {
    Event(LogLevel::kError, "failed: " + text + ": " + std::string(ErrorCodeName(e.code())) +
                                ": " + e.what());
    throw;
  }
}

CommandOutcome ManagementService::StartGmt(const cmd::StartGmt &c) {
  if (manager()) throw Error(ErrorCode::kConflict, "a GMT is already running");
  auto config = ParseConfig(configs_.Get(c.config), c.config);
  auto m = Manager::Bootstrap(config, options_.manager);
  auto endpoint = m->registration_endpoint();
  {
    std::lock_guard lock(state_mu_);
    manager_ = std::move(m);
  }
  return {c, "GMT listening on " + endpoint.ToString(), {{"endpoint", endpoint.ToString()}}};
}

CommandOutcome ManagementService::StartNode(const cmd::StartNode &c) {
  auto endpoint = RequireManager().registration_endpoint();
  auto config = ParseConfig(configs_.Get(c.config), c.config);
  auto name = config.GetOr(keys::kNodeName, "");
  if (auto *existing = FindNode(name); existing && existing->running()) {
    throw Error(ErrorCode::kConflict, "node '" + name + "' is already running");
  }
  auto handle = options_.launcher->Launch(config, endpoint, events_.Sink());
  {
    std::lock_guard lock(state_mu_);
    std::erase_if(nodes_, [&](const auto &n) { return n->name() == name; });
    nodes_.push_back(std::move(handle));
  }
  return {c, "node " + name + " started", {{"name", name}}};
}

CommandOutcome ManagementService::RegisterNode(const cmd::Register &c) {
  RequireManager();
  NodeHandle *target = nullptr;
  if (c.node) {
    target = FindNode(*c.node);
    if (!target) throw Error(ErrorCode::kNotFound, "no started node named '" + *c.node + "'");
  } else {
    std::lock_guard lock(state_mu_);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      if ((*it)->running() && !(*it)->node_id()) {
        target = it->get();
        break;
      }
    }
    if (!target) throw Error(ErrorCode::kNotFound, "no started node is awaiting registration");
  }
  auto identity = target->Register();
  return {c, "node " + identity.name + " registered as " + std::to_string(*identity.node_id),
          ToJson(identity)};
}

CommandOutcome ManagementService::Allocate(const cmd::Allocate &c) {
  auto &m = RequireManager();
  auto text = configs_.Get(c.config);
  auto r = m.Allocate(c.node_id, c.tier_type, c.config, text, c.dst_index, c.count);
  std::string failures;
  for (const auto &reg : r.registrations) {
    if (!reg.ok()) failures += (failures.empty() ? "" : "; ") + reg.error;
  }
  auto detail = ToJson(r);
  if (c.tier_type == TierType::kDST) {
    auto snapshot = m.Snapshot();
    Json indices = Json::array();
    for (const auto &reg : r.registrations) {
      for (const auto &d : snapshot.dsts) {
        if (d.tier == reg.tier_id) indices.push_back(d.index);
      }
    }
    detail["dst_indices"] = indices;
  }
  if (!failures.empty()) throw Error(ErrorCode::kValidation, "allocation failed: " + failures);
  std::string ids;
  for (const auto &reg : r.registrations) ids += " " + reg.tier_id.ToString();
  return {c, "allocated" + ids, detail};
}

CommandOutcome ManagementService::StopNode(const cmd::StopNode &c) {
  auto *node = FindNode(c.node);
  if (!node) throw Error(ErrorCode::kNotFound, "no started node named '" + c.node + "'");
  if (!node->running()) return {c, "node " + c.node + " already stopped", Json::object()};
  node->Stop();
  return {c, "node " + c.node + " stopped", Json::object()};
}

PlanReport ManagementService::ExecutePlan() {
  std::lock_guard lock(command_mu_);
  auto plan = Translate(graph());
  for (const auto &[name, config] : plan.node_configs) configs_.Put(name, SerializeConfig(config));
  Event(LogLevel::kInfo, "executing plan of " + std::to_string(plan.steps.size()) + " commands");

  std::map<std::uint32_t, std::uint32_t> node_map;
  std::map<std::uint32_t, std::uint32_t> dst_map;
  std::map<std::string, std::vector<TierId>> bound;
  PlanReport report;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    auto command = plan.steps[i].command;
    const auto &subject = plan.steps[i].subject;
    std::optional<std::uint32_t> predicted_dst;
    if (auto *a = std::get_if<cmd::Allocate>(&command)) {
      if (node_map.count(a->node_id)) a->node_id = node_map.at(a->node_id);
      if (a->dst_index && dst_map.count(*a->dst_index)) a->dst_index = dst_map.at(*a->dst_index);
      if (a->tier_type == TierType::kDST) predicted_dst = plan.dst_indices.at(subject);
    }
    PlanStepReport step;
    step.command = RenderCommand(command);
    step.subject = subject;
    try {
      auto out = Run(command);
      step.ok = true;
      step.message = out.message;
      step.detail = out.detail;
      if (std::holds_alternative<cmd::Register>(command)) {
        node_map[plan.node_ids.at(subject)] = out.detail.at("node_id").get<std::uint32_t>();
      }
      if (std::holds_alternative<cmd::Allocate>(command)) {
        for (const auto &reg : out.detail.at("registrations")) {
          bound[subject].push_back(TierId::Parse(reg.at("tier_id").get<std::string>()));
        }
        if (predicted_dst) dst_map[*predicted_dst] = out.detail.at("dst_indices").at(0).get<std::uint32_t>();
      }
    } catch (const Error &e) {
      step.message = e.what();
      step.detail = ErrorJson(ErrorCodeName(e.code()), e.what());
      report.failed_at = i;
    }
    report.steps.push_back(std::move(step));
    if (report.failed_at) break;
  }
  {
    std::lock_guard state(state_mu_);
    for (auto &[k, v] : bound) bindings_[k] = std::move(v);
  }
  if (report.failed_at) {
    Event(LogLevel::kError, "plan stopped at command " + std::to_string(*report.failed_at + 1));
  } else {
    Event(LogLevel::kInfo, "plan completed");
  }
  return report;
}

Json ManagementService::Status() {
  Json j;
  auto *m = manager();
  j["gmt"] = {{"running", m != nullptr},
              {"endpoint", m ? Json(m->registration_endpoint().ToString()) : Json()}};
  if (m) {
    auto snapshot = m->Snapshot();
    j["registry"] = ToJson(snapshot);
    j["structural"] = snapshot.StructuralDump();
    j["stores"] = Json::object();
    for (const auto &[index, stats] : m->ProbeStores()) {
      j["stores"][std::to_string(index)] = ToJson(stats);
    }
  } else {
    j["registry"] = ToJson(RegistrySnapshot{});
    j["structural"] = "";
    j["stores"] = Json::object();
  }
  j["nodes"] = Json::array();
  {
    std::lock_guard lock(state_mu_);
    for (const auto &n : nodes_) {
      Json node{{"name", n->name()},
                {"node_id", n->node_id() ? Json(*n->node_id()) : Json()},
                {"running", n->running()}};
      node["tiers"] = Json::array();
      if (n->running()) {
        try {
          for (const auto &t : n->Tiers()) node["tiers"].push_back(ToJson(t));
        } catch (const Error &) {
        }
      }
      j["nodes"].push_back(std::move(node));
    }
    j["bindings"] = Json::object();
    for (const auto &[name, ids] : bindings_) {
      Json list = Json::array();
      for (const auto &id : ids) list.push_back(id.ToString());
      j["bindings"][name] = list;
    }
    j["graph_version"] = graph_version_;
  }
  j["last_event_seq"] = events_.last_seq();
  return j;
}

}  // namespace tiernet
