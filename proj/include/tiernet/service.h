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

// The operator-facing service: owns the network graph, hosts the manager
// in-process, launches node daemons and runs commands one at a time. The
// HTTP layer and the CLI are thin adapters over this class.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tiernet/api_json.h"
#include "tiernet/command.h"
#include "tiernet/events.h"
#include "tiernet/graph.h"
#include "tiernet/launcher.h"
#include "tiernet/manager.h"

namespace tiernet {

// Named configuration texts: uploaded ones first, then files under the base
// directory. Absolute names are read as given.
class ConfigStore {
 public:
  explicit ConfigStore(std::filesystem::path base_dir = ".") : base_dir_(std::move(base_dir)) {}

  void Put(const std::string &name, std::string text);
  // Throws Error(kNotFound).
  std::string Get(const std::string &name) const;
  std::vector<std::string> Uploaded() const;
  const std::filesystem::path &base_dir() const { return base_dir_; }

 private:
  std::filesystem::path base_dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> texts_;
};

struct CommandOutcome {
  // As executed, after any id remapping.
  Command command;
  std::string message;
  Json detail = Json::object();
};

struct PlanStepReport {
  std::string command;
  std::string subject;
  bool ok = false;
  std::string message;
  // Outcome detail, or the {code, message, detail} error.
  Json detail = Json::object();
};

struct PlanReport {
  std::vector<PlanStepReport> steps;
  // Position of the failing step; the plan stops there.
  std::optional<std::size_t> failed_at;
  bool completed() const { return !failed_at; }
  Json ToJson() const;
};

class ManagementService {
 public:
  struct Options {
    // In-process daemons when unset.
    std::shared_ptr<NodeLauncher> launcher;
    std::filesystem::path config_dir = ".";
    std::size_t event_capacity = EventLog::kDefaultCapacity;
    std::optional<std::string> event_file;
    Manager::Options manager;
  };

  explicit ManagementService(Options options);
  ManagementService() : ManagementService(Options{}) {}
  ~ManagementService();

  ManagementService(const ManagementService &) = delete;
  ManagementService &operator=(const ManagementService &) = delete;

  // Runs one command. Throws Error with the failing component's code.
  CommandOutcome Execute(const Command &command);
  // Parses then executes one command line.
  CommandOutcome ExecuteLine(std::string_view line);
  // Translates the current graph and executes it step by step, stopping at
  // the first failure. Throws Error(kTranslation) before running anything
  // when the graph is incomplete.
  PlanReport ExecutePlan();

  NetworkGraph graph() const;
  std::uint64_t graph_version() const;
  // Last write wins.
  void PutGraph(NetworkGraph graph);

  // Registry snapshot, store stats, node daemons and graph bindings.
  Json Status();
  EventLog &events() { return events_; }
  ConfigStore &configs() { return configs_; }
  // Null until "start GMT".
  Manager *manager();
  // Graph tier name to the ids its allocation produced.
  std::map<std::string, std::vector<TierId>> bindings() const;

  // Stops every node and the manager. Idempotent.
  void Shutdown();

 private:
  CommandOutcome Run(const Command &command);
  CommandOutcome StartGmt(const cmd::StartGmt &c);
  CommandOutcome StartNode(const cmd::StartNode &c);
  CommandOutcome RegisterNode(const cmd::Register &c);
  CommandOutcome Allocate(const cmd::Allocate &c);
  CommandOutcome StopNode(const cmd::StopNode &c);
  Manager &RequireManager();
  NodeHandle *FindNode(const std::string &name);
  void Event(LogLevel level, std::string message);

  Options options_;
  EventLog events_;
  ConfigStore configs_;

  // Serializes commands and plans.
  std::mutex command_mu_;

  // Guards everything below; held only briefly.
  mutable std::mutex state_mu_;
  std::unique_ptr<Manager> manager_;
  std::vector<std::unique_ptr<NodeHandle>> nodes_;
  NetworkGraph graph_;
  std::uint64_t graph_version_ = 0;
  std::map<std::string, std::vector<TierId>> bindings_;
};

}  // namespace tiernet
