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

// Operator commands and their one-line textual grammar:
//
//   start GMT <config>
//   start node <config>
//   register [<node name>]
//   allocate <node id> DST <config> <how many>
//   allocate <node id> DGT|DWT <config> <dst index> <how many>
//   deallocate <node id> <tier type> <tier id>...
//   eval <tier id>
//   step <tier id> [<steps>]
//   stop eval <tier id>
//   stop node <node name>
//   status
//
// Tier ids are written node:TYPE:index; deallocate also accepts a bare index.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tiernet/demand.h"

namespace tiernet {

namespace cmd {

struct StartGmt {
  std::string config;
  bool operator==(const StartGmt &) const = default;
};

struct StartNode {
  std::string config;
  bool operator==(const StartNode &) const = default;
};

// Without a name, registers the most recently started unregistered node.
struct Register {
  std::optional<std::string> node;
  bool operator==(const Register &) const = default;
};

struct Allocate {
  std::uint32_t node_id = 0;
  TierType tier_type = TierType::kDWT;
  std::string config;
  // Unset exactly when tier_type is DST.
  std::optional<std::uint32_t> dst_index;
  std::uint32_t count = 1;
  bool operator==(const Allocate &) const = default;
};

struct Deallocate {
  std::uint32_t node_id = 0;
  TierType tier_type = TierType::kDWT;
  std::vector<TierId> tiers;
  bool operator==(const Deallocate &) const = default;
};

struct StartEval {
  TierId generator;
  bool operator==(const StartEval &) const = default;
};

struct Step {
  TierId generator;
  std::uint32_t steps = 1;
  bool operator==(const Step &) const = default;
};

struct StopEval {
  TierId generator;
  bool operator==(const StopEval &) const = default;
};

struct StopNode {
  std::string node;
  bool operator==(const StopNode &) const = default;
};

struct Status {
  bool operator==(const Status &) const = default;
};

}  // namespace cmd

using Command = std::variant<cmd::StartGmt, cmd::StartNode, cmd::Register, cmd::Allocate,
                             cmd::Deallocate, cmd::StartEval, cmd::Step, cmd::StopEval,
                             cmd::StopNode, cmd::Status>;

// Throws Error(kUsage) naming the expected form. Blank and '#' lines are not
// commands; callers skip them with IsCommandLine.
Command ParseCommand(std::string_view line);
bool IsCommandLine(std::string_view line);
std::string RenderCommand(const Command &command);
std::string_view CommandVerb(const Command &command);
// The full grammar, one form per line.
std::string_view CommandUsage();

}  // namespace tiernet
