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

#include "tiernet/command.h"

#include <charconv>
#include <sstream>

#include "tiernet/error.h"

namespace tiernet {
namespace {

constexpr std::string_view kUsage =
    "start GMT <config>\n"
    "start node <config>\n"
    "register [<node name>]\n"
    "allocate <node id> DST <config> <how many>\n"
    "allocate <node id> DGT|DWT <config> <dst index> <how many>\n"
    "deallocate <node id> <tier type> <tier id>...\n"
    "eval <tier id>\n"
    "step <tier id> [<steps>]\n"
    "stop eval <tier id>\n"
    "stop node <node name>\n"
    "status\n";

[[noreturn]] void Usage(const std::string &message) {
  throw Error(ErrorCode::kUsage, message);
}

void Arity(const std::vector<std::string> &t, std::size_t min, std::size_t max,
           std::string_view form) {
  if (t.size() < min || t.size() > max) {
    Usage("wrong number of arguments, expected: " + std::string(form));
  }
}

std::uint32_t Number(const std::string &text, std::string_view what, std::uint32_t min = 0) {
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty()) {
    Usage("bad " + std::string(what) + " '" + text + "'");
  }
  if (v < min) Usage(std::string(what) + " must be at least " + std::to_string(min));
  return v;
}

TierType Type(const std::string &text) {
  auto t = ParseTierType(text);
  if (!t) Usage("unknown tier type '" + text + "'");
  return *t;
}

TierId Id(const std::string &text) {
  try {
    return TierId::Parse(text);
  } catch (const Error &) {
    Usage("bad tier id '" + text + "', expected node:TYPE:index");
  }
}

std::vector<std::string> Tokens(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

constexpr std::string_view kAllocDst = "allocate <node id> DST <config> <how many>";
constexpr std::string_view kAllocBound = "allocate <node id> DGT|DWT <config> <dst index> <how many>";

Command ParseAllocate(const std::vector<std::string> &t) {
  if (t.size() < 3) Usage("wrong number of arguments, expected: " + std::string(kAllocBound));
  cmd::Allocate a;
  a.node_id = Number(t[1], "node id", 1);
  a.tier_type = Type(t[2]);
  if (a.tier_type == TierType::kDST) {
    Arity(t, 5, 5, kAllocDst);
    a.config = t[3];
    a.count = Number(t[4], "count", 1);
  } else if (a.tier_type == TierType::kDGT || a.tier_type == TierType::kDWT) {
    Arity(t, 6, 6, kAllocBound);
    a.config = t[3];
    a.dst_index = Number(t[4], "dst index");
    a.count = Number(t[5], "count", 1);
  } else {
    Usage("tier type " + t[2] + " cannot be allocated");
  }
  return a;
}

Command ParseDeallocate(const std::vector<std::string> &t) {
  constexpr std::string_view form = "deallocate <node id> <tier type> <tier id>...";
  if (t.size() < 4) Usage("wrong number of arguments, expected: " + std::string(form));
  cmd::Deallocate d;
  d.node_id = Number(t[1], "node id", 1);
  d.tier_type = Type(t[2]);
  for (std::size_t i = 3; i < t.size(); ++i) {
    if (t[i].find(':') == std::string::npos) {
      d.tiers.push_back({d.node_id, d.tier_type, Number(t[i], "tier index", 1)});
      continue;
    }
    auto id = Id(t[i]);
    if (id.node_id != d.node_id || id.type != d.tier_type) {
      Usage("tier " + t[i] + " does not belong to node " + t[1] + " type " + t[2]);
    }
    d.tiers.push_back(id);
  }
  return d;
}

}  // namespace

bool IsCommandLine(std::string_view line) {
  auto pos = line.find_first_not_of(" \t\r\n");
  return pos != std::string_view::npos && line[pos] != '#';
}

Command ParseCommand(std::string_view line) {
  auto t = Tokens(line);
  if (t.empty()) Usage("empty command");
  const auto &verb = t[0];
  if (verb == "start") {
    if (t.size() >= 2 && t[1] == "GMT") {
      Arity(t, 3, 3, "start GMT <config>");
      return cmd::StartGmt{t[2]};
    }
    if (t.size() >= 2 && t[1] == "node") {
      Arity(t, 3, 3, "start node <config>");
      return cmd::StartNode{t[2]};
    }
    Usage("expected 'start GMT <config>' or 'start node <config>'");
  }
  if (verb == "register") {
    Arity(t, 1, 2, "register [<node name>]");
    cmd::Register r;
    if (t.size() == 2) r.node = t[1];
    return r;
  }
  if (verb == "allocate") return ParseAllocate(t);
  if (verb == "deallocate") return ParseDeallocate(t);
  if (verb == "eval") {
    Arity(t, 2, 2, "eval <tier id>");
    return cmd::StartEval{Id(t[1])};
  }
  if (verb == "step") {
    Arity(t, 2, 3, "step <tier id> [<steps>]");
    return cmd::Step{Id(t[1]), t.size() == 3 ? Number(t[2], "steps", 1) : 1u};
  }
  if (verb == "stop") {
    if (t.size() >= 2 && t[1] == "eval") {
      Arity(t, 3, 3, "stop eval <tier id>");
      return cmd::StopEval{Id(t[2])};
    }
    if (t.size() >= 2 && t[1] == "node") {
      Arity(t, 3, 3, "stop node <node name>");
      return cmd::StopNode{t[2]};
    }
    Usage("expected 'stop eval <tier id>' or 'stop node <node name>'");
  }
  if (verb == "status") {
    Arity(t, 1, 1, "status");
    return cmd::Status{};
  }
  Usage("unknown command '" + verb + "'; commands are:\n" + std::string(kUsage));
}

std::string RenderCommand(const Command &command) {
  struct Visitor {
    std::string operator()(const cmd::StartGmt &c) { return "start GMT " + c.config; }
    std::string operator()(const cmd::StartNode &c) { return "start node " + c.config; }
    std::string operator()(const cmd::Register &c) {
      return c.node ? "register " + *c.node : "register";
    }
    std::string operator()(const cmd::Allocate &c) {
      std::string s = "allocate " + std::to_string(c.node_id) + " " +
                      std::string(TierTypeName(c.tier_type)) + " " + c.config + " ";
      if (c.dst_index) s += std::to_string(*c.dst_index) + " ";
      return s + std::to_string(c.count);
    }
    std::string operator()(const cmd::Deallocate &c) {
      std::string s = "deallocate " + std::to_string(c.node_id) + " " +
                      std::string(TierTypeName(c.tier_type));
      for (const auto &id : c.tiers) s += " " + id.ToString();
      return s;
    }
    std::string operator()(const cmd::StartEval &c) { return "eval " + c.generator.ToString(); }
    std::string operator()(const cmd::Step &c) {
      auto s = "step " + c.generator.ToString();
      return c.steps == 1 ? s : s + " " + std::to_string(c.steps);
    }
    std::string operator()(const cmd::StopEval &c) { return "stop eval " + c.generator.ToString(); }
    std::string operator()(const cmd::StopNode &c) { return "stop node " + c.node; }
    std::string operator()(const cmd::Status &) { return "status"; }
  };
  return std::visit(Visitor{}, command);
}

std::string_view CommandVerb(const Command &command) {
  static constexpr std::string_view kVerbs[] = {"start GMT", "start node", "register",
                                                "allocate",  "deallocate", "eval",
                                                "step",      "stop eval",  "stop node",
                                                "status"};
  return kVerbs[command.index()];
}

std::string_view CommandUsage() { return kUsage; }

}  // namespace tiernet
