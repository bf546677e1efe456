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

// A network described as a graph: instances, nodes, tiers and the
// connections between tiers. Graph values are immutable; every edit returns
// a new graph or throws Error(kGraph) and leaves the original untouched.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tiernet/command.h"
#include "tiernet/config.h"
#include "tiernet/demand.h"

namespace tiernet {

struct InstanceDef {
  std::string name;
  bool operator==(const InstanceDef &) const = default;
};

struct NodeDef {
  std::string name;
  std::string host = "127.0.0.1";
  // "#rrggbb"; empty means the palette color for the node's position.
  std::string color;
  bool operator==(const NodeDef &) const = default;
};

struct TierDef {
  std::string name;
  TierType type = TierType::kDWT;
  std::string instance;
  std::string node;
  std::string config;
  // DST and GMT tiers always have count 1.
  std::uint32_t count = 1;
  bool operator==(const TierDef &) const = default;
};

// Undirected; {a, b} and {b, a} are the same connection.
struct NodeConnection {
  std::string from_tier;
  std::string to_tier;
  bool operator==(const NodeConnection &) const = default;
};

class NetworkGraph {
 public:
  NetworkGraph() = default;

  // Checks every structural invariant at once. Throws Error(kGraph).
  static NetworkGraph Make(std::vector<InstanceDef> instances, std::vector<NodeDef> nodes,
                           std::vector<TierDef> tiers, std::vector<NodeConnection> connections);

  const std::vector<InstanceDef> &instances() const { return instances_; }
  const std::vector<NodeDef> &nodes() const { return nodes_; }
  const std::vector<TierDef> &tiers() const { return tiers_; }
  const std::vector<NodeConnection> &connections() const { return connections_; }
  bool empty() const { return instances_.empty() && nodes_.empty() && tiers_.empty(); }

  const InstanceDef *FindInstance(std::string_view name) const;
  const NodeDef *FindNode(std::string_view name) const;
  const TierDef *FindTier(std::string_view name) const;
  bool Connected(std::string_view a, std::string_view b) const;
  // Tiers sharing a connection with the named tier, in connection order.
  std::vector<std::string> Neighbors(std::string_view tier) const;

  NetworkGraph AddInstance(InstanceDef def) const;
  NetworkGraph AddNode(NodeDef def) const;
  NetworkGraph AddTier(TierDef def) const;
  NetworkGraph Connect(std::string_view a, std::string_view b) const;
  NetworkGraph Disconnect(std::string_view a, std::string_view b) const;
  // Renames are followed through every reference.
  NetworkGraph UpdateInstance(std::string_view name, InstanceDef def) const;
  NetworkGraph UpdateNode(std::string_view name, NodeDef def) const;
  NetworkGraph UpdateTier(std::string_view name, TierDef def) const;
  // Instances and nodes still referenced by a tier cannot be removed.
  NetworkGraph RemoveInstance(std::string_view name) const;
  NetworkGraph RemoveNode(std::string_view name) const;
  // Also drops the tier's connections.
  NetworkGraph RemoveTier(std::string_view name) const;

  bool operator==(const NetworkGraph &) const = default;

 private:
  void Check() const;

  std::vector<InstanceDef> instances_;
  std::vector<NodeDef> nodes_;
  std::vector<TierDef> tiers_;
  std::vector<NodeConnection> connections_;
};

// Names are tokens so they survive the command grammar and dotted keys.
bool IsValidName(std::string_view name);
bool IsValidColor(std::string_view color);
// Connections join a DST to a DGT, DWT or GMT.
bool CanConnect(TierType a, TierType b);

// Completeness checks beyond the structural invariants: exactly one GMT,
// every DGT/DWT connected to a DST. A DGT/DWT with several stores only draws
// a warning; translation binds it to the first-allocated one.
std::vector<Finding> ValidateGraph(const NetworkGraph &graph);

// ---------------------------------------------------------------------------
// Visual attributes.

enum class Shape : std::uint8_t { kCircle, kSquare, kTriangle, kDiamond, kPentagon, kHexagon };
std::string_view ShapeName(Shape shape);

inline constexpr std::array<std::string_view, 12> kPalette = {
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4",
    "#46f0f0", "#f032e6", "#bcf60c", "#fabebe", "#008080", "#e6beff"};
inline constexpr std::array<Shape, 6> kShapes = {Shape::kCircle,   Shape::kSquare,
                                                 Shape::kTriangle, Shape::kDiamond,
                                                 Shape::kPentagon, Shape::kHexagon};

struct InstanceVisual {
  Shape shape = Shape::kCircle;
  // 0 for the first pass over the shape list, then 1, 2, ...
  std::uint32_t badge = 0;
  bool operator==(const InstanceVisual &) const = default;
};

struct TierVisual {
  std::string color;
  Shape shape = Shape::kCircle;
  std::uint32_t badge = 0;
  bool operator==(const TierVisual &) const = default;
};

struct VisualAttrs {
  std::map<std::string, std::string> node_colors;
  std::map<std::string, InstanceVisual> instances;
  std::map<std::string, TierVisual> tiers;
  bool operator==(const VisualAttrs &) const = default;
};

// Node i takes palette color i unless it sets its own; instance i takes
// shape i mod 6 with badge i / 6. Colors never repeat across nodes.
VisualAttrs AssignVisuals(const NetworkGraph &graph);

// ---------------------------------------------------------------------------
// Persistence, as net.graph.* pairs in the configuration format.

std::string SaveGraph(const NetworkGraph &graph);
// Throws Error(kParse) for malformed text and Error(kGraph) for unknown keys,
// missing fields or broken references, naming the line.
NetworkGraph LoadGraph(std::string_view text, std::string source_name = "");

// ---------------------------------------------------------------------------
// Translation into a bootstrap command sequence.

struct PlanStep {
  Command command;
  // Graph node or tier the command was derived from.
  std::string subject;
  bool operator==(const PlanStep &) const = default;
};

struct Plan {
  std::vector<PlanStep> steps;
  // Node configurations the plan refers to by name.
  std::map<std::string, Configuration> node_configs;
  // Ids the plan assumes: nodes register in plan order from 1 and stores
  // are numbered in allocation order from 1. Executors remap when the
  // manager hands out different ones.
  std::map<std::string, std::uint32_t> node_ids;
  std::map<std::string, std::uint32_t> dst_indices;

  std::string Render() const;
  bool operator==(const Plan &) const = default;
};

// Config name under which a graph node's configuration is published.
std::string NodeConfigName(std::string_view node);

// Throws Error(kTranslation) listing the blocking findings.
Plan Translate(const NetworkGraph &graph);

}  // namespace tiernet
