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

#include "tiernet/graph.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "tiernet/error.h"

namespace tiernet {
namespace {

[[noreturn]] void Reject(const std::string &message) { throw Error(ErrorCode::kGraph, message); }

std::string Lower(std::string s) {
  for (auto &c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool SamePair(const NodeConnection &c, std::string_view a, std::string_view b) {
  return (c.from_tier == a && c.to_tier == b) || (c.from_tier == b && c.to_tier == a);
}

template <typename T>
auto FindByName(const std::vector<T> &items, std::string_view name) {
  return std::find_if(items.begin(), items.end(), [&](const T &t) { return t.name == name; });
}

template <typename T>
std::size_t IndexOf(const std::vector<T> &items, std::string_view name, std::string_view what) {
  auto it = FindByName(items, name);
  if (it == items.end()) Reject("unknown " + std::string(what) + " '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - items.begin());
}

bool IsToken(std::string_view s) {
  return !s.empty() && std::none_of(s.begin(), s.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) || std::iscntrl(static_cast<unsigned char>(c));
  });
}

}  // namespace

bool IsValidName(std::string_view name) {
  if (name.empty() || name.size() > 64) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

bool IsValidColor(std::string_view color) {
  return color.size() == 7 && color[0] == '#' &&
         std::all_of(color.begin() + 1, color.end(),
                     [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

bool CanConnect(TierType a, TierType b) {
  if (a == TierType::kDST) std::swap(a, b);
  return b == TierType::kDST &&
         (a == TierType::kDGT || a == TierType::kDWT || a == TierType::kGMT);
}

void NetworkGraph::Check() const {
  std::set<std::string> seen;
  for (const auto &i : instances_) {
    if (!IsValidName(i.name)) Reject("bad instance name '" + i.name + "'");
    if (!seen.insert(i.name).second) Reject("duplicate instance '" + i.name + "'");
  }
  seen.clear();
  std::set<std::string> colors;
  for (const auto &n : nodes_) {
    if (!IsValidName(n.name)) Reject("bad node name '" + n.name + "'");
    if (!seen.insert(n.name).second) Reject("duplicate node '" + n.name + "'");
    if (!IsToken(n.host)) Reject("node '" + n.name + "' has a bad host '" + n.host + "'");
    if (n.color.empty()) continue;
    if (!IsValidColor(n.color)) Reject("node '" + n.name + "' has a bad color '" + n.color + "'");
    if (!colors.insert(Lower(n.color)).second) {
      Reject("color " + n.color + " is already used by another node");
    }
  }
  seen.clear();
  int gmts = 0;
  for (const auto &t : tiers_) {
    if (!IsValidName(t.name)) Reject("bad tier name '" + t.name + "'");
    if (!seen.insert(t.name).second) Reject("duplicate tier '" + t.name + "'");
    if (t.type == TierType::kNode) Reject("tier '" + t.name + "' has type NODE");
    if (!FindInstance(t.instance)) {
      Reject("tier '" + t.name + "' references unknown instance '" + t.instance + "'");
    }
    if (!FindNode(t.node)) Reject("tier '" + t.name + "' references unknown node '" + t.node + "'");
    if (!IsToken(t.config)) Reject("tier '" + t.name + "' has a bad config name '" + t.config + "'");
    if (t.count < 1) Reject("tier '" + t.name + "' has count 0");
    if ((t.type == TierType::kDST || t.type == TierType::kGMT) && t.count != 1) {
      Reject("tier '" + t.name + "' is a " + std::string(TierTypeName(t.type)) +
             " and must have count 1");
    }
    if (t.type == TierType::kGMT && ++gmts > 1) Reject("more than one GMT tier");
  }
  for (std::size_t i = 0; i < connections_.size(); ++i) {
    const auto &c = connections_[i];
    auto *a = FindTier(c.from_tier);
    auto *b = FindTier(c.to_tier);
    if (!a || !b) {
      Reject("connection references unknown tier '" + std::string(a ? c.to_tier : c.from_tier) + "'");
    }
    if (c.from_tier == c.to_tier) Reject("tier '" + c.from_tier + "' cannot connect to itself");
    if (!CanConnect(a->type, b->type)) {
      Reject("cannot connect " + std::string(TierTypeName(a->type)) + " '" + a->name + "' to " +
             std::string(TierTypeName(b->type)) + " '" + b->name + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (SamePair(connections_[j], c.from_tier, c.to_tier)) {
        Reject("duplicate connection " + c.from_tier + " - " + c.to_tier);
      }
    }
  }
}

NetworkGraph NetworkGraph::Make(std::vector<InstanceDef> instances, std::vector<NodeDef> nodes,
                                std::vector<TierDef> tiers,
                                std::vector<NodeConnection> connections) {
  NetworkGraph g;
  g.instances_ = std::move(instances);
  g.nodes_ = std::move(nodes);
  for (auto &n : g.nodes_) n.color = Lower(n.color);
  g.tiers_ = std::move(tiers);
  g.connections_ = std::move(connections);
  g.Check();
  return g;
}

const InstanceDef *NetworkGraph::FindInstance(std::string_view name) const {
  auto it = FindByName(instances_, name);
  return it == instances_.end() ? nullptr : &*it;
}

const NodeDef *NetworkGraph::FindNode(std::string_view name) const {
  auto it = FindByName(nodes_, name);
  return it == nodes_.end() ? nullptr : &*it;
}

const TierDef *NetworkGraph::FindTier(std::string_view name) const {
  auto it = FindByName(tiers_, name);
  return it == tiers_.end() ? nullptr : &*it;
}

bool NetworkGraph::Connected(std::string_view a, std::string_view b) const {
  return std::any_of(connections_.begin(), connections_.end(),
                     [&](const NodeConnection &c) { return SamePair(c, a, b); });
}

std::vector<std::string> NetworkGraph::Neighbors(std::string_view tier) const {
  std::vector<std::string> out;
  for (const auto &c : connections_) {
    if (c.from_tier == tier) out.push_back(c.to_tier);
    if (c.to_tier == tier) out.push_back(c.from_tier);
  }
  return out;
}

NetworkGraph NetworkGraph::AddInstance(InstanceDef def) const {
  auto g = *this;
  g.instances_.push_back(std::move(def));
  g.Check();
  return g;
}

NetworkGraph NetworkGraph::AddNode(NodeDef def) const {
  auto g = *this;
  def.color = Lower(def.color);
  g.nodes_.push_back(std::move(def));
  g.Check();
  return g;
}

NetworkGraph NetworkGraph::AddTier(TierDef def) const {
  auto g = *this;
  g.tiers_.push_back(std::move(def));
  g.Check();
  return g;
}

NetworkGraph NetworkGraph::Connect(std::string_view a, std::string_view b) const {
  auto g = *this;
  g.connections_.push_back({std::string(a), std::string(b)});
  g.Check();
  return g;
}

NetworkGraph NetworkGraph::Disconnect(std::string_view a, std::string_view b) const {
  auto g = *this;
  auto it = std::find_if(g.connections_.begin(), g.connections_.end(),
                         [&](const NodeConnection &c) { return SamePair(c, a, b); });
  if (it == g.connections_.end()) {
    Reject("no connection " + std::string(a) + " - " + std::string(b));
  }
  g.connections_.erase(it);
  return g;
}

NetworkGraph NetworkGraph::UpdateInstance(std::string_view name, InstanceDef def) const {
  auto g = *this;
  auto i = IndexOf(g.instances_, name, "instance");
  for (auto &t : g.tiers_) {
    if (t.instance == name) t.instance = def.name;
  }
  g.instances_[i] = std::move(def);
  g.Check();
  return g;
}

NetworkGraph NetworkGraph::UpdateNode(std::string_view name, NodeDef def) const {
  auto g = *this;
  auto i = IndexOf(g.nodes_, name, "node");
  for (auto &t : g.tiers_) {
    if (t.node == name) t.node = def.name;
  }
  def.color = Lower(def.color);
  g.nodes_[i] = std::move(def);
  g.Check();
  return g;
}

NetworkGraph NetworkGraph::UpdateTier(std::string_view name, TierDef def) const {
  auto g = *this;
  auto i = IndexOf(g.tiers_, name, "tier");
  for (auto &c : g.connections_) {
    if (c.from_tier == name) c.from_tier = def.name;
    if (c.to_tier == name) c.to_tier = def.name;
  }
  g.tiers_[i] = std::move(def);
  g.Check();
  return g;
}

NetworkGraph NetworkGraph::RemoveInstance(std::string_view name) const {
  auto g = *this;
  auto i = IndexOf(g.instances_, name, "instance");
  for (const auto &t : g.tiers_) {
    if (t.instance == name) {
      Reject("instance '" + std::string(name) + "' is still used by tier '" + t.name + "'");
    }
  }
  g.instances_.erase(g.instances_.begin() + static_cast<std::ptrdiff_t>(i));
  return g;
}

NetworkGraph NetworkGraph::RemoveNode(std::string_view name) const {
  auto g = *this;
  auto i = IndexOf(g.nodes_, name, "node");
  for (const auto &t : g.tiers_) {
    if (t.node == name) {
      Reject("node '" + std::string(name) + "' still hosts tier '" + t.name + "'");
    }
  }
  g.nodes_.erase(g.nodes_.begin() + static_cast<std::ptrdiff_t>(i));
  return g;
}

NetworkGraph NetworkGraph::RemoveTier(std::string_view name) const {
  auto g = *this;
  auto i = IndexOf(g.tiers_, name, "tier");
  g.tiers_.erase(g.tiers_.begin() + static_cast<std::ptrdiff_t>(i));
  std::erase_if(g.connections_, [&](const NodeConnection &c) {
    return c.from_tier == name || c.to_tier == name;
  });
  return g;
}

std::vector<Finding> ValidateGraph(const NetworkGraph &graph) {
  std::vector<Finding> out;
  auto error = [&](std::string key, std::string reason) {
    out.push_back({std::move(key), std::move(reason), Severity::kError});
  };
  auto warn = [&](std::string key, std::string reason) {
    out.push_back({std::move(key), std::move(reason), Severity::kWarning});
  };
  bool has_gmt = std::any_of(graph.tiers().begin(), graph.tiers().end(),
                             [](const TierDef &t) { return t.type == TierType::kGMT; });
  if (!has_gmt) error("graph", "no GMT tier");
  for (const auto &t : graph.tiers()) {
    if (t.type != TierType::kDGT && t.type != TierType::kDWT) continue;
    int stores = 0;
    for (const auto &n : graph.Neighbors(t.name)) {
      if (graph.FindTier(n)->type == TierType::kDST) ++stores;
    }
    if (stores == 0) error(t.name, "not connected to a DST");
    if (stores > 1) warn(t.name, "connected to several DSTs; bound to the first allocated");
  }
  for (const auto &n : graph.nodes()) {
    bool hosts = std::any_of(graph.tiers().begin(), graph.tiers().end(),
                             [&](const TierDef &t) { return t.node == n.name; });
    if (!hosts) warn(n.name, "hosts no tiers");
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view ShapeName(Shape shape) {
  switch (shape) {
    case Shape::kCircle: return "circle";
    case Shape::kSquare: return "square";
    case Shape::kTriangle: return "triangle";
    case Shape::kDiamond: return "diamond";
    case Shape::kPentagon: return "pentagon";
    case Shape::kHexagon: return "hexagon";
  }
  return "circle";
}

namespace {

// Colors past the palette walk the hue circle by the golden angle.
std::string GeneratedColor(std::uint32_t k) {
  double h = std::fmod(k * 137.508, 360.0) / 60.0;
  double s = 0.65, v = 0.85;
  double c = v * s, x = c * (1 - std::fabs(std::fmod(h, 2.0) - 1)), m = v - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround((r + m) * 255)),
                static_cast<int>(std::lround((g + m) * 255)),
                static_cast<int>(std::lround((b + m) * 255)));
  return buf;
}

}  // namespace

VisualAttrs AssignVisuals(const NetworkGraph &graph) {
  VisualAttrs v;
  std::set<std::string> taken;
  for (const auto &n : graph.nodes()) {
    if (!n.color.empty()) taken.insert(Lower(n.color));
  }
  std::uint32_t generated = 0;
  for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
    const auto &n = graph.nodes()[i];
    std::string color = Lower(n.color);
    if (color.empty() && i < kPalette.size() && !taken.count(std::string(kPalette[i]))) {
      color = kPalette[i];
    }
    while (color.empty() || (n.color.empty() && taken.count(color))) {
      color = GeneratedColor(generated++);
    }
    taken.insert(color);
    v.node_colors[n.name] = color;
  }
  for (std::size_t i = 0; i < graph.instances().size(); ++i) {
    v.instances[graph.instances()[i].name] = {kShapes[i % kShapes.size()],
                                              static_cast<std::uint32_t>(i / kShapes.size())};
  }
  for (const auto &t : graph.tiers()) {
    const auto &iv = v.instances.at(t.instance);
    v.tiers[t.name] = {v.node_colors.at(t.node), iv.shape, iv.badge};
  }
  return v;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kGraphHeader = "tiernet network graph";
constexpr std::string_view kPrefix = "net.graph.";

struct Field {
  std::string value;
  std::size_t line = 0;
};
using Entity = std::map<std::string, Field>;

const std::map<std::string, std::set<std::string>> &FieldsByCategory() {
  static const std::map<std::string, std::set<std::string>> kFields = {
      {"instance", {"name"}},
      {"node", {"name", "host", "color"}},
      {"tier", {"name", "type", "instance", "node", "config", "count"}},
      {"conn", {"from", "to"}},
  };
  return kFields;
}

std::size_t FirstLine(const Entity &e) {
  std::size_t line = 0;
  for (const auto &[k, f] : e) {
    if (line == 0 || f.line < line) line = f.line;
  }
  return line;
}

}  // namespace

std::string SaveGraph(const NetworkGraph &graph) {
  Configuration c;
  c.AddComment(kGraphHeader);
  auto key = [](std::string_view cat, std::size_t i, std::string_view field) {
    return std::string(kPrefix) + std::string(cat) + "." + std::to_string(i) + "." +
           std::string(field);
  };
  for (std::size_t i = 0; i < graph.instances().size(); ++i) {
    c.Set(key("instance", i, "name"), graph.instances()[i].name);
  }
  for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
    const auto &n = graph.nodes()[i];
    c.Set(key("node", i, "name"), n.name);
    c.Set(key("node", i, "host"), n.host);
    if (!n.color.empty()) c.Set(key("node", i, "color"), n.color);
  }
  for (std::size_t i = 0; i < graph.tiers().size(); ++i) {
    const auto &t = graph.tiers()[i];
    c.Set(key("tier", i, "name"), t.name);
    c.Set(key("tier", i, "type"), TierTypeName(t.type));
    c.Set(key("tier", i, "instance"), t.instance);
    c.Set(key("tier", i, "node"), t.node);
    c.Set(key("tier", i, "config"), t.config);
    c.Set(key("tier", i, "count"), std::to_string(t.count));
  }
  for (std::size_t i = 0; i < graph.connections().size(); ++i) {
    c.Set(key("conn", i, "from"), graph.connections()[i].from_tier);
    c.Set(key("conn", i, "to"), graph.connections()[i].to_tier);
  }
  return SerializeConfig(c);
}

NetworkGraph LoadGraph(std::string_view text, std::string source_name) {
  auto config = ParseConfig(text, source_name);
  std::string where = source_name.empty() ? "graph" : source_name;
  auto fail = [&](std::size_t line, const std::string &message) -> void {
    throw Error(ErrorCode::kGraph, where + ":" + std::to_string(line) + ": " + message);
  };

  std::map<std::string, std::map<std::uint64_t, Entity>> entities;
  const auto &lines = config.lines();
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto &l = lines[ln];
    if (l.kind != Configuration::Line::Kind::kPair) continue;
    std::string_view k = l.key;
    bool ok = k.substr(0, kPrefix.size()) == kPrefix;
    std::string category, field;
    std::uint64_t index = 0;
    if (ok) {
      k.remove_prefix(kPrefix.size());
      auto d1 = k.find('.');
      auto d2 = d1 == std::string_view::npos ? d1 : k.find('.', d1 + 1);
      ok = d2 != std::string_view::npos;
      if (ok) {
        category = std::string(k.substr(0, d1));
        auto idx = k.substr(d1 + 1, d2 - d1 - 1);
        field = std::string(k.substr(d2 + 1));
        auto [p, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), index);
        auto cat = FieldsByCategory().find(category);
        ok = ec == std::errc() && p == idx.data() + idx.size() && !idx.empty() &&
             cat != FieldsByCategory().end() && cat->second.count(field);
      }
    }
    if (!ok) fail(ln + 1, "unknown key '" + l.key + "'");
    entities[category][index][field] = {l.value, ln + 1};
  }

  auto require = [&](const Entity &e, const std::string &field, const std::string &what) {
    auto it = e.find(field);
    if (it == e.end()) fail(FirstLine(e), what + " is missing '" + field + "'");
    return it->second.value;
  };
  auto guarded = [&](std::size_t line, auto &&fn) {
    try {
      fn();
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kGraph) throw;
      fail(line, e.what());
    }
  };

  NetworkGraph g;
  for (const auto &[i, e] : entities["instance"]) {
    guarded(FirstLine(e), [&] { g = g.AddInstance({require(e, "name", "instance")}); });
  }
  for (const auto &[i, e] : entities["node"]) {
    NodeDef n;
    n.name = require(e, "name", "node");
    if (e.count("host")) n.host = e.at("host").value;
    if (e.count("color")) n.color = e.at("color").value;
    guarded(FirstLine(e), [&] { g = g.AddNode(n); });
  }
  for (const auto &[i, e] : entities["tier"]) {
    TierDef t;
    t.name = require(e, "name", "tier");
    auto type_text = require(e, "type", "tier '" + t.name + "'");
    auto type = ParseTierType(type_text);
    if (!type) fail(e.at("type").line, "unknown tier type '" + type_text + "'");
    t.type = *type;
    t.instance = require(e, "instance", "tier '" + t.name + "'");
    t.node = require(e, "node", "tier '" + t.name + "'");
    t.config = require(e, "config", "tier '" + t.name + "'");
    if (e.count("count")) {
      const auto &f = e.at("count");
      auto [p, ec] = std::from_chars(f.value.data(), f.value.data() + f.value.size(), t.count);
      if (ec != std::errc() || p != f.value.data() + f.value.size()) {
        fail(f.line, "bad count '" + f.value + "'");
      }
    }
    std::size_t line = FirstLine(e);
    if (!g.FindNode(t.node)) line = e.at("node").line;
    else if (!g.FindInstance(t.instance)) line = e.at("instance").line;
    guarded(line, [&] { g = g.AddTier(t); });
  }
  for (const auto &[i, e] : entities["conn"]) {
    auto from = require(e, "from", "connection");
    auto to = require(e, "to", "connection");
    std::size_t line = !g.FindTier(from) ? e.at("from").line : e.at("to").line;
    guarded(g.FindTier(from) && g.FindTier(to) ? FirstLine(e) : line,
            [&] { g = g.Connect(from, to); });
  }
  return g;
}

// ---------------------------------------------------------------------------

std::string NodeConfigName(std::string_view node) { return std::string(node) + ".node.config"; }

std::string Plan::Render() const {
  std::string out;
  for (const auto &s : steps) out += RenderCommand(s.command) + "\n";
  return out;
}

Plan Translate(const NetworkGraph &graph) {
  std::string blocking;
  for (const auto &f : ValidateGraph(graph)) {
    if (f.severity == Severity::kError) blocking += (blocking.empty() ? "" : "; ") + f.ToString();
  }
  if (!blocking.empty()) throw Error(ErrorCode::kTranslation, blocking);

  const auto &tiers = graph.tiers();
  const auto &gmt = *std::find_if(tiers.begin(), tiers.end(),
                                  [](const TierDef &t) { return t.type == TierType::kGMT; });
  auto hosts_work = [&](const std::string &node) {
    return std::any_of(tiers.begin(), tiers.end(), [&](const TierDef &t) {
      return t.node == node && t.type != TierType::kGMT;
    });
  };
  auto visuals = AssignVisuals(graph);

  Plan plan;
  plan.steps.push_back({cmd::StartGmt{gmt.config}, gmt.name});

  std::vector<const NodeDef *> order;
  if (hosts_work(gmt.node)) order.push_back(graph.FindNode(gmt.node));
  for (const auto &n : graph.nodes()) {
    if (n.name != gmt.node) order.push_back(&n);
  }
  std::uint32_t next_id = 1;
  for (const auto *n : order) {
    Configuration c;
    c.Set(keys::kNodeName, n->name);
    c.Set(keys::kNodeHost, n->host);
    c.Set(keys::kNodeColor, visuals.node_colors.at(n->name));
    if (n->name == gmt.node) c.Set(keys::kNodeGmtHost, "true");
    auto config_name = NodeConfigName(n->name);
    plan.node_configs[config_name] = std::move(c);
    plan.node_ids[n->name] = next_id++;
    plan.steps.push_back({cmd::StartNode{config_name}, n->name});
    plan.steps.push_back({cmd::Register{}, n->name});
  }

  std::uint32_t next_dst = 1;
  for (const auto &t : tiers) {
    if (t.type != TierType::kDST) continue;
    plan.dst_indices[t.name] = next_dst++;
    plan.steps.push_back(
        {cmd::Allocate{plan.node_ids.at(t.node), t.type, t.config, std::nullopt, t.count}, t.name});
  }
  for (auto type : {TierType::kDGT, TierType::kDWT}) {
    for (const auto &t : tiers) {
      if (t.type != type) continue;
      std::uint32_t dst = 0;
      for (const auto &n : graph.Neighbors(t.name)) {
        auto it = plan.dst_indices.find(n);
        if (it != plan.dst_indices.end() && (dst == 0 || it->second < dst)) dst = it->second;
      }
      plan.steps.push_back(
          {cmd::Allocate{plan.node_ids.at(t.node), t.type, t.config, dst, t.count}, t.name});
    }
  }
  return plan;
}

}  // namespace tiernet
