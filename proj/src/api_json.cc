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

#include "tiernet/api_json.h"

#include "tiernet/error.h"

namespace tiernet {
namespace {

std::string Str(const Json &j, const char *key, std::string fallback = "") {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw Error(ErrorCode::kParse, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::string Required(const Json &j, const char *key, const char *what) {
  if (!j.contains(key)) throw Error(ErrorCode::kParse, std::string(what) + " is missing '" + key + "'");
  return Str(j, key);
}

const Json &Array(const Json &j, const char *key) {
  static const Json kEmpty = Json::array();
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return kEmpty;
  if (!it->is_array()) throw Error(ErrorCode::kParse, std::string("field '") + key + "' must be an array");
  return *it;
}

}  // namespace

Json ToJson(const NetworkGraph &graph) {
  Json j;
  j["instances"] = Json::array();
  for (const auto &i : graph.instances()) j["instances"].push_back({{"name", i.name}});
  j["nodes"] = Json::array();
  for (const auto &n : graph.nodes()) {
    j["nodes"].push_back({{"name", n.name}, {"host", n.host}, {"color", n.color}});
  }
  j["tiers"] = Json::array();
  for (const auto &t : graph.tiers()) {
    j["tiers"].push_back({{"name", t.name},
                          {"type", TierTypeName(t.type)},
                          {"instance", t.instance},
                          {"node", t.node},
                          {"config", t.config},
                          {"count", t.count}});
  }
  j["connections"] = Json::array();
  for (const auto &c : graph.connections()) {
    j["connections"].push_back({{"from", c.from_tier}, {"to", c.to_tier}});
  }
  return j;
}

NetworkGraph GraphFromJson(const Json &json) {
  if (!json.is_object()) throw Error(ErrorCode::kParse, "graph must be a JSON object");
  std::vector<InstanceDef> instances;
  std::vector<NodeDef> nodes;
  std::vector<TierDef> tiers;
  std::vector<NodeConnection> connections;
  try {
    for (const auto &i : Array(json, "instances")) instances.push_back({Required(i, "name", "instance")});
    for (const auto &n : Array(json, "nodes")) {
      nodes.push_back({Required(n, "name", "node"), Str(n, "host", "127.0.0.1"), Str(n, "color")});
    }
    for (const auto &t : Array(json, "tiers")) {
      TierDef d;
      d.name = Required(t, "name", "tier");
      auto type = ParseTierType(Required(t, "type", "tier"));
      if (!type) throw Error(ErrorCode::kGraph, "tier '" + d.name + "' has an unknown type");
      d.type = *type;
      d.instance = Required(t, "instance", "tier");
      d.node = Required(t, "node", "tier");
      d.config = Required(t, "config", "tier");
      if (t.contains("count")) {
        const auto &c = t.at("count");
        if (!c.is_number_unsigned()) {
          throw Error(ErrorCode::kParse, "tier '" + d.name + "' count must be a positive integer");
        }
        d.count = c.get<std::uint32_t>();
      }
      tiers.push_back(std::move(d));
    }
    for (const auto &c : Array(json, "connections")) {
      connections.push_back({Required(c, "from", "connection"), Required(c, "to", "connection")});
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  return NetworkGraph::Make(std::move(instances), std::move(nodes), std::move(tiers),
                            std::move(connections));
}

Json ToJson(const VisualAttrs &visuals) {
  Json j;
  j["node_colors"] = Json::object();
  for (const auto &[n, c] : visuals.node_colors) j["node_colors"][n] = c;
  j["instances"] = Json::object();
  for (const auto &[n, v] : visuals.instances) {
    j["instances"][n] = {{"shape", ShapeName(v.shape)}, {"badge", v.badge}};
  }
  j["tiers"] = Json::object();
  for (const auto &[n, v] : visuals.tiers) {
    j["tiers"][n] = {{"color", v.color}, {"shape", ShapeName(v.shape)}, {"badge", v.badge}};
  }
  return j;
}

Json ToJson(const std::vector<Finding> &findings) {
  Json j = Json::array();
  for (const auto &f : findings) {
    j.push_back({{"subject", f.key},
                 {"reason", f.reason},
                 {"severity", f.severity == Severity::kError ? "error" : "warning"}});
  }
  return j;
}

Json ToJson(const Plan &plan) {
  Json j;
  j["commands"] = Json::array();
  j["steps"] = Json::array();
  for (const auto &s : plan.steps) {
    j["commands"].push_back(RenderCommand(s.command));
    j["steps"].push_back({{"command", RenderCommand(s.command)}, {"subject", s.subject}});
  }
  j["node_configs"] = Json::object();
  for (const auto &[name, c] : plan.node_configs) j["node_configs"][name] = SerializeConfig(c);
  j["node_ids"] = plan.node_ids;
  j["dst_indices"] = plan.dst_indices;
  return j;
}

Json ToJson(const GeneratorReport &r) {
  Json j{{"mode", r.mode},
         {"requested", r.requested},
         {"emitted", r.emitted},
         {"computed", r.computed},
         {"cache_hits", r.cache_hits},
         {"interruptions", r.interruptions},
         {"stopped_early", r.stopped_early},
         {"latencies_us", r.latencies_us}};
  if (!r.latencies_us.empty()) {
    j["latency_us"] = {
        {"min", r.MinLatencyUs()}, {"max", r.MaxLatencyUs()}, {"mean", r.MeanLatencyUs()}};
  }
  return j;
}

Json ToJson(const EvaluationHandle &h) {
  Json j{{"generator", h.generator.ToString()},
         {"status", EvalStatusName(h.status)},
         {"error", h.error},
         {"started_at_ms", h.started_at_ms}};
  j["report"] = h.report ? ToJson(*h.report) : Json();
  return j;
}

Json ToJson(const RegistrySnapshot &s) {
  Json j;
  j["nodes"] = Json::array();
  for (const auto &n : s.nodes) {
    j["nodes"].push_back({{"node_id", n.node_id},
                          {"name", n.name},
                          {"host", n.host},
                          {"color", n.color},
                          {"status", NodeStatusName(n.status)},
                          {"registered_at_ms", n.registered_at_ms},
                          {"dst_index", n.dst_index}});
  }
  j["tiers"] = Json::array();
  for (const auto &t : s.tiers) {
    j["tiers"].push_back({{"tier_id", t.tier_id.ToString()},
                          {"type", TierTypeName(t.tier_id.type)},
                          {"node_id", t.tier_id.node_id},
                          {"config", t.config_name},
                          {"dst_index", t.dst_index},
                          {"status", t.status}});
  }
  j["dsts"] = Json::array();
  for (const auto &d : s.dsts) {
    j["dsts"].push_back({{"index", d.index},
                         {"endpoint", d.endpoint.ToString()},
                         {"tier", d.tier ? Json(d.tier->ToString()) : Json()},
                         {"active", d.active}});
  }
  j["evaluations"] = Json::array();
  for (const auto &e : s.evaluations) j["evaluations"].push_back(ToJson(e));
  return j;
}

Json ToJson(const StoreStats &stats) {
  Json j{{"total_deposits", stats.total_deposits},
         {"cache_hits", stats.cache_hits},
         {"entries", stats.Entries()}};
  const char *states[] = {"pending", "processing", "computed"};
  for (int s = 0; s < 3; ++s) {
    Json by_kind;
    for (int k = 0; k < 3; ++k) {
      by_kind[std::string(DemandKindName(static_cast<DemandKind>(k)))] = stats.counts[s][k];
    }
    j[states[s]] = by_kind;
  }
  return j;
}

Json ToJson(const ApiEvent &e) {
  std::string level(LogLevelName(e.level));
  for (auto &c : level) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return {{"seq", e.seq},
          {"source", e.source},
          {"level", level},
          {"message", e.message},
          {"timestamp_ms", e.timestamp_ms}};
}

Json ToJson(const NodeIdentity &id) {
  return {{"node_id", id.node_id ? Json(*id.node_id) : Json()},
          {"name", id.name},
          {"dst_index", id.dst_index ? Json(*id.dst_index) : Json()},
          {"dst", id.dst ? Json(id.dst->ToString()) : Json()}};
}

Json ToJson(const HostedTier &t) {
  return {{"tier_id", t.id.ToString()},
          {"config", t.config_name},
          {"status", TierStatusName(t.status)},
          {"dst", t.dst ? Json(t.dst->ToString()) : Json()}};
}

Json ToJson(const TierAllocationResult &r) {
  Json j;
  j["registrations"] = Json::array();
  for (const auto &reg : r.registrations) {
    j["registrations"].push_back({{"tier_id", reg.tier_id.ToString()},
                                  {"config", reg.config_name},
                                  {"endpoint", reg.endpoint ? Json(reg.endpoint->ToString()) : Json()},
                                  {"error", reg.error}});
  }
  j["errors"] = r.errors;
  return j;
}

Json ToJson(const TierDeallocationResult &r) {
  Json j;
  j["outcomes"] = Json::array();
  for (const auto &o : r.outcomes) {
    j["outcomes"].push_back({{"tier_id", o.tier_id.ToString()},
                             {"status", DeallocationStatusName(o.status)},
                             {"message", o.message}});
  }
  return j;
}

Json ErrorJson(std::string_view code, std::string_view message, Json detail) {
  return {{"code", code}, {"message", message}, {"detail", std::move(detail)}};
}

}  // namespace tiernet
