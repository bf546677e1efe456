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

#include "tiernet/config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "tiernet/endpoint.h"
#include "tiernet/error.h"

namespace tiernet {

namespace {

std::string_view Trim(std::string_view s) {
  const auto *ws = " \t\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::optional<std::int64_t> ParseInt(std::string_view s) {
  s = Trim(s);
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<bool> ParseBool(std::string_view s) {
  s = Trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

std::vector<std::pair<std::string, std::string>> Configuration::Pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto &l : lines_) {
    if (l.kind == Line::Kind::kPair) out.emplace_back(l.key, l.value);
  }
  return out;
}

std::size_t Configuration::size() const {
  return std::count_if(lines_.begin(), lines_.end(),
                       [](const Line &l) { return l.kind == Line::Kind::kPair; });
}

bool Configuration::Has(std::string_view key) const { return Get(key).has_value(); }

std::optional<std::string> Configuration::Get(std::string_view key) const {
  for (const auto &l : lines_) {
    if (l.kind == Line::Kind::kPair && l.key == key) return l.value;
  }
  return std::nullopt;
}

std::string Configuration::GetOr(std::string_view key, std::string fallback) const {
  auto v = Get(key);
  return v ? *v : std::move(fallback);
}

std::optional<std::int64_t> Configuration::GetInt(std::string_view key) const {
  auto v = Get(key);
  if (!v) return std::nullopt;
  auto n = ParseInt(*v);
  if (!n) {
    throw Error(ErrorCode::kValidation, std::string(key) + ": not an integer: '" + *v + "'");
  }
  return n;
}

std::int64_t Configuration::GetIntOr(std::string_view key, std::int64_t fallback) const {
  return GetInt(key).value_or(fallback);
}

bool Configuration::GetBoolOr(std::string_view key, bool fallback) const {
  auto v = Get(key);
  if (!v) return fallback;
  auto b = ParseBool(*v);
  if (!b) throw Error(ErrorCode::kValidation, std::string(key) + ": not a boolean: '" + *v + "'");
  return *b;
}

Configuration &Configuration::Set(std::string_view key, std::string_view value) {
  for (auto &l : lines_) {
    if (l.kind == Line::Kind::kPair && l.key == key) {
      l.value = value;
      l.raw = std::string(key) + "=" + std::string(value);
      return *this;
    }
  }
  Line l;
  l.kind = Line::Kind::kPair;
  l.key = key;
  l.value = value;
  l.raw = l.key + "=" + l.value;
  lines_.push_back(std::move(l));
  return *this;
}

Configuration &Configuration::AddComment(std::string_view text) {
  Line l;
  l.kind = Line::Kind::kComment;
  l.raw = "# " + std::string(text);
  lines_.push_back(std::move(l));
  return *this;
}

bool Configuration::Remove(std::string_view key) {
  auto it = std::find_if(lines_.begin(), lines_.end(), [&](const Line &l) {
    return l.kind == Line::Kind::kPair && l.key == key;
  });
  if (it == lines_.end()) return false;
  lines_.erase(it);
  return true;
}

Configuration ParseConfig(std::string_view text, std::string source_name) {
  Configuration c;
  c.source_name_ = std::move(source_name);
  c.final_newline_ = text.empty() || text.back() == '\n';
  std::set<std::string, std::less<>> seen;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  const std::string where = c.source_name_.empty() ? "line " : c.source_name_ + ":";
  while (pos < text.size()) {
    ++line_no;
    auto nl = text.find('\n', pos);
    auto end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view body = text.substr(pos, end - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;

    Configuration::Line line;
    if (nl != std::string_view::npos && !body.empty() && body.back() == '\r') {
      line.cr = true;
      body.remove_suffix(1);
    }
    line.raw = body;
    auto trimmed = Trim(body);
    if (trimmed.empty()) {
      line.kind = Configuration::Line::Kind::kBlank;
    } else if (trimmed.front() == '#') {
      line.kind = Configuration::Line::Kind::kComment;
    } else {
      auto eq = body.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorCode::kParse, where + std::to_string(line_no) +
                                           ": expected key=value, got '" + std::string(body) + "'");
      }
      auto key = Trim(body.substr(0, eq));
      if (key.empty()) {
        throw Error(ErrorCode::kParse, where + std::to_string(line_no) + ": empty key");
      }
      if (!seen.emplace(key).second) {
        throw Error(ErrorCode::kParse,
                    where + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
      }
      line.kind = Configuration::Line::Kind::kPair;
      line.key = key;
      line.value = body.substr(eq + 1);
    }
    c.lines_.push_back(std::move(line));
  }
  return c;
}

std::string SerializeConfig(const Configuration &config) {
  std::string out;
  const auto &lines = config.lines_;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out += lines[i].raw;
    if (i + 1 < lines.size() || config.final_newline_) out += lines[i].cr ? "\r\n" : "\n";
  }
  return out;
}

Configuration LoadConfigFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseConfig(buf.str(), path);
}

void SaveConfigFile(const Configuration &config, const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kStartup, "cannot write config file " + path);
  out << SerializeConfig(config);
  if (!out) throw Error(ErrorCode::kStartup, "write failed for " + path);
}

// ---------------------------------------------------------------------------
// Implementation and dispatcher names

const std::vector<std::string> &ImplementationNames(TierType type) {
  static const std::vector<std::string> kDst = {"gipsy.GEE.multitier.DST.DSTWrapper"};
  static const std::vector<std::string> kDgt = {"gipsy.tests.GEE.simulator.DGTSimulator"};
  static const std::vector<std::string> kDwt = {"gipsy.GEE.multitier.DWT.DWTWrapper"};
  static const std::vector<std::string> kGmt = {"gipsy.GEE.multitier.GMT.GMTWrapper"};
  static const std::vector<std::string> kNone;
  switch (type) {
    case TierType::kDST:
      return kDst;
    case TierType::kDGT:
      return kDgt;
    case TierType::kDWT:
      return kDwt;
    case TierType::kGMT:
      return kGmt;
    default:
      return kNone;
  }
}

std::optional<TierType> TierTypeOfImplementation(std::string_view name) {
  name = Trim(name);
  for (auto t : {TierType::kDST, TierType::kDGT, TierType::kDWT, TierType::kGMT}) {
    const auto &names = ImplementationNames(t);
    if (std::find(names.begin(), names.end(), name) != names.end()) return t;
  }
  return std::nullopt;
}

namespace {
const std::vector<std::string> &DispatcherNames() {
  static const std::vector<std::string> kNames = {
      "tcp",
      "gipsy.GEE.IDP.DemandGenerator.jini.rmi.JiniDemandDispatcher",
      "gipsy.GEE.IDP.DemandGenerator.jms.JMSDemandDispatcher",
  };
  return kNames;
}
}  // namespace

std::optional<std::string> TransportForDispatcher(std::string_view name) {
  const auto &names = DispatcherNames();
  if (std::find(names.begin(), names.end(), Trim(name)) == names.end()) return std::nullopt;
  return "tcp";
}

// ---------------------------------------------------------------------------
// Validation

ValueRule ValueRule::Integer(std::int64_t min, std::int64_t max) {
  ValueRule r;
  r.kind = Kind::kInteger;
  r.min = min;
  r.max = max;
  return r;
}

ValueRule ValueRule::OneOf(std::vector<std::string> choices) {
  ValueRule r;
  r.kind = Kind::kEnum;
  r.choices = std::move(choices);
  return r;
}

std::optional<std::string> ValueRule::Check(std::string_view value) const {
  switch (kind) {
    case Kind::kText:
      return std::nullopt;
    case Kind::kInteger: {
      auto n = ParseInt(value);
      if (!n) return "not an integer: '" + std::string(value) + "'";
      if (*n < min || *n > max) {
        return "value " + std::to_string(*n) + " outside range " + std::to_string(min) + ".." +
               std::to_string(max);
      }
      return std::nullopt;
    }
    case Kind::kEnum: {
      auto v = Trim(value);
      if (std::find(choices.begin(), choices.end(), v) != choices.end()) return std::nullopt;
      std::string list;
      for (const auto &c : choices) list += (list.empty() ? "" : ", ") + c;
      return "unknown value '" + std::string(v) + "' (expected one of: " + list + ")";
    }
    case Kind::kEndpoint:
      try {
        Endpoint::Parse(Trim(value));
        return std::nullopt;
      } catch (const Error &e) {
        return e.what();
      }
    case Kind::kBool:
      if (ParseBool(value)) return std::nullopt;
      return "not a boolean: '" + std::string(value) + "'";
  }
  return std::nullopt;
}

const KeyRule *TierSchema::Find(std::string_view key) const {
  for (const auto &k : keys) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

std::string_view SeverityName(Severity severity) {
  return severity == Severity::kError ? "error" : "warning";
}

std::string Finding::ToString() const {
  return std::string(SeverityName(severity)) + ": " + key + ": " + reason;
}

namespace {

constexpr std::int64_t kMaxInt = std::numeric_limits<std::int64_t>::max();
constexpr std::int64_t kHour = 3'600'000;

std::vector<std::string> DispatcherChoices() { return DispatcherNames(); }

KeyRule Impl(TierType t) {
  return {std::string(keys::kWrapperImpl), true, ValueRule::OneOf(ImplementationNames(t))};
}

TierSchema BuildSchema(TierType type) {
  TierSchema s;
  s.tier_type = type;
  auto add = [&](std::string_view key, bool required, ValueRule rule) {
    s.keys.push_back({std::string(key), required, std::move(rule)});
  };
  switch (type) {
    case TierType::kDST:
      s.keys.push_back(Impl(type));
      add(keys::kDstHost, false, ValueRule::Text());
      add(keys::kDstPort, false, ValueRule::Integer(0, 65535));
      add(keys::kDstJournal, false, ValueRule::Text());
      add(keys::kDstHeartbeatMs, false, ValueRule::Integer(1, kHour));
      break;
    case TierType::kDGT:
      s.keys.push_back(Impl(type));
      add(keys::kDispatcherImpl, false, ValueRule::OneOf(DispatcherChoices()));
      add(keys::kSimMode, true, ValueRule::Integer(0, 3));
      add(keys::kSimTesterParameter, true, ValueRule::Integer(1, 1024));
      add(keys::kSimTesterNumber, true, ValueRule::Integer(1, 10'000'000));
      add(keys::kSimPayload, true, ValueRule::Integer(0, 1 << 20));
      add(keys::kSimMaxDemands, false, ValueRule::Integer(1, 10'000'000));
      add(keys::kSimSeed, false, ValueRule::Integer(0, kMaxInt));
      add(keys::kSimProgram, false, ValueRule::Text());
      break;
    case TierType::kDWT:
      s.keys.push_back(Impl(type));
      add(keys::kDispatcherImpl, false, ValueRule::OneOf(DispatcherChoices()));
      add(keys::kDwtWork, false, ValueRule::OneOf({"echo", "checksum", "sleep-then-checksum"}));
      add(keys::kDwtDelayMs, false, ValueRule::Integer(0, kHour));
      add(keys::kDwtPollMs, false, ValueRule::Integer(1, 60'000));
      break;
    case TierType::kGMT:
      s.keys.push_back(Impl(type));
      add(keys::kGmtHost, false, ValueRule::Text());
      add(keys::kGmtPort, false, ValueRule::Integer(0, 65535));
      add(keys::kGmtHeartbeatMs, false, ValueRule::Integer(1, kHour));
      break;
    case TierType::kNode:
      add(keys::kNodeName, true, ValueRule::Text());
      add(keys::kNodeGmtEndpoint, false, ValueRule::EndpointText());
      add(keys::kNodeColor, false, ValueRule::Text());
      add(keys::kNodeHost, false, ValueRule::Text());
      add(keys::kNodeGmtHost, false, ValueRule::Boolean());
      add(keys::kNodeHeartbeatMs, false, ValueRule::Integer(1, kHour));
      break;
  }
  return s;
}

}  // namespace

const TierSchema &SchemaFor(TierType type) {
  static const TierSchema kSchemas[] = {
      BuildSchema(TierType::kDST), BuildSchema(TierType::kDGT), BuildSchema(TierType::kDWT),
      BuildSchema(TierType::kGMT), BuildSchema(TierType::kNode),
  };
  return kSchemas[static_cast<int>(type)];
}

std::vector<Finding> Validate(const Configuration &config, const TierSchema &schema) {
  std::vector<Finding> findings;
  for (const auto &rule : schema.keys) {
    auto v = config.Get(rule.key);
    if (!v) {
      if (rule.required) findings.push_back({rule.key, "required key missing", Severity::kError});
      continue;
    }
    if (auto reason = rule.rule.Check(*v)) {
      findings.push_back({rule.key, *reason, Severity::kError});
    }
  }
  for (const auto &[key, value] : config.Pairs()) {
    if (!schema.Find(key)) {
      findings.push_back({key,
                          "unknown key for " + std::string(TierTypeName(schema.tier_type)) +
                              " configuration",
                          Severity::kWarning});
    }
  }
  return findings;
}

bool HasErrors(const std::vector<Finding> &findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding &f) { return f.severity == Severity::kError; });
}

void RequireValid(const Configuration &config, const TierSchema &schema) {
  auto findings = Validate(config, schema);
  if (!HasErrors(findings)) return;
  std::string msg = "invalid " + std::string(TierTypeName(schema.tier_type)) + " configuration";
  if (!config.source_name().empty()) msg += " " + config.source_name();
  for (const auto &f : findings) {
    if (f.severity == Severity::kError) msg += "; " + f.key + ": " + f.reason;
  }
  throw Error(ErrorCode::kValidation, msg);
}

}  // namespace tiernet
