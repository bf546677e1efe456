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

// Key-value configuration files and per-tier-type schemas.
//
// A file is a sequence of lines. A line is blank, a comment (first
// non-blank character is '#'), or a pair "key=value" where the key is the
// trimmed text before the first '=' and the value is everything after it.
// Values stay uninterpreted text until validation. Comments, blank lines and
// the exact bytes of every line survive a parse/serialize round trip.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tiernet/demand.h"

namespace tiernet {

class Configuration {
 public:
  struct Line {
    enum class Kind : std::uint8_t { kPair, kComment, kBlank };
    Kind kind = Kind::kBlank;
    std::string key;
    std::string value;
    // Exact line text without terminator.
    std::string raw;
    // Line was terminated by CRLF.
    bool cr = false;

    bool operator==(const Line &) const = default;
  };

  Configuration() = default;

  const std::string &source_name() const { return source_name_; }
  void set_source_name(std::string name) { source_name_ = std::move(name); }

  const std::vector<Line> &lines() const { return lines_; }
  std::vector<std::pair<std::string, std::string>> Pairs() const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  bool Has(std::string_view key) const;
  std::optional<std::string> Get(std::string_view key) const;
  std::string GetOr(std::string_view key, std::string fallback) const;
  // Throws Error(kValidation) if present but not an integer.
  std::optional<std::int64_t> GetInt(std::string_view key) const;
  std::int64_t GetIntOr(std::string_view key, std::int64_t fallback) const;
  // Accepts true/false/1/0/yes/no. Throws Error(kValidation).
  bool GetBoolOr(std::string_view key, bool fallback) const;

  // Replaces the value in place, or appends a new pair line.
  Configuration &Set(std::string_view key, std::string_view value);
  Configuration &AddComment(std::string_view text);
  bool Remove(std::string_view key);

  // Equality ignores source_name.
  bool operator==(const Configuration &other) const {
    return lines_ == other.lines_ && final_newline_ == other.final_newline_;
  }

 private:
  friend Configuration ParseConfig(std::string_view text, std::string source_name);
  friend std::string SerializeConfig(const Configuration &config);

  std::vector<Line> lines_;
  bool final_newline_ = true;
  std::string source_name_;
};

// Throws Error(kParse) naming the line for duplicate keys, empty keys and
// lines that are neither pair, comment nor blank.
Configuration ParseConfig(std::string_view text, std::string source_name = "");
std::string SerializeConfig(const Configuration &config);
// Reads and parses a file; the source name is the path. Throws Error(kParse)
// or Error(kNotFound).
Configuration LoadConfigFile(const std::string &path);
void SaveConfigFile(const Configuration &config, const std::string &path);

// ---------------------------------------------------------------------------
// Well-known keys.

namespace keys {
inline constexpr std::string_view kWrapperImpl = "gipsy.GEE.multitier.wrapper.impl";
inline constexpr std::string_view kDispatcherImpl = "gipsy.GEE.multitier.DGT.DemandDispatcher.impl";
inline constexpr std::string_view kSimMode = "gipsy.tests.GEE.simulator.mode";
inline constexpr std::string_view kSimTesterParameter = "gipsy.tests.GEE.simulator.tester.parameter";
inline constexpr std::string_view kSimTesterNumber = "gipsy.tests.GEE.simulator.tester.number";
inline constexpr std::string_view kSimPayload = "gipsy.tests.GEE.simulator.demand.payload";
inline constexpr std::string_view kSimMaxDemands = "gipsy.tests.GEE.simulator.demand.max";
inline constexpr std::string_view kSimSeed = "net.sim.seed";
inline constexpr std::string_view kSimProgram = "net.sim.program";

inline constexpr std::string_view kDstHost = "net.dst.host";
inline constexpr std::string_view kDstPort = "net.dst.port";
inline constexpr std::string_view kDstJournal = "net.dst.journal";
inline constexpr std::string_view kDstHeartbeatMs = "net.dst.heartbeat_ms";

inline constexpr std::string_view kDwtWork = "net.dwt.work";
inline constexpr std::string_view kDwtDelayMs = "net.dwt.delay_ms";
inline constexpr std::string_view kDwtPollMs = "net.dwt.poll_ms";

inline constexpr std::string_view kGmtHost = "net.gmt.host";
inline constexpr std::string_view kGmtPort = "net.gmt.port";
inline constexpr std::string_view kGmtHeartbeatMs = "net.gmt.heartbeat_ms";

inline constexpr std::string_view kNodeName = "net.node.name";
inline constexpr std::string_view kNodeGmtEndpoint = "net.node.gmt.endpoint";
inline constexpr std::string_view kNodeColor = "net.node.color";
inline constexpr std::string_view kNodeHost = "net.node.host";
inline constexpr std::string_view kNodeGmtHost = "net.node.gmt_host";
inline constexpr std::string_view kNodeHeartbeatMs = "net.node.heartbeat_ms";
}  // namespace keys

// Implementation names accepted by the wrapper.impl key, per tier type.
const std::vector<std::string> &ImplementationNames(TierType type);
// Tier type whose implementation list contains name.
std::optional<TierType> TierTypeOfImplementation(std::string_view name);

// Transport selected by a DemandDispatcher.impl value. Only "tcp" exists; the
// historical Jini and JMS dispatcher names map to it.
std::optional<std::string> TransportForDispatcher(std::string_view name);

// ---------------------------------------------------------------------------
// Validation.

struct ValueRule {
  enum class Kind : std::uint8_t { kText, kInteger, kEnum, kEndpoint, kBool };
  Kind kind = Kind::kText;
  std::int64_t min = 0;
  std::int64_t max = 0;
  std::vector<std::string> choices;

  static ValueRule Text() { return {}; }
  static ValueRule Integer(std::int64_t min, std::int64_t max);
  static ValueRule OneOf(std::vector<std::string> choices);
  static ValueRule EndpointText() { return Of(Kind::kEndpoint); }
  static ValueRule Boolean() { return Of(Kind::kBool); }

  static ValueRule Of(Kind kind) {
    ValueRule r;
    r.kind = kind;
    return r;
  }

  // Reason the value is rejected, if it is.
  std::optional<std::string> Check(std::string_view value) const;
};

struct KeyRule {
  std::string key;
  bool required = false;
  ValueRule rule;
};

struct TierSchema {
  // "DST", "DGT", "DWT", "GMT" or "NODE".
  TierType tier_type = TierType::kDST;
  std::vector<KeyRule> keys;

  const KeyRule *Find(std::string_view key) const;
};

enum class Severity : std::uint8_t { kWarning, kError };
std::string_view SeverityName(Severity severity);

struct Finding {
  std::string key;
  std::string reason;
  Severity severity = Severity::kError;

  std::string ToString() const;
  bool operator==(const Finding &) const = default;
};

// Built-in schema for a tier type (kNode gives the node daemon schema).
const TierSchema &SchemaFor(TierType type);

// Required keys missing or invalid and optional keys present but invalid are
// errors; keys the schema does not know are warnings.
std::vector<Finding> Validate(const Configuration &config, const TierSchema &schema);
bool HasErrors(const std::vector<Finding> &findings);
// Throws Error(kValidation) listing the error findings, if any.
void RequireValid(const Configuration &config, const TierSchema &schema);

}  // namespace tiernet
