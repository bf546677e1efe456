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

// Demands: identity, kinds, and the pending -> processing -> computed state
// machine shared by every tier.

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tiernet/bytes.h"

namespace tiernet {

// Milliseconds since the Unix epoch. Informational only.
std::int64_t NowMs();

// kNode is not a tier: it identifies a node daemon's own control sessions.
enum class TierType : std::uint8_t { kDST = 0, kDGT = 1, kDWT = 2, kGMT = 3, kNode = 4 };

std::string_view TierTypeName(TierType type);
std::optional<TierType> ParseTierType(std::string_view text);

struct TierId {
  std::uint32_t node_id = 0;
  TierType type = TierType::kDST;
  std::uint32_t local_index = 0;

  // "nodeId:type:index", e.g. "2:DWT:1".
  std::string ToString() const;
  static TierId Parse(std::string_view text);

  auto operator<=>(const TierId &) const = default;
};

using ContextEntry = std::pair<std::string, std::int64_t>;

// A canonical (sorted by dimension name) set of dimension/tag pairs.
class Context {
 public:
  Context() = default;

  // Throws Error(kInvalidContext) on an empty or duplicated dimension name.
  static Context Make(std::vector<ContextEntry> entries);

  const std::vector<ContextEntry> &entries() const { return entries_; }
  std::optional<std::int64_t> Get(std::string_view dimension) const;

  bool operator==(const Context &) const = default;

 private:
  std::vector<ContextEntry> entries_;
};

struct DemandSignature {
  std::string program_id;
  std::string identifier;
  Context context;

  // FNV-1a over the canonical encoding.
  std::uint64_t Hash() const;
  std::string ToString() const;

  bool operator==(const DemandSignature &) const = default;
};

DemandSignature MakeSignature(std::string program_id, std::string identifier,
                              std::vector<ContextEntry> context);

struct SignatureHash {
  std::size_t operator()(const DemandSignature &s) const { return s.Hash(); }
};

enum class DemandKind : std::uint8_t { kIntensional = 0, kProcedural = 1, kSystem = 2 };
std::string_view DemandKindName(DemandKind kind);

struct Pending {
  bool operator==(const Pending &) const = default;
};
struct Processing {
  TierId holder;
  std::int64_t since_ms = 0;
  bool operator==(const Processing &) const = default;
};
struct Computed {
  Bytes result;
  bool operator==(const Computed &) const = default;
};
using DemandState = std::variant<Pending, Processing, Computed>;

enum class StateTag : std::uint8_t { kPending = 0, kProcessing = 1, kComputed = 2 };
StateTag TagOf(const DemandState &state);
std::string_view StateName(StateTag tag);

struct GrabEvent {
  TierId tier;
  std::int64_t at_ms = 0;
};
struct CompleteEvent {
  Bytes result;
};
struct RequeueEvent {};
using DemandEvent = std::variant<GrabEvent, CompleteEvent, RequeueEvent>;
std::string_view EventName(const DemandEvent &event);

class Demand {
 public:
  // A freshly issued demand is always Pending.
  static Demand Issue(DemandSignature signature, DemandKind kind, Bytes payload,
                      TierId issued_by, std::int64_t issued_at_ms = NowMs());

  const DemandSignature &signature() const { return signature_; }
  DemandKind kind() const { return kind_; }
  const DemandState &state() const { return state_; }
  StateTag tag() const { return TagOf(state_); }
  const Bytes &payload() const { return payload_; }
  TierId issued_by() const { return issued_by_; }
  std::int64_t issued_at_ms() const { return issued_at_ms_; }

  // Holder when Processing, result when Computed.
  std::optional<TierId> holder() const;
  const Bytes *result() const;

  bool operator==(const Demand &) const = default;

 private:
  friend Demand Transition(const Demand &demand, const DemandEvent &event);
  friend Demand ReadDemand(ByteReader &in);

  Demand() = default;

  DemandSignature signature_;
  DemandKind kind_ = DemandKind::kProcedural;
  DemandState state_;
  Bytes payload_;
  TierId issued_by_;
  std::int64_t issued_at_ms_ = 0;
};

// Legal moves: Pending+Grab, Processing+Complete, Processing+Requeue.
// Anything else throws Error(kStateMachine) naming the state and event.
Demand Transition(const Demand &demand, const DemandEvent &event);

// Canonical binary encoding, big-endian, fields in declaration order.
void WriteTierId(ByteWriter &out, const TierId &id);
TierId ReadTierId(ByteReader &in);
void WriteSignature(ByteWriter &out, const DemandSignature &sig);
DemandSignature ReadSignature(ByteReader &in);
void WriteDemand(ByteWriter &out, const Demand &demand);
Demand ReadDemand(ByteReader &in);

Bytes EncodeSignature(const DemandSignature &sig);
Bytes EncodeDemand(const Demand &demand);
Demand DecodeDemand(std::span<const std::uint8_t> bytes);

}  // namespace tiernet
