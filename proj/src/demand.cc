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

#include "tiernet/demand.h"

#include <algorithm>
#include <chrono>
#include <charconv>

#include "tiernet/error.h"

namespace tiernet {

std::int64_t NowMs() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string_view TierTypeName(TierType type) {
  switch (type) {
    case TierType::kDST: return "DST";
    case TierType::kDGT: return "DGT";
    case TierType::kDWT: return "DWT";
    case TierType::kGMT: return "GMT";
    case TierType::kNode: return "NODE";
  }
  return "?";
}

std::optional<TierType> ParseTierType(std::string_view text) {
  for (auto t : {TierType::kDST, TierType::kDGT, TierType::kDWT, TierType::kGMT,
                 TierType::kNode}) {
    if (TierTypeName(t) == text) return t;
  }
  return std::nullopt;
}

std::string TierId::ToString() const {
  return std::to_string(node_id) + ":" + std::string(TierTypeName(type)) + ":" +
         std::to_string(local_index);
}

namespace {

std::uint32_t ParseU32(std::string_view text, std::string_view what) {
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::kParse, "invalid " + std::string(what) + " '" +
                                       std::string(text) + "'");
  }
  return v;
}

}  // namespace

TierId TierId::Parse(std::string_view text) {
  auto first = text.find(':');
  auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
  if (second == std::string_view::npos) {
    throw Error(ErrorCode::kParse,
                "tier id '" + std::string(text) + "' is not nodeId:type:index");
  }
  auto type = ParseTierType(text.substr(first + 1, second - first - 1));
  if (!type) {
    throw Error(ErrorCode::kParse, "unknown tier type in '" + std::string(text) + "'");
  }
  return TierId{ParseU32(text.substr(0, first), "node id"), *type,
                ParseU32(text.substr(second + 1), "tier index")};
}

Context Context::Make(std::vector<ContextEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto &a, const auto &b) { return a.first < b.first; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first.empty()) {
      throw Error(ErrorCode::kInvalidContext, "empty dimension name");
    }
    if (i > 0 && entries[i].first == entries[i - 1].first) {
      throw Error(ErrorCode::kInvalidContext,
                  "duplicate dimension '" + entries[i].first + "'");
    }
  }
  Context c;
  c.entries_ = std::move(entries);
  return c;
}

std::optional<std::int64_t> Context::Get(std::string_view dimension) const {
  for (const auto &[name, tag] : entries_) {
    if (name == dimension) return tag;
  }
  return std::nullopt;
}

std::uint64_t DemandSignature::Hash() const { return Fnv1a64(EncodeSignature(*this)); }

std::string DemandSignature::ToString() const {
  std::string out = program_id + "/" + identifier + "[";
  for (std::size_t i = 0; i < context.entries().size(); ++i) {
    if (i) out += ",";
    out += context.entries()[i].first + "=" + std::to_string(context.entries()[i].second);
  }
  return out + "]";
}

DemandSignature MakeSignature(std::string program_id, std::string identifier,
                              std::vector<ContextEntry> context) {
  return DemandSignature{std::move(program_id), std::move(identifier),
                         Context::Make(std::move(context))};
}

std::string_view DemandKindName(DemandKind kind) {
  switch (kind) {
    case DemandKind::kIntensional: return "intensional";
    case DemandKind::kProcedural: return "procedural";
    case DemandKind::kSystem: return "system";
  }
  return "?";
}

StateTag TagOf(const DemandState &state) { return static_cast<StateTag>(state.index()); }

std::string_view StateName(StateTag tag) {
  switch (tag) {
    case StateTag::kPending: return "Pending";
    case StateTag::kProcessing: return "Processing";
    case StateTag::kComputed: return "Computed";
  }
  return "?";
}

std::string_view EventName(const DemandEvent &event) {
  switch (event.index()) {
    case 0: return "Grab";
    case 1: return "Complete";
    default: return "Requeue";
  }
}

Demand Demand::Issue(DemandSignature signature, DemandKind kind, Bytes payload,
                     TierId issued_by, std::int64_t issued_at_ms) {
  Demand d;
  d.signature_ = std::move(signature);
  d.kind_ = kind;
  d.state_ = Pending{};
  d.payload_ = std::move(payload);
  d.issued_by_ = issued_by;
  d.issued_at_ms_ = issued_at_ms;
  return d;
}

std::optional<TierId> Demand::holder() const {
  if (const auto *p = std::get_if<Processing>(&state_)) return p->holder;
  return std::nullopt;
}

const Bytes *Demand::result() const {
  if (const auto *c = std::get_if<Computed>(&state_)) return &c->result;
  return nullptr;
}

Demand Transition(const Demand &demand, const DemandEvent &event) {
  Demand next = demand;
  const auto tag = demand.tag();
  if (tag == StateTag::kPending && std::holds_alternative<GrabEvent>(event)) {
    const auto &grab = std::get<GrabEvent>(event);
    next.state_ = Processing{grab.tier, grab.at_ms};
    return next;
  }
  if (tag == StateTag::kProcessing && std::holds_alternative<CompleteEvent>(event)) {
    next.state_ = Computed{std::get<CompleteEvent>(event).result};
    return next;
  }
  if (tag == StateTag::kProcessing && std::holds_alternative<RequeueEvent>(event)) {
    next.state_ = Pending{};
    return next;
  }
  throw Error(ErrorCode::kStateMachine,
              "illegal transition: " + std::string(EventName(event)) + " on " +
                  std::string(StateName(tag)) + " demand " +
                  demand.signature().ToString());
}

void WriteTierId(ByteWriter &out, const TierId &id) {
  out.U32(id.node_id);
  out.U8(static_cast<std::uint8_t>(id.type));
  out.U32(id.local_index);
}

TierId ReadTierId(ByteReader &in) {
  TierId id;
  id.node_id = in.U32();
  auto type = in.U8();
  if (type > static_cast<std::uint8_t>(TierType::kNode)) {
    throw Error(ErrorCode::kParse, "invalid tier type byte " + std::to_string(type));
  }
  id.type = static_cast<TierType>(type);
  id.local_index = in.U32();
  return id;
}

void WriteSignature(ByteWriter &out, const DemandSignature &sig) {
  out.Str(sig.program_id);
  out.Str(sig.identifier);
  out.U32(static_cast<std::uint32_t>(sig.context.entries().size()));
  for (const auto &[name, tag] : sig.context.entries()) {
    out.Str(name);
    out.I64(tag);
  }
}

DemandSignature ReadSignature(ByteReader &in) {
  DemandSignature sig;
  sig.program_id = in.Str();
  sig.identifier = in.Str();
  auto n = in.U32();
  std::vector<ContextEntry> entries;
  entries.reserve(std::min<std::uint32_t>(n, 1024));
  for (std::uint32_t i = 0; i < n; ++i) {
    auto name = in.Str();
    auto tag = in.I64();
    entries.emplace_back(std::move(name), tag);
  }
  sig.context = Context::Make(std::move(entries));
  return sig;
}

void WriteDemand(ByteWriter &out, const Demand &demand) {
  WriteSignature(out, demand.signature());
  out.U8(static_cast<std::uint8_t>(demand.kind()));
  out.U8(static_cast<std::uint8_t>(demand.tag()));
  if (const auto *p = std::get_if<Processing>(&demand.state())) {
    WriteTierId(out, p->holder);
    out.I64(p->since_ms);
  } else if (const auto *c = std::get_if<Computed>(&demand.state())) {
    out.Blob(c->result);
  }
  out.Blob(demand.payload());
  WriteTierId(out, demand.issued_by());
  out.I64(demand.issued_at_ms());
}

Demand ReadDemand(ByteReader &in) {
  Demand d;
  d.signature_ = ReadSignature(in);
  auto kind = in.U8();
  if (kind > static_cast<std::uint8_t>(DemandKind::kSystem)) {
    throw Error(ErrorCode::kParse, "invalid demand kind byte " + std::to_string(kind));
  }
  d.kind_ = static_cast<DemandKind>(kind);
  switch (in.U8()) {
    case 0:
      d.state_ = Pending{};
      break;
    case 1: {
      Processing p;
      p.holder = ReadTierId(in);
      p.since_ms = in.I64();
      d.state_ = p;
      break;
    }
    case 2:
      d.state_ = Computed{in.Blob()};
      break;
    default:
      throw Error(ErrorCode::kParse, "invalid demand state byte");
  }
  d.payload_ = in.Blob();
  d.issued_by_ = ReadTierId(in);
  d.issued_at_ms_ = in.I64();
  return d;
}

Bytes EncodeSignature(const DemandSignature &sig) {
  ByteWriter out;
  WriteSignature(out, sig);
  return out.Take();
}

Bytes EncodeDemand(const Demand &demand) {
  ByteWriter out;
  WriteDemand(out, demand);
  return out.Take();
}

Demand DecodeDemand(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  auto d = ReadDemand(in);
  in.ExpectDone();
  return d;
}

}  // namespace tiernet
