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

#include "tiernet/system_demand.h"

#include "tiernet/error.h"

namespace tiernet {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void WriteOptEndpoint(ByteWriter &out, const std::optional<Endpoint> &ep) {
  out.Bool(ep.has_value());
  if (ep) WriteEndpoint(out, *ep);
}

std::optional<Endpoint> ReadOptEndpoint(ByteReader &in) {
  if (!in.Bool()) return std::nullopt;
  return ReadEndpoint(in);
}

TierType ReadTierType(ByteReader &in) {
  auto v = in.U8();
  if (v > static_cast<std::uint8_t>(TierType::kNode)) {
    throw Error(ErrorCode::kParse, "invalid tier type byte");
  }
  return static_cast<TierType>(v);
}

void WriteRegistration(ByteWriter &out, const TierRegistration &r) {
  WriteTierId(out, r.tier_id);
  out.Str(r.config_name);
  WriteOptEndpoint(out, r.endpoint);
  out.Str(r.error);
}

TierRegistration ReadRegistration(ByteReader &in) {
  TierRegistration r;
  r.tier_id = ReadTierId(in);
  r.config_name = in.Str();
  r.endpoint = ReadOptEndpoint(in);
  r.error = in.Str();
  return r;
}

}  // namespace

std::string_view DeallocationStatusName(DeallocationStatus status) {
  switch (status) {
    case DeallocationStatus::kStopped: return "stopped";
    case DeallocationStatus::kNotFound: return "not-found";
    case DeallocationStatus::kFailed: return "failed";
  }
  return "?";
}

std::string_view BodyName(const SystemDemandBody &body) {
  static constexpr std::string_view kNames[] = {
      "NodeRegistration",        "RegistrationResult",     "TierAllocationRequest",
      "TierAllocationResult",    "TierDeallocationRequest", "TierDeallocationResult",
      "StartEvaluation",         "StopTier",               "StepGenerator",
      "EvaluationResult",        "Ack"};
  return kNames[body.index()];
}

Bytes EncodeBody(const SystemDemandBody &body) {
  ByteWriter out;
  out.U8(static_cast<std::uint8_t>(body.index()));
  std::visit(
      Overloaded{
          [&](const NodeRegistration &b) {
            out.Str(b.name);
            out.Str(b.host);
            out.Str(b.color);
          },
          [&](const RegistrationResult &b) {
            out.U32(b.node_id);
            out.U32(b.dst_index);
            WriteEndpoint(out, b.dst);
            out.Str(b.error);
          },
          [&](const TierAllocationRequest &b) {
            out.U32(b.node_id);
            out.U8(static_cast<std::uint8_t>(b.tier_type));
            out.U32(b.count);
            out.Str(b.config_name);
            out.Str(b.config_text);
            out.Bool(b.dst_index.has_value());
            if (b.dst_index) out.U32(*b.dst_index);
            WriteOptEndpoint(out, b.dst);
          },
          [&](const TierAllocationResult &b) {
            out.U32(static_cast<std::uint32_t>(b.registrations.size()));
            for (const auto &r : b.registrations) WriteRegistration(out, r);
            out.U32(static_cast<std::uint32_t>(b.errors.size()));
            for (const auto &e : b.errors) out.Str(e);
          },
          [&](const TierDeallocationRequest &b) {
            out.U32(b.node_id);
            out.U8(static_cast<std::uint8_t>(b.tier_type));
            out.U32(static_cast<std::uint32_t>(b.tier_ids.size()));
            for (const auto &id : b.tier_ids) WriteTierId(out, id);
          },
          [&](const TierDeallocationResult &b) {
            out.U32(static_cast<std::uint32_t>(b.outcomes.size()));
            for (const auto &o : b.outcomes) {
              WriteTierId(out, o.tier_id);
              out.U8(static_cast<std::uint8_t>(o.status));
              out.Str(o.message);
            }
          },
          [&](const StartEvaluation &b) { WriteTierId(out, b.generator); },
          [&](const StopTier &b) { WriteTierId(out, b.tier); },
          [&](const StepGenerator &b) {
            WriteTierId(out, b.generator);
            out.U32(b.steps);
          },
          [&](const EvaluationResult &b) {
            out.Str(b.error);
            WriteReport(out, b.report);
          },
          [&](const Ack &b) { out.Str(b.error); },
      },
      body);
  return out.Take();
}

SystemDemandBody DecodeBody(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  SystemDemandBody body;
  switch (in.U8()) {
    case 0: {
      NodeRegistration b;
      b.name = in.Str();
      b.host = in.Str();
      b.color = in.Str();
      body = std::move(b);
      break;
    }
    case 1: {
      RegistrationResult b;
      b.node_id = in.U32();
      b.dst_index = in.U32();
      b.dst = ReadEndpoint(in);
      b.error = in.Str();
      body = std::move(b);
      break;
    }
    case 2: {
      TierAllocationRequest b;
      b.node_id = in.U32();
      b.tier_type = ReadTierType(in);
      b.count = in.U32();
      b.config_name = in.Str();
      b.config_text = in.Str();
      if (in.Bool()) b.dst_index = in.U32();
      b.dst = ReadOptEndpoint(in);
      body = std::move(b);
      break;
    }
    case 3: {
      TierAllocationResult b;
      auto n = in.U32();
      for (std::uint32_t i = 0; i < n; ++i) b.registrations.push_back(ReadRegistration(in));
      n = in.U32();
      for (std::uint32_t i = 0; i < n; ++i) b.errors.push_back(in.Str());
      body = std::move(b);
      break;
    }
    case 4: {
      TierDeallocationRequest b;
      b.node_id = in.U32();
      b.tier_type = ReadTierType(in);
      auto n = in.U32();
      for (std::uint32_t i = 0; i < n; ++i) b.tier_ids.push_back(ReadTierId(in));
      body = std::move(b);
      break;
    }
    case 5: {
      TierDeallocationResult b;
      auto n = in.U32();
      for (std::uint32_t i = 0; i < n; ++i) {
        DeallocationOutcome o;
        o.tier_id = ReadTierId(in);
        auto status = in.U8();
        if (status > 2) throw Error(ErrorCode::kParse, "invalid deallocation status");
        o.status = static_cast<DeallocationStatus>(status);
        o.message = in.Str();
        b.outcomes.push_back(std::move(o));
      }
      body = std::move(b);
      break;
    }
    case 6:
      body = StartEvaluation{ReadTierId(in)};
      break;
    case 7:
      body = StopTier{ReadTierId(in)};
      break;
    case 8: {
      StepGenerator b;
      b.generator = ReadTierId(in);
      b.steps = in.U32();
      body = b;
      break;
    }
    case 9: {
      EvaluationResult b;
      b.error = in.Str();
      b.report = ReadReport(in);
      body = std::move(b);
      break;
    }
    case 10:
      body = Ack{in.Str()};
      break;
    default:
      throw Error(ErrorCode::kParse, "unknown system demand body tag");
  }
  in.ExpectDone();
  return body;
}

DemandSignature SystemSignature(std::string identifier, std::vector<ContextEntry> context) {
  return MakeSignature(std::string(kSystemProgramId), std::move(identifier),
                       std::move(context));
}

Demand MakeSystemDemand(DemandSignature signature, const SystemDemandBody &body,
                        TierId issued_by) {
  return Demand::Issue(std::move(signature), DemandKind::kSystem, EncodeBody(body),
                       issued_by);
}

}  // namespace tiernet
