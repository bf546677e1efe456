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

// Bodies of system demands exchanged between the manager and node daemons
// over the registration store. A request and its result share one demand
// signature: the request is the Pending payload, the result is the bytes
// stored when the demand becomes Computed.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tiernet/demand.h"
#include "tiernet/endpoint.h"
#include "tiernet/error.h"
#include "tiernet/report.h"

namespace tiernet {

inline constexpr std::string_view kSystemProgramId = "sysdemand.v1";

struct NodeRegistration {
  std::string name;
  std::string host;
  std::string color;
  bool operator==(const NodeRegistration &) const = default;
};

struct RegistrationResult {
  std::uint32_t node_id = 0;
  std::uint32_t dst_index = 0;
  Endpoint dst;
  // Non-empty when the registration was rejected.
  std::string error;
  bool operator==(const RegistrationResult &) const = default;
};

struct TierAllocationRequest {
  std::uint32_t node_id = 0;
  TierType tier_type = TierType::kDWT;
  std::uint32_t count = 1;
  std::string config_name;
  std::string config_text;
  // Store that DGT/DWT instances bind to; unset for DST allocations.
  std::optional<std::uint32_t> dst_index;
  std::optional<Endpoint> dst;
  bool operator==(const TierAllocationRequest &) const = default;
};

struct TierRegistration {
  TierId tier_id;
  std::string config_name;
  // Listening endpoint of an allocated DST; the bound store for DGT/DWT.
  std::optional<Endpoint> endpoint;
  std::string error;
  bool ok() const { return error.empty(); }
  bool operator==(const TierRegistration &) const = default;
};

struct TierAllocationResult {
  std::vector<TierRegistration> registrations;
  // Request-level failures (bad config, unknown implementation, ...).
  std::vector<std::string> errors;
  bool operator==(const TierAllocationResult &) const = default;
};

struct TierDeallocationRequest {
  std::uint32_t node_id = 0;
  TierType tier_type = TierType::kDWT;
  std::vector<TierId> tier_ids;
  bool operator==(const TierDeallocationRequest &) const = default;
};

enum class DeallocationStatus : std::uint8_t { kStopped = 0, kNotFound = 1, kFailed = 2 };
std::string_view DeallocationStatusName(DeallocationStatus status);

struct DeallocationOutcome {
  TierId tier_id;
  DeallocationStatus status = DeallocationStatus::kStopped;
  std::string message;
  bool operator==(const DeallocationOutcome &) const = default;
};

struct TierDeallocationResult {
  std::vector<DeallocationOutcome> outcomes;
  bool operator==(const TierDeallocationResult &) const = default;
};

struct StartEvaluation {
  TierId generator;
  bool operator==(const StartEvaluation &) const = default;
};

struct StopTier {
  TierId tier;
  bool operator==(const StopTier &) const = default;
};

// Step signal for a user-controlled (mode 1) generator.
struct StepGenerator {
  TierId generator;
  std::uint32_t steps = 1;
  bool operator==(const StepGenerator &) const = default;
};

struct EvaluationResult {
  std::string error;
  GeneratorReport report;
  bool operator==(const EvaluationResult &) const = default;
};

struct Ack {
  std::string error;
  bool operator==(const Ack &) const = default;
};

using SystemDemandBody =
    std::variant<NodeRegistration, RegistrationResult, TierAllocationRequest,
                 TierAllocationResult, TierDeallocationRequest, TierDeallocationResult,
                 StartEvaluation, StopTier, StepGenerator, EvaluationResult, Ack>;

std::string_view BodyName(const SystemDemandBody &body);

Bytes EncodeBody(const SystemDemandBody &body);
// Throws Error(kParse) on malformed input.
SystemDemandBody DecodeBody(std::span<const std::uint8_t> bytes);

// Decodes and checks the alternative; throws Error(kProtocol) on mismatch.
template <typename T>
T DecodeBodyAs(std::span<const std::uint8_t> bytes) {
  auto body = DecodeBody(bytes);
  if (auto *v = std::get_if<T>(&body)) return std::move(*v);
  throw Error(ErrorCode::kProtocol,
              "unexpected system demand body " + std::string(BodyName(body)));
}

// Signature in the system program namespace. Addressed demands carry the
// target node as the "node" context dimension.
DemandSignature SystemSignature(std::string identifier, std::vector<ContextEntry> context);

Demand MakeSystemDemand(DemandSignature signature, const SystemDemandBody &body,
                        TierId issued_by);

}  // namespace tiernet
