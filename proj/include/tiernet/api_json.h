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

// JSON mapping of the domain types used by the HTTP API. Field names here
// are the stable contract for API clients.

#pragma once

#include <json.hpp>

#include "tiernet/command.h"
#include "tiernet/config.h"
#include "tiernet/demand_store.h"
#include "tiernet/events.h"
#include "tiernet/graph.h"
#include "tiernet/manager.h"
#include "tiernet/node.h"
#include "tiernet/report.h"

namespace tiernet {

using Json = nlohmann::ordered_json;

Json ToJson(const NetworkGraph &graph);
// Structural checks apply. Throws Error(kGraph) or Error(kParse).
NetworkGraph GraphFromJson(const Json &json);
Json ToJson(const VisualAttrs &visuals);
Json ToJson(const std::vector<Finding> &findings);
Json ToJson(const Plan &plan);
Json ToJson(const GeneratorReport &report);
Json ToJson(const EvaluationHandle &handle);
Json ToJson(const RegistrySnapshot &snapshot);
Json ToJson(const StoreStats &stats);
Json ToJson(const ApiEvent &event);
Json ToJson(const NodeIdentity &identity);
Json ToJson(const HostedTier &tier);
Json ToJson(const TierAllocationResult &result);
Json ToJson(const TierDeallocationResult &result);

// {code, message, detail}.
Json ErrorJson(std::string_view code, std::string_view message, Json detail = Json::object());

}  // namespace tiernet
