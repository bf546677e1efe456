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

#include "tiernet/error.h"

namespace tiernet {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidContext: return "invalid-context";
    case ErrorCode::kStateMachine: return "state-machine";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kOwnership: return "ownership";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kFactory: return "factory";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kConnect: return "connect";
    case ErrorCode::kHandshake: return "handshake";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kGraph: return "graph";
    case ErrorCode::kTranslation: return "translation";
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kStartup: return "startup";
    case ErrorCode::kRegistration: return "registration";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

std::optional<ErrorCode> ParseErrorCode(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::kInternal); ++i) {
    auto code = static_cast<ErrorCode>(i);
    if (ErrorCodeName(code) == name) return code;
  }
  return std::nullopt;
}

}  // namespace tiernet
