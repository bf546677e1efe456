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

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tiernet {

enum class ErrorCode {
  kInvalidContext,
  kStateMachine,
  kProtocol,
  kOwnership,
  kNotFound,
  kParse,
  kValidation,
  kFactory,
  kTransport,
  kConnect,
  kHandshake,
  kTimeout,
  kGraph,
  kTranslation,
  kUsage,
  kStartup,
  kRegistration,
  kConflict,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);
std::optional<ErrorCode> ParseErrorCode(std::string_view name);

// Every failure raised by the library carries one of the codes above so
// that transport and HTTP layers can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tiernet
