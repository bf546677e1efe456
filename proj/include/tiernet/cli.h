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

// Command-line front end: runs command lines from a script or a terminal
// against a management service, in-process or over HTTP.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "tiernet/endpoint.h"
#include "tiernet/events.h"
#include "tiernet/service.h"

namespace tiernet {

class CommandSink {
 public:
  virtual ~CommandSink() = default;
  // Throws Error; connection loss surfaces as kConnect or kTransport.
  virtual CommandOutcome Execute(const Command &command) = 0;
  virtual std::vector<ApiEvent> EventsSince(std::uint64_t after) = 0;
};

std::unique_ptr<CommandSink> MakeLocalSink(ManagementService &service);
std::unique_ptr<CommandSink> MakeHttpSink(const Endpoint &api);

struct CliOptions {
  bool keep_going = false;
  // Prompt and never abort; for terminals.
  bool interactive = false;
  // Print the service events each command produced.
  bool echo_events = true;
};

// Exit status: 0 on success, 1 if a command failed, 2 for a usage error and
// 3 when the service connection was lost. Errors name the line number.
int RunScript(std::istream &in, CommandSink &sink, std::ostream &out, std::ostream &err,
              CliOptions options);

}  // namespace tiernet
