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

// HTTP/JSON front end of the management service. Routes live under /api/v1;
// see docs/api.md for the request and response shapes.

#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "tiernet/error.h"
#include "tiernet/service.h"

namespace tiernet {

int HttpStatusFor(ErrorCode code);

class ApiServer {
 public:
  explicit ApiServer(ManagementService &service);
  ~ApiServer();

  ApiServer(const ApiServer &) = delete;
  ApiServer &operator=(const ApiServer &) = delete;

  // Binds and serves on a background thread; port 0 picks a free port.
  // Throws Error(kStartup).
  void Start(const std::string &host, int port);
  std::uint16_t port() const;
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tiernet
