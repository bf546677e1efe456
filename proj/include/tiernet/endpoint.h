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

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "tiernet/bytes.h"

namespace tiernet {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  // "host:port" with port in 1..65535; throws Error(kParse).
  static Endpoint Parse(std::string_view text);
  std::string ToString() const { return host + ":" + std::to_string(port); }

  auto operator<=>(const Endpoint &) const = default;
};

void WriteEndpoint(ByteWriter &out, const Endpoint &ep);
Endpoint ReadEndpoint(ByteReader &in);

}  // namespace tiernet
