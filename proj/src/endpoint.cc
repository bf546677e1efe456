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

#include "tiernet/endpoint.h"

#include <charconv>

#include "tiernet/error.h"

namespace tiernet {

Endpoint Endpoint::Parse(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorCode::kParse, "endpoint '" + std::string(text) + "' is not host:port");
  }
  auto port_text = text.substr(colon + 1);
  unsigned port = 0;
  auto [ptr, ec] =
      std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port == 0 ||
      port > 65535) {
    throw Error(ErrorCode::kParse, "endpoint '" + std::string(text) + "' has invalid port");
  }
  return Endpoint{std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

void WriteEndpoint(ByteWriter &out, const Endpoint &ep) {
  out.Str(ep.host);
  out.U16(ep.port);
}

Endpoint ReadEndpoint(ByteReader &in) {
  Endpoint ep;
  ep.host = in.Str();
  ep.port = in.U16();
  return ep;
}

}  // namespace tiernet
