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

#include <cstdint>
#include <utility>
#include <vector>

#include "tiernet/bytes.h"

namespace tiernet {

// Outcome of one simulator evaluation run.
struct GeneratorReport {
  int mode = 0;
  std::uint32_t requested = 0;
  std::uint32_t emitted = 0;
  std::uint32_t computed = 0;
  // Deposits answered straight from the store's memo.
  std::uint32_t cache_hits = 0;
  std::uint32_t interruptions = 0;
  bool stopped_early = false;
  std::vector<std::int64_t> latencies_us;
  // (sequence number, result bytes), ordered by sequence number.
  std::vector<std::pair<std::int64_t, Bytes>> results;

  std::int64_t MinLatencyUs() const;
  std::int64_t MaxLatencyUs() const;
  double MeanLatencyUs() const;

  bool operator==(const GeneratorReport &) const = default;
};

void WriteReport(ByteWriter &out, const GeneratorReport &report);
GeneratorReport ReadReport(ByteReader &in);

}  // namespace tiernet
