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

#include "tiernet/report.h"

#include <algorithm>
#include <numeric>

namespace tiernet {

std::int64_t GeneratorReport::MinLatencyUs() const {
  return latencies_us.empty() ? 0 : *std::min_element(latencies_us.begin(), latencies_us.end());
}

std::int64_t GeneratorReport::MaxLatencyUs() const {
  return latencies_us.empty() ? 0 : *std::max_element(latencies_us.begin(), latencies_us.end());
}

double GeneratorReport::MeanLatencyUs() const {
  if (latencies_us.empty()) return 0.0;
  return static_cast<double>(std::accumulate(latencies_us.begin(), latencies_us.end(),
                                             std::int64_t{0})) /
         static_cast<double>(latencies_us.size());
}

void WriteReport(ByteWriter &out, const GeneratorReport &report) {
  out.U8(static_cast<std::uint8_t>(report.mode));
  out.U32(report.requested);
  out.U32(report.emitted);
  out.U32(report.computed);
  out.U32(report.cache_hits);
  out.U32(report.interruptions);
  out.Bool(report.stopped_early);
  out.U32(static_cast<std::uint32_t>(report.latencies_us.size()));
  for (auto l : report.latencies_us) out.I64(l);
  out.U32(static_cast<std::uint32_t>(report.results.size()));
  for (const auto &[seq, bytes] : report.results) {
    out.I64(seq);
    out.Blob(bytes);
  }
}

GeneratorReport ReadReport(ByteReader &in) {
  GeneratorReport r;
  r.mode = in.U8();
  r.requested = in.U32();
  r.emitted = in.U32();
  r.computed = in.U32();
  r.cache_hits = in.U32();
  r.interruptions = in.U32();
  r.stopped_early = in.Bool();
  auto n = in.U32();
  for (std::uint32_t i = 0; i < n; ++i) r.latencies_us.push_back(in.I64());
  n = in.U32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto seq = in.I64();
    r.results.emplace_back(seq, in.Blob());
  }
  return r;
}

}  // namespace tiernet
