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
#include <functional>
#include <string>
#include <string_view>

namespace tiernet {

enum class LogLevel : std::uint8_t { kInfo = 0, kWarn = 1, kError = 2 };

std::string_view LogLevelName(LogLevel level);
// Accepts "info", "warn", "error" in any case. Throws Error(kParse).
LogLevel ParseLogLevel(std::string_view text);

// Receives (level, source, message). Sources are "GMT", "node:<name>",
// "tier:<TierId>" or "system". Sinks may be called from any thread.
using LogSink = std::function<void(LogLevel, const std::string &, const std::string &)>;

// "LEVEL|source|message", the line format node daemons write to stderr.
std::string FormatLogLine(LogLevel level, std::string_view source, std::string_view message);

// Calls sink if set.
inline void Emit(const LogSink &sink, LogLevel level, const std::string &source,
                 const std::string &message) {
  if (sink) sink(level, source, message);
}

}  // namespace tiernet
