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

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tiernet/log.h"

namespace tiernet {

// Sources are "GMT", "node:<name>", "tier:<node:TYPE:index>" or "system".
struct ApiEvent {
  std::uint64_t seq = 0;
  std::string source;
  LogLevel level = LogLevel::kInfo;
  std::string message;
  std::int64_t timestamp_ms = 0;
  bool operator==(const ApiEvent &) const = default;
};

// Append-only log with strictly increasing sequence numbers from 1. The ring
// keeps the newest `capacity` events; older ones survive only in the
// optional file sink.
class EventLog {
 public:
  static constexpr std::size_t kDefaultCapacity = 100'000;

  explicit EventLog(std::size_t capacity = kDefaultCapacity,
                    std::optional<std::string> file_path = std::nullopt);

  EventLog(const EventLog &) = delete;
  EventLog &operator=(const EventLog &) = delete;

  std::uint64_t Append(std::string source, LogLevel level, std::string message);
  LogSink Sink();

  struct Batch {
    std::vector<ApiEvent> events;
    // Events after the requested seq that already left the ring.
    std::uint64_t dropped = 0;
  };
  // Events with seq > after, oldest first, at most max of them.
  Batch Since(std::uint64_t after, std::size_t max = SIZE_MAX) const;
  // As Since, but blocks until at least one event or a drop is available,
  // the timeout passes or Close is called.
  Batch WaitSince(std::uint64_t after, std::chrono::milliseconds timeout,
                  std::size_t max = SIZE_MAX) const;

  std::uint64_t last_seq() const;
  // Wakes every waiter; later waits return immediately.
  void Close();

 private:
  Batch SinceLocked(std::uint64_t after, std::size_t max) const;

  const std::size_t capacity_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::deque<ApiEvent> ring_;
  std::uint64_t next_seq_ = 1;
  bool closed_ = false;
  std::ofstream file_;
};

}  // namespace tiernet
