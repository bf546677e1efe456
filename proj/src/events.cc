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

#include "tiernet/events.h"

#include "tiernet/demand.h"
#include "tiernet/error.h"

namespace tiernet {

EventLog::EventLog(std::size_t capacity, std::optional<std::string> file_path)
    : capacity_(capacity == 0 ? 1 : capacity) {
  if (file_path) {
    file_.open(*file_path, std::ios::app);
    if (!file_) throw Error(ErrorCode::kStartup, "cannot open event file " + *file_path);
  }
}

std::uint64_t EventLog::Append(std::string source, LogLevel level, std::string message) {
  std::uint64_t seq;
  {
    std::lock_guard lock(mu_);
    seq = next_seq_++;
    ApiEvent e{seq, std::move(source), level, std::move(message), NowMs()};
    if (file_.is_open()) {
      file_ << e.seq << '|' << e.timestamp_ms << '|' << FormatLogLine(e.level, e.source, e.message)
            << '\n';
      file_.flush();
    }
    ring_.push_back(std::move(e));
    if (ring_.size() > capacity_) ring_.pop_front();
  }
  cv_.notify_all();
  return seq;
}

LogSink EventLog::Sink() {
  return [this](LogLevel level, const std::string &source, const std::string &message) {
    Append(source, level, message);
  };
}

EventLog::Batch EventLog::SinceLocked(std::uint64_t after, std::size_t max) const {
  Batch b;
  if (ring_.empty()) return b;
  std::uint64_t first = ring_.front().seq;
  if (after + 1 < first) b.dropped = first - after - 1;
  std::size_t start = after + 1 <= first ? 0 : static_cast<std::size_t>(after + 1 - first);
  for (std::size_t i = start; i < ring_.size() && b.events.size() < max; ++i) {
    b.events.push_back(ring_[i]);
  }
  return b;
}

EventLog::Batch EventLog::Since(std::uint64_t after, std::size_t max) const {
  std::lock_guard lock(mu_);
  return SinceLocked(after, max);
}

EventLog::Batch EventLog::WaitSince(std::uint64_t after, std::chrono::milliseconds timeout,
                                    std::size_t max) const {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || next_seq_ - 1 > after; });
  return SinceLocked(after, max);
}

std::uint64_t EventLog::last_seq() const {
  std::lock_guard lock(mu_);
  return next_seq_ - 1;
}

void EventLog::Close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

}  // namespace tiernet
