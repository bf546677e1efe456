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

// Thin POSIX socket helpers used by the transport.

#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>

namespace tiernet::net {

class UniqueFd {
 public:
  UniqueFd() = default;
  explicit UniqueFd(int fd) : fd_(fd) {}
  ~UniqueFd() { Reset(); }
  UniqueFd(UniqueFd &&other) noexcept : fd_(other.Release()) {}
  UniqueFd &operator=(UniqueFd &&other) noexcept {
    if (this != &other) {
      Reset();
      fd_ = other.Release();
    }
    return *this;
  }
  UniqueFd(const UniqueFd &) = delete;
  UniqueFd &operator=(const UniqueFd &) = delete;

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int Release() {
    int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void Reset();

 private:
  int fd_ = -1;
};

// Throws Error(kConnect).
UniqueFd ConnectTcp(const std::string &host, std::uint16_t port,
                    std::chrono::milliseconds timeout);
// Throws Error(kStartup). port 0 binds an ephemeral port.
UniqueFd ListenTcp(const std::string &host, std::uint16_t port);
std::uint16_t LocalPort(int fd);

void SetRecvTimeout(int fd, std::chrono::milliseconds timeout);
// Wakes any thread blocked on fd without releasing the descriptor.
void Shutdown(int fd);

bool SendAll(int fd, std::span<const std::uint8_t> data);
// False on EOF, error or receive timeout.
bool RecvAll(int fd, std::span<std::uint8_t> data);

}  // namespace tiernet::net
