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

// Transport agents: the framed wire protocol spoken between tiers and a
// demand store, the store-side server, and the client session.
//
// Frame layout (all integers big-endian):
//
//   offset  size  field
//   0       4     length of everything after this field (11 + body size)
//   4       4     magic "TNDM"
//   8       1     version (1)
//   9       1     op
//   10      4     sequence number, echoed by the reply
//   14      1     flags (bit 0: keepalive, Hello only)
//   15      n     body
//
// See docs/wire-protocol.md for the body of each op.

#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tiernet/demand.h"
#include "tiernet/demand_store.h"
#include "tiernet/error.h"
#include "tiernet/endpoint.h"

namespace tiernet {

inline constexpr std::array<std::uint8_t, 4> kFrameMagic = {'T', 'N', 'D', 'M'};
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 11;
inline constexpr std::size_t kMaxFrameSize = 16u << 20;
inline constexpr std::uint8_t kFlagKeepalive = 0x01;

enum class Op : std::uint8_t {
  kHello = 1,
  kDeposit = 2,
  kGrab = 3,
  kReturn = 4,
  kLookup = 5,
  kRequeue = 6,
  kStats = 7,
  kReply = 8,
  kError = 9,
};

struct Frame {
  std::uint8_t version = kProtocolVersion;
  Op op = Op::kReply;
  std::uint32_t seq = 0;
  std::uint8_t flags = 0;
  Bytes body;

  bool operator==(const Frame &) const = default;
};

// Includes the length prefix.
Bytes EncodeFrame(const Frame &frame);
// Expects exactly one length-prefixed frame. Throws Error(kParse).
Frame DecodeFrame(std::span<const std::uint8_t> bytes);

Bytes EncodeError(ErrorCode code, std::string_view message);
// Rebuilds the Error carried by an Error frame body.
Error DecodeError(std::span<const std::uint8_t> body);

void WriteGrabFilter(ByteWriter &out, const GrabFilter &filter);
GrabFilter ReadGrabFilter(ByteReader &in);
void WriteStats(ByteWriter &out, const StoreStats &stats);
StoreStats ReadStats(ByteReader &in);

struct HeartbeatOptions {
  std::chrono::milliseconds interval{10'000};
  int missed_beats = 3;

  std::chrono::milliseconds Timeout() const { return interval * missed_beats; }
};

// Serves one DemandStore on one listening endpoint. Sessions are
// thread-per-connection; a session that closes or stays silent for
// heartbeat.Timeout() has its tier's processing demands requeued.
class StoreServer {
 public:
  struct Options {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
    HeartbeatOptions heartbeat;
  };

  // Fired after the most recent session of a tier closes and its demands
  // were requeued. remaining = sessions of that tier still open.
  using SessionLostFn =
      std::function<void(TierId peer, std::size_t requeued, std::size_t remaining)>;

  StoreServer(DemandStore &store, Options options);
  ~StoreServer();

  StoreServer(const StoreServer &) = delete;
  StoreServer &operator=(const StoreServer &) = delete;

  // Binds and starts accepting. Throws Error(kStartup).
  void Start();
  void Stop();

  Endpoint endpoint() const;
  DemandStore &store() { return store_; }
  void OnSessionLost(SessionLostFn fn);
  std::size_t OpenSessions() const;

 private:
  struct Conn {
    std::uint64_t id = 0;
    int fd = -1;
    std::optional<TierId> peer;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void AcceptLoop();
  void Serve(Conn *conn);
  Frame Handle(Conn *conn, const Frame &request);
  void Bind(Conn *conn, TierId peer);
  void Release(Conn *conn);
  void ReapFinished();

  DemandStore &store_;
  Options options_;
  std::uint16_t bound_port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread acceptor_;

  mutable std::mutex mu_;
  std::list<std::unique_ptr<Conn>> conns_;
  // Open sessions per tier in open order; the back is the most recent.
  std::map<TierId, std::vector<std::uint64_t>> tier_sessions_;
  std::uint64_t next_conn_id_ = 1;
  SessionLostFn on_lost_;
};

// Client side of a transport agent. One logical caller at a time: calls are
// serialized by an internal mutex. An optional keepalive thread sends Hello
// frames with the keepalive flag while the session is idle.
class Session {
 public:
  struct Options {
    std::chrono::milliseconds connect_timeout{5'000};
    // A reply slower than this fails the call with Error(kTransport).
    std::chrono::milliseconds call_timeout{30'000};
    // Zero disables the keepalive thread.
    std::chrono::milliseconds keepalive{0};
  };

  // Connects and performs the Hello exchange. Throws Error(kConnect) or
  // Error(kHandshake).
  static std::unique_ptr<Session> Connect(const Endpoint &endpoint, TierId self);
  static std::unique_ptr<Session> Connect(const Endpoint &endpoint, TierId self,
                                          Options options);
  ~Session();

  Session(const Session &) = delete;
  Session &operator=(const Session &) = delete;

  // Returns the Reply body; an Error reply is rethrown as the Error it
  // carries. Transport failure throws Error(kTransport) and closes.
  Bytes Call(Op op, Bytes body, std::uint8_t flags = 0);

  // Low-level access for pipelining: the caller owns sequencing.
  void Send(const Frame &frame);
  Frame Receive();

  DepositReply Deposit(const Demand &demand);
  std::optional<Demand> Grab(const GrabFilter &filter);
  void Return(const DemandSignature &signature, Bytes result);
  std::optional<Bytes> Lookup(const DemandSignature &signature);
  std::size_t Requeue(TierId tier);
  StoreStats Stats();
  void Keepalive();

  void Close();
  bool open() const { return open_.load(); }
  TierId self() const { return self_; }
  const Endpoint &endpoint() const { return endpoint_; }

 private:
  Session(const Endpoint &endpoint, TierId self, Options options);
  Frame RoundTrip(Frame request);
  void KeepaliveLoop(std::stop_token stop);

  Endpoint endpoint_;
  TierId self_;
  Options options_;
  int fd_ = -1;
  std::atomic<bool> open_{false};
  std::mutex call_mu_;
  std::uint32_t next_seq_ = 1;
  std::atomic<std::int64_t> last_activity_ms_{0};
  std::jthread keepalive_;
};

}  // namespace tiernet
