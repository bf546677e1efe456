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

#include "tiernet/transport.h"

#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <condition_variable>
#include <cstring>

#include "net.h"
#include "tiernet/error.h"

namespace tiernet {

Bytes EncodeFrame(const Frame &frame) {
  ByteWriter out;
  out.U32(static_cast<std::uint32_t>(kFrameHeaderSize + frame.body.size()));
  out.Raw(kFrameMagic);
  out.U8(frame.version);
  out.U8(static_cast<std::uint8_t>(frame.op));
  out.U32(frame.seq);
  out.U8(frame.flags);
  out.Raw(frame.body);
  return out.Take();
}

namespace {

Frame DecodeFrameBody(std::span<const std::uint8_t> rest) {
  ByteReader in(rest);
  auto magic = in.Raw(4);
  if (!std::equal(magic.begin(), magic.end(), kFrameMagic.begin())) {
    throw Error(ErrorCode::kParse, "bad frame magic");
  }
  Frame f;
  f.version = in.U8();
  f.op = static_cast<Op>(in.U8());
  f.seq = in.U32();
  f.flags = in.U8();
  auto body = in.Raw(in.remaining());
  f.body.assign(body.begin(), body.end());
  return f;
}

}  // namespace

Frame DecodeFrame(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  auto len = in.U32();
  if (len != in.remaining()) {
    throw Error(ErrorCode::kParse, "frame length " + std::to_string(len) + " does not match " +
                                       std::to_string(in.remaining()) + " bytes");
  }
  if (len < kFrameHeaderSize) throw Error(ErrorCode::kParse, "frame shorter than header");
  return DecodeFrameBody(in.Raw(len));
}

Bytes EncodeError(ErrorCode code, std::string_view message) {
  ByteWriter out;
  out.U16(static_cast<std::uint16_t>(code));
  out.Str(message);
  return out.Take();
}

Error DecodeError(std::span<const std::uint8_t> body) {
  try {
    ByteReader in(body);
    auto code = in.U16();
    auto message = in.Str();
    if (code > static_cast<std::uint16_t>(ErrorCode::kInternal)) code = static_cast<std::uint16_t>(ErrorCode::kInternal);
    return Error(static_cast<ErrorCode>(code), message);
  } catch (const Error &) {
    return Error(ErrorCode::kProtocol, "malformed error frame");
  }
}

void WriteGrabFilter(ByteWriter &out, const GrabFilter &filter) {
  out.U8(filter.kind_mask);
  out.Bool(filter.identifier.has_value());
  if (filter.identifier) out.Str(*filter.identifier);
  out.Bool(filter.context.has_value());
  if (filter.context) {
    out.Str(filter.context->first);
    out.I64(filter.context->second);
  }
}

GrabFilter ReadGrabFilter(ByteReader &in) {
  GrabFilter f;
  f.kind_mask = in.U8();
  if (in.Bool()) f.identifier = in.Str();
  if (in.Bool()) {
    auto name = in.Str();
    f.context = ContextEntry{std::move(name), in.I64()};
  }
  return f;
}

void WriteStats(ByteWriter &out, const StoreStats &stats) {
  for (const auto &row : stats.counts) {
    for (auto c : row) out.U64(c);
  }
  out.U64(stats.total_deposits);
  out.U64(stats.cache_hits);
}

StoreStats ReadStats(ByteReader &in) {
  StoreStats s;
  for (auto &row : s.counts) {
    for (auto &c : row) c = in.U64();
  }
  s.total_deposits = in.U64();
  s.cache_hits = in.U64();
  return s;
}

// ---------------------------------------------------------------------------
// StoreServer

StoreServer::StoreServer(DemandStore &store, Options options)
    : store_(store), options_(std::move(options)) {}

StoreServer::~StoreServer() { Stop(); }

void StoreServer::Start() {
  auto fd = net::ListenTcp(options_.host, options_.port);
  bound_port_ = net::LocalPort(fd.get());
  listen_fd_ = fd.Release();
  running_ = true;
  acceptor_ = std::thread([this] { AcceptLoop(); });
}

void StoreServer::Stop() {
  if (!running_.exchange(false)) return;
  net::Shutdown(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  std::list<std::unique_ptr<Conn>> conns;
  {
    std::lock_guard lock(mu_);
    for (auto &c : conns_) net::Shutdown(c->fd);
    conns.swap(conns_);
  }
  for (auto &c : conns) {
    if (c->thread.joinable()) c->thread.join();
  }
}

Endpoint StoreServer::endpoint() const { return Endpoint{options_.host, bound_port_}; }

void StoreServer::OnSessionLost(SessionLostFn fn) {
  std::lock_guard lock(mu_);
  on_lost_ = std::move(fn);
}

std::size_t StoreServer::OpenSessions() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count_if(
      conns_.begin(), conns_.end(), [](const auto &c) { return !c->done.load(); }));
}

void StoreServer::ReapFinished() {
  std::list<std::unique_ptr<Conn>> finished;
  {
    std::lock_guard lock(mu_);
    for (auto it = conns_.begin(); it != conns_.end();) {
      if ((*it)->done.load()) {
        finished.push_back(std::move(*it));
        it = conns_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto &c : finished) {
    if (c->thread.joinable()) c->thread.join();
  }
}

void StoreServer::AcceptLoop() {
  while (running_) {
    int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (!running_) break;
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;
    }
    ReapFinished();
    std::lock_guard lock(mu_);
    if (!running_) {
      ::close(fd);
      break;
    }
    auto conn = std::make_unique<Conn>();
    conn->id = next_conn_id_++;
    conn->fd = fd;
    auto *raw = conn.get();
    conns_.push_back(std::move(conn));
    raw->thread = std::thread([this, raw] { Serve(raw); });
  }
}

void StoreServer::Bind(Conn *conn, TierId peer) {
  {
    std::lock_guard lock(mu_);
    conn->peer = peer;
    tier_sessions_[peer].push_back(conn->id);
  }
  store_.Attach(peer);
}

void StoreServer::Release(Conn *conn) {
  if (!conn->peer) return;
  auto peer = *conn->peer;
  bool was_current = false;
  std::size_t remaining = 0;
  SessionLostFn callback;
  {
    std::lock_guard lock(mu_);
    auto &ids = tier_sessions_[peer];
    was_current = !ids.empty() && ids.back() == conn->id;
    ids.erase(std::remove(ids.begin(), ids.end(), conn->id), ids.end());
    remaining = ids.size();
    if (ids.empty()) tier_sessions_.erase(peer);
    callback = on_lost_;
  }
  store_.Detach(peer);
  if (!was_current) return;
  auto requeued = store_.RequeueTier(peer);
  if (callback) callback(peer, requeued, remaining);
}

void StoreServer::Serve(Conn *conn) {
  const int fd = conn->fd;
  net::SetRecvTimeout(fd, options_.heartbeat.Timeout());
  std::array<std::uint8_t, 4> len_buf{};
  bool keep_open = true;
  while (keep_open && running_) {
    if (!net::RecvAll(fd, len_buf)) break;
    ByteReader len_reader(len_buf);
    auto len = len_reader.U32();
    Frame reply;
    if (len > kMaxFrameSize) {
      // Drain the oversized frame so the stream stays in sync.
      std::vector<std::uint8_t> sink(64 * 1024);
      std::size_t left = len;
      bool ok = true;
      while (left > 0 && ok) {
        auto chunk = std::min(left, sink.size());
        ok = net::RecvAll(fd, std::span(sink.data(), chunk));
        left -= chunk;
      }
      if (!ok) break;
      reply.op = Op::kError;
      reply.body = EncodeError(ErrorCode::kProtocol,
                               "frame of " + std::to_string(len) + " bytes exceeds 16 MiB limit");
    } else if (len < kFrameHeaderSize) {
      break;
    } else {
      Bytes rest(len);
      if (!net::RecvAll(fd, rest)) break;
      Frame request;
      try {
        request = DecodeFrameBody(rest);
      } catch (const Error &) {
        break;  // bad magic: the stream cannot be trusted
      }
      reply = Handle(conn, request);
      reply.seq = request.seq;
      if (reply.op == Op::kError && request.op == Op::kHello && !conn->peer) keep_open = false;
    }
    if (!net::SendAll(fd, EncodeFrame(reply))) break;
  }
  Release(conn);
  {
    std::lock_guard lock(mu_);
    ::close(conn->fd);
    conn->fd = -1;
  }
  conn->done = true;
}

Frame StoreServer::Handle(Conn *conn, const Frame &request) {
  Frame reply;
  reply.op = Op::kReply;
  try {
    if (request.version != kProtocolVersion) {
      throw Error(ErrorCode::kHandshake, "unsupported protocol version " +
                                             std::to_string(request.version));
    }
    ByteReader in(request.body);
    ByteWriter out;
    switch (request.op) {
      case Op::kHello: {
        auto peer = ReadTierId(in);
        in.ExpectDone();
        if (!conn->peer) {
          Bind(conn, peer);
        } else if (*conn->peer != peer) {
          throw Error(ErrorCode::kProtocol, "session already bound to " + conn->peer->ToString());
        }
        break;
      }
      default:
        if (!conn->peer) {
          throw Error(ErrorCode::kProtocol, "Hello must precede any other op");
        }
        break;
    }
    const TierId peer = conn->peer.value_or(TierId{});
    switch (request.op) {
      case Op::kHello:
        break;
      case Op::kDeposit: {
        auto demand = ReadDemand(in);
        in.ExpectDone();
        auto r = store_.Deposit(demand);
        out.U8(static_cast<std::uint8_t>(r.outcome));
        out.Blob(r.result);
        break;
      }
      case Op::kGrab: {
        auto filter = ReadGrabFilter(in);
        in.ExpectDone();
        auto d = store_.Grab(peer, filter);
        out.Bool(d.has_value());
        if (d) WriteDemand(out, *d);
        break;
      }
      case Op::kReturn: {
        auto sig = ReadSignature(in);
        auto result = in.Blob();
        in.ExpectDone();
        store_.ReturnResult(peer, sig, std::move(result));
        break;
      }
      case Op::kLookup: {
        auto sig = ReadSignature(in);
        in.ExpectDone();
        auto r = store_.Lookup(sig);
        out.Bool(r.has_value());
        if (r) out.Blob(*r);
        break;
      }
      case Op::kRequeue: {
        auto tier = ReadTierId(in);
        in.ExpectDone();
        out.U64(store_.RequeueTier(tier));
        break;
      }
      case Op::kStats:
        in.ExpectDone();
        WriteStats(out, store_.Stats());
        break;
      default:
        throw Error(ErrorCode::kProtocol,
                    "unknown op " + std::to_string(static_cast<int>(request.op)));
    }
    reply.body = out.Take();
  } catch (const Error &e) {
    reply.op = Op::kError;
    reply.body = EncodeError(e.code(), e.what());
  } catch (const std::exception &e) {
    reply.op = Op::kError;
    reply.body = EncodeError(ErrorCode::kInternal, e.what());
  }
  return reply;
}

// ---------------------------------------------------------------------------
// Session

Session::Session(const Endpoint &endpoint, TierId self, Options options)
    : endpoint_(endpoint), self_(self), options_(options) {}

std::unique_ptr<Session> Session::Connect(const Endpoint &endpoint, TierId self) {
  return Connect(endpoint, self, Options{});
}

std::unique_ptr<Session> Session::Connect(const Endpoint &endpoint, TierId self,
                                          Options options) {
  std::unique_ptr<Session> s(new Session(endpoint, self, options));
  auto fd = net::ConnectTcp(endpoint.host, endpoint.port, options.connect_timeout);
  s->fd_ = fd.Release();
  s->open_ = true;
  net::SetRecvTimeout(s->fd_, options.call_timeout);
  ByteWriter hello;
  WriteTierId(hello, self);
  try {
    s->Call(Op::kHello, hello.Take());
  } catch (const Error &e) {
    throw Error(ErrorCode::kHandshake,
                "handshake with " + endpoint.ToString() + " failed: " + e.what());
  }
  if (options.keepalive.count() > 0) {
    s->keepalive_ = std::jthread([raw = s.get()](std::stop_token st) { raw->KeepaliveLoop(st); });
  }
  return s;
}

Session::~Session() {
  keepalive_.request_stop();
  if (keepalive_.joinable()) keepalive_.join();
  Close();
  if (fd_ >= 0) ::close(fd_);
}

void Session::Close() {
  if (open_.exchange(false)) net::Shutdown(fd_);
}

void Session::Send(const Frame &frame) {
  if (!open_) throw Error(ErrorCode::kTransport, "session to " + endpoint_.ToString() + " is closed");
  if (!net::SendAll(fd_, EncodeFrame(frame))) {
    Close();
    throw Error(ErrorCode::kTransport, "send to " + endpoint_.ToString() + " failed");
  }
  last_activity_ms_ = NowMs();
}

Frame Session::Receive() {
  std::array<std::uint8_t, 4> len_buf{};
  if (!open_ || !net::RecvAll(fd_, len_buf)) {
    Close();
    throw Error(ErrorCode::kTransport, "session to " + endpoint_.ToString() + " closed");
  }
  ByteReader lr(len_buf);
  auto len = lr.U32();
  if (len < kFrameHeaderSize || len > kMaxFrameSize + kFrameHeaderSize) {
    Close();
    throw Error(ErrorCode::kTransport, "invalid reply frame length");
  }
  Bytes rest(len);
  if (!net::RecvAll(fd_, rest)) {
    Close();
    throw Error(ErrorCode::kTransport, "session to " + endpoint_.ToString() + " closed");
  }
  last_activity_ms_ = NowMs();
  try {
    return DecodeFrameBody(rest);
  } catch (const Error &e) {
    Close();
    throw Error(ErrorCode::kTransport, e.what());
  }
}

Frame Session::RoundTrip(Frame request) {
  std::lock_guard lock(call_mu_);
  request.seq = next_seq_++;
  Send(request);
  auto reply = Receive();
  if (reply.seq != request.seq) {
    Close();
    throw Error(ErrorCode::kTransport, "reply out of order: expected seq " +
                                           std::to_string(request.seq) + ", got " +
                                           std::to_string(reply.seq));
  }
  return reply;
}

Bytes Session::Call(Op op, Bytes body, std::uint8_t flags) {
  Frame request;
  request.op = op;
  request.flags = flags;
  request.body = std::move(body);
  auto reply = RoundTrip(std::move(request));
  if (reply.op == Op::kError) throw DecodeError(reply.body);
  if (reply.op != Op::kReply) {
    throw Error(ErrorCode::kProtocol, "unexpected reply op");
  }
  return std::move(reply.body);
}

DepositReply Session::Deposit(const Demand &demand) {
  auto body = Call(Op::kDeposit, EncodeDemand(demand));
  ByteReader in(body);
  DepositReply r;
  r.outcome = static_cast<DepositOutcome>(in.U8());
  r.result = in.Blob();
  return r;
}

std::optional<Demand> Session::Grab(const GrabFilter &filter) {
  ByteWriter out;
  WriteGrabFilter(out, filter);
  auto body = Call(Op::kGrab, out.Take());
  ByteReader in(body);
  if (!in.Bool()) return std::nullopt;
  return ReadDemand(in);
}

void Session::Return(const DemandSignature &signature, Bytes result) {
  ByteWriter out;
  WriteSignature(out, signature);
  out.Blob(result);
  Call(Op::kReturn, out.Take());
}

std::optional<Bytes> Session::Lookup(const DemandSignature &signature) {
  auto body = Call(Op::kLookup, EncodeSignature(signature));
  ByteReader in(body);
  if (!in.Bool()) return std::nullopt;
  return in.Blob();
}

std::size_t Session::Requeue(TierId tier) {
  ByteWriter out;
  WriteTierId(out, tier);
  auto body = Call(Op::kRequeue, out.Take());
  ByteReader in(body);
  return static_cast<std::size_t>(in.U64());
}

StoreStats Session::Stats() {
  auto body = Call(Op::kStats, {});
  ByteReader in(body);
  return ReadStats(in);
}

void Session::Keepalive() {
  ByteWriter out;
  WriteTierId(out, self_);
  Call(Op::kHello, out.Take(), kFlagKeepalive);
}

void Session::KeepaliveLoop(std::stop_token stop) {
  std::mutex m;
  std::condition_variable_any cv;
  const auto interval = options_.keepalive;
  while (!stop.stop_requested() && open_) {
    std::unique_lock lk(m);
    cv.wait_for(lk, stop, interval, [] { return false; });
    if (stop.stop_requested()) break;
    if (NowMs() - last_activity_ms_.load() < interval.count()) continue;
    try {
      Keepalive();
    } catch (const Error &) {
      break;
    }
  }
}

}  // namespace tiernet
