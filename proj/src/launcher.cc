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

#include "tiernet/launcher.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "tiernet/error.h"

namespace tiernet {
namespace {

// ---------------------------------------------------------------------------
// In-process.

class InProcessHandle : public NodeHandle {
 public:
  explicit InProcessHandle(std::unique_ptr<NodeDaemon> node) : node_(std::move(node)) {}
  ~InProcessHandle() override { Stop(); }

  std::string name() const override { return node_->identity().name; }
  NodeIdentity Register() override { return node_->Register(); }
  std::optional<std::uint32_t> node_id() const override { return node_->identity().node_id; }
  bool running() const override { return !stopped_; }
  std::vector<HostedTier> Tiers() override { return node_->Tiers(); }
  void Stop() override {
    stopped_ = true;
    node_->Stop();
  }

 private:
  std::unique_ptr<NodeDaemon> node_;
  std::atomic<bool> stopped_{false};
};

class InProcessLauncher : public NodeLauncher {
 public:
  explicit InProcessLauncher(std::chrono::milliseconds timeout) : timeout_(timeout) {}

  std::unique_ptr<NodeHandle> Launch(const Configuration &config, const Endpoint &gmt,
                                     LogSink log) override {
    NodeDaemon::Options options;
    options.gmt_endpoint = gmt;
    options.registration_timeout = timeout_;
    options.log = std::move(log);
    return std::make_unique<InProcessHandle>(NodeDaemon::Start(config, options));
  }

 private:
  std::chrono::milliseconds timeout_;
};

// ---------------------------------------------------------------------------
// Child process.

// Buffered line reads from a pipe with a deadline.
class LineReader {
 public:
  explicit LineReader(int fd) : fd_(fd) {}
  ~LineReader() { ::close(fd_); }

  // nullopt on EOF or timeout.
  std::optional<std::string> ReadLine(std::chrono::milliseconds timeout) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        auto line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return line;
      }
      if (eof_) return std::nullopt;
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return std::nullopt;
      pollfd p{fd_, POLLIN, 0};
      int r = ::poll(&p, 1, static_cast<int>(left.count()));
      if (r < 0 && errno == EINTR) continue;
      if (r <= 0) continue;
      char chunk[4096];
      auto n = ::read(fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        eof_ = true;
        continue;
      }
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  std::string buf_;
  bool eof_ = false;
};

[[noreturn]] void ThrowFromLine(const std::string &line) {
  // "error <code> <message>"
  std::istringstream in(line);
  std::string word, code;
  in >> word >> code;
  std::string message;
  std::getline(in, message);
  if (!message.empty() && message[0] == ' ') message.erase(0, 1);
  auto parsed = ParseErrorCode(code);
  throw Error(parsed.value_or(ErrorCode::kInternal), message.empty() ? line : message);
}

class ChildHandle : public NodeHandle {
 public:
  ChildHandle(pid_t pid, int in_fd, int out_fd, int err_fd, std::string name, LogSink log,
              std::chrono::milliseconds registration_timeout)
      : pid_(pid),
        in_fd_(in_fd),
        out_(out_fd),
        name_(std::move(name)),
        timeout_(registration_timeout) {
    log_thread_ = std::thread([err_fd, log = std::move(log)] {
      LineReader err(err_fd);
      while (auto line = err.ReadLine(std::chrono::hours(24 * 365))) {
        auto a = line->find('|');
        auto b = a == std::string::npos ? a : line->find('|', a + 1);
        std::optional<LogLevel> level;
        if (b != std::string::npos) {
          try {
            level = ParseLogLevel(line->substr(0, a));
          } catch (const Error &) {
          }
        }
        if (level) {
          Emit(log, *level, line->substr(a + 1, b - a - 1), line->substr(b + 1));
        } else if (!line->empty()) {
          Emit(log, LogLevel::kInfo, "system", *line);
        }
      }
    });
  }

  ~ChildHandle() override {
    Stop();
    if (log_thread_.joinable()) log_thread_.join();
  }

  // Waits for the startup line.
  void AwaitReady() {
    auto line = out_.ReadLine(std::chrono::seconds(10));
    if (!line) {
      Reap(true);
      throw Error(ErrorCode::kStartup, "node process exited before it was ready");
    }
    if (line->rfind("error ", 0) == 0) {
      Reap(false);
      try {
        ThrowFromLine(*line);
      } catch (const Error &e) {
        throw Error(ErrorCode::kStartup, e.what());
      }
    }
  }

  std::string name() const override { return name_; }

  NodeIdentity Register() override {
    std::lock_guard lock(mu_);
    auto line = Request("register", timeout_ + std::chrono::seconds(5));
    if (line.rfind("registered ", 0) != 0) ThrowFromLine(line);
    std::istringstream in(line.substr(11));
    std::uint32_t id = 0, dst_index = 0;
    std::string dst;
    in >> id >> dst_index >> dst;
    NodeIdentity identity;
    identity.node_id = id;
    identity.name = name_;
    identity.dst_index = dst_index;
    identity.dst = Endpoint::Parse(dst);
    node_id_ = id;
    return identity;
  }

  std::optional<std::uint32_t> node_id() const override {
    std::lock_guard lock(mu_);
    return node_id_;
  }

  bool running() const override {
    std::lock_guard lock(mu_);
    return !exited_;
  }

  std::vector<HostedTier> Tiers() override {
    std::lock_guard lock(mu_);
    std::vector<HostedTier> out;
    if (exited_) return out;
    auto head = Request("tiers", std::chrono::seconds(5));
    std::size_t n = 0;
    if (std::sscanf(head.c_str(), "tiers %zu", &n) != 1) ThrowFromLine(head);
    for (std::size_t i = 0; i < n; ++i) {
      auto line = out_.ReadLine(std::chrono::seconds(5));
      if (!line) throw Error(ErrorCode::kTransport, "node process stopped answering");
      std::istringstream in(*line);
      std::string id, status, config;
      in >> id >> status >> config;
      HostedTier t;
      t.id = TierId::Parse(id);
      t.config_name = config;
      t.status = ParseTierStatus(status).value_or(TierStatus::kStopped);
      out.push_back(std::move(t));
    }
    return out;
  }

  void Stop() override {
    std::lock_guard lock(mu_);
    if (exited_) return;
    try {
      Request("stop", std::chrono::seconds(10));
    } catch (const Error &) {
    }
    Reap(true);
  }

  void Kill() override {
    std::lock_guard lock(mu_);
    if (exited_) return;
    ::kill(pid_, SIGKILL);
    Reap(false);
  }

 private:
  std::string Request(const std::string &command, std::chrono::milliseconds timeout) {
    if (exited_) throw Error(ErrorCode::kConflict, "node process " + name_ + " is not running");
    std::string line = command + "\n";
    if (::write(in_fd_, line.data(), line.size()) != static_cast<ssize_t>(line.size())) {
      throw Error(ErrorCode::kTransport, "node process " + name_ + " closed its input");
    }
    auto reply = out_.ReadLine(timeout);
    if (!reply) throw Error(ErrorCode::kTimeout, "node process " + name_ + " did not answer");
    return *reply;
  }

  // Closes stdin and waits; force kills after a grace period.
  void Reap(bool graceful) {
    if (in_fd_ >= 0) {
      ::close(in_fd_);
      in_fd_ = -1;
    }
    auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(graceful ? 10 : 0);
    while (true) {
      int status = 0;
      auto r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_ || (r < 0 && errno == ECHILD)) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    exited_ = true;
  }

  pid_t pid_;
  int in_fd_;
  LineReader out_;
  std::string name_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mu_;
  std::optional<std::uint32_t> node_id_;
  bool exited_ = false;
  std::thread log_thread_;
};

class ChildLauncher : public NodeLauncher {
 public:
  ChildLauncher(std::string executable, std::chrono::milliseconds timeout)
      : executable_(std::move(executable)), timeout_(timeout) {}

  std::unique_ptr<NodeHandle> Launch(const Configuration &config, const Endpoint &gmt,
                                     LogSink log) override {
    auto name = config.GetOr(keys::kNodeName, "");
    if (name.empty()) throw Error(ErrorCode::kStartup, "node config has no net.node.name");
    // The config travels through a private temporary file.
    char path[] = "/tmp/tiernet-node-XXXXXX";
    int fd = ::mkstemp(path);
    if (fd < 0) throw Error(ErrorCode::kStartup, std::string("mkstemp: ") + std::strerror(errno));
    auto text = SerializeConfig(config);
    bool written = ::write(fd, text.data(), text.size()) == static_cast<ssize_t>(text.size());
    ::close(fd);
    if (!written) {
      ::unlink(path);
      throw Error(ErrorCode::kStartup, "cannot write node config");
    }

    int in[2], out[2], err[2];
    if (::pipe2(in, O_CLOEXEC) || ::pipe2(out, O_CLOEXEC) || ::pipe2(err, O_CLOEXEC)) {
      ::unlink(path);
      throw Error(ErrorCode::kStartup, std::string("pipe: ") + std::strerror(errno));
    }
    auto gmt_text = gmt.ToString();
    auto timeout_text = std::to_string(timeout_.count());
    pid_t pid = ::fork();
    if (pid < 0) {
      ::unlink(path);
      throw Error(ErrorCode::kStartup, std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
      ::dup2(in[0], 0);
      ::dup2(out[1], 1);
      ::dup2(err[1], 2);
      const char *argv[] = {executable_.c_str(),   "node",       "--config",
                            path,                  "--gmt",      gmt_text.c_str(),
                            "--registration-timeout-ms",         timeout_text.c_str(),
                            "--stdio",             nullptr};
      ::execv(executable_.c_str(), const_cast<char *const *>(argv));
      std::fprintf(stderr, "ERROR|system|cannot exec %s: %s\n", executable_.c_str(),
                   std::strerror(errno));
      ::_exit(127);
    }
    ::close(in[0]);
    ::close(out[1]);
    ::close(err[1]);
    auto handle = std::make_unique<ChildHandle>(pid, in[1], out[0], err[0], name, std::move(log),
                                                timeout_);
    try {
      handle->AwaitReady();
    } catch (...) {
      ::unlink(path);
      throw;
    }
    ::unlink(path);
    return handle;
  }

 private:
  std::string executable_;
  std::chrono::milliseconds timeout_;
};

}  // namespace

std::unique_ptr<NodeLauncher> MakeInProcessLauncher(std::chrono::milliseconds registration_timeout) {
  return std::make_unique<InProcessLauncher>(registration_timeout);
}

std::unique_ptr<NodeLauncher> MakeChildProcessLauncher(std::string executable,
                                                       std::chrono::milliseconds registration_timeout) {
  return std::make_unique<ChildLauncher>(std::move(executable), registration_timeout);
}

int ServeNodeStdio(NodeDaemon &node, std::istream &in, std::ostream &out) {
  out << "ready " << node.identity().name << std::endl;
  std::string line;
  while (std::getline(in, line)) {
    if (line == "register") {
      try {
        auto id = node.Register();
        out << "registered " << *id.node_id << " " << id.dst_index.value_or(0) << " "
            << (id.dst ? id.dst->ToString() : "-") << std::endl;
      } catch (const Error &e) {
        out << "error " << ErrorCodeName(e.code()) << " " << e.what() << std::endl;
      }
    } else if (line == "tiers") {
      auto tiers = node.Tiers();
      out << "tiers " << tiers.size() << "\n";
      for (const auto &t : tiers) {
        out << t.id.ToString() << " " << TierStatusName(t.status) << " " << t.config_name << "\n";
      }
      out.flush();
    } else if (line == "stop") {
      node.Stop();
      out << "stopped" << std::endl;
      return 0;
    } else if (!line.empty()) {
      out << "error usage unknown request '" << line << "'" << std::endl;
    }
  }
  node.Stop();
  return 0;
}

}  // namespace tiernet
