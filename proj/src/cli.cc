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

#include "tiernet/cli.h"

#include <httplib.h>

#include <istream>
#include <ostream>

#include "tiernet/error.h"

namespace tiernet {
namespace {

class LocalSink : public CommandSink {
 public:
  explicit LocalSink(ManagementService &service) : service_(service) {}
  CommandOutcome Execute(const Command &command) override { return service_.Execute(command); }
  std::vector<ApiEvent> EventsSince(std::uint64_t after) override {
    return service_.events().Since(after).events;
  }

 private:
  ManagementService &service_;
};

class HttpSink : public CommandSink {
 public:
  explicit HttpSink(const Endpoint &api) : client_(api.host, api.port), where_(api.ToString()) {
    client_.set_connection_timeout(5);
    client_.set_read_timeout(600);
  }

  CommandOutcome Execute(const Command &command) override {
    Json body{{"command", RenderCommand(command)}};
    auto res = client_.Post("/api/v1/commands", body.dump(), "application/json");
    auto j = Check(res);
    return {ParseCommand(j.at("command").get<std::string>()), j.value("message", ""),
            j.value("detail", Json::object())};
  }

  std::vector<ApiEvent> EventsSince(std::uint64_t after) override {
    auto j = Check(client_.Get("/api/v1/events?after=" + std::to_string(after)));
    std::vector<ApiEvent> out;
    for (const auto &e : j.at("events")) {
      ApiEvent ev;
      ev.seq = e.at("seq").get<std::uint64_t>();
      ev.source = e.at("source").get<std::string>();
      ev.level = ParseLogLevel(e.at("level").get<std::string>());
      ev.message = e.at("message").get<std::string>();
      ev.timestamp_ms = e.at("timestamp_ms").get<std::int64_t>();
      out.push_back(std::move(ev));
    }
    return out;
  }

 private:
  Json Check(const httplib::Result &res) {
    if (!res) {
      throw Error(ErrorCode::kConnect,
                  "API " + where_ + " unreachable: " + httplib::to_string(res.error()));
    }
    auto j = Json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::kProtocol, "API returned non-JSON body");
    if (res->status >= 400) {
      auto code = ParseErrorCode(j.value("code", "internal")).value_or(ErrorCode::kInternal);
      throw Error(code, j.value("message", "request failed"));
    }
    return j;
  }

  httplib::Client client_;
  std::string where_;
};

void PrintEvents(CommandSink &sink, std::uint64_t &cursor, std::ostream &out) {
  for (const auto &e : sink.EventsSince(cursor)) {
    out << "  [" << e.seq << "] " << FormatLogLine(e.level, e.source, e.message) << "\n";
    cursor = e.seq;
  }
}

}  // namespace

std::unique_ptr<CommandSink> MakeLocalSink(ManagementService &service) {
  return std::make_unique<LocalSink>(service);
}

std::unique_ptr<CommandSink> MakeHttpSink(const Endpoint &api) {
  return std::make_unique<HttpSink>(api);
}

int RunScript(std::istream &in, CommandSink &sink, std::ostream &out, std::ostream &err,
              CliOptions options) {
  int status = 0;
  std::uint64_t cursor = 0;
  if (options.echo_events) {
    try {
      auto existing = sink.EventsSince(0);
      if (!existing.empty()) cursor = existing.back().seq;
    } catch (const Error &e) {
      err << "connection lost: " << e.what() << "\n";
      return 3;
    }
  }
  std::string line;
  std::size_t number = 0;
  auto prompt = [&] {
    if (options.interactive) out << "tiernet> " << std::flush;
  };
  prompt();
  while (std::getline(in, line)) {
    ++number;
    if (!IsCommandLine(line)) {
      prompt();
      continue;
    }
    std::optional<Command> command;
    try {
      command = ParseCommand(line);
    } catch (const Error &e) {
      err << "line " << number << ": usage: " << e.what() << "\n";
      if (!options.interactive) {
        status = status ? status : 2;
        if (!options.keep_going) return 2;
      }
      prompt();
      continue;
    }
    try {
      auto outcome = sink.Execute(*command);
      out << "ok: " << outcome.message << "\n";
      if (std::holds_alternative<cmd::Status>(*command)) out << outcome.detail.dump(2) << "\n";
      if (options.echo_events) PrintEvents(sink, cursor, out);
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kConnect) {
        err << "line " << number << ": connection lost: " << e.what() << "\n";
        return 3;
      }
      err << "line " << number << ": " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
      if (options.echo_events) {
        try {
          PrintEvents(sink, cursor, out);
        } catch (const Error &) {
        }
      }
      if (!options.interactive) {
        status = status ? status : 1;
        if (!options.keep_going) return 1;
      }
    }
    prompt();
  }
  out.flush();
  return status;
}

}  // namespace tiernet
