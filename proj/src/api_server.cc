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

#include "tiernet/api_server.h"

#include <httplib.h>

#include <atomic>
#include <charconv>
#include <thread>

namespace tiernet {

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kValidation:
    case ErrorCode::kUsage:
    case ErrorCode::kGraph:
    case ErrorCode::kTranslation:
    case ErrorCode::kInvalidContext:
    case ErrorCode::kFactory:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kStateMachine:
    case ErrorCode::kOwnership:
    case ErrorCode::kRegistration:
      return 409;
    case ErrorCode::kTimeout:
      return 504;
    case ErrorCode::kConnect:
    case ErrorCode::kTransport:
    case ErrorCode::kHandshake:
    case ErrorCode::kProtocol:
      return 502;
    case ErrorCode::kStartup:
    case ErrorCode::kInternal:
      return 500;
  }
  return 500;
}

namespace {

void Reply(httplib::Response &res, int status, const Json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Fn>
void Guard(httplib::Response &res, Fn &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    Reply(res, HttpStatusFor(e.code()), ErrorJson(ErrorCodeName(e.code()), e.what()));
  } catch (const nlohmann::json::exception &e) {
    Reply(res, 400, ErrorJson("parse", e.what()));
  } catch (const std::exception &e) {
    Reply(res, 500, ErrorJson("internal", e.what()));
  }
}

Json Body(const httplib::Request &req) {
  if (req.body.empty()) return Json::object();
  auto j = Json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kParse, "request body is not valid JSON");
  if (!j.is_object()) throw Error(ErrorCode::kParse, "request body must be a JSON object");
  return j;
}

std::string Field(const Json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::kParse, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::uint32_t UField(const Json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_unsigned()) {
    throw Error(ErrorCode::kParse, std::string("missing integer field '") + key + "'");
  }
  return it->get<std::uint32_t>();
}

TierType TypeField(const Json &j, const char *key) {
  auto t = ParseTierType(Field(j, key));
  if (!t) throw Error(ErrorCode::kParse, std::string("bad tier type in '") + key + "'");
  return *t;
}

std::uint64_t QueryU64(const httplib::Request &req, const char *key, std::uint64_t fallback) {
  if (!req.has_param(key)) return fallback;
  auto v = req.get_param_value(key);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw Error(ErrorCode::kParse, std::string("bad query parameter '") + key + "'");
  }
  return out;
}

Json Outcome(const CommandOutcome &o) {
  return {{"command", RenderCommand(o.command)}, {"message", o.message}, {"detail", o.detail}};
}

Json GraphView(ManagementService &s) {
  auto g = s.graph();
  return {{"version", s.graph_version()},
          {"graph", ToJson(g)},
          {"visuals", ToJson(AssignVisuals(g))},
          {"findings", ToJson(ValidateGraph(g))}};
}

std::string SseFrame(const ApiEvent &e) {
  return "id: " + std::to_string(e.seq) + "\nevent: log\ndata: " + ToJson(e).dump() + "\n\n";
}

}  // namespace

struct ApiServer::Impl {
  explicit Impl(ManagementService &s) : service(s) {}

  void Routes();

  ManagementService &service;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};
  int port = 0;
};

void ApiServer::Impl::Routes() {
  auto &s = service;
  const std::string v1 = "/api/v1";

  server.Get(v1 + "/graph", [&](const httplib::Request &, httplib::Response &res) {
    Guard(res, [&] { Reply(res, 200, GraphView(s)); });
  });
  server.Put(v1 + "/graph", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      NetworkGraph g;
      try {
        g = GraphFromJson(Body(req));
      } catch (const Error &e) {
        if (e.code() != ErrorCode::kGraph) throw;
        Json findings = ToJson(std::vector<Finding>{{"graph", e.what(), Severity::kError}});
        Reply(res, 400, ErrorJson("graph", e.what(), {{"findings", findings}}));
        return;
      }
      s.PutGraph(std::move(g));
      Reply(res, 200, GraphView(s));
    });
  });
  server.Post(v1 + "/graph/validate", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      auto g = req.body.empty() ? s.graph() : GraphFromJson(Body(req));
      auto findings = ValidateGraph(g);
      bool valid = std::none_of(findings.begin(), findings.end(),
                                [](const Finding &f) { return f.severity == Severity::kError; });
      Reply(res, 200, {{"valid", valid}, {"findings", ToJson(findings)}});
    });
  });
  server.Post(v1 + "/graph/translate", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      auto g = req.body.empty() ? s.graph() : GraphFromJson(Body(req));
      try {
        Reply(res, 200, ToJson(Translate(g)));
      } catch (const Error &e) {
        if (e.code() != ErrorCode::kTranslation) throw;
        Reply(res, 400, ErrorJson("translation", e.what(), {{"findings", ToJson(ValidateGraph(g))}}));
      }
    });
  });
  server.Get(v1 + "/graph/file", [&](const httplib::Request &, httplib::Response &res) {
    Guard(res, [&] { res.set_content(SaveGraph(s.graph()), "text/plain"); });
  });
  server.Put(v1 + "/graph/file", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      s.PutGraph(LoadGraph(req.body, "upload"));
      Reply(res, 200, GraphView(s));
    });
  });
  server.Post(v1 + "/plan/execute", [&](const httplib::Request &, httplib::Response &res) {
    Guard(res, [&] {
      auto g = s.graph();
      try {
        Reply(res, 200, s.ExecutePlan().ToJson());
      } catch (const Error &e) {
        if (e.code() != ErrorCode::kTranslation) throw;
        Reply(res, 400, ErrorJson("translation", e.what(), {{"findings", ToJson(ValidateGraph(g))}}));
      }
    });
  });

  server.Post(v1 + "/commands", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] { Reply(res, 200, Outcome(s.ExecuteLine(Field(Body(req), "command")))); });
  });
  server.Get(v1 + "/configs", [&](const httplib::Request &, httplib::Response &res) {
    Guard(res, [&] { Reply(res, 200, {{"configs", s.configs().Uploaded()}}); });
  });
  server.Get(v1 + R"(/configs/([^/]+))", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] { res.set_content(s.configs().Get(req.matches[1]), "text/plain"); });
  });
  server.Put(v1 + R"(/configs/([^/]+))", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      ParseConfig(req.body, req.matches[1]);
      s.configs().Put(req.matches[1], req.body);
      Reply(res, 200, {{"name", req.matches[1]}});
    });
  });

  server.Post(v1 + "/gmt", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] { Reply(res, 200, Outcome(s.Execute(cmd::StartGmt{Field(Body(req), "config")}))); });
  });
  server.Get(v1 + "/nodes", [&](const httplib::Request &, httplib::Response &res) {
    Guard(res, [&] {
      auto st = s.Status();
      Reply(res, 200, {{"daemons", st["nodes"]}, {"registered", st["registry"]["nodes"]}});
    });
  });
  server.Post(v1 + "/nodes", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] { Reply(res, 200, Outcome(s.Execute(cmd::StartNode{Field(Body(req), "config")}))); });
  });
  server.Delete(v1 + R"(/nodes/([^/]+))", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] { Reply(res, 200, Outcome(s.Execute(cmd::StopNode{req.matches[1]}))); });
  });
  server.Post(v1 + "/register", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      auto body = Body(req);
      cmd::Register c;
      if (body.contains("node")) c.node = Field(body, "node");
      Reply(res, 200, Outcome(s.Execute(c)));
    });
  });
  server.Post(v1 + "/allocate", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      auto body = Body(req);
      cmd::Allocate c;
      c.node_id = UField(body, "node_id");
      c.tier_type = TypeField(body, "tier_type");
      c.config = Field(body, "config");
      if (body.contains("dst_index") && !body["dst_index"].is_null()) {
        c.dst_index = UField(body, "dst_index");
      }
      c.count = body.contains("count") ? UField(body, "count") : 1;
      Reply(res, 200, Outcome(s.Execute(c)));
    });
  });
  server.Post(v1 + "/deallocate", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      auto body = Body(req);
      std::string line = "deallocate " + std::to_string(UField(body, "node_id")) + " " +
                         Field(body, "tier_type");
      for (const auto &t : body.value("tiers", Json::array())) {
        line += " " + (t.is_string() ? t.get<std::string>() : std::to_string(t.get<std::uint32_t>()));
      }
      Reply(res, 200, Outcome(s.ExecuteLine(line)));
    });
  });
  server.Post(v1 + "/eval", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      Reply(res, 200, Outcome(s.Execute(cmd::StartEval{TierId::Parse(Field(Body(req), "tier"))})));
    });
  });
  server.Get(v1 + R"(/eval/([^/]+))", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      auto *m = s.manager();
      if (!m) throw Error(ErrorCode::kNotFound, "no GMT is running");
      Reply(res, 200, ToJson(m->Evaluation(TierId::Parse(req.matches[1].str()))));
    });
  });
  server.Post(v1 + "/eval/stop", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      Reply(res, 200, Outcome(s.Execute(cmd::StopEval{TierId::Parse(Field(Body(req), "tier"))})));
    });
  });
  server.Post(v1 + "/step", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      auto body = Body(req);
      cmd::Step c{TierId::Parse(Field(body, "tier")),
                  body.contains("steps") ? UField(body, "steps") : 1u};
      Reply(res, 200, Outcome(s.Execute(c)));
    });
  });
  server.Get(v1 + "/status", [&](const httplib::Request &, httplib::Response &res) {
    Guard(res, [&] { Reply(res, 200, s.Status()); });
  });

  server.Get(v1 + "/events", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      auto after = QueryU64(req, "after", 0);
      auto limit = QueryU64(req, "limit", 1000);
      auto wait = QueryU64(req, "wait_ms", 0);
      auto batch = wait ? s.events().WaitSince(after, std::chrono::milliseconds(wait), limit)
                        : s.events().Since(after, limit);
      Json events = Json::array();
      for (const auto &e : batch.events) events.push_back(ToJson(e));
      Reply(res, 200, {{"events", events},
                       {"dropped", batch.dropped},
                       {"last_seq", s.events().last_seq()}});
    });
  });
  server.Get(v1 + "/events/stream", [&](const httplib::Request &req, httplib::Response &res) {
    Guard(res, [&] {
      auto after = QueryU64(req, "after", 0);
      if (req.has_header("Last-Event-ID")) {
        auto id = req.get_header_value("Last-Event-ID");
        std::from_chars(id.data(), id.data() + id.size(), after);
      }
      auto cursor = std::make_shared<std::uint64_t>(after);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream", [this, cursor](std::size_t, httplib::DataSink &sink) {
            if (stopping) return false;
            auto batch = service.events().WaitSince(*cursor, std::chrono::milliseconds(500), 256);
            std::string out;
            if (batch.dropped) {
              // Slow reader: the oldest events left the ring before delivery.
              out += "event: dropped\ndata: {\"level\":\"warn\",\"dropped\":" +
                     std::to_string(batch.dropped) + "}\n\n";
            }
            for (const auto &e : batch.events) {
              out += SseFrame(e);
              *cursor = e.seq;
            }
            if (out.empty()) out = ": keepalive\n\n";
            return sink.write(out.data(), out.size());
          });
    });
  });
}

ApiServer::ApiServer(ManagementService &service) : impl_(std::make_unique<Impl>(service)) {
  impl_->Routes();
}

ApiServer::~ApiServer() { Stop(); }

void ApiServer::Start(const std::string &host, int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    impl_->port = port;
  } else {
    impl_->port = -1;
  }
  if (impl_->port <= 0) {
    throw Error(ErrorCode::kStartup, "cannot bind API server to " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

std::uint16_t ApiServer::port() const { return static_cast<std::uint16_t>(impl_->port); }

void ApiServer::Stop() {
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tiernet
