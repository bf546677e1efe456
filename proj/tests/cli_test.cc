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

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tiernet/api_server.h"
#include "tiernet/error.h"

namespace tiernet {
namespace {

std::string DataPath(const std::string &name) {
  return std::string(TIERNET_TEST_DATA_DIR) + "/" + name;
}

std::string ReadData(const std::string &name) {
  std::ifstream in(DataPath(name), std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ManagementService::Options DataOptions() {
  ManagementService::Options o;
  o.config_dir = TIERNET_TEST_DATA_DIR;
  return o;
}

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run RunText(const std::string &script, CommandSink &sink, CliOptions options = {}) {
  std::istringstream in(script);
  std::ostringstream out, err;
  int status = RunScript(in, sink, out, err, options);
  return {status, out.str(), err.str()};
}

TEST(CliTest, ScriptBootstrapsNetwork) {
  ManagementService service(DataOptions());
  auto sink = MakeLocalSink(service);
  auto run = RunText(ReadData("single_node.script"), *sink);
  EXPECT_EQ(run.status, 0) << run.err;
  EXPECT_TRUE(run.err.empty());
  EXPECT_NE(run.out.find("ok: "), std::string::npos);
  EXPECT_NE(run.out.find("INFO|system|> register"), std::string::npos) << run.out;
  EXPECT_EQ(service.Status()["registry"]["tiers"].size(), 4u);
}

TEST(CliTest, EmptyAndCommentOnlyScriptsSucceed) {
  ManagementService service(DataOptions());
  auto sink = MakeLocalSink(service);
  EXPECT_EQ(RunText("", *sink).status, 0);
  auto run = RunText("# nothing\n\n   \n", *sink);
  EXPECT_EQ(run.status, 0);
  EXPECT_TRUE(run.out.empty());
  EXPECT_EQ(service.manager(), nullptr);
}

TEST(CliTest, UsageErrorNamesLineAndStops) {
  ManagementService service(DataOptions());
  auto sink = MakeLocalSink(service);
  auto run = RunText("start GMT gmt.config\n# comment\nallocate 1 DWT\nstatus\n", *sink);
  EXPECT_EQ(run.status, 2);
  EXPECT_NE(run.err.find("line 3: usage"), std::string::npos) << run.err;
  EXPECT_EQ(run.out.find("ok: status"), std::string::npos);
}

TEST(CliTest, CommandFailureStopsUnlessKeepGoing) {
  const std::string script =
      "start GMT gmt.config\nallocate 4 DST dst.config 1\nstart node alpha.node.config\n";
  {
    ManagementService service(DataOptions());
    auto sink = MakeLocalSink(service);
    auto run = RunText(script, *sink);
    EXPECT_EQ(run.status, 1);
    EXPECT_NE(run.err.find("line 2: not-found"), std::string::npos) << run.err;
    EXPECT_TRUE(service.Status()["nodes"].empty());
  }
  {
    ManagementService service(DataOptions());
    auto sink = MakeLocalSink(service);
    CliOptions options;
    options.keep_going = true;
    auto run = RunText(script + "bogus\n", *sink, options);
    EXPECT_EQ(run.status, 1);
    EXPECT_NE(run.err.find("line 4: usage"), std::string::npos) << run.err;
    EXPECT_EQ(service.Status()["nodes"].size(), 1u);
  }
}

TEST(CliTest, InteractiveNeverAborts) {
  ManagementService service(DataOptions());
  auto sink = MakeLocalSink(service);
  CliOptions options;
  options.interactive = true;
  options.echo_events = false;
  auto run = RunText("bogus\nallocate 1 DST dst.config 1\nstart GMT gmt.config\n", *sink, options);
  EXPECT_EQ(run.status, 0);
  EXPECT_NE(run.out.find("tiernet> "), std::string::npos);
  EXPECT_NE(run.out.find("ok: "), std::string::npos);
  EXPECT_NE(run.err.find("line 2: conflict"), std::string::npos) << run.err;
}

TEST(CliTest, HttpSinkMatchesPlanExecution) {
  ManagementService scripted(DataOptions());
  ApiServer server(scripted);
  server.Start("127.0.0.1", 0);
  auto sink = MakeHttpSink(Endpoint{"127.0.0.1", server.port()});
  auto run = RunText(ReadData("single_node.script"), *sink);
  ASSERT_EQ(run.status, 0) << run.err;

  ManagementService planned(DataOptions());
  planned.PutGraph(LoadGraph(ReadData("single_node.graph")));
  ASSERT_TRUE(planned.ExecutePlan().completed());

  EXPECT_EQ(scripted.Status()["structural"], planned.Status()["structural"]);
  server.Stop();
}

TEST(CliTest, UnreachableApiIsConnectionLoss) {
  // Bind and release a port so nothing listens on it.
  std::uint16_t port;
  {
    ManagementService service(DataOptions());
    ApiServer server(service);
    server.Start("127.0.0.1", 0);
    port = server.port();
    server.Stop();
  }
  auto sink = MakeHttpSink(Endpoint{"127.0.0.1", port});
  auto run = RunText("status\n", *sink);
  EXPECT_EQ(run.status, 3);
  EXPECT_NE(run.err.find("connection lost"), std::string::npos);
  CliOptions quiet;
  quiet.echo_events = false;
  run = RunText("\nstatus\n", *sink, quiet);
  EXPECT_EQ(run.status, 3);
  EXPECT_NE(run.err.find("line 2: connection lost"), std::string::npos) << run.err;
}

int RunTool(const std::string &args, std::string *output) {
  std::string command = std::string(TIERNET_BINARY) + " " + args + " 2>&1";
  FILE *pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return -1;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) output->append(buf, n);
  int status = pclose(pipe);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliToolTest, RunsScriptFile) {
  std::string out;
  EXPECT_EQ(RunTool("cli --quiet --config-dir " +
                        std::string(TIERNET_TEST_DATA_DIR) + " --script " + DataPath("single_node.script"),
                    &out),
            0)
      << out;
  EXPECT_NE(out.find("ok: "), std::string::npos);
}

TEST(CliToolTest, ReportsUsageAndMissingFiles) {
  std::string out;
  EXPECT_EQ(RunTool("cli --script /nonexistent/script", &out), 2) << out;
  out.clear();
  EXPECT_NE(RunTool("nosuchcommand", &out), 0);
}

}  // namespace
}  // namespace tiernet
