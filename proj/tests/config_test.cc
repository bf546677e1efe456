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

#include "tiernet/config.h"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "tiernet/error.h"

namespace tiernet {
namespace {

std::string ReadData(const std::string &name) {
  std::ifstream in(std::string(TIERNET_TEST_DATA_DIR) + "/" + name, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ErrorCode CodeOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInternal;
}

TEST(ParseConfigTest, SinglePair) {
  auto c = ParseConfig("gipsy.tests.GEE.simulator.mode=2");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.Get(keys::kSimMode), "2");
}

TEST(ParseConfigTest, CommentOnlyHasNoPairs) {
  auto c = ParseConfig("# comment\n");
  EXPECT_EQ(c.size(), 0u);
  EXPECT_EQ(c.lines().size(), 1u);
}

TEST(ParseConfigTest, SimulatorFileHasSixPairs) {
  auto c = ParseConfig(ReadData("dgt_simulator.config"));
  ASSERT_EQ(c.size(), 6u);
  EXPECT_EQ(c.Get(keys::kWrapperImpl), "gipsy.tests.GEE.simulator.DGTSimulator");
  EXPECT_EQ(c.Get(keys::kDispatcherImpl),
            "gipsy.GEE.IDP.DemandGenerator.jini.rmi.JiniDemandDispatcher");
  EXPECT_EQ(c.Get(keys::kSimMode), "2");
  EXPECT_EQ(c.Get(keys::kSimTesterParameter), "1");
  EXPECT_EQ(c.Get(keys::kSimTesterNumber), "2");
  EXPECT_EQ(c.Get(keys::kSimPayload), "32");
}

TEST(ParseConfigTest, ValueIsEverythingAfterFirstEquals) {
  auto c = ParseConfig("  a.b = x=y \n");
  EXPECT_EQ(c.Get("a.b"), " x=y ");
  EXPECT_EQ(c.Pairs()[0].first, "a.b");
}

TEST(ParseConfigTest, DuplicateKeyNamesLine) {
  try {
    ParseConfig("a=1\n# x\na=2\n", "dup.config");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("dup.config:3"), std::string::npos) << e.what();
  }
}

TEST(ParseConfigTest, LineWithoutEqualsIsAnError) {
  EXPECT_EQ(CodeOf([] { ParseConfig("a=1\njunk\n"); }), ErrorCode::kParse);
  EXPECT_EQ(CodeOf([] { ParseConfig("=1\n"); }), ErrorCode::kParse);
}

TEST(ParseConfigTest, CrlfIsAcceptedAndPreserved) {
  auto lf = ReadData("dgt_simulator.config");
  std::string crlf;
  for (char ch : lf) {
    if (ch == '\n') crlf += '\r';
    crlf += ch;
  }
  auto c = ParseConfig(crlf);
  EXPECT_EQ(c.Pairs(), ParseConfig(lf).Pairs());
  EXPECT_EQ(SerializeConfig(c), crlf);
}

TEST(SerializeConfigTest, SimulatorFileRoundTripsByteExact) {
  auto text = ReadData("dgt_simulator.config");
  EXPECT_EQ(SerializeConfig(ParseConfig(text)), text);
}

TEST(SerializeConfigTest, EmptyConfigIsEmptyText) {
  EXPECT_EQ(SerializeConfig(Configuration{}), "");
  EXPECT_EQ(SerializeConfig(ParseConfig("")), "");
}

TEST(SerializeConfigTest, MissingFinalNewlineIsPreserved) {
  EXPECT_EQ(SerializeConfig(ParseConfig("a=1\nb=2")), "a=1\nb=2");
  EXPECT_EQ(SerializeConfig(ParseConfig("\n\n")), "\n\n");
}

TEST(SerializeConfigTest, SetReplacesInPlaceAndAppendsNew) {
  auto c = ParseConfig("# head\na=1\nb=2\n");
  c.Set("a", "9").Set("c", "3");
  EXPECT_EQ(SerializeConfig(c), "# head\na=9\nb=2\nc=3\n");
  EXPECT_TRUE(c.Remove("b"));
  EXPECT_FALSE(c.Remove("b"));
  EXPECT_EQ(SerializeConfig(c), "# head\na=9\nc=3\n");
}

// Random well-formed files: pairs with unique keys, comments, blanks, mixed
// line endings and optional final newline.
std::string RandomConfigText(std::mt19937 &rng) {
  static const char kKeyChars[] = "abcdefghijklmnopqrstuvwxyz0123456789._-";
  static const char kValueChars[] = "abcXYZ 019=:#/\\.,;!\t";
  std::string text;
  int lines = static_cast<int>(rng() % 20);
  for (int i = 0; i < lines; ++i) {
    switch (rng() % 4) {
      case 0:
        text += "#";
        for (int k = rng() % 10; k > 0; --k) text += kValueChars[rng() % (sizeof(kValueChars) - 1)];
        break;
      case 1:
        if (rng() % 2) text += "  ";
        break;
      default: {
        std::string key = "k" + std::to_string(i);
        for (int k = rng() % 6; k > 0; --k) key += kKeyChars[rng() % (sizeof(kKeyChars) - 1)];
        text += (rng() % 3 == 0 ? " " : "") + key + (rng() % 3 == 0 ? " " : "") + "=";
        for (int k = rng() % 12; k > 0; --k) text += kValueChars[rng() % (sizeof(kValueChars) - 1)];
      }
    }
    if (i + 1 < lines || rng() % 2) text += rng() % 4 == 0 ? "\r\n" : "\n";
  }
  return text;
}

TEST(SerializeConfigTest, RandomFilesRoundTrip) {
  std::mt19937 rng(17);
  for (int i = 0; i < 2000; ++i) {
    auto text = RandomConfigText(rng);
    auto c = ParseConfig(text);
    ASSERT_EQ(SerializeConfig(c), text);
    ASSERT_EQ(ParseConfig(SerializeConfig(c)), c);
  }
}

TEST(SerializeConfigTest, RandomEditedConfigsRoundTrip) {
  std::mt19937 rng(18);
  for (int i = 0; i < 500; ++i) {
    Configuration c;
    for (int k = rng() % 15; k > 0; --k) {
      if (rng() % 5 == 0) {
        c.AddComment("note " + std::to_string(rng() % 100));
      } else {
        c.Set("key." + std::to_string(rng() % 8), std::to_string(rng()));
      }
    }
    ASSERT_EQ(ParseConfig(SerializeConfig(c)), c);
  }
}

TEST(ConfigAccessTest, TypedGetters) {
  auto c = ParseConfig("n= 42\nb=yes\nbad=x\n");
  EXPECT_EQ(c.GetInt("n"), 42);
  EXPECT_EQ(c.GetIntOr("missing", 7), 7);
  EXPECT_TRUE(c.GetBoolOr("b", false));
  EXPECT_EQ(CodeOf([&] { c.GetInt("bad"); }), ErrorCode::kValidation);
  EXPECT_EQ(CodeOf([&] { c.GetBoolOr("bad", false); }), ErrorCode::kValidation);
}

TEST(ValidateTest, SimulatorFilePassesDgtSchema) {
  auto findings = Validate(ParseConfig(ReadData("dgt_simulator.config")), SchemaFor(TierType::kDGT));
  EXPECT_TRUE(findings.empty());
}

TEST(ValidateTest, MissingModeIsOneError) {
  auto c = ParseConfig(ReadData("dgt_simulator.config"));
  c.Remove(keys::kSimMode);
  auto findings = Validate(c, SchemaFor(TierType::kDGT));
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].key, keys::kSimMode);
  EXPECT_EQ(findings[0].severity, Severity::kError);
}

TEST(ValidateTest, ModeOutsideZeroToThreeIsRangeError) {
  auto c = ParseConfig(ReadData("dgt_simulator.config"));
  c.Set(keys::kSimMode, "7");
  auto findings = Validate(c, SchemaFor(TierType::kDGT));
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_NE(findings[0].reason.find("range"), std::string::npos);
  for (int mode = 0; mode <= 3; ++mode) {
    c.Set(keys::kSimMode, std::to_string(mode));
    EXPECT_FALSE(HasErrors(Validate(c, SchemaFor(TierType::kDGT))));
  }
}

TEST(ValidateTest, UnknownKeyIsAWarningOnly) {
  auto c = ParseConfig(ReadData("dgt_simulator.config"));
  c.Set("something.else", "1");
  auto findings = Validate(c, SchemaFor(TierType::kDGT));
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].severity, Severity::kWarning);
  EXPECT_FALSE(HasErrors(findings));
}

TEST(ValidateTest, WrongImplementationForTierType) {
  auto c = ParseConfig("gipsy.GEE.multitier.wrapper.impl=gipsy.GEE.multitier.DST.DSTWrapper\n");
  EXPECT_FALSE(HasErrors(Validate(c, SchemaFor(TierType::kDST))));
  EXPECT_TRUE(HasErrors(Validate(c, SchemaFor(TierType::kDWT))));
  EXPECT_EQ(TierTypeOfImplementation("gipsy.GEE.multitier.DST.DSTWrapper"), TierType::kDST);
  EXPECT_FALSE(TierTypeOfImplementation("com.example.Nope"));
}

TEST(ValidateTest, NodeSchemaChecksEndpoint) {
  auto c = ParseConfig("net.node.name=alpha\nnet.node.gmt.endpoint=localhost:notaport\n");
  auto findings = Validate(c, SchemaFor(TierType::kNode));
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].key, keys::kNodeGmtEndpoint);
  c.Set(keys::kNodeGmtEndpoint, "127.0.0.1:7100");
  EXPECT_TRUE(Validate(c, SchemaFor(TierType::kNode)).empty());
}

TEST(ValidateTest, RequireValidThrowsWithFindings) {
  auto c = ParseConfig("gipsy.tests.GEE.simulator.mode=9\n");
  try {
    RequireValid(c, SchemaFor(TierType::kDGT));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
    EXPECT_NE(std::string(e.what()).find(keys::kSimMode), std::string::npos);
  }
}

TEST(ValidateTest, IsPure) {
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    Configuration c;
    c.Set(keys::kSimMode, std::to_string(static_cast<int>(rng() % 10) - 3));
    if (rng() % 2) c.Set(keys::kSimPayload, std::to_string(rng() % 100));
    if (rng() % 2) c.Set("x.y", "z");
    for (auto t : {TierType::kDST, TierType::kDGT, TierType::kDWT, TierType::kGMT, TierType::kNode}) {
      ASSERT_EQ(Validate(c, SchemaFor(t)), Validate(c, SchemaFor(t)));
    }
  }
}

TEST(DispatcherTest, HistoricalNamesMapToTcp) {
  EXPECT_EQ(TransportForDispatcher("gipsy.GEE.IDP.DemandGenerator.jini.rmi.JiniDemandDispatcher"),
            "tcp");
  EXPECT_EQ(TransportForDispatcher("tcp"), "tcp");
  EXPECT_FALSE(TransportForDispatcher("carrier-pigeon"));
}

}  // namespace
}  // namespace tiernet
