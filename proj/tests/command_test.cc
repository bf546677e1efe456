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

#include <gtest/gtest.h>

#include <random>

#include "tiernet/command.h"
#include "tiernet/error.h"

namespace tiernet {
namespace {

std::string UsageMessage(std::string_view line) {
  try {
    ParseCommand(line);
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kUsage);
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << line;
  return "";
}

TEST(CommandTest, GrammarForms) {
  EXPECT_EQ(ParseCommand("start GMT GMTConfigFile.config"),
            Command(cmd::StartGmt{"GMTConfigFile.config"}));
  EXPECT_EQ(ParseCommand("allocate 1 DWT dwt.config 1 2"),
            Command(cmd::Allocate{1, TierType::kDWT, "dwt.config", 1, 2}));
  EXPECT_EQ(ParseCommand("allocate 1 DST dst.config 1"),
            Command(cmd::Allocate{1, TierType::kDST, "dst.config", std::nullopt, 1}));
  EXPECT_EQ(ParseCommand("start node n.config"), Command(cmd::StartNode{"n.config"}));
  EXPECT_EQ(ParseCommand("register"), Command(cmd::Register{}));
  EXPECT_EQ(ParseCommand("register alpha"), Command(cmd::Register{"alpha"}));
  EXPECT_EQ(ParseCommand("eval 1:DGT:1"), Command(cmd::StartEval{{1, TierType::kDGT, 1}}));
  EXPECT_EQ(ParseCommand("step 1:DGT:1"), Command(cmd::Step{{1, TierType::kDGT, 1}, 1}));
  EXPECT_EQ(ParseCommand("step 1:DGT:1 4"), Command(cmd::Step{{1, TierType::kDGT, 1}, 4}));
  EXPECT_EQ(ParseCommand("stop eval 2:DGT:3"), Command(cmd::StopEval{{2, TierType::kDGT, 3}}));
  EXPECT_EQ(ParseCommand("stop node alpha"), Command(cmd::StopNode{"alpha"}));
  EXPECT_EQ(ParseCommand("  status  "), Command(cmd::Status{}));
}

TEST(CommandTest, DeallocateAcceptsBareAndTypedIds) {
  cmd::Deallocate d{2, TierType::kDWT, {{2, TierType::kDWT, 1}, {2, TierType::kDWT, 3}}};
  EXPECT_EQ(ParseCommand("deallocate 2 DWT 1 2:DWT:3"), Command(d));
  EXPECT_EQ(RenderCommand(d), "deallocate 2 DWT 2:DWT:1 2:DWT:3");
  UsageMessage("deallocate 2 DWT 1:DWT:3");
  UsageMessage("deallocate 2 DWT 2:DGT:3");
  UsageMessage("deallocate 2 DWT");
}

TEST(CommandTest, ArityErrorsNameTheForm) {
  EXPECT_NE(UsageMessage("allocate 1 DWT dwt.config 2").find("<dst index>"), std::string::npos);
  EXPECT_NE(UsageMessage("allocate 1 DST dst.config 1 2").find("DST <config> <how many>"),
            std::string::npos);
  EXPECT_NE(UsageMessage("start GMT").find("start GMT <config>"), std::string::npos);
  EXPECT_NE(UsageMessage("eval").find("eval <tier id>"), std::string::npos);
  EXPECT_NE(UsageMessage("status now").find("status"), std::string::npos);
}

TEST(CommandTest, BadValuesAreUsageErrors) {
  UsageMessage("allocate 1 GMT gmt.config 1");
  UsageMessage("allocate 1 NODE n.config 1");
  UsageMessage("allocate 0 DST dst.config 1");
  UsageMessage("allocate 1 DST dst.config 0");
  UsageMessage("allocate x DWT dwt.config 1 1");
  UsageMessage("allocate 1 XYZ dwt.config 1 1");
  UsageMessage("eval 1-DGT-1");
  UsageMessage("step 1:DGT:1 0");
  UsageMessage("start tier x");
}

TEST(CommandTest, UnknownVerbListsGrammar) {
  auto m = UsageMessage("launch everything");
  EXPECT_NE(m.find("launch"), std::string::npos);
  EXPECT_NE(m.find(std::string(CommandUsage())), std::string::npos);
}

TEST(CommandTest, CommentsAndBlanksAreNotCommands) {
  EXPECT_FALSE(IsCommandLine(""));
  EXPECT_FALSE(IsCommandLine("   \t"));
  EXPECT_FALSE(IsCommandLine("  # start GMT x"));
  EXPECT_TRUE(IsCommandLine("status"));
}

// Hand-rolled generator over every variant.
Command RandomCommand(std::mt19937_64 &rng) {
  auto pick = [&](std::uint32_t lo, std::uint32_t hi) {
    return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng);
  };
  auto word = [&] {
    static const char kChars[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJ0123456789._-/";
    std::string s;
    auto n = pick(1, 12);
    for (std::uint32_t i = 0; i < n; ++i) s += kChars[pick(0, sizeof(kChars) - 2)];
    return s;
  };
  auto type = [&] { return static_cast<TierType>(pick(0, 2)); };
  auto id = [&](TierType t) { return TierId{pick(0, 1000), t, pick(0, 1000)}; };
  switch (pick(0, 9)) {
    case 0: return cmd::StartGmt{word()};
    case 1: return cmd::StartNode{word()};
    case 2: return pick(0, 1) ? cmd::Register{} : cmd::Register{word()};
    case 3: {
      cmd::Allocate a{pick(1, 1u << 31), type(), word(), std::nullopt, pick(1, 64)};
      if (a.tier_type != TierType::kDST) a.dst_index = pick(0, 50);
      return a;
    }
    case 4: {
      cmd::Deallocate d{pick(1, 500), type(), {}};
      auto n = pick(1, 5);
      for (std::uint32_t i = 0; i < n; ++i) d.tiers.push_back({d.node_id, d.tier_type, pick(1, 99)});
      return d;
    }
    case 5: return cmd::StartEval{id(TierType::kDGT)};
    case 6: return cmd::Step{id(TierType::kDGT), pick(1, 100)};
    case 7: return cmd::StopEval{id(type())};
    case 8: return cmd::StopNode{word()};
    default: return cmd::Status{};
  }
}

TEST(CommandTest, ParseOfRenderIsIdentity) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20000; ++i) {
    auto c = RandomCommand(rng);
    auto text = RenderCommand(c);
    ASSERT_EQ(ParseCommand(text), c) << text;
    ASSERT_EQ(RenderCommand(ParseCommand(text)), text);
    ASSERT_EQ(text.rfind(std::string(CommandVerb(c)), 0), 0u) << text;
  }
}

}  // namespace
}  // namespace tiernet
