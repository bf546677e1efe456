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

#include "tiernet/demand.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "tiernet/error.h"
#include "tiernet/system_demand.h"

namespace tiernet {
namespace {

const TierId kW1{1, TierType::kDWT, 1};
const TierId kW2{1, TierType::kDWT, 2};

Demand Fresh(std::string id = "fib", std::int64_t n = 5) {
  return Demand::Issue(MakeSignature("p1", std::move(id), {{"n", n}}), DemandKind::kProcedural,
                       ToBytes("payload"), TierId{1, TierType::kDGT, 1}, 1000);
}

TEST(SignatureTest, SameInputsYieldEqualSignaturesAndHashes) {
  auto a = MakeSignature("p1", "fib", {{"n", 5}});
  auto b = MakeSignature("p1", "fib", {{"n", 5}});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.Hash(), b.Hash());
}

TEST(SignatureTest, ContextOrderIsCanonical) {
  auto a = MakeSignature("p1", "f", {{"y", 2}, {"x", 1}});
  auto b = MakeSignature("p1", "f", {{"x", 1}, {"y", 2}});
  EXPECT_EQ(a, b);
  EXPECT_EQ(EncodeSignature(a), EncodeSignature(b));
  EXPECT_EQ(a.context.entries().front().first, "x");
}

TEST(SignatureTest, DuplicateOrEmptyDimensionIsRejected) {
  try {
    MakeSignature("p1", "f", {{"x", 1}, {"x", 2}});
    FAIL() << "expected invalid-context";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidContext);
  }
  EXPECT_THROW(MakeSignature("p1", "f", {{"", 1}}), Error);
}

TEST(SignatureTest, ThousandSignaturesDifferingInOneTagHashDistinctly) {
  std::mt19937_64 rng(7);
  std::set<std::int64_t> tags;
  while (tags.size() < 1000) tags.insert(static_cast<std::int64_t>(rng()));
  std::set<std::uint64_t> hashes;
  for (auto tag : tags) {
    hashes.insert(MakeSignature("p1", "f", {{"a", 3}, {"seq", tag}, {"z", -1}}).Hash());
  }
  EXPECT_EQ(hashes.size(), 1000u);
}

TEST(SignatureTest, ShufflingContextNeverChangesEqualityOrHash) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 500; ++round) {
    std::vector<ContextEntry> entries;
    int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      entries.emplace_back("d" + std::to_string(i), static_cast<std::int64_t>(rng() % 100));
    }
    auto shuffled = entries;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto a = MakeSignature("p", "id", entries);
    auto b = MakeSignature("p", "id", shuffled);
    ASSERT_EQ(a, b);
    ASSERT_EQ(a.Hash(), b.Hash());
  }
}

TEST(TransitionTest, PendingGrabBecomesProcessing) {
  auto d = Transition(Fresh(), GrabEvent{kW1, 5});
  ASSERT_EQ(d.tag(), StateTag::kProcessing);
  EXPECT_EQ(d.holder(), kW1);
}

TEST(TransitionTest, ProcessingRequeueBecomesPendingAndClearsHolder) {
  auto d = Transition(Transition(Fresh(), GrabEvent{kW1, 5}), RequeueEvent{});
  EXPECT_EQ(d.tag(), StateTag::kPending);
  EXPECT_FALSE(d.holder().has_value());
}

TEST(TransitionTest, CompleteStoresResult) {
  auto d = Transition(Transition(Fresh(), GrabEvent{kW1, 5}), CompleteEvent{ToBytes("v")});
  ASSERT_EQ(d.tag(), StateTag::kComputed);
  EXPECT_EQ(*d.result(), ToBytes("v"));
  EXPECT_EQ(d.payload(), ToBytes("payload"));
}

TEST(TransitionTest, ComputedIsTerminal) {
  auto d = Transition(Transition(Fresh(), GrabEvent{kW1, 5}), CompleteEvent{{}});
  try {
    Transition(d, GrabEvent{kW2, 6});
    FAIL() << "expected state-machine error";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kStateMachine);
    std::string msg = e.what();
    EXPECT_NE(msg.find("Computed"), std::string::npos);
    EXPECT_NE(msg.find("Grab"), std::string::npos);
  }
}

// Independent oracle: the legal-move table.
std::optional<StateTag> Oracle(StateTag s, int event) {
  if (s == StateTag::kPending && event == 0) return StateTag::kProcessing;
  if (s == StateTag::kProcessing && event == 1) return StateTag::kComputed;
  if (s == StateTag::kProcessing && event == 2) return StateTag::kPending;
  return std::nullopt;
}

TEST(TransitionTest, RandomEventSequencesStayInsideTheMachine) {
  std::mt19937 rng(3);
  for (int seq = 0; seq < 2000; ++seq) {
    auto d = Fresh("f", seq);
    for (int step = 0; step < 12; ++step) {
      int ev = static_cast<int>(rng() % 3);
      DemandEvent event = ev == 0   ? DemandEvent{GrabEvent{kW1, step}}
                          : ev == 1 ? DemandEvent{CompleteEvent{ToBytes("r")}}
                                    : DemandEvent{RequeueEvent{}};
      auto expected = Oracle(d.tag(), ev);
      if (expected) {
        d = Transition(d, event);
        ASSERT_EQ(d.tag(), *expected);
      } else {
        ASSERT_THROW(Transition(d, event), Error);
      }
    }
  }
}

Demand RandomDemand(std::mt19937_64 &rng) {
  std::vector<ContextEntry> ctx;
  for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) {
    ctx.emplace_back("dim" + std::to_string(i), static_cast<std::int64_t>(rng()));
  }
  Bytes payload(rng() % 64);
  for (auto &b : payload) b = static_cast<std::uint8_t>(rng());
  auto d = Demand::Issue(MakeSignature("prog" + std::to_string(rng() % 3), "id", ctx),
                         static_cast<DemandKind>(rng() % 3), payload,
                         TierId{static_cast<std::uint32_t>(rng() % 9), TierType::kDGT, 1},
                         static_cast<std::int64_t>(rng() % 100000));
  switch (rng() % 3) {
    case 1:
      d = Transition(d, GrabEvent{kW2, 42});
      break;
    case 2:
      d = Transition(Transition(d, GrabEvent{kW2, 42}), CompleteEvent{Bytes(rng() % 16, 0xAB)});
      break;
    default:
      break;
  }
  return d;
}

TEST(EncodingTest, DemandRoundTripIsByteExact) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    auto d = RandomDemand(rng);
    auto bytes = EncodeDemand(d);
    auto back = DecodeDemand(bytes);
    ASSERT_EQ(back, d);
    ASSERT_EQ(EncodeDemand(back), bytes);
  }
}

TEST(EncodingTest, TruncatedInputIsAParseError) {
  auto bytes = EncodeDemand(Fresh());
  bytes.pop_back();
  EXPECT_THROW(DecodeDemand(bytes), Error);
}

TEST(TierIdTest, TextFormRoundTrips) {
  TierId id{2, TierType::kDWT, 7};
  EXPECT_EQ(id.ToString(), "2:DWT:7");
  EXPECT_EQ(TierId::Parse("2:DWT:7"), id);
  EXPECT_THROW(TierId::Parse("2:XYZ:7"), Error);
  EXPECT_THROW(TierId::Parse("2-DWT-7"), Error);
  EXPECT_THROW(TierId::Parse("a:DWT:7"), Error);
}

TEST(SystemBodyTest, EveryVariantRoundTrips) {
  GeneratorReport report;
  report.mode = 2;
  report.requested = report.emitted = report.computed = 2;
  report.latencies_us = {10, 20};
  report.results = {{0, ToBytes("a")}, {1, ToBytes("b")}};
  std::vector<SystemDemandBody> bodies = {
      NodeRegistration{"n1", "127.0.0.1", "#e6194b"},
      RegistrationResult{1, 0, Endpoint{"127.0.0.1", 4000}, ""},
      TierAllocationRequest{1, TierType::kDWT, 2, "dwt.config", "a=b\n", 1,
                            Endpoint{"127.0.0.1", 4001}},
      TierAllocationResult{{TierRegistration{{1, TierType::kDST, 1}, "dst.config",
                                             Endpoint{"127.0.0.1", 4002}, ""}},
                           {"bad"}},
      TierDeallocationRequest{1, TierType::kDWT, {{1, TierType::kDWT, 1}}},
      TierDeallocationResult{{{{1, TierType::kDWT, 9}, DeallocationStatus::kNotFound, "x"}}},
      StartEvaluation{{1, TierType::kDGT, 1}},
      StopTier{{1, TierType::kDGT, 1}},
      StepGenerator{{1, TierType::kDGT, 1}, 3},
      EvaluationResult{"", report},
      Ack{"nope"},
  };
  for (const auto &body : bodies) {
    auto bytes = EncodeBody(body);
    EXPECT_EQ(DecodeBody(bytes), body) << BodyName(body);
  }
  EXPECT_THROW(DecodeBodyAs<Ack>(EncodeBody(StopTier{})), Error);
}

}  // namespace
}  // namespace tiernet
