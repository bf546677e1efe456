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

#include <fstream>
#include <set>
#include <sstream>

#include "test_util.h"
#include "tiernet/error.h"
#include "tiernet/manager.h"
#include "tiernet/node.h"

namespace tiernet {
namespace {

using namespace std::chrono_literals;
using testing::WaitFor;

const char kGmtConfig[] = "gipsy.GEE.multitier.wrapper.impl=gipsy.GEE.multitier.GMT.GMTWrapper\n";
const char kDstConfig[] = "gipsy.GEE.multitier.wrapper.impl=gipsy.GEE.multitier.DST.DSTWrapper\n";
const char kDwtConfig[] =
    "gipsy.GEE.multitier.wrapper.impl=gipsy.GEE.multitier.DWT.DWTWrapper\nnet.dwt.poll_ms=5\n";
const char kSlowDwtConfig[] =
    "gipsy.GEE.multitier.wrapper.impl=gipsy.GEE.multitier.DWT.DWTWrapper\n"
    "net.dwt.work=sleep-then-checksum\nnet.dwt.delay_ms=60000\nnet.dwt.poll_ms=5\n";

std::string ReadData(const std::string &name) {
  std::ifstream in(std::string(TIERNET_TEST_DATA_DIR) + "/" + name, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string DgtConfig(int mode, int max) {
  auto c = ParseConfig(ReadData("dgt_simulator.config"));
  c.Set(keys::kSimMode, std::to_string(mode));
  c.Set(keys::kSimMaxDemands, std::to_string(max));
  return SerializeConfig(c);
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

class ControlPlaneTest : public ::testing::Test {
 protected:
  void SetUp() override { gmt_ = Manager::Bootstrap(ParseConfig(kGmtConfig)); }
  void TearDown() override {
    nodes_.clear();
    gmt_.reset();
  }

  NodeDaemon *StartNode(const std::string &name, bool do_register = true) {
    auto config = ParseConfig("net.node.name=" + name + "\nnet.node.color=#ff0000\n");
    config.Set(keys::kNodeGmtEndpoint, gmt_->registration_endpoint().ToString());
    NodeDaemon::Options options;
    options.registration_timeout = 5s;
    nodes_.push_back(NodeDaemon::Start(config, options));
    if (do_register) nodes_.back()->Register();
    return nodes_.back().get();
  }

  // Allocates a DST on node_id and returns its index.
  std::uint32_t AllocateDst(std::uint32_t node_id) {
    auto r = gmt_->Allocate(node_id, TierType::kDST, "dst.config", kDstConfig, std::nullopt, 1);
    EXPECT_EQ(r.registrations.size(), 1u);
    return gmt_->Snapshot().tiers.back().dst_index;
  }

  std::set<TierId> RegistryTierIds() {
    std::set<TierId> ids;
    for (const auto &t : gmt_->Snapshot().tiers) ids.insert(t.tier_id);
    return ids;
  }

  std::set<TierId> NodeTierIds() {
    std::set<TierId> ids;
    for (const auto &n : nodes_) {
      for (const auto &t : n->Tiers()) ids.insert(t.id);
    }
    return ids;
  }

  std::unique_ptr<Manager> gmt_;
  std::vector<std::unique_ptr<NodeDaemon>> nodes_;
};

TEST_F(ControlPlaneTest, FreshManagerHasOnlyTheRegistrationStore) {
  auto s = gmt_->Snapshot();
  EXPECT_TRUE(s.nodes.empty());
  EXPECT_TRUE(s.tiers.empty());
  ASSERT_EQ(s.dsts.size(), 1u);
  EXPECT_EQ(s.dsts[0].index, 0u);
  EXPECT_EQ(s.dsts[0].endpoint, gmt_->registration_endpoint());
  auto probe = Session::Connect(gmt_->registration_endpoint(), {0, TierType::kNode, 0});
  EXPECT_EQ(probe->Stats().Entries(), 0u);
}

TEST_F(ControlPlaneTest, SecondBootstrapOnSamePortFails) {
  auto config = ParseConfig(kGmtConfig);
  config.Set(keys::kGmtPort, std::to_string(gmt_->registration_endpoint().port));
  EXPECT_EQ(CodeOf([&] { Manager::Bootstrap(config); }), ErrorCode::kStartup);
}

TEST_F(ControlPlaneTest, NodeIdsAreSequentialFromOne) {
  for (auto name : {"a", "b", "c"}) StartNode(name);
  auto s = gmt_->Snapshot();
  ASSERT_EQ(s.nodes.size(), 3u);
  for (std::uint32_t i = 0; i < 3; ++i) {
    EXPECT_EQ(s.nodes[i].node_id, i + 1);
    EXPECT_EQ(nodes_[i]->identity().node_id, i + 1);
  }
  EXPECT_EQ(s.nodes[1].name, "b");
  EXPECT_EQ(s.nodes[1].color, "#ff0000");
}

TEST_F(ControlPlaneTest, RegistrationAssignsLatestComputationalStore) {
  auto *first = StartNode("a");
  EXPECT_EQ(first->identity().dst_index, 0u);
  EXPECT_EQ(first->identity().dst, gmt_->registration_endpoint());
  auto index = AllocateDst(1);
  EXPECT_EQ(index, 1u);
  auto *second = StartNode("b");
  EXPECT_EQ(second->identity().dst_index, 1u);
  EXPECT_EQ(second->identity().dst, gmt_->Snapshot().dsts[1].endpoint);
}

TEST_F(ControlPlaneTest, MalformedRegistrationIsAnsweredWithError) {
  auto s = Session::Connect(gmt_->registration_endpoint(), {0, TierType::kNode, 0});
  auto sig = SystemSignature("NodeRegistration", {{"nonce", 42}});
  s->Deposit(Demand::Issue(sig, DemandKind::kSystem, ToBytes("garbage"), {0, TierType::kNode, 0}));
  std::optional<Bytes> result;
  ASSERT_TRUE(WaitFor([&] { return (result = s->Lookup(sig)).has_value(); }));
  auto body = DecodeBodyAs<RegistrationResult>(*result);
  EXPECT_FALSE(body.error.empty());
  EXPECT_TRUE(gmt_->Snapshot().nodes.empty());
}

TEST_F(ControlPlaneTest, RegisterAgainstDeadStoreTimesOut) {
  std::uint16_t port;
  {
    auto probe = Manager::Bootstrap(ParseConfig(kGmtConfig));
    port = probe->registration_endpoint().port;
  }
  auto config = ParseConfig("net.node.name=x\n");
  config.Set(keys::kNodeGmtEndpoint, "127.0.0.1:" + std::to_string(port));
  NodeDaemon::Options options;
  options.registration_timeout = 300ms;
  auto node = NodeDaemon::Start(config, options);
  EXPECT_EQ(CodeOf([&] { node->Register(); }), ErrorCode::kTimeout);
  EXPECT_FALSE(node->registered());
}

TEST_F(ControlPlaneTest, NodeWithoutEndpointMustHostGmt) {
  EXPECT_EQ(CodeOf([] { NodeDaemon::Start(ParseConfig("net.node.name=x\n"), {}); }),
            ErrorCode::kStartup);
  EXPECT_EQ(CodeOf([] { NodeDaemon::Start(ParseConfig("net.node.color=red\n"), {}); }),
            ErrorCode::kStartup);
  auto node = NodeDaemon::Start(ParseConfig("net.node.name=x\nnet.node.gmt_host=true\n"), {});
  EXPECT_TRUE(node->Tiers().empty());
  EXPECT_FALSE(node->identity().node_id);
}

TEST_F(ControlPlaneTest, DuplicateRegisterIsRejected) {
  auto *n = StartNode("a");
  EXPECT_EQ(CodeOf([&] { n->Register(); }), ErrorCode::kConflict);
  EXPECT_EQ(gmt_->Snapshot().nodes.size(), 1u);
}

TEST_F(ControlPlaneTest, AllocateStoreThenWorkers) {
  StartNode("a");
  EXPECT_EQ(AllocateDst(1), 1u);
  auto r = gmt_->Allocate(1, TierType::kDWT, "dwt.config", kDwtConfig, 1, 2);
  ASSERT_EQ(r.registrations.size(), 2u);
  EXPECT_EQ(r.registrations[0].tier_id, (TierId{1, TierType::kDWT, 1}));
  EXPECT_EQ(r.registrations[1].tier_id, (TierId{1, TierType::kDWT, 2}));
  auto s = gmt_->Snapshot();
  ASSERT_EQ(s.dsts.size(), 2u);
  EXPECT_EQ(s.dsts[1].tier, (TierId{1, TierType::kDST, 1}));
  int bound = 0;
  for (const auto &t : s.tiers) {
    if (t.tier_id.type == TierType::kDWT) {
      EXPECT_EQ(t.dst_index, 1u);
      ++bound;
    }
  }
  EXPECT_EQ(bound, 2);
  EXPECT_EQ(RegistryTierIds(), NodeTierIds());
}

TEST_F(ControlPlaneTest, AllocationErrors) {
  StartNode("a");
  EXPECT_EQ(CodeOf([&] { gmt_->Allocate(9, TierType::kDST, "d", kDstConfig, std::nullopt, 1); }),
            ErrorCode::kNotFound);
  EXPECT_EQ(CodeOf([&] { gmt_->Allocate(1, TierType::kDWT, "w", kDwtConfig, 0, 1); }),
            ErrorCode::kValidation);
  EXPECT_EQ(CodeOf([&] { gmt_->Allocate(1, TierType::kDWT, "w", kDwtConfig, 5, 1); }),
            ErrorCode::kValidation);
  EXPECT_EQ(CodeOf([&] { gmt_->Allocate(1, TierType::kDST, "d", kDstConfig, 1, 1); }),
            ErrorCode::kValidation);
  EXPECT_EQ(CodeOf([&] { gmt_->Allocate(1, TierType::kDST, "d", kDwtConfig, std::nullopt, 1); }),
            ErrorCode::kValidation);
  EXPECT_EQ(CodeOf([&] { gmt_->Allocate(1, TierType::kDST, "d", "not a config\n", std::nullopt, 1); }),
            ErrorCode::kValidation);
  EXPECT_TRUE(gmt_->Snapshot().tiers.empty());
}

TEST_F(ControlPlaneTest, RequestsForOtherNodesAreNotGrabbed) {
  auto *a = StartNode("a");
  StartNode("b");
  TierAllocationRequest req;
  req.node_id = 2;
  req.tier_type = TierType::kDST;
  req.config_name = "d";
  req.config_text = kDstConfig;
  EXPECT_FALSE(a->ServeAllocation(req).errors.empty());
  gmt_->Allocate(2, TierType::kDST, "d", kDstConfig, std::nullopt, 1);
  EXPECT_TRUE(a->Tiers().empty());
  EXPECT_EQ(nodes_[1]->Tiers().size(), 1u);
}

TEST_F(ControlPlaneTest, DeallocationRemovesAndReportsUnknownIds) {
  StartNode("a");
  AllocateDst(1);
  auto before = NodeTierIds();
  gmt_->Allocate(1, TierType::kDWT, "dwt.config", kDwtConfig, 1, 2);
  TierId w1{1, TierType::kDWT, 1}, w2{1, TierType::kDWT, 2}, ghost{1, TierType::kDWT, 7};
  auto r = gmt_->Deallocate(1, TierType::kDWT, {w1, ghost});
  ASSERT_EQ(r.outcomes.size(), 2u);
  EXPECT_EQ(r.outcomes[0].status, DeallocationStatus::kStopped);
  EXPECT_EQ(r.outcomes[1].status, DeallocationStatus::kNotFound);
  r = gmt_->Deallocate(1, TierType::kDWT, {w2});
  EXPECT_EQ(r.outcomes[0].status, DeallocationStatus::kStopped);
  EXPECT_EQ(NodeTierIds(), before);
  EXPECT_EQ(RegistryTierIds(), NodeTierIds());
  // Indices are never reused.
  auto again = gmt_->Allocate(1, TierType::kDWT, "dwt.config", kDwtConfig, 1, 1);
  EXPECT_EQ(again.registrations[0].tier_id.local_index, 3u);
}

TEST_F(ControlPlaneTest, DeallocatingBusyWorkerRequeuesItsDemand) {
  StartNode("a");
  AllocateDst(1);
  gmt_->Allocate(1, TierType::kDWT, "slow.config", kSlowDwtConfig, 1, 1);
  auto dst = gmt_->Snapshot().dsts[1].endpoint;
  auto client = Session::Connect(dst, {5, TierType::kDGT, 1});
  auto demand = Demand::Issue(MakeSignature("p", "sim", {{"seq", 1}}), DemandKind::kProcedural,
                              ToBytes("abc"), {5, TierType::kDGT, 1});
  client->Deposit(demand);
  ASSERT_TRUE(WaitFor([&] { return client->Stats().Count(StateTag::kProcessing) == 1; }));
  gmt_->Deallocate(1, TierType::kDWT, {{1, TierType::kDWT, 1}});
  ASSERT_TRUE(WaitFor([&] { return client->Stats().Count(StateTag::kPending) == 1; }));
  gmt_->Allocate(1, TierType::kDWT, "dwt.config", kDwtConfig, 1, 1);
  std::optional<Bytes> result;
  ASSERT_TRUE(WaitFor([&] { return (result = client->Lookup(demand.signature())).has_value(); }));
  EXPECT_EQ(*result, Checksum(ToBytes("abc")));
}

TEST_F(ControlPlaneTest, LostNodeRejectsCommands) {
  StartNode("a");
  nodes_[0]->Stop();
  ASSERT_TRUE(WaitFor([&] { return gmt_->Snapshot().nodes[0].status == NodeStatus::kLost; }));
  EXPECT_EQ(CodeOf([&] { gmt_->Deallocate(1, TierType::kDWT, {{1, TierType::kDWT, 1}}); }),
            ErrorCode::kConflict);
  EXPECT_EQ(CodeOf([&] { gmt_->Allocate(1, TierType::kDST, "d", kDstConfig, std::nullopt, 1); }),
            ErrorCode::kConflict);
}

TEST_F(ControlPlaneTest, LostNodeRegisteringAgainKeepsItsId) {
  StartNode("a");
  nodes_[0]->Stop();
  ASSERT_TRUE(WaitFor([&] { return gmt_->Snapshot().nodes[0].status == NodeStatus::kLost; }));
  auto *again = StartNode("a");
  EXPECT_EQ(again->identity().node_id, 1u);
  EXPECT_EQ(gmt_->Snapshot().nodes.size(), 1u);
  EXPECT_EQ(gmt_->Snapshot().nodes[0].status, NodeStatus::kRegistered);
  EXPECT_EQ(StartNode("b")->identity().node_id, 2u);
}

TEST_F(ControlPlaneTest, EvaluationRunsToCompletion) {
  StartNode("a");
  AllocateDst(1);
  gmt_->Allocate(1, TierType::kDGT, "dgt.config", ReadData("dgt_simulator.config"), 1, 1);
  gmt_->Allocate(1, TierType::kDWT, "dwt.config", kDwtConfig, 1, 1);
  TierId gen{1, TierType::kDGT, 1};
  EXPECT_EQ(gmt_->Evaluation(gen).status, EvalStatus::kIdle);
  auto h = gmt_->StartEvaluation(gen);
  EXPECT_EQ(h.status, EvalStatus::kRunning);
  h = gmt_->WaitEvaluation(gen, 20s);
  ASSERT_EQ(h.status, EvalStatus::kDone);
  EXPECT_EQ(h.error, "");
  ASSERT_TRUE(h.report);
  EXPECT_EQ(h.report->computed, 2u);
  EXPECT_EQ(h.report->latencies_us.size(), 2u);
  EXPECT_EQ(CodeOf([&] { gmt_->StartEvaluation({1, TierType::kDWT, 1}); }), ErrorCode::kNotFound);
}

TEST_F(ControlPlaneTest, SteppedEvaluationAndDoubleStart) {
  StartNode("a");
  AllocateDst(1);
  gmt_->Allocate(1, TierType::kDGT, "dgt.config", DgtConfig(1, 3), 1, 1);
  gmt_->Allocate(1, TierType::kDWT, "dwt.config", kDwtConfig, 1, 1);
  TierId gen{1, TierType::kDGT, 1};
  gmt_->StartEvaluation(gen);
  EXPECT_EQ(CodeOf([&] { gmt_->StartEvaluation(gen); }), ErrorCode::kConflict);
  ASSERT_TRUE(WaitFor([&] {
    return nodes_[0]->FindTier(gen) &&
           std::dynamic_pointer_cast<GeneratorTier>(nodes_[0]->FindTier(gen))->eval_state() ==
               GeneratorTier::EvalState::kRunning;
  }));
  gmt_->Step(gen, 3);
  auto h = gmt_->WaitEvaluation(gen, 20s);
  ASSERT_EQ(h.status, EvalStatus::kDone);
  EXPECT_EQ(h.report->computed, 3u);
  EXPECT_EQ(CodeOf([&] { gmt_->Step(gen, 1); }), ErrorCode::kConflict);
}

TEST_F(ControlPlaneTest, StoppedEvaluationReportsStoppedEarly) {
  StartNode("a");
  AllocateDst(1);
  gmt_->Allocate(1, TierType::kDGT, "dgt.config", DgtConfig(1, 3), 1, 1);
  TierId gen{1, TierType::kDGT, 1};
  gmt_->StartEvaluation(gen);
  gmt_->StopEvaluation(gen);
  auto h = gmt_->WaitEvaluation(gen, 10s);
  ASSERT_EQ(h.status, EvalStatus::kDone);
  EXPECT_TRUE(h.report->stopped_early);
}

TEST_F(ControlPlaneTest, EveryResultSharesItsRequestSignature) {
  StartNode("a");
  StartNode("b");
  AllocateDst(1);
  gmt_->Allocate(2, TierType::kDWT, "dwt.config", kDwtConfig, 1, 2);
  gmt_->Deallocate(2, TierType::kDWT, {{2, TierType::kDWT, 1}});
  auto trace = gmt_->PairingTrace();
  EXPECT_EQ(trace.size(), 5u);
  for (const auto &p : trace) {
    EXPECT_EQ(p.request, p.result) << p.kind;
    EXPECT_EQ(p.request.program_id, kSystemProgramId);
  }
}

TEST_F(ControlPlaneTest, SnapshotIsPureAndDumpsAsConfiguration) {
  StartNode("a");
  AllocateDst(1);
  auto a = gmt_->Snapshot().ToConfiguration();
  auto b = gmt_->Snapshot().ToConfiguration();
  EXPECT_EQ(a, b);
  EXPECT_EQ(ParseConfig(SerializeConfig(a)), a);
  EXPECT_EQ(a.Get("net.registry.node.1.name"), "a");
  EXPECT_EQ(a.Get("net.registry.dst.1.tier"), "1:DST:1");
  auto structural = gmt_->Snapshot().StructuralDump();
  EXPECT_EQ(structural.find("endpoint"), std::string::npos);
  EXPECT_EQ(structural.find("registered_at"), std::string::npos);
}

}  // namespace
}  // namespace tiernet
