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

#include <algorithm>
#include <random>
#include <set>

#include "tiernet/error.h"
#include "tiernet/graph.h"

namespace tiernet {
namespace {

NetworkGraph SingleNodeGraph() {
  return NetworkGraph()
      .AddInstance({"inst1"})
      .AddNode({"alpha", "127.0.0.1", ""})
      .AddTier({"GMT1", TierType::kGMT, "inst1", "alpha", "gmt.config", 1})
      .AddTier({"DST1", TierType::kDST, "inst1", "alpha", "dst.config", 1})
      .AddTier({"DGT1", TierType::kDGT, "inst1", "alpha", "dgt.config", 1})
      .AddTier({"DWT1", TierType::kDWT, "inst1", "alpha", "dwt.config", 1})
      .AddTier({"DWT2", TierType::kDWT, "inst1", "alpha", "dwt.config", 1})
      .Connect("DGT1", "DST1")
      .Connect("DWT1", "DST1")
      .Connect("DWT2", "DST1");
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

std::string MessageOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.what();
  }
  ADD_FAILURE() << "expected an error";
  return "";
}

bool HasError(const std::vector<Finding> &findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding &f) { return f.severity == Severity::kError; });
}

TEST(GraphEditTest, SingleNodeGraphIsValid) {
  auto g = SingleNodeGraph();
  EXPECT_FALSE(HasError(ValidateGraph(g)));
  EXPECT_EQ(g.tiers().size(), 5u);
  EXPECT_EQ(g.connections().size(), 3u);
  EXPECT_TRUE(g.Connected("DST1", "DWT2"));
}

TEST(GraphEditTest, RejectedEditsLeaveGraphUnchanged) {
  auto g = SingleNodeGraph();
  auto before = g;
  EXPECT_EQ(CodeOf([&] { g.AddTier({"X", TierType::kDWT, "inst1", "ghost", "c", 1}); }),
            ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.AddTier({"X", TierType::kDWT, "ghost", "alpha", "c", 1}); }),
            ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.Connect("DGT1", "DST1"); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.Connect("DST1", "DGT1"); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.Connect("DST1", "DST1"); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.Connect("DGT1", "DWT1"); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.Connect("DGT1", "nope"); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.Disconnect("DGT1", "DWT1"); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.AddInstance({"inst1"}); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.AddNode({"alpha", "h", ""}); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.AddNode({"bad name", "h", ""}); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.AddNode({"b", "h", "red"}); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.AddTier({"DST2", TierType::kDST, "inst1", "alpha", "c", 2}); }),
            ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.AddTier({"GMT2", TierType::kGMT, "inst1", "alpha", "c", 1}); }),
            ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.AddTier({"N", TierType::kNode, "inst1", "alpha", "c", 1}); }),
            ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.AddTier({"W", TierType::kDWT, "inst1", "alpha", "c", 0}); }),
            ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.RemoveNode("alpha"); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.RemoveInstance("inst1"); }), ErrorCode::kGraph);
  EXPECT_EQ(g, before);
}

TEST(GraphEditTest, NodeColorsAreUnique) {
  auto g = NetworkGraph().AddNode({"a", "h", "#AA0000"});
  EXPECT_EQ(g.nodes()[0].color, "#aa0000");
  EXPECT_EQ(CodeOf([&] { g.AddNode({"b", "h", "#aa0000"}); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([&] { g.UpdateNode("a", {"a", "h", "#zz0000"}); }), ErrorCode::kGraph);
}

TEST(GraphEditTest, RemoveTierDropsItsConnections) {
  auto g = SingleNodeGraph().RemoveTier("DST1");
  EXPECT_TRUE(g.connections().empty());
  EXPECT_TRUE(HasError(ValidateGraph(g)));
  g = SingleNodeGraph().Disconnect("DST1", "DWT1");
  EXPECT_EQ(g.connections().size(), 2u);
}

TEST(GraphEditTest, RenamesFollowReferences) {
  auto g = SingleNodeGraph()
               .UpdateNode("alpha", {"beta", "10.0.0.2", "#123456"})
               .UpdateInstance("inst1", {"main"})
               .UpdateTier("DST1", {"store", TierType::kDST, "main", "beta", "dst.config", 1});
  EXPECT_EQ(g.FindTier("DWT1")->node, "beta");
  EXPECT_EQ(g.FindTier("DWT1")->instance, "main");
  EXPECT_TRUE(g.Connected("store", "DWT2"));
  EXPECT_FALSE(HasError(ValidateGraph(g)));
}

TEST(GraphEditTest, Completeness) {
  auto g = SingleNodeGraph().AddTier({"DWT3", TierType::kDWT, "inst1", "alpha", "dwt.config", 3});
  auto f = ValidateGraph(g);
  ASSERT_TRUE(HasError(f));
  EXPECT_EQ(f[0].key, "DWT3");
  auto no_gmt = SingleNodeGraph().RemoveTier("GMT1");
  EXPECT_EQ(ValidateGraph(no_gmt)[0].key, "graph");
  auto two = SingleNodeGraph()
                 .AddTier({"DST2", TierType::kDST, "inst1", "alpha", "dst.config", 1})
                 .Connect("DWT1", "DST2");
  f = ValidateGraph(two);
  EXPECT_FALSE(HasError(f));
  EXPECT_TRUE(std::any_of(f.begin(), f.end(), [](const Finding &x) { return x.key == "DWT1"; }));
  EXPECT_TRUE(HasError(ValidateGraph(NetworkGraph())));
}

// ---------------------------------------------------------------------------

TEST(VisualsTest, ColorFollowsNodeAndShapeFollowsInstance) {
  auto g = NetworkGraph()
               .AddInstance({"i1"})
               .AddInstance({"i2"})
               .AddNode({"n1", "h", ""})
               .AddNode({"n2", "h", ""})
               .AddTier({"a", TierType::kDST, "i1", "n1", "c", 1})
               .AddTier({"b", TierType::kDWT, "i2", "n1", "c", 1})
               .AddTier({"c", TierType::kDGT, "i1", "n1", "c", 1})
               .AddTier({"d", TierType::kDWT, "i1", "n2", "c", 1});
  auto v = AssignVisuals(g);
  EXPECT_EQ(v.node_colors.at("n1"), kPalette[0]);
  EXPECT_EQ(v.node_colors.at("n2"), kPalette[1]);
  for (auto t : {"a", "b", "c"}) EXPECT_EQ(v.tiers.at(t).color, kPalette[0]);
  EXPECT_EQ(v.tiers.at("d").color, kPalette[1]);
  EXPECT_EQ(v.tiers.at("a").shape, Shape::kCircle);
  EXPECT_EQ(v.tiers.at("b").shape, Shape::kSquare);
  EXPECT_EQ(v.tiers.at("c").shape, v.tiers.at("d").shape);
}

TEST(VisualsTest, SingleInstanceSingleShape) {
  auto v = AssignVisuals(SingleNodeGraph());
  std::set<Shape> shapes;
  for (const auto &[name, t] : v.tiers) shapes.insert(t.shape);
  EXPECT_EQ(shapes.size(), 1u);
}

TEST(VisualsTest, ShapesWrapWithBadge) {
  NetworkGraph g;
  for (int i = 0; i < 14; ++i) g = g.AddInstance({"i" + std::to_string(i)});
  auto v = AssignVisuals(g);
  EXPECT_EQ(v.instances.at("i5"), (InstanceVisual{Shape::kHexagon, 0}));
  EXPECT_EQ(v.instances.at("i6"), (InstanceVisual{Shape::kCircle, 1}));
  EXPECT_EQ(v.instances.at("i13"), (InstanceVisual{Shape::kSquare, 2}));
  std::set<std::pair<Shape, std::uint32_t>> distinct;
  for (const auto &[n, iv] : v.instances) distinct.insert({iv.shape, iv.badge});
  EXPECT_EQ(distinct.size(), 14u);
}

TEST(VisualsTest, ColorsStayUniqueBeyondPaletteAndAroundOverrides) {
  NetworkGraph g;
  g = g.AddNode({"n0", "h", ""}).AddNode({"n1", "h", std::string(kPalette[0])});
  for (int i = 2; i < 30; ++i) g = g.AddNode({"n" + std::to_string(i), "h", ""});
  auto v = AssignVisuals(g);
  std::set<std::string> colors;
  for (const auto &[n, c] : v.node_colors) {
    EXPECT_TRUE(IsValidColor(c)) << c;
    colors.insert(c);
  }
  EXPECT_EQ(colors.size(), 30u);
  EXPECT_EQ(v.node_colors.at("n1"), kPalette[0]);
  EXPECT_NE(v.node_colors.at("n0"), kPalette[0]);
  EXPECT_EQ(v.node_colors.at("n2"), kPalette[2]);
}

// Random graphs built from edit operations; always structurally valid.
NetworkGraph RandomGraph(std::mt19937_64 &rng, bool complete) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  NetworkGraph g;
  int instances = pick(1, 8), nodes = pick(1, 6);
  for (int i = 0; i < instances; ++i) g = g.AddInstance({"inst" + std::to_string(i)});
  for (int i = 0; i < nodes; ++i) {
    std::string color;
    if (pick(0, 3) == 0) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "#%06x", pick(0, 0xffffff));
      color = buf;
    }
    try {
      g = g.AddNode({"node" + std::to_string(i), "10.0.0." + std::to_string(i), color});
    } catch (const Error &) {
      g = g.AddNode({"node" + std::to_string(i), "10.0.0." + std::to_string(i), ""});
    }
  }
  auto any_instance = [&] { return "inst" + std::to_string(pick(0, instances - 1)); };
  auto any_node = [&] { return "node" + std::to_string(pick(0, nodes - 1)); };
  g = g.AddTier({"gmt", TierType::kGMT, any_instance(), any_node(), "gmt.config", 1});
  int dsts = pick(1, 3);
  for (int i = 0; i < dsts; ++i) {
    g = g.AddTier({"dst" + std::to_string(i), TierType::kDST, any_instance(), any_node(),
                   "dst" + std::to_string(i) + ".config", 1});
  }
  int bound = pick(0, 6);
  for (int i = 0; i < bound; ++i) {
    auto type = pick(0, 1) ? TierType::kDGT : TierType::kDWT;
    auto name = std::string(TierTypeName(type)) + std::to_string(i);
    g = g.AddTier({name, type, any_instance(), any_node(), "w.config",
                   static_cast<std::uint32_t>(pick(1, 4))});
    int links = complete ? pick(1, dsts) : pick(0, dsts);
    for (int l = 0; l < links; ++l) {
      auto d = "dst" + std::to_string(pick(0, dsts - 1));
      if (!g.Connected(name, d)) g = pick(0, 1) ? g.Connect(name, d) : g.Connect(d, name);
    }
  }
  if (pick(0, 2) == 0) g = g.Connect("gmt", "dst0");
  return g;
}

TEST(VisualsTest, AssignmentIgnoresTierOrder) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 300; ++round) {
    auto g = RandomGraph(rng, false);
    auto tiers = g.tiers();
    std::shuffle(tiers.begin(), tiers.end(), rng);
    auto conns = g.connections();
    std::shuffle(conns.begin(), conns.end(), rng);
    auto permuted = NetworkGraph::Make(g.instances(), g.nodes(), tiers, conns);
    ASSERT_EQ(AssignVisuals(g), AssignVisuals(permuted));
  }
}

// ---------------------------------------------------------------------------

TEST(GraphFileTest, SingleNodeRoundTrip) {
  auto text = SaveGraph(SingleNodeGraph());
  EXPECT_EQ(LoadGraph(text), SingleNodeGraph());
  EXPECT_NE(text.find("net.graph.tier.2.name=DGT1\n"), std::string::npos);
  EXPECT_NE(text.find("net.graph.conn.0.from=DGT1\nnet.graph.conn.0.to=DST1\n"),
            std::string::npos);
}

TEST(GraphFileTest, EmptyGraphIsHeaderOnly) {
  auto text = SaveGraph(NetworkGraph());
  EXPECT_EQ(text, "# tiernet network graph\n");
  EXPECT_TRUE(LoadGraph(text).empty());
  EXPECT_TRUE(LoadGraph("").empty());
}

TEST(GraphFileTest, ErrorsNameTheLine) {
  auto text = SaveGraph(SingleNodeGraph());
  auto broken = text;
  broken.replace(broken.find("tier.3.node=alpha"), 17, "tier.3.node=ghost");
  auto line = std::count(broken.begin(), broken.begin() + broken.find("tier.3.node="), '\n') + 1;
  auto m = MessageOf([&] { LoadGraph(broken, "net.graph"); });
  EXPECT_NE(m.find("net.graph:" + std::to_string(line) + ":"), std::string::npos) << m;
  EXPECT_NE(m.find("ghost"), std::string::npos);

  m = MessageOf([&] { LoadGraph("# h\nnet.graph.tier.0.colour=red\n", "f"); });
  EXPECT_NE(m.find("f:2: unknown key"), std::string::npos) << m;
  EXPECT_EQ(CodeOf([] { LoadGraph("net.graph.node.x.name=a\n"); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([] { LoadGraph("net.graph.node.0.host=h\n"); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([] { LoadGraph("other.key=1\n"); }), ErrorCode::kGraph);
  EXPECT_EQ(CodeOf([] { LoadGraph("no equals sign\n"); }), ErrorCode::kParse);
  m = MessageOf([&] {
    LoadGraph(SaveGraph(SingleNodeGraph()) + "net.graph.conn.3.from=DGT1\nnet.graph.conn.3.to=DST1\n", "g");
  });
  EXPECT_NE(m.find("duplicate connection"), std::string::npos) << m;
}

TEST(GraphFileTest, RandomGraphsRoundTrip) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 300; ++round) {
    auto g = RandomGraph(rng, false);
    auto text = SaveGraph(g);
    ASSERT_EQ(LoadGraph(text), g) << text;
    ASSERT_EQ(SaveGraph(LoadGraph(text)), text);
  }
}

// Writes entity lists as graph text without any checking.
std::string RawText(const std::vector<InstanceDef> &instances, const std::vector<NodeDef> &nodes,
                    const std::vector<TierDef> &tiers, const std::vector<NodeConnection> &conns) {
  std::string s;
  auto kv = [&](std::string k, const std::string &v) { s += "net.graph." + k + "=" + v + "\n"; };
  for (std::size_t i = 0; i < instances.size(); ++i) {
    kv("instance." + std::to_string(i) + ".name", instances[i].name);
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    kv("node." + std::to_string(i) + ".name", nodes[i].name);
    kv("node." + std::to_string(i) + ".host", nodes[i].host);
    if (!nodes[i].color.empty()) kv("node." + std::to_string(i) + ".color", nodes[i].color);
  }
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    auto p = "tier." + std::to_string(i) + ".";
    kv(p + "name", tiers[i].name);
    kv(p + "type", std::string(TierTypeName(tiers[i].type)));
    kv(p + "instance", tiers[i].instance);
    kv(p + "node", tiers[i].node);
    kv(p + "config", tiers[i].config);
    kv(p + "count", std::to_string(tiers[i].count));
  }
  for (std::size_t i = 0; i < conns.size(); ++i) {
    kv("conn." + std::to_string(i) + ".from", conns[i].from_tier);
    kv("conn." + std::to_string(i) + ".to", conns[i].to_tier);
  }
  return s;
}

TEST(GraphFileTest, LoadRejectsExactlyWhatEditsReject) {
  std::mt19937_64 rng(5);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const char *names[] = {"a", "b", "c", "d"};
  const TierType types[] = {TierType::kDST, TierType::kDGT, TierType::kDWT, TierType::kGMT};
  const char *colors[] = {"", "#000001", "#000002", "#00000g"};
  int accepted = 0, rejected = 0;
  for (int round = 0; round < 6000; ++round) {
    std::vector<InstanceDef> is;
    std::vector<NodeDef> ns;
    std::vector<TierDef> ts;
    std::vector<NodeConnection> cs;
    for (int i = pick(0, 2); i > 0; --i) is.push_back({names[pick(0, 2)]});
    for (int i = pick(0, 2); i > 0; --i) ns.push_back({names[pick(0, 2)], "h", colors[pick(0, 3)]});
    for (int i = pick(0, 4); i > 0; --i) {
      ts.push_back({names[pick(0, 3)], types[pick(0, 3)], names[pick(0, 2)], names[pick(0, 2)],
                    "c", static_cast<std::uint32_t>(pick(0, 2))});
    }
    for (int i = pick(0, 3); i > 0; --i) cs.push_back({names[pick(0, 3)], names[pick(0, 3)]});

    bool make_ok = true, edit_ok = true, load_ok = true;
    try {
      NetworkGraph::Make(is, ns, ts, cs);
    } catch (const Error &) {
      make_ok = false;
    }
    try {
      NetworkGraph g;
      for (auto &i : is) g = g.AddInstance(i);
      for (auto &n : ns) g = g.AddNode(n);
      for (auto &t : ts) g = g.AddTier(t);
      for (auto &c : cs) g = g.Connect(c.from_tier, c.to_tier);
    } catch (const Error &) {
      edit_ok = false;
    }
    try {
      LoadGraph(RawText(is, ns, ts, cs));
    } catch (const Error &) {
      load_ok = false;
    }
    ASSERT_EQ(make_ok, edit_ok) << RawText(is, ns, ts, cs);
    ASSERT_EQ(make_ok, load_ok) << RawText(is, ns, ts, cs);
    (make_ok ? accepted : rejected)++;
  }
  EXPECT_GT(accepted, 100);
  EXPECT_GT(rejected, 100);
}

// ---------------------------------------------------------------------------

TEST(TranslateTest, SingleNodeSequence) {
  auto plan = Translate(SingleNodeGraph());
  EXPECT_EQ(plan.Render(),
            "start GMT gmt.config\n"
            "start node alpha.node.config\n"
            "register\n"
            "allocate 1 DST dst.config 1\n"
            "allocate 1 DGT dgt.config 1 1\n"
            "allocate 1 DWT dwt.config 1 1\n"
            "allocate 1 DWT dwt.config 1 1\n");
  std::vector<std::string> subjects;
  for (const auto &s : plan.steps) subjects.push_back(s.subject);
  EXPECT_EQ(subjects, (std::vector<std::string>{"GMT1", "alpha", "alpha", "DST1", "DGT1", "DWT1",
                                                "DWT2"}));
  const auto &nc = plan.node_configs.at("alpha.node.config");
  EXPECT_EQ(nc.Get(keys::kNodeName), "alpha");
  EXPECT_EQ(nc.Get(keys::kNodeColor), std::string(kPalette[0]));
  EXPECT_EQ(nc.Get(keys::kNodeGmtHost), "true");
  EXPECT_EQ(plan.node_ids.at("alpha"), 1u);
  EXPECT_EQ(plan.dst_indices.at("DST1"), 1u);
}

TEST(TranslateTest, Errors) {
  EXPECT_EQ(CodeOf([] { Translate(SingleNodeGraph().RemoveTier("GMT1")); }), ErrorCode::kTranslation);
  EXPECT_EQ(CodeOf([] { Translate(SingleNodeGraph().Disconnect("DWT2", "DST1")); }),
            ErrorCode::kTranslation);
  EXPECT_EQ(CodeOf([] { Translate(NetworkGraph()); }), ErrorCode::kTranslation);
}

TEST(TranslateTest, WorkerBoundToSecondStore) {
  auto g = SingleNodeGraph()
               .AddTier({"DST2", TierType::kDST, "inst1", "alpha", "dst2.config", 1})
               .Disconnect("DWT2", "DST1")
               .Connect("DST2", "DWT2");
  auto plan = Translate(g);
  EXPECT_EQ(RenderCommand(plan.steps.back().command), "allocate 1 DWT dwt.config 2 1");
  EXPECT_EQ(plan.dst_indices.at("DST2"), 2u);
}

TEST(TranslateTest, NodeOrderAndGmtOnlyNode) {
  auto g = NetworkGraph()
               .AddInstance({"i"})
               .AddNode({"w1", "10.0.0.1", ""})
               .AddNode({"control", "10.0.0.2", ""})
               .AddNode({"w2", "10.0.0.3", ""})
               .AddTier({"gmt", TierType::kGMT, "i", "control", "gmt.config", 1})
               .AddTier({"store", TierType::kDST, "i", "w2", "dst.config", 1})
               .AddTier({"work", TierType::kDWT, "i", "w1", "dwt.config", 3})
               .Connect("work", "store");
  auto plan = Translate(g);
  EXPECT_EQ(plan.Render(),
            "start GMT gmt.config\n"
            "start node w1.node.config\n"
            "register\n"
            "start node w2.node.config\n"
            "register\n"
            "allocate 2 DST dst.config 1\n"
            "allocate 1 DWT dwt.config 1 3\n");
  EXPECT_FALSE(plan.node_configs.count("control.node.config"));
  EXPECT_EQ(plan.node_configs.at("w2.node.config").Get(keys::kNodeHost), "10.0.0.3");
}

// Independent reading of the ordering rule, checked over random graphs.
TEST(TranslateTest, TotalAndOrderedOnRandomCompleteGraphs) {
  std::mt19937_64 rng(9);
  for (int round = 0; round < 300; ++round) {
    auto g = RandomGraph(rng, true);
    ASSERT_FALSE(HasError(ValidateGraph(g)));
    auto plan = Translate(g);
    ASSERT_EQ(plan, Translate(g));
    ASSERT_TRUE(std::holds_alternative<cmd::StartGmt>(plan.steps[0].command));
    int phase = 0;
    std::uint32_t dsts = 0;
    for (std::size_t i = 1; i < plan.steps.size(); ++i) {
      const auto &c = plan.steps[i].command;
      int p = 0;
      if (auto *a = std::get_if<cmd::Allocate>(&c)) {
        p = a->tier_type == TierType::kDST ? 1 : a->tier_type == TierType::kDGT ? 2 : 3;
        if (a->tier_type == TierType::kDST) {
          ++dsts;
        } else {
          ASSERT_TRUE(a->dst_index);
          auto store = std::find_if(plan.dst_indices.begin(), plan.dst_indices.end(),
                                    [&](const auto &kv) { return kv.second == *a->dst_index; });
          ASSERT_NE(store, plan.dst_indices.end());
          ASSERT_TRUE(g.Connected(plan.steps[i].subject, store->first));
        }
        ASSERT_EQ(a->node_id, plan.node_ids.at(g.FindTier(plan.steps[i].subject)->node));
      }
      ASSERT_GE(p, phase) << plan.Render();
      phase = p;
      ASSERT_EQ(ParseCommand(RenderCommand(c)), c);
    }
    std::size_t expected = 1 + 2 * plan.node_ids.size() + g.tiers().size() - 1;
    ASSERT_EQ(plan.steps.size(), expected);
    ASSERT_EQ(dsts, plan.dst_indices.size());
  }
}

}  // namespace
}  // namespace tiernet
