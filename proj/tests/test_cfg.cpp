#include <doctest.h>

#include <functional>
#include <map>
#include <set>

#include "locfaults/cfg.hpp"
#include "support.hpp"

using namespace locfaults;

namespace {

int count_conds(const Cfg& g) {
  return static_cast<int>(g.condition_nodes().size());
}

int count_blocks(const Cfg& g) {
  int n = 0;
  for (const auto& node : g.nodes)
    if (node.is_block()) ++n;
  return n;
}

std::vector<std::vector<NodeId>> all_paths(const Cfg& g) {
  std::vector<std::vector<NodeId>> paths;
  std::vector<NodeId> cur;
  std::function<void(NodeId)> walk = [&](NodeId id) {
    cur.push_back(id);
    const Cfg::Out& o = g.out[static_cast<size_t>(id)];
    if (o.then_to < 0 && o.else_to < 0 && o.seq_to < 0) {
      paths.push_back(cur);
    } else {
      for (NodeId t : {o.then_to, o.else_to, o.seq_to})
        if (t >= 0) walk(t);
    }
    cur.pop_back();
  };
  walk(g.entry);
  return paths;
}

const NBlock& block_at(const Cfg& g, NodeId id) {
  const auto* b = std::get_if<NBlock>(&g.node(id).kind);
  REQUIRE(b);
  return *b;
}

}  // namespace

TEST_CASE("absminus graph has the diamond shape") {
  Cfg g = build_cfg(lftest::load("absminus.mimp"));
  CHECK(count_conds(g) == 2);
  CHECK(count_blocks(g) == 4);
  CHECK(is_acyclic(g));

  for (const auto& n : g.nodes) {
    const Cfg::Out& o = g.out[static_cast<size_t>(n.id)];
    if (n.is_cond()) {
      CHECK(o.then_to >= 0);
      CHECK(o.else_to >= 0);
      CHECK(o.seq_to < 0);
    } else if (n.is_block()) {
      CHECK(o.seq_to >= 0);
    }
  }

  auto preds = g.predecessors();
  for (const auto& n : g.nodes) {
    if (n.id != g.entry) CHECK(!preds[static_cast<size_t>(n.id)].empty());
  }
}

TEST_CASE("straight-line program yields a single block") {
  ValidatedProgram vp = lftest::compile(
      "/*@ ensures (x == 2); */ int f (int a) {\n  int x = 1;\n  x = x + 1;\n}");
  Cfg g = build_cfg(vp);
  CHECK(count_conds(g) == 0);
  CHECK(count_blocks(g) == 1);
  NodeId blk = g.succ(g.entry, BranchKind::Seq);
  CHECK(g.node(blk).is_block());
  CHECK(g.succ(blk, BranchKind::Seq) == g.exit);
}

TEST_CASE("empty body wires entry straight to the postcondition") {
  Cfg g = build_cfg(lftest::compile("/*@ ensures true; */ int f (int a) { }"));
  CHECK(g.succ(g.entry, BranchKind::Seq) == g.exit);
}

TEST_CASE("minimum graph is cyclic until unrolled") {
  Cfg g = build_cfg(lftest::load("minimum.mimp"));
  CHECK_FALSE(is_acyclic(g));
  CHECK_THROWS_AS(to_dsa(g), Error);

  Cfg u = unroll(g, 3);
  CHECK(is_acyclic(u));
  CHECK(u.unroll_bound == 3);
}

TEST_CASE("unrolling replicates the loop b times with iteration tags") {
  Cfg u = unroll(build_cfg(lftest::load("minimum.mimp")), 3);

  std::vector<std::string> loop_conds, inner_conds;
  for (NodeId id : u.condition_nodes()) {
    const LocRef& loc = u.node(id).loc;
    if (loc.line == 9) loop_conds.push_back(loc.str());
    if (loc.line == 10) inner_conds.push_back(loc.str());
  }
  CHECK(loop_conds == std::vector<std::string>{"9:1", "9:2", "9:3"});
  CHECK(inner_conds == std::vector<std::string>{"9:1.10", "9:2.10", "9:3.10"});
}

TEST_CASE("unrolling a loop-free graph changes nothing") {
  Cfg g = build_cfg(lftest::load("absminus.mimp"));
  Cfg u = unroll(g, 5);
  REQUIRE(g.nodes.size() == u.nodes.size());
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    CHECK(g.nodes[i].loc == u.nodes[i].loc);
    CHECK(g.nodes[i].kind.index() == u.nodes[i].kind.index());
    CHECK(g.out[i].then_to == u.out[i].then_to);
    CHECK(g.out[i].else_to == u.out[i].else_to);
    CHECK(g.out[i].seq_to == u.out[i].seq_to);
  }
}

TEST_CASE("nested loops unroll recursively with the same bound") {
  ValidatedProgram vp = lftest::compile(
      "/*@ ensures (s >= 0); */ int f (int n) {\n"
      "  int s = 0;\n"
      "  int i = 0;\n"
      "  while (i < n) {\n"
      "    int j = 0;\n"
      "    while (j < n) {\n"
      "      s = s + 1;\n"
      "      j = j + 1;\n"
      "    }\n"
      "    i = i + 1;\n"
      "  }\n"
      "}");
  const int b = 2;
  Cfg u = unroll(build_cfg(vp), b);

  // independent tally of conditions per nesting depth
  int outer = 0, inner = 0;
  for (NodeId id : u.condition_nodes()) {
    const LocRef& loc = u.node(id).loc;
    if (loc.ctx.size() == 1) ++outer;
    if (loc.ctx.size() == 2) ++inner;
  }
  CHECK(outer == b);
  CHECK(inner == b * b);

  std::set<std::string> tags;
  for (NodeId id : u.condition_nodes())
    if (u.node(id).loc.ctx.size() == 2) tags.insert(u.node(id).loc.str());
  CHECK(tags.count("4:1.6:1"));
  CHECK(tags.count("4:2.6:2"));
}

TEST_CASE("single-assignment rewrite of absminus matches the displayed names") {
  Cfg g = to_dsa(unroll(build_cfg(lftest::load("absminus.mimp")), 1));
  CHECK(g.dsa_form);

  NodeId cond8 = -1, cond11 = -1;
  for (NodeId id : g.condition_nodes()) {
    if (g.node(id).loc.line == 8) cond8 = id;
    if (g.node(id).loc.line == 11) cond11 = id;
  }
  REQUIRE(cond8 >= 0);
  REQUIRE(cond11 >= 0);

  const NBlock& thenb = block_at(g, g.succ(cond8, BranchKind::Then));
  REQUIRE(thenb.assigns.size() == 1);
  CHECK(thenb.assigns[0].str() == "k_1 = (k_0 + 2)");
  CHECK_FALSE(thenb.assigns[0].is_copy);

  const NBlock& elseb = block_at(g, g.succ(cond8, BranchKind::Else));
  REQUIRE(elseb.assigns.size() == 1);
  CHECK(elseb.assigns[0].is_copy);
  CHECK(elseb.assigns[0].str() == "k_1 = k_0");

  const NBlock& rthen = block_at(g, g.succ(cond11, BranchKind::Then));
  const NBlock& relse = block_at(g, g.succ(cond11, BranchKind::Else));
  CHECK(rthen.assigns[0].str() == "result_1 = (j_0 - i_0)");
  CHECK(relse.assigns[0].str() == "result_1 = (i_0 - j_0)");
  CHECK(g.succ(g.succ(cond11, BranchKind::Then), BranchKind::Seq) == g.exit);
  CHECK(g.succ(g.succ(cond11, BranchKind::Else), BranchKind::Seq) == g.exit);

  CHECK(expr_str(std::get<NCond>(g.node(cond11).kind).expr) ==
        "((k_1 == 1) && (i_0 != j_0))");
}

TEST_CASE("single assignment on a one-statement program introduces no copies") {
  Cfg g = to_dsa(unroll(
      build_cfg(lftest::compile("/*@ ensures (x == 1); */ int f (int a) { int x = 1; }")),
      1));
  int copies = 0;
  for (const auto& n : g.nodes)
    if (n.is_block())
      for (const auto& a : std::get<NBlock>(n.kind).assigns)
        if (a.is_copy) ++copies;
  CHECK(copies == 0);

  NodeId blk = g.succ(g.entry, BranchKind::Seq);
  CHECK(block_at(g, blk).assigns[0].str() == "x_0 = 1");
}

TEST_CASE("minimum unrolled three times carries loop-exit copies") {
  Cfg g = lftest::dsa_of(lftest::load("minimum.mimp"), 3);

  std::map<std::string, std::vector<std::string>> exit_copies;
  for (NodeId id : g.condition_nodes()) {
    const LocRef& loc = g.node(id).loc;
    if (loc.line != 9) continue;
    const NBlock& copy = block_at(g, g.succ(id, BranchKind::Else));
    std::vector<std::string> texts;
    for (const auto& a : copy.assigns) {
      CHECK(a.is_copy);
      texts.push_back(a.str());
    }
    exit_copies[loc.str()] = texts;
  }
  CHECK(exit_copies["9:1"] == std::vector<std::string>{"i_3 = i_0", "min_3 = min_0"});
  CHECK(exit_copies["9:2"] == std::vector<std::string>{"i_3 = i_1", "min_3 = min_1"});
  CHECK(exit_copies["9:3"] == std::vector<std::string>{"i_3 = i_2", "min_3 = min_2"});

  std::set<std::string> inner_copies;
  for (NodeId id : g.condition_nodes()) {
    if (g.node(id).loc.line != 10) continue;
    const NBlock& copy = block_at(g, g.succ(id, BranchKind::Else));
    for (const auto& a : copy.assigns) inner_copies.insert(a.str());
  }
  CHECK(inner_copies ==
        std::set<std::string>{"min_1 = min_0", "min_2 = min_1", "min_3 = min_2"});

  const auto& post = std::get<NPost>(g.node(g.exit).kind);
  CHECK(expr_str(post.expr).find("min_3") != std::string::npos);
}

TEST_CASE("every path assigns each versioned name at most once") {
  for (const char* name : {"absminus.mimp", "minimum.mimp", "bubblesort.mimp"}) {
    Cfg g = lftest::dsa_of(lftest::load(name), 3);
    for (const auto& path : all_paths(g)) {
      std::set<std::string> targets;
      for (NodeId id : path) {
        const auto* blk = std::get_if<NBlock>(&g.node(id).kind);
        if (!blk) continue;
        for (const auto& a : blk->assigns) {
          INFO(name, " assigns ", a.str());
          CHECK(targets.insert(a.target_name()).second);
        }
      }
    }
  }
}

TEST_CASE("dot dump names conditions by location") {
  Cfg g = lftest::dsa_of(lftest::load("minimum.mimp"), 2);
  std::string dot = to_dot(g);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("9:2") != std::string::npos);
  CHECK(dot.find("POST") != std::string::npos);
}
