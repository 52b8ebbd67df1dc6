#pragma once

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "locfaults/cfg.hpp"
#include "locfaults/parser.hpp"
#include "locfaults/semantics.hpp"

namespace lftest {

inline std::string bench_path(const std::string& name) {
  return std::string(LF_BENCH_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string bench_source(const std::string& name) {
  return read_file(bench_path(name));
}

inline locfaults::ValidatedProgram compile(const std::string& text) {
  return locfaults::check_semantics(locfaults::parse_program(text));
}

inline locfaults::ValidatedProgram load(const std::string& name) {
  return compile(bench_source(name));
}

inline locfaults::Cfg dsa_of(const locfaults::ValidatedProgram& vp, int b) {
  return locfaults::to_dsa(locfaults::unroll(locfaults::build_cfg(vp), b));
}

}  // namespace lftest

#include <optional>
#include <random>

#include "locfaults/pathgen.hpp"

namespace lftest {

// Random hard/soft systems in the shape the path extraction produces:
// an input pinned by the hard part, a chain of soft assignment constraints,
// and a hard requirement on the chain's tail. Returns nullopt when the draw
// happens to be satisfiable.
inline std::optional<locfaults::PathCsp> random_infeasible_csp(std::mt19937& rng) {
  using namespace locfaults;
  auto pick = [&](long long lo, long long hi) {
    return std::uniform_int_distribution<long long>(lo, hi)(rng);
  };

  int nvars = static_cast<int>(pick(3, 5));
  PathCsp csp;
  std::vector<std::string> names;
  for (int i = 0; i < nvars; ++i) {
    names.push_back("v" + std::to_string(i));
    csp.vars[names.back()] = Domain{-5, 5};
  }

  csp.hard.push_back(
      Constraint{mk_cmp(Cmp::Eq, mk_var(names[0]), mk_lit(pick(-2, 2)))});

  int nsoft = static_cast<int>(pick(3, 6));
  for (int i = 0; i < nsoft; ++i) {
    std::string target = names[static_cast<size_t>(pick(1, nvars - 1))];
    IntExprPtr rhs = mk_bin('+', mk_var(names[static_cast<size_t>(pick(0, nvars - 1))]),
                            mk_lit(pick(-2, 2)));
    if (pick(0, 2) == 0)
      rhs = mk_bin('+', rhs, mk_var(names[static_cast<size_t>(pick(0, nvars - 1))]));
    csp.soft.emplace_back(Constraint{mk_cmp(Cmp::Eq, mk_var(target), rhs)},
                          LocRef{i + 1, {}});
  }

  Cmp goal = static_cast<Cmp>(pick(0, 5));
  csp.hard.push_back(Constraint{
      mk_cmp(goal, mk_var(names[static_cast<size_t>(pick(1, nvars - 1))]), mk_lit(pick(-8, 8)))});

  std::vector<Constraint> all = csp.hard;
  for (const auto& [c, loc] : csp.soft) all.push_back(c);
  if (solve(make_csp(all, csp.vars)).sat()) return std::nullopt;
  return csp;
}

// Hand-built single-assignment graphs for the exploration tests.
class SynthBuilder {
 public:
  locfaults::NodeId pre() { return add(locfaults::NPre{}, 0); }

  locfaults::NodeId cond(int line) {
    // conditions read the lone input and are true under x = 0
    return add(locfaults::NCond{locfaults::mk_cmp(locfaults::Cmp::Eq,
                                                  locfaults::mk_var("x_0"),
                                                  locfaults::mk_lit(0))},
               line);
  }

  locfaults::NodeId assign(int line, const std::string& base, int version,
                           locfaults::IntExprPtr rhs) {
    locfaults::CfgAssign a;
    a.base = base;
    a.version = version;
    a.rhs = std::move(rhs);
    a.loc = locfaults::LocRef{line, {}};
    return add(locfaults::NBlock{{a}, nullptr}, line);
  }

  locfaults::NodeId post(locfaults::BoolExprPtr expr) {
    return add(locfaults::NPost{std::move(expr)}, 0);
  }

  void then_to(locfaults::NodeId a, locfaults::NodeId b) { g_.out[size_t(a)].then_to = b; }
  void else_to(locfaults::NodeId a, locfaults::NodeId b) { g_.out[size_t(a)].else_to = b; }
  void seq_to(locfaults::NodeId a, locfaults::NodeId b) { g_.out[size_t(a)].seq_to = b; }

  locfaults::Cfg finish(locfaults::NodeId entry, locfaults::NodeId exit) {
    g_.entry = entry;
    g_.exit = exit;
    g_.dsa_form = true;
    return std::move(g_);
  }

 private:
  locfaults::NodeId add(auto kind, int line) {
    locfaults::NodeId id = static_cast<locfaults::NodeId>(g_.nodes.size());
    g_.nodes.push_back(
        locfaults::CfgNode{id, locfaults::LocRef{line, {}}, {std::move(kind)}});
    g_.out.push_back({});
    return id;
  }

  locfaults::Cfg g_;
};

// The pruning-illustration graph: sixteen conditions, three correcting paths
// (two of size five, one of size six), every other exit failing.
inline locfaults::Cfg marking_example_cfg() {
  using namespace locfaults;
  SynthBuilder b;
  NodeId pre = b.pre();
  std::map<int, NodeId> c;
  for (int line = 1; line <= 16; ++line) c[line] = b.cond(line);
  NodeId good = b.assign(100, "ok", 1, mk_lit(1));
  NodeId bad = b.assign(101, "ok", 1, mk_lit(0));
  NodeId post = b.post(mk_cmp(Cmp::Eq, mk_var("ok_1"), mk_lit(1)));

  b.seq_to(pre, c[1]);
  auto wire = [&](int from, NodeId then_t, NodeId else_t) {
    b.then_to(c[from], then_t);
    b.else_to(c[from], else_t);
  };
  wire(1, c[8], c[2]);
  wire(2, bad, c[3]);
  wire(3, bad, c[4]);
  wire(4, bad, c[5]);
  wire(5, c[6], bad);
  wire(6, c[7], bad);
  wire(7, bad, good);
  wire(8, bad, c[9]);
  wire(9, c[13], c[10]);
  wire(10, c[11], bad);
  wire(11, bad, c[12]);
  wire(12, bad, c[7]);
  wire(13, bad, c[14]);
  wire(14, bad, c[15]);
  wire(15, bad, c[16]);
  wire(16, bad, c[7]);
  b.seq_to(good, post);
  b.seq_to(bad, post);
  return b.finish(pre, post);
}

// Small graph where a pair containing an already-marked condition must be
// skipped while an unmarked pair is still found.
inline locfaults::Cfg member_pruning_cfg() {
  using namespace locfaults;
  SynthBuilder b;
  NodeId pre = b.pre();
  NodeId a = b.cond(1), bb = b.cond(2), cc = b.cond(3), c2 = b.cond(4);
  NodeId s0 = b.assign(11, "s", 1, mk_lit(0));
  NodeId s1 = b.assign(12, "s", 1, mk_lit(1));
  NodeId ok_s_c = b.assign(13, "ok", 1, mk_var("s_1"));
  NodeId ok_0_c = b.assign(14, "ok", 1, mk_lit(0));
  NodeId ok_s_c2 = b.assign(15, "ok", 1, mk_var("s_1"));
  NodeId ok_1_c2 = b.assign(16, "ok", 1, mk_lit(1));
  NodeId post = b.post(mk_cmp(Cmp::Eq, mk_var("ok_1"), mk_lit(1)));

  b.seq_to(pre, a);
  b.then_to(a, s0);
  b.else_to(a, s1);
  b.seq_to(s0, bb);
  b.seq_to(s1, bb);
  b.then_to(bb, cc);
  b.else_to(bb, c2);
  b.then_to(cc, ok_s_c);
  b.else_to(cc, ok_0_c);
  b.then_to(c2, ok_s_c2);
  b.else_to(c2, ok_1_c2);
  for (NodeId n : {ok_s_c, ok_0_c, ok_s_c2, ok_1_c2}) b.seq_to(n, post);
  return b.finish(pre, post);
}

// Loop-free random programs for the oracle-equivalence property.
inline std::string random_loop_free_program(std::mt19937& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const char* vars[] = {"a", "b", "x", "y"};
  auto rnd_term = [&]() -> std::string {
    int r = pick(0, 4);
    if (r == 0) return std::to_string(pick(-3, 3));
    return vars[pick(0, 3)];
  };
  auto rnd_expr = [&]() -> std::string {
    std::string e = rnd_term();
    if (pick(0, 1)) e += (pick(0, 1) ? " + " : " - ") + rnd_term();
    return e;
  };
  const char* cmps[] = {"==", "!=", "<", "<=", ">", ">="};
  auto rnd_cond = [&]() -> std::string {
    return "(" + rnd_expr() + " " + cmps[pick(0, 5)] + " " + rnd_expr() + ")";
  };

  int conds = 0;
  std::string body;
  std::function<void(int, int)> gen_block = [&](int depth, int indent) {
    std::string ind(static_cast<size_t>(indent), ' ');
    int stmts = pick(1, 2);
    for (int s = 0; s < stmts; ++s) {
      bool want_if = conds < 5 && depth < 2 && pick(0, 2) > 0;
      if (want_if) {
        ++conds;
        body += ind + "if " + rnd_cond() + " {\n";
        gen_block(depth + 1, indent + 2);
        if (pick(0, 1)) {
          body += ind + "} else {\n";
          gen_block(depth + 1, indent + 2);
        }
        body += ind + "}\n";
      } else {
        body += ind + std::string(vars[pick(2, 3)]) + " = " + rnd_expr() + ";\n";
      }
    }
  };
  gen_block(0, 2);

  std::string post = rnd_cond();
  return "/*@ ensures " + post + "; */\nint f (int a, int b) {\n  int x = " +
         std::to_string(pick(-2, 2)) + ";\n  int y = " + std::to_string(pick(-2, 2)) +
         ";\n" + body + "}\n";
}

}  // namespace lftest
