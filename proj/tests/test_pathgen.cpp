#include <doctest.h>

#include <set>

#include "locfaults/interp.hpp"
#include "locfaults/pathgen.hpp"
#include "support.hpp"

using namespace locfaults;

namespace {

NodeId cond_by_loc(const Cfg& g, const std::string& rendered) {
  for (NodeId id : g.condition_nodes())
    if (g.node(id).loc.str() == rendered) return id;
  FAIL("no condition at ", rendered);
  return -1;
}

std::vector<std::string> soft_origins(const PathCsp& csp) {
  std::vector<std::string> out;
  for (const auto& [c, loc] : csp.soft) out.push_back(loc.str());
  return out;
}

std::vector<std::string> soft_texts(const PathCsp& csp) {
  std::vector<std::string> out;
  for (const auto& [c, loc] : csp.soft) out.push_back(c.str());
  return out;
}

bool whole_system_sat(const PathCsp& csp) {
  std::vector<Constraint> all = csp.hard;
  for (const auto& [c, loc] : csp.soft) all.push_back(c);
  return solve(make_csp(all, csp.vars)).sat();
}

const Counterexample kAbsMinusCe{{{"i", 0}, {"j", 1}}, {}};
const Counterexample kMinimumCe{{}, {{"tab", {3, 2, 1, 0}}}};

}  // namespace

TEST_CASE("propagation follows and flips branches on absminus") {
  Cfg g = lftest::dsa_of(lftest::load("absminus.mimp"), 1);
  NodeId c8 = cond_by_loc(g, "8"), c11 = cond_by_loc(g, "11");

  SUBCASE("counterexample path violates the postcondition") {
    PropagateResult r = propagate(g, kAbsMinusCe, {});
    CHECK(r.valuation.scalars.at("result_1") == -1);
    CHECK_FALSE(r.post_holds);
    CHECK(r.concrete_branch.at(c8) == Branch::Then);
    CHECK(r.concrete_branch.at(c11) == Branch::Else);
  }
  SUBCASE("flipping the second condition corrects the run") {
    PropagateResult r = propagate(g, kAbsMinusCe, {c11});
    CHECK(r.valuation.scalars.at("result_1") == 1);
    CHECK(r.post_holds);
  }
  SUBCASE("flipping only the first condition does not correct") {
    PropagateResult r = propagate(g, kAbsMinusCe, {c8});
    CHECK(r.valuation.scalars.at("k_1") == 0);
    CHECK_FALSE(r.post_holds);
  }
  SUBCASE("flipping both conditions corrects but is not minimal") {
    PropagateResult r = propagate(g, kAbsMinusCe, {c8, c11});
    CHECK(r.post_holds);
  }
}

TEST_CASE("a deviation that the path never reaches is an error") {
  ValidatedProgram vp = lftest::compile(
      "/*@ ensures (x == 0); */ int f (int a) {\n"
      "  int x = 0;\n"
      "  if (a > 0) {\n"
      "    if (a > 1) {\n"
      "      x = 2;\n"
      "    }\n"
      "    x = x + 1;\n"
      "  }\n"
      "}");
  Cfg g = lftest::dsa_of(vp, 1);
  NodeId outer = cond_by_loc(g, "3"), inner = cond_by_loc(g, "4");
  Counterexample ce{{{"a", 2}}, {}};

  // flipping the outer condition routes around the inner one
  CHECK_THROWS_AS(propagate(g, ce, {outer, inner}), Error);
  PropagateResult tolerant = propagate(g, ce, {outer, inner}, /*strict=*/false);
  CHECK_FALSE(tolerant.deviations_reached);
}

TEST_CASE("counterexample path system of absminus") {
  Cfg g = lftest::dsa_of(lftest::load("absminus.mimp"), 1);
  PathCsp csp = ce_path_csp(g, kAbsMinusCe);

  CHECK(soft_origins(csp) == std::vector<std::string>{"7", "9", "15"});
  CHECK(soft_texts(csp) == std::vector<std::string>{
                               "(k_0 == 0)", "(k_1 == (k_0 + 2))",
                               "(result_1 == (i_0 - j_0))"});
  // hard: the two input equalities plus the expanded postcondition
  REQUIRE(csp.hard.size() == 3);
  CHECK(csp.hard[0].str() == "(i_0 == 0)");
  CHECK(csp.hard[1].str() == "(j_0 == 1)");

  CHECK_FALSE(whole_system_sat(csp));
}

TEST_CASE("counterexample path system of minimum matches the eight constraints") {
  Cfg g = lftest::dsa_of(lftest::load("minimum.mimp"), 3);
  PathCsp csp = ce_path_csp(g, kMinimumCe);

  CHECK(soft_origins(csp) == std::vector<std::string>{"7", "8", "9:1.11", "9:1.13",
                                                      "9:2.11", "9:2.13", "9:3", "9:3"});
  CHECK(soft_texts(csp) ==
        std::vector<std::string>{"(min_0 == tab_0[0])", "(i_0 == 1)", "(min_1 == tab_0[1])",
                                 "(i_1 == (i_0 + 1))", "(min_2 == tab_0[2])",
                                 "(i_2 == (i_1 + 1))", "(i_3 == i_2)", "(min_3 == min_2)"});

  // the postcondition (last hard constraint) reads through the exit copy:
  // four cells compared against min_2, the copy target never appears
  std::string post = csp.hard.back().str();
  CHECK(post.find("min_2") != std::string::npos);
  CHECK(post.find("min_3") == std::string::npos);
  for (int cell = 0; cell < 4; ++cell)
    CHECK(post.find("tab_0[" + std::to_string(cell) + "]") != std::string::npos);

  // the return forwards min but is not a relaxation candidate
  bool return_is_hard = false;
  for (const auto& c : csp.hard)
    if (c.str().find("\\result") != std::string::npos) return_is_hard = true;
  CHECK(return_is_hard);

  // eight indicators when handed to the relaxation layer, and fully
  // constrained it stays unsatisfiable
  std::vector<Constraint> soft;
  for (const auto& [c, loc] : csp.soft) soft.push_back(c);
  Csp relaxable = add_y_vars(csp.hard, soft, csp.vars);
  CHECK(relaxable.indicator_vars.size() == 8);
  Csp forced = relaxable;
  for (size_t i = 1; i <= 8; ++i)
    forced.hard.push_back(
        Constraint{mk_cmp(Cmp::Eq, mk_var("y!" + std::to_string(i)), mk_lit(1))});
  CHECK_FALSE(solve(forced).sat());
}

TEST_CASE("vacuously satisfied postcondition is not a counterexample") {
  ValidatedProgram vp = lftest::compile("/*@ ensures true; */ int f (int a) { int x = 1; }");
  Cfg g = lftest::dsa_of(vp, 1);
  try {
    ce_path_csp(g, Counterexample{{{"a", 0}}, {}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == "NotACounterexample");
  }
}

TEST_CASE("deviated path system of absminus") {
  Cfg g = lftest::dsa_of(lftest::load("absminus.mimp"), 1);
  NodeId c11 = cond_by_loc(g, "11");
  PathCsp csp = deviated_path_csp(g, kAbsMinusCe, {c11});

  CHECK(soft_origins(csp) == std::vector<std::string>{"7", "9"});
  REQUIRE(csp.hard.size() == 3);
  CHECK(csp.hard[2].str() == "((k_1 == 1) && (i_0 != j_0))");
  CHECK_FALSE(whole_system_sat(csp));
}

TEST_CASE("deviated path system of minimum flips the third loop test") {
  Cfg g = lftest::dsa_of(lftest::load("minimum.mimp"), 3);
  NodeId c3 = cond_by_loc(g, "9:3");
  PathCsp csp = deviated_path_csp(g, kMinimumCe, {c3});

  CHECK(soft_origins(csp) == std::vector<std::string>{"7", "8", "9:1.11", "9:1.13",
                                                      "9:2.11", "9:2.13"});
  // the counterexample exited here, so the flip asserts the test itself
  CHECK(csp.hard.back().str() == "(i_2 < (4 - 1))");
  CHECK_FALSE(whole_system_sat(csp));
}

TEST_CASE("quantifier expansion") {
  SUBCASE("minimum postcondition expands to one atom per cell") {
    Cfg g = lftest::dsa_of(lftest::load("minimum.mimp"), 3);
    const auto& post = std::get<NPost>(g.node(g.exit).kind);
    BoolExprPtr e = expand_quantifiers(post.expr);
    int atoms = 0;
    std::function<void(const BoolExprPtr&)> count = [&](const BoolExprPtr& b) {
      if (const auto* a = std::get_if<BoolAnd>(&b->node)) {
        count(a->lhs);
        count(a->rhs);
      } else {
        ++atoms;
      }
    };
    count(e);
    CHECK(atoms == 4);
  }
  SUBCASE("empty range collapses to true") {
    BoolExprPtr fa = mk_forall("k", mk_lit(0), mk_lit(0),
                               mk_cmp(Cmp::Ge, mk_var("k"), mk_lit(0)));
    BoolExprPtr e = expand_quantifiers(fa);
    CHECK(std::get<BoolLit>(e->node).value);
  }
  SUBCASE("nested quantifiers expand over the index pairs") {
    // sortedness over 3 cells
    BoolExprPtr body = mk_cmp(Cmp::Le, mk_read("t", mk_var("p")), mk_read("t", mk_var("q")));
    BoolExprPtr inner =
        mk_forall("q", mk_bin('+', mk_var("p"), mk_lit(1)), mk_lit(3), body);
    BoolExprPtr outer = mk_forall("p", mk_lit(0), mk_lit(3), inner);
    BoolExprPtr e = expand_quantifiers(outer);

    std::set<std::string> atom_texts;
    std::function<void(const BoolExprPtr&)> collect = [&](const BoolExprPtr& b) {
      if (const auto* a = std::get_if<BoolAnd>(&b->node)) {
        collect(a->lhs);
        collect(a->rhs);
      } else if (!std::holds_alternative<BoolLit>(b->node)) {
        atom_texts.insert(expr_str(b));
      }
    };
    collect(e);

    // oracle: enumerate the pairs directly
    std::set<std::string> expected;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q)
        expected.insert("(t[" + std::to_string(p) + "] <= t[" + std::to_string(q) + "])");
    CHECK(atom_texts == expected);
  }
  SUBCASE("non-constant bounds are rejected") {
    BoolExprPtr fa = mk_forall("k", mk_lit(0), mk_var("n"),
                               mk_cmp(Cmp::Ge, mk_var("k"), mk_lit(0)));
    try {
      expand_quantifiers(fa);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == "UnboundedQuantifier");
    }
  }
}

TEST_CASE("condition flipping") {
  BoolExprPtr second = mk_and(mk_cmp(Cmp::Eq, mk_var("k"), mk_lit(1)),
                              mk_cmp(Cmp::Ne, mk_var("i"), mk_var("j")));
  CHECK(flip(second, Branch::Else).str() == "((k == 1) && (i != j))");

  BoolExprPtr le = mk_cmp(Cmp::Le, mk_var("i"), mk_var("j"));
  CHECK(flip(le, Branch::Then).str() == "(i > j)");

  BoolExprPtr conj = mk_and(mk_cmp(Cmp::Lt, mk_var("a"), mk_var("b")),
                            mk_cmp(Cmp::Eq, mk_var("c"), mk_var("d")));
  CHECK(flip(conj, Branch::Then).str() == "((a >= b) || (c != d))");
}

TEST_CASE("soft origins reference source lines") {
  for (const char* name : {"absminus.mimp", "minimum.mimp", "squareroot.mimp"}) {
    ValidatedProgram vp = lftest::load(name);
    Cfg g = lftest::dsa_of(vp, name == std::string("squareroot.mimp") ? 10 : 3);
    Counterexample ce;
    if (name == std::string("absminus.mimp")) ce = kAbsMinusCe;
    if (name == std::string("minimum.mimp")) ce = kMinimumCe;
    PathCsp csp = ce_path_csp(g, ce);

    std::set<int> lines = vp.stmt_lines;
    for (const auto& s : vp.program.body)
      if (const auto* w = std::get_if<SWhile>(&s->node)) (void)w;
    // loop condition lines are statement lines too (the while itself)
    for (const auto& [c, loc] : csp.soft) {
      INFO(name, " origin ", loc.str());
      CHECK(lines.count(loc.line) == 1);
    }
  }
}

TEST_CASE("propagation agrees with the interpreter on input grids") {
  SUBCASE("absminus") {
    ValidatedProgram vp = lftest::load("absminus.mimp");
    Cfg g = lftest::dsa_of(vp, 1);
    Interpreter it(vp);
    for (long long i = -3; i <= 3; ++i) {
      for (long long j = -3; j <= 3; ++j) {
        Counterexample ce{{{"i", i}, {"j", j}}, {}};
        InterpResult ref = it.run(ce);
        PropagateResult got = propagate(g, ce, {});
        CHECK(got.post_holds == ref.post_holds);
        CHECK(got.valuation.scalars.at("result_1") == ref.scalars.at("result"));
        CHECK(got.valuation.scalars.at("k_1") == ref.scalars.at("k"));
      }
    }
  }
  SUBCASE("minimum over small arrays") {
    ValidatedProgram vp = lftest::load("minimum.mimp");
    Cfg g = lftest::dsa_of(vp, 3);
    Interpreter it(vp);
    for (long long a = 0; a < 3; ++a)
      for (long long b = 0; b < 3; ++b)
        for (long long c = 0; c < 3; ++c)
          for (long long d = 0; d < 3; ++d) {
            Counterexample ce{{}, {{"tab", {a, b, c, d}}}};
            InterpResult ref = it.run(ce);
            PropagateResult got = propagate(g, ce, {});
            CHECK(got.post_holds == ref.post_holds);
            CHECK(got.valuation.scalars.at("min_3") == ref.scalars.at("min"));
          }
  }
}

TEST_CASE("a bound that cuts the run short raises the flag") {
  Cfg g = lftest::dsa_of(lftest::load("minimum.mimp"), 1);
  PropagateResult r = propagate(g, kMinimumCe, {});
  CHECK(r.unroll_insufficient);
}
