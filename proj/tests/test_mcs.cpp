#include <doctest.h>

#include <algorithm>
#include <random>

#include "locfaults/mcs.hpp"
#include "support.hpp"

using namespace locfaults;

namespace {

NodeId cond_by_loc(const Cfg& g, const std::string& rendered) {
  for (NodeId id : g.condition_nodes())
    if (g.node(id).loc.str() == rendered) return id;
  FAIL("no condition at ", rendered);
  return -1;
}

std::vector<std::vector<std::string>> rendered(const std::vector<Mcs>& mcss) {
  std::vector<std::vector<std::string>> out;
  for (const auto& m : mcss) {
    std::vector<std::string> locs;
    for (const auto& l : m.locs()) locs.push_back(l.str());
    out.push_back(locs);
  }
  return out;
}

const Counterexample kAbsMinusCe{{{"i", 0}, {"j", 1}}, {}};
const Counterexample kMinimumCe{{}, {{"tab", {3, 2, 1, 0}}}};

}  // namespace

TEST_CASE("absminus counterexample path has a single correction subset") {
  Cfg g = lftest::dsa_of(lftest::load("absminus.mimp"), 1);
  PathCsp csp = ce_path_csp(g, kAbsMinusCe);

  auto mcss = enumerate_mcs(csp, 3);
  CHECK(rendered(mcss) == std::vector<std::vector<std::string>>{{"15"}});
  for (const auto& m : mcss) CHECK(is_valid_mcs(csp, m));

  CHECK(mcs_index_sets(brute_force_mcs(csp, 3)) == mcs_index_sets(mcss));
}

TEST_CASE("absminus deviated path yields the two initialization suspects") {
  Cfg g = lftest::dsa_of(lftest::load("absminus.mimp"), 1);
  PathCsp csp = deviated_path_csp(g, kAbsMinusCe, {cond_by_loc(g, "11")});

  auto mcss = enumerate_mcs(csp, 3);
  CHECK(rendered(mcss) == std::vector<std::vector<std::string>>{{"7"}, {"9"}});
  for (const auto& m : mcss) CHECK(is_valid_mcs(csp, m));
}

TEST_CASE("minimum counterexample path blames the second iteration update") {
  Cfg g = lftest::dsa_of(lftest::load("minimum.mimp"), 3);
  PathCsp csp = ce_path_csp(g, kMinimumCe);

  auto mcss = enumerate_mcs(csp, 3);
  CHECK(rendered(mcss) == std::vector<std::vector<std::string>>{{"9:2.11"}});
  CHECK(mcs_index_sets(brute_force_mcs(csp, 3)) == mcs_index_sets(mcss));
}

TEST_CASE("minimum deviated path blames the index chain") {
  Cfg g = lftest::dsa_of(lftest::load("minimum.mimp"), 3);
  PathCsp csp = deviated_path_csp(g, kMinimumCe, {cond_by_loc(g, "9:3")});

  auto mcss = brute_force_mcs(csp, 3);
  CHECK(rendered(mcss) ==
        std::vector<std::vector<std::string>>{{"8"}, {"9:1.13"}, {"9:2.13"}});
  CHECK(mcs_index_sets(enumerate_mcs(csp, 3)) == mcs_index_sets(mcss));
}

TEST_CASE("a system whose hard part is already unsatisfiable has no corrections") {
  PathCsp csp;
  csp.vars["x"] = Domain{0, 5};
  csp.hard.push_back(Constraint{mk_cmp(Cmp::Eq, mk_var("x"), mk_lit(1))});
  csp.hard.push_back(Constraint{mk_cmp(Cmp::Eq, mk_var("x"), mk_lit(2))});
  csp.soft.emplace_back(Constraint{mk_cmp(Cmp::Ge, mk_var("x"), mk_lit(0))}, LocRef{1, {}});

  CHECK(brute_force_mcs(csp, 3).empty());
  CHECK(enumerate_mcs(csp, 3).empty());
}

TEST_CASE("a satisfiable system is rejected up front") {
  PathCsp csp;
  csp.vars["x"] = Domain{0, 5};
  csp.hard.push_back(Constraint{mk_cmp(Cmp::Ge, mk_var("x"), mk_lit(0))});
  csp.soft.emplace_back(Constraint{mk_cmp(Cmp::Le, mk_var("x"), mk_lit(3))}, LocRef{1, {}});
  CHECK_THROWS_AS(enumerate_mcs(csp, 3), Error);
  CHECK_THROWS_AS(brute_force_mcs(csp, 3), Error);
}

TEST_CASE("oversized soft sets are refused by the exhaustive oracle") {
  PathCsp csp;
  csp.vars["x"] = Domain{0, 1};
  csp.hard.push_back(Constraint{mk_cmp(Cmp::Eq, mk_var("x"), mk_lit(0))});
  for (int i = 0; i < 13; ++i)
    csp.soft.emplace_back(Constraint{mk_cmp(Cmp::Eq, mk_var("x"), mk_lit(1))},
                          LocRef{i + 1, {}});
  CHECK_THROWS_AS(brute_force_mcs(csp, 3), Error);
}

TEST_CASE("blocking clauses name the member indicators") {
  PathCsp csp;
  csp.vars["x"] = Domain{0, 9};
  for (int i = 0; i < 5; ++i)
    csp.soft.emplace_back(Constraint{mk_cmp(Cmp::Eq, mk_var("x"), mk_lit(i))},
                          LocRef{i + 1, {}});

  Mcs single = detail::make_mcs(csp, {2});
  CHECK(blocking_clause(single).str() == "(y!3 == 1)");

  Mcs pair = detail::make_mcs(csp, {0, 3});
  CHECK(blocking_clause(pair).str() == "((y!1 == 1) || (y!4 == 1))");
}

TEST_CASE("blocking the first correction leaves exactly the second") {
  Cfg g = lftest::dsa_of(lftest::load("absminus.mimp"), 1);
  PathCsp path = deviated_path_csp(g, kAbsMinusCe, {cond_by_loc(g, "11")});

  std::vector<Constraint> soft;
  for (const auto& [c, loc] : path.soft) soft.push_back(c);
  Csp layer = with_at_most(add_y_vars(path.hard, soft, path.vars), 1);

  SolveResult first = solve(layer);
  REQUIRE(first.sat());
  CHECK_FALSE(first.assignment.indicator_values[0]);  // k_0 = 0 relaxed first
  CHECK(first.assignment.indicator_values[1]);

  layer.hard.push_back(blocking_clause(detail::make_mcs(path, {0})));
  SolveResult second = solve(layer);
  REQUIRE(second.sat());
  CHECK(second.assignment.indicator_values[0]);
  CHECK_FALSE(second.assignment.indicator_values[1]);

  layer.hard.push_back(blocking_clause(detail::make_mcs(path, {1})));
  CHECK_FALSE(solve(layer).sat());
}

TEST_CASE("enumeration matches the exhaustive oracle on random systems") {
  std::mt19937 rng(4242);
  int done = 0, guard = 0;
  while (done < 60 && guard < 4000) {
    ++guard;
    auto maybe = lftest::random_infeasible_csp(rng);
    if (!maybe) continue;
    ++done;
    auto fast = enumerate_mcs(*maybe, 3);
    auto slow = brute_force_mcs(*maybe, 3);
    REQUIRE(mcs_index_sets(fast) == mcs_index_sets(slow));
    for (const auto& m : fast) CHECK(is_valid_mcs(*maybe, m));

    // no result may contain another
    for (size_t a = 0; a < fast.size(); ++a)
      for (size_t b = 0; b < fast.size(); ++b) {
        if (a == b) continue;
        CHECK_FALSE(std::includes(fast[b].soft_indices.begin(), fast[b].soft_indices.end(),
                                  fast[a].soft_indices.begin(), fast[a].soft_indices.end()));
      }
  }
  CHECK(done == 60);
}

TEST_CASE("results are stable under soft-list permutation") {
  std::mt19937 rng(99);
  int done = 0, guard = 0;
  while (done < 12 && guard < 1000) {
    ++guard;
    auto maybe = lftest::random_infeasible_csp(rng);
    if (!maybe) continue;
    ++done;

    auto loc_sets = [](const std::vector<Mcs>& v) {
      std::vector<std::vector<std::string>> out;
      for (const auto& m : v) {
        std::vector<std::string> one;
        for (const auto& l : m.locs()) one.push_back(l.str());
        std::sort(one.begin(), one.end());
        out.push_back(one);
      }
      std::sort(out.begin(), out.end());
      return out;
    };

    PathCsp shuffled = *maybe;
    std::shuffle(shuffled.soft.begin(), shuffled.soft.end(), rng);
    CHECK(loc_sets(enumerate_mcs(*maybe, 3)) == loc_sets(enumerate_mcs(shuffled, 3)));
  }
  CHECK(done == 12);
}
