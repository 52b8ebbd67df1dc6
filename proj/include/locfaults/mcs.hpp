#pragma once

#include <algorithm>
#include <vector>

#include "locfaults/pathgen.hpp"
#include "locfaults/solver.hpp"

namespace locfaults {

// A minimal correction subset of the soft constraints: removing its members
// makes the system satisfiable, and no proper subset has that property.
// (The dual notion, an irreducible infeasible subset whose every proper
// subset is satisfiable, is not enumerated here; localization only needs
// corrections.)
struct Mcs {
  std::vector<int> soft_indices;  // ascending indices into PathCsp.soft
  std::vector<std::pair<Constraint, LocRef>> members;

  std::vector<LocRef> locs() const {
    std::vector<LocRef> out;
    for (const auto& [c, loc] : members) out.push_back(loc);
    return out;
  }
};

namespace detail {

inline Mcs make_mcs(const PathCsp& csp, std::vector<int> indices) {
  std::sort(indices.begin(), indices.end());
  Mcs m;
  m.soft_indices = std::move(indices);
  for (int i : m.soft_indices) m.members.push_back(csp.soft[static_cast<size_t>(i)]);
  return m;
}

inline Csp base_system(const PathCsp& csp) {
  std::vector<Constraint> soft;
  for (const auto& [c, loc] : csp.soft) soft.push_back(c);
  return add_y_vars(csp.hard, soft, csp.vars);
}

inline bool complement_sat(const PathCsp& csp, const std::vector<int>& removed) {
  std::vector<Constraint> hard = csp.hard;
  for (size_t i = 0; i < csp.soft.size(); ++i)
    if (std::find(removed.begin(), removed.end(), static_cast<int>(i)) == removed.end())
      hard.push_back(csp.soft[i].first);
  return solve(make_csp(hard, csp.vars)).sat();
}

}  // namespace detail

// Disjunction forcing at least one member's indicator to stay active, which
// bans this set and all of its supersets as future relaxation patterns.
inline Constraint blocking_clause(const Mcs& mcs) {
  BoolExprPtr clause;
  for (int i : mcs.soft_indices) {
    BoolExprPtr atom =
        mk_cmp(Cmp::Eq, mk_var("y!" + std::to_string(i + 1)), mk_lit(1));
    clause = clause ? mk_or(clause, atom) : atom;
  }
  if (!clause) throw Error("BadArgument", "blocking clause of an empty set");
  return Constraint{clause};
}

// Bounded enumeration of all MCSs, one cardinality layer at a time. Each
// satisfying assignment of the AtMost-k system yields the set of relaxed
// constraints; a blocking clause then bans it from both the layer system and
// the global one.
inline std::vector<Mcs> enumerate_mcs(const PathCsp& path_csp, int b_mcs) {
  if (b_mcs < 1) throw Error("BadArgument", "MCS size bound must be positive");
  if (detail::complement_sat(path_csp, {}))
    throw Error("FeasibleInput", "system is satisfiable, nothing to correct");

  Csp global = detail::base_system(path_csp);
  std::vector<Mcs> out;

  int k = 1;
  while (solve(global).sat() && k <= b_mcs) {
    Csp layer = with_at_most(global, k);
    for (;;) {
      SolveResult r = solve(layer);
      if (!r.sat()) break;
      std::vector<int> relaxed;
      for (size_t i = 0; i < r.assignment.indicator_values.size(); ++i)
        if (!r.assignment.indicator_values[i]) relaxed.push_back(static_cast<int>(i));
      if (relaxed.empty())
        throw Error("Internal", "relaxation-free solution of an infeasible system");
      Mcs m = detail::make_mcs(path_csp, relaxed);
      Constraint bc = blocking_clause(m);
      layer.hard.push_back(bc);
      global.hard.push_back(bc);
      out.push_back(std::move(m));
    }
    ++k;
  }

  std::sort(out.begin(), out.end(), [](const Mcs& a, const Mcs& b) {
    if (a.soft_indices.size() != b.soft_indices.size())
      return a.soft_indices.size() < b.soft_indices.size();
    return a.soft_indices < b.soft_indices;
  });
  return out;
}

// Exhaustive oracle over all soft subsets by increasing size. Only usable on
// small systems; kept deliberately independent of the layered enumeration.
inline std::vector<Mcs> brute_force_mcs(const PathCsp& path_csp, int b_mcs) {
  const int n = static_cast<int>(path_csp.soft.size());
  if (n > 12) throw Error("TooLarge", "soft set exceeds the exhaustive budget");
  if (detail::complement_sat(path_csp, {}))
    throw Error("FeasibleInput", "system is satisfiable, nothing to correct");

  std::vector<Mcs> out;
  std::vector<std::vector<int>> recorded;

  for (int size = 1; size <= std::min(b_mcs, n); ++size) {
    std::vector<int> idx(static_cast<size_t>(size));
    // lexicographic combinations
    for (int i = 0; i < size; ++i) idx[static_cast<size_t>(i)] = i;
    for (;;) {
      bool superset = false;
      for (const auto& rec : recorded) {
        if (std::includes(idx.begin(), idx.end(), rec.begin(), rec.end())) {
          superset = true;
          break;
        }
      }
      if (!superset && detail::complement_sat(path_csp, idx)) {
        recorded.push_back(idx);
        out.push_back(detail::make_mcs(path_csp, idx));
      }
      // next combination
      int i = size - 1;
      while (i >= 0 && idx[static_cast<size_t>(i)] == n - size + i) --i;
      if (i < 0) break;
      ++idx[static_cast<size_t>(i)];
      for (int j = i + 1; j < size; ++j)
        idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
    }
  }
  return out;
}

// The two-part definitional check: the complement is feasible, and putting
// any single member back makes it infeasible again (monotonicity covers the
// smaller subsets).
inline bool is_valid_mcs(const PathCsp& path_csp, const Mcs& mcs) {
  if (mcs.soft_indices.empty()) return false;
  if (!detail::complement_sat(path_csp, mcs.soft_indices)) return false;
  for (size_t drop = 0; drop < mcs.soft_indices.size(); ++drop) {
    std::vector<int> smaller;
    for (size_t i = 0; i < mcs.soft_indices.size(); ++i)
      if (i != drop) smaller.push_back(mcs.soft_indices[i]);
    if (detail::complement_sat(path_csp, smaller)) return false;
  }
  return true;
}

inline std::vector<std::vector<int>> mcs_index_sets(const std::vector<Mcs>& v) {
  std::vector<std::vector<int>> out;
  for (const auto& m : v) out.push_back(m.soft_indices);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace locfaults
