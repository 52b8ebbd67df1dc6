#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "locfaults/cfg.hpp"
#include "locfaults/interp.hpp"
#include "locfaults/solver.hpp"

namespace locfaults {

// Store over versioned names, total on everything assigned along one path.
struct Valuation {
  std::map<std::string, long long> scalars;
  std::map<std::string, std::vector<long long>> arrays;
};

struct PropagateResult {
  Valuation valuation;
  std::vector<NodeId> path;
  bool post_holds = false;
  bool unroll_insufficient = false;
  bool deviations_reached = true;                 // every requested deviation was on the path
  std::map<NodeId, Branch> concrete_branch;       // branch dictated by the values (pre-deviation)
};

// Hard/soft-partitioned constraint system of one path. Soft constraints are
// the path's assignment constraints, each tagged with its origin; hard ones
// are never relaxation candidates.
struct PathCsp {
  std::vector<Constraint> hard;
  std::vector<std::pair<Constraint, LocRef>> soft;
  std::map<std::string, Domain> vars;
};

namespace detail {

class VersionedEval {
 public:
  explicit VersionedEval(const Valuation& val) : val_(val) {}

  long long eval(const IntExprPtr& e) const {
    return std::visit(
        [&](const auto& x) -> long long {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, IntLit>) {
            return x.value;
          } else if constexpr (std::is_same_v<T, IntVar>) {
            auto it = val_.scalars.find(x.name);
            if (it == val_.scalars.end())
              throw Error("UnboundRead", "read of unassigned '" + x.name + "'");
            return it->second;
          } else if constexpr (std::is_same_v<T, ArrayRead>) {
            auto it = val_.arrays.find(x.array);
            if (it == val_.arrays.end())
              throw Error("UnboundRead", "read of unassigned array '" + x.array + "'");
            long long idx = eval(x.index);
            if (idx < 0 || idx >= static_cast<long long>(it->second.size()))
              throw Error("IndexOutOfBounds",
                          x.array + "[" + std::to_string(idx) + "] out of bounds");
            return it->second[static_cast<size_t>(idx)];
          } else if constexpr (std::is_same_v<T, ArrayLen>) {
            throw Error("Internal", "unresolved array length");
          } else {
            return checked_bin(x.op, eval(x.lhs), eval(x.rhs));
          }
        },
        e->node);
  }

  bool eval(const BoolExprPtr& e) const {
    return std::visit(
        [&](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Comparison>) {
            long long a = eval(x.lhs), b = eval(x.rhs);
            switch (x.cmp) {
              case Cmp::Eq: return a == b;
              case Cmp::Ne: return a != b;
              case Cmp::Lt: return a < b;
              case Cmp::Le: return a <= b;
              case Cmp::Gt: return a > b;
              case Cmp::Ge: return a >= b;
            }
            return false;
          } else if constexpr (std::is_same_v<T, BoolAnd>) {
            return eval(x.lhs) && eval(x.rhs);
          } else if constexpr (std::is_same_v<T, BoolOr>) {
            return eval(x.lhs) || eval(x.rhs);
          } else if constexpr (std::is_same_v<T, BoolNot>) {
            return !eval(x.arg);
          } else if constexpr (std::is_same_v<T, BoolImplies>) {
            return !eval(x.lhs) || eval(x.rhs);
          } else if constexpr (std::is_same_v<T, ForAll>) {
            return eval(expand_quantifiers(std::make_shared<BoolExpr>(BoolExpr{x})));
          } else {
            return x.value;
          }
        },
        e->node);
  }

 private:
  const Valuation& val_;
};

inline void bind_inputs(const Cfg& g, const Counterexample& ce, Valuation& val) {
  if (!g.source) {
    // synthetic graph: scalar bindings become version-0 inputs
    for (const auto& [name, v] : ce.scalars) val.scalars[versioned(name, 0)] = v;
    for (const auto& [name, a] : ce.arrays) val.arrays[versioned(name, 0)] = a;
    return;
  }
  for (const auto& p : g.source->program.params) {
    if (p.type.is_array) {
      auto it = ce.arrays.find(p.name);
      if (it == ce.arrays.end())
        throw Error("MissingInput", "no binding for array parameter '" + p.name + "'");
      if (static_cast<int>(it->second.size()) != p.type.length)
        throw Error("InputLengthMismatch", "array '" + p.name + "' expects " +
                                               std::to_string(p.type.length) + " elements");
      val.arrays[versioned(p.name, 0)] = it->second;
    } else {
      auto it = ce.scalars.find(p.name);
      if (it == ce.scalars.end())
        throw Error("MissingInput", "no binding for parameter '" + p.name + "'");
      val.scalars[versioned(p.name, 0)] = it->second;
    }
  }
}

}  // namespace detail

// Walks the path the counterexample induces, flipping the branch at every
// node in `deviations`. The run is concrete: every assignment lands in the
// valuation, the postcondition is evaluated on the final store.
inline PropagateResult propagate(const Cfg& g, const Counterexample& ce,
                                 const std::set<NodeId>& deviations,
                                 bool strict = true) {
  if (!g.dsa_form)
    throw Error("NotDsaForm", "propagation expects the single-assignment graph");

  PropagateResult r;
  detail::bind_inputs(g, ce, r.valuation);
  detail::VersionedEval ev(r.valuation);

  std::set<NodeId> seen_devs;
  NodeId cur = g.entry;
  size_t steps = 0;
  while (cur >= 0) {
    if (++steps > g.nodes.size() + 1) throw Error("Internal", "non-terminating walk");
    r.path.push_back(cur);
    const CfgNode& n = g.node(cur);
    if (const auto* blk = std::get_if<NBlock>(&n.kind)) {
      for (const auto& a : blk->assigns) {
        if (a.is_copy) {
          if (a.is_array)
            r.valuation.arrays[a.target_name()] = r.valuation.arrays.at(a.copy_src);
          else
            r.valuation.scalars[a.target_name()] = r.valuation.scalars.at(a.copy_src);
          continue;
        }
        long long v = ev.eval(a.rhs);
        if (a.index) {
          long long idx = ev.eval(a.index);
          auto prev = r.valuation.arrays.at(versioned(a.base, a.version - 1));
          if (idx < 0 || idx >= static_cast<long long>(prev.size()))
            throw Error("IndexOutOfBounds", a.base + " write out of bounds");
          prev[static_cast<size_t>(idx)] = v;
          r.valuation.arrays[a.target_name()] = std::move(prev);
        } else {
          r.valuation.scalars[a.target_name()] = v;
        }
      }
      if (blk->trunc_guard && ev.eval(blk->trunc_guard)) r.unroll_insufficient = true;
      cur = g.succ(cur, BranchKind::Seq);
      continue;
    }
    if (const auto* cond = std::get_if<NCond>(&n.kind)) {
      bool truth = ev.eval(cond->expr);
      r.concrete_branch[cur] = truth ? Branch::Then : Branch::Else;
      bool deviate = deviations.count(cur) > 0;
      if (deviate) seen_devs.insert(cur);
      bool go_then = truth != deviate;
      cur = g.succ(cur, go_then ? BranchKind::Then : BranchKind::Else);
      continue;
    }
    if (const auto* post = std::get_if<NPost>(&n.kind)) {
      r.post_holds = ev.eval(post->expr);
      break;
    }
    cur = g.succ(cur, BranchKind::Seq);  // Pre
  }

  if (seen_devs.size() != deviations.size()) {
    r.deviations_reached = false;
    if (strict)
      throw Error("DeviationOffPath", "a requested deviation is not on the induced path");
  }
  return r;
}

namespace detail {

// Shared machinery for the two path-CSP builders. Reads are resolved through
// join copies so that copies stay in the soft set without ever becoming
// correction candidates of their own.
class PathCspBuilder {
 public:
  PathCspBuilder(const Cfg& g, const Counterexample& ce, Domain dom)
      : g_(g), ce_(ce), dom_(dom) {}

  PathCsp build_ce_path(const PropagateResult& pr) {
    PathCsp csp;
    add_ce_hard(csp);
    collect_soft(csp, pr, /*stop_at=*/-1);
    const auto* post = std::get_if<NPost>(&g_.node(g_.exit).kind);
    BoolExprPtr expanded = expand_quantifiers(post->expr);
    csp.hard.push_back(Constraint{nnf(resolve_bool(expanded, pr))});
    finish(csp);
    return csp;
  }

  PathCsp build_deviated(const PropagateResult& pr, NodeId d_last) {
    PathCsp csp;
    add_ce_hard(csp);
    collect_soft(csp, pr, d_last);
    const auto* cond = std::get_if<NCond>(&g_.node(d_last).kind);
    BoolExprPtr resolved = resolve_bool(cond->expr, pr);
    csp.hard.push_back(flip(resolved, pr.concrete_branch.at(d_last)));
    finish(csp);
    return csp;
  }

 private:
  void add_ce_hard(PathCsp& csp) {
    for (const auto& [name, v] : ce_.scalars)
      csp.hard.push_back(Constraint{mk_cmp(Cmp::Eq, mk_var(versioned(name, 0)), mk_lit(v))});
    for (const auto& [name, arr] : ce_.arrays) {
      BoolExprPtr conj;
      for (size_t i = 0; i < arr.size(); ++i) {
        BoolExprPtr atom = mk_cmp(Cmp::Eq,
                                  mk_read(versioned(name, 0), mk_lit(static_cast<long long>(i))),
                                  mk_lit(arr[i]));
        conj = conj ? mk_and(conj, atom) : atom;
      }
      if (conj) csp.hard.push_back(Constraint{conj});
    }
  }

  // Walks blocks along the path (up to but excluding stop_at), emitting one
  // soft constraint per assignment and recording copy definitions.
  void collect_soft(PathCsp& csp, const PropagateResult& pr, NodeId stop_at) {
    detail::VersionedEval ev(pr.valuation);
    for (NodeId id : pr.path) {
      if (id == stop_at) break;
      const auto* blk = std::get_if<NBlock>(&g_.node(id).kind);
      if (!blk) continue;
      for (const auto& a : blk->assigns) {
        if (a.base == "\\result") {
          // returns forward a value, they are not correction candidates
          csp.hard.push_back(
              Constraint{mk_cmp(Cmp::Eq, mk_var(a.target_name()), resolve_int(a.rhs, pr))});
          continue;
        }
        if (a.is_copy) {
          if (a.is_array) {
            std::string src = read_through(a.copy_src);
            csp.soft.emplace_back(array_equal(a.target_name(), src), a.loc);
          } else {
            csp.soft.emplace_back(
                Constraint{mk_cmp(Cmp::Eq, mk_var(a.target_name()), mk_var(a.copy_src))},
                a.loc);
          }
          copy_of_[a.target_name()] = a.copy_src;
          continue;
        }
        if (a.index) {
          long long idx = ev.eval(a.index);
          std::string prev = read_through(versioned(a.base, a.version - 1));
          BoolExprPtr conj = mk_cmp(Cmp::Eq, mk_read(a.target_name(), mk_lit(idx)),
                                    resolve_int(a.rhs, pr));
          int len = array_length(a.base);
          for (long long m = 0; m < len; ++m) {
            if (m == idx) continue;
            conj = mk_and(conj, mk_cmp(Cmp::Eq, mk_read(a.target_name(), mk_lit(m)),
                                       mk_read(prev, mk_lit(m))));
          }
          csp.soft.emplace_back(Constraint{conj}, a.loc);
        } else {
          csp.soft.emplace_back(
              Constraint{mk_cmp(Cmp::Eq, mk_var(a.target_name()), resolve_int(a.rhs, pr))},
              a.loc);
        }
      }
    }
  }

  int array_length(const std::string& base) const {
    if (!g_.source) throw Error("Internal", "array write in a synthetic graph");
    return g_.source->symbols.at(base).length;
  }

  Constraint array_equal(const std::string& a, const std::string& b) {
    // whole-array copies only occur for declared arrays
    std::string base = a.substr(0, a.rfind('_'));
    int len = array_length(base);
    BoolExprPtr conj;
    for (long long m = 0; m < len; ++m) {
      BoolExprPtr atom =
          mk_cmp(Cmp::Eq, mk_read(a, mk_lit(m)), mk_read(b, mk_lit(m)));
      conj = conj ? mk_and(conj, atom) : atom;
    }
    return Constraint{conj};
  }

  std::string read_through(std::string name) const {
    for (;;) {
      auto it = copy_of_.find(name);
      if (it == copy_of_.end()) return name;
      name = it->second;
    }
  }

  IntExprPtr resolve_int(const IntExprPtr& e, const PropagateResult& pr) {
    detail::VersionedEval ev(pr.valuation);
    return std::visit(
        [&](const auto& x) -> IntExprPtr {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, IntVar>) {
            return mk_var(read_through(x.name));
          } else if constexpr (std::is_same_v<T, ArrayRead>) {
            // cell choice fixed to the concrete index of this run
            long long idx = ev.eval(x.index);
            return mk_read(read_through(x.array), mk_lit(idx));
          } else if constexpr (std::is_same_v<T, IntBin>) {
            return mk_bin(x.op, resolve_int(x.lhs, pr), resolve_int(x.rhs, pr));
          } else {
            return e;
          }
        },
        e->node);
  }

  BoolExprPtr resolve_bool(const BoolExprPtr& e, const PropagateResult& pr) {
    return std::visit(
        [&](const auto& x) -> BoolExprPtr {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Comparison>)
            return mk_cmp(x.cmp, resolve_int(x.lhs, pr), resolve_int(x.rhs, pr));
          else if constexpr (std::is_same_v<T, BoolAnd>)
            return mk_and(resolve_bool(x.lhs, pr), resolve_bool(x.rhs, pr));
          else if constexpr (std::is_same_v<T, BoolOr>)
            return mk_or(resolve_bool(x.lhs, pr), resolve_bool(x.rhs, pr));
          else if constexpr (std::is_same_v<T, BoolNot>)
            return mk_not(resolve_bool(x.arg, pr));
          else if constexpr (std::is_same_v<T, BoolImplies>)
            return mk_implies(resolve_bool(x.lhs, pr), resolve_bool(x.rhs, pr));
          else if constexpr (std::is_same_v<T, ForAll>)
            throw Error("Internal", "quantifier must be expanded before resolution");
          else
            return e;
        },
        e->node);
  }

  void finish(PathCsp& csp) {
    std::set<std::string> names;
    for (const auto& c : csp.hard) collect_vars(c.expr, names);
    for (const auto& [c, loc] : csp.soft) collect_vars(c.expr, names);
    for (const auto& n : names) csp.vars[n] = dom_;
  }

  const Cfg& g_;
  const Counterexample& ce_;
  Domain dom_;
  std::map<std::string, std::string> copy_of_;
};

}  // namespace detail

constexpr Domain kDefaultDomain{-32768, 32767};

// Constraint system of the counterexample path: hard = inputs + violated
// postcondition, soft = the path's assignment constraints. Traversed
// conditions contribute nothing.
inline PathCsp ce_path_csp(const Cfg& g, const Counterexample& ce,
                           Domain dom = kDefaultDomain) {
  PropagateResult pr = propagate(g, ce, {});
  if (pr.post_holds && !pr.unroll_insufficient)
    throw Error("NotACounterexample", "the given input satisfies the postcondition");
  return detail::PathCspBuilder(g, ce, dom).build_ce_path(pr);
}

// Constraint system of a deviated path: soft constraints are the assignments
// strictly before the last deviated condition, the hard part adds that
// condition's flip. Earlier deviations are realized purely by path selection.
inline PathCsp deviated_path_csp(const Cfg& g, const Counterexample& ce,
                                 const std::vector<NodeId>& deviations,
                                 Domain dom = kDefaultDomain) {
  if (deviations.empty()) throw Error("BadArgument", "deviation set is empty");
  std::set<NodeId> devs(deviations.begin(), deviations.end());
  PropagateResult pr = propagate(g, ce, devs);  // throws DeviationOffPath
  NodeId d_last = -1;
  for (NodeId id : pr.path)
    if (devs.count(id)) d_last = id;
  return detail::PathCspBuilder(g, ce, dom).build_deviated(pr, d_last);
}

}  // namespace locfaults
