#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "locfaults/constraint.hpp"

namespace locfaults {

struct Domain {
  long long lo = 0, hi = 0;
};

// A constraint system over bounded integers. Soft constraints are guarded by
// 0/1 indicator variables (y -> c); an optional cardinality constraint limits
// how many indicators may be false. Value semantics throughout: derived
// systems (AtMost, blocking clauses) are fresh copies.
struct Csp {
  std::vector<std::string> names;
  std::vector<Domain> domains;
  std::map<std::string, int> ids;

  std::vector<Constraint> hard;
  std::vector<Constraint> guarded;    // guarded[i] active iff indicator i is 1
  std::vector<int> indicator_vars;    // variable ids of the indicators
  std::optional<int> at_most_relaxed; // max number of false indicators
  bool nonlinear = false;             // solver-dispatch tag; single engine here

  int add_var(const std::string& name, Domain d) {
    if (d.lo > d.hi) throw Error("BadDomain", "empty domain for " + name);
    constexpr long long kLim = 1LL << 31;
    if (d.lo < -kLim || d.hi > kLim)
      throw Error("DomainOverflow", "domain of " + name + " exceeds the evaluable range");
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(names.size());
    names.push_back(name);
    domains.push_back(d);
    ids.emplace(name, id);
    return id;
  }

  int var_id(const std::string& name) const {
    auto it = ids.find(name);
    if (it == ids.end()) throw Error("UnknownVariable", "no domain declared for " + name);
    return it->second;
  }
};

struct Assignment {
  std::map<std::string, long long> values;
  std::vector<bool> indicator_values;
};

enum class SolveStatus { Sat, Unsat };

struct SolveResult {
  SolveStatus status = SolveStatus::Unsat;
  Assignment assignment;

  bool sat() const { return status == SolveStatus::Sat; }
};

namespace detail {

constexpr long long kSat = 1LL << 62;  // saturation limit for interval bounds

inline long long sat_clamp(__int128 v) {
  if (v > kSat) return kSat;
  if (v < -kSat) return -kSat;
  return static_cast<long long>(v);
}

inline long long sat_add(long long a, long long b) {
  return sat_clamp(static_cast<__int128>(a) + b);
}
inline long long sat_mul(long long a, long long b) {
  return sat_clamp(static_cast<__int128>(a) * b);
}

inline long long floor_div(long long a, long long b) {
  long long q = a / b, r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) --q;
  return q;
}
inline long long ceil_div(long long a, long long b) { return -floor_div(-a, b); }

inline long long isqrt_floor(long long v) {
  if (v < 0) return -1;
  long long r = static_cast<long long>(std::sqrt(static_cast<double>(v)));
  while (r > 0 && r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

enum class St { True, False, Unknown };

// The search engine. Expressions are compiled once per solve into flat pools
// with hash-consing, so a squared subterm shows up as one node and gets the
// stronger square projection.
class Engine {
 public:
  explicit Engine(const Csp& csp) : csp_(csp) {}

  SolveResult run() {
    compile_all();
    dom_.resize(csp_.domains.size());
    for (size_t i = 0; i < dom_.size(); ++i)
      dom_[i] = {csp_.domains[i].lo, csp_.domains[i].hi};
    itv_.resize(ces_.size());

    SolveResult res;
    if (search()) {
      res.status = SolveStatus::Sat;
      for (size_t i = 0; i < dom_.size(); ++i) res.assignment.values[csp_.names[i]] = dom_[i].first;
      for (int v : csp_.indicator_vars)
        res.assignment.indicator_values.push_back(dom_[static_cast<size_t>(v)].first == 1);
    }
    return res;
  }

 private:
  // ---- compiled form ----
  struct CE {
    enum K { Lit, Var, Add, Sub, Mul } k = Lit;
    long long lit = 0;
    int var = -1, a = -1, b = -1;
  };
  struct CC {
    enum K { Atom, And, Or, Const } k = Const;
    Cmp cmp = Cmp::Eq;
    int e1 = -1, e2 = -1;
    bool value = true;
    std::vector<int> kids;
  };

  int intern(CE n) {
    auto key = std::make_tuple(static_cast<int>(n.k), n.lit, n.var, n.a, n.b);
    auto it = ce_memo_.find(key);
    if (it != ce_memo_.end()) return it->second;
    int id = static_cast<int>(ces_.size());
    ces_.push_back(n);
    ce_memo_.emplace(key, id);
    return id;
  }

  int compile_int(const IntExprPtr& e) {
    return std::visit(
        [&](const auto& x) -> int {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, IntLit>) {
            return intern(CE{CE::Lit, x.value, -1, -1, -1});
          } else if constexpr (std::is_same_v<T, IntVar>) {
            return intern(CE{CE::Var, 0, csp_.var_id(x.name), -1, -1});
          } else if constexpr (std::is_same_v<T, ArrayRead>) {
            auto idx = const_eval(x.index);
            if (!idx) throw Error("Internal", "non-constant array index reached the solver");
            return intern(CE{CE::Var, 0, csp_.var_id(cell_name(x.array, *idx)), -1, -1});
          } else if constexpr (std::is_same_v<T, ArrayLen>) {
            throw Error("Internal", "unresolved array length reached the solver");
          } else {
            int a = compile_int(x.lhs), b = compile_int(x.rhs);
            CE::K k = x.op == '+' ? CE::Add : x.op == '-' ? CE::Sub : CE::Mul;
            return intern(CE{k, 0, -1, a, b});
          }
        },
        e->node);
  }

  int compile_bool(const BoolExprPtr& e) {
    CC out;
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Comparison>) {
            out.k = CC::Atom;
            out.cmp = x.cmp;
            out.e1 = compile_int(x.lhs);
            out.e2 = compile_int(x.rhs);
          } else if constexpr (std::is_same_v<T, BoolAnd>) {
            out.k = CC::And;
            out.kids = {compile_bool(x.lhs), compile_bool(x.rhs)};
          } else if constexpr (std::is_same_v<T, BoolOr>) {
            out.k = CC::Or;
            out.kids = {compile_bool(x.lhs), compile_bool(x.rhs)};
          } else if constexpr (std::is_same_v<T, BoolLit>) {
            out.k = CC::Const;
            out.value = x.value;
          } else {
            throw Error("Internal", "constraint not in negation normal form");
          }
        },
        e->node);
    int id = static_cast<int>(ccs_.size());
    ccs_.push_back(std::move(out));
    return id;
  }

  void compile_all() {
    for (const auto& c : csp_.hard) hard_roots_.push_back(compile_bool(c.expr));
    for (const auto& c : csp_.guarded) guarded_roots_.push_back(compile_bool(c.expr));
  }

  // ---- intervals ----
  using Itv = std::pair<long long, long long>;

  Itv forward(int id) {
    const CE& n = ces_[static_cast<size_t>(id)];
    Itv r;
    switch (n.k) {
      case CE::Lit: r = {n.lit, n.lit}; break;
      case CE::Var: r = dom_[static_cast<size_t>(n.var)]; break;
      case CE::Add: {
        Itv a = forward(n.a), b = forward(n.b);
        r = {sat_add(a.first, b.first), sat_add(a.second, b.second)};
        break;
      }
      case CE::Sub: {
        if (n.a == n.b) {  // x - x is exactly zero
          r = {0, 0};
          break;
        }
        Itv a = forward(n.a), b = forward(n.b);
        r = {sat_add(a.first, -b.second), sat_add(a.second, -b.first)};
        break;
      }
      case CE::Mul: {
        Itv a = forward(n.a), b = forward(n.b);
        if (n.a == n.b) {  // square
          long long m1 = sat_mul(a.first, a.first), m2 = sat_mul(a.second, a.second);
          long long hi = std::max(m1, m2);
          long long lo = (a.first <= 0 && a.second >= 0) ? 0 : std::min(m1, m2);
          r = {lo, hi};
        } else {
          long long c1 = sat_mul(a.first, b.first), c2 = sat_mul(a.first, b.second);
          long long c3 = sat_mul(a.second, b.first), c4 = sat_mul(a.second, b.second);
          r = {std::min(std::min(c1, c2), std::min(c3, c4)),
               std::max(std::max(c1, c2), std::max(c3, c4))};
        }
        break;
      }
    }
    itv_[static_cast<size_t>(id)] = r;
    return r;
  }

  // Narrows node id to [lo, hi]; returns false on an empty domain.
  bool backward(int id, long long lo, long long hi) {
    Itv& cur = itv_[static_cast<size_t>(id)];
    long long nlo = std::max(cur.first, lo), nhi = std::min(cur.second, hi);
    if (nlo > nhi) return false;
    if (nlo == cur.first && nhi == cur.second) return true;
    cur = {nlo, nhi};

    const CE& n = ces_[static_cast<size_t>(id)];
    switch (n.k) {
      case CE::Lit:
        return n.lit >= nlo && n.lit <= nhi;
      case CE::Var: {
        Itv& d = dom_[static_cast<size_t>(n.var)];
        long long dlo = std::max(d.first, nlo), dhi = std::min(d.second, nhi);
        if (dlo > dhi) return false;
        if (dlo != d.first || dhi != d.second) {
          d = {dlo, dhi};
          changed_ = true;
        }
        return true;
      }
      case CE::Add: {
        const Itv b = itv_[static_cast<size_t>(n.b)];
        if (!backward(n.a, sat_add(nlo, -b.second), sat_add(nhi, -b.first))) return false;
        const Itv a2 = itv_[static_cast<size_t>(n.a)];
        return backward(n.b, sat_add(nlo, -a2.second), sat_add(nhi, -a2.first));
      }
      case CE::Sub: {
        if (n.a == n.b) return nlo <= 0 && 0 <= nhi;
        const Itv b = itv_[static_cast<size_t>(n.b)];
        if (!backward(n.a, sat_add(nlo, b.first), sat_add(nhi, b.second))) return false;
        const Itv a2 = itv_[static_cast<size_t>(n.a)];
        return backward(n.b, sat_add(a2.first, -nhi), sat_add(a2.second, -nlo));
      }
      case CE::Mul: {
        if (n.a == n.b) {  // x*x in [nlo, nhi]
          if (nhi < 0) return false;
          long long root = isqrt_floor(nhi);
          if (!backward(n.a, -root, root)) return false;
          if (nlo > 0) {
            const Itv a = itv_[static_cast<size_t>(n.a)];
            long long r = isqrt_floor(nlo - 1) + 1;  // ceil(sqrt(nlo))
            if (a.first >= 0) return backward(n.a, r, a.second);
            if (a.second <= 0) return backward(n.a, a.first, -r);
          }
          return true;
        }
        // exact projection only when one factor is fixed
        auto project = [&](int tgt, const Itv& other) -> bool {
          if (other.first != other.second) return true;
          long long c = other.first;
          if (c == 0) return nlo <= 0 && 0 <= nhi;
          long long lo2 = c > 0 ? ceil_div(nlo, c) : ceil_div(nhi, c);
          long long hi2 = c > 0 ? floor_div(nhi, c) : floor_div(nlo, c);
          return backward(tgt, lo2, hi2);
        };
        if (!project(n.a, itv_[static_cast<size_t>(n.b)])) return false;
        return project(n.b, itv_[static_cast<size_t>(n.a)]);
      }
    }
    return true;
  }

  // ---- constraint revision ----

  St atom_status(Cmp cmp, const Itv& a, const Itv& b) {
    switch (cmp) {
      case Cmp::Le:
        if (a.second <= b.first) return St::True;
        if (a.first > b.second) return St::False;
        return St::Unknown;
      case Cmp::Lt:
        if (a.second < b.first) return St::True;
        if (a.first >= b.second) return St::False;
        return St::Unknown;
      case Cmp::Ge:
        return atom_status(Cmp::Le, b, a);
      case Cmp::Gt:
        return atom_status(Cmp::Lt, b, a);
      case Cmp::Eq:
        if (a.first == a.second && b.first == b.second && a.first == b.first) return St::True;
        if (a.second < b.first || b.second < a.first) return St::False;
        return St::Unknown;
      case Cmp::Ne:
        if (a.second < b.first || b.second < a.first) return St::True;
        if (a.first == a.second && b.first == b.second && a.first == b.first) return St::False;
        return St::Unknown;
    }
    return St::Unknown;
  }

  // prune=false evaluates entailment only; prune=true additionally narrows.
  St revise(int cc, bool prune) {
    CC& c = ccs_[static_cast<size_t>(cc)];
    switch (c.k) {
      case CC::Const:
        return c.value ? St::True : St::False;
      case CC::Atom: {
        if (c.e1 == c.e2) {  // structurally identical sides after consing
          switch (c.cmp) {
            case Cmp::Eq: case Cmp::Le: case Cmp::Ge: return St::True;
            default: return St::False;
          }
        }
        Itv a = forward(c.e1), b = forward(c.e2);
        St st = atom_status(c.cmp, a, b);
        if (!prune || st != St::Unknown) return st;
        bool ok = true;
        switch (c.cmp) {
          case Cmp::Le:
            ok = backward(c.e1, -kSat, b.second) && backward(c.e2, itv_[static_cast<size_t>(c.e1)].first, kSat);
            break;
          case Cmp::Lt:
            ok = backward(c.e1, -kSat, sat_add(b.second, -1)) &&
                 backward(c.e2, sat_add(itv_[static_cast<size_t>(c.e1)].first, 1), kSat);
            break;
          case Cmp::Ge:
            ok = backward(c.e1, b.first, kSat) && backward(c.e2, -kSat, itv_[static_cast<size_t>(c.e1)].second);
            break;
          case Cmp::Gt:
            ok = backward(c.e1, sat_add(b.first, 1), kSat) &&
                 backward(c.e2, -kSat, sat_add(itv_[static_cast<size_t>(c.e1)].second, -1));
            break;
          case Cmp::Eq: {
            long long lo = std::max(a.first, b.first), hi = std::min(a.second, b.second);
            ok = backward(c.e1, lo, hi) && backward(c.e2, lo, hi);
            break;
          }
          case Cmp::Ne: {
            // shave a bound when the other side is fixed
            if (a.first == a.second) {
              if (b.first == a.first) ok = backward(c.e2, sat_add(b.first, 1), b.second);
              else if (b.second == a.first) ok = backward(c.e2, b.first, sat_add(b.second, -1));
            } else if (b.first == b.second) {
              if (a.first == b.first) ok = backward(c.e1, sat_add(a.first, 1), a.second);
              else if (a.second == b.first) ok = backward(c.e1, a.first, sat_add(a.second, -1));
            }
            break;
          }
        }
        return ok ? St::Unknown : St::False;
      }
      case CC::And: {
        St all = St::True;
        for (int kid : c.kids) {
          St s = revise(kid, prune);
          if (s == St::False) return St::False;
          if (s == St::Unknown) all = St::Unknown;
        }
        return all;
      }
      case CC::Or: {
        int open = -1, open_count = 0;
        for (int kid : c.kids) {
          St s = revise(kid, false);
          if (s == St::True) return St::True;
          if (s == St::Unknown) {
            ++open_count;
            open = kid;
          }
        }
        if (open_count == 0) return St::False;
        if (open_count == 1 && prune) return revise(open, true) == St::False ? St::False : St::Unknown;
        return St::Unknown;
      }
    }
    return St::Unknown;
  }

  bool fix_var(int var, long long v) {
    Itv& d = dom_[static_cast<size_t>(var)];
    if (v < d.first || v > d.second) return false;
    if (d.first != v || d.second != v) {
      d = {v, v};
      changed_ = true;
    }
    return true;
  }

  bool propagate() {
    // The round cap bounds slowly converging chains; stopping early is sound,
    // labeling finishes the job.
    for (int round = 0; round < 1000; ++round) {
      changed_ = false;
      for (int root : hard_roots_)
        if (revise(root, true) == St::False) return false;
      for (size_t i = 0; i < guarded_roots_.size(); ++i) {
        int y = csp_.indicator_vars[i];
        const Itv& yd = dom_[static_cast<size_t>(y)];
        if (yd.first == 1) {
          if (revise(guarded_roots_[i], true) == St::False) return false;
        } else if (yd.second == 1) {  // indicator still open
          if (revise(guarded_roots_[i], false) == St::False) {
            if (!fix_var(y, 0)) return false;
          }
        }
      }
      if (csp_.at_most_relaxed) {
        int k = *csp_.at_most_relaxed;
        int false_count = 0, open_count = 0;
        for (int y : csp_.indicator_vars) {
          const Itv& yd = dom_[static_cast<size_t>(y)];
          if (yd.second == 0) ++false_count;
          else if (yd.first == 0) ++open_count;
        }
        if (false_count > k) return false;
        if (false_count == k && open_count > 0) {
          for (int y : csp_.indicator_vars) {
            const Itv& yd = dom_[static_cast<size_t>(y)];
            if (yd.first == 0 && yd.second == 1 && !fix_var(y, 1)) return false;
          }
        }
      }
      if (!changed_) return true;
    }
    return true;
  }

  int pick_var() const {
    int best = -1;
    unsigned long long best_size = 0;
    for (size_t i = 0; i < dom_.size(); ++i) {
      unsigned long long size =
          static_cast<unsigned long long>(dom_[i].second - dom_[i].first);
      if (size == 0) continue;
      if (best < 0 || size < best_size) {
        best = static_cast<int>(i);
        best_size = size;
      }
    }
    return best;
  }

  // Depth-first labeling: smallest domain first, values ascending. Recursion
  // depth is bounded by the variable count; the value loop stays in-frame.
  bool search() {
    if (!propagate()) return false;
    int var = pick_var();
    if (var < 0) return true;  // everything fixed and consistent

    const std::vector<Itv> snapshot = dom_;
    const long long lo = snapshot[static_cast<size_t>(var)].first;
    const long long hi = snapshot[static_cast<size_t>(var)].second;
    for (long long v = lo; v <= hi; ++v) {
      dom_ = snapshot;
      dom_[static_cast<size_t>(var)] = {v, v};
      if (search()) return true;
    }
    return false;
  }

  const Csp& csp_;
  std::vector<CE> ces_;
  std::vector<CC> ccs_;
  std::map<std::tuple<int, long long, int, int, int>, int> ce_memo_;
  std::vector<int> hard_roots_, guarded_roots_;
  std::vector<Itv> dom_, itv_;
  bool changed_ = false;
};

}  // namespace detail

inline SolveResult solve(const Csp& csp) { return detail::Engine(csp).run(); }

// Builds a plain system (no indicators) from constraints and domains.
inline Csp make_csp(const std::vector<Constraint>& hard,
                    const std::map<std::string, Domain>& vars) {
  Csp csp;
  for (const auto& [name, dom] : vars) csp.add_var(name, dom);
  csp.hard = hard;
  return csp;
}

namespace detail {
inline bool has_var_product(const IntExprPtr& e);
inline bool has_var_product(const BoolExprPtr& e);

inline bool has_var_product(const IntExprPtr& e) {
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, IntBin>) {
          if (x.op == '*' && !const_eval(x.lhs) && !const_eval(x.rhs)) return true;
          return has_var_product(x.lhs) || has_var_product(x.rhs);
        } else if constexpr (std::is_same_v<T, ArrayRead>) {
          return has_var_product(x.index);
        } else {
          return false;
        }
      },
      e->node);
}

inline bool has_var_product(const BoolExprPtr& e) {
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Comparison>)
          return has_var_product(x.lhs) || has_var_product(x.rhs);
        else if constexpr (std::is_same_v<T, BoolAnd> || std::is_same_v<T, BoolOr> ||
                           std::is_same_v<T, BoolImplies>)
          return has_var_product(x.lhs) || has_var_product(x.rhs);
        else if constexpr (std::is_same_v<T, BoolNot>)
          return has_var_product(x.arg);
        else
          return false;
      },
      e->node);
}
}  // namespace detail

// Attaches one fresh indicator per soft constraint (y_i -> c_i), in soft
// order so that indicator ids stay stable for blocking clauses.
inline Csp add_y_vars(const std::vector<Constraint>& hard,
                      const std::vector<Constraint>& soft,
                      const std::map<std::string, Domain>& vars) {
  Csp csp = make_csp(hard, vars);
  for (size_t i = 0; i < soft.size(); ++i) {
    int y = csp.add_var("y!" + std::to_string(i + 1), Domain{0, 1});
    csp.indicator_vars.push_back(y);
    csp.guarded.push_back(soft[i]);
  }
  for (const auto& c : hard)
    if (detail::has_var_product(c.expr)) csp.nonlinear = true;
  for (const auto& c : soft)
    if (detail::has_var_product(c.expr)) csp.nonlinear = true;
  return csp;
}

inline Csp with_at_most(const Csp& csp, int k) {
  if (csp.indicator_vars.empty())
    throw Error("NoIndicators", "AtMost needs indicator variables");
  Csp out = csp;
  out.at_most_relaxed = k;
  return out;
}

}  // namespace locfaults
