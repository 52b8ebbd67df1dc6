#pragma once

#include <map>
#include <string>
#include <vector>

#include "locfaults/checked.hpp"
#include "locfaults/errors.hpp"
#include "locfaults/semantics.hpp"

namespace locfaults {

// Concrete program inputs: one binding per input parameter.
struct Counterexample {
  std::map<std::string, long long> scalars;
  std::map<std::string, std::vector<long long>> arrays;

  friend bool operator==(const Counterexample&, const Counterexample&) = default;
};

struct InterpResult {
  std::map<std::string, long long> scalars;
  std::map<std::string, std::vector<long long>> arrays;
  bool post_holds = false;
  std::map<int, int> loop_trips;  // loop condition line -> max consecutive trips
};

// Reference interpreter for the original (un-unrolled) program. Used as the
// oracle for counterexample search and for cross-checking path propagation.
class Interpreter {
 public:
  explicit Interpreter(const ValidatedProgram& vp, long long step_budget = 1'000'000)
      : vp_(vp), budget_(step_budget) {}

  InterpResult run(const Counterexample& ce) const {
    State st;
    bind_inputs(st, ce);
    exec_stmts(vp_.program.body, st);
    InterpResult r;
    r.scalars = st.scalars;
    r.arrays = st.arrays;
    r.loop_trips = st.loop_trips;
    r.post_holds = eval_bool(vp_.program.postcondition, st);
    return r;
  }

  bool precondition_holds(const Counterexample& ce) const {
    if (!vp_.program.precondition) return true;
    State st;
    bind_inputs(st, ce);
    return eval_bool(vp_.program.precondition, st);
  }

 private:
  struct State {
    std::map<std::string, long long> scalars;
    std::map<std::string, std::vector<long long>> arrays;
    std::map<std::string, long long> bound;  // quantifier variables
    std::map<int, int> loop_trips;
    long long steps = 0;
    bool returned = false;
  };

  void bind_inputs(State& st, const Counterexample& ce) const {
    for (const auto& p : vp_.program.params) {
      if (p.type.is_array) {
        auto it = ce.arrays.find(p.name);
        if (it == ce.arrays.end())
          throw Error("MissingInput", "no binding for array parameter '" + p.name + "'");
        if (static_cast<int>(it->second.size()) != p.type.length)
          throw Error("InputLengthMismatch",
                      "array '" + p.name + "' expects " + std::to_string(p.type.length) +
                          " elements");
        st.arrays[p.name] = it->second;
      } else {
        auto it = ce.scalars.find(p.name);
        if (it == ce.scalars.end())
          throw Error("MissingInput", "no binding for parameter '" + p.name + "'");
        st.scalars[p.name] = it->second;
      }
    }
  }

  void exec_stmts(const std::vector<StmtPtr>& stmts, State& st) const {
    for (const auto& s : stmts) {
      if (st.returned) return;
      exec_stmt(*s, st);
    }
  }

  void exec_stmt(const Stmt& s, State& st) const {
    if (++st.steps > budget_)
      throw Error("StepBudgetExceeded", "interpreter exceeded its step budget");
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, SAssign>) {
            long long v = eval_int(x.expr, st);
            if (x.target.index) {
              long long idx = eval_int(x.target.index, st);
              auto& arr = st.arrays.at(x.target.name);
              check_index(x.target.name, idx, arr.size(), s.line);
              arr[static_cast<size_t>(idx)] = v;
            } else {
              st.scalars[x.target.name] = v;
            }
          } else if constexpr (std::is_same_v<T, SIf>) {
            if (eval_bool(x.cond, st)) exec_stmts(x.then_body, st);
            else exec_stmts(x.else_body, st);
          } else if constexpr (std::is_same_v<T, SWhile>) {
            int trips = 0;
            while (eval_bool(x.cond, st)) {
              ++trips;
              exec_stmts(x.body, st);
              if (st.returned) break;
              if (++st.steps > budget_)
                throw Error("StepBudgetExceeded", "loop exceeded the step budget");
            }
            auto& best = st.loop_trips[s.line];
            if (trips > best) best = trips;
          } else {
            st.scalars["\\result"] = eval_int(x.expr, st);
            st.returned = true;
          }
        },
        s.node);
  }

  static void check_index(const std::string& name, long long idx, size_t len, int line) {
    if (idx < 0 || idx >= static_cast<long long>(len))
      throw Error("IndexOutOfBounds",
                  "line " + std::to_string(line) + ": " + name + "[" +
                      std::to_string(idx) + "] out of bounds");
  }

  long long eval_int(const IntExprPtr& e, State& st) const {
    return std::visit(
        [&](const auto& x) -> long long {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, IntLit>) {
            return x.value;
          } else if constexpr (std::is_same_v<T, IntVar>) {
            if (auto it = st.bound.find(x.name); it != st.bound.end()) return it->second;
            auto it = st.scalars.find(x.name);
            if (it == st.scalars.end())
              throw Error("UnboundRead", "read of unassigned variable '" + x.name + "'");
            return it->second;
          } else if constexpr (std::is_same_v<T, ArrayRead>) {
            long long idx = eval_int(x.index, st);
            auto it = st.arrays.find(x.array);
            if (it == st.arrays.end())
              throw Error("UnboundRead", "read of unassigned array '" + x.array + "'");
            check_index(x.array, idx, it->second.size(), 0);
            return it->second[static_cast<size_t>(idx)];
          } else if constexpr (std::is_same_v<T, ArrayLen>) {
            throw Error("Internal", "array length not resolved before evaluation");
          } else {
            return checked_bin(x.op, eval_int(x.lhs, st), eval_int(x.rhs, st));
          }
        },
        e->node);
  }

  bool eval_bool(const BoolExprPtr& e, State& st) const {
    return std::visit(
        [&](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Comparison>) {
            long long a = eval_int(x.lhs, st), b = eval_int(x.rhs, st);
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
            return eval_bool(x.lhs, st) && eval_bool(x.rhs, st);
          } else if constexpr (std::is_same_v<T, BoolOr>) {
            return eval_bool(x.lhs, st) || eval_bool(x.rhs, st);
          } else if constexpr (std::is_same_v<T, BoolNot>) {
            return !eval_bool(x.arg, st);
          } else if constexpr (std::is_same_v<T, BoolImplies>) {
            return !eval_bool(x.lhs, st) || eval_bool(x.rhs, st);
          } else if constexpr (std::is_same_v<T, ForAll>) {
            long long lo = eval_int(x.lo, st), hi = eval_int(x.hi, st);
            for (long long k = lo; k < hi; ++k) {
              auto saved = st.bound.find(x.var) != st.bound.end()
                               ? std::optional<long long>(st.bound[x.var])
                               : std::nullopt;
              st.bound[x.var] = k;
              bool ok = eval_bool(x.body, st);
              if (saved) st.bound[x.var] = *saved; else st.bound.erase(x.var);
              if (!ok) return false;
            }
            return true;
          } else {
            return x.value;
          }
        },
        e->node);
  }

  const ValidatedProgram& vp_;
  long long budget_;
};

}  // namespace locfaults
