#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>

#include "locfaults/ast.hpp"
#include "locfaults/checked.hpp"
#include "locfaults/errors.hpp"
#include "locfaults/pretty.hpp"

namespace locfaults {

// A constraint is a boolean expression in negation normal form: conjunctions
// and disjunctions over comparison atoms, negation folded into comparators.
struct Constraint {
  BoolExprPtr expr;

  std::string str() const { return expr ? expr_str(expr) : "true"; }
};

enum class Branch { Then, Else };

// ---------------------------------------------------------------------------
// Constant folding and substitution
// ---------------------------------------------------------------------------

inline std::optional<long long> const_eval(const IntExprPtr& e) {
  return std::visit(
      [](const auto& x) -> std::optional<long long> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, IntLit>) return x.value;
        else if constexpr (std::is_same_v<T, IntBin>) {
          auto l = const_eval(x.lhs), r = const_eval(x.rhs);
          if (!l || !r) return std::nullopt;
          return checked_bin(x.op, *l, *r);
        } else return std::nullopt;
      },
      e->node);
}

inline IntExprPtr subst_int(const IntExprPtr& e, const std::string& var, long long value);
inline BoolExprPtr subst_bool(const BoolExprPtr& e, const std::string& var, long long value);

inline IntExprPtr subst_int(const IntExprPtr& e, const std::string& var, long long value) {
  return std::visit(
      [&](const auto& x) -> IntExprPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, IntVar>)
          return x.name == var ? mk_lit(value) : e;
        else if constexpr (std::is_same_v<T, ArrayRead>)
          return mk_read(x.array, subst_int(x.index, var, value));
        else if constexpr (std::is_same_v<T, IntBin>)
          return mk_bin(x.op, subst_int(x.lhs, var, value), subst_int(x.rhs, var, value));
        else return e;
      },
      e->node);
}

inline BoolExprPtr subst_bool(const BoolExprPtr& e, const std::string& var, long long value) {
  return std::visit(
      [&](const auto& x) -> BoolExprPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Comparison>)
          return mk_cmp(x.cmp, subst_int(x.lhs, var, value), subst_int(x.rhs, var, value));
        else if constexpr (std::is_same_v<T, BoolAnd>)
          return mk_and(subst_bool(x.lhs, var, value), subst_bool(x.rhs, var, value));
        else if constexpr (std::is_same_v<T, BoolOr>)
          return mk_or(subst_bool(x.lhs, var, value), subst_bool(x.rhs, var, value));
        else if constexpr (std::is_same_v<T, BoolNot>)
          return mk_not(subst_bool(x.arg, var, value));
        else if constexpr (std::is_same_v<T, BoolImplies>)
          return mk_implies(subst_bool(x.lhs, var, value), subst_bool(x.rhs, var, value));
        else if constexpr (std::is_same_v<T, ForAll>) {
          if (x.var == var)  // shadowed
            return mk_forall(x.var, subst_int(x.lo, var, value),
                             subst_int(x.hi, var, value), x.body);
          return mk_forall(x.var, subst_int(x.lo, var, value), subst_int(x.hi, var, value),
                           subst_bool(x.body, var, value));
        } else return e;
      },
      e->node);
}

// Renames scalar variables and array bases (used by the single-assignment
// rewrite and by copy-chain resolution).
using Rename = std::function<std::string(const std::string&)>;

inline IntExprPtr rename_int(const IntExprPtr& e, const Rename& f);
inline BoolExprPtr rename_bool(const BoolExprPtr& e, const Rename& f);

inline IntExprPtr rename_int(const IntExprPtr& e, const Rename& f) {
  return std::visit(
      [&](const auto& x) -> IntExprPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, IntVar>) return mk_var(f(x.name));
        else if constexpr (std::is_same_v<T, ArrayRead>)
          return mk_read(f(x.array), rename_int(x.index, f));
        else if constexpr (std::is_same_v<T, IntBin>)
          return mk_bin(x.op, rename_int(x.lhs, f), rename_int(x.rhs, f));
        else if constexpr (std::is_same_v<T, ArrayLen>) return mk_len(f(x.array));
        else return e;
      },
      e->node);
}

inline BoolExprPtr rename_bool(const BoolExprPtr& e, const Rename& f) {
  return std::visit(
      [&](const auto& x) -> BoolExprPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Comparison>)
          return mk_cmp(x.cmp, rename_int(x.lhs, f), rename_int(x.rhs, f));
        else if constexpr (std::is_same_v<T, BoolAnd>)
          return mk_and(rename_bool(x.lhs, f), rename_bool(x.rhs, f));
        else if constexpr (std::is_same_v<T, BoolOr>)
          return mk_or(rename_bool(x.lhs, f), rename_bool(x.rhs, f));
        else if constexpr (std::is_same_v<T, BoolNot>)
          return mk_not(rename_bool(x.arg, f));
        else if constexpr (std::is_same_v<T, BoolImplies>)
          return mk_implies(rename_bool(x.lhs, f), rename_bool(x.rhs, f));
        else if constexpr (std::is_same_v<T, ForAll>) {
          // the quantified index is a bound name, not a program variable
          std::string qv = x.var;
          Rename g = [&](const std::string& n) { return n == qv ? n : f(n); };
          return mk_forall(qv, rename_int(x.lo, g), rename_int(x.hi, g),
                           rename_bool(x.body, g));
        } else return e;
      },
      e->node);
}

// ---------------------------------------------------------------------------
// Quantifier expansion
// ---------------------------------------------------------------------------

// Replaces every ForAll over a constant range with a finite conjunction.
inline BoolExprPtr expand_quantifiers(const BoolExprPtr& e) {
  return std::visit(
      [&](const auto& x) -> BoolExprPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ForAll>) {
          auto lo = const_eval(x.lo), hi = const_eval(x.hi);
          if (!lo || !hi)
            throw Error("UnboundedQuantifier",
                        "quantifier bounds are not compile-time constants");
          BoolExprPtr acc;
          for (long long k = *lo; k < *hi; ++k) {
            BoolExprPtr inst = expand_quantifiers(subst_bool(x.body, x.var, k));
            acc = acc ? mk_and(acc, inst) : inst;
          }
          return acc ? acc : mk_bool(true);
        } else if constexpr (std::is_same_v<T, BoolAnd>) {
          return mk_and(expand_quantifiers(x.lhs), expand_quantifiers(x.rhs));
        } else if constexpr (std::is_same_v<T, BoolOr>) {
          return mk_or(expand_quantifiers(x.lhs), expand_quantifiers(x.rhs));
        } else if constexpr (std::is_same_v<T, BoolNot>) {
          return mk_not(expand_quantifiers(x.arg));
        } else if constexpr (std::is_same_v<T, BoolImplies>) {
          return mk_implies(expand_quantifiers(x.lhs), expand_quantifiers(x.rhs));
        } else {
          return e;
        }
      },
      e->node);
}

// ---------------------------------------------------------------------------
// Negation normal form and condition flipping
// ---------------------------------------------------------------------------

inline BoolExprPtr nnf(const BoolExprPtr& e, bool negate = false) {
  return std::visit(
      [&](const auto& x) -> BoolExprPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          return negate ? mk_cmp(cmp_negate(x.cmp), x.lhs, x.rhs) : mk_cmp(x.cmp, x.lhs, x.rhs);
        } else if constexpr (std::is_same_v<T, BoolAnd>) {
          return negate ? mk_or(nnf(x.lhs, true), nnf(x.rhs, true))
                        : mk_and(nnf(x.lhs, false), nnf(x.rhs, false));
        } else if constexpr (std::is_same_v<T, BoolOr>) {
          return negate ? mk_and(nnf(x.lhs, true), nnf(x.rhs, true))
                        : mk_or(nnf(x.lhs, false), nnf(x.rhs, false));
        } else if constexpr (std::is_same_v<T, BoolNot>) {
          return nnf(x.arg, !negate);
        } else if constexpr (std::is_same_v<T, BoolImplies>) {
          // a ==> b  ===  !a || b
          return negate ? mk_and(nnf(x.lhs, false), nnf(x.rhs, true))
                        : mk_or(nnf(x.lhs, true), nnf(x.rhs, false));
        } else if constexpr (std::is_same_v<T, ForAll>) {
          throw Error("Internal", "quantifier must be expanded before NNF");
        } else {
          return mk_bool(negate ? !x.value : x.value);
        }
      },
      e->node);
}

// Constraint enforcing the branch opposite to the one actually taken.
inline Constraint flip(const BoolExprPtr& cond, Branch taken) {
  return Constraint{taken == Branch::Then ? nnf(cond, true) : nnf(cond, false)};
}

// ---------------------------------------------------------------------------
// Variable collection (solver-facing: array reads must have constant index)
// ---------------------------------------------------------------------------

inline std::string cell_name(const std::string& array, long long index) {
  return array + "[" + std::to_string(index) + "]";
}

inline void collect_vars(const IntExprPtr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, IntVar>) {
          out.insert(x.name);
        } else if constexpr (std::is_same_v<T, ArrayRead>) {
          auto idx = const_eval(x.index);
          if (!idx)
            throw Error("Internal", "array read with non-constant index in constraint");
          out.insert(cell_name(x.array, *idx));
        } else if constexpr (std::is_same_v<T, IntBin>) {
          collect_vars(x.lhs, out);
          collect_vars(x.rhs, out);
        }
      },
      e->node);
}

inline void collect_vars(const BoolExprPtr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          collect_vars(x.lhs, out);
          collect_vars(x.rhs, out);
        } else if constexpr (std::is_same_v<T, BoolAnd> || std::is_same_v<T, BoolOr> ||
                             std::is_same_v<T, BoolImplies>) {
          collect_vars(x.lhs, out);
          collect_vars(x.rhs, out);
        } else if constexpr (std::is_same_v<T, BoolNot>) {
          collect_vars(x.arg, out);
        } else if constexpr (std::is_same_v<T, ForAll>) {
          throw Error("Internal", "quantifier in solver constraint");
        }
      },
      e->node);
}

}  // namespace locfaults
