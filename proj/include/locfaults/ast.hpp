#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace locfaults {

// ---------------------------------------------------------------------------
// Expression trees. Immutable, shared freely (also across threads).
// ---------------------------------------------------------------------------

enum class Cmp { Eq, Ne, Lt, Le, Gt, Ge };

inline const char* cmp_str(Cmp c) {
  switch (c) {
    case Cmp::Eq: return "==";
    case Cmp::Ne: return "!=";
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Gt: return ">";
    case Cmp::Ge: return ">=";
  }
  return "?";
}

inline Cmp cmp_negate(Cmp c) {
  switch (c) {
    case Cmp::Eq: return Cmp::Ne;
    case Cmp::Ne: return Cmp::Eq;
    case Cmp::Lt: return Cmp::Ge;
    case Cmp::Le: return Cmp::Gt;
    case Cmp::Gt: return Cmp::Le;
    case Cmp::Ge: return Cmp::Lt;
  }
  return c;
}

struct IntExpr;
using IntExprPtr = std::shared_ptr<const IntExpr>;

struct IntLit { long long value = 0; };
struct IntVar { std::string name; };                 // scalar variable (or \result)
struct ArrayRead { std::string array; IntExprPtr index; };
struct ArrayLen { std::string array; };              // resolved to IntLit by semantics
struct IntBin { char op = '+'; IntExprPtr lhs, rhs; };  // op in {+,-,*}

struct IntExpr {
  std::variant<IntLit, IntVar, ArrayRead, ArrayLen, IntBin> node;
};

inline IntExprPtr mk_lit(long long v) { return std::make_shared<IntExpr>(IntExpr{IntLit{v}}); }
inline IntExprPtr mk_var(std::string n) { return std::make_shared<IntExpr>(IntExpr{IntVar{std::move(n)}}); }
inline IntExprPtr mk_read(std::string a, IntExprPtr i) {
  return std::make_shared<IntExpr>(IntExpr{ArrayRead{std::move(a), std::move(i)}});
}
inline IntExprPtr mk_len(std::string a) { return std::make_shared<IntExpr>(IntExpr{ArrayLen{std::move(a)}}); }
inline IntExprPtr mk_bin(char op, IntExprPtr l, IntExprPtr r) {
  return std::make_shared<IntExpr>(IntExpr{IntBin{op, std::move(l), std::move(r)}});
}

struct BoolExpr;
using BoolExprPtr = std::shared_ptr<const BoolExpr>;

struct Comparison { Cmp cmp = Cmp::Eq; IntExprPtr lhs, rhs; };
struct BoolAnd { BoolExprPtr lhs, rhs; };
struct BoolOr { BoolExprPtr lhs, rhs; };
struct BoolNot { BoolExprPtr arg; };
struct BoolImplies { BoolExprPtr lhs, rhs; };
// Quantifier over an integer index range [lo, hi). Specification-only.
struct ForAll { std::string var; IntExprPtr lo, hi; BoolExprPtr body; };
struct BoolLit { bool value = true; };

struct BoolExpr {
  std::variant<Comparison, BoolAnd, BoolOr, BoolNot, BoolImplies, ForAll, BoolLit> node;
};

inline BoolExprPtr mk_cmp(Cmp c, IntExprPtr l, IntExprPtr r) {
  return std::make_shared<BoolExpr>(BoolExpr{Comparison{c, std::move(l), std::move(r)}});
}
inline BoolExprPtr mk_and(BoolExprPtr l, BoolExprPtr r) {
  return std::make_shared<BoolExpr>(BoolExpr{BoolAnd{std::move(l), std::move(r)}});
}
inline BoolExprPtr mk_or(BoolExprPtr l, BoolExprPtr r) {
  return std::make_shared<BoolExpr>(BoolExpr{BoolOr{std::move(l), std::move(r)}});
}
inline BoolExprPtr mk_not(BoolExprPtr a) {
  return std::make_shared<BoolExpr>(BoolExpr{BoolNot{std::move(a)}});
}
inline BoolExprPtr mk_implies(BoolExprPtr l, BoolExprPtr r) {
  return std::make_shared<BoolExpr>(BoolExpr{BoolImplies{std::move(l), std::move(r)}});
}
inline BoolExprPtr mk_forall(std::string v, IntExprPtr lo, IntExprPtr hi, BoolExprPtr b) {
  return std::make_shared<BoolExpr>(
      BoolExpr{ForAll{std::move(v), std::move(lo), std::move(hi), std::move(b)}});
}
inline BoolExprPtr mk_bool(bool v) { return std::make_shared<BoolExpr>(BoolExpr{BoolLit{v}}); }

// ---------------------------------------------------------------------------
// Statements and programs.
// ---------------------------------------------------------------------------

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct LValue {
  std::string name;
  IntExprPtr index;  // null for scalars

  bool is_array() const { return index != nullptr; }
};

struct SAssign { LValue target; IntExprPtr expr; };
struct SIf { BoolExprPtr cond; std::vector<StmtPtr> then_body, else_body; };
struct SWhile { BoolExprPtr cond; std::vector<StmtPtr> body; };
struct SReturn { IntExprPtr expr; };

struct Stmt {
  int line = 0;
  std::variant<SAssign, SIf, SWhile, SReturn> node;
};

inline StmtPtr mk_stmt(int line, auto node) {
  return std::make_shared<Stmt>(Stmt{line, {std::move(node)}});
}

struct VarType {
  bool is_array = false;
  int length = 0;  // 0 = unknown until semantic checking resolves it

  friend bool operator==(const VarType&, const VarType&) = default;
};

struct VarDecl {
  std::string name;
  VarType type;
  int line = 0;          // declaration line
  bool fused_init = false;  // declared and initialized in one statement

  friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

struct SourceProgram {
  std::string name;
  std::optional<std::string> class_name;
  int header_line = 0;
  std::vector<VarDecl> params;
  std::vector<VarDecl> locals;
  std::vector<StmtPtr> body;
  BoolExprPtr precondition;   // optional
  BoolExprPtr postcondition;  // required (checked by semantics)
};

// ---------------------------------------------------------------------------
// Structural equality, line numbers included. Used by round-trip tests.
// ---------------------------------------------------------------------------

inline bool expr_equal(const IntExprPtr& a, const IntExprPtr& b);
inline bool expr_equal(const BoolExprPtr& a, const BoolExprPtr& b);

inline bool expr_equal(const IntExprPtr& a, const IntExprPtr& b) {
  if (!a || !b) return a == b;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b->node);
        if constexpr (std::is_same_v<T, IntLit>) return x.value == y.value;
        else if constexpr (std::is_same_v<T, IntVar>) return x.name == y.name;
        else if constexpr (std::is_same_v<T, ArrayRead>)
          return x.array == y.array && expr_equal(x.index, y.index);
        else if constexpr (std::is_same_v<T, ArrayLen>) return x.array == y.array;
        else return x.op == y.op && expr_equal(x.lhs, y.lhs) && expr_equal(x.rhs, y.rhs);
      },
      a->node);
}

inline bool expr_equal(const BoolExprPtr& a, const BoolExprPtr& b) {
  if (!a || !b) return a == b;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b->node);
        if constexpr (std::is_same_v<T, Comparison>)
          return x.cmp == y.cmp && expr_equal(x.lhs, y.lhs) && expr_equal(x.rhs, y.rhs);
        else if constexpr (std::is_same_v<T, BoolAnd> || std::is_same_v<T, BoolOr> ||
                           std::is_same_v<T, BoolImplies>)
          return expr_equal(x.lhs, y.lhs) && expr_equal(x.rhs, y.rhs);
        else if constexpr (std::is_same_v<T, BoolNot>) return expr_equal(x.arg, y.arg);
        else if constexpr (std::is_same_v<T, ForAll>)
          return x.var == y.var && expr_equal(x.lo, y.lo) && expr_equal(x.hi, y.hi) &&
                 expr_equal(x.body, y.body);
        else return x.value == y.value;
      },
      a->node);
}

inline bool stmt_equal(const StmtPtr& a, const StmtPtr& b);

inline bool stmts_equal(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!stmt_equal(a[i], b[i])) return false;
  return true;
}

inline bool stmt_equal(const StmtPtr& a, const StmtPtr& b) {
  if (a->line != b->line || a->node.index() != b->node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b->node);
        if constexpr (std::is_same_v<T, SAssign>)
          return x.target.name == y.target.name && expr_equal(x.target.index, y.target.index) &&
                 expr_equal(x.expr, y.expr);
        else if constexpr (std::is_same_v<T, SIf>)
          return expr_equal(x.cond, y.cond) && stmts_equal(x.then_body, y.then_body) &&
                 stmts_equal(x.else_body, y.else_body);
        else if constexpr (std::is_same_v<T, SWhile>)
          return expr_equal(x.cond, y.cond) && stmts_equal(x.body, y.body);
        else return expr_equal(x.expr, y.expr);
      },
      a->node);
}

inline bool program_equal(const SourceProgram& a, const SourceProgram& b) {
  return a.name == b.name && a.class_name == b.class_name && a.params == b.params &&
         a.locals == b.locals && stmts_equal(a.body, b.body) &&
         expr_equal(a.precondition, b.precondition) &&
         expr_equal(a.postcondition, b.postcondition);
}

}  // namespace locfaults
