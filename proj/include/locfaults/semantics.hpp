#pragma once

#include <map>
#include <set>
#include <string>

#include "locfaults/ast.hpp"
#include "locfaults/errors.hpp"

namespace locfaults {

struct ValidatedProgram {
  SourceProgram program;                // array lengths resolved to literals
  std::map<std::string, VarType> symbols;
  bool has_return = false;
  std::set<int> stmt_lines;
};

namespace detail {

class SemanticChecker {
 public:
  ValidatedProgram run(const SourceProgram& in) {
    ValidatedProgram out;
    out.program = in;

    for (const auto& d : in.params) declare(d);
    for (const auto& d : in.locals) declare(d);

    if (!in.postcondition)
      throw Error("MissingPostcondition",
                  "program '" + in.name + "' has no postcondition");

    collect_lines(in.body, out.stmt_lines);

    out.program.body = check_stmts(in.body, /*top_level=*/true);
    for (auto& d : out.program.params) resolve_decl(d);
    for (auto& d : out.program.locals) resolve_decl(d);

    out.has_return = has_return_;
    if (in.precondition)
      out.program.precondition = check_bool(in.precondition, /*in_spec=*/true, 0);
    out.program.postcondition = check_bool(in.postcondition, /*in_spec=*/true, 0);
    if (result_used_ && !has_return_)
      throw Error("ResultWithoutReturn",
                  "postcondition references \\result but the program never returns");

    out.symbols = symbols_;
    if (has_return_) out.symbols["\\result"] = VarType{false, 0};
    return out;
  }

 private:
  void declare(const VarDecl& d) {
    if (symbols_.count(d.name))
      throw Error("DuplicateDeclaration",
                  "line " + std::to_string(d.line) + ": '" + d.name +
                      "' declared more than once");
    if (d.type.is_array && d.type.length <= 0)
      throw Error("ArrayLengthUnknown",
                  "line " + std::to_string(d.line) + ": array '" + d.name +
                      "' needs a compile-time length");
    symbols_[d.name] = d.type;
  }

  void resolve_decl(VarDecl&) {}  // lengths already explicit in the grammar

  void collect_lines(const std::vector<StmtPtr>& stmts, std::set<int>& lines) {
    for (const auto& s : stmts) {
      if (s->line <= 0)
        throw Error("BadLineNumber", "statement with non-positive line number");
      if (!lines.insert(s->line).second)
        throw Error("DuplicateStatementLine",
                    "line " + std::to_string(s->line) + ": two statements share a line");
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, SIf>) {
              collect_lines(x.then_body, lines);
              collect_lines(x.else_body, lines);
            } else if constexpr (std::is_same_v<T, SWhile>) {
              collect_lines(x.body, lines);
            }
          },
          s->node);
    }
  }

  std::vector<StmtPtr> check_stmts(const std::vector<StmtPtr>& stmts, bool top_level) {
    std::vector<StmtPtr> out;
    for (size_t i = 0; i < stmts.size(); ++i) {
      const Stmt& s = *stmts[i];
      bool is_return = std::holds_alternative<SReturn>(s.node);
      if (is_return && (!top_level || i + 1 != stmts.size()))
        throw Error("ReturnPlacement",
                    "line " + std::to_string(s.line) +
                        ": return is only allowed as the final statement");
      out.push_back(check_stmt(s));
    }
    return out;
  }

  StmtPtr check_stmt(const Stmt& s) {
    return std::visit(
        [&](const auto& x) -> StmtPtr {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, SAssign>) {
            const VarType& t = lookup(x.target.name, s.line);
            if (x.target.index) {
              if (!t.is_array)
                throw type_mismatch("'" + x.target.name + "' is not an array", s.line);
              return mk_stmt(s.line,
                             SAssign{LValue{x.target.name, check_int(x.target.index, s.line)},
                                     check_int(x.expr, s.line)});
            }
            if (t.is_array)
              throw type_mismatch("cannot assign whole array '" + x.target.name + "'", s.line);
            return mk_stmt(s.line, SAssign{x.target, check_int(x.expr, s.line)});
          } else if constexpr (std::is_same_v<T, SIf>) {
            return mk_stmt(s.line, SIf{check_bool(x.cond, false, s.line),
                                       check_stmts(x.then_body, false),
                                       check_stmts(x.else_body, false)});
          } else if constexpr (std::is_same_v<T, SWhile>) {
            return mk_stmt(s.line, SWhile{check_bool(x.cond, false, s.line),
                                          check_stmts(x.body, false)});
          } else {
            has_return_ = true;
            return mk_stmt(s.line, SReturn{check_int(x.expr, s.line)});
          }
        },
        s.node);
  }

  const VarType& lookup(const std::string& name, int line) {
    if (bound_.count(name)) return index_type_;
    auto it = symbols_.find(name);
    if (it == symbols_.end()) throw undeclared_variable(name, line);
    return it->second;
  }

  IntExprPtr check_int(const IntExprPtr& e, int line) {
    return std::visit(
        [&](const auto& x) -> IntExprPtr {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, IntLit>) {
            return mk_lit(x.value);
          } else if constexpr (std::is_same_v<T, IntVar>) {
            if (x.name == "\\result") {
              result_used_ = true;
              return mk_var(x.name);
            }
            if (lookup(x.name, line).is_array)
              throw type_mismatch("array '" + x.name + "' used as a scalar", line);
            return mk_var(x.name);
          } else if constexpr (std::is_same_v<T, ArrayRead>) {
            if (!lookup(x.array, line).is_array)
              throw type_mismatch("'" + x.array + "' is not an array", line);
            return mk_read(x.array, check_int(x.index, line));
          } else if constexpr (std::is_same_v<T, ArrayLen>) {
            const VarType& t = lookup(x.array, line);
            if (!t.is_array)
              throw type_mismatch("'" + x.array + "' has no length", line);
            return mk_lit(t.length);  // resolve to a constant
          } else {
            return mk_bin(x.op, check_int(x.lhs, line), check_int(x.rhs, line));
          }
        },
        e->node);
  }

  BoolExprPtr check_bool(const BoolExprPtr& e, bool in_spec, int line) {
    return std::visit(
        [&](const auto& x) -> BoolExprPtr {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Comparison>)
            return mk_cmp(x.cmp, check_int(x.lhs, line), check_int(x.rhs, line));
          else if constexpr (std::is_same_v<T, BoolAnd>)
            return mk_and(check_bool(x.lhs, in_spec, line), check_bool(x.rhs, in_spec, line));
          else if constexpr (std::is_same_v<T, BoolOr>)
            return mk_or(check_bool(x.lhs, in_spec, line), check_bool(x.rhs, in_spec, line));
          else if constexpr (std::is_same_v<T, BoolNot>)
            return mk_not(check_bool(x.arg, in_spec, line));
          else if constexpr (std::is_same_v<T, BoolImplies>)
            return mk_implies(check_bool(x.lhs, in_spec, line),
                              check_bool(x.rhs, in_spec, line));
          else if constexpr (std::is_same_v<T, ForAll>) {
            if (!in_spec)
              throw Error("QuantifierInStatement",
                          "line " + std::to_string(line) +
                              ": quantifiers are only allowed in specifications");
            IntExprPtr lo = check_int(x.lo, line);
            IntExprPtr hi = check_int(x.hi, line);
            bool fresh = bound_.insert(x.var).second;
            BoolExprPtr body = check_bool(x.body, in_spec, line);
            if (fresh) bound_.erase(x.var);
            return mk_forall(x.var, lo, hi, body);
          } else {
            return mk_bool(x.value);
          }
        },
        e->node);
  }

  std::map<std::string, VarType> symbols_;
  std::set<std::string> bound_;  // quantifier variables in scope
  VarType index_type_{false, 0};
  bool has_return_ = false;
  bool result_used_ = false;
};

}  // namespace detail

inline ValidatedProgram check_semantics(const SourceProgram& p) {
  return detail::SemanticChecker().run(p);
}

}  // namespace locfaults
