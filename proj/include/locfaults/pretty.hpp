#pragma once

#include <map>
#include <sstream>
#include <string>

#include "locfaults/ast.hpp"

namespace locfaults {

inline std::string expr_str(const IntExprPtr& e);
inline std::string expr_str(const BoolExprPtr& e);

inline std::string expr_str(const IntExprPtr& e) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, IntLit>) return std::to_string(x.value);
        else if constexpr (std::is_same_v<T, IntVar>) return x.name;
        else if constexpr (std::is_same_v<T, ArrayRead>)
          return x.array + "[" + expr_str(x.index) + "]";
        else if constexpr (std::is_same_v<T, ArrayLen>) return x.array + ".length";
        else
          return "(" + expr_str(x.lhs) + " " + std::string(1, x.op) + " " +
                 expr_str(x.rhs) + ")";
      },
      e->node);
}

inline std::string expr_str(const BoolExprPtr& e) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Comparison>)
          return "(" + expr_str(x.lhs) + " " + cmp_str(x.cmp) + " " + expr_str(x.rhs) + ")";
        else if constexpr (std::is_same_v<T, BoolAnd>)
          return "(" + expr_str(x.lhs) + " && " + expr_str(x.rhs) + ")";
        else if constexpr (std::is_same_v<T, BoolOr>)
          return "(" + expr_str(x.lhs) + " || " + expr_str(x.rhs) + ")";
        else if constexpr (std::is_same_v<T, BoolNot>)
          return "!" + expr_str(x.arg);
        else if constexpr (std::is_same_v<T, BoolImplies>)
          return "(" + expr_str(x.lhs) + " ==> " + expr_str(x.rhs) + ")";
        else if constexpr (std::is_same_v<T, ForAll>)
          return "(\\forall int " + x.var + "; (" + x.var + " >= " + expr_str(x.lo) +
                 " && " + x.var + " < " + expr_str(x.hi) + "); " + expr_str(x.body) + ")";
        else
          return x.value ? "(0 == 0)" : "(0 == 1)";
      },
      e->node);
}

// Prints a program back to source text, placing every statement on its
// recorded line so that reparsing yields a structurally identical AST.
class PrettyPrinter {
 public:
  std::string print(const SourceProgram& p) {
    out_.str("");
    line_ = 1;

    if (p.precondition || p.postcondition) {
      emit("/*@");
      if (p.precondition) emit(" requires " + expr_str(p.precondition) + ";");
      if (p.postcondition) emit(" ensures " + expr_str(p.postcondition) + ";");
      emit(" @*/");
      newline();
    }
    if (p.class_name) {
      emit("class " + *p.class_name + " {");
      newline();
    }

    // Map declaration lines so standalone declarations land where they were.
    for (const auto& d : p.locals)
      if (!d.fused_init) decl_at_[d.line].push_back(&d);

    pad_to(p.header_line);
    std::string header = "int " + p.name + " (";
    for (size_t i = 0; i < p.params.size(); ++i) {
      if (i) header += ", ";
      header += type_str(p.params[i].type) + " " + p.params[i].name;
    }
    header += ") {";
    emit(header);
    newline();

    init_types_ = {};
    for (const auto& d : p.locals)
      if (d.fused_init) init_types_[d.name] = d.type;

    print_stmts(p.body, 1);
    flush_decls(1 << 30);
    emit("}");
    if (p.class_name) {
      newline();
      emit("}");
    }
    newline();
    return out_.str();
  }

 private:
  static std::string type_str(const VarType& t) {
    if (!t.is_array) return "int";
    return "int[" + (t.length > 0 ? std::to_string(t.length) : std::string()) + "]";
  }

  void print_stmts(const std::vector<StmtPtr>& stmts, int depth) {
    for (const auto& s : stmts) print_stmt(*s, depth);
  }

  void print_stmt(const Stmt& s, int depth) {
    flush_decls(s.line);
    pad_to(s.line);
    std::string ind(static_cast<size_t>(depth) * 2, ' ');
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, SAssign>) {
            std::string lhs = x.target.name;
            if (x.target.index) lhs += "[" + expr_str(x.target.index) + "]";
            std::string prefix;
            auto it = init_types_.find(x.target.name);
            if (it != init_types_.end() && !x.target.index) {
              prefix = "int ";
              init_types_.erase(it);  // only the fused declaration site
            }
            emit(ind + prefix + lhs + " = " + expr_str(x.expr) + ";");
            newline();
          } else if constexpr (std::is_same_v<T, SIf>) {
            emit(ind + "if " + expr_str(x.cond) + " {");
            newline();
            print_stmts(x.then_body, depth + 1);
            if (!x.else_body.empty()) {
              pad_before_close(x.else_body.front()->line);
              emit(ind + "} else {");
              newline();
              print_stmts(x.else_body, depth + 1);
            }
            emit(ind + "}");
            newline();
          } else if constexpr (std::is_same_v<T, SWhile>) {
            emit(ind + "while " + expr_str(x.cond) + " {");
            newline();
            print_stmts(x.body, depth + 1);
            emit(ind + "}");
            newline();
          } else {
            emit(ind + "return " + expr_str(x.expr) + ";");
            newline();
          }
        },
        s.node);
  }

  void flush_decls(int before_line) {
    // Emit standalone declarations whose line precedes the next statement.
    while (!decl_at_.empty() && decl_at_.begin()->first < before_line) {
      auto it = decl_at_.begin();
      pad_to(it->first);
      for (const auto* d : it->second)
        emit("  " + type_str(d->type) + " " + d->name + "; ");
      newline();
      decl_at_.erase(it);
    }
  }

  void pad_to(int target) {
    while (line_ < target) newline();
  }

  void pad_before_close(int else_first_line) {
    // leave a free line for "} else {" when possible
    while (line_ + 1 < else_first_line) newline();
  }

  void emit(const std::string& s) { out_ << s; }
  void newline() { out_ << '\n'; ++line_; }

  std::ostringstream out_;
  int line_ = 1;
  std::map<int, std::vector<const VarDecl*>> decl_at_;
  std::map<std::string, VarType> init_types_;
};

inline std::string pretty_print(const SourceProgram& p) {
  return PrettyPrinter().print(p);
}

}  // namespace locfaults
