#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "locfaults/ast.hpp"
#include "locfaults/errors.hpp"
#include "locfaults/lexer.hpp"

namespace locfaults {

// Recursive-descent parser for the mini imperative language. Expressions are
// parsed with a unified precedence climb and classified as int/bool on the
// fly, which keeps parenthesized booleans unambiguous without backtracking.
class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src), toks_(lex_.tokens()) {}

  SourceProgram parse() {
    SourceProgram p;
    parse_spec_blocks(p);
    if (at(Tok::KwClass)) {
      next();
      p.class_name = expect_ident("class name");
      expect_punct("{");
      parse_spec_blocks(p);
    }
    parse_method(p);
    if (p.class_name) expect_punct("}");
    expect(Tok::End, "end of file");
    return p;
  }

 private:
  // ---- specification annotations ----

  void parse_spec_blocks(SourceProgram& p) {
    while (at(Tok::SpecStart)) {
      next();
      while (!at(Tok::SpecEnd)) {
        if (at(Tok::KwRequires)) {
          next();
          BoolExprPtr e = to_bool(parse_expr(), cur().line);
          p.precondition = p.precondition ? mk_and(p.precondition, e) : e;
        } else if (at(Tok::KwEnsures)) {
          next();
          BoolExprPtr e = to_bool(parse_expr(), cur().line);
          p.postcondition = p.postcondition ? mk_and(p.postcondition, e) : e;
        } else {
          throw err("expected 'requires' or 'ensures' in specification");
        }
        expect_punct(";");
      }
      next();  // SpecEnd
    }
  }

  // ---- program structure ----

  void parse_method(SourceProgram& p) {
    if (at(Tok::KwInt) || at(Tok::KwVoid)) {
      p.header_line = cur().line;
      next();
    } else {
      throw err("expected method return type");
    }
    p.name = expect_ident("method name");
    expect_punct("(");
    if (!at_punct(")")) {
      for (;;) {
        p.params.push_back(parse_param());
        if (at_punct(",")) { next(); continue; }
        break;
      }
    }
    expect_punct(")");
    p.body = parse_block(p);
  }

  VarDecl parse_param() {
    VarDecl d;
    d.line = cur().line;
    expect(Tok::KwInt, "'int'");
    if (at_punct("[")) {
      next();
      d.type.is_array = true;
      if (at(Tok::Int)) {
        d.type.length = static_cast<int>(cur().value);
        next();
      }  // "int[]" leaves length unknown; semantics rejects it
      expect_punct("]");
    }
    d.name = expect_ident("parameter name");
    return d;
  }

  std::vector<StmtPtr> parse_block(SourceProgram& p) {
    expect_punct("{");
    std::vector<StmtPtr> out;
    while (!at_punct("}")) parse_stmt_into(p, out);
    next();
    return out;
  }

  std::vector<StmtPtr> parse_block_or_stmt(SourceProgram& p) {
    if (at_punct("{")) return parse_block(p);
    std::vector<StmtPtr> out;
    parse_stmt_into(p, out);
    return out;
  }

  void parse_stmt_into(SourceProgram& p, std::vector<StmtPtr>& out) {
    int line = cur().line;
    if (at(Tok::KwInt)) {  // local declaration, possibly with initializer
      next();
      VarDecl d;
      d.line = line;
      if (at_punct("[")) {
        next();
        d.type.is_array = true;
        if (at(Tok::Int)) { d.type.length = static_cast<int>(cur().value); next(); }
        expect_punct("]");
      }
      d.name = expect_ident("variable name");
      if (at_punct("=")) {
        if (d.type.is_array) throw err("array declarations cannot be initialized");
        next();
        IntExprPtr rhs = to_int(parse_expr(), line);
        d.fused_init = true;
        out.push_back(mk_stmt(line, SAssign{LValue{d.name, nullptr}, rhs}));
      }
      expect_punct(";");
      p.locals.push_back(d);
      return;
    }
    if (at(Tok::KwIf)) {
      next();
      expect_punct("(");
      BoolExprPtr cond = to_bool(parse_expr(), line);
      expect_punct(")");
      auto then_body = parse_block_or_stmt(p);
      std::vector<StmtPtr> else_body;
      if (at(Tok::KwElse)) {
        next();
        else_body = parse_block_or_stmt(p);
      }
      out.push_back(mk_stmt(line, SIf{cond, std::move(then_body), std::move(else_body)}));
      return;
    }
    if (at(Tok::KwWhile)) {
      next();
      expect_punct("(");
      BoolExprPtr cond = to_bool(parse_expr(), line);
      expect_punct(")");
      auto body = parse_block_or_stmt(p);
      out.push_back(mk_stmt(line, SWhile{cond, std::move(body)}));
      return;
    }
    if (at(Tok::KwReturn)) {
      next();
      IntExprPtr e = to_int(parse_expr(), line);
      expect_punct(";");
      out.push_back(mk_stmt(line, SReturn{e}));
      return;
    }
    if (at(Tok::Ident)) {
      std::string name = cur().text;
      next();
      IntExprPtr index;
      if (at_punct("[")) {
        next();
        index = to_int(parse_expr(), line);
        expect_punct("]");
      }
      expect_punct("=");
      IntExprPtr rhs = to_int(parse_expr(), line);
      expect_punct(";");
      out.push_back(mk_stmt(line, SAssign{LValue{name, index}, rhs}));
      return;
    }
    throw err("expected statement");
  }

  // ---- expressions ----

  using Val = std::variant<IntExprPtr, BoolExprPtr>;

  IntExprPtr to_int(Val v, int line) {
    if (auto* e = std::get_if<IntExprPtr>(&v)) return *e;
    throw SyntaxError(line, 1, "type mismatch: expected integer expression");
  }

  BoolExprPtr to_bool(Val v, int line) {
    if (auto* e = std::get_if<BoolExprPtr>(&v)) return *e;
    throw SyntaxError(line, 1, "type mismatch: expected boolean expression");
  }

  Val parse_expr() { return parse_implies(); }

  Val parse_implies() {
    Val lhs = parse_or();
    if (at_punct("==>")) {
      int line = cur().line;
      next();
      Val rhs = parse_implies();  // right associative
      return Val{mk_implies(to_bool(lhs, line), to_bool(rhs, line))};
    }
    return lhs;
  }

  Val parse_or() {
    Val lhs = parse_and();
    while (at_punct("||")) {
      int line = cur().line;
      next();
      Val rhs = parse_and();
      lhs = Val{mk_or(to_bool(lhs, line), to_bool(rhs, line))};
    }
    return lhs;
  }

  Val parse_and() {
    Val lhs = parse_cmp();
    while (at_punct("&&")) {
      int line = cur().line;
      next();
      Val rhs = parse_cmp();
      lhs = Val{mk_and(to_bool(lhs, line), to_bool(rhs, line))};
    }
    return lhs;
  }

  Val parse_cmp() {
    Val lhs = parse_add();
    static const std::pair<const char*, Cmp> ops[] = {
        {"==", Cmp::Eq}, {"!=", Cmp::Ne}, {"<=", Cmp::Le},
        {">=", Cmp::Ge}, {"<", Cmp::Lt},  {">", Cmp::Gt}};
    for (auto [txt, op] : ops) {
      if (at_punct(txt)) {
        int line = cur().line;
        next();
        Val rhs = parse_add();
        return Val{mk_cmp(op, to_int(lhs, line), to_int(rhs, line))};
      }
    }
    return lhs;
  }

  Val parse_add() {
    Val lhs = parse_mul();
    while (at_punct("+") || at_punct("-")) {
      char op = cur().text[0];
      int line = cur().line;
      next();
      Val rhs = parse_mul();
      lhs = Val{mk_bin(op, to_int(lhs, line), to_int(rhs, line))};
    }
    return lhs;
  }

  Val parse_mul() {
    Val lhs = parse_unary();
    while (at_punct("*")) {
      int line = cur().line;
      next();
      Val rhs = parse_unary();
      lhs = Val{mk_bin('*', to_int(lhs, line), to_int(rhs, line))};
    }
    return lhs;
  }

  Val parse_unary() {
    if (at_punct("-")) {
      int line = cur().line;
      next();
      Val v = parse_unary();
      return Val{mk_bin('-', mk_lit(0), to_int(v, line))};
    }
    if (at_punct("!")) {
      int line = cur().line;
      next();
      Val v = parse_unary();
      return Val{mk_not(to_bool(v, line))};
    }
    return parse_primary();
  }

  Val parse_primary() {
    if (at(Tok::Int)) {
      long long v = cur().value;
      next();
      return Val{mk_lit(v)};
    }
    if (at(Tok::Result)) {
      next();
      return Val{mk_var("\\result")};
    }
    if (at(Tok::Ident)) {
      std::string name = cur().text;
      if (name == "true" || name == "false") {
        next();
        return Val{mk_bool(name == "true")};
      }
      next();
      if (at_punct("[")) {
        next();
        IntExprPtr idx = to_int(parse_expr(), cur().line);
        expect_punct("]");
        return Val{mk_read(name, idx)};
      }
      if (at_punct(".")) {
        next();
        std::string field = expect_ident("field name");
        if (field != "length") throw err("unknown field '." + field + "'");
        return Val{mk_len(name)};
      }
      return Val{mk_var(name)};
    }
    if (at_punct("(")) {
      next();
      if (at(Tok::Forall)) return parse_forall_tail();
      Val v = parse_expr();
      expect_punct(")");
      return v;
    }
    throw err("expected expression");
  }

  // "(\forall int k; (k >= 0 && k < n); body)"; the range predicate is
  // normalized to a half-open interval [lo, hi).
  Val parse_forall_tail() {
    int line = cur().line;
    next();  // \forall
    expect(Tok::KwInt, "'int'");
    std::string var = expect_ident("quantified variable");
    expect_punct(";");
    BoolExprPtr range = to_bool(parse_expr(), line);
    expect_punct(";");
    BoolExprPtr body = to_bool(parse_expr(), line);
    expect_punct(")");

    auto [lo, hi] = split_range(range, var, line);
    return Val{mk_forall(var, lo, hi, body)};
  }

  std::pair<IntExprPtr, IntExprPtr> split_range(const BoolExprPtr& range,
                                                const std::string& var, int line) {
    const auto* conj = std::get_if<BoolAnd>(&range->node);
    if (!conj) throw SyntaxError(line, 1, "quantifier range must be a conjunction of bounds");
    auto bound = [&](const BoolExprPtr& e, bool lower) -> IntExprPtr {
      const auto* c = std::get_if<Comparison>(&e->node);
      if (!c) throw SyntaxError(line, 1, "quantifier bound must be a comparison");
      const auto* v = std::get_if<IntVar>(&c->lhs->node);
      if (!v || v->name != var)
        throw SyntaxError(line, 1, "quantifier bound must constrain the quantified variable");
      if (lower) {
        if (c->cmp == Cmp::Ge) return c->rhs;                       // k >= lo
        if (c->cmp == Cmp::Gt) return mk_bin('+', c->rhs, mk_lit(1));  // k > lo-1
      } else {
        if (c->cmp == Cmp::Lt) return c->rhs;                       // k < hi
        if (c->cmp == Cmp::Le) return mk_bin('+', c->rhs, mk_lit(1));  // k <= hi-1
      }
      throw SyntaxError(line, 1, "unsupported quantifier bound form");
    };
    return {bound(conj->lhs, true), bound(conj->rhs, false)};
  }

  // ---- token helpers ----

  const Token& cur() const { return toks_[i_]; }
  void next() { if (i_ + 1 < toks_.size()) ++i_; }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_punct(std::string_view p) const {
    return cur().kind == Tok::Punct && cur().text == p;
  }

  void expect(Tok k, const std::string& what) {
    if (!at(k)) throw err("expected " + what);
    next();
  }

  void expect_punct(std::string_view p) {
    if (!at_punct(p)) throw err("expected '" + std::string(p) + "'");
    next();
  }

  std::string expect_ident(const std::string& what) {
    if (!at(Tok::Ident)) throw err("expected " + what);
    std::string s = cur().text;
    next();
    return s;
  }

  SyntaxError err(const std::string& msg) const {
    return SyntaxError(cur().line, cur().col, msg + " (got '" + cur().text + "')");
  }

  Lexer lex_;
  const std::vector<Token>& toks_;
  size_t i_ = 0;
};

inline SourceProgram parse_program(std::string_view text) {
  return Parser(text).parse();
}

}  // namespace locfaults
