#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "locfaults/errors.hpp"

namespace locfaults {

enum class Tok {
  Ident, Int, Punct,
  KwClass, KwInt, KwVoid, KwIf, KwElse, KwWhile, KwReturn,
  KwRequires, KwEnsures,
  Forall, Result,
  SpecStart, SpecEnd,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  long long value = 0;
  int line = 1, col = 1;
};

// Tokenizes a .mimp file. Specification blocks (/*@ ... @*/ or /*@ ... */)
// are lexed too, bracketed by SpecStart/SpecEnd; leading '@' continuation
// markers inside them are skipped. Plain comments are dropped.
class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { run(); }

  const std::vector<Token>& tokens() const { return toks_; }

 private:
  void run() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') { ++line_; col_ = 1; ++pos_; continue; }
      if (std::isspace(static_cast<unsigned char>(c))) { adv(); continue; }
      if (c == '/' && peek(1) == '/') { skip_line(); continue; }
      if (c == '/' && peek(1) == '*') {
        if (peek(2) == '@') { lex_spec_block(); } else { skip_block_comment(); }
        continue;
      }
      if (in_spec_ && c == '@') {
        // continuation marker; "@*/" closes the block
        if (peek(1) == '*' && peek(2) == '/') { close_spec(); adv(); adv(); adv(); continue; }
        adv();
        continue;
      }
      if (in_spec_ && c == '*' && peek(1) == '/') { close_spec(); adv(); adv(); continue; }
      if (std::isdigit(static_cast<unsigned char>(c))) { lex_int(); continue; }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') { lex_ident(); continue; }
      if (c == '\\') { lex_backslash_word(); continue; }
      lex_punct();
    }
    push(Tok::End, "");
  }

  char peek(size_t off) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }
  void adv() { ++pos_; ++col_; }

  void skip_line() {
    while (pos_ < src_.size() && src_[pos_] != '\n') adv();
  }

  void skip_block_comment() {
    adv(); adv();
    while (pos_ < src_.size()) {
      if (src_[pos_] == '*' && peek(1) == '/') { adv(); adv(); return; }
      if (src_[pos_] == '\n') { ++line_; col_ = 1; ++pos_; } else adv();
    }
    throw SyntaxError(line_, col_, "unterminated comment");
  }

  void lex_spec_block() {
    push(Tok::SpecStart, "/*@");
    adv(); adv(); adv();
    in_spec_ = true;
  }

  void close_spec() {
    push(Tok::SpecEnd, "*/");
    in_spec_ = false;
  }

  void lex_int() {
    int l = line_, c = col_;
    std::string text;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      text += src_[pos_];
      adv();
    }
    long long v = 0;
    try {
      v = std::stoll(text);
    } catch (...) {
      throw SyntaxError(l, c, "integer literal out of range: " + text);
    }
    // Literals beyond the evaluable range would overflow constraint
    // arithmetic; reject them up front.
    if (v > (1LL << 30)) throw SyntaxError(l, c, "integer literal too large: " + text);
    Token t{Tok::Int, text, v, l, c};
    toks_.push_back(t);
  }

  void lex_ident() {
    int l = line_, c = col_;
    std::string text;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      text += src_[pos_];
      adv();
    }
    Tok k = Tok::Ident;
    if (text == "class") k = Tok::KwClass;
    else if (text == "int") k = Tok::KwInt;
    else if (text == "void") k = Tok::KwVoid;
    else if (text == "if") k = Tok::KwIf;
    else if (text == "else") k = Tok::KwElse;
    else if (text == "while") k = Tok::KwWhile;
    else if (text == "return") k = Tok::KwReturn;
    else if (text == "requires") k = Tok::KwRequires;
    else if (text == "ensures") k = Tok::KwEnsures;
    toks_.push_back(Token{k, text, 0, l, c});
  }

  void lex_backslash_word() {
    int l = line_, c = col_;
    adv();
    std::string text;
    while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) {
      text += src_[pos_];
      adv();
    }
    if (text == "forall") toks_.push_back(Token{Tok::Forall, "\\forall", 0, l, c});
    else if (text == "result") toks_.push_back(Token{Tok::Result, "\\result", 0, l, c});
    else throw SyntaxError(l, c, "unknown escape '\\" + text + "'");
  }

  void lex_punct() {
    int l = line_, c = col_;
    static const char* two_plus[] = {"==>", "==", "!=", "<=", ">=", "&&", "||"};
    for (const char* p : two_plus) {
      size_t n = std::string_view(p).size();
      if (src_.substr(pos_, n) == p) {
        toks_.push_back(Token{Tok::Punct, p, 0, l, c});
        for (size_t i = 0; i < n; ++i) adv();
        return;
      }
    }
    static const std::string singles = "<>!=+-*()[]{};,.";
    if (singles.find(src_[pos_]) != std::string::npos) {
      toks_.push_back(Token{Tok::Punct, std::string(1, src_[pos_]), 0, l, c});
      adv();
      return;
    }
    throw SyntaxError(l, c, std::string("unexpected character '") + src_[pos_] + "'");
  }

  void push(Tok k, std::string text) {
    toks_.push_back(Token{k, std::move(text), 0, line_, col_});
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  bool in_spec_ = false;
  std::vector<Token> toks_;
};

}  // namespace locfaults
