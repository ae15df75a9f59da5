#pragma once

// Shared expression syntax tree and recursive-descent parser.
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('+' | '-') unary | power
//   power  := atom ('^' ['-'] integer)?
//   atom   := integer | identifier | '(' expr ')' | identifier '(' expr (',' expr)* ')'
//
// Interpretation of identifiers and calls is left to the evaluator.

#include <cctype>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "engel/error.hpp"

namespace engel::expr {

enum class Kind { Integer, Ident, Add, Sub, Mul, Div, Neg, Pow, Call };

struct Node {
  Kind kind;
  std::size_t pos = 0;
  mpz_class integer;  // Integer
  long exponent = 0;  // Pow
  std::string name;   // Ident, Call
  std::vector<std::shared_ptr<const Node>> args;
};

using NodePtr = std::shared_ptr<const Node>;

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  NodePtr parse() {
    NodePtr n = parse_expr();
    skip_ws();
    if (i_ != s_.size()) throw parse_error("unexpected '" + std::string(1, s_[i_]) + "'", i_);
    return n;
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;

  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool peek(char c) {
    skip_ws();
    return i_ < s_.size() && s_[i_] == c;
  }
  bool eat(char c) {
    if (peek(c)) {
      ++i_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) {
      skip_ws();
      throw parse_error(std::string("expected '") + c + "'", i_);
    }
  }

  static NodePtr binary(Kind k, std::size_t pos, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->pos = pos;
    n->args = {std::move(a), std::move(b)};
    return n;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      skip_ws();
      std::size_t pos = i_;
      if (eat('+')) {
        lhs = binary(Kind::Add, pos, lhs, parse_term());
      } else if (eat('-')) {
        lhs = binary(Kind::Sub, pos, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      skip_ws();
      std::size_t pos = i_;
      if (eat('*')) {
        lhs = binary(Kind::Mul, pos, lhs, parse_unary());
      } else if (eat('/')) {
        lhs = binary(Kind::Div, pos, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    skip_ws();
    std::size_t pos = i_;
    if (eat('+')) return parse_unary();
    if (eat('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Kind::Neg;
      n->pos = pos;
      n->args = {parse_unary()};
      return n;
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    skip_ws();
    std::size_t pos = i_;
    if (!eat('^')) return base;
    bool neg = eat('-');
    skip_ws();
    std::size_t start = i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    if (start == i_) throw parse_error("expected integer exponent", i_);
    auto n = std::make_shared<Node>();
    n->kind = Kind::Pow;
    n->pos = pos;
    n->exponent = std::stol(std::string(s_.substr(start, i_ - start)));
    if (neg) n->exponent = -n->exponent;
    n->args = {base};
    return n;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (i_ >= s_.size()) throw parse_error("unexpected end of input", i_);
    std::size_t pos = i_;
    char c = s_[i_];
    if (c == '(') {
      ++i_;
      NodePtr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      auto n = std::make_shared<Node>();
      n->kind = Kind::Integer;
      n->pos = pos;
      n->integer = mpz_class(std::string(s_.substr(pos, i_ - pos)));
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))
        ++i_;
      std::string name(s_.substr(pos, i_ - pos));
      auto n = std::make_shared<Node>();
      n->pos = pos;
      n->name = name;
      if (eat('(')) {
        n->kind = Kind::Call;
        n->args.push_back(parse_expr());
        while (eat(',')) n->args.push_back(parse_expr());
        expect(')');
      } else {
        n->kind = Kind::Ident;
      }
      return n;
    }
    throw parse_error("unexpected '" + std::string(1, c) + "'", pos);
  }
};

inline NodePtr parse(std::string_view text) { return Parser(text).parse(); }

}  // namespace engel::expr
