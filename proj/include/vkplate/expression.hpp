#pragma once

// Closed-form field expressions in x1, x2, t:
//   numbers, x1 x2 t, pi e, + - * / ^ (right-associative), unary -,
//   parentheses, sin( ) cos( ) exp( ).
// Parsed once into a postfix program.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "vkplate/errors.hpp"

namespace vkplate {

/// Parse failure; `column` is 1-based within the expression text.
class ExpressionError : public ValidationError {
 public:
  ExpressionError(int column, const std::string& what)
      : ValidationError(what), column_(column) {}
  int column() const { return column_; }

 private:
  int column_;
};

class Expression {
 public:
  Expression() : Expression(0.0) {}
  explicit Expression(double constant) : source_(std::to_string(constant)) {
    program_.push_back({Op::constant, constant});
  }

  static Expression parse(std::string_view text) {
    Expression e;
    e.source_ = std::string(text);
    e.program_.clear();
    Parser p{text, 0, e.program_};
    p.skip_space();
    if (p.pos >= text.size()) throw ExpressionError(1, "empty expression");
    p.expr();
    p.skip_space();
    if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
    int depth = 0, max_depth = 0;
    for (const Instr& in : e.program_) {
      if (in.op <= Op::t) {
        ++depth;
      } else if (in.op <= Op::pow) {
        --depth;
      }
      max_depth = std::max(max_depth, depth);
    }
    if (max_depth > kMaxStack) throw ExpressionError(1, "expression too complex");
    return e;
  }

  double operator()(double x1, double x2, double t) const {
    double stack[kMaxStack];
    int top = 0;
    for (const Instr& in : program_) {
      switch (in.op) {
        case Op::constant: stack[top++] = in.value; break;
        case Op::x1: stack[top++] = x1; break;
        case Op::x2: stack[top++] = x2; break;
        case Op::t: stack[top++] = t; break;
        case Op::add: --top; stack[top - 1] += stack[top]; break;
        case Op::sub: --top; stack[top - 1] -= stack[top]; break;
        case Op::mul: --top; stack[top - 1] *= stack[top]; break;
        case Op::div: --top; stack[top - 1] /= stack[top]; break;
        case Op::pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
        case Op::neg: stack[top - 1] = -stack[top - 1]; break;
        case Op::sin: stack[top - 1] = std::sin(stack[top - 1]); break;
        case Op::cos: stack[top - 1] = std::cos(stack[top - 1]); break;
        case Op::exp: stack[top - 1] = std::exp(stack[top - 1]); break;
      }
    }
    return stack[0];
  }

  const std::string& source() const { return source_; }

  /// True when the program is a single constant zero.
  bool is_zero() const { return program_.size() == 1 && program_[0].op == Op::constant && program_[0].value == 0.0; }

 private:
  static constexpr int kMaxStack = 64;
  enum class Op { constant, x1, x2, t, add, sub, mul, div, pow, neg, sin, cos, exp };
  struct Instr {
    Op op;
    double value = 0.0;
  };

  struct Parser {
    std::string_view text;
    std::size_t pos;
    std::vector<Instr>& out;
    int depth = 0;

    [[noreturn]] void fail(const std::string& msg) const {
      throw ExpressionError(static_cast<int>(pos) + 1, msg);
    }
    void skip_space() {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool accept(char c) {
      skip_space();
      if (pos < text.size() && text[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    void emit(Op op, double v = 0.0) { out.push_back({op, v}); }

    void expr() {
      if (++depth > 40) fail("expression nested too deeply");
      term();
      for (;;) {
        if (accept('+')) {
          term();
          emit(Op::add);
        } else if (accept('-')) {
          term();
          emit(Op::sub);
        } else {
          break;
        }
      }
      --depth;
    }
    void term() {
      unary();
      for (;;) {
        if (accept('*')) {
          unary();
          emit(Op::mul);
        } else if (accept('/')) {
          unary();
          emit(Op::div);
        } else {
          break;
        }
      }
    }
    void unary() {
      if (accept('-')) {
        unary();
        emit(Op::neg);
      } else if (accept('+')) {
        unary();
      } else {
        power();
      }
    }
    void power() {
      primary();
      if (accept('^')) {
        unary();
        emit(Op::pow);
      }
    }
    void primary() {
      skip_space();
      if (pos >= text.size()) fail("unexpected end of expression");
      const char c = text[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const std::string rest(text.substr(pos));
        char* end = nullptr;
        const double v = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str()) fail("malformed number");
        pos += static_cast<std::size_t>(end - rest.c_str());
        emit(Op::constant, v);
        return;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < text.size() && std::isalnum(static_cast<unsigned char>(text[pos]))) ++pos;
        const std::string_view id = text.substr(start, pos - start);
        if (id == "x1") return emit(Op::x1);
        if (id == "x2") return emit(Op::x2);
        if (id == "t") return emit(Op::t);
        if (id == "pi") return emit(Op::constant, std::numbers::pi);
        if (id == "e") return emit(Op::constant, std::numbers::e);
        Op fn;
        if (id == "sin") {
          fn = Op::sin;
        } else if (id == "cos") {
          fn = Op::cos;
        } else if (id == "exp") {
          fn = Op::exp;
        } else {
          pos = start;
          fail("unknown identifier '" + std::string(id) + "'");
        }
        if (!accept('(')) fail("expected '(' after function name");
        expr();
        if (!accept(')')) fail("expected ')'");
        emit(fn);
        return;
      }
      if (accept('(')) {
        expr();
        if (!accept(')')) fail("expected ')'");
        return;
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }
  };

  std::string source_;
  std::vector<Instr> program_;
};

}  // namespace vkplate
