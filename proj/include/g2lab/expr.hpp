#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace g2lab {

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(const std::string& msg, int l, int c)
      : std::runtime_error(msg + " at line " + std::to_string(l) + ", column " +
                           std::to_string(c)),
        line(l),
        column(c) {}
};

// Scalar expressions in the chart variables x1..x4.
//
//   expr    := term { (+|-) term }
//   term    := unary { (*|/) unary }
//   unary   := '-' unary | power
//   power   := primary [ '^' unary ]          (right associative)
//   primary := number | x1..x4 | fn '(' expr ')' | '(' expr ')'
//   fn      := sin | cos | exp | sqrt
class Expr {
 public:
  static Expr parse(std::string_view src) {
    Parser p(src);
    Expr e;
    e.root_ = p.parse_expr();
    p.expect_end();
    return e;
  }

  double eval(const std::array<double, 4>& x) const { return eval_node(*root_, x); }

 private:
  enum class Op { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt };

  struct Node {
    Op op;
    double value = 0.0;  // Num
    int var = 0;         // Var, 0-based
    std::unique_ptr<Node> a, b;
  };

  static double eval_node(const Node& n, const std::array<double, 4>& x) {
    switch (n.op) {
      case Op::Num: return n.value;
      case Op::Var: return x[size_t(n.var)];
      case Op::Add: return eval_node(*n.a, x) + eval_node(*n.b, x);
      case Op::Sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
      case Op::Mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
      case Op::Div: return eval_node(*n.a, x) / eval_node(*n.b, x);
      case Op::Pow: return std::pow(eval_node(*n.a, x), eval_node(*n.b, x));
      case Op::Neg: return -eval_node(*n.a, x);
      case Op::Sin: return std::sin(eval_node(*n.a, x));
      case Op::Cos: return std::cos(eval_node(*n.a, x));
      case Op::Exp: return std::exp(eval_node(*n.a, x));
      case Op::Sqrt: return std::sqrt(eval_node(*n.a, x));
    }
    return 0.0;
  }

  class Parser {
   public:
    explicit Parser(std::string_view src) : src_(src) {}

    std::unique_ptr<Node> parse_expr() {
      auto lhs = parse_term();
      while (true) {
        skip_ws();
        if (match('+'))
          lhs = binary(Op::Add, std::move(lhs), parse_term());
        else if (match('-'))
          lhs = binary(Op::Sub, std::move(lhs), parse_term());
        else
          return lhs;
      }
    }

    void expect_end() {
      skip_ws();
      if (pos_ < src_.size()) fail("unexpected trailing input");
    }

   private:
    std::unique_ptr<Node> parse_term() {
      auto lhs = parse_unary();
      while (true) {
        skip_ws();
        if (match('*'))
          lhs = binary(Op::Mul, std::move(lhs), parse_unary());
        else if (match('/'))
          lhs = binary(Op::Div, std::move(lhs), parse_unary());
        else
          return lhs;
      }
    }

    std::unique_ptr<Node> parse_unary() {
      skip_ws();
      if (match('-')) {
        auto n = std::make_unique<Node>();
        n->op = Op::Neg;
        n->a = parse_unary();
        return n;
      }
      return parse_power();
    }

    std::unique_ptr<Node> parse_power() {
      auto base = parse_primary();
      skip_ws();
      if (match('^')) return binary(Op::Pow, std::move(base), parse_unary());
      return base;
    }

    std::unique_ptr<Node> parse_primary() {
      skip_ws();
      if (pos_ >= src_.size()) fail("unexpected end of expression");
      const char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
      if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
      if (match('(')) {
        auto e = parse_expr();
        skip_ws();
        if (!match(')')) fail("expected ')'");
        return e;
      }
      fail(std::string("unexpected character '") + c + "'");
    }

    std::unique_ptr<Node> parse_number() {
      const size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
        advance();
      // exponent part, e.g. 1e-5
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        size_t save = pos_;
        advance();
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
        if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            advance();
        } else {
          pos_ = save;  // the 'e' was not an exponent
        }
      }
      auto n = std::make_unique<Node>();
      n->op = Op::Num;
      const std::string text(src_.substr(start, pos_ - start));
      try {
        size_t used = 0;
        n->value = std::stod(text, &used);
        if (used != text.size()) fail("malformed number '" + text + "'");
      } catch (const ParseError&) {
        throw;
      } catch (const std::exception&) {
        fail("malformed number '" + text + "'");
      }
      return n;
    }

    std::unique_ptr<Node> parse_name() {
      const size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_]))))
        advance();
      const std::string_view name = src_.substr(start, pos_ - start);
      if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '4') {
        auto n = std::make_unique<Node>();
        n->op = Op::Var;
        n->var = name[1] - '1';
        return n;
      }
      Op fn;
      if (name == "sin")
        fn = Op::Sin;
      else if (name == "cos")
        fn = Op::Cos;
      else if (name == "exp")
        fn = Op::Exp;
      else if (name == "sqrt")
        fn = Op::Sqrt;
      else
        fail("unknown identifier '" + std::string(name) + "'");
      skip_ws();
      if (!match('(')) fail("expected '(' after function name");
      auto arg = parse_expr();
      skip_ws();
      if (!match(')')) fail("expected ')'");
      auto n = std::make_unique<Node>();
      n->op = fn;
      n->a = std::move(arg);
      return n;
    }

    static std::unique_ptr<Node> binary(Op op, std::unique_ptr<Node> a, std::unique_ptr<Node> b) {
      auto n = std::make_unique<Node>();
      n->op = op;
      n->a = std::move(a);
      n->b = std::move(b);
      return n;
    }

    void skip_ws() {
      while (pos_ < src_.size() &&
             (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
        advance();
    }

    bool match(char c) {
      if (pos_ < src_.size() && src_[pos_] == c) {
        advance();
        return true;
      }
      return false;
    }

    void advance() {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, line_, col_); }

    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
  };

  std::shared_ptr<const Node> root_;
};

}  // namespace g2lab
