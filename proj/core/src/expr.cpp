#include "dcm/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "dcm/error.hpp"

namespace dcm {

struct Expression::Node {
  enum class Op { num, x, y, add, sub, mul, div, pow, neg, call1, call2 } op = Op::num;
  double value = 0.0;
  double (*fn1)(double) = nullptr;
  double (*fn2)(double, double) = nullptr;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;

  double eval(Vec2 p) const {
    switch (op) {
      case Op::num: return value;
      case Op::x: return p.x;
      case Op::y: return p.y;
      case Op::add: return a->eval(p) + b->eval(p);
      case Op::sub: return a->eval(p) - b->eval(p);
      case Op::mul: return a->eval(p) * b->eval(p);
      case Op::div: return a->eval(p) / b->eval(p);
      case Op::pow: return std::pow(a->eval(p), b->eval(p));
      case Op::neg: return -a->eval(p);
      case Op::call1: return fn1(a->eval(p));
      case Op::call2: return fn2(a->eval(p), b->eval(p));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double fmax2(double a, double b) { return std::fmax(a, b); }
double fmin2(double a, double b) { return std::fmin(a, b); }
double exp1(double a) { return std::exp(a); }
double abs1(double a) { return std::fabs(a); }
double sqrt1(double a) { return std::sqrt(a); }
double log1(double a) { return std::log(a); }
double sin1(double a) { return std::sin(a); }
double cos1(double a) { return std::cos(a); }

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  // sum := product (('+'|'-') product)*
  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (eat('+')) {
        n = make(Op::add, n, product());
      } else if (eat('-')) {
        n = make(Op::sub, n, product());
      } else {
        return n;
      }
    }
  }

  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (eat('*')) {
        n = make(Op::mul, n, unary());
      } else if (eat('/')) {
        n = make(Op::div, n, unary());
      } else {
        return n;
      }
    }
  }

  // unary minus binds looser than ^, so -x^2 = -(x^2)
  NodePtr unary() {
    if (eat('-')) return make(Op::neg, unary());
    if (eat('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (eat('^')) return make(Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return name();
    if (eat('(')) {
      NodePtr n = sum();
      expect(')');
      return n;
    }
    fail("unexpected character");
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Expression::Node>();
    n->value = v;
    return n;
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
    }
    const std::string id = s_.substr(start, pos_ - start);
    if (id == "x") return make(Op::x);
    if (id == "y") return make(Op::y);
    if (id == "pi") {
      auto n = std::make_shared<Expression::Node>();
      n->value = std::numbers::pi;
      return n;
    }
    struct Unary {
      const char* name;
      double (*fn)(double);
    };
    static constexpr Unary unary_fns[] = {{"exp", exp1}, {"abs", abs1}, {"sqrt", sqrt1},
                                          {"log", log1}, {"sin", sin1}, {"cos", cos1}};
    for (const Unary& u : unary_fns) {
      if (id == u.name) {
        expect('(');
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::call1;
        n->fn1 = u.fn;
        n->a = sum();
        expect(')');
        return n;
      }
    }
    if (id == "max" || id == "min") {
      expect('(');
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::call2;
      n->fn2 = id == "max" ? fmax2 : fmin2;
      n->a = sum();
      expect(',');
      n->b = sum();
      expect(')');
      return n;
    }
    pos_ = start;
    fail("unknown identifier '" + id + "'");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw InputError("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text), root_(Parser(text_).parse()) {}

double Expression::operator()(Vec2 p) const { return root_->eval(p); }

}  // namespace dcm
