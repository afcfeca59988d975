#include "navslip/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "navslip/error.hpp"

namespace navslip {

struct Expression::Node {
  Kind kind = Kind::Const;
  double value = 0.0;
  std::vector<Expression> args;
};

Expression::Expression() : Expression(0.0) {}

Expression::Expression(double constant) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->value = constant;
  node_ = std::move(n);
}

Expression::Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expression Expression::make(Kind kind, std::vector<Expression> args) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->args = std::move(args);
  return Expression(std::shared_ptr<const Node>(std::move(n)));
}

Expression Expression::variable() { return make(Kind::Var, {}); }

Expression::Kind Expression::kind() const { return node_->kind; }

Expression operator+(const Expression& a, const Expression& b) {
  return Expression::make(Expression::Kind::Add, {a, b});
}
Expression operator-(const Expression& a, const Expression& b) {
  return Expression::make(Expression::Kind::Sub, {a, b});
}
Expression operator*(const Expression& a, const Expression& b) {
  return Expression::make(Expression::Kind::Mul, {a, b});
}
Expression operator/(const Expression& a, const Expression& b) {
  return Expression::make(Expression::Kind::Div, {a, b});
}
Expression operator-(const Expression& a) { return Expression::make(Expression::Kind::Neg, {a}); }
Expression pow(const Expression& a, const Expression& b) {
  return Expression::make(Expression::Kind::Pow, {a, b});
}
Expression sin(const Expression& a) { return Expression::make(Expression::Kind::Sin, {a}); }
Expression cos(const Expression& a) { return Expression::make(Expression::Kind::Cos, {a}); }
Expression exp(const Expression& a) { return Expression::make(Expression::Kind::Exp, {a}); }
Expression tanh(const Expression& a) { return Expression::make(Expression::Kind::Tanh, {a}); }
Expression log(const Expression& a) { return Expression::make(Expression::Kind::Log, {a}); }

Expression smoothstep(const Expression& arg, double center, double width) {
  return 0.5 * (1.0 + tanh((arg - center) / width));
}

namespace {

Jet<double> eval(const Expression::Node& n, const Jet<double>& x);

Jet<double> eval_arg(const Expression& e, const Jet<double>& x);

}  // namespace

// Evaluation needs the node; keep a private accessor through a helper struct.
struct AsymptoticAnalyzer {
  static const Expression::Node& node(const Expression& e) { return *e.node_; }
};

namespace {

Jet<double> eval_arg(const Expression& e, const Jet<double>& x) {
  return eval(AsymptoticAnalyzer::node(e), x);
}

Jet<double> eval(const Expression::Node& n, const Jet<double>& x) {
  using K = Expression::Kind;
  switch (n.kind) {
    case K::Const: return Jet<double>(n.value);
    case K::Var: return x;
    case K::Add: return eval_arg(n.args[0], x) + eval_arg(n.args[1], x);
    case K::Sub: return eval_arg(n.args[0], x) - eval_arg(n.args[1], x);
    case K::Mul: return eval_arg(n.args[0], x) * eval_arg(n.args[1], x);
    case K::Div: return eval_arg(n.args[0], x) / eval_arg(n.args[1], x);
    case K::Neg: return -eval_arg(n.args[0], x);
    case K::Pow: return pow(eval_arg(n.args[0], x), eval_arg(n.args[1], x));
    case K::Sin: return sin(eval_arg(n.args[0], x));
    case K::Cos: return cos(eval_arg(n.args[0], x));
    case K::Exp: return exp(eval_arg(n.args[0], x));
    case K::Tanh: return tanh(eval_arg(n.args[0], x));
    case K::Log: return log(eval_arg(n.args[0], x));
  }
  return Jet<double>(0.0);
}

void print(const Expression::Node& n, std::ostringstream& os) {
  using K = Expression::Kind;
  auto arg = [&](int i) { print(AsymptoticAnalyzer::node(n.args[static_cast<std::size_t>(i)]), os); };
  auto binary = [&](const char* op) {
    os << '(';
    arg(0);
    os << ' ' << op << ' ';
    arg(1);
    os << ')';
  };
  auto unary = [&](const char* fn) {
    os << fn << '(';
    arg(0);
    os << ')';
  };
  switch (n.kind) {
    case K::Const: os << n.value; break;
    case K::Var: os << 'x'; break;
    case K::Add: binary("+"); break;
    case K::Sub: binary("-"); break;
    case K::Mul: binary("*"); break;
    case K::Div: binary("/"); break;
    case K::Neg: os << "-"; arg(0); break;
    case K::Pow:
      os << "pow(";
      arg(0);
      os << ", ";
      arg(1);
      os << ')';
      break;
    case K::Sin: unary("sin"); break;
    case K::Cos: unary("cos"); break;
    case K::Exp: unary("exp"); break;
    case K::Tanh: unary("tanh"); break;
    case K::Log: unary("log"); break;
  }
}

// Recursive-descent parser over the grammar
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := ('+'|'-') unary | power
//   power := primary ('^' unary)?
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expression parse() {
    Expression e = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError,
                msg + " at offset " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expression expr() {
    Expression e = term();
    for (;;) {
      if (accept('+')) {
        e = e + term();
      } else if (accept('-')) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expression term() {
    Expression e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        e = e / unary();
      } else {
        return e;
      }
    }
  }

  Expression unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expression power() {
    Expression base = primary();
    if (accept('^')) return pow(base, unary());
    return base;
  }

  std::vector<Expression> arguments() {
    std::vector<Expression> args;
    expect('(');
    args.push_back(expr());
    while (accept(',')) args.push_back(expr());
    expect(')');
    return args;
  }

  double constant_of(const Expression& e, const char* what) {
    const auto& n = AsymptoticAnalyzer::node(e);
    if (n.kind == Expression::Kind::Const) return n.value;
    if (n.kind == Expression::Kind::Neg &&
        AsymptoticAnalyzer::node(n.args[0]).kind == Expression::Kind::Const)
      return -AsymptoticAnalyzer::node(n.args[0]).value;
    fail(std::string(what) + " must be a numeric literal");
  }

  Expression primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (accept('(')) {
      Expression e = expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string name;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        name += text_[pos_++];
      if (name == "x" || name == "t") return Expression::variable();
      if (name == "pi") return Expression(std::numbers::pi);
      auto args = arguments();
      auto need = [&](std::size_t n) {
        if (args.size() != n) fail(name + " expects " + std::to_string(n) + " argument(s)");
      };
      if (name == "pow") { need(2); return pow(args[0], args[1]); }
      if (name == "sin") { need(1); return sin(args[0]); }
      if (name == "cos") { need(1); return cos(args[0]); }
      if (name == "exp") { need(1); return exp(args[0]); }
      if (name == "tanh") { need(1); return tanh(args[0]); }
      if (name == "log") { need(1); return log(args[0]); }
      if (name == "sqrt") { need(1); return pow(args[0], Expression(0.5)); }
      if (name == "smoothstep") {
        need(3);
        return smoothstep(args[0], constant_of(args[1], "smoothstep center"),
                          constant_of(args[2], "smoothstep width"));
      }
      fail("unknown function '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Expression number() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    const std::string token(text_.substr(start, pos_ - start));
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) fail("malformed number '" + token + "'");
      return Expression(v);
    } catch (const std::invalid_argument&) {
      fail("malformed number '" + token + "'");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text) { return Parser(text).parse(); }

Jet<double> Expression::jet(double x) const { return eval(*node_, Jet<double>::variable(x)); }

double Expression::value(double x) const { return eval(*node_, Jet<double>(x)).v; }

std::string Expression::to_string() const {
  std::ostringstream os;
  os.precision(17);
  print(*node_, os);
  return os.str();
}

// --- asymptotics -----------------------------------------------------------

Asymptote asymptote_neg(const Asymptote& a) {
  Asymptote r = a;
  r.coef = -a.coef;
  return r;
}

Asymptote asymptote_add(const Asymptote& a, const Asymptote& b) {
  if (!a.known || !b.known) return Asymptote::unknown();
  if (a.vanishing) return b;
  if (b.vanishing) return a;
  if (a.power > b.power) return Asymptote::term(a.coef, a.power, a.osc, false);
  if (b.power > a.power) return Asymptote::term(b.coef, b.power, b.osc, false);
  const bool exact = a.exact && b.exact;
  Asymptote r = Asymptote::term(a.coef + b.coef, a.power, a.osc + b.osc, exact);
  if (r.coef == 0.0 && r.osc == 0.0)  // cancellation
    return exact ? Asymptote::zero() : Asymptote::unknown();
  return r;
}

namespace {

Asymptote mul(const Asymptote& a, const Asymptote& b) {
  if (!a.known || !b.known) return Asymptote::unknown();
  if (a.vanishing || b.vanishing) return Asymptote::zero();
  const double osc = std::abs(a.coef) * b.osc + std::abs(b.coef) * a.osc + a.osc * b.osc;
  return Asymptote::term(a.coef * b.coef, a.power + b.power, osc, a.exact && b.exact);
}

Asymptote recip(const Asymptote& a) {
  if (!a.known || a.vanishing) return Asymptote::unknown();
  const double m = std::abs(a.coef);
  if (m <= a.osc) return Asymptote::unknown();
  const double osc = a.osc > 0.0 ? 1.0 / (m - a.osc) - 1.0 / m : 0.0;
  return Asymptote::term(1.0 / a.coef, -a.power, osc, a.exact);
}

bool is_integer(double q) { return std::floor(q) == q; }

Asymptote analyze(const Expression& e, int side);

Asymptote analyze_pow(const Asymptote& base, const Expression& exponent) {
  const auto& en = AsymptoticAnalyzer::node(exponent);
  double q = 0.0;
  if (en.kind == Expression::Kind::Const) {
    q = en.value;
  } else if (en.kind == Expression::Kind::Neg &&
             AsymptoticAnalyzer::node(en.args[0]).kind == Expression::Kind::Const) {
    q = -AsymptoticAnalyzer::node(en.args[0]).value;
  } else {
    return Asymptote::unknown();  // only literal exponents give pure powers
  }
  if (!base.known) return Asymptote::unknown();
  if (base.vanishing) return q > 0.0 ? Asymptote::zero() : Asymptote::unknown();
  if (q == 0.0) return Asymptote::term(1.0, 0.0, 0.0, true);
  if (base.coef <= 0.0 && !is_integer(q)) return Asymptote::unknown();
  const double c = std::pow(base.coef, q);
  double osc = 0.0;
  if (base.osc > 0.0) {
    const double lo = base.coef - base.osc;
    const double hi = base.coef + base.osc;
    if (lo <= 0.0 && !is_integer(q)) return Asymptote::unknown();
    osc = std::max(std::abs(std::pow(hi, q) - c), std::abs(std::pow(lo, q) - c));
  }
  return Asymptote::term(c, base.power * q, osc, base.exact);
}

Asymptote analyze(const Expression& e, int side) {
  using K = Expression::Kind;
  const auto& n = AsymptoticAnalyzer::node(e);
  auto arg = [&](std::size_t i) { return analyze(n.args[i], side); };
  switch (n.kind) {
    case K::Const:
      return n.value == 0.0 ? Asymptote::zero() : Asymptote::term(n.value, 0.0, 0.0, true);
    case K::Var: return Asymptote::term(side > 0 ? 1.0 : -1.0, 1.0, 0.0, true);
    case K::Add: return asymptote_add(arg(0), arg(1));
    case K::Sub: return asymptote_add(arg(0), asymptote_neg(arg(1)));
    case K::Neg: return asymptote_neg(arg(0));
    case K::Mul: return mul(arg(0), arg(1));
    case K::Div: return mul(arg(0), recip(arg(1)));
    case K::Pow: return analyze_pow(arg(0), n.args[1]);
    case K::Sin:
    case K::Cos: {
      const Asymptote a = arg(0);
      if (a.known && a.vanishing)
        return n.kind == K::Sin ? Asymptote::zero() : Asymptote::term(1.0, 0.0, 0.0, true);
      if (a.known && a.power < 0.0)
        return n.kind == K::Sin ? Asymptote::term(a.coef, a.power, a.osc) : Asymptote::term(1.0, 0.0);
      if (a.known && a.power == 0.0 && a.osc == 0.0) {
        const double v = n.kind == K::Sin ? std::sin(a.coef) : std::cos(a.coef);
        return v == 0.0 ? Asymptote::unknown() : Asymptote::term(v, 0.0, 0.0, a.exact);
      }
      return Asymptote::term(0.0, 0.0, 1.0);  // bounded oscillation
    }
    case K::Exp: {
      const Asymptote a = arg(0);
      if (!a.known) return Asymptote::unknown();
      if (a.vanishing) return Asymptote::term(1.0, 0.0, 0.0, true);
      if (a.power < 0.0) return Asymptote::term(1.0, 0.0);
      if (a.power == 0.0)
        return Asymptote::term(std::exp(a.coef), 0.0, std::exp(a.coef + a.osc) - std::exp(a.coef),
                               a.exact);
      if (a.coef - a.osc < 0.0 && a.coef + a.osc < 0.0) return Asymptote::zero();
      return Asymptote::unknown();  // exponential growth
    }
    case K::Tanh: {
      const Asymptote a = arg(0);
      if (!a.known) return Asymptote::unknown();
      if (a.vanishing) return Asymptote::zero();
      if (a.power < 0.0) return Asymptote::term(a.coef, a.power, a.osc);
      if (a.power > 0.0) {
        if (a.coef - a.osc > 0.0) return Asymptote::term(1.0, 0.0, 0.0, true);
        if (a.coef + a.osc < 0.0) return Asymptote::term(-1.0, 0.0, 0.0, true);
        return Asymptote::unknown();
      }
      return Asymptote::term(std::tanh(a.coef), 0.0,
                             std::tanh(a.coef + a.osc) - std::tanh(a.coef), a.exact);
    }
    case K::Log: return Asymptote::unknown();
  }
  return Asymptote::unknown();
}

}  // namespace

Asymptote asymptote(const Expression& e, int side) { return analyze(e, side); }

}  // namespace navslip
