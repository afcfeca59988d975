#pragma once

#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "navslip/jet.hpp"

namespace navslip {

/// Immutable formula tree in one variable `x`. Trees are built either by
/// parsing a string or by composing Expressions with the overloaded
/// operators below; evaluation on a Jet returns analytic derivatives.
class Expression {
 public:
  enum class Kind { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Tanh, Log };

  Expression();  // the constant 0
  explicit Expression(double constant);

  static Expression variable();
  static Expression parse(std::string_view text);

  double value(double x) const;
  Jet<double> jet(double x) const;

  Kind kind() const;
  std::string to_string() const;

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a);
  friend Expression pow(const Expression& a, const Expression& b);
  friend Expression sin(const Expression& a);
  friend Expression cos(const Expression& a);
  friend Expression exp(const Expression& a);
  friend Expression tanh(const Expression& a);
  friend Expression log(const Expression& a);

  struct Node;

 private:
  explicit Expression(std::shared_ptr<const Node> node);
  static Expression make(Kind kind, std::vector<Expression> args);

  std::shared_ptr<const Node> node_;

  friend struct AsymptoticAnalyzer;
};

inline Expression operator+(const Expression& a, double b) { return a + Expression(b); }
inline Expression operator+(double a, const Expression& b) { return Expression(a) + b; }
inline Expression operator-(const Expression& a, double b) { return a - Expression(b); }
inline Expression operator-(double a, const Expression& b) { return Expression(a) - b; }
inline Expression operator*(const Expression& a, double b) { return a * Expression(b); }
inline Expression operator*(double a, const Expression& b) { return Expression(a) * b; }
inline Expression operator/(const Expression& a, double b) { return a / Expression(b); }
inline Expression operator/(double a, const Expression& b) { return Expression(a) / b; }
inline Expression pow(const Expression& a, double b) { return pow(a, Expression(b)); }

/// ½(1 + tanh((arg − center)/width)).
Expression smoothstep(const Expression& arg, double center, double width);

/// Leading behavior c·|t|^p of an expression as t → side·∞, with an upper
/// bound `osc` on the amplitude of bounded oscillatory terms at the same
/// order. `vanishing` marks super-polynomial decay (e.g. e^{-t²}).
struct Asymptote {
  bool known = false;
  bool vanishing = false;
  double coef = 0.0;
  double power = 0.0;
  double osc = 0.0;
  /// The leading term is exact up to a super-polynomially small remainder
  /// (e.g. tanh(t) = 1 + O(e^{-2t})), so exact cancellations are decidable.
  bool exact = false;

  static Asymptote unknown() { return {}; }
  static Asymptote zero() {
    return {true, true, 0.0, -std::numeric_limits<double>::infinity(), 0.0, true};
  }
  static Asymptote term(double c, double p, double o = 0.0, bool exact = false) {
    return {true, false, c, p, o, exact && o == 0.0};
  }

  /// True when the leading term is a strictly positive multiple of |t|^p.
  bool positive_power() const { return known && !vanishing && coef - osc > 0.0; }
};

/// side = +1 for t → +∞, −1 for t → −∞.
Asymptote asymptote(const Expression& e, int side);
Asymptote asymptote_add(const Asymptote& a, const Asymptote& b);
Asymptote asymptote_neg(const Asymptote& a);

}  // namespace navslip
