#pragma once

#include <cmath>

namespace navslip {

/// Truncated Taylor jet carrying a value with its first and second
/// derivative along one variable. Arithmetic propagates both derivatives
/// exactly, so formula trees evaluated on a Jet yield analytic f, f', f''.
template <typename Scalar>
struct Jet {
  Scalar v{0};
  Scalar d{0};
  Scalar dd{0};

  constexpr Jet() = default;
  constexpr Jet(Scalar value, Scalar first = Scalar(0), Scalar second = Scalar(0))
      : v(value), d(first), dd(second) {}

  static constexpr Jet variable(Scalar x) { return Jet(x, Scalar(1), Scalar(0)); }
  static constexpr Jet constant(Scalar c) { return Jet(c); }
};

template <typename S>
constexpr Jet<S> operator+(const Jet<S>& a, const Jet<S>& b) {
  return {a.v + b.v, a.d + b.d, a.dd + b.dd};
}
template <typename S>
constexpr Jet<S> operator-(const Jet<S>& a, const Jet<S>& b) {
  return {a.v - b.v, a.d - b.d, a.dd - b.dd};
}
template <typename S>
constexpr Jet<S> operator-(const Jet<S>& a) {
  return {-a.v, -a.d, -a.dd};
}
template <typename S>
constexpr Jet<S> operator*(const Jet<S>& a, const Jet<S>& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + S(2) * a.d * b.d + a.v * b.dd};
}
template <typename S>
constexpr Jet<S> operator*(S s, const Jet<S>& a) {
  return {s * a.v, s * a.d, s * a.dd};
}
template <typename S>
constexpr Jet<S> operator*(const Jet<S>& a, S s) {
  return s * a;
}
template <typename S>
constexpr Jet<S> operator+(const Jet<S>& a, S s) {
  return {a.v + s, a.d, a.dd};
}
template <typename S>
constexpr Jet<S> operator+(S s, const Jet<S>& a) {
  return a + s;
}
template <typename S>
constexpr Jet<S> operator-(S s, const Jet<S>& a) {
  return {s - a.v, -a.d, -a.dd};
}
template <typename S>
constexpr Jet<S> operator-(const Jet<S>& a, S s) {
  return {a.v - s, a.d, a.dd};
}

/// Applies a scalar function with known derivatives (f0, f1, f2) at a.v.
template <typename S>
constexpr Jet<S> chain(const Jet<S>& a, S f0, S f1, S f2) {
  return {f0, f1 * a.d, f2 * a.d * a.d + f1 * a.dd};
}

template <typename S>
Jet<S> reciprocal(const Jet<S>& a) {
  const S r = S(1) / a.v;
  return chain(a, r, -r * r, S(2) * r * r * r);
}
template <typename S>
Jet<S> operator/(const Jet<S>& a, const Jet<S>& b) {
  return a * reciprocal(b);
}
template <typename S>
Jet<S> operator/(const Jet<S>& a, S s) {
  return {a.v / s, a.d / s, a.dd / s};
}
template <typename S>
Jet<S> operator/(S s, const Jet<S>& a) {
  return s * reciprocal(a);
}

template <typename S>
Jet<S> exp(const Jet<S>& a) {
  using std::exp;
  const S e = exp(a.v);
  return chain(a, e, e, e);
}
template <typename S>
Jet<S> log(const Jet<S>& a) {
  using std::log;
  return chain(a, log(a.v), S(1) / a.v, -S(1) / (a.v * a.v));
}
template <typename S>
Jet<S> sin(const Jet<S>& a) {
  using std::cos;
  using std::sin;
  const S s = sin(a.v);
  return chain(a, s, cos(a.v), -s);
}
template <typename S>
Jet<S> cos(const Jet<S>& a) {
  using std::cos;
  using std::sin;
  const S c = cos(a.v);
  return chain(a, c, -sin(a.v), -c);
}
template <typename S>
Jet<S> tanh(const Jet<S>& a) {
  using std::tanh;
  const S t = tanh(a.v);
  const S sech2 = S(1) - t * t;
  return chain(a, t, sech2, S(-2) * t * sech2);
}
template <typename S>
Jet<S> sqrt(const Jet<S>& a) {
  using std::sqrt;
  const S r = sqrt(a.v);
  return chain(a, r, S(0.5) / r, S(-0.25) / (r * a.v));
}
/// Real power with constant exponent.
template <typename S>
Jet<S> pow(const Jet<S>& a, S p) {
  using std::pow;
  if (p == S(0)) return Jet<S>(S(1));
  if (p == S(1)) return a;
  if (p == S(2)) return a * a;
  const S f0 = pow(a.v, p);
  const S f1 = p * pow(a.v, p - S(1));
  const S f2 = p * (p - S(1)) * pow(a.v, p - S(2));
  return chain(a, f0, f1, f2);
}
/// General power a^b = exp(b log a); requires a > 0.
template <typename S>
Jet<S> pow(const Jet<S>& a, const Jet<S>& b) {
  if (b.d == S(0) && b.dd == S(0)) return pow(a, b.v);
  return exp(b * log(a));
}

}  // namespace navslip
