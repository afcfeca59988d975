#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

namespace navslip {

/// Gauss–Legendre rule on [0, 1].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// n-point Gauss–Legendre rule on [0, 1] (Golub–Welsch), cached per n.
const GaussRule& gauss_legendre(int n);

/// Composite Gauss sum of `f` over [a, b] split into `pieces` equal parts.
template <typename F>
double composite_gauss(F&& f, double a, double b, int pieces, int order) {
  const GaussRule& rule = gauss_legendre(order);
  const double h = (b - a) / pieces;
  double sum = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + p * h;
    for (int q = 0; q < rule.size(); ++q) sum += rule.weights[q] * f(lo + h * rule.nodes[q]);
  }
  return sum * h;
}

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_intervals = 20000;
};

/// Globally adaptive Gauss–Kronrod (7/15) integration. Throws
/// Error{QuadratureNotConverged} when the interval budget is exhausted.
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& opts = {});

}  // namespace navslip
