#include "navslip/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <mutex>
#include <queue>
#include <vector>

#include "navslip/error.hpp"

namespace navslip {

namespace {

GaussRule golub_welsch(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  GaussRule rule;
  rule.nodes = 0.5 * (es.eigenvalues().array() + 1.0);
  rule.weights = es.eigenvectors().row(0).transpose().array().square();  // sums to 1 on [0,1]
  return rule;
}

// Kronrod 15-point extension of the 7-point Gauss rule on [-1, 1].
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment kronrod(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = kKronrodWeights[7] * fc;
  double g = kGaussWeights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[static_cast<std::size_t>(i)];
    const double sum = f(c - dx) + f(c + dx);
    k += kKronrodWeights[static_cast<std::size_t>(i)] * sum;
    if (i % 2 == 1) g += kGaussWeights[static_cast<std::size_t>(i / 2)] * sum;
  }
  return {a, b, k * h, std::abs((k - g) * h)};
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  constexpr int kMax = 128;
  static std::array<GaussRule, kMax + 1> cache;
  static std::array<std::once_flag, kMax + 1> flags;
  if (n < 1 || n > kMax) throw std::invalid_argument("gauss_legendre: order out of range");
  std::call_once(flags[static_cast<std::size_t>(n)],
                 [n] { cache[static_cast<std::size_t>(n)] = golub_welsch(n); });
  return cache[static_cast<std::size_t>(n)];
}

double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& opts) {
  if (a == b) return 0.0;
  if (a > b) return -adaptive_integrate(f, b, a, opts);
  std::priority_queue<Segment> heap;
  Segment first = kronrod(f, a, b);
  double total = first.value;
  double error = first.error;
  heap.push(first);
  int intervals = 1;
  while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    if (intervals >= opts.max_intervals)
      throw Error(ErrorCode::QuadratureNotConverged,
                  "adaptive quadrature on [" + std::to_string(a) + ", " + std::to_string(b) +
                      "] exhausted " + std::to_string(opts.max_intervals) + " intervals");
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = kronrod(f, worst.a, mid);
    Segment right = kronrod(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // re-sum to limit cancellation drift in the running totals
  double sum = 0.0;
  std::vector<Segment> segs;
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const Segment& l, const Segment& r) { return l.a < r.a; });
  for (const auto& s : segs) sum += s.value;
  return sum;
}

}  // namespace navslip
