#include <cmath>
#include <numbers>

#include "doctest.h"
#include "navslip/error.hpp"
#include "navslip/geometry.hpp"
#include "navslip/inequality.hpp"

using namespace navslip;

namespace {

const double kPi = std::numbers::pi;

ChannelProfile bump() {
  const Expression x = Expression::variable();
  const Expression f2 = 1.0 + 0.5 * exp(-x * x);
  return ChannelProfile::with_measured_bounds(-f2, f2, -12, 12);
}

ChannelProfile widening(double gamma) {
  const Expression x = Expression::variable();
  const Expression f2 = pow(1.0 + x * x, gamma);
  return ChannelProfile::with_measured_bounds(-f2, f2, -12, 12);
}

/// ψ = φ(x1)(x2 − f1)(f2 − x2), φ = sin²(π(x1 − a)/L): v = (∂2ψ, −∂1ψ)
/// vanishes on the ends, is tangent to the walls and divergence free.
Eigen::VectorXd stream_field(const Mesh& m) {
  const double a = m.domain().a(), L = m.domain().length();
  Eigen::VectorXd v(2 * m.num_nodes());
  for (int I = 0; I < m.nodes_x(); ++I)
    for (int J = 0; J < m.nodes_y(); ++J) {
      const Eigen::Vector2d X = m.node_position(I, J);
      const double arg = kPi * (X[0] - a) / L;
      const double ph = std::sin(arg) * std::sin(arg);
      const double dph = 2.0 * std::sin(arg) * std::cos(arg) * kPi / L;
      const auto f1 = m.profile().lower(X[0]), f2 = m.profile().upper(X[0]);
      const int n = m.node(I, J);
      v[2 * n] = ph * (f1.v + f2.v - 2.0 * X[1]);
      v[2 * n + 1] = -(dph * (X[1] - f1.v) * (f2.v - X[1]) + ph * (-f1.d * (f2.v - X[1]) + (X[1] - f1.v) * f2.d));
    }
  return v;
}

Eigen::VectorXd projected(const DofMap& d, const Eigen::VectorXd& v) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d.num_full());
  x.head(d.num_velocity()) = v;
  const DivergenceFreeProjector p(d);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(d.num_reduced());
  y.head(d.num_reduced_velocity()) = p.project(d.reduce(x).head(d.num_reduced_velocity()));
  return d.expand(y).head(d.num_velocity());
}

}  // namespace

TEST_CASE("poincare ratios on the straight channel") {
  const Mesh m(TruncatedDomain(ChannelProfile::straight(-1, 1), 0, 2), 6, 8);
  const PoincareMeasure p = poincare_measure(m, 8, 3);
  CHECK(p.M0 == doctest::Approx(1.0 / kPi).epsilon(1e-15));
  // zero-mean sections: sup = L/π in physical units, 1/π after dividing by f
  CHECK(p.section_ratio <= p.M0 + 1e-8);
  CHECK(p.section_ratio >= 0.999 * p.M0);
  // v1 zero-mean and v2 zero on the walls: both first eigenvalues are (π/2)²
  CHECK(p.full_ratio <= 2.0 / kPi + 1e-8);
  CHECK(p.full_ratio >= 0.999 * 2.0 / kPi);
  CHECK(p.trial_ratio > 0.0);
  CHECK(p.trial_ratio <= p.full_ratio + 1e-12);
}

TEST_CASE("poincare section ratio never exceeds 1/pi on curved channels") {
  for (const auto& p : {bump(), widening(0.3)}) {
    const Mesh m(TruncatedDomain(p, -1.5, 1.5), 8, 6);
    CHECK(poincare_measure(m, 0).section_ratio <= poincare_reference() + 1e-8);
  }
}

TEST_CASE("poincare generator rejects fields with nonzero flux") {
  const Mesh m(TruncatedDomain(bump(), -1, 1), 4, 4);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * m.num_nodes());
  for (int n = 0; n < m.num_nodes(); ++n) v[2 * n] = 1.0;  // constant in x2
  CHECK_FALSE(poincare_admissible(m, v));
  CHECK_FALSE(poincare_admissible(m, Eigen::VectorXd::Zero(2 * m.num_nodes())));
}

TEST_CASE("calibration on the unit straight channel") {
  const Calibration c = calibrate_constants(6, 6);
  // M1 = 2/π there and m1_shape = ‖f‖∞ = 2
  CHECK(c.C1 == doctest::Approx(1.0 / kPi).epsilon(1e-3));
  CHECK(c.C4 > 0.0);
  CHECK(std::isfinite(c.C4));
}

TEST_CASE("embedding ascent is monotone and the widening channel obeys the calibrated bound") {
  const Calibration cal = calibrate_constants(6, 6);
  const Mesh m(TruncatedDomain(widening(0.3), -5, 5), 20, 4);
  const EmbeddingMeasure e = embedding_measure(m, 4, 11);
  REQUIRE(e.refined.size() == 4);
  for (std::size_t k = 0; k < e.refined.size(); ++k) CHECK(e.refined[k] >= e.initial[k]);
  const ConstantCheck c = check_constants("widening", m, cal, 4, 11);
  CHECK(c.M4_measured == doctest::Approx(e.ratio).epsilon(1e-12));
  CHECK(c.M1_measured <= c.M1_formula + 1e-8);
  CHECK(c.M4_measured <= c.M4_formula + 1e-8);
  CHECK(c.pass);
}

TEST_CASE("korn constant") {
  CHECK(korn_constant(1.0, 0.0) == 1.0);
  CHECK(korn_constant(0.0, 0.0) == 0.0);
  CHECK(korn_constant(2.0, 1.0) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(korn_constant(-1.0, 0.0), Error);
}

TEST_CASE("korn coercivity on straight and bump channels") {
  // curvature of f2 = 1 + e^{-x²}/2: |f2''|/(1 + f2'²)^{3/2}, maximal at 0
  double curv = 0.0;
  for (int k = 0; k <= 80000; ++k) {
    const double x = -4.0 + 8.0 * k / 80000;
    const double e = std::exp(-x * x);
    const double d1 = -x * e, d2 = (2 * x * x - 1) * e;
    curv = std::max(curv, std::abs(d2) / std::pow(1 + d1 * d1, 1.5));
  }
  for (const bool curved : {false, true}) {
    CAPTURE(curved);
    const ChannelProfile p = curved ? bump() : ChannelProfile::straight(-1, 1);
    const DofMap d(std::make_shared<const Mesh>(TruncatedDomain(p, -4, 4), 12, 4));
    for (const double alpha : {0.5, 5.0}) {
      const KornReport r = korn_check(d, alpha, 200, 5, 5);
      CHECK(r.trials == 200);
      CHECK(r.curvature == doctest::Approx(curved ? curv : 0.0).epsilon(1e-6));
      CHECK(r.c == doctest::Approx(alpha / (alpha + (curved ? curv : 0.0))));
      CHECK(r.min_margin >= -1e-8);
      CHECK(r.verdict == Verdict::Pass);
    }
  }
}

TEST_CASE("korn generator rejects a rigid rotation") {
  const DofMap d(std::make_shared<const Mesh>(TruncatedDomain(ChannelProfile::straight(-1, 1), -1, 1), 4, 4));
  const Mesh& m = d.mesh();
  Eigen::VectorXd rot(d.num_velocity());
  for (int I = 0; I < m.nodes_x(); ++I)
    for (int J = 0; J < m.nodes_y(); ++J) {
      const Eigen::Vector2d X = m.node_position(I, J);
      rot[2 * m.node(I, J)] = -X[1];
      rot[2 * m.node(I, J) + 1] = X[0];
    }
  CHECK_FALSE(korn_admissible(d, rot));
  CHECK(korn_admissible(d, projected(d, stream_field(m))));
}

TEST_CASE("korn identity residual vanishes under refinement") {
  for (const auto& p : {ChannelProfile::straight(-1, 1), bump()}) {
    std::vector<double> res;
    for (int k : {1, 2, 4}) {
      const DofMap d(std::make_shared<const Mesh>(TruncatedDomain(p, -2, 2), 8 * k, 4 * k));
      res.push_back(korn_identity_residual(d, projected(d, stream_field(d.mesh()))));
    }
    for (std::size_t i = 1; i < res.size(); ++i) CHECK(std::log2(res[i - 1] / res[i]) >= 1.0);
    CHECK(res.back() < 1e-6);
  }
}

TEST_CASE("star decomposition of straight and sloped slabs") {
  SUBCASE("straight") {
    const StarDecomposition s = star_decomposition(ChannelProfile::straight(-1, 1), 3.0, 10000);
    CHECK(s.N == 1);
    CHECK(s.pieces.size() == 1);
    CHECK(s.R < std::min(0.5, s.d / 2));
    CHECK(s.pieces[0].certified);
    CHECK(s.pieces[0].rays == 10000);
  }
  SUBCASE("d = 1, beta = 1/2") {
    const Expression x = Expression::variable();
    const ChannelProfile p = ChannelProfile::with_measured_bounds(Expression(-0.5), 0.5 + 0.5 * x, 0, 1);
    const StarDecomposition s = star_decomposition(p, 1.0, 10000);
    CHECK(s.d == doctest::Approx(1.0));
    CHECK(s.beta == doctest::Approx(0.5));
    CHECK(s.N == 1);
    CHECK(s.s > s.beta);
    const double h = s.d / 2 - s.beta / (2 * s.N);
    CHECK(std::abs(s.s / (2 * s.N) - h) / std::sqrt(1 + s.s * s.s) == doctest::Approx(s.R).epsilon(1e-12));
    for (const StarPiece& pc : s.pieces) CHECK(pc.certified);
  }
  SUBCASE("steeper wall needs two pieces per unit") {
    const Expression x = Expression::variable();
    const ChannelProfile p = ChannelProfile::with_measured_bounds(Expression(-0.5), 0.5 + x, 0, 1);
    const StarDecomposition s = star_decomposition(p, 1.0, 10000);
    CHECK(s.N > s.beta / s.d);
    CHECK(s.s > s.beta);
    REQUIRE(s.pieces.size() == static_cast<std::size_t>(2 * s.N - 1));
    for (const StarPiece& pc : s.pieces) CHECK(pc.certified);
    CHECK(s.min_overlap >= s.d / (2 * s.N));
    CHECK(s.bound > 0.0);
  }
  CHECK_THROWS_AS(tangent_slope(1, 0.5, 0.6), Error);
}

TEST_CASE("bogovskii solve") {
  const Mesh sq(TruncatedDomain(ChannelProfile::straight(0, 1), 0, 1), 8, 8);
  SUBCASE("zero data") {
    const BogovskiiResult r = bogovskii_solve(sq, [](double, double) { return 0.0; });
    CHECK(r.ratio == 0.0);
    CHECK(r.a.lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("unit square") {
    const BogovskiiResult r = bogovskii_solve(sq, [](double x1, double) { return 2 * x1 - 1; });
    const StarDecomposition s = star_decomposition(ChannelProfile::straight(0, 1), 1.0, 1000);
    CHECK(r.ratio > 0.0);
    CHECK(r.ratio <= s.bound);
    CHECK(r.divergence_defect < 1e-10);
    CHECK(r.w_norm == doctest::Approx(1.0 / std::sqrt(3.0)));
  }
  SUBCASE("incompatible data") {
    CHECK_THROWS_AS(bogovskii_solve(sq, [](double, double) { return 1.0; }), Error);
  }
}

TEST_CASE("bogovskii ratio on slabs is translation invariant") {
  const ChannelProfile p = ChannelProfile::straight(-1, 1);
  std::vector<double> r;
  for (double t : {1.0, 8.5, 33.0}) {
    const Mesh m(TruncatedDomain(p, t - 1, t), 6, 6);
    r.push_back(bogovskii_solve(m, [t](double x1, double x2) { return std::sin(kPi * (x1 - t)) * x2; }).ratio);
  }
  CHECK(std::abs(r[1] - r[0]) <= 1e-10 * r[0]);
  CHECK(std::abs(r[2] - r[0]) <= 1e-10 * r[0]);

  // bump slabs: the constant does not grow with t
  const ChannelProfile b = bump();
  std::vector<double> rb;
  for (double t : {5.0, 20.0, 80.0}) {
    const Mesh m(TruncatedDomain(b, t - 1, t), 6, 6);
    rb.push_back(bogovskii_solve(m, [t](double x1, double x2) { return std::cos(kPi * (x1 - t)) * x2; }).ratio);
  }
  const auto [lo, hi] = std::minmax_element(rb.begin(), rb.end());
  CHECK(*hi <= 2.0 * *lo);
}
