#include <cmath>
#include <functional>

#include "doctest.h"
#include "navslip/estimates.hpp"
#include "navslip/solver.hpp"

using namespace navslip;

namespace {

ChannelProfile widening(double power) {
  const Expression x = Expression::variable();
  const Expression f2 = pow(1.0 + x * x, power);
  return ChannelProfile::with_measured_bounds(-f2, f2, -10, 10);
}

struct Solved {
  Problem problem;
  FlowState state;
};

Solved solve_on(const ChannelProfile& p, double T, int nx, int ny, double phi, double alpha = 1.0,
                double eps = 0.5) {
  Problem pb = Problem::build(TruncatedDomain(p, -T, T), nx, ny, Grading::CarrierFitted, alpha,
                              ShearConvention::WeakFormConsistent, eps);
  const FluxCarrier g(p, phi, eps);
  auto [s, rep] = solve_steady(pb, g, SolveOptions{});
  return {std::move(pb), std::move(s)};
}

}  // namespace

TEST_CASE("zero flux gives zero energies") {
  const auto sv = solve_on(ChannelProfile::straight(-1, 1), 4, 16, 4, 0.0);
  const auto prof = energy_profile(sv.state, uniform_t_grid(4, 8));
  for (double y : prof.y) CHECK(y == 0.0);
  const auto lb = lower_bound_check(sv.state, prof);
  for (double r : lb.ratio) CHECK(r == 0.0);
}

TEST_CASE("straight channel: shear energies, additivity, fits and slabs") {
  const double phi = 0.1, alpha = 1.0, T = 8.0;
  // energies of u = v + g cancel the steep carrier gradient: resolve it finely
  const auto sv = solve_on(ChannelProfile::straight(-1, 1), T, 32, 64, phi, alpha);
  const auto prof = energy_profile(sv.state, uniform_t_grid(T, 16));

  // closed-form shear energies per unit length: ∫|U'|² and both wall values
  const ShearFlow U = make_shear(phi, alpha, ShearConvention::WeakFormConsistent);
  const double grad = 8.0 * phi * phi * U.b0 * U.b0 / 3.0;
  const double wall = 2.0 * U.value(1.0) * U.value(1.0);
  for (std::size_t k = 0; k < prof.t.size(); ++k) {
    CHECK(prof.y[k] >= (k > 0 ? prof.y[k - 1] : 0.0));
    if (prof.t[k] < 0.25 * T || prof.t[k] > 0.75 * T) continue;
    const double expected = 2.0 * prof.t[k] * (grad + wall);
    CAPTURE(prof.t[k]);
    CHECK(std::abs(prof.y[k] - expected) <= 0.05 * expected);
  }

  double slabs = 0.0;
  for (double k = -T; k < T; k += 1.0) slabs += slab_energy(sv.state, k, k + 1.0);
  CHECK(std::abs(slabs - prof.y.back()) <= 1e-10 * prof.y.back());

  const auto fit = fit_growth(prof, BoundForm::Linear, sv.state.mesh().profile());
  CHECK(fit.verdict == Verdict::Pass);
  CHECK(fit.constant > 0.0);
  CHECK(fit.constant == doctest::Approx(2.0 * (grad + wall)).epsilon(0.05));

  const auto lb = lower_bound_check(sv.state, prof);
  CHECK(lb.max_ratio <= lb.bound);
  CHECK(lb.spread < 1.5);
  CHECK(lb.verdict == Verdict::Pass);

  // the interior slabs nearest the ends still see the end layer
  const auto slab = uniform_local_check(sv.state);
  CHECK(slab.verdict == Verdict::Pass);
  CHECK(slab.spread < 1.25);
  CHECK(slab.lo.size() == 12);

  const auto decay = decay_rate_check(sv.state, prof.t);
  CHECK(decay.verdict == Verdict::Pass);
  CHECK(decay.spread < 1.25);

  const auto ff = far_field_check(sv.state, U, 0.0);
  CHECK(ff.verdict == Verdict::Pass);
  CHECK(ff.lo.size() == 8);

  VerifierConfig cfg;
  cfg.small_flux = 0.01;
  CHECK(far_field_check(sv.state, U, 0.0, cfg).verdict == Verdict::Inconclusive);

  const auto plateau = plateau_check(prof);
  CHECK(plateau.ratio == doctest::Approx(1.5).epsilon(0.05));
  CHECK(plateau.verdict == Verdict::Fail);
}

TEST_CASE("far field behind a bump settles to the shear flow") {
  const Expression x = Expression::variable();
  const Expression f2 = 1.0 + 0.5 * exp(-2.0 * (x + 4.0) * (x + 4.0));
  const ChannelProfile p = ChannelProfile::with_measured_bounds(-f2, f2, -12, 12);
  const auto sv = solve_on(p, 8, 64, 16, 0.1);
  const auto ff = far_field_check(sv.state, make_shear(0.1, 1.0, ShearConvention::WeakFormConsistent), 0.0);
  CHECK(ff.verdict == Verdict::Pass);
  for (std::size_t k = 1; k < ff.cumulative.size(); ++k) CHECK(ff.cumulative[k] >= ff.cumulative[k - 1]);
  CHECK(far_field_check(sv.state, make_shear(0.1, 1.0, ShearConvention::WeakFormConsistent), -6.0).verdict ==
        Verdict::Inconclusive);
}

TEST_CASE("fits need enough interior points") {
  const auto sv = solve_on(ChannelProfile::straight(-1, 1), 4, 16, 4, 0.1);
  const auto prof = energy_profile(sv.state, uniform_t_grid(4, 4));
  CHECK_THROWS_AS(fit_growth(prof, BoundForm::Linear, sv.state.mesh().profile()), Error);
  CHECK_THROWS_AS(energy_profile(sv.state, {1.0, 0.5}), Error);
  CHECK_THROWS_AS(energy_profile(sv.state, {5.0}), Error);
}

TEST_CASE("stability of fitted constants") {
  GrowthFit a, b, c;
  a.constant = 1.0;
  b.constant = 1.2;
  c.constant = 1.6;
  CHECK(fit_stability({a, b}).verdict == Verdict::Pass);
  CHECK(fit_stability({a, b, c}).verdict == Verdict::Fail);
  CHECK(fit_stability({a, b, c}).max_change == doctest::Approx(0.4 / 1.2));
}

TEST_CASE("width conditions follow the 3/5 power threshold") {
  const auto c025 = condition_check(widening(0.25));
  CHECK(c025.condition == WidthCondition::ConvergentWeight);
  CHECK(c025.plus.gamma == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(c025.power_law_consistent);

  const auto c01 = condition_check(widening(0.1));
  CHECK(c01.condition == WidthCondition::DivergentWeight);
  CHECK(c01.plus.weight_exponent == doctest::Approx(-0.6).epsilon(1e-2));
  CHECK(c01.power_law_consistent);

  const auto c035 = condition_check(widening(0.35));
  CHECK(c035.condition == WidthCondition::Neither);
  CHECK(c035.power_law_consistent);

  const auto straight = condition_check(ChannelProfile::straight(-1, 1));
  CHECK(straight.condition == WidthCondition::DivergentWeight);
}

TEST_CASE("grid derivative is exact for quadratics") {
  std::vector<double> t, y;
  for (int k = 0; k <= 10; ++k) {
    t.push_back(1.0 + 0.3 * k + 0.01 * k * k);
    y.push_back(2.0 - t.back() + 3.0 * t.back() * t.back());
  }
  const auto d = grid_derivative(t, y);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(d[k] == doctest::Approx(-1.0 + 6.0 * t[k]).epsilon(1e-12));
}

TEST_CASE("comparison lemma part 1 passes on exact hypotheses at every refinement") {
  for (int n : {10, 100, 1000}) {
    ComparisonProblem pr;
    for (int k = 0; k <= n; ++k) {
      const double t = 10.0 * k / n;
      pr.t.push_back(t);
      pr.phi.push_back(10.0 + t);
      pr.z.push_back(0.5 * (10.0 + t));
    }
    pr.psi = Psi::power_sum(1.0);
    pr.delta1 = 0.5;
    const auto v = compare_diff_ineq(pr, ComparisonMode::Part1);
    CHECK(v.verdict == Verdict::Pass);
    CHECK(v.first_violation == -1);
    CHECK(v.min_margin == doctest::Approx(5.0));
  }
}

TEST_CASE("comparison solution solves the equality ODE") {
  for (double c0 : {0.3, 1.0, 7.5}) {
    const double K = comparison_constant(2.0 * c0, 1.5);
    CHECK(K == doctest::Approx(1.0 / (108.0 * c0 * c0)).epsilon(1e-14));
    for (double t : {0.5, 1.0, 3.0, 40.0}) {
      const double z = t * t * t / (108.0 * c0 * c0);
      const double dz = 3.0 * t * t / (108.0 * c0 * c0);
      CHECK(std::abs(z - 2.0 * c0 * std::pow(dz, 1.5)) <= 1e-10 * z);
    }
  }
  // general m: z̃ = C (z̃')^m
  const double C = 2.0, m = 2.5, p = m / (m - 1.0);
  const double K = comparison_constant(C, m);
  for (double t : {1.0, 2.0, 5.0}) {
    const double z = K * std::pow(t, p), dz = K * p * std::pow(t, p - 1.0);
    CHECK(std::abs(z - C * std::pow(dz, m)) <= 1e-12 * z);
  }
}

TEST_CASE("comparison lemma parts 2 and 3") {
  ComparisonProblem pr;
  const double c0 = 1.0;
  const double K = comparison_constant(c0, 1.5);
  // z = 2 z̃ satisfies z ≤ Ψ(z') since Ψ(λ z̃') = λ^{3/2} z̃
  for (int k = 10; k <= 200; ++k) {
    const double t = 0.1 * k;
    pr.t.push_back(t);
    pr.z.push_back(2.0 * K * t * t * t);
  }
  pr.psi = Psi::power(c0, 1.5);
  const auto v3 = compare_diff_ineq(pr, ComparisonMode::Part3);
  CHECK(v3.verdict == Verdict::Pass);
  CHECK(v3.tail_ratio == doctest::Approx(2.0 * K).epsilon(1e-12));
  CHECK(v3.comparison_constant == doctest::Approx(K));

  ComparisonProblem p2;
  for (int k = 0; k <= 100; ++k) {
    const double t = 0.1 * k;
    p2.t.push_back(t);
    p2.phi.push_back(10.0 + t);
    p2.z.push_back(0.5 * (10.0 + t));
  }
  p2.psi = Psi::power(1.0, 1.5);
  CHECK(compare_diff_ineq(p2, ComparisonMode::Part2).verdict == Verdict::Pass);
}

TEST_CASE("injected violation is localized") {
  const int n = 400, bump = 211;
  ComparisonProblem pr;
  for (int k = 0; k <= n; ++k) {
    const double t = 20.0 * k / n;
    pr.t.push_back(t);
    pr.phi.push_back(10.0 + t);
    const double b = 20.0 * std::exp(-std::pow((k - bump) / 3.0, 2));
    pr.z.push_back(0.5 * (10.0 + t) + b);
  }
  pr.psi = Psi::power_sum(1.0);

  // oracle: the smallest slope the hypothesis allows, s* with Ψ(s*) = z − (1 − δ₁)φ,
  // by bisection, against the same three-point slopes
  const auto dz = grid_derivative(pr.t, pr.z);
  const auto psi = [](double s) { return s >= 0.0 ? s + std::pow(s, 1.5) : -(-s + std::pow(-s, 1.5)); };
  int expected = -1;
  for (int k = 0; k <= n && expected < 0; ++k) {
    const double need = pr.z[k] - 0.5 * pr.phi[k];
    double lo = -1e6, hi = 1e6;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (psi(mid) < need ? lo : hi) = mid;
    }
    if (dz[k] < hi - 1e-6) expected = k;
  }
  REQUIRE(expected > 0);
  CHECK(std::abs(expected - bump) <= 6);

  // forward integration of w' = s*(w) from the first point above φ stays above φ:
  // a violation must come with a hypothesis failure
  int first_above = -1;
  for (int k = 0; k <= n; ++k)
    if (pr.z[k] > pr.phi[k]) {
      first_above = k;
      break;
    }
  REQUIRE(first_above > 0);
  double w = pr.z[static_cast<std::size_t>(first_above)];
  const auto slope = [&](double t, double w) {
    const double need = w - 0.5 * (10.0 + t);
    double lo = 0.0, hi = 1e6;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (psi(mid) < need ? lo : hi) = mid;
    }
    return hi;
  };
  const double h = 1e-3;
  for (double t = pr.t[static_cast<std::size_t>(first_above)]; t < 20.0 && w < 1e6; t += h) {
    const double k1 = slope(t, w), k2 = slope(t + h / 2, w + h / 2 * k1), k3 = slope(t + h / 2, w + h / 2 * k2),
                 k4 = slope(t + h, w + h * k3);
    w += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  CHECK(w > 30.0);

  try {
    compare_diff_ineq(pr, ComparisonMode::Part1);
    FAIL("violation not detected");
  } catch (const HypothesisViolation& e) {
    CHECK(e.code() == ErrorCode::HypothesisViolated);
    CHECK(e.index() == expected);
  }
}

TEST_CASE("part 1 rejects a majorant that violates its own inequality") {
  ComparisonProblem pr;
  for (int k = 0; k <= 50; ++k) {
    const double t = 0.2 * k;
    pr.t.push_back(t);
    pr.phi.push_back(1.0 + 3.0 * t);  // φ ≥ 2Ψ(3) = 2(3 + 3^{3/2}) fails early
    pr.z.push_back(0.1);
  }
  try {
    compare_diff_ineq(pr, ComparisonMode::Part1);
    FAIL("expected a hypothesis failure");
  } catch (const HypothesisViolation& e) {
    CHECK(e.index() == 0);
  }
}
