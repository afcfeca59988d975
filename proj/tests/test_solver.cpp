#include <cmath>

#include "doctest.h"
#include "navslip/error.hpp"
#include "navslip/solver.hpp"

using namespace navslip;

namespace {

ChannelProfile bump() {
  const Expression x = Expression::variable();
  const Expression f2 = 1.0 + 0.5 * exp(-x * x);
  return ChannelProfile::with_measured_bounds(-f2, f2, -12, 12);
}

Problem straight_problem(int nx, int ny, double alpha, double half_length = 4.0) {
  return Problem::build(TruncatedDomain(ChannelProfile::straight(-1, 1), -half_length, half_length), nx, ny,
                        Grading::CarrierFitted, alpha, ShearConvention::WeakFormConsistent, 0.25);
}

double max_cell_size(const Mesh& m) {
  double h = m.hx();
  for (int j = 0; j < m.ny(); ++j) h = std::max(h, 2.0 * m.ds(j));  // width 2
  return h;
}

}  // namespace

TEST_CASE("zero load gives the zero state") {
  const Problem pb = straight_problem(16, 4, 1.0);
  const FluxCarrier g(ChannelProfile::straight(-1, 1), 0.3, 0.25);
  const FlowState s = solve_linearized(pb, g, Eigen::VectorXd::Zero(pb.dofs().num_reduced()));
  CHECK(s.x.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK_THROWS_AS(solve_linearized(pb, g, Eigen::VectorXd::Zero(3)), Error);
}

TEST_CASE("zero flux: picard stops after one iteration at v = 0") {
  const Problem pb = straight_problem(16, 4, 1.0);
  const FluxCarrier g(ChannelProfile::straight(-1, 1), 0.0, 0.25);
  auto [s, rep] = picard_solve(pb, g, SolveOptions{});
  CHECK(rep.converged);
  CHECK(rep.iterations == 1);
  CHECK(s.x.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(rep.gradient_energy == 0.0);
  const auto v = uniqueness_probe(pb, g, SolveOptions{}, 3);
  CHECK(v.unique);
}

TEST_CASE("Stokes limit reproduces the shear flow with order >= 2.5") {
  for (double alpha : {0.0, 1.0, 10.0}) {
    CAPTURE(alpha);
    const SectionShear U(0.1, alpha, ShearConvention::WeakFormConsistent, -1, 1);
    const auto ref = [&](double, double x2) { return Eigen::Vector2d(U.value(x2), 0.0); };
    SolveOptions opt;
    opt.convection = false;
    std::vector<double> err, h;
    // long channel: the end layer of the full-slip case decays slowly
    for (int k : {1, 2, 4}) {
      const Problem pb = straight_problem(32 * k, 8 * k, alpha, 8.0);
      const FluxCarrier g(ChannelProfile::straight(-1, 1), 0.1, 0.25);
      auto [s, rep] = solve_steady(pb, g, opt);
      CHECK(rep.flux_error < 1e-10);
      CHECK(divergence_residual(s) < 1e-12);
      err.push_back(compare_l2(s, -1, 1, ref).relative());
      h.push_back(max_cell_size(pb.mesh()));
    }
    for (std::size_t i = 1; i < err.size(); ++i) {
      const double order = std::log(err[i - 1] / err[i]) / std::log(h[i - 1] / h[i]);
      CAPTURE(order);
      CHECK(order >= 2.5);
    }
  }
}

TEST_CASE("picard at small flux matches the shear flow and newton finishes quadratically") {
  const Problem pb = straight_problem(64, 16, 1.0);
  const FluxCarrier g(ChannelProfile::straight(-1, 1), 0.1, 0.25);
  auto [s, rep] = picard_solve(pb, g, SolveOptions{});
  CHECK(rep.converged);
  CHECK(rep.eps_halvings == 0);
  CHECK(rep.energy_ratio > 0.0);
  CHECK(std::isfinite(rep.energy_ratio));
  CHECK(rep.flux_error < 1e-8);

  const SectionShear U(0.1, 1.0, ShearConvention::WeakFormConsistent, -1, 1);
  const double h = max_cell_size(pb.mesh());
  const auto c = compare_l2(s, -4, 4, [&](double, double x2) { return Eigen::Vector2d(U.value(x2), 0.0); });
  CHECK(c.error < 10.0 * h * h * h);

  SolveOptions tight;
  tight.tol_rel = 1e-14;
  auto [fin, nrep] = newton_solve(pb, s.carrier, tight, &s);
  CHECK(nrep.converged);
  CHECK(nrep.iterations <= 2);
  CHECK(nrep.residuals.back() <= 1e-14);
}

TEST_CASE("newton from zero at tiny flux") {
  const Problem pb = straight_problem(32, 8, 1.0);
  const FluxCarrier g(ChannelProfile::straight(-1, 1), 1e-3, 0.25);
  auto [s, rep] = newton_solve(pb, g, SolveOptions{});
  CHECK(rep.converged);
  REQUIRE(rep.residuals.size() >= 2);
  for (std::size_t i = 1; i < rep.residuals.size(); ++i) CHECK(rep.residuals[i] < rep.residuals[i - 1]);
  for (double r : rep.newton_ratios) CHECK(r < 1e3);
}

TEST_CASE("large flux needs continuation") {
  const Problem pb = straight_problem(32, 8, 1.0);
  const FluxCarrier g(ChannelProfile::straight(-1, 1), 50.0, 0.25);
  SolveOptions opt;
  CHECK_THROWS_AS(picard_solve(pb, g, opt), Error);
  const auto c = continuation_in_flux(pb, g, opt, 50.0);
  CHECK(c.state.phi() == 50.0);
  CHECK(max_flux_error(c.state) < 1e-7 * 50.0);
  CHECK(c.phis.size() >= 8);
}

TEST_CASE("continuation to flux 10 on the straight channel") {
  const Problem pb = straight_problem(64, 16, 1.0);
  const FluxCarrier g(ChannelProfile::straight(-1, 1), 0.1, 0.25);
  const auto c = continuation_in_flux(pb, g, SolveOptions{}, 10.0);
  CHECK(c.phis.back() == 10.0);
  CHECK(c.reports.size() == c.phis.size());
  CHECK(max_flux_error(c.state) < 1e-8);
  for (std::size_t i = 1; i < c.phis.size(); ++i) CHECK(c.phis[i] > c.phis[i - 1]);

  const auto zero = continuation_in_flux(pb, g, SolveOptions{}, 0.0);
  CHECK(zero.phis.size() == 1);
  CHECK(zero.state.x.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK_THROWS_AS(continuation_in_flux(pb, g, SolveOptions{}, -1.0), Error);
}

TEST_CASE("bump channel: energy inequality and flux along continuation") {
  const ChannelProfile p = bump();
  const Problem pb = Problem::build(TruncatedDomain(p, -4, 4), 32, 8, Grading::CarrierFitted, 1.0,
                                    ShearConvention::WeakFormConsistent, 0.25);
  const double curv = max_wall_curvature(p, -4, 4);
  CHECK(pb.coercivity_constant() == doctest::Approx(1.0 / (1.0 + curv)));
  const auto c = continuation_in_flux(pb, FluxCarrier(p, 5.0, 0.25), SolveOptions{}, 5.0);
  for (const SolveReport& r : c.reports) {
    CAPTURE(r.phi);
    CHECK(r.converged);
    CHECK(r.flux_error < 1e-7 * std::max(1.0, r.phi));
    CHECK(r.energy_inequality_margin >= -1e-8 * std::max(1.0, r.carrier_energy));
  }
}

TEST_CASE("small-flux uniqueness on the bump channel is deterministic") {
  const ChannelProfile p = bump();
  const Problem pb = Problem::build(TruncatedDomain(p, -4, 4), 32, 8, Grading::CarrierFitted, 1.0,
                                    ShearConvention::WeakFormConsistent, 0.25);
  const FluxCarrier g(p, 0.05, 0.25);
  const auto a = uniqueness_probe(pb, g, SolveOptions{}, 5, 7);
  const auto b = uniqueness_probe(pb, g, SolveOptions{}, 5, 7);
  CHECK(a.unique);
  CHECK(a.converged == 5);
  CHECK(a.pairwise_distances.size() == 10);
  CHECK(a.max_distance < 1e-8);
  CHECK(a.pairwise_distances == b.pairwise_distances);
  CHECK_THROWS_AS(uniqueness_probe(pb, g, SolveOptions{}, 1), Error);
}

TEST_CASE("solve options are validated") {
  SolveOptions o;
  o.damping = 1.5;
  CHECK_THROWS_AS(o.validate(), Error);
  o = SolveOptions{};
  o.tol_rel = 0.0;
  CHECK_THROWS_AS(o.validate(), Error);
  CHECK_NOTHROW(SolveOptions{}.validate());
}
