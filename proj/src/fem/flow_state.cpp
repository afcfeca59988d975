#include "navslip/fem/flow_state.hpp"

#include <algorithm>
#include <cmath>

#include "navslip/error.hpp"
#include "navslip/quadrature.hpp"

namespace navslip {

FlowState::FlowState(std::shared_ptr<const DofMap> d, FluxCarrier g)
    : dofs(std::move(d)), carrier(std::move(g)), x(Eigen::VectorXd::Zero(dofs->num_full())) {}

FlowState::FlowState(std::shared_ptr<const DofMap> d, FluxCarrier g, Eigen::VectorXd full)
    : dofs(std::move(d)), carrier(std::move(g)), x(std::move(full)) {
  if (x.size() != dofs->num_full()) throw Error(ErrorCode::ConfigInvalid, "FlowState: coefficient vector has wrong size");
}

void normalize_pressure(const DofMap& dofs, Eigen::VectorXd& x) {
  const Mesh& mesh = dofs.mesh();
  double area = 0.0, integral = 0.0;
  const QuadratureSpec quad;
  for_each_qpoint(mesh, quad, mesh.domain().a(), mesh.domain().b(), [&](const XiNode&, const QPoint& q) {
    const PressureBasis pb = pressure_basis(mesh, q.cell / mesh.ny(), q.cell % mesh.ny());
    const auto psi = pb(q.x1, q.x2);
    double p = 0.0;
    for (int m = 0; m < 3; ++m) p += psi[static_cast<std::size_t>(m)] * x[dofs.pressure_dof(q.cell, m)];
    area += q.weight;
    integral += q.weight * p;
  });
  const double mean = integral / area;
  for (int c = 0; c < mesh.num_cells(); ++c) x[dofs.pressure_dof(c, 0)] -= mean;
}

double gradient_energy(const FlowState& s, Field field, double lo, double hi) {
  double sum = 0.0;
  for_each_qpoint(s.mesh(), s.quad(), lo, hi, [&](const XiNode& xn, const QPoint& q) {
    Eigen::Matrix2d G = velocity_at(s.mesh(), q, s.x).grad;
    if (field == Field::Total) G += s.carrier.evaluate(carrier_column(xn), q.x2).grad;
    sum += q.weight * G.squaredNorm();
  });
  return sum;
}

double wall_energy(const FlowState& s, Field, double lo, double hi) {
  // g vanishes in a neighbourhood of both walls, so u = v there
  const Mesh& mesh = s.mesh();
  lo = std::max(lo, mesh.domain().a());
  hi = std::min(hi, mesh.domain().b());
  double sum = 0.0;
  const QuadratureSpec quad;
  for (int i = 0; i < mesh.nx(); ++i) {
    const double xl = mesh.x_edge(i);
    const double a = std::max(lo, xl), b = std::min(hi, xl + mesh.hx());
    if (!(a < b)) continue;
    for (const XiNode& xn : xi_nodes(mesh, i, quad, (a - xl) / mesh.hx(), (b - xl) / mesh.hx())) {
      const auto L = lagrange2(xn.xi);
      for (const int J : {0, mesh.nodes_y() - 1}) {
        Eigen::Vector2d v = Eigen::Vector2d::Zero();
        for (int k = 0; k < 3; ++k) {
          const int node = mesh.node(2 * i + k, J);
          v += L[k] * Eigen::Vector2d(s.x[2 * node], s.x[2 * node + 1]);
        }
        const double d = J == 0 ? xn.f1.d : xn.f2.d;
        sum += xn.weight * mesh.hx() * std::sqrt(1.0 + d * d) * v.squaredNorm();
      }
    }
  }
  return sum;
}

double carrier_energy(const FlowState& s, double lo, double hi) {
  double sum = 0.0;
  for_each_qpoint(s.mesh(), s.quad(), lo, hi, [&](const XiNode& xn, const QPoint& q) {
    const CarrierSample g = s.carrier.evaluate(carrier_column(xn), q.x2);
    const double g2 = g.g.squaredNorm();
    sum += q.weight * (g.grad.squaredNorm() + g2 * g2);
  });
  return sum;
}

std::vector<double> section_fluxes(const FlowState& s) {
  const Mesh& mesh = s.mesh();
  std::vector<double> out;
  for (int i = 1; i < mesh.nx(); ++i) {
    const double x1 = mesh.x_edge(i);
    const CarrierColumn col = s.carrier.column(x1);
    // v1 is quadratic in η on every cell of the section: Simpson is exact
    double fv = 0.0;
    for (int j = 0; j < mesh.ny(); ++j) {
      const auto v1 = [&](int J) { return s.x[2 * mesh.node(2 * i, J)]; };
      fv += mesh.ds(j) * (v1(2 * j) + 4.0 * v1(2 * j + 1) + v1(2 * j + 2)) / 6.0;
    }
    fv *= col.width;
    const double fg = band_section_integral(s.carrier, col, [](const CarrierSample& g, double) { return g.g[0]; });
    out.push_back(fv + fg);
  }
  return out;
}

double max_flux_error(const FlowState& s) {
  double worst = 0.0;
  for (double f : section_fluxes(s)) worst = std::max(worst, std::abs(f - s.phi()));
  return worst;
}

double divergence_residual(const FlowState& s) {
  const SpMat B = assemble_divergence(*s.dofs, Space::Full);
  Eigen::VectorXd v = s.x;
  v.tail(s.dofs->num_pressure()).setZero();
  return (B * v).lpNorm<Eigen::Infinity>();
}

Eigen::Vector2d sample_velocity(const FlowState& s, double x1, double x2) {
  const Mesh& mesh = s.mesh();
  if (!mesh.domain().contains(x1, x2))
    throw Error(ErrorCode::OutsideDomain, "sample_velocity: point outside the truncated domain");
  const int i = std::clamp(static_cast<int>(std::floor((x1 - mesh.domain().a()) / mesh.hx())), 0, mesh.nx() - 1);
  XiNode xn;
  xn.xi = (x1 - mesh.x_edge(i)) / mesh.hx();
  xn.weight = 1.0;
  xn.x1 = x1;
  xn.f1 = mesh.profile().lower(x1);
  xn.f2 = mesh.profile().upper(x1);
  const double sn = (x2 - xn.f1.v) / (xn.f2.v - xn.f1.v);
  int j = 0;
  while (j < mesh.ny() - 1 && sn > mesh.s_edge(j + 1)) ++j;
  const EtaNode en{(sn - mesh.s_edge(j)) / mesh.ds(j), 1.0};
  const QPoint q = make_qpoint(mesh, i, j, xn, en);
  return velocity_at(mesh, q, s.x).v + s.carrier.evaluate(carrier_column(xn), x2).g;
}

L2Comparison compare_l2(const FlowState& s, double lo, double hi,
                        const std::function<Eigen::Vector2d(double, double)>& reference) {
  double e2 = 0.0, r2 = 0.0;
  for_each_qpoint(s.mesh(), s.quad(), lo, hi, [&](const XiNode& xn, const QPoint& q) {
    const Eigen::Vector2d u = velocity_at(s.mesh(), q, s.x).v + s.carrier.evaluate(carrier_column(xn), q.x2).g;
    const Eigen::Vector2d U = reference(q.x1, q.x2);
    e2 += q.weight * (u - U).squaredNorm();
    r2 += q.weight * U.squaredNorm();
  });
  return {std::sqrt(e2), std::sqrt(r2)};
}

}  // namespace navslip
