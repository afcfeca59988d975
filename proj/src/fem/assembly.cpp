#include "navslip/fem/assembly.hpp"

#include <cmath>

#include "navslip/error.hpp"

namespace navslip {

namespace {

using Mat18 = Eigen::Matrix<double, 18, 18>;
using Vec18 = Eigen::Matrix<double, 18, 1>;
using Mat3x18 = Eigen::Matrix<double, 3, 18>;

struct CellQuad {
  int i = 0;
  int j = 0;
  std::array<int, 9> nodes{};
  std::vector<QPoint> qps;
  std::vector<int> xi_of;  // index into xi nodes per qpoint
  const std::vector<XiNode>* xi = nullptr;
};

template <class Fn>
void for_each_cell(const Mesh& mesh, const QuadratureSpec& quad, Fn&& fn) {
  std::vector<std::vector<EtaNode>> eta(static_cast<std::size_t>(mesh.ny()));
  for (int j = 0; j < mesh.ny(); ++j) eta[static_cast<std::size_t>(j)] = eta_nodes(mesh, j, quad);
  CellQuad cq;
  for (int i = 0; i < mesh.nx(); ++i) {
    const std::vector<XiNode> xi = xi_nodes(mesh, i, quad);
    cq.xi = &xi;
    cq.i = i;
    for (int j = 0; j < mesh.ny(); ++j) {
      cq.j = j;
      cq.nodes = mesh.cell_nodes(i, j);
      cq.qps.clear();
      cq.xi_of.clear();
      for (std::size_t a = 0; a < xi.size(); ++a)
        for (const EtaNode& en : eta[static_cast<std::size_t>(j)]) {
          cq.qps.push_back(make_qpoint(mesh, i, j, xi[a], en));
          cq.xi_of.push_back(static_cast<int>(a));
        }
      fn(cq);
    }
  }
}

/// Accumulates full-index contributions, mapped through P for the reduced space.
class Scatter {
 public:
  Scatter(const DofMap& dofs, Space space) : dofs_(dofs), space_(space) {
    n_ = space == Space::Reduced ? dofs.num_reduced() : dofs.num_full();
    vec_ = Eigen::VectorXd::Zero(n_);
  }

  void add(int r, int c, double v) {
    if (v == 0.0) return;
    if (space_ == Space::Full) {
      trip_.emplace_back(r, c, v);
      return;
    }
    for (const auto* er = dofs_.row_begin(r); er != dofs_.row_end(r); ++er)
      for (const auto* ec = dofs_.row_begin(c); ec != dofs_.row_end(c); ++ec)
        trip_.emplace_back(er->col, ec->col, er->w * v * ec->w);
  }

  void add(int r, double v) {
    if (v == 0.0) return;
    if (space_ == Space::Full) {
      vec_[r] += v;
      return;
    }
    for (const auto* er = dofs_.row_begin(r); er != dofs_.row_end(r); ++er) vec_[er->col] += er->w * v;
  }

  SpMat matrix() {
    SpMat m(n_, n_);
    m.setFromTriplets(trip_.begin(), trip_.end());
    return m;
  }
  Eigen::VectorXd vector() { return vec_; }

 private:
  const DofMap& dofs_;
  Space space_;
  int n_ = 0;
  std::vector<Eigen::Triplet<double>> trip_;
  Eigen::VectorXd vec_;
};

std::array<int, 18> velocity_index(const std::array<int, 9>& nodes) {
  std::array<int, 18> idx{};
  for (int k = 0; k < 9; ++k)
    for (int c = 0; c < 2; ++c) idx[static_cast<std::size_t>(2 * k + c)] = 2 * nodes[static_cast<std::size_t>(k)] + c;
  return idx;
}

void scatter_matrix(Scatter& s, const std::array<int, 18>& idx, const Mat18& K) {
  for (int a = 0; a < 18; ++a)
    for (int b = 0; b < 18; ++b) s.add(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)], K(a, b));
}

void scatter_vector(Scatter& s, const std::array<int, 18>& idx, const Vec18& F) {
  for (int a = 0; a < 18; ++a) s.add(idx[static_cast<std::size_t>(a)], F[a]);
}

QuadratureSpec plain() { return QuadratureSpec{}; }

QuadratureSpec divergence_rule() {
  QuadratureSpec q;
  q.order = kDivergenceOrder;
  return q;
}

}  // namespace

PressureBasis pressure_basis(const Mesh& mesh, int i, int j) {
  PressureBasis p;
  p.hx = mesh.hx();
  p.xc = mesh.x_edge(i) + 0.5 * p.hx;
  const double f1 = mesh.profile().lower(p.xc).v;
  const double f = mesh.profile().width(p.xc).v;
  p.yc = f1 + 0.5 * (mesh.s_edge(j) + mesh.s_edge(j + 1)) * f;
  p.hy = mesh.ds(j) * f;
  return p;
}

CarrierColumn carrier_column(const XiNode& xn) {
  CarrierColumn c;
  c.x1 = xn.x1;
  c.f1 = xn.f1;
  c.f2 = xn.f2;
  c.fbar = 0.5 * (xn.f1 + xn.f2);
  c.width = xn.f2.v - xn.f1.v;
  return c;
}

VelocityAt velocity_at(const Mesh& mesh, const QPoint& q, const Eigen::VectorXd& v_full) {
  VelocityAt out;
  const int ny = mesh.ny();
  const auto nodes = mesh.cell_nodes(q.cell / ny, q.cell % ny);
  for (int k = 0; k < 9; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Eigen::Vector2d vk(v_full[2 * nodes[ks]], v_full[2 * nodes[ks] + 1]);
    out.v += q.N[ks] * vk;
    out.grad += vk * q.dN[ks].transpose();
  }
  return out;
}

SpMat assemble_viscous_slip(const DofMap& dofs, double theta, Space space) {
  const Mesh& mesh = dofs.mesh();
  Scatter sc(dofs, space);
  for_each_cell(mesh, plain(), [&](const CellQuad& cq) {
    Mat18 K = Mat18::Zero();
    for (const QPoint& q : cq.qps)
      for (int k = 0; k < 9; ++k)
        for (int l = 0; l < 9; ++l) {
          const auto& gk = q.dN[static_cast<std::size_t>(k)];
          const auto& gl = q.dN[static_cast<std::size_t>(l)];
          const double lap = gk.dot(gl);
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d)
              K(2 * k + c, 2 * l + d) += q.weight * ((c == d ? lap : 0.0) + gl[c] * gk[d]);
        }
    if (theta != 0.0 && (cq.j == 0 || cq.j == mesh.ny() - 1)) {
      for (const bool top : {false, true}) {
        if (top ? cq.j != mesh.ny() - 1 : cq.j != 0) continue;
        const int b = top ? 2 : 0;
        for (const XiNode& xn : *cq.xi) {
          const double d = top ? xn.f2.d : xn.f1.d;
          const double ds = xn.weight * mesh.hx() * std::sqrt(1.0 + d * d);
          const auto L = lagrange2(xn.xi);
          for (int a = 0; a < 3; ++a)
            for (int a2 = 0; a2 < 3; ++a2) {
              const double m = theta * ds * L[a] * L[a2];
              const int k = 3 * a + b, l = 3 * a2 + b;
              K(2 * k, 2 * l) += m;
              K(2 * k + 1, 2 * l + 1) += m;
            }
        }
      }
    }
    scatter_matrix(sc, velocity_index(cq.nodes), K);
  });
  return sc.matrix();
}

SpMat assemble_divergence(const DofMap& dofs, Space space) {
  const Mesh& mesh = dofs.mesh();
  Scatter sc(dofs, space);
  for_each_cell(mesh, divergence_rule(), [&](const CellQuad& cq) {
    const PressureBasis pb = pressure_basis(mesh, cq.i, cq.j);
    Mat3x18 B = Mat3x18::Zero();
    for (const QPoint& q : cq.qps) {
      const auto psi = pb(q.x1, q.x2);
      for (int m = 0; m < 3; ++m)
        for (int l = 0; l < 9; ++l)
          for (int d = 0; d < 2; ++d) B(m, 2 * l + d) -= q.weight * psi[static_cast<std::size_t>(m)] * q.dN[static_cast<std::size_t>(l)][d];
    }
    const auto idx = velocity_index(cq.nodes);
    const int cell = mesh.cell(cq.i, cq.j);
    for (int m = 0; m < 3; ++m)
      for (int a = 0; a < 18; ++a) sc.add(dofs.pressure_dof(cell, m), idx[static_cast<std::size_t>(a)], B(m, a));
  });
  return sc.matrix();
}

SpMat assemble_oseen(const DofMap& dofs, const QuadratureSpec& quad, const FluxCarrier* carrier,
                     const Eigen::VectorXd* v_full, const OseenParts& parts, Space space) {
  const Mesh& mesh = dofs.mesh();
  Scatter sc(dofs, space);
  const bool skew = parts.form == TransportForm::Skew;
  for_each_cell(mesh, quad, [&](const CellQuad& cq) {
    Mat18 K = Mat18::Zero();
    for (std::size_t iq = 0; iq < cq.qps.size(); ++iq) {
      const QPoint& q = cq.qps[iq];
      CarrierSample g;
      if (carrier) g = carrier->evaluate(carrier_column((*cq.xi)[static_cast<std::size_t>(cq.xi_of[iq])]), q.x2);
      VelocityAt V;
      if (v_full) V = velocity_at(mesh, q, *v_full);
      const Eigen::Vector2d w = g.g + V.v;
      const bool react = parts.reaction_g && !g.grad.isZero(0.0);
      for (int k = 0; k < 9; ++k) {
        const double Nk = q.N[static_cast<std::size_t>(k)];
        const Eigen::Vector2d& gk = q.dN[static_cast<std::size_t>(k)];
        for (int l = 0; l < 9; ++l) {
          const double Nl = q.N[static_cast<std::size_t>(l)];
          const Eigen::Vector2d& gl = q.dN[static_cast<std::size_t>(l)];
          if (react)
            for (int c = 0; c < 2; ++c)
              for (int d = 0; d < 2; ++d) K(2 * k + c, 2 * l + d) += q.weight * Nk * Nl * g.grad(c, d);
          if (parts.transport) {
            const double t = skew ? 0.5 * (Nk * w.dot(gl) - Nl * w.dot(gk)) : Nk * w.dot(gl);
            K(2 * k, 2 * l) += q.weight * t;
            K(2 * k + 1, 2 * l + 1) += q.weight * t;
          }
          if (parts.newton_reaction && v_full)
            for (int c = 0; c < 2; ++c)
              for (int d = 0; d < 2; ++d) {
                const double t = skew ? 0.5 * (Nl * Nk * V.grad(c, d) - Nl * gk[d] * V.v[c])
                                      : Nl * Nk * V.grad(c, d);
                K(2 * k + c, 2 * l + d) += q.weight * t;
              }
        }
      }
    }
    scatter_matrix(sc, velocity_index(cq.nodes), K);
  });
  return sc.matrix();
}

Eigen::VectorXd assemble_carrier_rhs(const DofMap& dofs, const QuadratureSpec& quad,
                                     const FluxCarrier& carrier, Space space) {
  const Mesh& mesh = dofs.mesh();
  Scatter sc(dofs, space);
  for_each_cell(mesh, quad, [&](const CellQuad& cq) {
    Vec18 F = Vec18::Zero();
    for (std::size_t iq = 0; iq < cq.qps.size(); ++iq) {
      const QPoint& q = cq.qps[iq];
      const CarrierSample g =
          carrier.evaluate(carrier_column((*cq.xi)[static_cast<std::size_t>(cq.xi_of[iq])]), q.x2);
      if (g.g.isZero(0.0) && g.grad.isZero(0.0)) continue;
      const Eigen::Matrix2d sym = g.grad + g.grad.transpose();
      for (int k = 0; k < 9; ++k) {
        const Eigen::Vector2d& gk = q.dN[static_cast<std::size_t>(k)];
        const Eigen::Vector2d visc = sym * gk;
        const double adv = g.g.dot(gk);
        for (int c = 0; c < 2; ++c) F[2 * k + c] += q.weight * (-visc[c] + adv * g.g[c]);
      }
    }
    scatter_vector(sc, velocity_index(cq.nodes), F);
  });
  return sc.vector();
}

Eigen::VectorXd assemble_convection_load(const DofMap& dofs, const QuadratureSpec& quad,
                                         const Eigen::VectorXd& v_full, TransportForm form, Space space) {
  const Mesh& mesh = dofs.mesh();
  Scatter sc(dofs, space);
  const bool skew = form == TransportForm::Skew;
  for_each_cell(mesh, quad, [&](const CellQuad& cq) {
    Vec18 F = Vec18::Zero();
    for (const QPoint& q : cq.qps) {
      const VelocityAt V = velocity_at(mesh, q, v_full);
      const Eigen::Vector2d conv = V.grad * V.v;
      for (int k = 0; k < 9; ++k) {
        const double Nk = q.N[static_cast<std::size_t>(k)];
        const double adv = V.v.dot(q.dN[static_cast<std::size_t>(k)]);
        for (int c = 0; c < 2; ++c) {
          const double t = skew ? 0.5 * (Nk * conv[c] - adv * V.v[c]) : Nk * conv[c];
          F[2 * k + c] -= q.weight * t;
        }
      }
    }
    scatter_vector(sc, velocity_index(cq.nodes), F);
  });
  return sc.vector();
}

SpMat assemble_velocity_gram(const DofMap& dofs, Space space) {
  const Mesh& mesh = dofs.mesh();
  Scatter sc(dofs, space);
  for_each_cell(mesh, plain(), [&](const CellQuad& cq) {
    Mat18 K = Mat18::Zero();
    for (const QPoint& q : cq.qps)
      for (int k = 0; k < 9; ++k)
        for (int l = 0; l < 9; ++l) {
          const double lap = q.weight * q.dN[static_cast<std::size_t>(k)].dot(q.dN[static_cast<std::size_t>(l)]);
          K(2 * k, 2 * l) += lap;
          K(2 * k + 1, 2 * l + 1) += lap;
        }
    scatter_matrix(sc, velocity_index(cq.nodes), K);
  });
  return sc.matrix();
}

SpMat assemble_pressure_mass(const DofMap& dofs, Space space) {
  const Mesh& mesh = dofs.mesh();
  Scatter sc(dofs, space);
  for_each_cell(mesh, plain(), [&](const CellQuad& cq) {
    const PressureBasis pb = pressure_basis(mesh, cq.i, cq.j);
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    for (const QPoint& q : cq.qps) {
      const auto psi = pb(q.x1, q.x2);
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n) M(m, n) += q.weight * psi[static_cast<std::size_t>(m)] * psi[static_cast<std::size_t>(n)];
    }
    const int cell = mesh.cell(cq.i, cq.j);
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n) sc.add(dofs.pressure_dof(cell, m), dofs.pressure_dof(cell, n), M(m, n));
  });
  return sc.matrix();
}

SpMat saddle_matrix(const SpMat& K, const SpMat& B) {
  SpMat Bt = B.transpose();
  return K + B + Bt;
}

double inf_sup_constant(const DofMap& dofs) {
  const int nv = dofs.num_reduced_velocity();
  const int np = dofs.num_reduced_pressure();
  if (dofs.num_reduced() > 6000)
    throw Error(ErrorCode::ConfigInvalid, "inf_sup_constant: mesh too fine for the dense check");
  const Eigen::MatrixXd A = Eigen::MatrixXd(assemble_velocity_gram(dofs)).topLeftCorner(nv, nv);
  const Eigen::MatrixXd B = Eigen::MatrixXd(assemble_divergence(dofs)).block(nv, 0, np, nv);
  const Eigen::MatrixXd Mp = Eigen::MatrixXd(assemble_pressure_mass(dofs)).bottomRightCorner(np, np);

  // mean-zero metric on the pinned space: M − m mᵀ/|Ω| with m = (M_full 1) minus the pinned row
  const SpMat Mfull = assemble_pressure_mass(dofs, Space::Full);
  const int off = dofs.num_velocity();
  Eigen::VectorXd one = Eigen::VectorXd::Zero(dofs.num_full());
  for (int c = 0; c < dofs.mesh().num_cells(); ++c) one[dofs.pressure_dof(c, 0)] = 1.0;
  const Eigen::VectorXd M1 = Mfull * one;
  const double area = one.dot(M1);
  Eigen::VectorXd m(np);
  int r = 0;
  for (int p = off; p < dofs.num_full(); ++p)
    if (p != dofs.pinned_pressure()) m[r++] = M1[p];
  const Eigen::MatrixXd Mt = Mp - m * m.transpose() / area;

  const Eigen::LLT<Eigen::MatrixXd> llt(A);
  const Eigen::MatrixXd S = B * llt.solve(B.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()), Mt,
                                                                Eigen::EigenvaluesOnly);
  const double lam = es.eigenvalues().minCoeff();
  const double beta = std::sqrt(std::max(lam, 0.0));
  if (!(beta > 1e-8))
    throw Error(ErrorCode::RankDeficient, "discrete inf-sup constant " + std::to_string(beta) + " is not positive");
  return beta;
}

void for_each_qpoint(const Mesh& mesh, const QuadratureSpec& quad, double lo, double hi,
                     const std::function<void(const XiNode&, const QPoint&)>& fn) {
  lo = std::max(lo, mesh.domain().a());
  hi = std::min(hi, mesh.domain().b());
  if (!(lo < hi)) return;
  std::vector<std::vector<EtaNode>> eta(static_cast<std::size_t>(mesh.ny()));
  for (int j = 0; j < mesh.ny(); ++j) eta[static_cast<std::size_t>(j)] = eta_nodes(mesh, j, quad);
  const int i0 = std::max(0, static_cast<int>(std::floor((lo - mesh.domain().a()) / mesh.hx())));
  const int i1 = std::min(mesh.nx() - 1, static_cast<int>(std::floor((hi - mesh.domain().a()) / mesh.hx())));
  for (int i = i0; i <= i1; ++i) {
    const double xl = mesh.x_edge(i), xr = xl + mesh.hx();
    const double a = std::max(lo, xl), b = std::min(hi, xr);
    if (!(a < b)) continue;
    const auto xi = xi_nodes(mesh, i, quad, (a - xl) / mesh.hx(), (b - xl) / mesh.hx());
    for (const XiNode& xn : xi)
      for (int j = 0; j < mesh.ny(); ++j)
        for (const EtaNode& en : eta[static_cast<std::size_t>(j)]) fn(xn, make_qpoint(mesh, i, j, xn, en));
  }
}

}  // namespace navslip
