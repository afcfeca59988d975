#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>

#include "navslip/carrier.hpp"
#include "navslip/fem/dofmap.hpp"

namespace navslip {

/// Reduced: constrained unknowns (velocity block first, then pressure).
/// Full: nodal coefficients in Cartesian components, no constraints.
enum class Space { Reduced, Full };

enum class TransportForm { Skew, Convective };

/// Blocks of the linearized convection operator
///   c(v, φ) = ∫(v·∇g)·φ + t_w(v, φ) [+ newton: t_δ(v_k; v, φ)]
/// with transport t_w(v, φ) = ½[∫(w·∇v)·φ − ∫(w·∇φ)·v] (Skew) or ∫(w·∇v)·φ,
/// w = g + v_k, and the Newton reaction t_v(v, v_k, φ) in the same form.
struct OseenParts {
  bool reaction_g = true;
  bool transport = true;
  bool newton_reaction = false;
  TransportForm form = TransportForm::Skew;
};

/// Discontinuous P1 pressure shapes 1, (x1 − xc)/hx, (x2 − yc)/hy of a cell.
struct PressureBasis {
  double xc = 0.0;
  double yc = 0.0;
  double hx = 1.0;
  double hy = 1.0;
  std::array<double, 3> operator()(double x1, double x2) const { return {1.0, (x1 - xc) / hx, (x2 - yc) / hy}; }
};
PressureBasis pressure_basis(const Mesh& mesh, int i, int j);

/// a(v, φ) = 2∫D(v):D(φ) + θ∮_{walls} v·φ ds.
SpMat assemble_viscous_slip(const DofMap& dofs, double theta, Space space = Space::Reduced);
/// Pressure-row block of b(v, q) = −∫ q div v (the saddle matrix adds its transpose).
SpMat assemble_divergence(const DofMap& dofs, Space space = Space::Reduced);
/// c(v, φ); carrier or v_full may be null (then g = 0 or v_k = 0).
SpMat assemble_oseen(const DofMap& dofs, const QuadratureSpec& quad, const FluxCarrier* carrier,
                     const Eigen::VectorXd* v_full, const OseenParts& parts, Space space = Space::Reduced);
/// ℓ(φ) = −2∫D(g):D(φ) + ∫(g·∇φ)·g.
Eigen::VectorXd assemble_carrier_rhs(const DofMap& dofs, const QuadratureSpec& quad,
                                     const FluxCarrier& carrier, Space space = Space::Reduced);
/// −t_v(v, v, φ): the explicit convection load of the fixed-point map.
Eigen::VectorXd assemble_convection_load(const DofMap& dofs, const QuadratureSpec& quad,
                                         const Eigen::VectorXd& v_full, TransportForm form,
                                         Space space = Space::Reduced);
/// ∫∇v:∇φ on velocities (H¹ seminorm Gram matrix).
SpMat assemble_velocity_gram(const DofMap& dofs, Space space = Space::Reduced);
/// ∫ p q on pressures.
SpMat assemble_pressure_mass(const DofMap& dofs, Space space = Space::Reduced);

/// [[K, Bᵀ], [B, 0]] in the global layout of `space`.
SpMat saddle_matrix(const SpMat& K, const SpMat& B);

/// Discrete inf-sup constant min_q sup_v b(v, q)/(|v|_{H¹} ‖q‖) over
/// zero-mean pressures, by a dense generalized eigenproblem. Only for coarse
/// meshes (≤ 6000 reduced unknowns). Throws RankDeficient below 1e-8.
double inf_sup_constant(const DofMap& dofs);

/// Velocity value and gradient (grad(i, j) = ∂_j v_i) of a full nodal vector.
struct VelocityAt {
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();
};
VelocityAt velocity_at(const Mesh& mesh, const QPoint& q, const Eigen::VectorXd& v_full);

/// Carrier column built from quadrature wall data.
CarrierColumn carrier_column(const XiNode& xn);

/// Visits every quadrature point of the cells meeting x1 ∈ [lo, hi], with
/// the ξ-rule clipped to [lo, hi].
void for_each_qpoint(const Mesh& mesh, const QuadratureSpec& quad, double lo, double hi,
                     const std::function<void(const XiNode&, const QPoint&)>& fn);

}  // namespace navslip
