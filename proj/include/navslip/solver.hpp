#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "navslip/error.hpp"
#include "navslip/fem/flow_state.hpp"
#include "navslip/shear.hpp"

namespace navslip {

struct SolveOptions {
  double tol_rel = 1e-10;
  int max_picard = 200;
  int max_newton = 25;
  double damping = 1.0;
  int max_damping_halvings = 4;
  int continuation_steps = 8;
  /// ε-halving restarts when Picard stalls.
  int max_eps_halvings = 2;
  ShearConvention convention = ShearConvention::WeakFormConsistent;
  TransportForm form = TransportForm::Skew;
  /// false: Stokes limit (no g-convection, no nonlinearity).
  bool convection = true;

  /// Throws ConfigInvalid.
  void validate() const;
};

struct SolveReport {
  std::string method;
  bool converged = false;
  int iterations = 0;
  std::vector<double> residuals;       // relative nonlinear residuals
  std::vector<double> newton_ratios;   // r_{k+1}/r_k²
  bool damping_engaged = false;
  bool monotone_after_damping = true;
  double final_damping = 1.0;
  double eps_used = 0.0;
  int eps_halvings = 0;
  double phi = 0.0;
  double gradient_energy = 0.0;   // ‖∇v‖²
  double wall_energy = 0.0;       // ‖v‖²_walls
  double carrier_energy = 0.0;    // ∫|∇g|² + |g|⁴
  double energy_ratio = 0.0;      // ‖∇v‖² / carrier energy (empirical C₀)
  double energy_inequality_margin = 0.0;  // 2 E_g^{1/2}‖∇v‖ − (𝔠/2)‖∇v‖² − α‖v‖²_walls
  double flux_error = 0.0;
  double seconds = 0.0;
};

/// Sparse LU of a saddle matrix with one step of iterative refinement.
class SaddleSolver {
 public:
  /// Throws `code` (SingularSystem by default) when factorization fails.
  explicit SaddleSolver(const SpMat& M, ErrorCode code = ErrorCode::SingularSystem);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  SpMat M_;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
};

/// Discretized Ω_{a,b} with the flux-independent operators a(·,·) and b(·,·).
class Problem {
 public:
  Problem(std::shared_ptr<const DofMap> dofs, double alpha, ShearConvention convention);
  static Problem build(const TruncatedDomain& domain, int nx, int ny, Grading grading, double alpha,
                       ShearConvention convention,
                       double grading_parameter = std::numeric_limits<double>::quiet_NaN());

  const DofMap& dofs() const { return *dofs_; }
  std::shared_ptr<const DofMap> dofs_ptr() const { return dofs_; }
  const Mesh& mesh() const { return dofs_->mesh(); }
  double alpha() const { return alpha_; }
  double theta() const { return theta_; }
  ShearConvention convention() const { return convention_; }
  const SpMat& viscous() const { return A_; }
  const SpMat& divergence() const { return B_; }
  /// 𝔠 = α/(α + sup wall curvature on [a, b]).
  double coercivity_constant() const { return coercivity_; }

 private:
  std::shared_ptr<const DofMap> dofs_;
  double alpha_;
  double theta_;
  ShearConvention convention_;
  SpMat A_;
  SpMat B_;
  double coercivity_ = 0.0;
};

/// Solves [[a + c_g, bᵀ], [b, 0]] y = rhs (c_g omitted when !convection) for
/// a reduced load vector; pressure normalized to zero mean.
FlowState solve_linearized(const Problem& problem, const FluxCarrier& carrier, const Eigen::VectorXd& rhs,
                           bool convection = true);

/// Damped iteration v_{k+1} = (1 − ω) v_k + ω K(v_k) of the fixed-point map
/// K(w) = T(Δg − g·∇g − w·∇w). Halves ω on residual increase; halves the
/// carrier ε on stall. Throws NotConverged.
std::pair<FlowState, SolveReport> picard_solve(const Problem& problem, const FluxCarrier& carrier,
                                               const SolveOptions& options, const FlowState* warm_start = nullptr);

/// Newton iteration on the same discrete equations with backtracking.
/// Throws JacobianSingular or NotConverged.
std::pair<FlowState, SolveReport> newton_solve(const Problem& problem, const FluxCarrier& carrier,
                                               const SolveOptions& options, const FlowState* warm_start = nullptr);

/// Picard, then a Newton finish; on Picard failure Newton from the warm start.
std::pair<FlowState, SolveReport> solve_steady(const Problem& problem, const FluxCarrier& carrier,
                                               const SolveOptions& options, const FlowState* warm_start = nullptr);

struct ContinuationResult {
  FlowState state;
  std::vector<double> phis;
  std::vector<SolveReport> reports;
};

/// Geometric ramp of Φ from min(0.1, Φ_target) to Φ_target in
/// options.continuation_steps steps; failed steps are bisected in log Φ up to
/// 6 times. The carrier's own Φ is ignored. Throws ContinuationStalled.
ContinuationResult continuation_in_flux(const Problem& problem, const FluxCarrier& carrier,
                                        const SolveOptions& options, double phi_target);

struct UniquenessVerdict {
  bool unique = false;
  int converged = 0;
  int failed = 0;
  std::vector<double> pairwise_distances;  // energy norm ‖∇(v_i − v_j)‖
  double max_distance = 0.0;
  std::string note = "numerical evidence from finitely many seeds, not a proof";
};

/// Newton from n_seeds random initial states with ‖∇v₀‖ = radius.
UniquenessVerdict uniqueness_probe(const Problem& problem, const FluxCarrier& carrier, const SolveOptions& options,
                                   int n_seeds, std::uint64_t seed = 1, double radius = 1.0);

/// Energies, flux error and margins of a converged state.
void fill_report(const Problem& problem, const FlowState& state, SolveReport& report);

}  // namespace navslip
