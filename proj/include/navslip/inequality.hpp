#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "navslip/estimates.hpp"
#include "navslip/fem/dofmap.hpp"

namespace navslip {

/// 1D zero-mean constant of ‖w‖ ≤ (L/π)‖w'‖ in the f-normalized form: 1/π.
double poincare_reference();

/// ‖f‖_{L∞(a,b)} (1 + ‖f2'‖_{L∞(a,b)}): the Poincaré constant up to its
/// universal factor.
double m1_shape(const ChannelProfile& profile, double a, double b);

/// (1 + ‖(f1', f2')‖²_∞)(M1/(b − a) + 1)^{1/2}(|Ω| + (b − a)d)^{1/4}(1 + M1/d):
/// the L⁴ embedding constant up to its universal factor.
double m4_shape(const ChannelProfile& profile, double a, double b, double M1);

/// Rayleigh suprema over Q2 fields with zero section flux and v·n = 0 at the
/// wall nodes (no condition on the end sections).
struct PoincareMeasure {
  double section_ratio = 0.0;  // sup ‖v1/f‖/‖∂2 v1‖
  double M0 = 0.0;
  double full_ratio = 0.0;     // sup ‖v‖/‖∇v‖
  double trial_ratio = 0.0;    // best of the random trials (≤ full_ratio)
  int trials = 0;
  int unknowns = 0;            // dimension of the constrained space
};

/// Dense generalized eigensolves: meshes up to a few thousand nodes.
PoincareMeasure poincare_measure(const Mesh& mesh, int trials = 8, std::uint64_t seed = 1);

/// Whether a full nodal velocity has zero flux through every node column and
/// vanishing normal component at the wall nodes (relative tolerance).
bool poincare_admissible(const Mesh& mesh, const Eigen::VectorXd& v_full, double tol = 1e-10);

struct EmbeddingMeasure {
  double ratio = 0.0;  // sup ‖v‖_{L⁴}/‖∇v‖ over the refined trials
  std::vector<double> initial;  // per-trial ratio before the ascent
  std::vector<double> refined;  // and after
  int ascent_steps = 0;
};

/// Random bandlimited fields projected onto the constraints, then
/// `ascent_steps` of the normalized power iteration y ← Ĝ⁻¹∇‖v‖⁴_{L⁴}, which
/// increases the ratio monotonically. Trial k draws from the stream (seed, k).
EmbeddingMeasure embedding_measure(const Mesh& mesh, int trials = 8, std::uint64_t seed = 1,
                                   int ascent_steps = 20);

/// Universal factors fitted once on the straight channel (0,1)×(−1,1):
/// C1 = measured M1/m1_shape, C4 = measured M4/m4_shape(C1 m1_shape).
struct Calibration {
  double C1 = 0.0;
  double C4 = 0.0;
  int nx = 0;
  int ny = 0;
};
Calibration calibrate_constants(int nx = 6, int ny = 6, std::uint64_t seed = 1);

struct ConstantCheck {
  std::string profile;
  double a = 0.0;
  double b = 0.0;
  double M0 = 0.0;
  double section_ratio = 0.0;
  double M1_measured = 0.0;
  double M1_formula = 0.0;
  double M4_measured = 0.0;
  double M4_formula = 0.0;
  bool pass = false;  // every measured value ≤ its bound + 1e-8
};
ConstantCheck check_constants(const std::string& name, const Mesh& mesh, const Calibration& cal,
                              int trials = 8, std::uint64_t seed = 1);

/// Korn-type coercivity 𝔠‖∇v‖² ≤ 2‖D(v)‖² + α‖v‖²_{walls},
/// 𝔠 = α/(α + sup|∂_τ n|) (1 on straight walls with α > 0, 0 when α = 0).
double korn_constant(double alpha, double curvature);

/// Full velocity satisfies the constraints of the reduced space (ends zero,
/// v·n = 0 at wall nodes, edge-flux slaving) and is discretely divergence free.
bool korn_admissible(const DofMap& dofs, const Eigen::VectorXd& v_full, double tol = 1e-8);

/// Reduced velocity closest in |·|_{H¹} to `reduced` among discretely
/// divergence-free fields.
class DivergenceFreeProjector {
 public:
  explicit DivergenceFreeProjector(const DofMap& dofs);
  /// Solves min |v − r|_{H¹} + div constraint for the load G r (or `load`).
  Eigen::VectorXd project(const Eigen::VectorXd& reduced) const;
  Eigen::VectorXd solve_load(const Eigen::VectorXd& velocity_load) const;
  const SpMat& gram() const { return G_; }

 private:
  const DofMap& dofs_;
  SpMat G_;
  Eigen::SparseLU<SpMat> lu_;
};

/// |‖∇v‖² − 2‖D(v)‖² + ∮(2n·D(v)·v − n·∇v·v)| / ‖∇v‖² on the walls.
double korn_identity_residual(const DofMap& dofs, const Eigen::VectorXd& v_full);

struct KornReport {
  double alpha = 0.0;
  double curvature = 0.0;
  double c = 0.0;
  /// min over trials of 2‖D‖² + α‖v‖²_w − 𝔠‖∇v‖² with ‖∇v‖ = 1.
  double min_margin = 0.0;
  double max_identity_residual = 0.0;
  int trials = 0;
  Verdict verdict = Verdict::Fail;
};

/// Random bandlimited divergence-free trials, each refined by `descent_steps`
/// of preconditioned gradient descent on (2‖D‖² + α‖v‖²_w)/‖∇v‖².
KornReport korn_check(const DofMap& dofs, double alpha, int trials = 200, std::uint64_t seed = 1,
                      int descent_steps = 20, double slack = 1e-8);

/// Cover of E⁺ = Ω_{t−1,t} by 2N − 1 overlapping pieces
/// E_k = {t − 1 + (k − 1)/(2N) ≤ x1 ≤ t − 1 + (k + 1)/(2N)}, each star-like
/// with respect to the ball of radius R about (t − 1 + k/(2N), f̄).
struct StarPiece {
  double lo = 0.0;
  double hi = 0.0;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double area = 0.0;
  double overlap = 0.0;     // |E_k ∩ E_{k+1}|, 0 for the last piece
  double clearance = 0.0;   // distance from the center to ∂E_k, minus R
  int rays = 0;
  bool certified = false;
};

struct StarDecomposition {
  double t = 0.0;
  double d = 0.0;      // min f on the slab
  double d_bar = 0.0;  // max f
  double beta = 0.0;   // max |fi'|
  int N = 0;
  double R = 0.0;
  double s = 0.0;      // slope of the tangent from the lowest right-corner wall point
  double R0 = 0.0;     // diameter of E⁺
  double area = 0.0;
  double C_D = 0.0;
  double bound = 0.0;  // C_D (R0/R)² (1 + R0/R)
  double min_overlap = 0.0;
  std::vector<StarPiece> pieces;
};

/// Smallest N > β/d with s > β, R = ½ min{1/(2N), d/2 − β/(2N)}; every
/// piece certified on `rays` sampled rays. Throws NotStarLike naming the ray.
StarDecomposition star_decomposition(const ChannelProfile& profile, double t, int rays = 10000,
                                     std::uint64_t seed = 1);

/// s > 0 of the line through (1/(2N), h) relative to the center at distance
/// R: R = |s/(2N) − h|/√(1 + s²), steeper root. Throws if R ≥ 1/(2N).
double tangent_slope(int N, double h, double R);

struct BogovskiiResult {
  Eigen::VectorXd a;      // full nodal velocity, zero on the boundary
  double gradient = 0.0;  // ‖∇a‖
  double w_norm = 0.0;    // ‖w‖
  double mean = 0.0;      // ∫w
  double ratio = 0.0;     // ‖∇a‖/‖w‖ (0 when w = 0)
  double divergence_defect = 0.0;  // max |∫q(div a − w)| / (‖q‖‖w‖) over pressure shapes
};

/// w − ∫w/|D| with both integrals taken by the quadrature of bogovskii_solve.
std::function<double(double, double)> remove_mean(const Mesh& mesh, std::function<double(double, double)> w);

/// Minimizes ‖∇a‖² over a ∈ Q2 with a = 0 on ∂D subject to the discrete
/// divergence of a equaling w. Throws IncompatibleData when |∫w| > 1e-10‖w‖.
BogovskiiResult bogovskii_solve(const Mesh& mesh, const std::function<double(double, double)>& w);

}  // namespace navslip
