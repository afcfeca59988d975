#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "navslip/carrier.hpp"
#include "navslip/fem/assembly.hpp"

namespace navslip {

/// Discrete solution u = v + g on Ω_{a,b}: full coefficients x (velocity
/// correction v, then pressure normalized to zero mean) and the carrier g.
struct FlowState {
  std::shared_ptr<const DofMap> dofs;
  FluxCarrier carrier;
  Eigen::VectorXd x;

  FlowState(std::shared_ptr<const DofMap> d, FluxCarrier g);
  FlowState(std::shared_ptr<const DofMap> d, FluxCarrier g, Eigen::VectorXd full);

  double phi() const { return carrier.phi(); }
  const Mesh& mesh() const { return dofs->mesh(); }
  QuadratureSpec quad() const { return QuadratureSpec::for_carrier(carrier.eps()); }
};

/// Shift the pressure constants so that ∫ p = 0.
void normalize_pressure(const DofMap& dofs, Eigen::VectorXd& x);

/// Which field an energy refers to.
enum class Field { Correction, Total };

/// ∫_{Ω ∩ {lo < x1 < hi}} |∇w|² with w = v (Correction) or u = v + g (Total).
double gradient_energy(const FlowState& s, Field field, double lo, double hi);
/// ∫ over both walls with lo < x1 < hi of |w|² ds.
double wall_energy(const FlowState& s, Field field, double lo, double hi);
/// ∫_{lo}^{hi} ∫ |∇g|² + |g|⁴ by the mesh quadrature.
double carrier_energy(const FlowState& s, double lo, double hi);

/// Flux ∫_{Σ(x1)} u1 dx2 at the interior mesh sections x1 = x_i, i = 1..nx−1.
std::vector<double> section_fluxes(const FlowState& s);
/// max_i |flux_i − Φ|.
double max_flux_error(const FlowState& s);

/// max over pressure test functions of |∫ q div v|.
double divergence_residual(const FlowState& s);

/// u at an interior point (located on the mesh).
Eigen::Vector2d sample_velocity(const FlowState& s, double x1, double x2);

/// ‖u − U‖_{L²} and ‖U‖_{L²} over lo < x1 < hi.
struct L2Comparison {
  double error = 0.0;
  double reference = 0.0;
  double relative() const { return reference > 0.0 ? error / reference : error; }
};
L2Comparison compare_l2(const FlowState& s, double lo, double hi,
                        const std::function<Eigen::Vector2d(double, double)>& reference);

}  // namespace navslip
