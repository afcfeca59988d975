#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "navslip/geometry.hpp"
#include "navslip/jet.hpp"

namespace navslip {

/// μ = 1 − S with S(t) = σ(t)/(σ(t) + σ(1 − t)), σ(t) = e^{−1/t} (t > 0):
/// μ = 1 on t ≤ 0, μ = 0 on t ≥ 1, supp μ' = [0, 1].
class Mollifier {
 public:
  Mollifier();

  /// μ(t), μ'(t), μ''(t).
  Jet<double> operator()(double t) const;

  double sup_first() const { return sup_d1_; }
  double sup_second() const { return sup_d2_; }

 private:
  double sup_d1_ = 0.0;
  double sup_d2_ = 0.0;
};

/// Wall data of one cross-section, shared by every evaluation at that x1.
struct CarrierColumn {
  double x1 = 0.0;
  Jet<double> f1;
  Jet<double> f2;
  Jet<double> fbar;
  double width = 0.0;
};

struct CarrierSample {
  double G = 0.0;
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  /// grad(i, j) = ∂_j g_i.
  Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();
  /// argument 1 + ε ln((f2 − x2)/(x2 − f̄)) of μ; NaN on the zero branch.
  double arg = 0.0;
  bool active = false;  // inside the support band 0 < arg < 1
};

/// Stream function G = Φ μ(1 + ε ln((f2 − x2)/(x2 − f̄))) above the midline,
/// 0 below, and the solenoidal field g = (∂2 G, −∂1 G) with flux Φ.
class FluxCarrier {
 public:
  FluxCarrier(ChannelProfile profile, double phi, double eps);

  double phi() const { return phi_; }
  double eps() const { return eps_; }
  const ChannelProfile& profile() const { return profile_; }
  const Mollifier& mollifier() const { return mu_; }

  FluxCarrier with_phi(double phi) const { return FluxCarrier(profile_, phi, eps_); }
  FluxCarrier with_eps(double eps) const { return FluxCarrier(profile_, phi_, eps); }

  CarrierColumn column(double x1) const;
  /// Evaluation on the closed section f1 ≤ x2 ≤ f2 (no domain check).
  CarrierSample evaluate(const CarrierColumn& col, double x2) const;
  CarrierSample evaluate(double x1, double x2) const { return evaluate(column(x1), x2); }

  /// Normalized height band s = (x2 − f1)/f ∈ [lo, hi] carrying supp g.
  std::pair<double, double> support_band() const;
  /// Normalized height s(arg) on the band for a mollifier argument in [0, 1].
  double band_height(double arg) const;

 private:
  ChannelProfile profile_;
  double phi_;
  double eps_;
  Mollifier mu_;
};

/// Throws Error{OutsideDomain} unless f1(x1) < x2 < f2(x1).
double eval_stream(const FluxCarrier& carrier, double x1, double x2);
Eigen::Vector2d eval_velocity(const FluxCarrier& carrier, double x1, double x2);
Eigen::Matrix2d eval_gradient(const FluxCarrier& carrier, double x1, double x2);

/// ∫ over the support band of the section at x1 of `integrand(sample)` dx2,
/// computed in the mollifier-argument variable where the integrand is smooth.
double band_section_integral(const FluxCarrier& carrier, const CarrierColumn& col,
                             const std::function<double(const CarrierSample&, double x2)>& integrand,
                             int order = 48);

struct CarrierReport {
  double sup_g_times_width = 0.0;       // sup f|g|/Φ
  double sup_grad_times_width2 = 0.0;   // sup f²|∇g|/Φ
  double energy = 0.0;                  // ∫|∇g|² + |g|⁴
  double weight = 0.0;                  // ∫_a^b f^{-3}
  double energy_ratio = 0.0;            // energy / ((Φ² + Φ⁴) weight)
  double max_divergence = 0.0;
  double max_flux_error = 0.0;          // max_x1 |∫ g1 dx2 − Φ|
  std::int64_t samples = 0;
  std::int64_t support_samples = 0;
  std::int64_t violations_midline = 0;  // f/4 ≤ x2 − f̄ ≤ f/2
  std::int64_t violations_wall = 0;     // f2 − x2 ≥ e^{−1/ε} f/4
  bool support_ok = false;
};

/// Samples `sample_density` points per unit x1-length on each of 200
/// normalized heights plus the same number of seeded random points; checks
/// the support band pointwise. Throws SupportViolation on a sample with
/// g ≠ 0 outside e^{−1/ε} ≤ (f2 − x2)/(x2 − f̄) ≤ 1.
CarrierReport carrier_bounds_report(const FluxCarrier& carrier, const TruncatedDomain& domain,
                                    int sample_density, std::uint64_t seed = 1);

/// Scalar test field with its x2-derivative.
using WeightField = std::function<std::pair<double, double>(double x1, double x2)>;

/// ∫ g1² w² / (Φ² ε² ∫ |∂2 w|²) over the domain. Throws ZeroDenominator.
double hardy_weighted_check(const FluxCarrier& carrier, const TruncatedDomain& domain,
                            const WeightField& w);

}  // namespace navslip
