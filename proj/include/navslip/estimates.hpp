#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "navslip/error.hpp"
#include "navslip/fem/flow_state.hpp"
#include "navslip/shear.hpp"

namespace navslip {

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v);

/// Thresholds of every verdict below.
struct VerifierConfig {
  /// Interior region [fit_lo·T, fit_hi·T] used by fits, plateau and slab checks.
  double fit_lo = 0.25;
  double fit_hi = 0.75;
  double fit_residual = 0.10;
  double fit_stability = 0.25;
  double lower_bound_spread = 3.0;
  double slab_spread = 3.0;
  double decay_spread = 5.0;
  double plateau_ratio = 1.1;
  double far_field_drop = 1e-3;
  /// Discretization floor of the far-field deviation: this multiple of the
  /// smallest slab deviation, or far_field_floor·‖U‖²_{H¹(slab)}.
  double far_field_noise_factor = 2.0;
  double far_field_floor = 1e-8;
  /// Far-field claims are only made for Φ up to this.
  double small_flux = 1.0;
  bool include_end_slabs = false;

  void validate() const;
};

/// ‖∇w‖²_{lo<x1<hi} + ‖w‖²_{walls, lo<x1<hi}.
double slab_energy(const FlowState& s, double lo, double hi, Field field = Field::Total);

struct EnergyProfile {
  double T = 0.0;                // symmetric truncation half-length
  std::vector<double> t;
  std::vector<double> y;         // u = v + g on Ω_t = Ω_{−t,t}
  std::vector<double> y_v;       // the correction v
  std::vector<double> unit;      // both unit windows at t
  std::vector<double> beta_star; // right β*-window at t
};

/// Requires a truncation Ω_{−T,T} and an increasing grid in (0, T].
EnergyProfile energy_profile(const FlowState& s, const std::vector<double>& t_grid);

/// n points t_k = T k/n, k = 1..n.
std::vector<double> uniform_t_grid(double T, int n);

enum class BoundForm { Linear, WeightIntegral };
const char* to_string(BoundForm f);

/// y(t) ≈ offset + constant·b(t) on the interior, b(t) = t or ∫_{−t}^t f^{-3}.
struct GrowthFit {
  BoundForm form = BoundForm::Linear;
  double constant = 0.0;
  double offset = 0.0;
  double scale = 0.0;     // max |fit| on the interior
  double residual = 0.0;  // sup |y − fit| / scale
  int points = 0;
  Verdict verdict = Verdict::Fail;
};

/// Throws WindowTooShort with fewer than 4 interior grid points.
GrowthFit fit_growth(const EnergyProfile& p, BoundForm form, const ChannelProfile& profile,
                     const VerifierConfig& cfg = {});

/// max relative change of the fitted constant between consecutive fits.
struct StabilityCheck {
  double max_change = 0.0;
  Verdict verdict = Verdict::Fail;
};
StabilityCheck fit_stability(const std::vector<GrowthFit>& fits, const VerifierConfig& cfg = {});

/// y(fit_hi·T)/y(T/2), linearly interpolated on the grid.
struct PlateauCheck {
  double ratio = 0.0;
  Verdict verdict = Verdict::Fail;
};
PlateauCheck plateau_check(const EnergyProfile& p, const VerifierConfig& cfg = {});

/// ratio(t) = Φ² ∫_{−t}^t f^{-3} / y(t). Every field of flux Φ obeys
/// ratio ≤ 2 max(1, 1/inf f) (section Cauchy–Schwarz from the wall value).
struct LowerBoundCheck {
  std::vector<double> t;
  std::vector<double> ratio;
  double bound = 0.0;
  double max_ratio = 0.0;
  double spread = 0.0;  // max/median
  Verdict verdict = Verdict::Fail;
};
LowerBoundCheck lower_bound_check(const FlowState& s, const EnergyProfile& p, const VerifierConfig& cfg = {});

struct SlabTable {
  std::vector<double> lo;
  std::vector<double> energy;
  double sup = 0.0;
  double median = 0.0;
  double spread = 0.0;
  Verdict verdict = Verdict::Fail;
  std::string note;
};

/// Unit slabs (k − 1, k) inside the interior region (or all of them when
/// include_end_slabs); spread = sup/median.
SlabTable uniform_local_check(const FlowState& s, const VerifierConfig& cfg = {});

/// ‖u − U‖²_{H¹} on unit slabs (k, k+1), k ≥ k_start, with U the shear flow
/// of the far-field section.
struct FarFieldTable {
  std::vector<double> lo;
  std::vector<double> deviation;
  std::vector<double> cumulative;
  std::vector<double> shear_norm;  // ‖U‖²_{H¹(slab)}
  int settled_slab = -1;           // first slab below the drop or the noise floor
  Verdict verdict = Verdict::Fail;
  std::string note;
};
FarFieldTable far_field_check(const FlowState& s, const ShearFlow& far_field, double k_start,
                              const VerifierConfig& cfg = {});

struct DecayTable {
  std::vector<double> t;
  std::vector<double> constant;  // f²(t) · E(β*-window)
  double spread = 0.0;
  int skipped = 0;
  Verdict verdict = Verdict::Fail;
  std::string note;
};
/// Right β*-windows (t − β*f(t), t) at interior grid points.
DecayTable decay_rate_check(const FlowState& s, const std::vector<double>& t_grid, const VerifierConfig& cfg = {});

/// Far-field width conditions for small-flux uniqueness in widening channels:
/// DivergentWeight: ∫^{±∞} f^{-3} = ∞ and f' → 0;
/// ConvergentWeight: ∫^{±∞} f^{-3} < ∞ and sup_{τ≥t} f'/(∫_t^∞ f^{-3})^{1/2} → 0.
enum class WidthCondition { DivergentWeight, ConvergentWeight, Neither };
const char* to_string(WidthCondition c);

struct SideCondition {
  double gamma = 0.0;            // local power exponent t f'/f at the tail
  double weight_exponent = 0.0;  // fitted exponent p of f^{-3} ~ t^p
  bool weight_diverges = false;
  double slope_exponent = 0.0;   // fitted exponent of sup f'
  bool slope_vanishes = false;
  double ratio_exponent = 0.0;   // fitted exponent of the convergent-case ratio
  bool ratio_vanishes = false;
  WidthCondition condition = WidthCondition::Neither;
};

struct ConditionReport {
  SideCondition plus;
  SideCondition minus;
  WidthCondition condition = WidthCondition::Neither;
  /// For power-law widths the conditions hold iff f = o(t^{3/5}).
  bool power_law_consistent = false;
};

/// Evaluates the conditions on the grid t = t0·2^k up to t_max.
ConditionReport condition_check(const ChannelProfile& profile, double t0 = 10.0, double t_max = 1e6);

/// Monotone Ψ(t, s) with Ψ(t, 0) = 0.
class Psi {
 public:
  /// c1(s + s^{3/2}).
  static Psi power_sum(double c1);
  /// c0 s^m.
  static Psi power(double c0, double m);
  /// Piecewise linear through (s_k, v_k), s_0 = 0, v_0 = 0, increasing.
  static Psi table(std::vector<double> s, std::vector<double> v);

  /// Odd extension for s < 0.
  double operator()(double t, double s) const;
  /// (c0, m) with Ψ(s) ≤ c0 s^m for large s, when known.
  std::optional<std::pair<double, double>> power_bound() const { return power_bound_; }

 private:
  std::function<double(double)> fn_;
  std::optional<std::pair<double, double>> power_bound_;
};

struct ComparisonProblem {
  std::vector<double> t;
  std::vector<double> z;
  std::vector<double> phi;  // unused in Part3
  Psi psi = Psi::power_sum(1.0);
  double delta1 = 0.5;
  double slack = 1e-8;
};

enum class ComparisonMode { Part1, Part2, Part3 };

struct ComparisonVerdict {
  ComparisonMode mode = ComparisonMode::Part1;
  Verdict verdict = Verdict::Fail;
  int first_violation = -1;   // first grid index with z > φ + slack
  double min_margin = 0.0;    // min (φ − z)
  double tail_ratio = 0.0;    // Part2: z/φ or z/z̃ at the end; Part3: min tail t^{−m/(m−1)} z
  double comparison_constant = 0.0;  // K of z̃ = K t^{m/(m−1)}
  std::string note;
};

/// Hypothesis failure located on the grid.
class HypothesisViolation : public Error {
 public:
  HypothesisViolation(std::string which, int index, double t);
  const std::string& which() const { return which_; }
  int index() const { return index_; }
  double t() const { return t_; }

 private:
  std::string which_;
  int index_;
  double t_;
};

/// Centered differences with second-order one-sided closure.
std::vector<double> grid_derivative(const std::vector<double>& t, const std::vector<double>& y);

/// K with z̃ = K t^p, p = m/(m − 1), solving z̃ = C (z̃')^m.
double comparison_constant(double C, double m);

/// Part1: (z ≤ Ψ(t, z') + (1 − δ₁)φ), (φ ≥ Ψ(t, φ')/δ₁) and z(T) ≤ φ(T), then z ≤ φ.
/// Part2: the same inequalities without the endpoint condition, replaced by
/// z/φ < 1 at the end of the grid or z/z̃ decreasing to 0 (read as
/// lim z/z̃ = 0), z̃ the comparison solution of z̃ = Ψ(z̃')/δ₁.
/// Part3: z ≤ Ψ(z') and Ψ ≤ c0 s^m; Pass when min over the last quarter of
/// t^{−m/(m−1)} z is positive. Throws HypothesisViolation.
ComparisonVerdict compare_diff_ineq(const ComparisonProblem& problem, ComparisonMode mode);

}  // namespace navslip
