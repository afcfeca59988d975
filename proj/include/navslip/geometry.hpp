#pragma once

#include <optional>
#include <string>
#include <vector>

#include "navslip/expression.hpp"
#include "navslip/jet.hpp"

namespace navslip {

/// Channel Ω = {f1(x1) < x2 < f2(x1)} given by two formula trees, together
/// with the declared bounds d ≤ f, |fi'| ≤ β, |fi'' f| ≤ γ.
class ChannelProfile {
 public:
  struct Bounds {
    double d = 0.0;
    double beta = 0.0;
    double gamma_pp = 0.0;
  };

  ChannelProfile(Expression f1, Expression f2, Bounds declared);

  /// Straight channel lower < x2 < upper.
  static ChannelProfile straight(double lower, double upper);
  /// Profile whose declared bounds are the values measured on [lo, hi]
  /// (grid maxima refined by golden-section search).
  static ChannelProfile with_measured_bounds(Expression f1, Expression f2, double lo, double hi,
                                             int samples = 20001);

  const Expression& f1_expr() const { return f1_; }
  const Expression& f2_expr() const { return f2_; }
  Expression width_expr() const { return f2_ - f1_; }

  Jet<double> lower(double x1) const { return f1_.jet(x1); }
  Jet<double> upper(double x1) const { return f2_.jet(x1); }
  Jet<double> width(double x1) const { return upper(x1) - lower(x1); }
  /// f̄ = (f1 + f2)/2.
  Jet<double> midline(double x1) const { return 0.5 * (upper(x1) + lower(x1)); }

  double d() const { return bounds_.d; }
  double beta() const { return bounds_.beta; }
  double gamma_pp() const { return bounds_.gamma_pp; }
  const Bounds& bounds() const { return bounds_; }
  /// β* = 1/(4β); throws Error{BetaZero} for straight walls.
  double beta_star() const;

  bool contains(double x1, double x2) const;

 private:
  Expression f1_;
  Expression f2_;
  Bounds bounds_;
};

struct ValidationReport {
  double inf_width = 0.0;
  double sup_slope = 0.0;           // max_i sup |fi'|
  double sup_curvature_width = 0.0; // max_i sup |fi'' f|
  bool width_ok = false;
  bool slope_ok = false;
  bool curvature_ok = false;

  bool pass() const { return width_ok && slope_ok && curvature_ok; }
};

/// Measures the standing bounds on `grid` (strictly increasing). Throws
/// NonPositiveWidth or DerivativeBoundViolated (declared β exceeded by more
/// than 1e-12 relative).
ValidationReport validate_profile(const ChannelProfile& profile, const std::vector<double>& grid);

/// sup over [lo, hi] of the wall curvature |fi''|/(1 + fi'^2)^{3/2}.
double max_wall_curvature(const ChannelProfile& profile, double lo, double hi, int samples = 4001);

/// Whether ½f(t) ≤ f(ξ) ≤ 3/2 f(t) at `samples` points ξ of [t − β*f(t), t + β*f(t)].
bool window_sandwich_holds(const ChannelProfile& profile, double t, int samples = 64);

/// ∫_a^b f^power by adaptive quadrature (relative tolerance 1e-10).
double weight_integral(const ChannelProfile& profile, double a, double b, double power);

enum class HorizonCase { BothInfinite, BothFinite, LeftFinite, RightFinite, FiniteHorizonUnknown };
std::string to_string(HorizonCase c);

/// Classifies divergence of ∫_0^{±∞} f^{-5/3} from the leading power of the
/// width tree. LeftFinite means ∫_{-∞}^0 converges while ∫_0^∞ diverges.
HorizonCase classify_horizon(const ChannelProfile& profile);

/// k(t) = ∫_0^t f^{-5/3}, its inverse h, and the shifted inverses
/// hL(t) = h(−t) + β*f(h(−t)), hR(t) = h(t) − β*f(h(t)).
class Reparametrization {
 public:
  double k(double t) const;
  double h(double s) const;
  double hL(double t) const;
  double hR(double t) const;

  double t_max() const { return t_max_; }
  /// Range of k over the tabulated interval [−t_max, t_max].
  double k_min() const { return k_table_.front(); }
  double k_max() const { return k_table_.back(); }

  /// sup{t > 0 : hL(t) ≥ hR(t)}; empty when β = 0 or the case has a finite side.
  std::optional<double> t_star() const { return t_star_; }
  /// sup{t > 0 : hR(t) ≤ 0} (or the mirrored hL(t) ≥ 0 for RightFinite).
  std::optional<double> t_hat() const { return t_hat_; }
  HorizonCase case_tag() const { return case_; }
  std::optional<double> L() const { return L_; }
  std::optional<double> R() const { return R_; }

  const std::vector<double>& grid() const { return t_table_; }
  const std::vector<double>& k_values() const { return k_table_; }

 private:
  friend Reparametrization build_reparametrization(const ChannelProfile& profile, double t_max);
  explicit Reparametrization(ChannelProfile profile) : profile_(std::move(profile)) {}

  double k_density(double t) const;
  std::size_t locate_t(double t) const;

  ChannelProfile profile_;
  double t_max_ = 0.0;
  std::vector<double> t_table_;
  std::vector<double> k_table_;
  std::optional<double> t_star_;
  std::optional<double> t_hat_;
  HorizonCase case_ = HorizonCase::FiniteHorizonUnknown;
  std::optional<double> L_;
  std::optional<double> R_;
};

/// Tabulates k on [−t_max, t_max]. Throws NonMonotoneK or HorizonTooShort.
Reparametrization build_reparametrization(const ChannelProfile& profile, double t_max);

struct Window {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

enum class WindowKind { Unit, Hat, BetaStar };

/// Unit: (−t, −t+1), (t−1, t). Hat: (h(−t), hL(t)), (hR(t), h(t)).
/// BetaStar: (t − β*f(t), t), falling back to (t − 1, t) when β = 0.
std::vector<Window> energy_windows(const ChannelProfile& profile, const Reparametrization* repar,
                                   double t, WindowKind kind);

/// Ω_{a,b}.
class TruncatedDomain {
 public:
  TruncatedDomain(ChannelProfile profile, double a, double b);

  const ChannelProfile& profile() const { return profile_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double length() const { return b_ - a_; }
  /// Cross-section Σ(x1) = (f1(x1), f2(x1)).
  std::pair<double, double> section(double x1) const;
  bool contains(double x1, double x2) const;

 private:
  ChannelProfile profile_;
  double a_;
  double b_;
};

}  // namespace navslip
