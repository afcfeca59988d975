#pragma once

namespace navslip {

/// Which slip law the shear profile balances: WeakFormConsistent satisfies
/// ½U'(1) + αU(1) = 0 (weak boundary term 2α∮u·φ), PaperFormula satisfies
/// U'(1) + αU(1) = 0.
enum class ShearConvention { WeakFormConsistent, PaperFormula };

const char* to_string(ShearConvention c);

/// U(x2) = Φ(a0 − b0 x2²) on the straight channel (−1, 1).
struct ShearFlow {
  double phi = 0.0;
  double alpha = 0.0;
  ShearConvention convention = ShearConvention::WeakFormConsistent;
  double a0 = 0.5;
  double b0 = 0.0;
  double pressure_slope = 0.0;  // ∂1 P = U''

  double value(double x2) const { return phi * (a0 - b0 * x2 * x2); }
  double derivative(double x2) const { return -2.0 * phi * b0 * x2; }
  /// Coefficient θ of θ∮v·φ in a(v, φ) = 2∫D(v):D(φ) + θ∮v·φ under which
  /// this profile is the exact straight-channel solution.
  double boundary_coefficient() const;
};

ShearFlow make_shear(double phi, double alpha, ShearConvention convention);

struct ShearResidual {
  double r_bc = 0.0;    // ½U'(1) + (θ/2)U(1)
  double r_flux = 0.0;  // ∫U − Φ
};

ShearResidual shear_residual(const ShearFlow& flow, double theta);

/// The shear flow of flux Φ on the section c1 < x2 < c2, obtained from the
/// unit profile by x2 = c + h y (h the half width) with slip parameter αh.
class SectionShear {
 public:
  SectionShear(double phi, double alpha, ShearConvention convention, double c1, double c2);

  double value(double x2) const;
  double derivative(double x2) const;
  double pressure_slope() const;
  const ShearFlow& unit() const { return unit_; }

 private:
  ShearFlow unit_;
  double center_;
  double half_;
};

}  // namespace navslip
