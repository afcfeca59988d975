#include "navslip/shear.hpp"

#include "navslip/error.hpp"

namespace navslip {

const char* to_string(ShearConvention c) {
  return c == ShearConvention::PaperFormula ? "PaperFormula" : "WeakFormConsistent";
}

double ShearFlow::boundary_coefficient() const {
  return convention == ShearConvention::PaperFormula ? alpha : 2.0 * alpha;
}

ShearFlow make_shear(double phi, double alpha, ShearConvention convention) {
  if (!(alpha >= 0.0) || !(phi >= 0.0))
    throw Error(ErrorCode::ConfigInvalid, "make_shear requires alpha >= 0 and phi >= 0");
  ShearFlow s;
  s.phi = phi;
  s.alpha = alpha;
  s.convention = convention;
  if (convention == ShearConvention::PaperFormula) {
    s.a0 = 3.0 * (2.0 + alpha) / (4.0 * (3.0 + alpha));
    s.b0 = 3.0 * alpha / (4.0 * (3.0 + alpha));
  } else {
    s.a0 = 3.0 * (1.0 + alpha) / (2.0 * (3.0 + 2.0 * alpha));
    s.b0 = 3.0 * alpha / (2.0 * (3.0 + 2.0 * alpha));
  }
  s.pressure_slope = -2.0 * s.b0 * phi;
  return s;
}

ShearResidual shear_residual(const ShearFlow& flow, double theta) {
  ShearResidual r;
  r.r_bc = 0.5 * flow.derivative(1.0) + 0.5 * theta * flow.value(1.0);
  r.r_flux = flow.phi * (2.0 * flow.a0 - 2.0 * flow.b0 / 3.0) - flow.phi;
  return r;
}

SectionShear::SectionShear(double phi, double alpha, ShearConvention convention, double c1,
                           double c2)
    : center_(0.5 * (c1 + c2)), half_(0.5 * (c2 - c1)) {
  if (!(c2 > c1)) throw Error(ErrorCode::NonPositiveWidth, "shear section needs c1 < c2");
  unit_ = make_shear(phi, alpha * half_, convention);
}

double SectionShear::value(double x2) const { return unit_.value((x2 - center_) / half_) / half_; }

double SectionShear::derivative(double x2) const {
  return unit_.derivative((x2 - center_) / half_) / (half_ * half_);
}

double SectionShear::pressure_slope() const { return unit_.pressure_slope / (half_ * half_ * half_); }

}  // namespace navslip
