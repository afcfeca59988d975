#include "navslip/carrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "navslip/error.hpp"
#include "navslip/quadrature.hpp"

namespace navslip {

namespace {

// e^{−1/t} underflows to exactly 0 (with its derivatives) below this
constexpr double kFlat = 1.0 / 800.0;

QuadratureOptions outer_opts() {
  QuadratureOptions o;
  o.rel_tol = 1e-9;
  o.abs_tol = 1e-300;
  return o;
}

}  // namespace

Mollifier::Mollifier() {
  constexpr int n = 20001;
  for (int i = 1; i < n - 1; ++i) {
    const auto m = (*this)(static_cast<double>(i) / (n - 1));
    sup_d1_ = std::max(sup_d1_, std::abs(m.d));
    sup_d2_ = std::max(sup_d2_, std::abs(m.dd));
  }
}

Jet<double> Mollifier::operator()(double t) const {
  if (t <= kFlat) return Jet<double>(1.0);
  if (t >= 1.0 - kFlat) return Jet<double>(0.0);
  const auto x = Jet<double>::variable(t);
  const auto a = exp(-1.0 / x);
  const auto b = exp(-1.0 / (1.0 - x));
  return 1.0 - a / (a + b);
}

FluxCarrier::FluxCarrier(ChannelProfile profile, double phi, double eps)
    : profile_(std::move(profile)), phi_(phi), eps_(eps) {
  if (!(phi >= 0.0)) throw Error(ErrorCode::ConfigInvalid, "carrier flux phi must be >= 0");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::ConfigInvalid, "carrier eps must lie in (0, 1)");
}

CarrierColumn FluxCarrier::column(double x1) const {
  CarrierColumn c;
  c.x1 = x1;
  c.f1 = profile_.lower(x1);
  c.f2 = profile_.upper(x1);
  c.fbar = 0.5 * (c.f1 + c.f2);
  c.width = c.f2.v - c.f1.v;
  return c;
}

CarrierSample FluxCarrier::evaluate(const CarrierColumn& col, double x2) const {
  CarrierSample s;
  const double q = x2 - col.fbar.v;
  if (q <= 1e-14 * col.width) {
    s.arg = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  const double p = col.f2.v - x2;
  if (p <= 0.0) {
    s.G = phi_;
    s.arg = -std::numeric_limits<double>::infinity();
    return s;
  }
  const double A = 1.0 + eps_ * std::log(p / q);
  s.arg = A;
  if (A <= 0.0) {
    s.G = phi_;
    return s;
  }
  if (A >= 1.0) return s;
  const auto mu = mu_(A);
  s.G = phi_ * mu.v;
  if (mu.d == 0.0 && mu.dd == 0.0) return s;
  s.active = true;
  const double f2d = col.f2.d, f2dd = col.f2.dd, fbd = col.fbar.d, fbdd = col.fbar.dd;
  const double ip = 1.0 / p, iq = 1.0 / q;
  const double A1 = eps_ * (f2d * ip + fbd * iq);
  const double A2 = eps_ * (-ip - iq);
  const double A12 = eps_ * (f2d * ip * ip - fbd * iq * iq);
  const double A22 = eps_ * (-ip * ip + iq * iq);
  const double A11 = eps_ * (f2dd * ip - f2d * f2d * ip * ip + fbdd * iq + fbd * fbd * iq * iq);
  s.g = {phi_ * mu.d * A2, -phi_ * mu.d * A1};
  s.grad(0, 0) = phi_ * (mu.dd * A1 * A2 + mu.d * A12);
  s.grad(0, 1) = phi_ * (mu.dd * A2 * A2 + mu.d * A22);
  s.grad(1, 0) = -phi_ * (mu.dd * A1 * A1 + mu.d * A11);
  s.grad(1, 1) = -phi_ * (mu.dd * A2 * A1 + mu.d * A12);
  return s;
}

std::pair<double, double> FluxCarrier::support_band() const {
  return {band_height(1.0), band_height(0.0)};
}

double FluxCarrier::band_height(double arg) const {
  const double r = std::exp((arg - 1.0) / eps_);
  return (1.0 + 0.5 * r) / (1.0 + r);
}

namespace {

CarrierSample checked(const FluxCarrier& c, double x1, double x2) {
  const auto col = c.column(x1);
  if (!(col.f1.v < x2 && x2 < col.f2.v))
    throw Error(ErrorCode::OutsideDomain, "point (" + std::to_string(x1) + ", " +
                                              std::to_string(x2) + ") is not inside the channel");
  return c.evaluate(col, x2);
}

}  // namespace

double eval_stream(const FluxCarrier& carrier, double x1, double x2) {
  return checked(carrier, x1, x2).G;
}
Eigen::Vector2d eval_velocity(const FluxCarrier& carrier, double x1, double x2) {
  return checked(carrier, x1, x2).g;
}
Eigen::Matrix2d eval_gradient(const FluxCarrier& carrier, double x1, double x2) {
  return checked(carrier, x1, x2).grad;
}

double band_section_integral(const FluxCarrier& carrier, const CarrierColumn& col,
                             const std::function<double(const CarrierSample&, double)>& integrand,
                             int order) {
  // x2 = f1 + s(A) f with s = (1 + r/2)/(1 + r), r = e^{(A−1)/ε}, |ds/dA| = r/(2ε(1+r)²)
  const GaussRule& rule = gauss_legendre(order);
  const double eps = carrier.eps();
  double sum = 0.0;
  for (int i = 0; i < rule.size(); ++i) {
    const double A = rule.nodes[i];
    const double r = std::exp((A - 1.0) / eps);
    const double s = (1.0 + 0.5 * r) / (1.0 + r);
    const double jac = r / (2.0 * eps * (1.0 + r) * (1.0 + r)) * col.width;
    const double x2 = col.f1.v + s * col.width;
    sum += rule.weights[i] * jac * integrand(carrier.evaluate(col, x2), x2);
  }
  return sum;
}

CarrierReport carrier_bounds_report(const FluxCarrier& carrier, const TruncatedDomain& domain,
                                    int sample_density, std::uint64_t seed) {
  if (sample_density < 1) throw Error(ErrorCode::ConfigInvalid, "sample_density must be >= 1");
  CarrierReport rep;
  const double a = domain.a(), b = domain.b();
  const double phi = carrier.phi();
  const double eps = carrier.eps();
  const double floor_ratio = std::exp(-1.0 / eps);
  constexpr int kHeights = 200;
  const int n1 = std::max(2, static_cast<int>(std::ceil(sample_density * (b - a))));

  const auto visit = [&](const CarrierColumn& col, double x2) {
    const CarrierSample s = carrier.evaluate(col, x2);
    ++rep.samples;
    const double f = col.width;
    if (phi > 0.0) {
      rep.sup_g_times_width = std::max(rep.sup_g_times_width, f * s.g.norm() / phi);
      rep.sup_grad_times_width2 = std::max(rep.sup_grad_times_width2, f * f * s.grad.norm() / phi);
    }
    rep.max_divergence = std::max(rep.max_divergence, std::abs(s.grad.trace()));
    if (s.g.isZero(0.0) && s.grad.isZero(0.0)) return;
    ++rep.support_samples;
    const double p = col.f2.v - x2, q = x2 - col.fbar.v;
    const double ratio = p / q;
    if (!(q > 0.0) || ratio < floor_ratio * (1 - 1e-12) || ratio > 1.0 + 1e-12)
      throw Error(ErrorCode::SupportViolation,
                  "g != 0 at (" + std::to_string(col.x1) + ", " + std::to_string(x2) +
                      ") with (f2 - x2)/(x2 - fbar) = " + std::to_string(ratio));
    if (q < 0.25 * f * (1 - 1e-12) || q > 0.5 * f * (1 + 1e-12)) ++rep.violations_midline;
    if (p < floor_ratio * 0.25 * f * (1 - 1e-12)) ++rep.violations_wall;
  };

  for (int i = 0; i < n1; ++i) {
    const double x1 = a + (b - a) * (i + 0.5) / n1;
    const auto col = carrier.column(x1);
    for (int j = 0; j < kHeights; ++j) visit(col, col.f1.v + col.width * (j + 0.5) / kHeights);
    const double flux = band_section_integral(
        carrier, col, [](const CarrierSample& s, double) { return s.g[0]; });
    rep.max_flux_error = std::max(rep.max_flux_error, std::abs(flux - phi));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::int64_t n_random = static_cast<std::int64_t>(n1) * kHeights;
  for (std::int64_t k = 0; k < n_random; ++k) {
    const double x1 = a + (b - a) * unit(rng);
    const double s = unit(rng);
    const auto col = carrier.column(x1);
    if (s <= 0.0) continue;
    visit(col, col.f1.v + s * col.width);
  }
  rep.support_ok = rep.violations_midline == 0 && rep.violations_wall == 0;

  rep.energy = adaptive_integrate(
      [&](double x1) {
        return band_section_integral(carrier, carrier.column(x1), [](const CarrierSample& s, double) {
          const double g2 = s.g.squaredNorm();
          return s.grad.squaredNorm() + g2 * g2;
        });
      },
      a, b, outer_opts());
  rep.weight = weight_integral(domain.profile(), a, b, -3.0);
  const double scale = (phi * phi + phi * phi * phi * phi) * rep.weight;
  rep.energy_ratio = scale > 0.0 ? rep.energy / scale : 0.0;
  return rep;
}

double hardy_weighted_check(const FluxCarrier& carrier, const TruncatedDomain& domain,
                            const WeightField& w) {
  const double a = domain.a(), b = domain.b();
  const double num = adaptive_integrate(
      [&](double x1) {
        return band_section_integral(carrier, carrier.column(x1), [&](const CarrierSample& s, double x2) {
          const double wv = w(x1, x2).first;
          return s.g[0] * s.g[0] * wv * wv;
        });
      },
      a, b, outer_opts());
  const GaussRule& rule = gauss_legendre(32);
  const double den = adaptive_integrate(
      [&](double x1) {
        const auto col = carrier.column(x1);
        double sum = 0.0;
        for (int pieces = 0; pieces < 8; ++pieces)
          for (int i = 0; i < rule.size(); ++i) {
            const double s = (pieces + rule.nodes[i]) / 8.0;
            const double dw = w(x1, col.f1.v + s * col.width).second;
            sum += rule.weights[i] / 8.0 * dw * dw;
          }
        return sum * col.width;
      },
      a, b, outer_opts());
  const double scale = carrier.phi() * carrier.phi() * carrier.eps() * carrier.eps() * den;
  if (!(den > 0.0) || !(scale > 0.0))
    throw Error(ErrorCode::ZeroDenominator, "weighted Hardy ratio: w is constant in x2 or phi = 0");
  return num / scale;
}

}  // namespace navslip
