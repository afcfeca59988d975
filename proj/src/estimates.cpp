#include "navslip/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "navslip/quadrature.hpp"

namespace navslip {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
  const double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2)));
}

double spread_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = median(v);
  const double s = *std::max_element(v.begin(), v.end());
  if (m > 0.0) return s / m;
  return s > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
}

double interpolate(const std::vector<double>& x, const std::vector<double>& y, double at) {
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), at);
  const auto k = static_cast<std::size_t>(it - x.begin());
  const double w = (at - x[k - 1]) / (x[k] - x[k - 1]);
  return (1.0 - w) * y[k - 1] + w * y[k];
}

double symmetric_half_length(const FlowState& s) {
  const auto& dom = s.mesh().domain();
  if (std::abs(dom.a() + dom.b()) > 1e-12 * std::max(1.0, dom.b()))
    throw Error(ErrorCode::ConfigInvalid, "energy profiles need a symmetric truncation (-T, T)");
  return dom.b();
}

std::vector<std::size_t> interior_indices(const std::vector<double>& t, double T, const VerifierConfig& cfg) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] >= cfg.fit_lo * T - 1e-12 && t[k] <= cfg.fit_hi * T + 1e-12) out.push_back(k);
  return out;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "Pass";
    case Verdict::Fail: return "Fail";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

const char* to_string(BoundForm f) { return f == BoundForm::Linear ? "Linear" : "WeightIntegral"; }

const char* to_string(WidthCondition c) {
  switch (c) {
    case WidthCondition::DivergentWeight: return "DivergentWeight";
    case WidthCondition::ConvergentWeight: return "ConvergentWeight";
    case WidthCondition::Neither: return "Neither";
  }
  return "?";
}

void VerifierConfig::validate() const {
  if (!(0.0 <= fit_lo && fit_lo < fit_hi && fit_hi <= 1.0))
    throw Error(ErrorCode::ConfigInvalid, "verifier fit window must satisfy 0 <= fit_lo < fit_hi <= 1");
  for (double v : {fit_residual, fit_stability, far_field_drop, far_field_floor, small_flux})
    if (!(v > 0.0)) throw Error(ErrorCode::ConfigInvalid, "verifier thresholds must be > 0");
  for (double v : {lower_bound_spread, slab_spread, decay_spread, plateau_ratio, far_field_noise_factor})
    if (!(v >= 1.0)) throw Error(ErrorCode::ConfigInvalid, "verifier spread thresholds must be >= 1");
}

double slab_energy(const FlowState& s, double lo, double hi, Field field) {
  return gradient_energy(s, field, lo, hi) + wall_energy(s, field, lo, hi);
}

std::vector<double> uniform_t_grid(double T, int n) {
  if (!(T > 0.0) || n < 1) throw Error(ErrorCode::ConfigInvalid, "t grid needs T > 0 and n >= 1");
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) t[static_cast<std::size_t>(k - 1)] = T * k / n;
  return t;
}

EnergyProfile energy_profile(const FlowState& s, const std::vector<double>& t_grid) {
  EnergyProfile p;
  p.T = symmetric_half_length(s);
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > 0.0 && t_grid[k] <= p.T * (1.0 + 1e-12)))
      throw Error(ErrorCode::ConfigInvalid, "t grid must lie in (0, T]");
    if (k > 0 && !(t_grid[k] > t_grid[k - 1])) throw Error(ErrorCode::ConfigInvalid, "t grid must increase");
  }
  const ChannelProfile& profile = s.mesh().profile();
  double y = 0.0, yv = 0.0, prev = 0.0;
  for (double t : t_grid) {
    // disjoint pieces so that y is additive and nondecreasing by construction
    y += slab_energy(s, -t, -prev) + slab_energy(s, prev, t);
    yv += slab_energy(s, -t, -prev, Field::Correction) + slab_energy(s, prev, t, Field::Correction);
    prev = t;
    p.t.push_back(t);
    p.y.push_back(y);
    p.y_v.push_back(yv);
    double unit = 0.0;
    for (const Window& w : energy_windows(profile, nullptr, t, WindowKind::Unit)) unit += slab_energy(s, w.lo, w.hi);
    p.unit.push_back(unit);
    const Window w = energy_windows(profile, nullptr, t, WindowKind::BetaStar).front();
    p.beta_star.push_back(slab_energy(s, w.lo, w.hi));
  }
  return p;
}

GrowthFit fit_growth(const EnergyProfile& p, BoundForm form, const ChannelProfile& profile,
                     const VerifierConfig& cfg) {
  cfg.validate();
  const auto idx = interior_indices(p.t, p.T, cfg);
  if (idx.size() < 4)
    throw Error(ErrorCode::WindowTooShort, "growth fit needs >= 4 grid points in the interior region, got " +
                                               std::to_string(idx.size()));
  GrowthFit fit;
  fit.form = form;
  fit.points = static_cast<int>(idx.size());
  Eigen::MatrixXd A(static_cast<Eigen::Index>(idx.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double t = p.t[idx[r]];
    const double basis = form == BoundForm::Linear ? t : weight_integral(profile, -t, t, -3.0);
    A(static_cast<Eigen::Index>(r), 0) = 1.0;
    A(static_cast<Eigen::Index>(r), 1) = basis;
    b[static_cast<Eigen::Index>(r)] = p.y[idx[r]];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  fit.offset = c[0];
  fit.constant = c[1];
  const Eigen::VectorXd model = A * c;
  fit.scale = model.cwiseAbs().maxCoeff();
  fit.residual = fit.scale > 0.0 ? (model - b).cwiseAbs().maxCoeff() / fit.scale : 0.0;
  fit.verdict = fit.scale > 0.0 && fit.residual <= cfg.fit_residual ? Verdict::Pass : Verdict::Fail;
  return fit;
}

StabilityCheck fit_stability(const std::vector<GrowthFit>& fits, const VerifierConfig& cfg) {
  if (fits.size() < 2) throw Error(ErrorCode::ConfigInvalid, "stability needs at least two fits");
  StabilityCheck out;
  for (std::size_t k = 1; k < fits.size(); ++k) {
    const double ref = std::abs(fits[k - 1].constant);
    const double change = ref > 0.0 ? std::abs(fits[k].constant - fits[k - 1].constant) / ref
                                    : std::numeric_limits<double>::infinity();
    out.max_change = std::max(out.max_change, change);
  }
  out.verdict = out.max_change <= cfg.fit_stability ? Verdict::Pass : Verdict::Fail;
  return out;
}

PlateauCheck plateau_check(const EnergyProfile& p, const VerifierConfig& cfg) {
  if (p.t.size() < 2) throw Error(ErrorCode::WindowTooShort, "plateau check needs a t grid");
  PlateauCheck out;
  const double mid = interpolate(p.t, p.y, 0.5 * p.T);
  const double late = interpolate(p.t, p.y, cfg.fit_hi * p.T);
  out.ratio = mid > 0.0 ? late / mid : 1.0;
  out.verdict = out.ratio < cfg.plateau_ratio ? Verdict::Pass : Verdict::Fail;
  return out;
}

LowerBoundCheck lower_bound_check(const FlowState& s, const EnergyProfile& p, const VerifierConfig& cfg) {
  const ChannelProfile& profile = s.mesh().profile();
  LowerBoundCheck out;
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 4000; ++k) d = std::min(d, profile.width(-p.T + 2.0 * p.T * k / 4000.0).v);
  d = std::min(d, profile.d());
  out.bound = 2.0 * std::max(1.0, 1.0 / d);
  const double phi2 = s.phi() * s.phi();
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    const double w = weight_integral(profile, -p.t[k], p.t[k], -3.0);
    const double r = p.y[k] > 0.0 ? phi2 * w / p.y[k] : 0.0;
    out.t.push_back(p.t[k]);
    out.ratio.push_back(r);
    out.max_ratio = std::max(out.max_ratio, r);
  }
  out.spread = spread_of(out.ratio);
  const bool bounded = out.max_ratio <= out.bound * (1.0 + 1e-8);
  out.verdict = bounded && out.spread <= cfg.lower_bound_spread ? Verdict::Pass : Verdict::Fail;
  return out;
}

SlabTable uniform_local_check(const FlowState& s, const VerifierConfig& cfg) {
  cfg.validate();
  const auto& dom = s.mesh().domain();
  const double c = 0.5 * (dom.a() + dom.b()), half = 0.5 * dom.length();
  const double lo = cfg.include_end_slabs ? dom.a() : c - cfg.fit_hi * half;
  const double hi = cfg.include_end_slabs ? dom.b() : c + cfg.fit_hi * half;
  SlabTable out;
  for (double k = std::ceil(lo + 1.0 - 1e-12); k <= hi + 1e-12; k += 1.0) {
    out.lo.push_back(k - 1.0);
    out.energy.push_back(slab_energy(s, k - 1.0, k));
  }
  out.note = cfg.include_end_slabs ? "end slabs included" : "end slabs excluded";
  if (out.energy.empty()) {
    out.verdict = Verdict::Inconclusive;
    out.note += "; no unit slab fits the interior region";
    return out;
  }
  out.sup = *std::max_element(out.energy.begin(), out.energy.end());
  out.median = median(out.energy);
  out.spread = spread_of(out.energy);
  out.verdict = out.spread <= cfg.slab_spread ? Verdict::Pass : Verdict::Fail;
  return out;
}

FarFieldTable far_field_check(const FlowState& s, const ShearFlow& far_field, double k_start,
                              const VerifierConfig& cfg) {
  cfg.validate();
  const Mesh& mesh = s.mesh();
  const auto& dom = mesh.domain();
  const ChannelProfile& profile = mesh.profile();
  FarFieldTable out;
  if (!(k_start >= dom.a() && k_start + 2.0 <= dom.b()))
    throw Error(ErrorCode::ConfigInvalid, "far_field k_start must leave at least two slabs in the domain");
  const auto [c1, c2] = dom.section(k_start);
  for (int k = 0; k <= 200; ++k) {
    const double x = k_start + (dom.b() - k_start) * k / 200.0;
    if (std::abs(profile.lower(x).d) > 1e-10 || std::abs(profile.upper(x).d) > 1e-10 ||
        std::abs(profile.lower(x).v - c1) > 1e-10 || std::abs(profile.upper(x).v - c2) > 1e-10) {
      out.verdict = Verdict::Inconclusive;
      out.note = "channel is not straight beyond k_start";
      return out;
    }
  }
  const SectionShear U(s.phi(), far_field.alpha, far_field.convention, c1, c2);
  double sum = 0.0;
  for (double k = k_start; k + 1.0 <= dom.b() + 1e-12; k += 1.0) {
    double dev = 0.0, ref = 0.0;
    for_each_qpoint(mesh, s.quad(), k, k + 1.0, [&](const XiNode& xn, const QPoint& q) {
      const VelocityAt va = velocity_at(mesh, q, s.x);
      const CarrierSample g = s.carrier.evaluate(carrier_column(xn), q.x2);
      Eigen::Vector2d e = va.v + g.g;
      Eigen::Matrix2d G = va.grad + g.grad;
      const double Uv = U.value(q.x2), Ud = U.derivative(q.x2);
      e[0] -= Uv;
      G(0, 1) -= Ud;
      dev += q.weight * (e.squaredNorm() + G.squaredNorm());
      ref += q.weight * (Uv * Uv + Ud * Ud);
    });
    sum += dev;
    out.lo.push_back(k);
    out.deviation.push_back(dev);
    out.cumulative.push_back(sum);
    out.shear_norm.push_back(ref);
  }
  const double first = out.deviation.front();
  const double noise = cfg.far_field_noise_factor * *std::min_element(out.deviation.begin(), out.deviation.end());
  for (std::size_t k = 0; k < out.deviation.size(); ++k)
    if (out.deviation[k] <= std::max({cfg.far_field_drop * first, noise, cfg.far_field_floor * out.shear_norm[k]})) {
      out.settled_slab = static_cast<int>(k);
      break;
    }
  const double limit = k_start + 0.75 * (dom.b() - k_start);
  const bool settled = out.settled_slab >= 0 && out.lo[static_cast<std::size_t>(out.settled_slab)] + 1.0 <= limit + 1e-12;
  if (s.phi() > cfg.small_flux) {
    out.verdict = Verdict::Inconclusive;
    out.note = "flux above the small-flux regime of the far-field claim";
  } else {
    out.verdict = settled ? Verdict::Pass : Verdict::Fail;
  }
  return out;
}

DecayTable decay_rate_check(const FlowState& s, const std::vector<double>& t_grid, const VerifierConfig& cfg) {
  cfg.validate();
  const auto& dom = s.mesh().domain();
  const ChannelProfile& profile = s.mesh().profile();
  const double c = 0.5 * (dom.a() + dom.b()), half = 0.5 * dom.length();
  DecayTable out;
  for (double t : t_grid) {
    if (t < c + cfg.fit_lo * half || t > c + cfg.fit_hi * half) continue;
    Window w;
    try {
      w = energy_windows(profile, nullptr, t, WindowKind::BetaStar).front();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateWindow) throw;
      ++out.skipped;
      continue;
    }
    if (w.lo < dom.a()) {
      ++out.skipped;
      continue;
    }
    const double f = profile.width(t).v;
    out.t.push_back(t);
    out.constant.push_back(f * f * slab_energy(s, w.lo, w.hi));
  }
  if (out.skipped > 0) out.note = std::to_string(out.skipped) + " grid points skipped (degenerate or outside window)";
  if (out.constant.empty()) {
    out.verdict = Verdict::Inconclusive;
    return out;
  }
  out.spread = spread_of(out.constant);
  out.verdict = out.spread <= cfg.decay_spread ? Verdict::Pass : Verdict::Fail;
  return out;
}

namespace {

double fitted_exponent(const std::vector<double>& t, const std::vector<double>& y) {
  // log-log slope over the last half of the grid
  const std::size_t n = t.size(), k0 = n / 2;
  if (!(y[k0] > 0.0 && y[n - 1] > 0.0)) return -std::numeric_limits<double>::infinity();
  return std::log(y[n - 1] / y[k0]) / std::log(t[n - 1] / t[k0]);
}

SideCondition side_condition(const ChannelProfile& profile, double sign, double t0, double t_max) {
  std::vector<double> t;
  for (double x = t0; x <= t_max * (1.0 + 1e-12); x *= 2.0) t.push_back(x);
  if (t.size() < 6) throw Error(ErrorCode::ConfigInvalid, "condition_check needs t_max >= 32 t0");
  const auto f = [&](double x) { return profile.width(sign * x); };
  SideCondition c;
  const double tm = t.back();
  c.gamma = tm * sign * f(tm).d / f(tm).v;

  std::vector<double> w3;
  for (double x : t) w3.push_back(std::pow(f(x).v, -3.0));
  c.weight_exponent = fitted_exponent(t, w3);
  c.weight_diverges = c.weight_exponent >= -1.0 - 0.02;

  // sup_{τ ≥ t} f'(τ) on a log grid extending one doubling past t_max
  std::vector<double> samples;
  for (double x = t0; x <= 2.0 * tm; x *= std::pow(2.0, 1.0 / 16.0)) samples.push_back(x);
  std::vector<double> tail_sup(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    double s = 0.0;
    for (double x : samples)
      if (x >= t[k]) s = std::max(s, sign * f(x).d);
    tail_sup[k] = s;
  }
  c.slope_exponent = fitted_exponent(t, tail_sup);
  c.slope_vanishes = tail_sup.back() == 0.0 || c.slope_exponent < -0.02;

  if (!c.weight_diverges) {
    // ∫_t^∞ f^{-3}: quadrature to 2 t_max plus the power-law tail
    const double p = c.weight_exponent;
    const double far = 2.0 * tm;
    const double tail = far * std::pow(f(far).v, -3.0) / (-p - 1.0);
    std::vector<double> ratio;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double x = t[k];
      const double w = (sign > 0 ? weight_integral(profile, x, far, -3.0) : weight_integral(profile, -far, -x, -3.0)) + tail;
      ratio.push_back(w > 0.0 ? tail_sup[k] / std::sqrt(w) : 0.0);
    }
    c.ratio_exponent = fitted_exponent(t, ratio);
    c.ratio_vanishes = ratio.back() == 0.0 || c.ratio_exponent < -0.02;
  }
  if (c.weight_diverges && c.slope_vanishes) c.condition = WidthCondition::DivergentWeight;
  else if (!c.weight_diverges && c.ratio_vanishes) c.condition = WidthCondition::ConvergentWeight;
  return c;
}

}  // namespace

ConditionReport condition_check(const ChannelProfile& profile, double t0, double t_max) {
  if (!(t0 > 0.0 && t_max > t0)) throw Error(ErrorCode::ConfigInvalid, "condition_check needs 0 < t0 < t_max");
  ConditionReport r;
  r.plus = side_condition(profile, 1.0, t0, t_max);
  r.minus = side_condition(profile, -1.0, t0, t_max);
  if (r.plus.condition == WidthCondition::Neither || r.minus.condition == WidthCondition::Neither)
    r.condition = WidthCondition::Neither;
  else if (r.plus.condition == WidthCondition::DivergentWeight && r.minus.condition == WidthCondition::DivergentWeight)
    r.condition = WidthCondition::DivergentWeight;
  else
    r.condition = WidthCondition::ConvergentWeight;
  const double gamma = std::max(r.plus.gamma, r.minus.gamma);
  r.power_law_consistent = (gamma < 0.6) == (r.condition != WidthCondition::Neither);
  return r;
}

Psi Psi::power_sum(double c1) {
  if (!(c1 > 0.0)) throw Error(ErrorCode::ConfigInvalid, "Psi coefficient must be > 0");
  Psi p;
  p.fn_ = [c1](double s) { return c1 * (s + std::pow(s, 1.5)); };
  p.power_bound_ = std::make_pair(2.0 * c1, 1.5);  // s ≤ s^{3/2} for s ≥ 1
  return p;
}

Psi Psi::power(double c0, double m) {
  if (!(c0 > 0.0 && m > 1.0)) throw Error(ErrorCode::ConfigInvalid, "Psi power needs c0 > 0 and m > 1");
  Psi p;
  p.fn_ = [c0, m](double s) { return c0 * std::pow(s, m); };
  p.power_bound_ = std::make_pair(c0, m);
  return p;
}

Psi Psi::table(std::vector<double> s, std::vector<double> v) {
  if (s.size() != v.size() || s.size() < 2 || s.front() != 0.0 || v.front() != 0.0)
    throw Error(ErrorCode::ConfigInvalid, "Psi table needs matching samples starting at (0, 0)");
  for (std::size_t k = 1; k < s.size(); ++k)
    if (!(s[k] > s[k - 1] && v[k] > v[k - 1])) throw Error(ErrorCode::ConfigInvalid, "Psi table must increase");
  Psi p;
  p.fn_ = [s = std::move(s), v = std::move(v)](double x) {
    if (x >= s.back()) return v.back() + (v.back() - v[v.size() - 2]) / (s.back() - s[s.size() - 2]) * (x - s.back());
    return interpolate(s, v, x);
  };
  return p;
}

double Psi::operator()(double, double s) const { return s >= 0.0 ? fn_(s) : -fn_(-s); }

HypothesisViolation::HypothesisViolation(std::string which, int index, double t)
    : Error(ErrorCode::HypothesisViolated,
            which + " fails at grid index " + std::to_string(index) + " (t = " + std::to_string(t) + ")"),
      which_(std::move(which)),
      index_(index),
      t_(t) {}

std::vector<double> grid_derivative(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  if (n != y.size() || n < 3) throw Error(ErrorCode::ConfigInvalid, "grid_derivative needs >= 3 matching samples");
  std::vector<double> d(n);
  // three-point Lagrange derivative on a nonuniform stencil
  const auto stencil = [&](std::size_t a, std::size_t at) {
    const double x0 = t[a], x1 = t[a + 1], x2 = t[a + 2], x = t[at];
    return y[a] * (2 * x - x1 - x2) / ((x0 - x1) * (x0 - x2)) + y[a + 1] * (2 * x - x0 - x2) / ((x1 - x0) * (x1 - x2)) +
           y[a + 2] * (2 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
  };
  d[0] = stencil(0, 0);
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = stencil(k - 1, k);
  d[n - 1] = stencil(n - 3, n - 1);
  return d;
}

double comparison_constant(double C, double m) {
  if (!(C > 0.0 && m > 1.0)) throw Error(ErrorCode::ConfigInvalid, "comparison solution needs C > 0 and m > 1");
  const double p = m / (m - 1.0);
  return std::pow(1.0 / (C * std::pow(p, m)), 1.0 / (m - 1.0));
}

ComparisonVerdict compare_diff_ineq(const ComparisonProblem& pr, ComparisonMode mode) {
  const std::size_t n = pr.t.size();
  if (n < 3 || pr.z.size() != n) throw Error(ErrorCode::ConfigInvalid, "comparison problem needs >= 3 samples of z");
  if (mode != ComparisonMode::Part3 && pr.phi.size() != n)
    throw Error(ErrorCode::ConfigInvalid, "comparison problem needs phi on the grid");
  if (!(pr.delta1 > 0.0 && pr.delta1 < 1.0)) throw Error(ErrorCode::ConfigInvalid, "delta1 must lie in (0, 1)");
  ComparisonVerdict out;
  out.mode = mode;
  const auto dz = grid_derivative(pr.t, pr.z);

  if (mode == ComparisonMode::Part3) {
    const auto bound = pr.psi.power_bound();
    if (!bound) throw Error(ErrorCode::ConfigInvalid, "Part3 needs a Psi with a power bound c0 s^m");
    for (std::size_t k = 0; k < n; ++k)
      if (pr.z[k] > pr.psi(pr.t[k], dz[k]) + pr.slack)
        throw HypothesisViolation("z <= Psi(z')", static_cast<int>(k), pr.t[k]);
    const auto [c0, m] = *bound;
    const double p = m / (m - 1.0);
    out.comparison_constant = comparison_constant(c0, m);
    double tail = std::numeric_limits<double>::infinity();
    for (std::size_t k = (3 * n) / 4; k < n; ++k) tail = std::min(tail, pr.z[k] * std::pow(pr.t[k], -p));
    out.tail_ratio = tail;
    out.verdict = tail > 0.0 ? Verdict::Pass : Verdict::Fail;
    return out;
  }

  const auto dphi = grid_derivative(pr.t, pr.phi);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = pr.t[k];
    if (pr.z[k] > pr.psi(t, dz[k]) + (1.0 - pr.delta1) * pr.phi[k] + pr.slack)
      throw HypothesisViolation("z <= Psi(t, z') + (1 - delta1) phi", static_cast<int>(k), t);
    if (pr.phi[k] < pr.psi(t, dphi[k]) / pr.delta1 - pr.slack)
      throw HypothesisViolation("phi >= Psi(t, phi') / delta1", static_cast<int>(k), t);
  }
  if (mode == ComparisonMode::Part1) {
    if (pr.z.back() > pr.phi.back() + pr.slack)
      throw HypothesisViolation("z(T) <= phi(T)", static_cast<int>(n - 1), pr.t.back());
  } else {
    const double end_ratio = pr.phi.back() > 0.0 ? pr.z.back() / pr.phi.back() : 0.0;
    bool growth_ok = end_ratio < 1.0;
    out.tail_ratio = end_ratio;
    out.note = "liminf z/phi < 1 at the end of the grid";
    if (!growth_ok) {
      const auto bound = pr.psi.power_bound();
      if (bound) {
        // Ψ(s)/δ₁ ≤ (c0/δ₁) s^m; compare with z̃ = K t^p
        const auto [c0, m] = *bound;
        out.comparison_constant = comparison_constant(c0 / pr.delta1, m);
        const double p = m / (m - 1.0);
        const auto ratio = [&](std::size_t k) { return pr.z[k] / (out.comparison_constant * std::pow(pr.t[k], p)); };
        bool decreasing = true;
        for (std::size_t k = n / 2 + 1; k < n; ++k) decreasing = decreasing && ratio(k) <= ratio(k - 1) + 1e-15;
        growth_ok = decreasing && ratio(n - 1) <= 0.5 * ratio(n / 2);
        out.tail_ratio = ratio(n - 1);
        out.note = "lim z/z~ = 0 read from a decreasing tail of z/z~";
      }
    }
    if (!growth_ok) {
      out.verdict = Verdict::Inconclusive;
      out.note = "growth condition not met on the grid";
      return out;
    }
  }
  out.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double margin = pr.phi[k] - pr.z[k];
    out.min_margin = std::min(out.min_margin, margin);
    if (margin < -pr.slack && out.first_violation < 0) out.first_violation = static_cast<int>(k);
  }
  out.verdict = out.first_violation < 0 ? Verdict::Pass : Verdict::Fail;
  return out;
}

}  // namespace navslip
