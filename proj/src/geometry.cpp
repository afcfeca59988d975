#include "navslip/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "navslip/error.hpp"
#include "navslip/quadrature.hpp"

namespace navslip {

namespace {

// Golden-section maximization of g on [lo, hi].
double refine_max(const std::function<double(double)>& g, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 100 && b - a > 1e-14 * (1.0 + std::abs(a)); ++it) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - kInvPhi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + kInvPhi * (b - a);
      gd = g(d);
    }
  }
  return std::max({gc, gd, g(lo), g(hi)});
}

// Grid maximum of g refined around the three largest samples.
double sup_on(const std::function<double(double)>& g, double lo, double hi, int samples) {
  const int n = std::max(samples, 3);
  std::vector<double> xs(static_cast<std::size_t>(n)), vs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    vs[static_cast<std::size_t>(i)] = g(xs[static_cast<std::size_t>(i)]);
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  const int top = std::min(3, n);
  std::partial_sort(order.begin(), order.begin() + top, order.end(), [&](int l, int r) {
    return vs[static_cast<std::size_t>(l)] > vs[static_cast<std::size_t>(r)];
  });
  double best = vs[static_cast<std::size_t>(order[0])];
  for (int j = 0; j < top; ++j) {
    const int i = order[static_cast<std::size_t>(j)];
    const double l = xs[static_cast<std::size_t>(std::max(i - 1, 0))];
    const double r = xs[static_cast<std::size_t>(std::min(i + 1, n - 1))];
    best = std::max(best, refine_max(g, l, r));
  }
  return best;
}

double slope_of(const ChannelProfile& p, double x) {
  return std::max(std::abs(p.lower(x).d), std::abs(p.upper(x).d));
}
double curvature_width_of(const ChannelProfile& p, double x) {
  const auto lo = p.lower(x), up = p.upper(x);
  return std::max(std::abs(lo.dd), std::abs(up.dd)) * (up.v - lo.v);
}

bool exceeds(double measured, double declared, double rel) {
  return measured > declared * (1.0 + rel) + (declared == 0.0 ? rel : 0.0);
}

// ∫_0^{side·∞} w(t) dt for w ~ c|t|^{-q}, q > 1: [0,1] directly, the tail
// through t = u^{-m} with m = 2/(q − 1), which makes the integrand ~ u.
double tail_integral(const std::function<double(double)>& w, int side, double q) {
  QuadratureOptions opts;
  opts.rel_tol = 1e-12;
  opts.abs_tol = 1e-16;
  opts.max_intervals = 50000;
  const double m = std::min(2.0 / (q - 1.0), 200.0);
  const double head = adaptive_integrate([&](double t) { return w(side * t); }, 0.0, 1.0, opts);
  const double tail = adaptive_integrate(
      [&](double u) {
        const double t = std::pow(u, -m);
        if (!std::isfinite(t)) return 0.0;
        const double v = w(side * t) * m * t / u;
        return std::isfinite(v) ? v : 0.0;
      },
      0.0, 1.0, opts);
  return head + tail;
}

}  // namespace

ChannelProfile::ChannelProfile(Expression f1, Expression f2, Bounds declared)
    : f1_(std::move(f1)), f2_(std::move(f2)), bounds_(declared) {
  if (!(bounds_.d > 0.0))
    throw Error(ErrorCode::NonPositiveWidth, "declared width bound d must be positive");
  if (bounds_.beta < 0.0 || bounds_.gamma_pp < 0.0)
    throw Error(ErrorCode::DerivativeBoundViolated, "declared bounds must be non-negative");
}

ChannelProfile ChannelProfile::straight(double lower, double upper) {
  return ChannelProfile(Expression(lower), Expression(upper), {upper - lower, 0.0, 0.0});
}

ChannelProfile ChannelProfile::with_measured_bounds(Expression f1, Expression f2, double lo,
                                                    double hi, int samples) {
  ChannelProfile probe(f1, f2, {1.0, 0.0, 0.0});
  const double inf_w = -sup_on([&](double x) { return -probe.width(x).v; }, lo, hi, samples);
  if (!(inf_w > 0.0))
    throw Error(ErrorCode::NonPositiveWidth, "width f2 - f1 is not positive on the sample range");
  Bounds b;
  b.d = inf_w;
  b.beta = sup_on([&](double x) { return slope_of(probe, x); }, lo, hi, samples);
  b.gamma_pp = sup_on([&](double x) { return curvature_width_of(probe, x); }, lo, hi, samples);
  // measured maxima are lower bounds of the true suprema
  b.beta *= 1.0 + 1e-9;
  b.gamma_pp *= 1.0 + 1e-9;
  if (b.beta < 1e-14) b.beta = 0.0;
  if (b.gamma_pp < 1e-14) b.gamma_pp = 0.0;
  return ChannelProfile(std::move(f1), std::move(f2), b);
}

double ChannelProfile::beta_star() const {
  if (bounds_.beta == 0.0) throw Error(ErrorCode::BetaZero, "beta* = 1/(4 beta) undefined for beta = 0");
  return 1.0 / (4.0 * bounds_.beta);
}

bool ChannelProfile::contains(double x1, double x2) const {
  return f1_.value(x1) < x2 && x2 < f2_.value(x1);
}

ValidationReport validate_profile(const ChannelProfile& profile, const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorCode::ConfigInvalid, "validation grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw Error(ErrorCode::ConfigInvalid, "validation grid is not strictly increasing");
  ValidationReport r;
  r.inf_width = std::numeric_limits<double>::infinity();
  for (double x : grid) {
    const double w = profile.width(x).v;
    if (!(w > 0.0))
      throw Error(ErrorCode::NonPositiveWidth, "f(x1) = " + std::to_string(w) +
                                                   " at x1 = " + std::to_string(x));
    r.inf_width = std::min(r.inf_width, w);
    r.sup_slope = std::max(r.sup_slope, slope_of(profile, x));
    r.sup_curvature_width = std::max(r.sup_curvature_width, curvature_width_of(profile, x));
  }
  if (exceeds(r.sup_slope, profile.beta(), 1e-12))
    throw Error(ErrorCode::DerivativeBoundViolated,
                "measured sup|fi'| = " + std::to_string(r.sup_slope) +
                    " exceeds declared beta = " + std::to_string(profile.beta()));
  r.width_ok = r.inf_width >= profile.d() * (1.0 - 1e-12);
  r.slope_ok = true;
  r.curvature_ok = !exceeds(r.sup_curvature_width, profile.gamma_pp(), 1e-12);
  return r;
}

double max_wall_curvature(const ChannelProfile& profile, double lo, double hi, int samples) {
  const auto kappa = [&](double x) {
    const auto a = profile.lower(x), b = profile.upper(x);
    return std::max(std::abs(a.dd) / std::pow(1.0 + a.d * a.d, 1.5),
                    std::abs(b.dd) / std::pow(1.0 + b.d * b.d, 1.5));
  };
  return sup_on(kappa, lo, hi, samples);
}

bool window_sandwich_holds(const ChannelProfile& profile, double t, int samples) {
  if (profile.beta() == 0.0) return true;
  const double ft = profile.width(t).v;
  const double r = profile.beta_star() * ft;
  for (int i = 0; i <= samples; ++i) {
    const double xi = t - r + 2.0 * r * i / samples;
    const double fx = profile.width(xi).v;
    if (fx < 0.5 * ft * (1 - 1e-14) || fx > 1.5 * ft * (1 + 1e-14)) return false;
  }
  return true;
}

double weight_integral(const ChannelProfile& profile, double a, double b, double power) {
  if (a > b) throw Error(ErrorCode::ConfigInvalid, "weight_integral requires a <= b");
  QuadratureOptions opts;
  opts.rel_tol = 1e-10;
  opts.abs_tol = 0.0;
  // split long ranges so the error estimate sees local structure
  const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / 8.0)));
  double sum = 0.0;
  const auto integrand = [&](double x) { return std::pow(profile.width(x).v, power); };
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + (b - a) * p / pieces;
    const double hi = p + 1 == pieces ? b : a + (b - a) * (p + 1) / pieces;
    sum += adaptive_integrate(integrand, lo, hi, opts);
  }
  return sum;
}

std::string to_string(HorizonCase c) {
  switch (c) {
    case HorizonCase::BothInfinite: return "BothInfinite";
    case HorizonCase::BothFinite: return "BothFinite";
    case HorizonCase::LeftFinite: return "LeftFinite";
    case HorizonCase::RightFinite: return "RightFinite";
    case HorizonCase::FiniteHorizonUnknown: return "FiniteHorizonUnknown";
  }
  return "?";
}

HorizonCase classify_horizon(const ChannelProfile& profile) {
  const Expression w = profile.width_expr();
  // ∫ f^{-5/3} over a half line diverges iff f ~ c|t|^p with (5/3)p ≤ 1
  int verdict[2];
  for (int i = 0; i < 2; ++i) {
    const Asymptote a = asymptote(w, i == 0 ? -1 : +1);
    if (!a.positive_power()) return HorizonCase::FiniteHorizonUnknown;
    verdict[i] = (5.0 / 3.0) * a.power <= 1.0 ? 1 : 0;  // 1 = infinite range
  }
  if (verdict[0] && verdict[1]) return HorizonCase::BothInfinite;
  if (!verdict[0] && !verdict[1]) return HorizonCase::BothFinite;
  return verdict[0] ? HorizonCase::RightFinite : HorizonCase::LeftFinite;
}

double Reparametrization::k_density(double t) const {
  return std::pow(profile_.width(t).v, -5.0 / 3.0);
}

std::size_t Reparametrization::locate_t(double t) const {
  const auto it = std::upper_bound(t_table_.begin(), t_table_.end(), t);
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - t_table_.begin() - 1));
  return std::min(i, t_table_.size() - 2);
}

double Reparametrization::k(double t) const {
  if (std::abs(t) > t_max_ * (1 + 1e-14))
    throw Error(ErrorCode::HorizonTooShort,
                "k(" + std::to_string(t) + ") outside tabulated horizon " + std::to_string(t_max_));
  const std::size_t i = locate_t(t);
  const double t0 = t_table_[i];
  if (t == t0) return k_table_[i];
  return k_table_[i] + composite_gauss([this](double x) { return k_density(x); }, t0, t, 1, 20);
}

double Reparametrization::h(double s) const {
  if (s < k_table_.front() - 1e-14 || s > k_table_.back() + 1e-14)
    throw Error(ErrorCode::HorizonTooShort,
                "h(" + std::to_string(s) + ") outside the tabulated range of k");
  const auto it = std::upper_bound(k_table_.begin(), k_table_.end(), s);
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - k_table_.begin() - 1));
  i = std::min(i, k_table_.size() - 2);
  double lo = t_table_[i], hi = t_table_[i + 1];
  const double klo = k_table_[i], khi = k_table_[i + 1];
  double t = lo + (hi - lo) * (s - klo) / (khi - klo);
  for (int it2 = 0; it2 < 60; ++it2) {
    const double r = k(t) - s;
    if (r > 0) hi = t; else lo = t;
    double next = t - r / k_density(t);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * (1.0 + std::abs(t))) return next;
    t = next;
  }
  return t;
}

double Reparametrization::hL(double t) const {
  const double x = h(-t);
  return x + profile_.beta_star() * profile_.width(x).v;
}

double Reparametrization::hR(double t) const {
  const double x = h(t);
  return x - profile_.beta_star() * profile_.width(x).v;
}

namespace {

// sup{t ∈ (0, hi] : pred(t)} for a predicate true near 0 and eventually false.
std::optional<double> bracket_sup(const std::function<double(double)>& g, double hi) {
  // g > 0 ⇔ predicate holds; g decreasing
  constexpr int kSamples = 2000;
  double prev = 0.0;
  for (int i = 1; i <= kSamples; ++i) {
    const double t = hi * i / kSamples;
    if (g(t) < 0.0) {
      double a = prev, b = t;
      while (b - a > 1e-10) {
        const double m = 0.5 * (a + b);
        if (g(m) >= 0.0) a = m; else b = m;
      }
      return 0.5 * (a + b);
    }
    prev = t;
  }
  return std::nullopt;
}

}  // namespace

Reparametrization build_reparametrization(const ChannelProfile& profile, double t_max) {
  if (!(t_max > 0.0)) throw Error(ErrorCode::ConfigInvalid, "t_max must be positive");
  Reparametrization r(profile);
  r.t_max_ = t_max;
  const int half = std::max(1000, static_cast<int>(std::ceil(t_max / 0.05)));
  const int n = 2 * half + 1;
  r.t_table_.resize(static_cast<std::size_t>(n));
  r.k_table_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) r.t_table_[static_cast<std::size_t>(i)] = t_max * (i - half) / half;
  r.t_table_[static_cast<std::size_t>(half)] = 0.0;
  QuadratureOptions opts;
  opts.rel_tol = 1e-13;
  opts.abs_tol = 1e-18;
  const auto dens = [&r](double x) { return r.k_density(x); };
  r.k_table_[static_cast<std::size_t>(half)] = 0.0;
  for (int i = half + 1; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    r.k_table_[u] = r.k_table_[u - 1] + adaptive_integrate(dens, r.t_table_[u - 1], r.t_table_[u], opts);
  }
  for (int i = half - 1; i >= 0; --i) {
    const auto u = static_cast<std::size_t>(i);
    r.k_table_[u] = r.k_table_[u + 1] - adaptive_integrate(dens, r.t_table_[u], r.t_table_[u + 1], opts);
  }
  for (std::size_t i = 1; i < r.k_table_.size(); ++i)
    if (!(r.k_table_[i] > r.k_table_[i - 1]) || !std::isfinite(r.k_table_[i]))
      throw Error(ErrorCode::NonMonotoneK,
                  "k not strictly increasing at t = " + std::to_string(r.t_table_[i]));

  r.case_ = classify_horizon(profile);
  const bool left_finite = r.case_ == HorizonCase::BothFinite || r.case_ == HorizonCase::LeftFinite;
  const bool right_finite = r.case_ == HorizonCase::BothFinite || r.case_ == HorizonCase::RightFinite;
  const Expression width = profile.width_expr();
  if (left_finite) r.L_ = tail_integral(dens, -1, (5.0 / 3.0) * asymptote(width, -1).power);
  if (right_finite) r.R_ = tail_integral(dens, +1, (5.0 / 3.0) * asymptote(width, +1).power);

  if (profile.beta() > 0.0) {
    const double both = std::min(r.k_max(), -r.k_min());
    if (r.case_ == HorizonCase::BothInfinite || r.case_ == HorizonCase::FiniteHorizonUnknown) {
      r.t_star_ = bracket_sup([&r](double t) { return r.hL(t) - r.hR(t); }, both);
      if (!r.t_star_ && r.case_ == HorizonCase::BothInfinite)
        throw Error(ErrorCode::HorizonTooShort,
                    "t* not bracketed within t_max = " + std::to_string(t_max));
    }
    if (r.case_ == HorizonCase::RightFinite) {
      r.t_hat_ = bracket_sup([&r](double t) { return r.hL(t); }, -r.k_min());
      if (!r.t_hat_)
        throw Error(ErrorCode::HorizonTooShort,
                    "t_hat not bracketed within t_max = " + std::to_string(t_max));
    } else if (r.case_ != HorizonCase::BothFinite) {
      r.t_hat_ = bracket_sup([&r](double t) { return -r.hR(t); }, r.k_max());
      if (!r.t_hat_ && r.case_ == HorizonCase::LeftFinite)
        throw Error(ErrorCode::HorizonTooShort,
                    "t_hat not bracketed within t_max = " + std::to_string(t_max));
    }
  }
  return r;
}

std::vector<Window> energy_windows(const ChannelProfile& profile, const Reparametrization* repar,
                                   double t, WindowKind kind) {
  std::vector<Window> out;
  switch (kind) {
    case WindowKind::Unit:
      out = {{-t, -t + 1.0}, {t - 1.0, t}};
      break;
    case WindowKind::Hat:
      if (profile.beta() == 0.0)
        throw Error(ErrorCode::BetaZero, "Hat windows need beta > 0; use Unit windows");
      if (repar == nullptr)
        throw Error(ErrorCode::HorizonTooShort, "Hat windows need a reparametrization");
      out = {{repar->h(-t), repar->hL(t)}, {repar->hR(t), repar->h(t)}};
      break;
    case WindowKind::BetaStar:
      if (profile.beta() == 0.0)
        out = {{t - 1.0, t}};
      else
        out = {{t - profile.beta_star() * profile.width(t).v, t}};
      break;
  }
  for (const auto& w : out)
    if (!(w.length() > 0.0))
      throw Error(ErrorCode::DegenerateWindow, "window (" + std::to_string(w.lo) + ", " +
                                                   std::to_string(w.hi) + ") has no interior");
  return out;
}

TruncatedDomain::TruncatedDomain(ChannelProfile profile, double a, double b)
    : profile_(std::move(profile)), a_(a), b_(b) {
  if (!(b > a))
    throw Error(ErrorCode::DegenerateWindow,
                "truncation requires a < b (got " + std::to_string(a) + ", " + std::to_string(b) + ")");
}

std::pair<double, double> TruncatedDomain::section(double x1) const {
  return {profile_.lower(x1).v, profile_.upper(x1).v};
}

bool TruncatedDomain::contains(double x1, double x2) const {
  return a_ < x1 && x1 < b_ && profile_.contains(x1, x2);
}

}  // namespace navslip
