#include "navslip/fem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "navslip/error.hpp"
#include "navslip/quadrature.hpp"

namespace navslip {

WallFrame wall_frame(const ChannelProfile& profile, Facet wall, double x1) {
  WallFrame fr;
  if (wall == Facet::Top) {
    const double d = profile.upper(x1).d;
    const double r = std::sqrt(1.0 + d * d);
    fr.n = Eigen::Vector2d(-d, 1.0) / r;
    fr.t = Eigen::Vector2d(1.0, d) / r;
  } else if (wall == Facet::Bottom) {
    const double d = profile.lower(x1).d;
    const double r = std::sqrt(1.0 + d * d);
    fr.n = Eigen::Vector2d(d, -1.0) / r;
    fr.t = Eigen::Vector2d(1.0, d) / r;
  } else {
    throw Error(ErrorCode::ConfigInvalid, "wall_frame: facet must be Top or Bottom");
  }
  return fr;
}

const char* to_string(Grading g) {
  switch (g) {
    case Grading::Uniform: return "Uniform";
    case Grading::WallRefined: return "WallRefined";
    case Grading::CarrierFitted: return "CarrierFitted";
  }
  return "?";
}

Mesh::Mesh(TruncatedDomain domain, int nx, int ny, Grading grading, double parameter)
    : domain_(std::move(domain)), nx_(nx), ny_(ny), grading_(grading), parameter_(parameter) {
  if (nx < 2 || ny < 2) throw Error(ErrorCode::ConfigInvalid, "mesh needs nx, ny >= 2");
  if (std::isnan(parameter_)) parameter_ = grading == Grading::CarrierFitted ? 0.25 : 2.0;
  hx_ = domain_.length() / nx;
  s_edges_.resize(static_cast<std::size_t>(ny) + 1);
  if (grading == Grading::WallRefined) {
    if (!(parameter_ > 0.0)) throw Error(ErrorCode::ConfigInvalid, "grading clustering must be > 0");
    for (int j = 0; j <= ny; ++j) {
      const double eta = static_cast<double>(j) / ny;
      s_edges_[static_cast<std::size_t>(j)] =
          0.5 * (1.0 + std::tanh(parameter_ * (2.0 * eta - 1.0)) / std::tanh(parameter_));
    }
  } else if (grading == Grading::CarrierFitted) {
    const double eps = parameter_;
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::ConfigInvalid, "carrier-fitted grading needs eps in (0, 1)");
    if (ny < 4) throw Error(ErrorCode::ConfigInvalid, "carrier-fitted grading needs ny >= 4");
    const auto s_of = [eps](double A) {
      const double r = std::exp((A - 1.0) / eps);
      return (1.0 + 0.5 * r) / (1.0 + r);
    };
    const int below = std::max(1, ny / 8);
    const int band = ny - below - 1;
    const double lo = s_of(1.0);
    for (int j = 0; j <= below; ++j) s_edges_[static_cast<std::size_t>(j)] = lo * j / below;
    for (int k = 1; k <= band; ++k)
      s_edges_[static_cast<std::size_t>(below + k)] = s_of(1.0 - static_cast<double>(k) / band);
  } else {
    for (int j = 0; j <= ny; ++j) s_edges_[static_cast<std::size_t>(j)] = static_cast<double>(j) / ny;
  }
  s_edges_.front() = 0.0;
  s_edges_.back() = 1.0;

  const GaussRule& g = gauss_legendre(5);
  min_jacobian_ = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nx; ++i)
    for (int q = 0; q < g.size(); ++q) {
      const double f = domain_.profile().width(x_edge(i) + g.nodes[q] * hx_).v;
      for (int j = 0; j < ny; ++j) min_jacobian_ = std::min(min_jacobian_, hx_ * ds(j) * f);
    }
  if (!(min_jacobian_ > 0.0))
    throw Error(ErrorCode::JacobianNonPositive,
                "smallest cell Jacobian " + std::to_string(min_jacobian_) + " is not positive");
}

double Mesh::node_s(int J) const {
  const int j = J / 2;
  if (J % 2 == 0) return s_edge(j);
  return 0.5 * (s_edge(j) + s_edge(j + 1));
}

Eigen::Vector2d Mesh::node_position(int I, int J) const {
  const double x1 = node_x1(I);
  const double f1 = profile().lower(x1).v;
  const double f = profile().width(x1).v;
  return {x1, f1 + node_s(J) * f};
}

std::array<int, 9> Mesh::cell_nodes(int i, int j) const {
  std::array<int, 9> n{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) n[static_cast<std::size_t>(3 * a + b)] = node(2 * i + a, 2 * j + b);
  return n;
}

double Mesh::frame_discrepancy() const {
  double worst = 0.0;
  for (int i = 0; i < nx_; ++i) {
    for (Facet side : {Facet::Bottom, Facet::Top}) {
      const int J = side == Facet::Top ? nodes_y() - 1 : 0;
      const Eigen::Vector2d p0 = node_position(2 * i, J), p1 = node_position(2 * i + 2, J);
      const Eigen::Vector2d c = (p1 - p0).normalized();
      const Eigen::Vector2d chord_n = side == Facet::Top ? Eigen::Vector2d(-c[1], c[0])
                                                         : Eigen::Vector2d(c[1], -c[0]);
      const WallFrame fr = wall_frame(profile(), side, node_x1(2 * i + 1));
      worst = std::max(worst, (fr.n - chord_n).norm());
    }
  }
  return worst;
}

std::vector<XiNode> xi_nodes(const Mesh& mesh, int i, const QuadratureSpec& spec, double xi_lo,
                             double xi_hi) {
  const GaussRule& g = gauss_legendre(spec.order);
  std::vector<XiNode> out(static_cast<std::size_t>(g.size()));
  const double len = xi_hi - xi_lo;
  for (int q = 0; q < g.size(); ++q) {
    XiNode& n = out[static_cast<std::size_t>(q)];
    n.xi = xi_lo + len * g.nodes[q];
    n.weight = len * g.weights[q];
    n.x1 = mesh.x_edge(i) + n.xi * mesh.hx();
    n.f1 = mesh.profile().lower(n.x1);
    n.f2 = mesh.profile().upper(n.x1);
  }
  return out;
}

std::vector<EtaNode> eta_nodes(const Mesh& mesh, int j, const QuadratureSpec& spec) {
  std::vector<EtaNode> out;
  const auto push = [&](double lo, double hi, int order) {
    const GaussRule& g = gauss_legendre(order);
    for (int q = 0; q < g.size(); ++q) out.push_back({lo + (hi - lo) * g.nodes[q], (hi - lo) * g.weights[q]});
  };
  const double s0 = mesh.s_edge(j), s1 = mesh.s_edge(j + 1);
  if (!spec.has_band) {
    push(0.0, 1.0, spec.order);
    return out;
  }
  // band in s as a function of the mollifier argument A ∈ [0, 1]
  const double eps = spec.band_eps;
  const auto s_of = [eps](double A) {
    const double r = std::exp((A - 1.0) / eps);
    return (1.0 + 0.5 * r) / (1.0 + r);
  };
  const auto A_of = [eps](double s) { return 1.0 + eps * std::log((1.0 - s) / (s - 0.5)); };
  const double band_lo = s_of(1.0), band_hi = s_of(0.0);
  const double lo = std::max(s0, band_lo), hi = std::min(s1, band_hi);
  if (!(lo < hi)) {
    push(0.0, 1.0, spec.order);
    return out;
  }
  const auto eta = [&](double s) { return (s - s0) / (s1 - s0); };
  if (lo > s0) push(0.0, eta(lo), spec.order);
  const double A_top = A_of(hi) < 0.0 ? 0.0 : A_of(hi);  // A decreases with s
  const double A_bot = A_of(lo) > 1.0 ? 1.0 : A_of(lo);
  const int pieces = std::max(1, static_cast<int>(std::ceil((A_bot - A_top) / spec.band_piece)));
  double prev = lo;
  for (int p = 1; p <= pieces; ++p) {
    const double next = p == pieces ? hi : s_of(A_bot - (A_bot - A_top) * p / pieces);
    push(eta(prev), eta(next), spec.band_order);
    prev = next;
  }
  if (hi < s1) push(eta(hi), 1.0, spec.order);
  return out;
}

QPoint make_qpoint(const Mesh& mesh, int i, int j, const XiNode& xn, const EtaNode& en) {
  QPoint q;
  q.cell = mesh.cell(i, j);
  const double hx = mesh.hx();
  const double dsj = mesh.ds(j);
  q.s = mesh.s_edge(j) + en.eta * dsj;
  const double f = xn.f2.v - xn.f1.v;
  const double fd = xn.f2.d - xn.f1.d;
  q.x1 = xn.x1;
  q.x2 = xn.f1.v + q.s * f;
  const double det = hx * dsj * f;
  q.weight = xn.weight * en.weight * det;
  const double shear = (xn.f1.d + q.s * fd) / (dsj * f);  // ∂η/∂x1 = −shear
  const auto La = lagrange2(xn.xi), Lb = lagrange2(en.eta);
  const auto Da = lagrange2_d(xn.xi), Db = lagrange2_d(en.eta);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const auto k = static_cast<std::size_t>(3 * a + b);
      q.N[k] = La[a] * Lb[b];
      const double dxi = Da[a] * Lb[b], deta = La[a] * Db[b];
      q.dN[k] = Eigen::Vector2d(dxi / hx - shear * deta, deta / (dsj * f));
    }
  return q;
}

}  // namespace navslip
