#pragma once

#include <Eigen/Dense>
#include <array>
#include <limits>
#include <memory>
#include <vector>

#include "navslip/geometry.hpp"

namespace navslip {

/// WallRefined: symmetric tanh clustering in s with strength `parameter`
/// (default 2). CarrierFitted: cells inside the carrier band of ε =
/// `parameter` (default 0.25), equispaced in the mollifier argument, with
/// ny/8 cells below the band and one above it.
enum class Grading { Uniform, WallRefined, CarrierFitted };

const char* to_string(Grading g);

enum class Facet { Bottom, Top, Left, Right };

/// Outward unit normal and tangent (pointing towards +x1) of a wall.
struct WallFrame {
  Eigen::Vector2d n;
  Eigen::Vector2d t;
};

/// Analytic frame of the lower (Bottom) or upper (Top) wall at x1.
WallFrame wall_frame(const ChannelProfile& profile, Facet wall, double x1);

/// Structured grid on Ω_{a,b}: the reference rectangle [a, b] × [0, 1] is
/// mapped by x2 = f1(x1) + s f(x1); cells are uniform in x1 and graded in s.
/// Q2 nodes are numbered node(I, J) = I (2ny + 1) + J, I along x1.
class Mesh {
 public:
  Mesh(TruncatedDomain domain, int nx, int ny, Grading grading = Grading::Uniform,
       double parameter = std::numeric_limits<double>::quiet_NaN());

  const TruncatedDomain& domain() const { return domain_; }
  const ChannelProfile& profile() const { return domain_.profile(); }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  Grading grading() const { return grading_; }
  double grading_parameter() const { return parameter_; }
  int num_cells() const { return nx_ * ny_; }
  int cell(int i, int j) const { return i * ny_ + j; }

  double hx() const { return hx_; }
  double x_edge(int i) const { return domain_.a() + i * hx_; }
  double s_edge(int j) const { return s_edges_[static_cast<std::size_t>(j)]; }
  double ds(int j) const { return s_edge(j + 1) - s_edge(j); }

  int nodes_x() const { return 2 * nx_ + 1; }
  int nodes_y() const { return 2 * ny_ + 1; }
  int num_nodes() const { return nodes_x() * nodes_y(); }
  int node(int I, int J) const { return I * nodes_y() + J; }
  double node_x1(int I) const { return domain_.a() + 0.5 * I * hx_; }
  double node_s(int J) const;
  Eigen::Vector2d node_position(int I, int J) const;
  /// Local order k = 3a + b with a the ξ-index and b the η-index in {0, 1, 2}.
  std::array<int, 9> cell_nodes(int i, int j) const;

  /// Smallest Jacobian determinant over a 5 × 5 Gauss sample of every cell.
  double min_jacobian() const { return min_jacobian_; }
  /// max over wall facets of |analytic normal at the facet midpoint − chord normal|.
  double frame_discrepancy() const;

 private:
  TruncatedDomain domain_;
  int nx_;
  int ny_;
  Grading grading_;
  double parameter_;
  double hx_;
  std::vector<double> s_edges_;
  double min_jacobian_ = 0.0;
};

/// Quadratic Lagrange basis on [0, 1] with nodes 0, ½, 1.
inline std::array<double, 3> lagrange2(double x) {
  return {(2 * x - 1) * (x - 1), 4 * x * (1 - x), x * (2 * x - 1)};
}
inline std::array<double, 3> lagrange2_d(double x) { return {4 * x - 3, 4 - 8 * x, 4 * x - 1}; }

/// Quadrature node along x1 with the wall data of its cross-section.
struct XiNode {
  double xi = 0.0;
  double weight = 0.0;  // reference weight (includes the ξ sub-range length)
  double x1 = 0.0;
  Jet<double> f1;
  Jet<double> f2;
};

struct EtaNode {
  double eta = 0.0;
  double weight = 0.0;
};

/// Mapped quadrature point with Q2 basis values and physical gradients.
struct QPoint {
  int cell = 0;
  double x1 = 0.0;
  double x2 = 0.0;
  double s = 0.0;
  double weight = 0.0;  // reference weight × det J
  std::array<double, 9> N{};
  std::array<Eigen::Vector2d, 9> dN{};
};

/// Quadrature layout: Gauss orders and an optional s-band (the carrier
/// support) that is integrated with composite rules equispaced in the
/// mollifier argument.
struct QuadratureSpec {
  int order = 5;
  int band_order = 6;
  bool has_band = false;
  double band_eps = 0.25;  // carrier ε defining the band
  double band_piece = 0.05;  // mollifier-argument length per composite piece

  static QuadratureSpec for_carrier(double eps) {
    QuadratureSpec q;
    q.has_band = true;
    q.band_eps = eps;
    return q;
  }
};

std::vector<XiNode> xi_nodes(const Mesh& mesh, int i, const QuadratureSpec& spec, double xi_lo = 0.0,
                             double xi_hi = 1.0);
std::vector<EtaNode> eta_nodes(const Mesh& mesh, int j, const QuadratureSpec& spec);
QPoint make_qpoint(const Mesh& mesh, int i, int j, const XiNode& xn, const EtaNode& en);

}  // namespace navslip
