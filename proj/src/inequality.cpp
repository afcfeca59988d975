#include "navslip/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "navslip/error.hpp"
#include "navslip/fem/assembly.hpp"
#include "navslip/geometry.hpp"

namespace navslip {

namespace {

constexpr int kWallSamples = 2001;

struct WallStats {
  double f_min = 0.0;
  double f_max = 0.0;
  double slope_max = 0.0;   // max(|f1'|, |f2'|)
  double slope2_max = 0.0;  // |f2'|
  double grad_sq_max = 0.0; // f1'² + f2'²
};

WallStats wall_stats(const ChannelProfile& p, double a, double b) {
  WallStats s;
  s.f_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kWallSamples; ++k) {
    const double x = a + (b - a) * k / (kWallSamples - 1);
    const auto lo = p.lower(x), hi = p.upper(x);
    const double f = hi.v - lo.v;
    s.f_min = std::min(s.f_min, f);
    s.f_max = std::max(s.f_max, f);
    s.slope_max = std::max({s.slope_max, std::abs(lo.d), std::abs(hi.d)});
    s.slope2_max = std::max(s.slope2_max, std::abs(hi.d));
    s.grad_sq_max = std::max(s.grad_sq_max, lo.d * lo.d + hi.d * hi.d);
  }
  return s;
}

/// Quadrature point with the global nodes of its cell.
struct NodalQP {
  std::array<int, 9> nodes{};
  QPoint q;
  double f = 0.0;
};

std::vector<NodalQP> collect_qpoints(const Mesh& mesh, const QuadratureSpec& spec) {
  std::vector<NodalQP> out;
  const TruncatedDomain& dom = mesh.domain();
  for_each_qpoint(mesh, spec, dom.a(), dom.b(), [&](const XiNode& xn, const QPoint& q) {
    NodalQP n;
    n.nodes = mesh.cell_nodes(q.cell / mesh.ny(), q.cell % mesh.ny());
    n.q = q;
    n.f = xn.f2.v - xn.f1.v;
    out.push_back(n);
  });
  return out;
}

/// Random field Σ c_kl cos(kπξ) cos(lπs) per component, c ~ N(0, 1)/(1 + k + l).
Eigen::VectorXd random_field(const Mesh& mesh, std::mt19937_64& rng, int modes = 4) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd c[2] = {Eigen::MatrixXd(modes, modes), Eigen::MatrixXd(modes, modes)};
  for (auto& m : c)
    for (int k = 0; k < modes; ++k)
      for (int l = 0; l < modes; ++l) m(k, l) = n01(rng) / (1.0 + k + l);
  const double a = mesh.domain().a(), len = mesh.domain().length();
  Eigen::VectorXd v(2 * mesh.num_nodes());
  for (int I = 0; I < mesh.nodes_x(); ++I) {
    const double xi = (mesh.node_x1(I) - a) / len;
    for (int J = 0; J < mesh.nodes_y(); ++J) {
      const double s = mesh.node_s(J);
      double v0 = 0.0, v1 = 0.0;
      for (int k = 0; k < modes; ++k)
        for (int l = 0; l < modes; ++l) {
          const double phi = std::cos(k * std::numbers::pi * xi) * std::cos(l * std::numbers::pi * s);
          v0 += c[0](k, l) * phi;
          v1 += c[1](k, l) * phi;
        }
      const int node = mesh.node(I, J);
      v[2 * node] = v0;
      v[2 * node + 1] = v1;
    }
  }
  return v;
}

std::mt19937_64 stream(std::uint64_t seed, int k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k)};
  return std::mt19937_64(seq);
}

/// Simpson weights of ∫ L_J ds along one node column.
std::vector<double> column_weights(const Mesh& mesh) {
  std::vector<double> w(static_cast<std::size_t>(mesh.nodes_y()), 0.0);
  for (int j = 0; j < mesh.ny(); ++j) {
    const double ds = mesh.ds(j);
    w[static_cast<std::size_t>(2 * j)] += ds / 6.0;
    w[static_cast<std::size_t>(2 * j + 1)] += 4.0 * ds / 6.0;
    w[static_cast<std::size_t>(2 * j + 2)] += ds / 6.0;
  }
  return w;
}

/// Orthonormal basis of ker C.
Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& C) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(C.transpose());
  const Eigen::MatrixXd Q = qr.householderQ();
  return Q.rightCols(C.cols() - C.rows());
}

/// Zero column flux plus n·v = 0 at wall nodes, on full nodal velocities.
Eigen::MatrixXd poincare_constraints(const Mesh& mesh) {
  const int ny = mesh.nodes_y();
  const int nwall = 2 * mesh.nodes_x();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(mesh.nodes_x() + nwall, 2 * mesh.num_nodes());
  const auto w = column_weights(mesh);
  int r = 0;
  for (int I = 0; I < mesh.nodes_x(); ++I, ++r)
    for (int J = 0; J < ny; ++J) C(r, 2 * mesh.node(I, J)) = w[static_cast<std::size_t>(J)];
  for (int I = 0; I < mesh.nodes_x(); ++I)
    for (const Facet side : {Facet::Bottom, Facet::Top}) {
      const int node = mesh.node(I, side == Facet::Top ? ny - 1 : 0);
      const WallFrame fr = wall_frame(mesh.profile(), side, mesh.node_x1(I));
      C(r, 2 * node) = fr.n[0];
      C(r, 2 * node + 1) = fr.n[1];
      ++r;
    }
  return C;
}

struct PoincareMatrices {
  Eigen::MatrixXd mass_f;  // scalar ∫ N N / f²
  Eigen::MatrixXd dy;      // scalar ∫ ∂2N ∂2N
  Eigen::MatrixXd mass;    // vector ∫ v·φ
  Eigen::MatrixXd gram;    // vector ∫ ∇v:∇φ
};

PoincareMatrices poincare_matrices(const Mesh& mesh, const std::vector<NodalQP>& qps) {
  const int nn = mesh.num_nodes();
  PoincareMatrices m;
  m.mass_f = Eigen::MatrixXd::Zero(nn, nn);
  m.dy = Eigen::MatrixXd::Zero(nn, nn);
  m.mass = Eigen::MatrixXd::Zero(2 * nn, 2 * nn);
  m.gram = Eigen::MatrixXd::Zero(2 * nn, 2 * nn);
  for (const NodalQP& p : qps)
    for (int k = 0; k < 9; ++k)
      for (int l = 0; l < 9; ++l) {
        const auto ks = static_cast<std::size_t>(k), ls = static_cast<std::size_t>(l);
        const int a = p.nodes[ks], b = p.nodes[ls];
        const double nn_w = p.q.weight * p.q.N[ks] * p.q.N[ls];
        const double gg = p.q.weight * p.q.dN[ks].dot(p.q.dN[ls]);
        m.mass_f(a, b) += nn_w / (p.f * p.f);
        m.dy(a, b) += p.q.weight * p.q.dN[ks][1] * p.q.dN[ls][1];
        for (int c = 0; c < 2; ++c) {
          m.mass(2 * a + c, 2 * b + c) += nn_w;
          m.gram(2 * a + c, 2 * b + c) += gg;
        }
      }
  return m;
}

double max_generalized(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()), 0.5 * (B + B.transpose()),
                                                               Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "generalized eigensolve failed");
  return es.eigenvalues().maxCoeff();
}

double quartic(const std::vector<NodalQP>& qps, const Eigen::VectorXd& v, Eigen::VectorXd* grad) {
  double F = 0.0;
  if (grad) grad->setZero(v.size());
  for (const NodalQP& p : qps) {
    Eigen::Vector2d u = Eigen::Vector2d::Zero();
    for (int k = 0; k < 9; ++k) {
      const int n = p.nodes[static_cast<std::size_t>(k)];
      u += p.q.N[static_cast<std::size_t>(k)] * Eigen::Vector2d(v[2 * n], v[2 * n + 1]);
    }
    const double u2 = u.squaredNorm();
    F += p.q.weight * u2 * u2;
    if (!grad) continue;
    for (int k = 0; k < 9; ++k) {
      const int n = p.nodes[static_cast<std::size_t>(k)];
      const double c = 4.0 * p.q.weight * u2 * p.q.N[static_cast<std::size_t>(k)];
      (*grad)[2 * n] += c * u[0];
      (*grad)[2 * n + 1] += c * u[1];
    }
  }
  return F;
}

Eigen::VectorXd pad_full(const DofMap& dofs, const Eigen::VectorXd& v) {
  if (v.size() == dofs.num_full()) return v;
  if (v.size() != dofs.num_velocity()) throw Error(ErrorCode::ConfigInvalid, "velocity vector has wrong size");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dofs.num_full());
  x.head(dofs.num_velocity()) = v;
  return x;
}

Eigen::VectorXd reduced_velocity(const DofMap& dofs, const Eigen::VectorXd& full_velocity) {
  return dofs.reduce(pad_full(dofs, full_velocity)).head(dofs.num_reduced_velocity());
}

Eigen::VectorXd full_velocity(const DofMap& dofs, const Eigen::VectorXd& red_velocity) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(dofs.num_reduced());
  y.head(dofs.num_reduced_velocity()) = red_velocity;
  return dofs.expand(y).head(dofs.num_velocity());
}

SpMat velocity_block(const SpMat& M, int nv) { return M.topLeftCorner(nv, nv); }

}  // namespace

double poincare_reference() { return 1.0 / std::numbers::pi; }

double m1_shape(const ChannelProfile& profile, double a, double b) {
  const WallStats s = wall_stats(profile, a, b);
  return s.f_max * (1.0 + s.slope2_max);
}

double m4_shape(const ChannelProfile& profile, double a, double b, double M1) {
  const WallStats s = wall_stats(profile, a, b);
  const double len = b - a;
  const double area = weight_integral(profile, a, b, 1.0);
  return (1.0 + s.grad_sq_max) * std::sqrt(M1 / len + 1.0) * std::pow(area + len * s.f_min, 0.25) *
         (1.0 + M1 / s.f_min);
}

bool poincare_admissible(const Mesh& mesh, const Eigen::VectorXd& v_full, double tol) {
  if (v_full.size() < 2 * mesh.num_nodes()) return false;
  const Eigen::VectorXd v = v_full.head(2 * mesh.num_nodes());
  const double scale = v.lpNorm<Eigen::Infinity>();
  if (scale == 0.0) return false;
  return (poincare_constraints(mesh) * v).lpNorm<Eigen::Infinity>() <= tol * scale;
}

PoincareMeasure poincare_measure(const Mesh& mesh, int trials, std::uint64_t seed) {
  const auto qps = collect_qpoints(mesh, QuadratureSpec{});
  const PoincareMatrices m = poincare_matrices(mesh, qps);
  const Eigen::MatrixXd C = poincare_constraints(mesh);
  PoincareMeasure out;
  out.M0 = poincare_reference();

  // v1 alone: v2 can always be completed to satisfy the wall rows
  Eigen::MatrixXd Cs = Eigen::MatrixXd::Zero(mesh.nodes_x(), mesh.num_nodes());
  for (int r = 0; r < mesh.nodes_x(); ++r)
    for (int n = 0; n < mesh.num_nodes(); ++n) Cs(r, n) = C(r, 2 * n);
  const Eigen::MatrixXd Zs = kernel_basis(Cs);
  out.section_ratio = std::sqrt(max_generalized(Zs.transpose() * m.mass_f * Zs, Zs.transpose() * m.dy * Zs));

  const Eigen::MatrixXd Z = kernel_basis(C);
  const Eigen::MatrixXd A = Z.transpose() * m.mass * Z;
  const Eigen::MatrixXd G = Z.transpose() * m.gram * Z;
  out.full_ratio = std::sqrt(max_generalized(A, G));
  out.unknowns = static_cast<int>(Z.cols());

  for (int k = 0; k < trials; ++k) {
    auto rng = stream(seed, k);
    const Eigen::VectorXd y = Z.transpose() * random_field(mesh, rng);
    const double g = y.dot(G * y);
    if (g > 0.0) out.trial_ratio = std::max(out.trial_ratio, std::sqrt(y.dot(A * y) / g));
  }
  out.trials = trials;
  return out;
}

EmbeddingMeasure embedding_measure(const Mesh& mesh, int trials, std::uint64_t seed, int ascent_steps) {
  if (trials < 1 || ascent_steps < 0) throw Error(ErrorCode::ConfigInvalid, "embedding_measure: bad trial counts");
  const auto qps = collect_qpoints(mesh, QuadratureSpec{});
  const PoincareMatrices m = poincare_matrices(mesh, qps);
  const Eigen::MatrixXd Z = kernel_basis(poincare_constraints(mesh));
  const Eigen::MatrixXd G = Z.transpose() * m.gram * Z;
  const Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "embedding_measure: gram not definite");

  EmbeddingMeasure out;
  out.ascent_steps = ascent_steps;
  Eigen::VectorXd grad;
  for (int k = 0; k < trials; ++k) {
    auto rng = stream(seed, k);
    Eigen::VectorXd y = Z.transpose() * random_field(mesh, rng);
    y /= std::sqrt(y.dot(G * y));
    double F = quartic(qps, Z * y, nullptr);
    out.initial.push_back(std::pow(F, 0.25));
    for (int it = 0; it < ascent_steps; ++it) {
      quartic(qps, Z * y, &grad);
      Eigen::VectorXd next = llt.solve(Z.transpose() * grad);
      next /= std::sqrt(next.dot(G * next));
      const double Fn = quartic(qps, Z * next, nullptr);
      if (!(Fn > F)) break;
      y = next;
      F = Fn;
    }
    out.refined.push_back(std::pow(F, 0.25));
    out.ratio = std::max(out.ratio, out.refined.back());
  }
  return out;
}

Calibration calibrate_constants(int nx, int ny, std::uint64_t seed) {
  const ChannelProfile p = ChannelProfile::straight(-1, 1);
  const Mesh mesh(TruncatedDomain(p, 0.0, 1.0), nx, ny);
  Calibration c;
  c.nx = nx;
  c.ny = ny;
  c.C1 = poincare_measure(mesh, 0, seed).full_ratio / m1_shape(p, 0.0, 1.0);
  c.C4 = embedding_measure(mesh, 8, seed).ratio / m4_shape(p, 0.0, 1.0, c.C1 * m1_shape(p, 0.0, 1.0));
  return c;
}

ConstantCheck check_constants(const std::string& name, const Mesh& mesh, const Calibration& cal, int trials,
                              std::uint64_t seed) {
  const double a = mesh.domain().a(), b = mesh.domain().b();
  const PoincareMeasure pm = poincare_measure(mesh, 0, seed);
  ConstantCheck c;
  c.profile = name;
  c.a = a;
  c.b = b;
  c.M0 = pm.M0;
  c.section_ratio = pm.section_ratio;
  c.M1_measured = pm.full_ratio;
  c.M1_formula = cal.C1 * m1_shape(mesh.profile(), a, b);
  c.M4_measured = embedding_measure(mesh, trials, seed).ratio;
  c.M4_formula = cal.C4 * m4_shape(mesh.profile(), a, b, c.M1_formula);
  constexpr double slack = 1e-8;
  c.pass = c.section_ratio <= c.M0 + slack && c.M1_measured <= c.M1_formula + slack &&
           c.M4_measured <= c.M4_formula + slack;
  return c;
}

double korn_constant(double alpha, double curvature) {
  if (alpha < 0.0 || curvature < 0.0) throw Error(ErrorCode::ConfigInvalid, "korn_constant: negative input");
  if (alpha == 0.0) return 0.0;
  return alpha / (alpha + curvature);
}

DivergenceFreeProjector::DivergenceFreeProjector(const DofMap& dofs) : dofs_(dofs) {
  G_ = assemble_velocity_gram(dofs);
  const SpMat S = saddle_matrix(G_, assemble_divergence(dofs));
  lu_.compute(S);
  if (lu_.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "divergence-free projector: factorization failed");
}

Eigen::VectorXd DivergenceFreeProjector::solve_load(const Eigen::VectorXd& velocity_load) const {
  const int nv = dofs_.num_reduced_velocity();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dofs_.num_reduced());
  rhs.head(nv) = velocity_load;
  const Eigen::VectorXd x = lu_.solve(rhs);
  return x.head(nv);
}

Eigen::VectorXd DivergenceFreeProjector::project(const Eigen::VectorXd& reduced) const {
  const int nv = dofs_.num_reduced_velocity();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(dofs_.num_reduced());
  y.head(nv) = reduced.head(nv);
  return solve_load((G_ * y).head(nv));
}

bool korn_admissible(const DofMap& dofs, const Eigen::VectorXd& v_full, double tol) {
  const Eigen::VectorXd x = pad_full(dofs, v_full);
  const int nv = dofs.num_velocity();
  const double scale = x.head(nv).lpNorm<Eigen::Infinity>();
  if (scale == 0.0) return false;
  const Eigen::VectorXd back = full_velocity(dofs, reduced_velocity(dofs, x));
  if ((back - x.head(nv)).lpNorm<Eigen::Infinity>() > tol * scale) return false;
  const SpMat B = assemble_divergence(dofs, Space::Full);
  const SpMat G = assemble_velocity_gram(dofs, Space::Full);
  const double h1 = std::sqrt(x.dot(G * x));
  return (B * x).lpNorm<Eigen::Infinity>() <= tol * h1;
}

double korn_identity_residual(const DofMap& dofs, const Eigen::VectorXd& v_full) {
  const Mesh& mesh = dofs.mesh();
  const Eigen::VectorXd x = pad_full(dofs, v_full);
  const double grad2 = x.dot(assemble_velocity_gram(dofs, Space::Full) * x);
  const double def2 = x.dot(assemble_viscous_slip(dofs, 0.0, Space::Full) * x);  // 2‖D‖²
  QuadratureSpec wall;
  wall.order = kDivergenceOrder;
  double boundary = 0.0;
  for (int i = 0; i < mesh.nx(); ++i)
    for (const Facet side : {Facet::Bottom, Facet::Top}) {
      const int j = side == Facet::Top ? mesh.ny() - 1 : 0;
      const EtaNode en{side == Facet::Top ? 1.0 : 0.0, 1.0};
      for (const XiNode& xn : xi_nodes(mesh, i, wall)) {
        const QPoint q = make_qpoint(mesh, i, j, xn, en);
        const VelocityAt u = velocity_at(mesh, q, x);
        const double d = side == Facet::Top ? xn.f2.d : xn.f1.d;
        const double ds = xn.weight * mesh.hx() * std::sqrt(1.0 + d * d);
        const Eigen::Vector2d n = wall_frame(mesh.profile(), side, xn.x1).n;
        const Eigen::Matrix2d D = 0.5 * (u.grad + u.grad.transpose());
        boundary += ds * (2.0 * n.dot(D * u.v) - (u.grad * n).dot(u.v));
      }
    }
  if (!(grad2 > 0.0)) throw Error(ErrorCode::ZeroDenominator, "korn_identity_residual: zero field");
  return std::abs(grad2 - def2 + boundary) / grad2;
}

KornReport korn_check(const DofMap& dofs, double alpha, int trials, std::uint64_t seed, int descent_steps,
                      double slack) {
  if (trials < 1 || descent_steps < 0) throw Error(ErrorCode::ConfigInvalid, "korn_check: bad trial counts");
  const Mesh& mesh = dofs.mesh();
  KornReport rep;
  rep.alpha = alpha;
  rep.curvature = max_wall_curvature(mesh.profile(), mesh.domain().a(), mesh.domain().b());
  rep.c = korn_constant(alpha, rep.curvature);
  rep.trials = trials;
  rep.min_margin = std::numeric_limits<double>::infinity();

  const int nv = dofs.num_reduced_velocity();
  const DivergenceFreeProjector proj(dofs);
  const SpMat G = velocity_block(proj.gram(), nv);
  const SpMat Ad = velocity_block(assemble_viscous_slip(dofs, 0.0), nv);
  const SpMat A = alpha == 0.0 ? Ad : velocity_block(assemble_viscous_slip(dofs, alpha), nv);
  const auto rayleigh = [&](const Eigen::VectorXd& v) { return v.dot(A * v) / v.dot(G * v); };

  for (int k = 0; k < trials; ++k) {
    auto rng = stream(seed, k);
    Eigen::VectorXd v = proj.project(reduced_velocity(dofs, random_field(mesh, rng)));
    double rho = rayleigh(v);
    for (int it = 0; it < descent_steps; ++it) {
      const Eigen::VectorXd p = proj.solve_load(A * v - rho * (G * v));
      // Rayleigh–Ritz on span{v, p}
      Eigen::Matrix<double, 2, Eigen::Dynamic> Vt(2, nv);
      Vt.row(0) = v.transpose();
      Vt.row(1) = p.transpose();
      const Eigen::Matrix2d a2 = Vt * A * Vt.transpose();
      const Eigen::Matrix2d g2 = Vt * G * Vt.transpose();
      if (!(g2.determinant() > 1e-14 * g2(0, 0) * g2(1, 1))) break;
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (a2 + a2.transpose()), g2);
      const Eigen::Vector2d c = es.eigenvectors().col(0);
      const Eigen::VectorXd next = c[0] * v + c[1] * p;
      const double r = rayleigh(next);
      if (!(r < rho)) break;
      v = next / std::sqrt(next.dot(G * next));
      rho = r;
    }
    rep.min_margin = std::min(rep.min_margin, rho - rep.c);
    rep.max_identity_residual =
        std::max(rep.max_identity_residual, korn_identity_residual(dofs, full_velocity(dofs, v)));
  }
  rep.verdict = rep.min_margin >= -slack ? Verdict::Pass : Verdict::Fail;
  return rep;
}

double tangent_slope(int N, double h, double R) {
  const double a = 0.5 / N;
  if (!(R > 0.0 && R < a && R < std::hypot(a, h)))
    throw Error(ErrorCode::ConfigInvalid, "tangent_slope: radius must lie in (0, 1/(2N))");
  return (a * h + R * std::sqrt(a * a + h * h - R * R)) / (a * a - R * R);
}

StarDecomposition star_decomposition(const ChannelProfile& profile, double t, int rays, std::uint64_t seed) {
  if (rays < 1) throw Error(ErrorCode::ConfigInvalid, "star_decomposition: rays must be positive");
  const double a = t - 1.0, b = t;
  const WallStats ws = wall_stats(profile, a, b);
  StarDecomposition sd;
  sd.t = t;
  sd.d = ws.f_min;
  sd.d_bar = ws.f_max;
  sd.beta = ws.slope_max;

  for (int N = static_cast<int>(std::floor(sd.beta / sd.d)) + 1;; ++N) {
    if (N > 100000) throw Error(ErrorCode::NotStarLike, "star_decomposition: no N up to 1e5 gives s > beta");
    const double h = 0.5 * sd.d - 0.5 * sd.beta / N;
    if (!(h > 0.0)) continue;
    const double R = 0.5 * std::min(0.5 / N, h);
    const double s = tangent_slope(N, h, R);
    if (s > sd.beta) {
      sd.N = N;
      sd.R = R;
      sd.s = s;
      break;
    }
  }

  // boundary samples of E⁺: diameter
  std::vector<Eigen::Vector2d> bnd;
  constexpr int kSide = 200;
  for (int k = 0; k <= kSide; ++k) {
    const double x = a + (b - a) * k / kSide;
    bnd.emplace_back(x, profile.lower(x).v);
    bnd.emplace_back(x, profile.upper(x).v);
  }
  for (const double x : {a, b})
    for (int k = 1; k < 50; ++k) {
      const double y0 = profile.lower(x).v, y1 = profile.upper(x).v;
      bnd.emplace_back(x, y0 + (y1 - y0) * k / 50.0);
    }
  for (std::size_t i = 0; i < bnd.size(); ++i)
    for (std::size_t j = i + 1; j < bnd.size(); ++j) sd.R0 = std::max(sd.R0, (bnd[i] - bnd[j]).norm());
  sd.area = weight_integral(profile, a, b, 1.0);

  const int P = 2 * sd.N - 1;
  const double piece = 0.5 / sd.N;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  sd.min_overlap = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= P; ++k) {
    StarPiece pc;
    pc.lo = a + (k - 1) * piece;
    pc.hi = a + (k + 1) * piece;
    const double tk = a + k * piece;
    pc.center = Eigen::Vector2d(tk, profile.midline(tk).v);
    pc.area = weight_integral(profile, pc.lo, pc.hi, 1.0);
    if (k < P) {
      pc.overlap = weight_integral(profile, tk, pc.hi, 1.0);
      sd.min_overlap = std::min(sd.min_overlap, pc.overlap);
    }
    const auto inside = [&](double x1, double x2) {
      return std::min({x1 - pc.lo, pc.hi - x1, x2 - profile.lower(x1).v, profile.upper(x1).v - x2});
    };

    // clearance of the ball from ∂E_k
    double dist = std::min(tk - pc.lo, pc.hi - tk);
    constexpr int kWall = 400;
    for (int m = 0; m <= kWall; ++m) {
      const double x = pc.lo + (pc.hi - pc.lo) * m / kWall;
      dist = std::min({dist, (Eigen::Vector2d(x, profile.lower(x).v) - pc.center).norm(),
                       (Eigen::Vector2d(x, profile.upper(x).v) - pc.center).norm()});
    }
    pc.clearance = dist - sd.R;

    auto rng = stream(seed, k);
    const double step = sd.R0 / 500.0;
    for (int r = 0; r < rays; ++r) {
      const double rad = sd.R * std::sqrt(u01(rng)), ang = 2.0 * std::numbers::pi * u01(rng);
      const double dir = 2.0 * std::numbers::pi * u01(rng);
      const Eigen::Vector2d o = pc.center + rad * Eigen::Vector2d(std::cos(ang), std::sin(ang));
      const Eigen::Vector2d e(std::cos(dir), std::sin(dir));
      bool exited = false;
      for (double rr = step; rr <= sd.R0 + step; rr += step) {
        const Eigen::Vector2d x = o + rr * e;
        if ((x[0] < pc.lo && e[0] <= 0.0) || (x[0] > pc.hi && e[0] >= 0.0)) break;  // x1 is monotone along the ray
        const double phi = inside(x[0], x[1]);
        if (!exited && phi < 0.0) exited = true;
        if (exited && phi > 1e-12) {
          std::ostringstream os;
          os << "piece " << k << " ray from (" << o[0] << ", " << o[1] << ") at angle " << dir
             << " re-enters at distance " << rr;
          throw Error(ErrorCode::NotStarLike, os.str());
        }
      }
    }
    pc.rays = rays;
    pc.certified = pc.clearance > 0.0;
    if (!pc.certified)
      throw Error(ErrorCode::NotStarLike, "piece " + std::to_string(k) + ": ball of radius R is not inside");
    sd.pieces.push_back(pc);
  }
  if (P == 1) sd.min_overlap = 0.0;

  // C_D over the ordered cover; the last piece has no successor and uses |E_P| itself
  double prod = 1.0;
  for (int k = 1; k <= P; ++k) {
    const StarPiece& pc = sd.pieces[static_cast<std::size_t>(k - 1)];
    const double tilde = k < P ? pc.overlap : pc.area;
    sd.C_D = std::max(sd.C_D, (1.0 + std::sqrt(sd.area / tilde)) * prod);
    if (k < P) {
      const double rest = weight_integral(profile, pc.hi, b, 1.0);  // Ê_k \ E_k
      prod *= 1.0 + std::sqrt(rest / pc.overlap);
    }
  }
  const double q = sd.R0 / sd.R;
  sd.bound = sd.C_D * q * q * (1.0 + q);
  return sd;
}

std::function<double(double, double)> remove_mean(const Mesh& mesh, std::function<double(double, double)> w) {
  QuadratureSpec rule;
  rule.order = kDivergenceOrder;
  double integral = 0.0, area = 0.0;
  for_each_qpoint(mesh, rule, mesh.domain().a(), mesh.domain().b(), [&](const XiNode&, const QPoint& q) {
    integral += q.weight * w(q.x1, q.x2);
    area += q.weight;
  });
  const double mean = integral / area;
  return [w = std::move(w), mean](double x1, double x2) { return w(x1, x2) - mean; };
}

BogovskiiResult bogovskii_solve(const Mesh& mesh, const std::function<double(double, double)>& w) {
  QuadratureSpec rule;
  rule.order = kDivergenceOrder;
  BogovskiiResult out;
  const auto mesh_ptr = std::make_shared<const Mesh>(mesh);
  const DofMap dofs(mesh_ptr);
  const int nv = dofs.num_velocity();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(dofs.num_full());
  double w2 = 0.0;
  for_each_qpoint(mesh, rule, mesh.domain().a(), mesh.domain().b(), [&](const XiNode&, const QPoint& q) {
    const double wv = w(q.x1, q.x2);
    out.mean += q.weight * wv;
    w2 += q.weight * wv * wv;
    const int i = q.cell / mesh.ny(), j = q.cell % mesh.ny();
    const auto psi = pressure_basis(mesh, i, j)(q.x1, q.x2);
    for (int m = 0; m < 3; ++m) load[dofs.pressure_dof(q.cell, m)] -= q.weight * psi[static_cast<std::size_t>(m)] * wv;
  });
  out.w_norm = std::sqrt(w2);
  out.a = Eigen::VectorXd::Zero(nv);
  if (std::abs(out.mean) > 1e-10 * out.w_norm)
    throw Error(ErrorCode::IncompatibleData, "bogovskii_solve: integral of w is " + std::to_string(out.mean));
  if (out.w_norm == 0.0) return out;

  // unknowns: interior velocities and every pressure but the pinned one
  std::vector<int> keep;
  for (int node = 0; node < mesh.num_nodes(); ++node)
    if (!dofs.is_end(node) && !dofs.is_wall(node)) {
      keep.push_back(2 * node);
      keep.push_back(2 * node + 1);
    }
  const int n_vel = static_cast<int>(keep.size());
  for (int p = nv; p < dofs.num_full(); ++p)
    if (p != dofs.pinned_pressure()) keep.push_back(p);
  std::vector<Eigen::Triplet<double>> sel;
  for (std::size_t c = 0; c < keep.size(); ++c) sel.emplace_back(keep[c], static_cast<int>(c), 1.0);
  SpMat S(dofs.num_full(), static_cast<int>(keep.size()));
  S.setFromTriplets(sel.begin(), sel.end());

  const SpMat G = assemble_velocity_gram(dofs, Space::Full);
  const SpMat B = assemble_divergence(dofs, Space::Full);
  const SpMat K = SpMat(S.transpose() * saddle_matrix(G, B) * S);
  Eigen::SparseLU<SpMat> lu(K);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "bogovskii_solve: factorization failed");
  const Eigen::VectorXd x = lu.solve(Eigen::VectorXd(S.transpose() * load));
  Eigen::VectorXd full = Eigen::VectorXd::Zero(dofs.num_full());
  for (int c = 0; c < n_vel; ++c) full[keep[static_cast<std::size_t>(c)]] = x[c];
  out.a = full.head(nv);
  out.gradient = std::sqrt(full.dot(G * full));
  out.ratio = out.gradient / out.w_norm;

  const Eigen::VectorXd res = B * full - load;
  const SpMat Mp = assemble_pressure_mass(dofs, Space::Full);
  for (int p = nv; p < dofs.num_full(); ++p)
    out.divergence_defect =
        std::max(out.divergence_defect, std::abs(res[p]) / (std::sqrt(Mp.coeff(p, p)) * out.w_norm));
  return out;
}

}  // namespace navslip
