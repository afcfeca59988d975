#include "navslip/solver.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "navslip/error.hpp"

namespace navslip {

void SolveOptions::validate() const {
  if (!(tol_rel > 0.0)) throw Error(ErrorCode::ConfigInvalid, "solver tol_rel must be > 0");
  if (!(damping > 0.0 && damping <= 1.0)) throw Error(ErrorCode::ConfigInvalid, "solver damping must lie in (0, 1]");
  if (max_picard < 1 || max_newton < 1) throw Error(ErrorCode::ConfigInvalid, "iteration limits must be >= 1");
  if (continuation_steps < 1) throw Error(ErrorCode::ConfigInvalid, "continuation_steps must be >= 1");
  if (max_damping_halvings < 0 || max_eps_halvings < 0)
    throw Error(ErrorCode::ConfigInvalid, "halving limits must be >= 0");
}

SaddleSolver::SaddleSolver(const SpMat& M, ErrorCode code) : M_(M) {
  M_.makeCompressed();
  lu_.analyzePattern(M_);
  lu_.factorize(M_);
  if (lu_.info() != Eigen::Success)
    throw Error(code, "sparse LU failed: " + lu_.lastErrorMessage());
}

Eigen::VectorXd SaddleSolver::solve(const Eigen::VectorXd& rhs) const {
  auto& lu = const_cast<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>&>(lu_);
  Eigen::VectorXd x = lu.solve(rhs);
  const Eigen::VectorXd r = rhs - M_ * x;
  x += lu.solve(r);
  return x;
}

Problem::Problem(std::shared_ptr<const DofMap> dofs, double alpha, ShearConvention convention)
    : dofs_(std::move(dofs)), alpha_(alpha), convention_(convention) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::ConfigInvalid, "alpha must be >= 0");
  theta_ = make_shear(1.0, alpha, convention).boundary_coefficient();
  A_ = assemble_viscous_slip(*dofs_, theta_);
  B_ = assemble_divergence(*dofs_);
  const auto& dom = dofs_->mesh().domain();
  const double curv = max_wall_curvature(dom.profile(), dom.a(), dom.b());
  coercivity_ = alpha > 0.0 ? alpha / (alpha + curv) : 0.0;
}

Problem Problem::build(const TruncatedDomain& domain, int nx, int ny, Grading grading, double alpha,
                       ShearConvention convention, double grading_parameter) {
  auto mesh = std::make_shared<const Mesh>(domain, nx, ny, grading, grading_parameter);
  return Problem(std::make_shared<const DofMap>(mesh), alpha, convention);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Discrete equations S_L y = ℓ + N(v(y)) for one carrier.
class Equations {
 public:
  Equations(const Problem& pb, const FluxCarrier& g, const SolveOptions& opt)
      : pb_(pb), g_(g), opt_(opt), quad_(QuadratureSpec::for_carrier(g.eps())) {
    const DofMap& d = pb.dofs();
    ell_ = assemble_carrier_rhs(d, quad_, g_);
    L_ = pb.viscous();
    if (opt.convection && g.phi() > 0.0) L_ += assemble_oseen(d, quad_, &g_, nullptr, OseenParts{true, true, false, opt.form});
    S_ = saddle_matrix(L_, pb.divergence());
    S_.makeCompressed();
    scale_ = ell_.norm() > 0.0 ? ell_.norm() : 1.0;
  }

  const Eigen::VectorXd& ell() const { return ell_; }
  const SpMat& L() const { return L_; }
  const SpMat& S() const { return S_; }

  Eigen::VectorXd load(const Eigen::VectorXd& y) const {
    if (!opt_.convection) return Eigen::VectorXd::Zero(y.size());
    const Eigen::VectorXd v = pb_.dofs().expand(y);
    return assemble_convection_load(pb_.dofs(), QuadratureSpec{}, v, opt_.form);
  }

  Eigen::VectorXd residual_vector(const Eigen::VectorXd& y, const Eigen::VectorXd& N) const {
    return S_ * y - ell_ - N;
  }
  double residual(const Eigen::VectorXd& y, const Eigen::VectorXd& N) const {
    return residual_vector(y, N).norm() / scale_;
  }

  SpMat jacobian(const Eigen::VectorXd& y) const {
    SpMat J = L_;
    if (opt_.convection) {
      const Eigen::VectorXd v = pb_.dofs().expand(y);
      J += assemble_oseen(pb_.dofs(), QuadratureSpec{}, nullptr, &v, OseenParts{false, true, true, opt_.form});
    }
    return saddle_matrix(J, pb_.divergence());
  }

 private:
  const Problem& pb_;
  FluxCarrier g_;
  SolveOptions opt_;
  QuadratureSpec quad_;
  Eigen::VectorXd ell_;
  SpMat L_;
  SpMat S_;
  double scale_ = 1.0;
};

double velocity_norm(const Problem& pb, const Eigen::VectorXd& y) {
  return y.head(pb.dofs().num_reduced_velocity()).norm();
}

FlowState make_state(const Problem& pb, const FluxCarrier& g, const Eigen::VectorXd& y) {
  Eigen::VectorXd x = pb.dofs().expand(y);
  normalize_pressure(pb.dofs(), x);
  return FlowState(pb.dofs_ptr(), g, std::move(x));
}

Eigen::VectorXd initial(const Problem& pb, const FlowState* warm) {
  if (!warm) return Eigen::VectorXd::Zero(pb.dofs().num_reduced());
  if (warm->dofs.get() != &pb.dofs() && warm->dofs->num_full() != pb.dofs().num_full())
    throw Error(ErrorCode::ConfigInvalid, "warm start lives on a different mesh");
  return pb.dofs().reduce(warm->x);
}

}  // namespace

void fill_report(const Problem& problem, const FlowState& state, SolveReport& r) {
  const auto& dom = problem.mesh().domain();
  r.phi = state.phi();
  r.eps_used = state.carrier.eps();
  r.gradient_energy = gradient_energy(state, Field::Correction, dom.a(), dom.b());
  r.wall_energy = wall_energy(state, Field::Correction, dom.a(), dom.b());
  r.carrier_energy = carrier_energy(state, dom.a(), dom.b());
  r.energy_ratio = r.carrier_energy > 0.0 ? r.gradient_energy / r.carrier_energy : 0.0;
  const double gv = std::sqrt(r.gradient_energy);
  r.energy_inequality_margin = 2.0 * std::sqrt(r.carrier_energy) * gv -
                               0.5 * problem.coercivity_constant() * r.gradient_energy -
                               problem.alpha() * r.wall_energy;
  r.flux_error = max_flux_error(state);
}

FlowState solve_linearized(const Problem& problem, const FluxCarrier& carrier, const Eigen::VectorXd& rhs,
                           bool convection) {
  const DofMap& d = problem.dofs();
  if (rhs.size() != d.num_reduced()) throw Error(ErrorCode::ConfigInvalid, "solve_linearized: rhs has wrong size");
  SpMat L = problem.viscous();
  if (convection && carrier.phi() > 0.0)
    L += assemble_oseen(d, QuadratureSpec::for_carrier(carrier.eps()), &carrier, nullptr, OseenParts{});
  const SaddleSolver solver(saddle_matrix(L, problem.divergence()));
  return make_state(problem, carrier, solver.solve(rhs));
}

std::pair<FlowState, SolveReport> picard_solve(const Problem& problem, const FluxCarrier& carrier,
                                               const SolveOptions& options, const FlowState* warm_start) {
  options.validate();
  const auto t0 = Clock::now();
  SolveReport rep;
  rep.method = "picard";
  FluxCarrier g = carrier;
  double last = 0.0;
  for (int attempt = 0; attempt <= options.max_eps_halvings; ++attempt) {
    if (attempt > 0) g = g.with_eps(0.5 * g.eps());
    rep.eps_halvings = attempt;
    rep.residuals.clear();
    rep.damping_engaged = false;
    rep.monotone_after_damping = true;
    const Equations eq(problem, g, options);
    const SaddleSolver solver(eq.S());
    Eigen::VectorXd y = initial(problem, warm_start);
    Eigen::VectorXd N = eq.load(y);
    double r = eq.residual(y, N);
    double omega = options.damping;
    bool stalled = false;
    for (int k = 1; k <= options.max_picard; ++k) {
      const Eigen::VectorXd Ky = solver.solve(eq.ell() + N);
      Eigen::VectorXd y_next;
      Eigen::VectorXd N_next;
      double r_next = 0.0;
      for (int h = 0;; ++h) {
        y_next = y + omega * (Ky - y);
        N_next = eq.load(y_next);
        r_next = eq.residual(y_next, N_next);
        if (k == 1 || r_next <= r || h >= options.max_damping_halvings) break;
        omega *= 0.5;
        rep.damping_engaged = true;
      }
      if (rep.damping_engaged && !rep.residuals.empty() && r_next > rep.residuals.back())
        rep.monotone_after_damping = false;
      const double update = velocity_norm(problem, y_next - y) / std::max(velocity_norm(problem, y_next), 1e-300);
      y = std::move(y_next);
      N = std::move(N_next);
      rep.residuals.push_back(r_next);
      rep.iterations = k;
      last = r_next;
      if (!std::isfinite(r_next) || (k > 1 && r_next > r && rep.damping_engaged)) {
        stalled = true;
        break;
      }
      r = r_next;
      const bool small_update = update <= options.tol_rel || velocity_norm(problem, y) == 0.0;
      if (small_update && r <= options.tol_rel) {
        rep.converged = true;
        rep.final_damping = omega;
        FlowState s = make_state(problem, g, y);
        fill_report(problem, s, rep);
        rep.seconds = seconds_since(t0);
        return {std::move(s), rep};
      }
    }
    (void)stalled;
  }
  throw Error(ErrorCode::NotConverged, "picard: residual " + std::to_string(last) + " after " +
                                           std::to_string(rep.iterations) + " iterations and " +
                                           std::to_string(options.max_eps_halvings) + " eps halvings");
}

std::pair<FlowState, SolveReport> newton_solve(const Problem& problem, const FluxCarrier& carrier,
                                               const SolveOptions& options, const FlowState* warm_start) {
  options.validate();
  const auto t0 = Clock::now();
  SolveReport rep;
  rep.method = "newton";
  const Equations eq(problem, carrier, options);
  Eigen::VectorXd y = initial(problem, warm_start);
  Eigen::VectorXd R = eq.residual_vector(y, eq.load(y));
  const double scale = eq.ell().norm() > 0.0 ? eq.ell().norm() : 1.0;
  double r = R.norm() / scale;
  rep.residuals.push_back(r);
  for (int k = 0; k <= options.max_newton; ++k) {
    if (r <= options.tol_rel) {
      rep.converged = true;
      rep.iterations = k;
      for (std::size_t i = 1; i < rep.residuals.size(); ++i)
        if (rep.residuals[i - 1] > 0.0) rep.newton_ratios.push_back(rep.residuals[i] / (rep.residuals[i - 1] * rep.residuals[i - 1]));
      FlowState s = make_state(problem, carrier, y);
      fill_report(problem, s, rep);
      rep.seconds = seconds_since(t0);
      return {std::move(s), rep};
    }
    if (k == options.max_newton) break;
    const SaddleSolver js(eq.jacobian(y), ErrorCode::JacobianSingular);
    const Eigen::VectorXd delta = js.solve(-R);
    double lambda = 1.0;
    Eigen::VectorXd y_try, R_try;
    double r_try = 0.0;
    for (int h = 0;; ++h) {
      y_try = y + lambda * delta;
      R_try = eq.residual_vector(y_try, eq.load(y_try));
      r_try = R_try.norm() / scale;
      if (r_try < r || h >= options.max_damping_halvings) break;
      lambda *= 0.5;
      rep.damping_engaged = true;
    }
    rep.final_damping = lambda;
    if (!std::isfinite(r_try)) break;
    y = std::move(y_try);
    R = std::move(R_try);
    r = r_try;
    rep.residuals.push_back(r);
    rep.iterations = k + 1;
  }
  throw Error(ErrorCode::NotConverged,
              "newton: residual " + std::to_string(r) + " after " + std::to_string(rep.iterations) + " iterations");
}

std::pair<FlowState, SolveReport> solve_steady(const Problem& problem, const FluxCarrier& carrier,
                                               const SolveOptions& options, const FlowState* warm_start) {
  const auto t0 = Clock::now();
  try {
    auto [state, rep] = picard_solve(problem, carrier, options, warm_start);
    if (!options.convection) return {std::move(state), rep};
    auto [fin, nrep] = newton_solve(problem, state.carrier, options, &state);
    nrep.method = "picard+newton";
    nrep.eps_halvings = rep.eps_halvings;
    nrep.iterations += rep.iterations;
    nrep.residuals.insert(nrep.residuals.begin(), rep.residuals.begin(), rep.residuals.end());
    nrep.damping_engaged = nrep.damping_engaged || rep.damping_engaged;
    nrep.monotone_after_damping = rep.monotone_after_damping;
    nrep.seconds = seconds_since(t0);
    return {std::move(fin), nrep};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotConverged) throw;
  }
  auto [state, rep] = newton_solve(problem, carrier, options, warm_start);
  rep.method = "newton (picard failed)";
  rep.seconds = seconds_since(t0);
  return {std::move(state), rep};
}

ContinuationResult continuation_in_flux(const Problem& problem, const FluxCarrier& carrier,
                                        const SolveOptions& options, double phi_target) {
  options.validate();
  if (!(phi_target >= 0.0)) throw Error(ErrorCode::ConfigInvalid, "phi_target must be >= 0");
  std::vector<double> plan;
  const double phi0 = std::min(0.1, phi_target);
  const int n = options.continuation_steps;
  if (phi_target <= 0.1 || n == 1) {
    plan.push_back(phi_target);
  } else {
    for (int k = 0; k < n; ++k) plan.push_back(phi0 * std::pow(phi_target / phi0, static_cast<double>(k) / (n - 1)));
    plan.back() = phi_target;
  }
  ContinuationResult out{FlowState(problem.dofs_ptr(), carrier.with_phi(0.0)), {}, {}};
  bool have = false;
  double eps = carrier.eps();
  double done = 0.0;
  std::size_t next = 0;
  int bisections = 0;
  while (next < plan.size()) {
    const double phi = plan[next];
    const FluxCarrier g = carrier.with_eps(eps).with_phi(phi);
    FlowState warm = out.state;
    if (have && done > 0.0) warm.x *= phi / done;
    try {
      auto [s, rep] = solve_steady(problem, g, options, have ? &warm : nullptr);
      eps = s.carrier.eps();
      out.state = std::move(s);
      out.phis.push_back(phi);
      out.reports.push_back(rep);
      have = true;
      done = phi;
      ++next;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotConverged && e.code() != ErrorCode::JacobianSingular) throw;
      if (++bisections > 6 || !have)
        throw Error(ErrorCode::ContinuationStalled,
                    "continuation stalled at phi = " + std::to_string(phi) + "; last converged phi = " +
                        std::to_string(done) + " (" + e.what() + ")");
      plan.insert(plan.begin() + static_cast<std::ptrdiff_t>(next), std::sqrt(done * phi));
    }
  }
  return out;
}

UniquenessVerdict uniqueness_probe(const Problem& problem, const FluxCarrier& carrier, const SolveOptions& options,
                                   int n_seeds, std::uint64_t seed, double radius) {
  if (n_seeds < 2) throw Error(ErrorCode::ConfigInvalid, "uniqueness_probe needs n_seeds >= 2");
  const DofMap& d = problem.dofs();
  const SpMat G = assemble_velocity_gram(d);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> sols;
  UniquenessVerdict v;
  for (int s = 0; s < n_seeds; ++s) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(d.num_reduced());
    for (int i = 0; i < d.num_reduced_velocity(); ++i) y[i] = normal(rng);
    y *= radius / std::sqrt(y.dot(G * y));
    const FlowState start(problem.dofs_ptr(), carrier, d.expand(y));
    try {
      auto [st, rep] = newton_solve(problem, carrier, options, &start);
      Eigen::VectorXd r = d.reduce(st.x);
      r.tail(d.num_reduced_pressure()).setZero();
      sols.push_back(std::move(r));
      ++v.converged;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotConverged) throw;
      ++v.failed;
    }
  }
  for (std::size_t i = 0; i < sols.size(); ++i)
    for (std::size_t j = i + 1; j < sols.size(); ++j) {
      const Eigen::VectorXd e = sols[i] - sols[j];
      const double dist = std::sqrt(std::max(0.0, e.dot(G * e)));
      v.pairwise_distances.push_back(dist);
      v.max_distance = std::max(v.max_distance, dist);
    }
  v.unique = v.converged >= 2 && v.max_distance <= 10.0 * options.tol_rel;
  return v;
}

}  // namespace navslip
