#include "navslip/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>

#include "navslip/error.hpp"
#include "navslip/inequality.hpp"
#include "navslip/io.hpp"

namespace navslip {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

json header(const std::string& command, const Scenario& sc) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["scenario"] = sc.to_json();
  return j;
}

Scenario seeded(const Scenario& sc, const RunOptions& opt) {
  Scenario s = sc;
  if (opt.seed) s.seed = *opt.seed;
  return s;
}

void table(const fs::path& out, const std::string& name, const std::vector<Column>& columns) {
  if (!out.empty()) write_csv(out / "tables" / (name + ".csv"), columns);
}

void plot(const fs::path& out, const std::string& name, const PlotSpec& spec, const std::vector<Series>& series) {
  if (!out.empty()) write_svg(out / "plots" / (name + ".svg"), spec, series);
}

json profile_json(const ChannelProfile& p, double a, double b) {
  return {{"d", p.d()},
          {"beta", p.beta()},
          {"gamma_pp", p.gamma_pp()},
          {"horizon_case", to_string(classify_horizon(p))},
          {"max_wall_curvature", max_wall_curvature(p, a, b)}};
}

struct Solved {
  ChannelProfile profile;
  Problem problem;
  FlowState state;
  SolveReport report;
  std::vector<double> phis;
  int iterations = 0;
};

Solved solve_scenario(const Scenario& sc) {
  ChannelProfile profile = sc.profile();
  Problem problem = Problem::build(TruncatedDomain(profile, -sc.T, sc.T), sc.nx(), sc.mesh.ny, sc.mesh.grading,
                                   sc.alpha, sc.solver.convention, sc.grading_parameter());
  const FluxCarrier carrier(profile, sc.phi, sc.eps);
  if (sc.phi == 0.0) {
    // Zero flux: g = 0 and v = 0 solve the equations exactly.
    FlowState state(problem.dofs_ptr(), carrier);
    SolveReport rep;
    rep.method = "trivial";
    rep.converged = true;
    rep.eps_used = sc.eps;
    fill_report(problem, state, rep);
    return {profile, std::move(problem), std::move(state), rep, {0.0}, 0};
  }
  ContinuationResult c = continuation_in_flux(problem, carrier, sc.solver, sc.phi);
  int iterations = 0;
  for (const SolveReport& r : c.reports) iterations += r.iterations;
  SolveReport last = c.reports.back();
  return {profile, std::move(problem), std::move(c.state), last, c.phis, iterations};
}

json solve_json(const Solved& s) {
  const SolveReport& r = s.report;
  return {{"method", r.method},
          {"converged", r.converged},
          {"iterations", s.iterations},
          {"final_iterations", r.iterations},
          {"continuation_phis", s.phis},
          {"residuals", r.residuals},
          {"damping_engaged", r.damping_engaged},
          {"final_damping", r.final_damping},
          {"eps_used", r.eps_used},
          {"eps_halvings", r.eps_halvings},
          {"phi", s.state.phi()},
          {"gradient_energy", r.gradient_energy},
          {"wall_energy", r.wall_energy},
          {"carrier_energy", r.carrier_energy},
          {"energy_ratio", r.energy_ratio},
          {"energy_inequality_margin", r.energy_inequality_margin},
          {"max_flux_error", r.flux_error},
          {"divergence_residual", divergence_residual(s.state)},
          {"coercivity_constant", s.problem.coercivity_constant()},
          {"theta", s.problem.theta()},
          {"nx", s.problem.mesh().nx()},
          {"ny", s.problem.mesh().ny()},
          {"unknowns", s.problem.dofs().num_reduced()}};
}

void solve_artifacts(const fs::path& out, const Solved& s) {
  if (out.empty()) return;
  const auto flux = section_fluxes(s.state);
  std::vector<double> x1, err;
  for (std::size_t i = 0; i < flux.size(); ++i) {
    x1.push_back(s.problem.mesh().x_edge(static_cast<int>(i) + 1));
    err.push_back(flux[i] - s.state.phi());
  }
  table(out, "section_flux", {{"x1", x1}, {"flux", flux}, {"error", err}});
  const auto& res = s.report.residuals;
  std::vector<double> it(res.size());
  for (std::size_t k = 0; k < res.size(); ++k) it[k] = static_cast<double>(k + 1);
  table(out, "residuals", {{"iteration", it}, {"residual", res}});
  plot(out, "residuals", {"Nonlinear residual (final continuation step)", "iteration", "relative residual", true},
       {{"residual", it, res}});
}

/// Stores one check: its verdict and detail record.
struct Checks {
  json detail = json::object();
  std::vector<Verdict> verdicts;

  void add(const std::string& name, Verdict v, json body) {
    body["verdict"] = to_string(v);
    detail[name] = std::move(body);
    verdicts.push_back(v);
  }
};

json fit_json(const GrowthFit& f) {
  return {{"form", to_string(f.form)}, {"constant", f.constant}, {"offset", f.offset},
          {"scale", f.scale},          {"residual", f.residual}, {"points", f.points}};
}

std::vector<double> fitted(const GrowthFit& f, const EnergyProfile& p, const ChannelProfile& profile) {
  std::vector<double> y;
  for (const double t : p.t)
    y.push_back(f.offset + f.constant * (f.form == BoundForm::Linear ? t : weight_integral(profile, -t, t, -3.0)));
  return y;
}

struct Verified {
  json report;
  Verdict verdict = Verdict::Fail;
  std::optional<GrowthFit> linear;
  std::optional<GrowthFit> weight;
  std::optional<bool> unique;
};

bool wants(const Scenario& sc, const std::string& name) {
  return std::find(sc.verify.checks.begin(), sc.verify.checks.end(), name) != sc.verify.checks.end();
}

Verified verify_scenario(const Scenario& sc, const fs::path& out) {
  Verified result;
  Solved s = solve_scenario(sc);
  json rep = header("verify", sc);
  rep["profile"] = profile_json(s.profile, -sc.T, sc.T);
  rep["solve"] = solve_json(s);
  solve_artifacts(out, s);

  const VerifierConfig& cfg = sc.verify.config;
  const auto grid = uniform_t_grid(sc.T, sc.verify.t_points);
  const EnergyProfile p = energy_profile(s.state, grid);
  rep["energy_profile"] = {{"t", p.t}, {"y", p.y}, {"y_v", p.y_v}, {"unit", p.unit}, {"beta_star", p.beta_star}};
  table(out, "energy_profile",
        {{"t", p.t}, {"y", p.y}, {"y_v", p.y_v}, {"unit", p.unit}, {"beta_star", p.beta_star}});

  Checks checks;
  const bool zero_flux = s.state.phi() == 0.0;
  const json zero_note = {{"note", "zero flux: every energy vanishes"}};
  std::vector<Series> energy_series{{"y(t)", p.t, p.y}};

  if (wants(sc, "flux")) {
    const double err = s.report.flux_error, tol = 1e-7 * std::max(1.0, s.state.phi());
    checks.add("flux", err < tol ? Verdict::Pass : Verdict::Fail, {{"max_flux_error", err}, {"tolerance", tol}});
  }
  for (const auto& [name, form] : {std::pair{"fit_linear", BoundForm::Linear},
                                   std::pair{"fit_weight_integral", BoundForm::WeightIntegral}}) {
    if (!wants(sc, name)) continue;
    if (zero_flux) {
      checks.add(name, Verdict::Inconclusive, zero_note);
      continue;
    }
    const GrowthFit f = fit_growth(p, form, s.profile, cfg);
    (form == BoundForm::Linear ? result.linear : result.weight) = f;
    json body = fit_json(f);
    if (form == BoundForm::WeightIntegral) {
      const GrowthFit lin = result.linear ? *result.linear : fit_growth(p, BoundForm::Linear, s.profile, cfg);
      body["linear_residual"] = lin.residual;
      body["beats_linear"] = f.residual < lin.residual;
    }
    checks.add(name, f.verdict, body);
    energy_series.push_back({to_string(form), p.t, fitted(f, p, s.profile)});
  }
  if (wants(sc, "plateau")) {
    if (zero_flux) {
      checks.add("plateau", Verdict::Inconclusive, zero_note);
    } else {
      const PlateauCheck pc = plateau_check(p, cfg);
      checks.add("plateau", pc.verdict, {{"ratio", pc.ratio}, {"threshold", cfg.plateau_ratio}});
    }
  }
  if (wants(sc, "lower_bound")) {
    if (zero_flux) {
      checks.add("lower_bound", Verdict::Inconclusive, zero_note);
    } else {
      const LowerBoundCheck lb = lower_bound_check(s.state, p, cfg);
      checks.add("lower_bound", lb.verdict,
                 {{"t", lb.t}, {"ratio", lb.ratio}, {"bound", lb.bound}, {"max_ratio", lb.max_ratio},
                  {"spread", lb.spread}, {"threshold", cfg.lower_bound_spread}});
      table(out, "lower_bound", {{"t", lb.t}, {"ratio", lb.ratio}});
      plot(out, "lower_bound", {"Lower-bound ratio", "t", "ratio"}, {{"ratio(t)", lb.t, lb.ratio, true}});
    }
  }
  if (wants(sc, "uniform_local")) {
    if (zero_flux) {
      checks.add("uniform_local", Verdict::Inconclusive, zero_note);
    } else {
      const SlabTable st = uniform_local_check(s.state, cfg);
      checks.add("uniform_local", st.verdict,
                 {{"lo", st.lo}, {"energy", st.energy}, {"sup", st.sup}, {"median", st.median},
                  {"spread", st.spread}, {"threshold", cfg.slab_spread}, {"note", st.note}});
      table(out, "slabs", {{"lo", st.lo}, {"energy", st.energy}});
      plot(out, "slabs", {"Unit-slab energy", "slab start", "energy"}, {{"slab energy", st.lo, st.energy, true}});
    }
  }
  if (wants(sc, "far_field")) {
    if (zero_flux) {
      checks.add("far_field", Verdict::Inconclusive, zero_note);
    } else {
      const FarFieldTable ff =
          far_field_check(s.state, make_shear(s.state.phi(), sc.alpha, sc.solver.convention), sc.verify.far_field_start, cfg);
      checks.add("far_field", ff.verdict,
                 {{"lo", ff.lo}, {"deviation", ff.deviation}, {"cumulative", ff.cumulative},
                  {"shear_norm", ff.shear_norm}, {"settled_slab", ff.settled_slab}, {"note", ff.note}});
      table(out, "far_field",
            {{"lo", ff.lo}, {"deviation", ff.deviation}, {"cumulative", ff.cumulative}, {"shear_norm", ff.shear_norm}});
      plot(out, "far_field", {"Deviation from the far-field shear flow", "slab start", "H1 deviation", true},
           {{"deviation", ff.lo, ff.deviation, true}});
    }
  }
  if (wants(sc, "decay_rate")) {
    if (zero_flux) {
      checks.add("decay_rate", Verdict::Inconclusive, zero_note);
    } else {
      const DecayTable dt = decay_rate_check(s.state, grid, cfg);
      checks.add("decay_rate", dt.verdict,
                 {{"t", dt.t}, {"constant", dt.constant}, {"spread", dt.spread}, {"skipped", dt.skipped},
                  {"threshold", cfg.decay_spread}, {"note", dt.note}});
      table(out, "decay", {{"t", dt.t}, {"constant", dt.constant}});
      plot(out, "decay", {"Window energy times f^2", "t", "C(t)"}, {{"C(t)", dt.t, dt.constant, true}});
    }
  }
  if (wants(sc, "width_conditions")) {
    const ConditionReport cr = condition_check(s.profile);
    const auto side = [](const SideCondition& c) {
      return json{{"gamma", c.gamma},
                  {"weight_exponent", c.weight_exponent},
                  {"weight_diverges", c.weight_diverges},
                  {"slope_exponent", c.slope_exponent},
                  {"slope_vanishes", c.slope_vanishes},
                  {"ratio_exponent", c.ratio_exponent},
                  {"ratio_vanishes", c.ratio_vanishes},
                  {"condition", to_string(c.condition)}};
    };
    // Neither condition only means the uniqueness statement does not apply.
    checks.add("width_conditions", cr.condition == WidthCondition::Neither ? Verdict::Inconclusive : Verdict::Pass,
               {{"plus", side(cr.plus)},
                {"minus", side(cr.minus)},
                {"condition", to_string(cr.condition)},
                {"power_law_consistent", cr.power_law_consistent}});
  }
  if (wants(sc, "uniqueness")) {
    const UniquenessVerdict u = uniqueness_probe(s.problem, s.state.carrier.with_phi(sc.uniqueness.phi), sc.solver,
                                                 sc.uniqueness.seeds, sc.seed, sc.uniqueness.radius);
    const bool ok = u.unique && u.max_distance < 1e-8;
    result.unique = ok;
    checks.add("uniqueness", ok ? Verdict::Pass : Verdict::Fail,
               {{"phi", sc.uniqueness.phi}, {"seeds", sc.uniqueness.seeds}, {"unique", u.unique},
                {"converged", u.converged}, {"failed", u.failed}, {"pairwise_distances", u.pairwise_distances},
                {"max_distance", u.max_distance}, {"note", u.note}});
  }
  if (!zero_flux) plot(out, "energy_profile", {"Energy of u on the truncation", "t", "y(t)"}, energy_series);

  rep["checks"] = checks.detail;
  result.verdict = aggregate(checks.verdicts);
  if (!s.report.converged) result.verdict = Verdict::Fail;
  rep["verdict"] = to_string(result.verdict);
  result.report = std::move(rep);
  return result;
}

Scenario member(const Scenario& sc, SweepParameter param, double value) {
  Scenario m = sc;
  m.sweep.reset();
  switch (param) {
    case SweepParameter::Phi: m.phi = value; break;
    case SweepParameter::T: m.T = value; break;
    case SweepParameter::Mesh:
      m.mesh.cells_per_unit = sc.mesh.cells_per_unit * value;
      m.mesh.ny = std::max(1, static_cast<int>(std::lround(sc.mesh.ny * value)));
      break;
  }
  return m;
}

void write_report(const fs::path& out, const json& report) {
  if (!out.empty()) write_text(out / "report.json", dump_report(report));
}

}  // namespace

Verdict aggregate(const std::vector<Verdict>& verdicts) {
  bool all_pass = true;
  for (const Verdict v : verdicts) {
    if (v == Verdict::Fail) return Verdict::Fail;
    all_pass = all_pass && v == Verdict::Pass;
  }
  return all_pass ? Verdict::Pass : Verdict::Inconclusive;
}

int exit_code(Verdict v) { return v == Verdict::Fail ? 1 : 0; }

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

RunResult run_solve(const Scenario& scenario, const RunOptions& options) {
  const Scenario sc = seeded(scenario, options);
  const Solved s = solve_scenario(sc);
  RunResult r;
  r.report = header("solve", sc);
  r.report["profile"] = profile_json(s.profile, -sc.T, sc.T);
  r.report["solve"] = solve_json(s);
  solve_artifacts(options.out, s);
  r.verdict = s.report.converged ? Verdict::Pass : Verdict::Fail;
  r.report["verdict"] = to_string(r.verdict);
  r.exit_code = exit_code(r.verdict);
  return r;
}

RunResult run_verify(const Scenario& scenario, const RunOptions& options) {
  Verified v = verify_scenario(seeded(scenario, options), options.out);
  return {std::move(v.report), v.verdict, exit_code(v.verdict)};
}

RunResult run_sweep(const Scenario& scenario, const RunOptions& options) {
  const Scenario sc = seeded(scenario, options);
  if (!sc.sweep) throw Error(ErrorCode::ConfigInvalid, "sweep is required for the sweep command");
  const SweepSpec& sw = *sc.sweep;
  const std::size_t n = sw.values.size();
  const std::size_t batch = static_cast<std::size_t>(std::max(1, options.threads));

  std::vector<Verified> members(n);
  const auto dir = [&](std::size_t k) {
    return options.out.empty() ? fs::path{} : options.out / (std::string(to_string(sw.parameter)) + "_" + std::to_string(k));
  };
  for (std::size_t start = 0; start < n; start += batch) {
    std::vector<std::future<Verified>> jobs;
    for (std::size_t k = start; k < std::min(n, start + batch); ++k)
      jobs.push_back(std::async(batch > 1 ? std::launch::async : std::launch::deferred, [&, k] {
        Verified v = verify_scenario(member(sc, sw.parameter, sw.values[k]), dir(k));
        write_report(dir(k), v.report);
        return v;
      }));
    for (std::size_t k = start; k < std::min(n, start + batch); ++k) members[k] = jobs[k - start].get();
  }

  RunResult r;
  r.report = header("sweep", sc);
  std::vector<Verdict> verdicts;
  std::vector<double> energy, lin_c, lin_r, wi_c, wi_r, unique;
  json rows = json::array();
  std::vector<GrowthFit> lin_fits, wi_fits;
  for (std::size_t k = 0; k < n; ++k) {
    const Verified& m = members[k];
    verdicts.push_back(m.verdict);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    energy.push_back(m.report["solve"]["gradient_energy"].get<double>());
    lin_c.push_back(m.linear ? m.linear->constant : nan);
    lin_r.push_back(m.linear ? m.linear->residual : nan);
    wi_c.push_back(m.weight ? m.weight->constant : nan);
    wi_r.push_back(m.weight ? m.weight->residual : nan);
    unique.push_back(m.unique ? (*m.unique ? 1.0 : 0.0) : nan);
    if (m.linear) lin_fits.push_back(*m.linear);
    if (m.weight) wi_fits.push_back(*m.weight);
    rows.push_back({{"value", sw.values[k]}, {"verdict", to_string(m.verdict)}, {"report", m.report}});
  }
  r.report["members"] = rows;
  json agg = {{"parameter", to_string(sw.parameter)}, {"values", sw.values}, {"gradient_energy", energy}};
  // Constants are compared along T only; Φ and mesh sweeps change them legitimately.
  const auto stability = [&](const std::string& name, const std::vector<GrowthFit>& fits) {
    if (sw.parameter != SweepParameter::T || fits.size() < 2) return;
    const StabilityCheck st = fit_stability(fits, sc.verify.config);
    agg[name] = {{"max_change", st.max_change}, {"threshold", sc.verify.config.fit_stability},
                 {"verdict", to_string(st.verdict)}};
    verdicts.push_back(st.verdict);
  };
  stability("linear_stability", lin_fits);
  stability("weight_integral_stability", wi_fits);
  agg["linear_constant"] = lin_c;
  agg["weight_integral_constant"] = wi_c;
  agg["unique"] = unique;
  r.report["aggregate"] = agg;
  table(options.out, "sweep",
        {{"value", sw.values}, {"gradient_energy", energy}, {"linear_constant", lin_c}, {"linear_residual", lin_r},
         {"weight_integral_constant", wi_c}, {"weight_integral_residual", wi_r}, {"unique", unique}});
  std::vector<Series> series{{"Linear constant", sw.values, lin_c, true}, {"WeightIntegral constant", sw.values, wi_c, true}};
  plot(options.out, "sweep_constants", {"Fitted constants", to_string(sw.parameter), "constant"}, series);
  plot(options.out, "sweep_energy", {"Correction energy", to_string(sw.parameter), "gradient energy", true},
       {{"gradient energy", sw.values, energy, true}});

  r.verdict = aggregate(verdicts);
  r.report["verdict"] = to_string(r.verdict);
  r.exit_code = exit_code(r.verdict);
  return r;
}

RunResult run_inequalities(const Scenario& scenario, const RunOptions& options) {
  const Scenario sc = seeded(scenario, options);
  const InequalitySpec& is = sc.inequalities;
  const ChannelProfile profile = sc.profile();
  RunResult r;
  r.report = header("inequalities", sc);
  std::vector<Verdict> verdicts;

  const Calibration cal = calibrate_constants(6, 6, sc.seed);
  const auto mesh = std::make_shared<const Mesh>(TruncatedDomain(profile, -is.half_length, is.half_length), is.nx, is.ny);
  const ConstantCheck cc = check_constants(sc.name, *mesh, cal, is.trials, sc.seed);
  verdicts.push_back(cc.pass ? Verdict::Pass : Verdict::Fail);
  r.report["constants"] = {{"C1", cal.C1},
                           {"C4", cal.C4},
                           {"a", cc.a},
                           {"b", cc.b},
                           {"M0", cc.M0},
                           {"section_ratio", cc.section_ratio},
                           {"M1_measured", cc.M1_measured},
                           {"M1_formula", cc.M1_formula},
                           {"M4_measured", cc.M4_measured},
                           {"M4_formula", cc.M4_formula},
                           {"verdict", to_string(verdicts.back())}};

  const DofMap dofs(mesh);
  const KornReport kr = korn_check(dofs, sc.alpha, is.korn_trials, sc.seed, is.korn_steps);
  verdicts.push_back(kr.verdict);
  r.report["korn"] = {{"alpha", kr.alpha},
                      {"curvature", kr.curvature},
                      {"c", kr.c},
                      {"min_margin", kr.min_margin},
                      {"max_identity_residual", kr.max_identity_residual},
                      {"trials", kr.trials},
                      {"verdict", to_string(kr.verdict)}};

  json stars = json::array(), bogs = json::array();
  std::vector<double> ratios, bounds;
  for (const double t : is.slabs) {
    double bound = std::numeric_limits<double>::quiet_NaN();
    try {
      const StarDecomposition sd = star_decomposition(profile, t, is.rays, sc.seed);
      bool certified = true;
      json pieces = json::array();
      for (const StarPiece& p : sd.pieces) {
        certified = certified && p.certified;
        pieces.push_back({{"lo", p.lo}, {"hi", p.hi}, {"center", {p.center[0], p.center[1]}}, {"area", p.area},
                          {"overlap", p.overlap}, {"clearance", p.clearance}, {"rays", p.rays},
                          {"certified", p.certified}});
      }
      const bool ok = certified && sd.N > sd.beta / sd.d && sd.s > sd.beta;
      verdicts.push_back(ok ? Verdict::Pass : Verdict::Fail);
      bound = sd.bound;
      stars.push_back({{"t", t}, {"d", sd.d}, {"d_bar", sd.d_bar}, {"beta", sd.beta}, {"N", sd.N}, {"R", sd.R},
                       {"s", sd.s}, {"R0", sd.R0}, {"area", sd.area}, {"C_D", sd.C_D}, {"bound", sd.bound},
                       {"min_overlap", sd.min_overlap}, {"pieces", pieces}, {"verdict", to_string(verdicts.back())}});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotStarLike) throw;
      verdicts.push_back(Verdict::Fail);
      stars.push_back({{"t", t}, {"error", e.what()}, {"verdict", "Fail"}});
    }

    const Mesh slab(TruncatedDomain(profile, t - 1.0, t), is.slab_nx, is.slab_ny);
    const auto w = remove_mean(slab, [t](double x1, double x2) { return std::cos(std::numbers::pi * (x1 - t)) * x2; });
    const BogovskiiResult b = bogovskii_solve(slab, w);
    const bool ok = b.divergence_defect < 1e-8 && (std::isnan(bound) || b.ratio <= bound);
    verdicts.push_back(ok ? Verdict::Pass : Verdict::Fail);
    ratios.push_back(b.ratio);
    bounds.push_back(bound);
    bogs.push_back({{"t", t}, {"gradient", b.gradient}, {"w_norm", b.w_norm}, {"ratio", b.ratio}, {"bound", bound},
                    {"divergence_defect", b.divergence_defect}, {"verdict", to_string(verdicts.back())}});
  }
  r.report["star"] = stars;
  r.report["bogovskii"] = bogs;
  if (!ratios.empty()) {
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    r.report["bogovskii_spread"] = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::quiet_NaN();
  }
  table(options.out, "bogovskii", {{"t", is.slabs}, {"ratio", ratios}, {"bound", bounds}});
  table(options.out, "embedding", {{"M1_measured", {cc.M1_measured}}, {"M1_formula", {cc.M1_formula}},
                                   {"M4_measured", {cc.M4_measured}}, {"M4_formula", {cc.M4_formula}}});
  plot(options.out, "bogovskii", {"Bogovskii ratio on unit slabs", "t", "ratio", true},
       {{"measured", is.slabs, ratios, true}, {"star bound", is.slabs, bounds, true}});

  r.verdict = aggregate(verdicts);
  r.report["verdict"] = to_string(r.verdict);
  r.exit_code = exit_code(r.verdict);
  return r;
}

RunResult run_carrier_check(const Scenario& scenario, const RunOptions& options) {
  const Scenario sc = seeded(scenario, options);
  if (!(sc.phi > 0.0)) throw Error(ErrorCode::ConfigInvalid, "phi must be positive for carrier-check");
  const ChannelProfile profile = sc.profile();
  const FluxCarrier carrier(profile, sc.phi, sc.eps);
  RunResult r;
  r.report = header("carrier-check", sc);
  std::vector<Verdict> verdicts;
  json rows = json::array();
  std::vector<double> ratio, sup_g, sup_grad, divergence, flux;
  for (const double L : sc.carrier.half_lengths) {
    const CarrierReport c = carrier_bounds_report(carrier, TruncatedDomain(profile, -L, L), sc.carrier.density, sc.seed);
    const bool ok = c.support_ok && c.max_divergence < 1e-10 && std::isfinite(c.sup_g_times_width) &&
                    std::isfinite(c.sup_grad_times_width2) && c.samples >= 10000;
    verdicts.push_back(ok ? Verdict::Pass : Verdict::Fail);
    rows.push_back({{"half_length", L},
                    {"sup_g_times_width", c.sup_g_times_width},
                    {"sup_grad_times_width2", c.sup_grad_times_width2},
                    {"energy", c.energy},
                    {"weight", c.weight},
                    {"energy_ratio", c.energy_ratio},
                    {"max_divergence", c.max_divergence},
                    {"max_flux_error", c.max_flux_error},
                    {"samples", c.samples},
                    {"support_samples", c.support_samples},
                    {"violations_midline", c.violations_midline},
                    {"violations_wall", c.violations_wall},
                    {"support_ok", c.support_ok},
                    {"verdict", to_string(verdicts.back())}});
    ratio.push_back(c.energy_ratio);
    sup_g.push_back(c.sup_g_times_width);
    sup_grad.push_back(c.sup_grad_times_width2);
    divergence.push_back(c.max_divergence);
    flux.push_back(c.max_flux_error);
  }
  double change = 0.0;
  for (std::size_t k = 1; k < ratio.size(); ++k) change = std::max(change, std::abs(ratio[k] / ratio[k - 1] - 1.0));
  const Verdict stable = change <= sc.carrier.stability ? Verdict::Pass : Verdict::Fail;
  verdicts.push_back(stable);
  r.report["domains"] = rows;
  r.report["energy_ratio_stability"] = {{"max_change", change}, {"threshold", sc.carrier.stability},
                                        {"verdict", to_string(stable)}};
  table(options.out, "carrier",
        {{"half_length", sc.carrier.half_lengths}, {"energy_ratio", ratio}, {"sup_g_times_width", sup_g},
         {"sup_grad_times_width2", sup_grad}, {"max_divergence", divergence}, {"max_flux_error", flux}});
  plot(options.out, "carrier_energy_ratio", {"Carrier energy over weight", "half length", "ratio"},
       {{"energy ratio", sc.carrier.half_lengths, ratio, true}});

  r.verdict = aggregate(verdicts);
  r.report["verdict"] = to_string(r.verdict);
  r.exit_code = exit_code(r.verdict);
  return r;
}

RunResult run_command(const std::string& command, const Scenario& scenario, const RunOptions& options) {
  RunResult r;
  try {
    if (command == "solve") r = run_solve(scenario, options);
    else if (command == "verify") r = run_verify(scenario, options);
    else if (command == "sweep") r = run_sweep(scenario, options);
    else if (command == "inequalities") r = run_inequalities(scenario, options);
    else if (command == "carrier-check") r = run_carrier_check(scenario, options);
    else throw Error(ErrorCode::ConfigInvalid, "unknown command " + command);
  } catch (const Error& e) {
    r.report = header(command, seeded(scenario, options));
    r.report["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    r.report["verdict"] = "Error";
    r.verdict = Verdict::Fail;
    r.exit_code = 2;
  }
  write_report(options.out, r.report);
  return r;
}

}  // namespace navslip
