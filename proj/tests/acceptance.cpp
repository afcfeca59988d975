// One line per acceptance criterion; exit status 1 when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "navslip/error.hpp"
#include "navslip/inequality.hpp"
#include "navslip/pipeline.hpp"

using namespace navslip;
using nlohmann::json;

namespace {

const std::filesystem::path kScenarios = NAVSLIP_SCENARIO_DIR;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Scenario scenario(const std::string& name) { return load_scenario(kScenarios / (name + ".json")); }

bool pass(const json& j) { return j.contains("verdict") && j["verdict"] == "Pass"; }

struct Criterion {
  int id;
  std::string title;
  std::function<std::pair<bool, std::string>()> run;
};

/// Verify reports of the shipped scenarios, shared between criteria.
struct Runs {
  json straight, bump_t10, widening, case1;
  std::vector<json> bump_members;  // Φ ∈ {0.1, 1, 5} × T ∈ {10, 20, 40}
  std::vector<json> bump_sweeps;
  json case2_sweep;
  double bump_seconds = 0.0;
  std::vector<std::pair<double, double>> ac1_flux;  // (Φ, flux error) of the shear solves
};

Runs runs;

std::vector<json> converged_states() {
  std::vector<json> out = {runs.straight, runs.bump_t10, runs.widening, runs.case1};
  for (const json& m : runs.bump_members) out.push_back(m);
  for (const json& m : runs.case2_sweep["members"]) out.push_back(m["report"]);
  return out;
}

json verify(const Scenario& s) {
  const RunResult r = run_command("verify", s, {});
  return r.report;
}

// --- criteria -------------------------------------------------------------

std::pair<bool, std::string> shear_reproduction() {
  const ChannelProfile p = ChannelProfile::straight(-1, 1);
  const std::vector<std::pair<int, int>> meshes = {{64, 8}, {128, 16}, {256, 32}};
  bool ok = true;
  double worst_time = 0.0;
  std::ostringstream os;
  for (const double alpha : {0.0, 1.0, 10.0}) {
    std::vector<double> err;
    for (const auto& [nx, ny] : meshes) {
      const auto t0 = std::chrono::steady_clock::now();
      const FluxCarrier g(p, 0.1, 0.25);
      const Problem pb =
          Problem::build(TruncatedDomain(p, -8, 8), nx, ny, Grading::CarrierFitted, alpha, ShearConvention::WeakFormConsistent, 0.25);
      const auto [state, rep] = solve_steady(pb, g, SolveOptions{});
      worst_time = std::max(worst_time, seconds_since(t0));
      runs.ac1_flux.emplace_back(0.1, rep.flux_error);
      const SectionShear U(0.1, alpha, ShearConvention::WeakFormConsistent, -1, 1);
      err.push_back(
          compare_l2(state, -4, 4, [&](double, double y) { return Eigen::Vector2d(U.value(y), 0.0); }).relative());
    }
    const double order = std::min(std::log2(err[0] / err[1]), std::log2(err[1] / err[2]));
    ok = ok && err.back() < 1e-4 && order >= 2.0;
    os << "alpha=" << alpha << " err=" << fmt("%.2e", err.back()) << " order=" << fmt("%.2f", order) << "; ";
  }
  const ShearFlow pf = make_shear(1.0, 1.0, ShearConvention::PaperFormula);
  const bool coeffs = pf.a0 == 9.0 / 16.0 && pf.b0 == 3.0 / 16.0;
  ok = ok && worst_time < 120.0 && coeffs;
  os << "max solve " << fmt("%.1f", worst_time) << " s; PaperFormula (a0,b0)=(" << pf.a0 << "," << pf.b0 << ")";
  return {ok, os.str()};
}

std::pair<bool, std::string> flux_exactness() {
  double worst = 0.0;
  int n = 0;
  bool ok = true;
  for (const json& r : converged_states()) {
    const double phi = r["solve"]["phi"].get<double>(), e = r["solve"]["max_flux_error"].get<double>();
    ok = ok && r["solve"]["converged"].get<bool>() && e < 1e-7 * std::max(1.0, phi);
    worst = std::max(worst, e / std::max(1.0, phi));
    ++n;
  }
  for (const auto& [phi, e] : runs.ac1_flux) {
    ok = ok && e < 1e-7 * std::max(1.0, phi);
    worst = std::max(worst, e / std::max(1.0, phi));
    ++n;
  }
  return {ok, std::to_string(n) + " states, max |flux-phi|/max(1,phi) = " + fmt("%.2e", worst)};
}

std::pair<bool, std::string> carrier_certification() {
  bool ok = true;
  std::ostringstream os;
  for (const std::string name : {"straight_small_flux", "bump", "widening"}) {
    const RunResult r = run_command("carrier-check", scenario(name), {});
    double div = 0.0;
    long samples = 0;
    for (const json& d : r.report["domains"]) {
      div = std::max(div, d["max_divergence"].get<double>());
      samples = std::max(samples, d["samples"].get<long>());
      ok = ok && d["samples"].get<long>() >= 10000 && d["support_ok"].get<bool>();
    }
    ok = ok && pass(r.report);
    os << name << ": div " << fmt("%.1e", div) << ", ratio change "
       << fmt("%.3f", r.report["energy_ratio_stability"]["max_change"].get<double>()) << "; ";
  }
  return {ok, os.str()};
}

std::pair<bool, std::string> korn() {
  bool ok = true;
  std::ostringstream os;
  for (const std::string name : {"straight_small_flux", "bump"}) {
    Scenario s = scenario(name);
    const ChannelProfile p = s.profile();
    const auto mesh = std::make_shared<const Mesh>(TruncatedDomain(p, -4, 4), 16, 6);
    const DofMap d(mesh);
    // analytic sup of |f''|/(1 + f'^2)^{3/2}: 0 straight, 1 at the bump crest
    const double kappa = name == "bump" ? 1.0 : 0.0;
    for (const double alpha : {0.1, 1.0, 10.0}) {
      const KornReport k = korn_check(d, alpha, 200, s.seed);
      const double c = alpha / (alpha + kappa);
      ok = ok && k.trials >= 200 && k.min_margin >= -1e-8 && std::abs(k.c - c) < 1e-6;
      os << name << " a=" << alpha << " margin " << fmt("%.2e", k.min_margin) << "; ";
    }
  }
  return {ok, os.str()};
}

std::pair<bool, std::string> bounded_growth() {
  bool ok = runs.bump_seconds < 600.0;
  std::ostringstream os;
  const double phis[] = {0.1, 1.0, 5.0};
  for (std::size_t k = 0; k < runs.bump_sweeps.size(); ++k) {
    const json& agg = runs.bump_sweeps[k]["aggregate"];
    double worst = 0.0;
    for (const json& m : runs.bump_sweeps[k]["members"]) {
      const json& f = m["report"]["checks"]["fit_linear"];
      ok = ok && pass(f);
      worst = std::max(worst, f["residual"].get<double>());
    }
    ok = ok && pass(agg["linear_stability"]);
    os << "phi=" << phis[k] << " resid<=" << fmt("%.3f", worst) << " dC="
       << fmt("%.3f", agg["linear_stability"]["max_change"].get<double>()) << "; ";
  }
  os << "total " << fmt("%.0f", runs.bump_seconds) << " s";
  return {ok, os.str()};
}

std::pair<bool, std::string> unbounded_growth() {
  const json& wi = runs.case1["checks"]["fit_weight_integral"];
  const json& lin = runs.case1["checks"]["fit_linear"];
  const json& last = runs.case2_sweep["members"].back()["report"]["checks"]["plateau"];
  const bool ok = pass(wi) && wi["residual"].get<double>() < lin["residual"].get<double>() && pass(last) &&
                  last["ratio"].get<double>() < 1.1;
  return {ok, "case1 WI resid " + fmt("%.4f", wi["residual"].get<double>()) + " vs Linear " +
                  fmt("%.4f", lin["residual"].get<double>()) + "; case2 y(3T/4)/y(T/2) = " +
                  fmt("%.4f", last["ratio"].get<double>()) + " at T=" +
                  fmt("%g", runs.case2_sweep["members"].back()["value"].get<double>())};
}

std::pair<bool, std::string> lower_bound() {
  bool ok = true;
  double worst = 0.0;
  int n = 0;
  for (const json& r : converged_states()) {
    if (r["solve"]["phi"].get<double>() < 0.1) continue;
    const json& lb = r["checks"]["lower_bound"];
    ok = ok && pass(lb) && lb["spread"].get<double>() <= 3.0;
    worst = std::max(worst, lb["spread"].get<double>());
    ++n;
  }
  return {ok, std::to_string(n) + " states, max spread " + fmt("%.3f", worst)};
}

std::pair<bool, std::string> uniform_local() {
  bool ok = true;
  double worst = 0.0;
  int n = 0;
  std::vector<json> states = {runs.straight, runs.bump_t10};
  for (const json& m : runs.bump_members) states.push_back(m);
  for (const json& r : states) {
    const json& st = r["checks"]["uniform_local"];
    ok = ok && pass(st) && st["spread"].get<double>() <= 3.0;
    worst = std::max(worst, st["spread"].get<double>());
    ++n;
  }
  return {ok, std::to_string(n) + " states, max sup/median " + fmt("%.3f", worst)};
}

std::pair<bool, std::string> uniqueness() {
  bool ok = true;
  std::ostringstream os;
  for (const json* r : {&runs.straight, &runs.bump_t10, &runs.widening}) {
    const json& u = (*r)["checks"]["uniqueness"];
    ok = ok && pass(u) && u["phi"].get<double>() == 0.05 && u["seeds"].get<int>() == 5 &&
         u["max_distance"].get<double>() < 1e-8;
    os << (*r)["scenario"]["name"].get<std::string>() << " max dist " << fmt("%.1e", u["max_distance"].get<double>())
       << "; ";
  }
  return {ok, os.str()};
}

std::pair<bool, std::string> decay() {
  const json& d = runs.widening["checks"]["decay_rate"];
  const bool ok = pass(d) && d["spread"].get<double>() <= 5.0;
  return {ok, "max/median " + fmt("%.3f", d["spread"].get<double>()) + " over " +
                  std::to_string(d["t"].size()) + " windows"};
}

std::pair<bool, std::string> inequality_lab() {
  const Calibration cal = calibrate_constants(6, 6, 1);
  const Expression x = Expression::variable();
  struct Member {
    std::string name;
    ChannelProfile p;
    double a, b;
    int nx, ny;
  };
  const std::vector<Member> family = {
      {"straight", ChannelProfile::straight(-1, 1), -2, 2, 24, 6},
      {"bump", ChannelProfile::with_measured_bounds(-(1.0 + 0.5 * exp(-x * x)), 1.0 + 0.5 * exp(-x * x), -12, 12), -2, 2, 24, 6},
      {"widening", ChannelProfile::with_measured_bounds(-pow(1.0 + x * x, 0.3), pow(1.0 + x * x, 0.3), -12, 12), -5, 5, 30, 6},
      {"asymmetric", ChannelProfile::with_measured_bounds(Expression(-1.0), 1.0 + 0.3 * sin(x), -12, 12), -3, 3, 30, 6},
      {"narrow", ChannelProfile::straight(-0.25, 0.25), 0, 1, 12, 6}};
  bool ok = true;
  int passed = 0;
  for (const Member& m : family) {
    const ConstantCheck c = check_constants(m.name, Mesh(TruncatedDomain(m.p, m.a, m.b), m.nx, m.ny), cal);
    ok = ok && c.pass;
    passed += c.pass;
  }

  // Bogovskii on translated straight slabs and star certificates (10^4 rays)
  const RunResult straight = run_command("inequalities", scenario("straight_small_flux"), {});
  const RunResult bump = run_command("inequalities", scenario("bump"), {});
  std::vector<double> ratios;
  for (const json& b : straight.report["bogovskii"]) ratios.push_back(b["ratio"].get<double>());
  double dev = 0.0;
  for (const double r : ratios) dev = std::max(dev, std::abs(r - ratios.front()) / ratios.front());
  ok = ok && ratios.size() >= 2 && dev <= 1e-10;
  int pieces = 0;
  for (const RunResult* r : {&straight, &bump})
    for (const json& s : r->report["star"]) {
      ok = ok && pass(s);
      for (const json& p : s["pieces"]) {
        ok = ok && p["certified"].get<bool>() && p["rays"].get<int>() >= 10000;
        ++pieces;
      }
    }
  return {ok, std::to_string(passed) + "/5 profiles within bounds; Bogovskii slab deviation " + fmt("%.1e", dev) +
                  "; " + std::to_string(pieces) + " star pieces certified"};
}

std::pair<bool, std::string> comparison_engine() {
  bool ok = true;
  // Part 1 on exact hypotheses at three refinements
  for (const int n : {10, 100, 1000}) {
    ComparisonProblem pr;
    for (int k = 0; k <= n; ++k) {
      const double t = 10.0 * k / n;
      pr.t.push_back(t);
      pr.phi.push_back(10.0 + t);
      pr.z.push_back(0.5 * (10.0 + t));
    }
    ok = ok && compare_diff_ineq(pr, ComparisonMode::Part1).verdict == Verdict::Pass;
  }
  // closed-form comparison solution of z = 2c0 (z')^{3/2}
  double worst = 0.0;
  for (const double c0 : {0.3, 1.0, 7.5}) {
    const double K = comparison_constant(2.0 * c0, 1.5);
    for (const double t : {0.5, 1.0, 3.0, 40.0}) {
      const double z = K * t * t * t, dz = 3.0 * K * t * t;
      worst = std::max(worst, std::abs(z - 2.0 * c0 * std::pow(dz, 1.5)) / z);
      worst = std::max(worst, std::abs(z - t * t * t / (108.0 * c0 * c0)) / z);
    }
  }
  ok = ok && worst < 1e-10;

  // injected violation versus the pointwise oracle
  const int n = 400, bump = 211;
  ComparisonProblem pr;
  for (int k = 0; k <= n; ++k) {
    const double t = 20.0 * k / n;
    pr.t.push_back(t);
    pr.phi.push_back(10.0 + t);
    pr.z.push_back(0.5 * (10.0 + t) + 20.0 * std::exp(-std::pow((k - bump) / 3.0, 2)));
  }
  const auto psi = [](double s) { return s >= 0.0 ? s + std::pow(s, 1.5) : -(-s + std::pow(-s, 1.5)); };
  const auto dz = grid_derivative(pr.t, pr.z);
  int expected = -1;
  for (int k = 0; k <= n && expected < 0; ++k) {
    const double need = pr.z[static_cast<std::size_t>(k)] - 0.5 * pr.phi[static_cast<std::size_t>(k)];
    double lo = -1e6, hi = 1e6;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (psi(mid) < need ? lo : hi) = mid;
    }
    if (dz[static_cast<std::size_t>(k)] < hi - 1e-6) expected = k;
  }
  // integrating w' = s*(w) from the first point above φ: stays above φ
  int first_above = -1;
  for (int k = 0; k <= n && first_above < 0; ++k)
    if (pr.z[static_cast<std::size_t>(k)] > pr.phi[static_cast<std::size_t>(k)]) first_above = k;
  const auto slope = [&](double t, double w) {
    const double need = w - 0.5 * (10.0 + t);
    double lo = 0.0, hi = 1e6;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (psi(mid) < need ? lo : hi) = mid;
    }
    return hi;
  };
  double w = pr.z[static_cast<std::size_t>(first_above)], t = pr.t[static_cast<std::size_t>(first_above)];
  const double h = 1e-3;
  bool above = true;
  for (; t < 20.0 && w < 1e6; t += h) {
    const double k1 = slope(t, w), k2 = slope(t + h / 2, w + h / 2 * k1), k3 = slope(t + h / 2, w + h / 2 * k2),
                 k4 = slope(t + h, w + h * k3);
    w += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    above = above && w > 10.0 + t + h;
  }
  int found = -2;
  try {
    compare_diff_ineq(pr, ComparisonMode::Part1);
  } catch (const HypothesisViolation& e) {
    found = e.index();
  }
  ok = ok && expected > 0 && found == expected && above;
  return {ok, "closed form rel err " + fmt("%.1e", worst) + "; violation at index " + std::to_string(found) +
                  " (oracle " + std::to_string(expected) + ", injected near " + std::to_string(bump) + ")"};
}

std::pair<bool, std::string> determinism() {
  bool ok = true;
  std::ostringstream os;
  const std::vector<std::pair<std::string, const json*>> again = {{"straight_small_flux", &runs.straight},
                                                                  {"bump", &runs.bump_t10}};
  for (const auto& [name, first] : again) {
    const bool same = dump_report(verify(scenario(name))) == dump_report(*first);
    ok = ok && same;
    os << name << (same ? " identical" : " differs") << "; ";
  }
  return {ok, os.str()};
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  std::printf("running shipped scenarios...\n");
  std::fflush(stdout);
  runs.straight = verify(scenario("straight_small_flux"));
  runs.bump_t10 = verify(scenario("bump"));
  runs.widening = verify(scenario("widening"));
  runs.case1 = verify(scenario("case1"));
  runs.case2_sweep = run_command("sweep", scenario("case2"), {}).report;

  const auto tb = std::chrono::steady_clock::now();
  for (const double phi : {0.1, 1.0, 5.0}) {
    Scenario s = scenario("bump");
    s.phi = phi;
    s.verify.checks = {"flux", "fit_linear", "lower_bound", "uniform_local"};
    s.sweep = SweepSpec{SweepParameter::T, {10.0, 20.0, 40.0}};
    s.bounds_lo = -50.0;
    s.bounds_hi = 50.0;
    const json rep = run_command("sweep", s, {}).report;
    runs.bump_sweeps.push_back(rep);
    for (const json& m : rep["members"]) runs.bump_members.push_back(m["report"]);
  }
  runs.bump_seconds = seconds_since(tb);

  const std::vector<Criterion> criteria = {
      {1, "shear-flow reproduction", shear_reproduction},
      {2, "flux exactness", flux_exactness},
      {3, "carrier certification", carrier_certification},
      {4, "Korn coercivity", korn},
      {5, "growth bound, bounded width", bounded_growth},
      {6, "growth bound, unbounded width", unbounded_growth},
      {7, "optimality lower bound", lower_bound},
      {8, "uniform local bound", uniform_local},
      {9, "small-flux uniqueness", uniqueness},
      {10, "decay rate", decay},
      {11, "inequality lab bounds", inequality_lab},
      {12, "differential-inequality engine", comparison_engine},
      {13, "determinism", determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    bool ok = false;
    std::string detail;
    try {
      std::tie(ok, detail) = c.run();
    } catch (const std::exception& e) {
      detail = std::string("error: ") + e.what();
    }
    failed += !ok;
    std::printf("AC%-2d %s  %s: %s\n", c.id, ok ? "PASS" : "FAIL", c.title.c_str(), detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria pass (%.0f s)\n", static_cast<int>(criteria.size()) - failed, criteria.size(),
              seconds_since(t0));
  return failed == 0 ? 0 : 1;
}
