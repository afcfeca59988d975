#include "navslip/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "navslip/error.hpp"

namespace navslip {

using nlohmann::json;

namespace {

/// Object reader that records consumed keys so leftovers can be reported.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw Error(ErrorCode::ConfigInvalid, where() + " must be an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) throw Error(ErrorCode::ConfigInvalid, field(key) + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw Error(ErrorCode::ConfigInvalid, field(key) + " must be finite");
    return x;
  }

  int integer(const std::string& key, int fallback, int min_value) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw Error(ErrorCode::ConfigInvalid, field(key) + " must be an integer");
    const int x = v.get<int>();
    if (x < min_value)
      throw Error(ErrorCode::ConfigInvalid, field(key) + " must be at least " + std::to_string(min_value));
    return x;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw Error(ErrorCode::ConfigInvalid, field(key) + " must be true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback, bool required = false) {
    if (!has(key)) {
      if (required) throw Error(ErrorCode::ConfigInvalid, field(key) + " is required");
      return fallback;
    }
    const json& v = raw(key);
    if (!v.is_string()) throw Error(ErrorCode::ConfigInvalid, field(key) + " must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_array()) throw Error(ErrorCode::ConfigInvalid, field(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) throw Error(ErrorCode::ConfigInvalid, field(key) + " must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) throw Error(ErrorCode::ConfigInvalid, "unknown field " + field(key));
  }

 private:
  std::string where() const { return path_.empty() ? "scenario" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ConfigInvalid, field + " " + what);
}

ShearConvention parse_convention(const std::string& s, const std::string& field) {
  if (s == "WeakFormConsistent") return ShearConvention::WeakFormConsistent;
  if (s == "PaperFormula") return ShearConvention::PaperFormula;
  throw Error(ErrorCode::ConfigInvalid, field + " must be WeakFormConsistent or PaperFormula");
}

Grading parse_grading(const std::string& s, const std::string& field) {
  if (s == "Uniform") return Grading::Uniform;
  if (s == "WallRefined") return Grading::WallRefined;
  if (s == "CarrierFitted") return Grading::CarrierFitted;
  throw Error(ErrorCode::ConfigInvalid, field + " must be Uniform, WallRefined or CarrierFitted");
}

const char* to_string(TransportForm f) { return f == TransportForm::Skew ? "Skew" : "Convective"; }

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] > v[k - 1])) return false;
  return true;
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "fit_linear", "fit_weight_integral", "plateau", "lower_bound", "uniform_local",
      "far_field", "decay_rate", "width_conditions", "uniqueness", "flux"};
  return names;
}

const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::Phi: return "phi";
    case SweepParameter::T: return "T";
    case SweepParameter::Mesh: return "mesh";
  }
  return "?";
}

ChannelProfile Scenario::profile() const {
  return ChannelProfile::with_measured_bounds(Expression::parse(f1), Expression::parse(f2), bounds_lo, bounds_hi);
}

int Scenario::nx() const { return std::max(1, static_cast<int>(std::lround(2.0 * T * mesh.cells_per_unit))); }

double Scenario::grading_parameter() const {
  if (!std::isnan(mesh.grading_parameter)) return mesh.grading_parameter;
  return mesh.grading == Grading::CarrierFitted ? eps : mesh.grading_parameter;
}

Scenario parse_scenario(const json& config) {
  Scenario s;
  Fields top(config, "");
  s.name = top.text("name", "", true);
  require(!s.name.empty(), "name", "must not be empty");

  if (!top.has("profile")) throw Error(ErrorCode::ConfigInvalid, "profile is required");
  Fields prof(top.raw("profile"), "profile");
  s.f1 = prof.text("f1", "", true);
  s.f2 = prof.text("f2", "", true);
  const auto bounds = prof.numbers("bounds", {});
  prof.finish();
  // Parse now so malformed formulas fail at load time.
  Expression::parse(s.f1);
  Expression::parse(s.f2);

  s.alpha = top.number("alpha", s.alpha);
  require(s.alpha >= 0.0, "alpha", "must be non-negative");
  s.phi = top.number("phi", s.phi);
  require(s.phi >= 0.0, "phi", "must be non-negative");
  s.eps = top.number("eps", s.eps);
  require(s.eps > 0.0, "eps", "must be positive");
  s.T = top.number("T", s.T);
  require(s.T > 0.0, "T", "must be positive");
  s.seed = static_cast<std::uint64_t>(top.integer("seed", 1, 0));
  s.solver.convention = parse_convention(top.text("convention", "WeakFormConsistent"), "convention");

  if (top.has("mesh")) {
    Fields m(top.raw("mesh"), "mesh");
    s.mesh.cells_per_unit = m.number("cells_per_unit", s.mesh.cells_per_unit);
    require(s.mesh.cells_per_unit > 0.0, "mesh.cells_per_unit", "must be positive");
    s.mesh.ny = m.integer("ny", s.mesh.ny, 1);
    s.mesh.grading = parse_grading(m.text("grading", "CarrierFitted"), "mesh.grading");
    s.mesh.grading_parameter = m.number("grading_parameter", s.mesh.grading_parameter);
    m.finish();
  }

  if (top.has("solver")) {
    Fields o(top.raw("solver"), "solver");
    SolveOptions& so = s.solver;
    so.tol_rel = o.number("tol_rel", so.tol_rel);
    so.max_picard = o.integer("max_picard", so.max_picard, 1);
    so.max_newton = o.integer("max_newton", so.max_newton, 1);
    so.damping = o.number("damping", so.damping);
    so.max_damping_halvings = o.integer("max_damping_halvings", so.max_damping_halvings, 0);
    so.continuation_steps = o.integer("continuation_steps", so.continuation_steps, 1);
    so.max_eps_halvings = o.integer("max_eps_halvings", so.max_eps_halvings, 0);
    const std::string form = o.text("form", "Skew");
    if (form == "Skew") so.form = TransportForm::Skew;
    else if (form == "Convective") so.form = TransportForm::Convective;
    else throw Error(ErrorCode::ConfigInvalid, "solver.form must be Skew or Convective");
    so.convection = o.boolean("convection", so.convection);
    o.finish();
    try {
      so.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigInvalid, std::string("solver: ") + e.what());
    }
  }

  if (top.has("verify")) {
    Fields v(top.raw("verify"), "verify");
    s.verify.t_points = v.integer("t_points", s.verify.t_points, 4);
    s.verify.far_field_start = v.number("far_field_start", s.verify.far_field_start);
    if (v.has("checks")) {
      const json& arr = v.raw("checks");
      require(arr.is_array(), "verify.checks", "must be an array of names");
      for (const json& e : arr) {
        require(e.is_string(), "verify.checks", "must be an array of names");
        const std::string name = e.get<std::string>();
        const auto& known = known_checks();
        if (std::find(known.begin(), known.end(), name) == known.end())
          throw Error(ErrorCode::ConfigInvalid, "verify.checks: unknown check " + name);
        s.verify.checks.push_back(name);
      }
    }
    if (v.has("thresholds")) {
      Fields c(v.raw("thresholds"), "verify.thresholds");
      VerifierConfig& vc = s.verify.config;
      vc.fit_lo = c.number("fit_lo", vc.fit_lo);
      vc.fit_hi = c.number("fit_hi", vc.fit_hi);
      vc.fit_residual = c.number("fit_residual", vc.fit_residual);
      vc.fit_stability = c.number("fit_stability", vc.fit_stability);
      vc.lower_bound_spread = c.number("lower_bound_spread", vc.lower_bound_spread);
      vc.slab_spread = c.number("slab_spread", vc.slab_spread);
      vc.decay_spread = c.number("decay_spread", vc.decay_spread);
      vc.plateau_ratio = c.number("plateau_ratio", vc.plateau_ratio);
      vc.far_field_drop = c.number("far_field_drop", vc.far_field_drop);
      vc.far_field_noise_factor = c.number("far_field_noise_factor", vc.far_field_noise_factor);
      vc.far_field_floor = c.number("far_field_floor", vc.far_field_floor);
      vc.small_flux = c.number("small_flux", vc.small_flux);
      vc.include_end_slabs = c.boolean("include_end_slabs", vc.include_end_slabs);
      c.finish();
      try {
        vc.validate();
      } catch (const Error& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("verify.thresholds: ") + e.what());
      }
    }
    v.finish();
  }

  if (top.has("uniqueness")) {
    Fields u(top.raw("uniqueness"), "uniqueness");
    s.uniqueness.phi = u.number("phi", s.uniqueness.phi);
    require(s.uniqueness.phi >= 0.0, "uniqueness.phi", "must be non-negative");
    s.uniqueness.seeds = u.integer("seeds", s.uniqueness.seeds, 2);
    s.uniqueness.radius = u.number("radius", s.uniqueness.radius);
    require(s.uniqueness.radius > 0.0, "uniqueness.radius", "must be positive");
    u.finish();
  }

  if (top.has("carrier")) {
    Fields c(top.raw("carrier"), "carrier");
    s.carrier.half_lengths = c.numbers("half_lengths", s.carrier.half_lengths);
    require(!s.carrier.half_lengths.empty() && strictly_increasing(s.carrier.half_lengths) &&
                s.carrier.half_lengths.front() > 0.0,
            "carrier.half_lengths", "must be positive and strictly increasing");
    s.carrier.density = c.integer("density", s.carrier.density, 1);
    s.carrier.stability = c.number("stability", s.carrier.stability);
    c.finish();
  }

  if (top.has("inequalities")) {
    Fields q(top.raw("inequalities"), "inequalities");
    InequalitySpec& is = s.inequalities;
    is.half_length = q.number("half_length", is.half_length);
    require(is.half_length > 0.0, "inequalities.half_length", "must be positive");
    is.nx = q.integer("nx", is.nx, 1);
    is.ny = q.integer("ny", is.ny, 1);
    is.trials = q.integer("trials", is.trials, 1);
    is.korn_trials = q.integer("korn_trials", is.korn_trials, 1);
    is.korn_steps = q.integer("korn_steps", is.korn_steps, 0);
    is.rays = q.integer("rays", is.rays, 1);
    is.slabs = q.numbers("slabs", is.slabs);
    is.slab_nx = q.integer("slab_nx", is.slab_nx, 1);
    is.slab_ny = q.integer("slab_ny", is.slab_ny, 1);
    q.finish();
  }

  double t_max = s.T;
  if (top.has("sweep")) {
    Fields w(top.raw("sweep"), "sweep");
    SweepSpec sw;
    const std::string p = w.text("parameter", "", true);
    if (p == "phi") sw.parameter = SweepParameter::Phi;
    else if (p == "T") sw.parameter = SweepParameter::T;
    else if (p == "mesh") sw.parameter = SweepParameter::Mesh;
    else throw Error(ErrorCode::ConfigInvalid, "sweep.parameter must be phi, T or mesh");
    sw.values = w.numbers("values", {});
    require(!sw.values.empty(), "sweep.values", "must not be empty");
    require(strictly_increasing(sw.values), "sweep.values", "must be strictly increasing");
    if (sw.parameter == SweepParameter::Phi) require(sw.values.front() >= 0.0, "sweep.values", "must be non-negative");
    else require(sw.values.front() > 0.0, "sweep.values", "must be positive");
    if (sw.parameter == SweepParameter::T) t_max = std::max(t_max, sw.values.back());
    w.finish();
    s.sweep = sw;
  }

  if (bounds.empty()) {
    s.bounds_lo = -t_max - 10.0;
    s.bounds_hi = t_max + 10.0;
  } else {
    require(bounds.size() == 2 && bounds[0] < bounds[1], "profile.bounds", "must be [lo, hi] with lo < hi");
    s.bounds_lo = bounds[0];
    s.bounds_hi = bounds[1];
  }
  top.finish();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read config " + path.string());
  json config;
  try {
    config = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_scenario(config);
}

json Scenario::to_json() const {
  json j;
  j["name"] = name;
  j["profile"] = {{"f1", f1}, {"f2", f2}, {"bounds", {bounds_lo, bounds_hi}}};
  j["alpha"] = alpha;
  j["phi"] = phi;
  j["eps"] = eps;
  j["T"] = T;
  j["seed"] = seed;
  j["convention"] = to_string(solver.convention);
  j["mesh"] = {{"cells_per_unit", mesh.cells_per_unit},
               {"ny", mesh.ny},
               {"grading", to_string(mesh.grading)},
               {"grading_parameter", grading_parameter()}};
  j["solver"] = {{"tol_rel", solver.tol_rel},
                 {"max_picard", solver.max_picard},
                 {"max_newton", solver.max_newton},
                 {"damping", solver.damping},
                 {"max_damping_halvings", solver.max_damping_halvings},
                 {"continuation_steps", solver.continuation_steps},
                 {"max_eps_halvings", solver.max_eps_halvings},
                 {"form", to_string(solver.form)},
                 {"convection", solver.convection}};
  const VerifierConfig& vc = verify.config;
  j["verify"] = {{"t_points", verify.t_points},
                 {"checks", verify.checks},
                 {"far_field_start", verify.far_field_start},
                 {"thresholds",
                  {{"fit_lo", vc.fit_lo},
                   {"fit_hi", vc.fit_hi},
                   {"fit_residual", vc.fit_residual},
                   {"fit_stability", vc.fit_stability},
                   {"lower_bound_spread", vc.lower_bound_spread},
                   {"slab_spread", vc.slab_spread},
                   {"decay_spread", vc.decay_spread},
                   {"plateau_ratio", vc.plateau_ratio},
                   {"far_field_drop", vc.far_field_drop},
                   {"far_field_noise_factor", vc.far_field_noise_factor},
                   {"far_field_floor", vc.far_field_floor},
                   {"small_flux", vc.small_flux},
                   {"include_end_slabs", vc.include_end_slabs}}}};
  j["uniqueness"] = {{"phi", uniqueness.phi}, {"seeds", uniqueness.seeds}, {"radius", uniqueness.radius}};
  j["carrier"] = {{"half_lengths", carrier.half_lengths}, {"density", carrier.density},
                  {"stability", carrier.stability}};
  const InequalitySpec& is = inequalities;
  j["inequalities"] = {{"half_length", is.half_length}, {"nx", is.nx}, {"ny", is.ny},
                       {"trials", is.trials}, {"korn_trials", is.korn_trials}, {"korn_steps", is.korn_steps},
                       {"rays", is.rays}, {"slabs", is.slabs}, {"slab_nx", is.slab_nx}, {"slab_ny", is.slab_ny}};
  if (sweep) j["sweep"] = {{"parameter", to_string(sweep->parameter)}, {"values", sweep->values}};
  return j;
}

}  // namespace navslip
