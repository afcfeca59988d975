#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "navslip/error.hpp"
#include "navslip/pipeline.hpp"

using namespace navslip;
using nlohmann::json;

namespace {

json small_straight() {
  return json::parse(R"({
    "name": "small",
    "profile": {"f1": "-1", "f2": "1"},
    "alpha": 1.0, "phi": 0.1, "eps": 0.5, "T": 3,
    "mesh": {"cells_per_unit": 2, "ny": 8},
    "verify": {"t_points": 12, "checks": ["flux", "fit_linear", "lower_bound", "uniform_local"]}
  })");
}

ErrorCode code_of(const json& j) {
  try {
    parse_scenario(j);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::ConfigInvalid;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("scenario defaults and derived quantities") {
  const Scenario s = parse_scenario(small_straight());
  CHECK(s.name == "small");
  CHECK(s.nx() == 12);
  CHECK(s.mesh.grading == Grading::CarrierFitted);
  CHECK(s.grading_parameter() == 0.5);
  CHECK(s.bounds_lo == -13.0);
  CHECK(s.bounds_hi == 13.0);
  CHECK(s.solver.convention == ShearConvention::WeakFormConsistent);
  CHECK(s.verify.checks.size() == 4);
  CHECK(!s.sweep);
  const ChannelProfile p = s.profile();
  CHECK(p.d() == doctest::Approx(2.0));
  CHECK(p.beta() == doctest::Approx(0.0));
}

TEST_CASE("scenario validation names the field") {
  json j = small_straight();
  j["phi"] = -1.0;
  CHECK(code_of(j) == ErrorCode::ConfigInvalid);

  j = small_straight();
  j["mesh"]["nyy"] = 4;
  try {
    parse_scenario(j);
    FAIL("expected ConfigInvalid");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("mesh.nyy") != std::string::npos);
  }

  j = small_straight();
  j["sweep"] = {{"parameter", "phi"}, {"values", json::array()}};
  CHECK(code_of(j) == ErrorCode::ConfigInvalid);
  j["sweep"]["values"] = {0.1, 0.1};
  CHECK(code_of(j) == ErrorCode::ConfigInvalid);
  j["sweep"]["values"] = {1.0, 0.1};
  CHECK(code_of(j) == ErrorCode::ConfigInvalid);
  j["sweep"] = {{"parameter", "alpha"}, {"values", {1.0}}};
  CHECK(code_of(j) == ErrorCode::ConfigInvalid);

  j = small_straight();
  j["verify"]["checks"] = {"no_such_check"};
  CHECK(code_of(j) == ErrorCode::ConfigInvalid);

  j = small_straight();
  j["profile"]["f2"] = "1 + ";
  CHECK(code_of(j) == ErrorCode::ParseError);

  j = small_straight();
  j.erase("name");
  CHECK(code_of(j) == ErrorCode::ConfigInvalid);

  j = small_straight();
  j["mesh"]["ny"] = 2.5;
  CHECK(code_of(j) == ErrorCode::ConfigInvalid);
}

TEST_CASE("sweep over T widens the measured profile interval") {
  json j = small_straight();
  j["sweep"] = {{"parameter", "T"}, {"values", {3.0, 6.0}}};
  const Scenario s = parse_scenario(j);
  REQUIRE(s.sweep);
  CHECK(s.bounds_hi == 16.0);
  CHECK(s.to_json()["sweep"]["parameter"] == "T");
}

TEST_CASE("verdict aggregation and exit codes") {
  CHECK(aggregate({}) == Verdict::Pass);
  CHECK(aggregate({Verdict::Pass, Verdict::Pass}) == Verdict::Pass);
  CHECK(aggregate({Verdict::Pass, Verdict::Inconclusive}) == Verdict::Inconclusive);
  CHECK(aggregate({Verdict::Inconclusive, Verdict::Fail}) == Verdict::Fail);
  CHECK(exit_code(Verdict::Pass) == 0);
  CHECK(exit_code(Verdict::Inconclusive) == 0);
  CHECK(exit_code(Verdict::Fail) == 1);
}

TEST_CASE("zero flux gives vanishing energies and exit 0") {
  json j = small_straight();
  j["phi"] = 0.0;
  const RunResult r = run_command("verify", parse_scenario(j), {});
  CHECK(r.exit_code == 0);
  CHECK(r.report["solve"]["gradient_energy"].get<double>() == 0.0);
  CHECK(r.report["solve"]["carrier_energy"].get<double>() == 0.0);
  for (const json& y : r.report["energy_profile"]["y"]) CHECK(y.get<double>() == 0.0);
  CHECK(r.report["checks"]["flux"]["verdict"] == "Pass");
}

TEST_CASE("verify writes artifacts and repeats bit-identically") {
  const Scenario s = parse_scenario(small_straight());
  const auto root = std::filesystem::temp_directory_path() / "navslip_test_scenario";
  std::filesystem::remove_all(root);
  RunOptions a, b;
  a.out = root / "a";
  b.out = root / "b";
  const RunResult ra = run_command("verify", s, a);
  const RunResult rb = run_command("verify", s, b);
  CHECK(ra.exit_code == 0);
  CHECK(ra.report["schema_version"] == 1);
  CHECK(ra.report["checks"]["flux"]["verdict"] == "Pass");
  CHECK(std::filesystem::exists(a.out / "tables" / "energy_profile.csv"));
  CHECK(std::filesystem::exists(a.out / "plots" / "energy_profile.svg"));
  CHECK(slurp(a.out / "report.json") == slurp(b.out / "report.json"));
  CHECK(dump_report(ra.report) == slurp(a.out / "report.json"));
  std::filesystem::remove_all(root);
}

TEST_CASE("library errors map to exit code 2") {
  json j = small_straight();
  j["verify"]["far_field_start"] = 2.5;  // leaves less than two slabs
  j["verify"]["checks"] = {"far_field"};
  const RunResult r = run_command("verify", parse_scenario(j), {});
  CHECK(r.exit_code == 2);
  CHECK(r.report["error"]["code"] == "ConfigInvalid");

  json zero = small_straight();
  zero["phi"] = 0.0;
  CHECK(run_command("carrier-check", parse_scenario(zero), {}).exit_code == 2);
}
