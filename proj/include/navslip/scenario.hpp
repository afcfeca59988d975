#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "navslip/estimates.hpp"
#include "navslip/fem/mesh.hpp"
#include "navslip/solver.hpp"

namespace navslip {

struct MeshSpec {
  double cells_per_unit = 2.0;  // along x1
  int ny = 32;
  Grading grading = Grading::CarrierFitted;
  /// NaN: the carrier ε for CarrierFitted, the mesh default otherwise.
  double grading_parameter = std::numeric_limits<double>::quiet_NaN();
};

/// Names accepted in verify.checks.
const std::vector<std::string>& known_checks();

struct VerifySpec {
  int t_points = 40;
  std::vector<std::string> checks;
  double far_field_start = 0.0;
  VerifierConfig config;
};

struct UniquenessSpec {
  double phi = 0.05;
  int seeds = 5;
  double radius = 1.0;
};

struct CarrierSpec {
  std::vector<double> half_lengths{2.0, 6.0, 18.0};
  int density = 8;
  double stability = 0.2;  // allowed relative change of the energy ratio
};

struct InequalitySpec {
  double half_length = 2.0;
  int nx = 16;
  int ny = 4;
  int trials = 8;
  int korn_trials = 200;
  int korn_steps = 5;
  int rays = 10000;
  std::vector<double> slabs{5.0, 20.0, 80.0};
  int slab_nx = 8;
  int slab_ny = 8;
};

enum class SweepParameter { Phi, T, Mesh };
const char* to_string(SweepParameter p);

/// Mesh values scale both cells_per_unit and ny.
struct SweepSpec {
  SweepParameter parameter = SweepParameter::T;
  std::vector<double> values;
};

struct Scenario {
  std::string name;
  std::string f1;
  std::string f2;
  /// Interval on which the declared profile bounds are measured.
  double bounds_lo = 0.0;
  double bounds_hi = 0.0;
  double alpha = 1.0;
  double phi = 0.1;
  double eps = 0.5;
  double T = 10.0;
  MeshSpec mesh;
  SolveOptions solver;
  VerifySpec verify;
  UniquenessSpec uniqueness;
  CarrierSpec carrier;
  InequalitySpec inequalities;
  std::optional<SweepSpec> sweep;
  std::uint64_t seed = 1;

  ChannelProfile profile() const;
  int nx() const;
  double grading_parameter() const;
  nlohmann::json to_json() const;
};

/// Throws ConfigInvalid naming the field (unknown keys included) or
/// ParseError for a malformed profile expression.
Scenario parse_scenario(const nlohmann::json& config);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace navslip
